//! Keccak-f[1600], SHAKE-128/256 and a batched N-lane SHAKE whose lanes are
//! permuted in lockstep.

const ROUND_CONSTANTS: [u64; 24] = [
    0x0000_0000_0000_0001,
    0x0000_0000_0000_8082,
    0x8000_0000_0000_808A,
    0x8000_0000_8000_8000,
    0x0000_0000_0000_808B,
    0x0000_0000_8000_0001,
    0x8000_0000_8000_8081,
    0x8000_0000_0000_8009,
    0x0000_0000_0000_008A,
    0x0000_0000_0000_0088,
    0x0000_0000_8000_8009,
    0x0000_0000_8000_000A,
    0x0000_0000_8000_808B,
    0x8000_0000_0000_008B,
    0x8000_0000_0000_8089,
    0x8000_0000_0000_8003,
    0x8000_0000_0000_8002,
    0x8000_0000_0000_0080,
    0x0000_0000_0000_800A,
    0x8000_0000_8000_000A,
    0x8000_0000_8000_8081,
    0x8000_0000_0000_8080,
    0x0000_0000_8000_0001,
    0x8000_0000_8000_8008,
];

/// Rotation offsets, indexed `x + 5y`.
const RHO: [u32; 25] = [
    0, 1, 62, 28, 27, //
    36, 44, 6, 55, 20, //
    3, 10, 43, 25, 39, //
    41, 45, 15, 21, 8, //
    18, 2, 61, 56, 14,
];

/// 24-round Keccak-f[1600] on a state indexed `x + 5y`.
pub fn keccak_permute(s: &mut [u64; 25]) {
    let mut b = [0u64; 25];
    for rc in ROUND_CONSTANTS {
        // theta
        let mut c = [0u64; 5];
        for x in 0..5 {
            c[x] = s[x] ^ s[x + 5] ^ s[x + 10] ^ s[x + 15] ^ s[x + 20];
        }
        for x in 0..5 {
            let d = c[(x + 4) % 5] ^ c[(x + 1) % 5].rotate_left(1);
            for y in 0..5 {
                s[x + 5 * y] ^= d;
            }
        }
        // rho and pi
        for x in 0..5 {
            for y in 0..5 {
                b[y + 5 * ((2 * x + 3 * y) % 5)] = s[x + 5 * y].rotate_left(RHO[x + 5 * y]);
            }
        }
        // chi
        for y in 0..5 {
            for x in 0..5 {
                s[x + 5 * y] = b[x + 5 * y] ^ (!b[(x + 1) % 5 + 5 * y] & b[(x + 2) % 5 + 5 * y]);
            }
        }
        // iota
        s[0] ^= rc;
    }
}

/// Keccak-f[1600] over `W` states stored lane-interleaved, so each step is a
/// `W`-wide operation on one state word.
pub fn keccak_permute_lanes<const W: usize>(s: &mut [[u64; W]; 25]) {
    let mut b = [[0u64; W]; 25];
    for rc in ROUND_CONSTANTS {
        let mut c = [[0u64; W]; 5];
        for x in 0..5 {
            for l in 0..W {
                c[x][l] = s[x][l] ^ s[x + 5][l] ^ s[x + 10][l] ^ s[x + 15][l] ^ s[x + 20][l];
            }
        }
        for x in 0..5 {
            let mut d = [0u64; W];
            for l in 0..W {
                d[l] = c[(x + 4) % 5][l] ^ c[(x + 1) % 5][l].rotate_left(1);
            }
            for y in 0..5 {
                for l in 0..W {
                    s[x + 5 * y][l] ^= d[l];
                }
            }
        }
        for x in 0..5 {
            for y in 0..5 {
                let dst = y + 5 * ((2 * x + 3 * y) % 5);
                for l in 0..W {
                    b[dst][l] = s[x + 5 * y][l].rotate_left(RHO[x + 5 * y]);
                }
            }
        }
        for y in 0..5 {
            for x in 0..5 {
                let (b0, b1, b2) = (b[x + 5 * y], b[(x + 1) % 5 + 5 * y], b[(x + 2) % 5 + 5 * y]);
                for (l, v) in s[x + 5 * y].iter_mut().enumerate() {
                    *v = b0[l] ^ (!b1[l] & b2[l]);
                }
            }
        }
        for v in &mut s[0] {
            *v ^= rc;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShakeVariant {
    Shake128,
    Shake256,
}

impl ShakeVariant {
    /// Rate in bytes.
    pub const fn rate(self) -> usize {
        match self {
            ShakeVariant::Shake128 => 168,
            ShakeVariant::Shake256 => 136,
        }
    }
}

pub const SHAKE128_RATE: usize = ShakeVariant::Shake128.rate();
pub const SHAKE256_RATE: usize = ShakeVariant::Shake256.rate();

const DOMAIN_PAD: u8 = 0x1F;

fn xor_byte(state: &mut [u64; 25], pos: usize, byte: u8) {
    state[pos / 8] ^= (byte as u64) << (8 * (pos % 8));
}

fn read_byte(state: &[u64; 25], pos: usize) -> u8 {
    (state[pos / 8] >> (8 * (pos % 8))) as u8
}

/// Incremental SHAKE stream. Absorbing after the first squeeze is a logic
/// error and panics.
#[derive(Clone)]
pub struct Shake {
    state: [u64; 25],
    variant: ShakeVariant,
    pos: usize,
    squeezing: bool,
}

impl Shake {
    pub fn new(variant: ShakeVariant) -> Self {
        Shake {
            state: [0; 25],
            variant,
            pos: 0,
            squeezing: false,
        }
    }

    pub fn shake128() -> Self {
        Self::new(ShakeVariant::Shake128)
    }

    pub fn shake256() -> Self {
        Self::new(ShakeVariant::Shake256)
    }

    pub fn variant(&self) -> ShakeVariant {
        self.variant
    }

    pub fn absorb(&mut self, data: &[u8]) -> &mut Self {
        assert!(!self.squeezing, "absorb after squeeze");
        let rate = self.variant.rate();
        for &byte in data {
            xor_byte(&mut self.state, self.pos, byte);
            self.pos += 1;
            if self.pos == rate {
                keccak_permute(&mut self.state);
                self.pos = 0;
            }
        }
        self
    }

    fn finalize(&mut self) {
        let rate = self.variant.rate();
        xor_byte(&mut self.state, self.pos, DOMAIN_PAD);
        xor_byte(&mut self.state, rate - 1, 0x80);
        self.pos = rate;
        self.squeezing = true;
    }

    pub fn squeeze(&mut self, out: &mut [u8]) {
        if !self.squeezing {
            self.finalize();
        }
        let rate = self.variant.rate();
        for byte in out.iter_mut() {
            if self.pos == rate {
                keccak_permute(&mut self.state);
                self.pos = 0;
            }
            *byte = read_byte(&self.state, self.pos);
            self.pos += 1;
        }
    }

    pub fn squeeze_vec(&mut self, len: usize) -> Vec<u8> {
        let mut out = vec![0u8; len];
        self.squeeze(&mut out);
        out
    }

    /// Raw state after absorbing and padding, before the first output
    /// permutation. Used to seed batched lanes.
    fn padded_state(mut self) -> [u64; 25] {
        if !self.squeezing {
            self.finalize();
        }
        assert_eq!(self.pos, self.variant.rate(), "stream already squeezed");
        self.state
    }
}

/// One-shot SHAKE of `input`.
pub fn shake(variant: ShakeVariant, input: &[u8], out_len: usize) -> Vec<u8> {
    let mut s = Shake::new(variant);
    s.absorb(input);
    s.squeeze_vec(out_len)
}

pub fn shake256(parts: &[&[u8]], out: &mut [u8]) {
    let mut s = Shake::shake256();
    for p in parts {
        s.absorb(p);
    }
    s.squeeze(out);
}

/// `W` independent SHAKE streams squeezed in lockstep: every call permutes
/// all lanes the same number of times. Lane `i` produces exactly the bytes a
/// standalone [`Shake`] over `inputs[i]` would.
#[derive(Clone)]
pub struct BatchXof<const W: usize> {
    state: [[u64; W]; 25],
    variant: ShakeVariant,
    buf: [[u8; SHAKE128_RATE]; W],
    pos: usize,
}

impl<const W: usize> BatchXof<W> {
    pub fn new(variant: ShakeVariant, inputs: [&[u8]; W]) -> Self {
        let mut state = [[0u64; W]; 25];
        let same_len = inputs.iter().all(|i| i.len() == inputs[0].len());
        let rate = variant.rate();
        if same_len && inputs[0].len() < rate {
            // Single-block inputs of equal length are absorbed in lockstep.
            let len = inputs[0].len();
            for (l, input) in inputs.iter().enumerate() {
                for (p, &byte) in input.iter().enumerate() {
                    state[p / 8][l] ^= (byte as u64) << (8 * (p % 8));
                }
            }
            for v in &mut state[len / 8] {
                *v ^= (DOMAIN_PAD as u64) << (8 * (len % 8));
            }
            for v in &mut state[(rate - 1) / 8] {
                *v ^= 0x80u64 << (8 * ((rate - 1) % 8));
            }
        } else {
            for (l, input) in inputs.iter().enumerate() {
                let mut lane = Shake::new(variant);
                lane.absorb(input);
                for (w, word) in lane.padded_state().iter().enumerate() {
                    state[w][l] = *word;
                }
            }
        }
        BatchXof {
            state,
            variant,
            buf: [[0; SHAKE128_RATE]; W],
            pos: rate,
        }
    }

    pub fn variant(&self) -> ShakeVariant {
        self.variant
    }

    /// Permutes all lanes once and returns one output block per lane (only
    /// the first `rate` bytes of each buffer are meaningful).
    pub fn squeeze_blocks(&mut self) -> &[[u8; SHAKE128_RATE]; W] {
        let rate = self.variant.rate();
        keccak_permute_lanes(&mut self.state);
        for l in 0..W {
            for p in 0..rate {
                self.buf[l][p] = (self.state[p / 8][l] >> (8 * (p % 8))) as u8;
            }
        }
        self.pos = rate;
        &self.buf
    }

    /// Next `len` bytes of every lane.
    pub fn squeeze(&mut self, len: usize) -> [Vec<u8>; W] {
        let rate = self.variant.rate();
        let mut out: [Vec<u8>; W] = std::array::from_fn(|_| Vec::with_capacity(len));
        let mut remaining = len;
        while remaining > 0 {
            if self.pos == rate {
                self.squeeze_blocks();
                self.pos = 0;
            }
            let take = remaining.min(rate - self.pos);
            for (l, o) in out.iter_mut().enumerate() {
                o.extend_from_slice(&self.buf[l][self.pos..self.pos + take]);
            }
            self.pos += take;
            remaining -= take;
        }
        out
    }
}

/// Batch width used by the samplers.
pub const BATCH_WIDTH: usize = 8;
