//! Scheme constants for the three security levels and the PSPM packing table.
//!
//! Level constants (k, l, eta, gamma1, gamma2, omega) follow the round-3
//! Dilithium specification.

use crate::Error;

/// Ring modulus `q = 2^23 - 2^13 + 1`.
pub const Q: i32 = 8_380_417;
/// Ring degree.
pub const N: usize = 256;
/// Bits dropped from `t` by Power2Round.
pub const D: u32 = 13;

/// Seed length for rho, K, tr and the challenge seed c~.
pub const SEED_BYTES: usize = 32;
/// Length of rho' and mu.
pub const CRH_BYTES: usize = 64;

/// Packed width of one t1 coefficient.
pub const T1_BITS: u32 = 10;
pub const T1_POLY_BYTES: usize = N * T1_BITS as usize / 8;
pub const T0_POLY_BYTES: usize = N * D as usize / 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Two,
    Three,
    Five,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Two, Level::Three, Level::Five];

    pub fn from_number(level: u32) -> Result<Level, Error> {
        match level {
            2 => Ok(Level::Two),
            3 => Ok(Level::Three),
            5 => Ok(Level::Five),
            other => Err(Error::UnknownLevel(other)),
        }
    }

    pub fn number(self) -> u32 {
        match self {
            Level::Two => 2,
            Level::Three => 3,
            Level::Five => 5,
        }
    }

    pub fn params(self) -> &'static ParamSet {
        match self {
            Level::Two => &DILITHIUM2,
            Level::Three => &DILITHIUM3,
            Level::Five => &DILITHIUM5,
        }
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl std::str::FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let n: u32 = s.trim().parse().map_err(|_| Error::UnknownLevel(0))?;
        Level::from_number(n)
    }
}

/// Per-level scheme constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamSet {
    pub level: Level,
    pub k: usize,
    pub l: usize,
    pub eta: i32,
    pub tau: usize,
    pub beta: i32,
    pub gamma1: i32,
    pub gamma2: i32,
    pub omega: usize,
}

pub const DILITHIUM2: ParamSet = ParamSet {
    level: Level::Two,
    k: 4,
    l: 4,
    eta: 2,
    tau: 39,
    beta: 78,
    gamma1: 1 << 17,
    gamma2: (Q - 1) / 88,
    omega: 80,
};

pub const DILITHIUM3: ParamSet = ParamSet {
    level: Level::Three,
    k: 6,
    l: 5,
    eta: 4,
    tau: 49,
    beta: 196,
    gamma1: 1 << 19,
    gamma2: (Q - 1) / 32,
    omega: 55,
};

pub const DILITHIUM5: ParamSet = ParamSet {
    level: Level::Five,
    k: 8,
    l: 7,
    eta: 2,
    tau: 60,
    beta: 120,
    gamma1: 1 << 19,
    gamma2: (Q - 1) / 32,
    omega: 75,
};

pub fn get_params(level: u32) -> Result<&'static ParamSet, Error> {
    Level::from_number(level).map(Level::params)
}

impl ParamSet {
    pub const Q: i32 = Q;
    pub const N: usize = N;
    pub const D: u32 = D;

    /// Bits per packed secret coefficient (`eta - a`).
    pub fn eta_bits(&self) -> u32 {
        if self.eta == 2 {
            3
        } else {
            4
        }
    }

    /// Bits per packed z coefficient (`gamma1 - a`).
    pub fn z_bits(&self) -> u32 {
        if self.gamma1 == 1 << 17 {
            18
        } else {
            20
        }
    }

    /// Bits per packed w1 coefficient: range [0,43] or [0,15].
    pub fn w1_bits(&self) -> u32 {
        if self.gamma2 == (Q - 1) / 88 {
            6
        } else {
            4
        }
    }

    pub fn eta_poly_bytes(&self) -> usize {
        N * self.eta_bits() as usize / 8
    }

    pub fn z_poly_bytes(&self) -> usize {
        N * self.z_bits() as usize / 8
    }

    pub fn w1_poly_bytes(&self) -> usize {
        N * self.w1_bits() as usize / 8
    }

    pub fn pk_bytes(&self) -> usize {
        SEED_BYTES + self.k * T1_POLY_BYTES
    }

    pub fn sk_bytes(&self) -> usize {
        3 * SEED_BYTES + (self.l + self.k) * self.eta_poly_bytes() + self.k * T0_POLY_BYTES
    }

    pub fn sig_bytes(&self) -> usize {
        SEED_BYTES + self.l * self.z_poly_bytes() + self.omega + self.k
    }
}

/// Which challenge product a PSPM table serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PspmTarget {
    /// `c·s` (s1)
    Cs,
    /// `c·e` (s2)
    Ce,
    /// `c·t0`
    Ct0,
    /// `c·t1`
    Ct1,
}

impl PspmTarget {
    pub const ALL: [PspmTarget; 4] = [
        PspmTarget::Cs,
        PspmTarget::Ce,
        PspmTarget::Ct0,
        PspmTarget::Ct1,
    ];
}

/// Packing parameters for one PSPM table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PspmParams {
    /// Number of nonzero challenge coefficients accumulated.
    pub tau: usize,
    /// Coefficient magnitude bound U.
    pub bound: i32,
    /// log2 of the digit radix M.
    pub radix_bits: u32,
    /// Number of packed polynomials r.
    pub len: usize,
    pub digits_per_word: usize,
    pub words_per_index: usize,
    /// Per-word translation constant `2U·(M^d - 1)/(M - 1)` for the `d`
    /// digits that word carries.
    pub gamma_words: Vec<u32>,
}

impl PspmParams {
    pub fn new(tau: usize, bound: i32, radix_bits: u32, len: usize) -> Result<Self, Error> {
        let bad = |reason: &str| Error::decode("PSPM parameters", reason);
        if !(1..=32).contains(&radix_bits) || len == 0 || bound < 0 {
            return Err(bad("radix, length or bound out of range"));
        }
        let radix = 1u64 << radix_bits;
        if 2 * tau as u64 * bound as u64 >= radix {
            return Err(bad("2·tau·U must be below the digit radix"));
        }
        let digits_per_word = (32 / radix_bits) as usize;
        let words_per_index = len.div_ceil(digits_per_word);
        let gamma_words = (0..words_per_index)
            .map(|w| {
                let digits = (len - w * digits_per_word).min(digits_per_word) as u32;
                // (M^d - 1)/(M - 1) = 1 + M + ... + M^(d-1)
                let repunit: u64 = (0..digits).map(|i| radix.pow(i)).sum();
                (2 * bound as u64 * repunit) as u32
            })
            .collect();
        Ok(PspmParams {
            tau,
            bound,
            radix_bits,
            len,
            digits_per_word,
            words_per_index,
            gamma_words,
        })
    }

    pub fn radix(&self) -> u64 {
        1 << self.radix_bits
    }

    pub fn digit_mask(&self) -> u32 {
        ((1u64 << self.radix_bits) - 1) as u32
    }

    /// Number of digits held by word `w` of an index.
    pub fn digits_in_word(&self, w: usize) -> usize {
        (self.len - w * self.digits_per_word).min(self.digits_per_word)
    }

    /// Worst-case digit growth `2·tau·U` over tau accumulations.
    pub fn growth(&self) -> u64 {
        2 * self.tau as u64 * self.bound as u64
    }

    /// Packing parameters for each (level, target) pair.
    pub fn for_level(level: Level, target: PspmTarget) -> Self {
        let p = level.params();
        let (bound, radix_bits, len) = match (level, target) {
            (Level::Two, PspmTarget::Cs) => (2, 8, 4),
            (Level::Two, PspmTarget::Ce) => (2, 8, 4),
            (Level::Three, PspmTarget::Cs) => (4, 9, 5),
            (Level::Three, PspmTarget::Ce) => (4, 9, 6),
            (Level::Five, PspmTarget::Cs) => (2, 8, 7),
            (Level::Five, PspmTarget::Ce) => (2, 8, 8),
            (_, PspmTarget::Ct0) => (1 << 12, 19, p.k),
            (_, PspmTarget::Ct1) => (1 << 10, 17, p.k),
        };
        PspmParams::new(p.tau, bound, radix_bits, len).expect("built-in rows satisfy 2·tau·U < M")
    }

    /// Level-2 layout that stores s and e in one table (l + k digits).
    pub fn combined(level: Level) -> Self {
        let p = level.params();
        let row = Self::for_level(level, PspmTarget::Cs);
        PspmParams::new(p.tau, row.bound, row.radix_bits, p.l + p.k)
            .expect("combined layout is valid")
    }
}

pub fn get_pspm_params(level: u32, target: PspmTarget) -> Result<PspmParams, Error> {
    Ok(PspmParams::for_level(Level::from_number(level)?, target))
}
