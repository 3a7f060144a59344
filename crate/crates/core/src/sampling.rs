//! Deterministic expansion of seeds into polynomials.
//!
//! With the [`Backend::Lanes`] backend, independent streams (matrix entries,
//! secret polynomials, mask polynomials) are squeezed eight at a time through
//! [`BatchXof`]; the output is identical to the sequential path.

use crate::encode::{unpack_bits, Transform};
use crate::kernels::{self, Backend};
use crate::params::{ParamSet, CRH_BYTES, N, Q, SEED_BYTES};
use crate::poly::Poly;
use crate::xof::{BatchXof, Shake, ShakeVariant, BATCH_WIDTH, SHAKE128_RATE, SHAKE256_RATE};

/// Appends coefficients drawn from 3-byte little-endian candidates (top bit
/// masked, accepted when `< q`) until `out` is full or `bytes` runs out.
/// Returns the new fill count.
pub fn rej_uniform_scalar(out: &mut [i32], mut filled: usize, bytes: &[u8]) -> usize {
    for b in bytes.chunks_exact(3) {
        if filled >= out.len() {
            break;
        }
        let t = (b[0] as i32 | (b[1] as i32) << 8 | (b[2] as i32) << 16) & 0x7F_FFFF;
        if t < Q {
            out[filled] = t;
            filled += 1;
        }
    }
    filled
}

fn rej_uniform(out: &mut [i32], filled: usize, bytes: &[u8]) -> usize {
    match kernels::backend() {
        Backend::Scalar => rej_uniform_scalar(out, filled, bytes),
        Backend::Lanes => kernels::rej_uniform(out, filled, bytes),
    }
}

/// Appends coefficients in `[-eta, eta]` from half-bytes, low half first.
pub fn rej_eta(out: &mut [i32], mut filled: usize, bytes: &[u8], eta: i32) -> usize {
    for &b in bytes {
        for t in [(b & 0x0F) as i32, (b >> 4) as i32] {
            if filled >= out.len() {
                return filled;
            }
            match eta {
                2 if t < 15 => {
                    out[filled] = 2 - t % 5;
                    filled += 1;
                }
                4 if t < 9 => {
                    out[filled] = 4 - t;
                    filled += 1;
                }
                2 | 4 => {}
                _ => panic!("unsupported eta {eta}"),
            }
        }
    }
    filled
}

fn seed_with_nonce<const L: usize>(seed: &[u8], nonce: u16) -> [u8; L] {
    let mut input = [0u8; L];
    input[..L - 2].copy_from_slice(seed);
    input[L - 2..].copy_from_slice(&nonce.to_le_bytes());
    input
}

fn uniform_entry_input(rho: &[u8; SEED_BYTES], i: usize, j: usize) -> [u8; SEED_BYTES + 2] {
    seed_with_nonce(rho, ((i << 8) + j) as u16)
}

/// Entry `(i, j)` of the public matrix, canonical and already in the NTT
/// domain.
pub fn expand_a_entry(rho: &[u8; SEED_BYTES], i: usize, j: usize) -> Poly {
    let mut xof = Shake::shake128();
    xof.absorb(&uniform_entry_input(rho, i, j));
    let mut p = Poly::zero();
    let mut filled = 0;
    let mut block = [0u8; SHAKE128_RATE];
    while filled < N {
        xof.squeeze(&mut block);
        filled = rej_uniform(&mut p.coeffs, filled, &block);
    }
    p
}

/// The `k x l` public matrix, row major.
pub fn expand_a(rho: &[u8; SEED_BYTES], p: &ParamSet) -> Vec<Vec<Poly>> {
    let positions: Vec<(usize, usize)> = (0..p.k)
        .flat_map(|i| (0..p.l).map(move |j| (i, j)))
        .collect();
    let flat: Vec<Poly> = match kernels::backend() {
        Backend::Scalar => positions
            .iter()
            .map(|&(i, j)| expand_a_entry(rho, i, j))
            .collect(),
        Backend::Lanes => batched(
            &positions,
            |&(i, j)| uniform_entry_input(rho, i, j),
            ShakeVariant::Shake128,
            rej_uniform,
        ),
    };
    flat.chunks(p.l).map(|row| row.to_vec()).collect()
}

/// Runs one rejection sampler per item over batched streams. Items beyond a
/// multiple of the batch width go through a padded batch.
fn batched<T, const L: usize>(
    items: &[T],
    input: impl Fn(&T) -> [u8; L],
    variant: ShakeVariant,
    sample: impl Fn(&mut [i32], usize, &[u8]) -> usize,
) -> Vec<Poly> {
    let rate = variant.rate();
    let mut out = Vec::with_capacity(items.len());
    for chunk in items.chunks(BATCH_WIDTH) {
        let inputs: Vec<[u8; L]> = chunk.iter().map(&input).collect();
        let lanes: [&[u8]; BATCH_WIDTH] =
            std::array::from_fn(|l| &inputs[l.min(inputs.len() - 1)][..]);
        let mut xof = BatchXof::<BATCH_WIDTH>::new(variant, lanes);
        let mut polys = vec![Poly::zero(); chunk.len()];
        let mut filled = vec![0usize; chunk.len()];
        while filled.iter().any(|&f| f < N) {
            let blocks = xof.squeeze_blocks();
            for (l, poly) in polys.iter_mut().enumerate() {
                if filled[l] < N {
                    filled[l] = sample(&mut poly.coeffs, filled[l], &blocks[l][..rate]);
                }
            }
        }
        out.extend(polys);
    }
    out
}

fn secret_input(rho_prime: &[u8; CRH_BYTES], nonce: u16) -> [u8; CRH_BYTES + 2] {
    seed_with_nonce(rho_prime, nonce)
}

/// One secret polynomial with coefficients in `[-eta, eta]`.
pub fn expand_s_poly(rho_prime: &[u8; CRH_BYTES], nonce: u16, eta: i32) -> Poly {
    let mut xof = Shake::shake256();
    xof.absorb(&secret_input(rho_prime, nonce));
    let mut p = Poly::zero();
    let mut filled = 0;
    let mut block = [0u8; SHAKE256_RATE];
    while filled < N {
        xof.squeeze(&mut block);
        filled = rej_eta(&mut p.coeffs, filled, &block, eta);
    }
    p
}

/// `(s, e)` with `l` and `k` polynomials; nonces `0..l` for `s` and
/// `l..l+k` for `e`.
pub fn expand_s(rho_prime: &[u8; CRH_BYTES], p: &ParamSet) -> (Vec<Poly>, Vec<Poly>) {
    let nonces: Vec<u16> = (0..(p.l + p.k) as u16).collect();
    let mut all: Vec<Poly> = match kernels::backend() {
        Backend::Scalar => nonces
            .iter()
            .map(|&n| expand_s_poly(rho_prime, n, p.eta))
            .collect(),
        Backend::Lanes => batched(
            &nonces,
            |&n| secret_input(rho_prime, n),
            ShakeVariant::Shake256,
            |out, filled, block| rej_eta(out, filled, block, p.eta),
        ),
    };
    let e = all.split_off(p.l);
    (all, e)
}

/// Masking vector for attempt counter `kappa`: polynomial `j` uses nonce
/// `kappa + j` (wrapping). Coefficients are centered, in `(-gamma1, gamma1]`.
pub fn expand_mask(rho_prime: &[u8; CRH_BYTES], kappa: u16, p: &ParamSet) -> Vec<Poly> {
    let len = p.z_poly_bytes();
    let nonces: Vec<u16> = (0..p.l as u16).map(|j| kappa.wrapping_add(j)).collect();
    let streams: Vec<Vec<u8>> = match kernels::backend() {
        Backend::Scalar => nonces
            .iter()
            .map(|&n| {
                let mut xof = Shake::shake256();
                xof.absorb(&secret_input(rho_prime, n));
                xof.squeeze_vec(len)
            })
            .collect(),
        Backend::Lanes => {
            let mut streams = Vec::with_capacity(p.l);
            for chunk in nonces.chunks(BATCH_WIDTH) {
                let inputs: Vec<[u8; CRH_BYTES + 2]> =
                    chunk.iter().map(|&n| secret_input(rho_prime, n)).collect();
                let lanes: [&[u8]; BATCH_WIDTH] =
                    std::array::from_fn(|l| &inputs[l.min(inputs.len() - 1)][..]);
                let out = BatchXof::<BATCH_WIDTH>::new(ShakeVariant::Shake256, lanes).squeeze(len);
                streams.extend(out.into_iter().take(chunk.len()));
            }
            streams
        }
    };
    streams
        .iter()
        .map(|s| {
            unpack_bits(s, p.z_bits(), Transform::Gamma1Offset(p.gamma1))
                .expect("mask stream has the packed length")
        })
        .collect()
}

/// Challenge with exactly `tau` coefficients equal to `±1`.
pub fn sample_in_ball(c_tilde: &[u8], tau: usize) -> Poly {
    let mut xof = Shake::shake256();
    xof.absorb(c_tilde);
    let mut sign_bytes = [0u8; 8];
    xof.squeeze(&mut sign_bytes);
    let mut signs = u64::from_le_bytes(sign_bytes);
    let mut c = Poly::zero();
    let mut byte = [0u8; 1];
    for i in N - tau..N {
        let b = loop {
            xof.squeeze(&mut byte);
            if byte[0] as usize <= i {
                break byte[0] as usize;
            }
        };
        c.coeffs[i] = c.coeffs[b];
        c.coeffs[b] = 1 - 2 * (signs & 1) as i32;
        signs >>= 1;
    }
    c
}
