//! Negacyclic NTT over `Z_q[x]/(x^256 + 1)`.
//!
//! The forward transform uses Cooley-Tukey butterflies and leaves its output
//! in bit-reversed order; the inverse uses Gentleman-Sande butterflies and
//! consumes that order, so the pair composes to natural order.
//!
//! Twiddles are stored Montgomery-scaled (`1753^brv(i)·2^32 mod q`), which
//! keeps the forward output in the standard domain. Pointwise products then
//! pick up a factor `2^-32` which [`ntt_inverse_to_mont`] cancels by folding
//! `2^64/256` into its last step, so [`poly_mul`] is exact.
//!
//! The first forward level can be run in one of three modes depending on how
//! small the input is (see [`FirstLevel`]). Later levels always use
//! Montgomery reduction.

use crate::kernels::{self, Backend, LANES};
use crate::params::{N, Q};
use crate::poly::Poly;
use crate::ring::{self, MONT, QINV};

/// Primitive 512-th root of unity mod q.
pub const ROOT_OF_UNITY: i64 = 1753;

const fn pow_mod(mut base: i64, mut exp: u32) -> i64 {
    let q = Q as i64;
    let mut acc = 1i64;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % q;
        }
        base = base * base % q;
        exp >>= 1;
    }
    acc
}

const fn brv8(i: usize) -> u32 {
    (i as u8).reverse_bits() as u32
}

const fn centered(r: i64) -> i32 {
    let q = Q as i64;
    let r = r.rem_euclid(q);
    if r > q / 2 {
        (r - q) as i32
    } else {
        r as i32
    }
}

/// Montgomery-scaled twiddles in bit-reversed order, centered.
pub const ZETAS: [i32; N] = {
    let mut t = [0i32; N];
    let mut i = 0;
    while i < N {
        t[i] = centered(MONT as i64 * pow_mod(ROOT_OF_UNITY, brv8(i)) % Q as i64);
        i += 1;
    }
    t
};

/// `ZETAS[i]·q^-1 mod 2^32`, for the lane kernels.
pub const ZETAS_QINV: [i32; N] = {
    let mut t = [0i32; N];
    let mut i = 0;
    while i < N {
        t[i] = ZETAS[i].wrapping_mul(QINV);
        i += 1;
    }
    t
};

/// The level-1 twiddle without Montgomery scaling, used when the first level
/// skips Montgomery reduction.
pub const FIRST_LEVEL_ZETA: i32 = centered(pow_mod(ROOT_OF_UNITY, 128));

const INV_256: i64 = pow_mod(256, Q as u32 - 2);
/// `2^32/256 mod q`: the last inverse step then yields exactly the input.
const F_EXACT: i32 = centered(MONT as i64 * INV_256 % Q as i64);
/// `2^64/256 mod q`: the last inverse step multiplies by an extra `2^32`.
const F_TO_MONT: i32 = centered(MONT as i64 * MONT as i64 % Q as i64 * INV_256 % Q as i64);

/// How the first (len = 128) forward level reduces its products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FirstLevel {
    /// Montgomery product with the scaled twiddle. Accepts `|a| < q`.
    Montgomery,
    /// Plain product with the unscaled twiddle followed by the tailored
    /// reduction. Requires `|a| < 2^18`, so every product lies in
    /// `(-2^40, 2^40]`. Used for t0, t1 and the level-2 mask.
    Tailored,
    /// Plain product with no reduction at all. Requires `|a| <= 2^8`, so
    /// every product stays below 2^31. Used for c, s and e.
    Skip,
}

impl FirstLevel {
    fn input_limit(self) -> i64 {
        match self {
            FirstLevel::Montgomery => Q as i64 - 1,
            FirstLevel::Tailored => (1 << 18) - 1,
            FirstLevel::Skip => 1 << 8,
        }
    }
}

/// Forward transform in place. Output is in bit-reversed order with
/// `|out| < 9q` (Montgomery mode) or `< 2^31` (lazy modes).
pub fn ntt_in_place(a: &mut Poly, mode: FirstLevel) {
    let limit = mode.input_limit();
    debug_assert!(
        a.coeffs.iter().all(|&c| (c as i64).abs() <= limit),
        "input exceeds the {mode:?} first-level bound"
    );
    let lanes = kernels::backend() == Backend::Lanes;
    let c = &mut a.coeffs;

    // Level 1 (len = 128).
    let (lo, hi) = c.split_at_mut(128);
    match mode {
        FirstLevel::Montgomery => {
            if lanes {
                kernels::ct_butterflies(lo, hi, ZETAS[1], ZETAS_QINV[1]);
            } else {
                for (l, h) in lo.iter_mut().zip(hi.iter_mut()) {
                    let t = ring::montgomery_reduce(ZETAS[1] as i64 * *h as i64);
                    *h = *l - t;
                    *l += t;
                }
            }
        }
        FirstLevel::Tailored => {
            if lanes {
                kernels::ct_butterflies_tailored(lo, hi, FIRST_LEVEL_ZETA);
            } else {
                for (l, h) in lo.iter_mut().zip(hi.iter_mut()) {
                    let t = ring::tailored_reduce(FIRST_LEVEL_ZETA as i64 * *h as i64) as i32;
                    *h = *l - t;
                    *l += t;
                }
            }
        }
        FirstLevel::Skip => {
            for (l, h) in lo.iter_mut().zip(hi.iter_mut()) {
                let prod = FIRST_LEVEL_ZETA as i64 * *h as i64;
                debug_assert!(prod.abs() < 1 << 31);
                let t = prod as i32;
                *h = *l - t;
                *l += t;
            }
        }
    }

    // Levels 2..8, all Montgomery.
    let mut k = 2;
    let mut len = 64;
    while len >= 1 {
        let mut start = 0;
        while start < N {
            let (zeta, zeta_qinv) = (ZETAS[k], ZETAS_QINV[k]);
            k += 1;
            let (lo, hi) = c[start..start + 2 * len].split_at_mut(len);
            if lanes && len >= LANES {
                kernels::ct_butterflies(lo, hi, zeta, zeta_qinv);
            } else {
                for (l, h) in lo.iter_mut().zip(hi.iter_mut()) {
                    let t = ring::montgomery_reduce(zeta as i64 * *h as i64);
                    *h = *l - t;
                    *l += t;
                }
            }
            start += 2 * len;
        }
        len >>= 1;
    }
}

fn inverse_in_place(a: &mut Poly, last_factor: i32) {
    let lanes = kernels::backend() == Backend::Lanes;
    let c = &mut a.coeffs;
    // Bring inputs under q so the unreduced upper sums stay below 2^31.
    for x in c.iter_mut() {
        *x = ring::partial_reduce(*x);
    }
    let mut k = N;
    let mut len = 1;
    while len < N {
        let mut start = 0;
        while start < N {
            k -= 1;
            let zeta = -ZETAS[k];
            let zeta_qinv = zeta.wrapping_mul(QINV);
            let (lo, hi) = c[start..start + 2 * len].split_at_mut(len);
            if lanes && len >= LANES {
                kernels::gs_butterflies(lo, hi, zeta, zeta_qinv);
            } else {
                for (l, h) in lo.iter_mut().zip(hi.iter_mut()) {
                    let t = *l;
                    *l = t + *h;
                    *h = ring::montgomery_reduce(zeta as i64 * (t - *h) as i64);
                }
            }
            start += 2 * len;
        }
        len <<= 1;
    }
    if lanes {
        kernels::scale_montgomery(c, last_factor);
    } else {
        for x in c.iter_mut() {
            *x = ring::montgomery_reduce(last_factor as i64 * *x as i64);
        }
    }
}

/// Inverse transform whose output carries an extra factor `2^32`, cancelling
/// the `2^-32` of one pointwise Montgomery product. Output `|r| < q`.
pub fn ntt_inverse_to_mont_in_place(a: &mut Poly) {
    inverse_in_place(a, F_TO_MONT)
}

pub fn ntt_forward(f: &Poly, mode: FirstLevel) -> Poly {
    let mut out = *f;
    ntt_in_place(&mut out, mode);
    out
}

/// Exact inverse of [`ntt_forward`], canonical output.
pub fn ntt_inverse(fhat: &Poly) -> Poly {
    let mut out = *fhat;
    inverse_in_place(&mut out, F_EXACT);
    out.freeze()
}

pub fn ntt_inverse_to_mont(fhat: &Poly) -> Poly {
    let mut out = *fhat;
    ntt_inverse_to_mont_in_place(&mut out);
    out
}

/// `out[i] = montgomery_reduce(a[i]·b[i])`.
pub fn pointwise_montgomery(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::zero();
    if kernels::backend() == Backend::Lanes {
        kernels::pointwise_montgomery(&mut out.coeffs, &a.coeffs, &b.coeffs);
    } else {
        for i in 0..N {
            out.coeffs[i] = ring::montgomery_reduce(a.coeffs[i] as i64 * b.coeffs[i] as i64);
        }
    }
    out
}

/// Accumulates `sum_j a[j] ∘ b[j]` with one Montgomery reduction per term.
pub fn pointwise_acc_montgomery(a: &[Poly], b: &[Poly]) -> Poly {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Poly::zero();
    for (x, y) in a.iter().zip(b) {
        let t = pointwise_montgomery(x, y);
        for i in 0..N {
            acc.coeffs[i] += t.coeffs[i];
        }
    }
    acc
}

/// Exact product in `Z_q[x]/(x^256 + 1)` of two canonical polynomials.
pub fn poly_mul(f: &Poly, g: &Poly) -> Poly {
    let fh = ntt_forward(f, FirstLevel::Montgomery);
    let gh = ntt_forward(g, FirstLevel::Montgomery);
    let mut prod = pointwise_montgomery(&fh, &gh);
    ntt_inverse_to_mont_in_place(&mut prod);
    prod.freeze()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::schoolbook_mul;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_canonical(rng: &mut impl Rng) -> Poly {
        Poly::from_fn(|_| rng.gen_range(0..Q))
    }

    fn big_pow(base: i128, exp: u32) -> i128 {
        (0..exp).fold(1i128, |acc, _| acc * base % Q as i128)
    }

    /// f(r^(2·brv8(i)+1)) by Horner, with 128-bit arithmetic.
    fn evaluate_at_roots(f: &Poly) -> Vec<i128> {
        (0..N)
            .map(|i| {
                let x = big_pow(ROOT_OF_UNITY as i128, 2 * brv8(i) + 1);
                f.coeffs
                    .iter()
                    .rev()
                    .fold(0i128, |acc, &c| (acc * x + c as i128).rem_euclid(Q as i128))
            })
            .collect()
    }

    #[test]
    fn twiddle_table_matches_reference_values() {
        assert_eq!(ZETAS[1], 25847);
        assert_eq!(ZETAS[2], -2608894);
        assert_eq!(ZETAS[255], 1976782);
        assert_eq!(F_TO_MONT, 41978);
        for (i, &z) in ZETAS.iter().enumerate() {
            let want = (ring::MONT as i128 * big_pow(ROOT_OF_UNITY as i128, brv8(i)))
                .rem_euclid(Q as i128);
            assert_eq!((z as i128).rem_euclid(Q as i128), want);
        }
        assert_eq!(big_pow(ROOT_OF_UNITY as i128, 256), Q as i128 - 1);
    }

    #[test]
    fn zero_transforms_to_zero() {
        for mode in [
            FirstLevel::Montgomery,
            FirstLevel::Tailored,
            FirstLevel::Skip,
        ] {
            assert_eq!(ntt_forward(&Poly::zero(), mode).freeze(), Poly::zero());
        }
        assert_eq!(ntt_inverse(&Poly::zero()), Poly::zero());
    }

    #[test]
    fn forward_is_evaluation_at_odd_roots() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let one = Poly::monomial(0, 1);
        let small = Poly::from_fn(|_| rng.gen_range(-2..=2));
        for (f, mode) in [
            (one, FirstLevel::Montgomery),
            (one, FirstLevel::Skip),
            (small, FirstLevel::Skip),
            (small, FirstLevel::Tailored),
            (small, FirstLevel::Montgomery),
        ] {
            let got = ntt_forward(&f, mode);
            let want = evaluate_at_roots(&f);
            for (i, (&g, &w)) in got.coeffs.iter().zip(&want).enumerate() {
                assert_eq!((g as i128).rem_euclid(Q as i128), w, "{mode:?} index {i}");
            }
        }
    }

    #[test]
    fn roundtrip_and_monomials() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..100 {
            let f = random_canonical(&mut rng);
            assert_eq!(ntt_inverse(&ntt_forward(&f, FirstLevel::Montgomery)), f);
        }
        for i in [0, 1, 17, 255] {
            let x = Poly::monomial(i, 1);
            assert_eq!(ntt_inverse(&ntt_forward(&x, FirstLevel::Skip)), x);
        }
    }

    #[test]
    fn inverse_is_linear() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for _ in 0..20 {
            let a = random_canonical(&mut rng);
            let b = random_canonical(&mut rng);
            let sum = a.add(&b).freeze();
            assert_eq!(
                ntt_inverse(&sum),
                ntt_inverse(&a).add(&ntt_inverse(&b)).freeze()
            );
        }
    }

    #[test]
    fn pointwise_examples() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let b = random_canonical(&mut rng);
        assert_eq!(pointwise_montgomery(&b, &Poly::zero()), Poly::zero());
        let mont_one = Poly::from_fn(|_| MONT);
        assert_eq!(pointwise_montgomery(&mont_one, &b).freeze(), b);
        let a = random_canonical(&mut rng);
        let got = pointwise_montgomery(&a, &b);
        for i in 0..N {
            assert_eq!(
                got.coeffs[i],
                ring::montgomery_reduce(a.coeffs[i] as i64 * b.coeffs[i] as i64)
            );
        }
    }

    #[test]
    fn poly_mul_examples() {
        let one_plus_x = Poly::from_fn(|i| (i < 2) as i32);
        let sq = poly_mul(&one_plus_x, &one_plus_x);
        let mut want = Poly::zero();
        want.coeffs[..3].copy_from_slice(&[1, 2, 1]);
        assert_eq!(sq, want);

        let wrap = poly_mul(&Poly::monomial(255, 1), &Poly::monomial(1, 1));
        let mut want = Poly::zero();
        want.coeffs[0] = Q - 1;
        assert_eq!(wrap, want);

        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let f = random_canonical(&mut rng);
        assert_eq!(poly_mul(&f, &Poly::monomial(0, 1)), f);
    }

    #[test]
    fn poly_mul_matches_schoolbook() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..50 {
            let f = random_canonical(&mut rng);
            let g = random_canonical(&mut rng);
            assert_eq!(poly_mul(&f, &g), schoolbook_mul(&f, &g));
        }
    }

    #[test]
    fn lazy_modes_agree_with_montgomery_mode() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        for _ in 0..50 {
            let tiny = Poly::from_fn(|_| rng.gen_range(-256..=256));
            let mid = Poly::from_fn(|_| rng.gen_range(-(1 << 18) + 1..1 << 18));
            let reference = ntt_forward(&tiny, FirstLevel::Montgomery).freeze();
            assert_eq!(ntt_forward(&tiny, FirstLevel::Skip).freeze(), reference);
            assert_eq!(ntt_forward(&tiny, FirstLevel::Tailored).freeze(), reference);
            assert_eq!(
                ntt_forward(&mid, FirstLevel::Tailored).freeze(),
                ntt_forward(&mid, FirstLevel::Montgomery).freeze()
            );
        }
    }

    #[test]
    fn backends_are_bit_identical() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        for _ in 0..20 {
            let f = Poly::from_fn(|_| rng.gen_range(-(1 << 17)..(1 << 17)));
            for mode in [FirstLevel::Montgomery, FirstLevel::Tailored] {
                let s = kernels::with_backend(Backend::Scalar, || ntt_forward(&f, mode));
                let l = kernels::with_backend(Backend::Lanes, || ntt_forward(&f, mode));
                assert_eq!(s, l);
                let si = kernels::with_backend(Backend::Scalar, || ntt_inverse_to_mont(&s));
                let li = kernels::with_backend(Backend::Lanes, || ntt_inverse_to_mont(&s));
                assert_eq!(si, li);
            }
        }
    }

    #[test]
    #[should_panic]
    fn skip_mode_rejects_large_inputs_in_debug() {
        let f = Poly::from_fn(|_| 300);
        let _ = ntt_forward(&f, FirstLevel::Skip);
    }
}
