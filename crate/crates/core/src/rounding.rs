//! Power2Round, Decompose, hints and infinity-norm checks.
//!
//! Inputs are canonical, in `[0, q)`. Decompose and the norm check are
//! branch-free in the coefficient values.

use crate::params::{D, N, Q};
use crate::poly::Poly;
use crate::ring;

/// `r = r1·2^d + r0` with `r0` in `(-2^(d-1), 2^(d-1)]`.
#[inline]
pub fn power2round(r: i32) -> (i32, i32) {
    debug_assert!((0..Q).contains(&r));
    let r1 = (r + (1 << (D - 1)) - 1) >> D;
    (r1, r - (r1 << D))
}

/// `r ≡ r1·2γ2 + r0 (mod q)` with `r0` in `(-γ2, γ2]`, except that when
/// `r - r0 = q - 1` the pair becomes `(0, r0 - 1)`.
#[inline]
pub fn decompose(r: i32, gamma2: i32) -> (i32, i32) {
    debug_assert!((0..Q).contains(&r));
    let mut r1 = (r + 127) >> 7;
    if gamma2 == (Q - 1) / 32 {
        r1 = (r1 * 1025 + (1 << 21)) >> 22;
        r1 &= 15;
    } else {
        debug_assert_eq!(gamma2, (Q - 1) / 88);
        r1 = (r1 * 11275 + (1 << 23)) >> 24;
        r1 ^= ((43 - r1) >> 31) & r1;
    }
    let mut r0 = r - r1 * 2 * gamma2;
    r0 -= (((Q - 1) / 2 - r0) >> 31) & Q;
    (r1, r0)
}

#[inline]
pub fn high_bits(r: i32, gamma2: i32) -> i32 {
    decompose(r, gamma2).0
}

#[inline]
pub fn low_bits(r: i32, gamma2: i32) -> i32 {
    decompose(r, gamma2).1
}

/// 1 iff `HighBits(r) != HighBits(r + z)`; `z` may be any value with
/// `|z| < q`.
#[inline]
pub fn make_hint(z: i32, r: i32, gamma2: i32) -> i32 {
    let r_plus_z = ring::normalize(ring::partial_reduce(r + z));
    (high_bits(r, gamma2) != high_bits(r_plus_z, gamma2)) as i32
}

/// Recovers `HighBits(r + z)` from `r` and the hint for `z`.
#[inline]
pub fn use_hint(h: i32, r: i32, gamma2: i32) -> i32 {
    let (r1, r0) = decompose(r, gamma2);
    if h == 0 {
        return r1;
    }
    let m = (Q - 1) / (2 * gamma2);
    if r0 > 0 {
        (r1 + 1) % m
    } else {
        (r1 - 1 + m) % m
    }
}

/// True iff some coefficient has centered absolute value `>= bound`. Scans
/// every coefficient regardless of where the first violation is.
pub fn norm_exceeds(polys: &[Poly], bound: i32) -> bool {
    let mut flag = 0i32;
    for p in polys {
        for &c in p.coeffs.iter() {
            let centered = ring::center(ring::freeze(c));
            let abs = centered - ((centered >> 31) & (2 * centered));
            // (abs - bound) >= 0 sets the sign bit of the complement
            flag |= !(abs - bound) >> 31;
        }
    }
    flag != 0
}

/// Sparse 0/1 hint polynomials, one per row of `w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HintVector {
    pub polys: Vec<Poly>,
}

impl HintVector {
    pub fn weight(&self) -> usize {
        count_hints(self)
    }
}

pub fn count_hints(h: &HintVector) -> usize {
    h.polys
        .iter()
        .map(|p| p.coeffs.iter().map(|&b| b as usize).sum::<usize>())
        .sum()
}

pub fn poly_decompose(r: &Poly, gamma2: i32) -> (Poly, Poly) {
    let mut hi = Poly::zero();
    let mut lo = Poly::zero();
    for i in 0..N {
        (hi.coeffs[i], lo.coeffs[i]) = decompose(r.coeffs[i], gamma2);
    }
    (hi, lo)
}

pub fn poly_high_bits(r: &Poly, gamma2: i32) -> Poly {
    Poly::from_fn(|i| high_bits(r.coeffs[i], gamma2))
}

pub fn poly_power2round(t: &Poly) -> (Poly, Poly) {
    let mut t1 = Poly::zero();
    let mut t0 = Poly::zero();
    for i in 0..N {
        (t1.coeffs[i], t0.coeffs[i]) = power2round(t.coeffs[i]);
    }
    (t1, t0)
}

pub fn poly_use_hint(h: &Poly, r: &Poly, gamma2: i32) -> Poly {
    Poly::from_fn(|i| use_hint(h.coeffs[i], r.coeffs[i], gamma2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GAMMA2_88: i32 = (Q - 1) / 88;
    const GAMMA2_32: i32 = (Q - 1) / 32;

    /// Definition-level decompose, kept independent of the shift tricks.
    fn decompose_oracle(r: i32, gamma2: i32) -> (i32, i32) {
        let alpha = 2 * gamma2;
        let mut r0 = r.rem_euclid(alpha);
        if r0 > gamma2 {
            r0 -= alpha;
        }
        if r - r0 == Q - 1 {
            (0, r0 - 1)
        } else {
            ((r - r0) / alpha, r0)
        }
    }

    #[test]
    fn power2round_examples() {
        assert_eq!(power2round(0), (0, 0));
        assert_eq!(power2round(1 << 12), (0, 4096));
        assert_eq!(power2round(1 << 13), (1, 0));
        assert_eq!(power2round((1 << 12) + 1), (1, -4095));
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(decompose(0, GAMMA2_88), (0, 0));
        assert_eq!(decompose(190_464, GAMMA2_88), (1, 0));
        let (r1, r0) = decompose(Q - 1, GAMMA2_88);
        assert_eq!(r1, 0);
        assert_eq!((r1 * 2 * GAMMA2_88 + r0).rem_euclid(Q), Q - 1);
    }

    #[test]
    fn decompose_exhaustive() {
        for gamma2 in [GAMMA2_88, GAMMA2_32] {
            for r in (0..Q).step_by(3).chain(Q - 300_000..Q) {
                let got = decompose(r, gamma2);
                assert_eq!(got, decompose_oracle(r, gamma2), "r = {r}");
                assert_eq!((got.0 * 2 * gamma2 + got.1).rem_euclid(Q), r);
            }
        }
    }

    #[test]
    fn power2round_recomposes_everywhere() {
        for r in 0..Q {
            let (r1, r0) = power2round(r);
            assert_eq!((r1 << D) + r0, r);
            assert!(r0 > -(1 << (D - 1)) && r0 <= 1 << (D - 1));
        }
    }

    #[test]
    fn make_hint_examples() {
        assert_eq!(make_hint(0, 12345, GAMMA2_88), 0);
        assert_eq!(make_hint(GAMMA2_88 + 1, 0, GAMMA2_88), 1);
    }

    #[test]
    fn hint_roundtrip_over_grid() {
        for gamma2 in [GAMMA2_88, GAMMA2_32] {
            let zs = (-gamma2..=gamma2)
                .step_by(997)
                .chain([-gamma2, -1, 0, 1, gamma2]);
            let zs: Vec<i32> = zs.collect();
            let rs: Vec<i32> = (0..Q)
                .step_by(7919)
                .chain([0, 1, gamma2, Q - gamma2, Q - 2, Q - 1])
                .collect();
            for &z in &zs {
                for &r in &rs {
                    let h = make_hint(z, r, gamma2);
                    let target = high_bits((r + z).rem_euclid(Q), gamma2);
                    assert_eq!(use_hint(h, r, gamma2), target, "z={z} r={r}");
                }
            }
        }
    }

    #[test]
    fn use_hint_ranges() {
        assert_eq!(
            use_hint(0, 777_777, GAMMA2_32),
            high_bits(777_777, GAMMA2_32)
        );
        for r in (0..Q).step_by(1013) {
            for h in [0, 1] {
                assert!((0..=15).contains(&use_hint(h, r, GAMMA2_32)));
                assert!((0..=43).contains(&use_hint(h, r, GAMMA2_88)));
            }
        }
    }

    #[test]
    fn norm_examples() {
        assert!(!norm_exceeds(&[Poly::zero()], 1));
        let mut p = Poly::zero();
        p.coeffs[100] = 5;
        assert!(norm_exceeds(&[p], 5));
        assert!(!norm_exceeds(&[p], 6));
        p.coeffs[100] = Q - 5;
        assert!(norm_exceeds(&[p], 5));
    }

    #[test]
    fn count_examples() {
        let mut h = HintVector {
            polys: vec![Poly::zero(); 4],
        };
        assert_eq!(count_hints(&h), 0);
        h.polys[2].coeffs[9] = 1;
        assert_eq!(count_hints(&h), 1);
    }

    proptest! {
        #[test]
        fn norm_matches_naive_scan(coeffs in prop::collection::vec(-(Q - 1)..Q, N), bound in 1..(Q - 1) / 2) {
            let p = Poly::from_fn(|i| coeffs[i]);
            let naive = coeffs.iter().any(|&c| {
                let r = c.rem_euclid(Q);
                let centered = if r > (Q - 1) / 2 { r - Q } else { r };
                centered.abs() >= bound
            });
            prop_assert_eq!(norm_exceeds(&[p], bound), naive);
        }

        #[test]
        fn hint_count_matches_naive(bits in prop::collection::vec(0i32..=1, 4 * N)) {
            let polys = (0..4).map(|i| Poly::from_fn(|j| bits[i * N + j])).collect();
            let h = HintVector { polys };
            prop_assert_eq!(count_hints(&h), bits.iter().filter(|&&b| b == 1).count());
        }
    }
}
