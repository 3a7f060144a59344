use crate::params::{N, Q};
use crate::ring;

/// One element of `Z_q[x]/(x^256 + 1)`.
///
/// Coefficient ranges depend on where the value sits in the pipeline; the
/// canonical form is `[0, q)`.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Poly {
    pub coeffs: [i32; N],
}

impl Default for Poly {
    fn default() -> Self {
        Poly::zero()
    }
}

impl std::fmt::Debug for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let nonzero = self.coeffs.iter().filter(|&&c| c != 0).count();
        write!(f, "Poly[{} nonzero; {:?} ..]", nonzero, &self.coeffs[..8])
    }
}

impl Poly {
    pub const fn zero() -> Self {
        Poly { coeffs: [0; N] }
    }

    pub fn from_fn(f: impl FnMut(usize) -> i32) -> Self {
        Poly {
            coeffs: std::array::from_fn(f),
        }
    }

    /// `x^i`, with negacyclic wrap for `i >= N`.
    pub fn monomial(i: usize, coeff: i32) -> Self {
        let mut p = Poly::zero();
        if (i / N).is_multiple_of(2) {
            p.coeffs[i % N] = coeff;
        } else {
            p.coeffs[i % N] = -coeff;
        }
        p
    }

    pub fn add(&self, other: &Poly) -> Poly {
        Poly::from_fn(|i| self.coeffs[i] + other.coeffs[i])
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        Poly::from_fn(|i| self.coeffs[i] - other.coeffs[i])
    }

    pub fn neg(&self) -> Poly {
        Poly::from_fn(|i| -self.coeffs[i])
    }

    pub fn shift_left(&self, bits: u32) -> Poly {
        Poly::from_fn(|i| self.coeffs[i] << bits)
    }

    /// Canonical form: every coefficient in `[0, q)`.
    pub fn freeze(&self) -> Poly {
        Poly::from_fn(|i| ring::freeze(self.coeffs[i]))
    }

    /// Centered form: every coefficient in `[-(q-1)/2, (q-1)/2]`.
    pub fn centered(&self) -> Poly {
        Poly::from_fn(|i| ring::center(ring::freeze(self.coeffs[i])))
    }

    pub fn partial_reduce(&self) -> Poly {
        Poly::from_fn(|i| ring::partial_reduce(self.coeffs[i]))
    }

    /// Largest absolute value of the centered coefficients.
    pub fn inf_norm(&self) -> i32 {
        self.coeffs
            .iter()
            .map(|&c| ring::center(ring::freeze(c)).abs())
            .max()
            .unwrap_or(0)
    }

    pub fn is_canonical(&self) -> bool {
        self.coeffs.iter().all(|c| (0..Q).contains(c))
    }
}

/// Schoolbook negacyclic product with 128-bit accumulation, reduced to
/// `[0, q)`. Used as a reference for the fast multipliers.
pub fn schoolbook_mul(a: &Poly, b: &Poly) -> Poly {
    let mut acc = [0i128; N];
    for i in 0..N {
        if a.coeffs[i] == 0 {
            continue;
        }
        for j in 0..N {
            let prod = a.coeffs[i] as i128 * b.coeffs[j] as i128;
            if i + j < N {
                acc[i + j] += prod;
            } else {
                acc[i + j - N] -= prod;
            }
        }
    }
    Poly::from_fn(|i| acc[i].rem_euclid(Q as i128) as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_wraps_negacyclically() {
        assert_eq!(Poly::monomial(N + 3, 1).coeffs[3], -1);
        assert_eq!(Poly::monomial(2 * N + 3, 1).coeffs[3], 1);
    }

    #[test]
    fn schoolbook_small_cases() {
        let one_plus_x = Poly::from_fn(|i| (i < 2) as i32);
        let sq = schoolbook_mul(&one_plus_x, &one_plus_x);
        assert_eq!(&sq.coeffs[..4], &[1, 2, 1, 0]);

        let wrap = schoolbook_mul(&Poly::monomial(255, 1), &Poly::monomial(1, 1));
        assert_eq!(wrap.coeffs[0], Q - 1);
        assert!(wrap.coeffs[1..].iter().all(|&c| c == 0));
    }
}
