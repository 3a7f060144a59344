//! Parallel index-based small-polynomial multiplication.
//!
//! `r` small polynomials `a^(0..r)` are packed per coefficient index as base-M
//! digits of 32-bit words (polynomial 0 most significant), offset by `U` so
//! every digit is non-negative. Multiplying by a sparse challenge `c` with
//! `±1` coefficients then costs one word-wise add per nonzero `c_i` per
//! output index, for all `r` polynomials at once:
//!
//! * `c_i = +1`: `acc_j += v_(j-i)`
//! * `c_i = -1`: `acc_j += gamma - v_(j-i)`, where `gamma` has every digit
//!   equal to `2U`, so the digits become `U - a`.
//!
//! Negative indices `j - i < 0` read the negation companion `U - a` stored
//! in the lower half of the table, which realises the negacyclic wrap.
//! After `w` accumulations each digit equals `w·U + (c·a)_j`, within
//! `[0, 2wU]`; the table parameters guarantee `2τU < M`, so no carry ever
//! crosses a digit boundary.
//!
//! The early-evaluation variants fuse the rejection checks of the signing
//! loop into digit extraction and stop at the first failing coefficient.

use crate::kernels::{self, Backend};
use crate::params::{ParamSet, PspmParams, N};
use crate::poly::Poly;
use crate::ring;
use crate::rounding;
use crate::Error;

/// A challenge polynomial with coefficients in `{-1, 0, 1}`, kept in both
/// dense and sparse form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Challenge {
    dense: Poly,
    /// `(index, sign)` of the nonzero coefficients, ascending by index.
    nonzero: Vec<(usize, i8)>,
}

impl Challenge {
    pub fn from_poly(p: &Poly) -> Result<Self, Error> {
        let mut nonzero = Vec::new();
        for (i, &c) in p.coeffs.iter().enumerate() {
            match c {
                0 => {}
                1 => nonzero.push((i, 1)),
                -1 => nonzero.push((i, -1)),
                other => {
                    return Err(Error::decode(
                        "challenge",
                        format!("coefficient {other} at index {i}"),
                    ))
                }
            }
        }
        Ok(Challenge { dense: *p, nonzero })
    }

    /// Dense form with coefficients in `{-1, 0, 1}`.
    pub fn poly(&self) -> &Poly {
        &self.dense
    }

    pub fn nonzero(&self) -> &[(usize, i8)] {
        &self.nonzero
    }

    pub fn weight(&self) -> usize {
        self.nonzero.len()
    }
}

/// Prepared lookup table: `words_per_index` rows of `2n` packed words. Slot
/// `n + i` holds `v_i`; slot `i` holds the companion `v_(i-n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PspmTable {
    params: PspmParams,
    words: Vec<u32>,
}

impl PspmTable {
    pub fn params(&self) -> &PspmParams {
        &self.params
    }

    /// Row `w` of the table, `2n` words.
    pub fn row(&self, w: usize) -> &[u32] {
        &self.words[w * 2 * N..(w + 1) * 2 * N]
    }
}

/// Small signed value of a coefficient given either centered or canonical.
fn small(c: i32) -> i32 {
    ring::center(ring::freeze(c))
}

pub fn pspm_prepare(a: &[Poly], params: &PspmParams) -> Result<PspmTable, Error> {
    assert_eq!(
        a.len(),
        params.len,
        "number of polynomials must equal the table length"
    );
    let u = params.bound;
    let radix_bits = params.radix_bits;
    let mut words = vec![0u32; params.words_per_index * 2 * N];
    for w in 0..params.words_per_index {
        let first = w * params.digits_per_word;
        let polys = &a[first..first + params.digits_in_word(w)];
        let row = &mut words[w * 2 * N..(w + 1) * 2 * N];
        for i in 0..N {
            let mut v: u64 = 0;
            let mut companion: u64 = 0;
            for p in polys {
                let coeff = small(p.coeffs[i]);
                if coeff.abs() > u {
                    return Err(Error::CoefficientOutOfBound {
                        index: i,
                        value: coeff,
                        bound: u,
                    });
                }
                v = (v << radix_bits) | (u + coeff) as u64;
                companion = (companion << radix_bits) | (u - coeff) as u64;
            }
            row[N + i] = v as u32;
            row[i] = companion as u32;
        }
    }
    Ok(PspmTable {
        params: params.clone(),
        words,
    })
}

/// Packed accumulator, `words_per_index` rows of `n` words.
pub(crate) struct Accumulator {
    words: Vec<u32>,
    offset: u32,
}

fn accumulate(c: &Challenge, table: &PspmTable) -> Accumulator {
    let params = &table.params;
    assert!(
        c.weight() <= params.tau,
        "challenge weight exceeds the table's tau"
    );
    let lanes = kernels::backend() == Backend::Lanes;
    let mut words = vec![0u32; params.words_per_index * N];
    for w in 0..params.words_per_index {
        let gamma = params.gamma_words[w];
        let row = table.row(w);
        let acc = &mut words[w * N..(w + 1) * N];
        for &(i, sign) in c.nonzero() {
            let src = &row[N - i..2 * N - i];
            if lanes {
                kernels::accumulate_words(acc, src, gamma, sign < 0);
            } else if sign > 0 {
                for (a, &v) in acc.iter_mut().zip(src) {
                    *a += v;
                }
            } else {
                for (a, &v) in acc.iter_mut().zip(src) {
                    *a += gamma - v;
                }
            }
        }
    }
    let acc = Accumulator {
        words,
        offset: c.weight() as u32 * params.bound as u32,
    };
    debug_assert!(
        digits_within(&acc, params, 2 * acc.offset),
        "packed digit overflow"
    );
    acc
}

fn digits_within(acc: &Accumulator, params: &PspmParams, max_digit: u32) -> bool {
    let mask = params.digit_mask();
    (0..params.words_per_index).all(|w| {
        acc.words[w * N..(w + 1) * N].iter().all(|&word| {
            let mut t = word as u64;
            (0..params.digits_in_word(w)).all(|_| {
                let ok = (t as u32 & mask) <= max_digit;
                t >>= params.radix_bits;
                ok
            }) && t == 0
        })
    })
}

impl Accumulator {
    /// Calls `f(poly, value)` for every packed polynomial at coefficient
    /// index `i`, last polynomial first, with `value = (c·a^(poly))_i` as a
    /// small signed integer. Stops and returns `false` as soon as `f` does.
    #[inline]
    fn extract_descending(
        &self,
        params: &PspmParams,
        i: usize,
        mut f: impl FnMut(usize, i32) -> bool,
    ) -> bool {
        let mask = params.digit_mask();
        for w in (0..params.words_per_index).rev() {
            let mut t = self.words[w * N + i];
            let first = w * params.digits_per_word;
            for poly in (first..first + params.digits_in_word(w)).rev() {
                let digit = t & mask;
                if !f(poly, digit as i32 - self.offset as i32) {
                    return false;
                }
                t = t.checked_shr(params.radix_bits).unwrap_or(0);
            }
        }
        true
    }
}

/// `c·a^(j)` for every packed polynomial, canonical coefficients.
pub fn pspm_multiply(c: &Challenge, table: &PspmTable) -> Vec<Poly> {
    let params = &table.params;
    let acc = accumulate(c, table);
    let mut out = vec![Poly::zero(); params.len];
    for i in 0..N {
        acc.extract_descending(params, i, |poly, value| {
            out[poly].coeffs[i] = ring::normalize(value);
            true
        });
    }
    out
}

/// Result of a fused rejection check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TeeOutcome<T> {
    Accept(T),
    Reject,
}

impl<T> TeeOutcome<T> {
    pub fn is_accept(&self) -> bool {
        matches!(self, TeeOutcome::Accept(_))
    }

    pub fn accepted(self) -> Option<T> {
        match self {
            TeeOutcome::Accept(v) => Some(v),
            TeeOutcome::Reject => None,
        }
    }
}

/// Accepted output of the combined variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombinedOutput {
    /// `z = y + c·s`, centered, every `|z| < gamma1 - beta`.
    pub z: Vec<Poly>,
    /// `r = w - c·e`, canonical; every `|LowBits(r)| < gamma2 - beta`.
    pub r: Vec<Poly>,
}

#[inline]
fn r0_ok(w: i32, ce: i32, p: &ParamSet) -> (bool, i32) {
    let r = ring::freeze(w - ce);
    let r0 = rounding::low_bits(r, p.gamma2);
    (r0.abs() < p.gamma2 - p.beta, r)
}

#[inline]
fn z_ok(y: i32, cs: i32, p: &ParamSet) -> (bool, i32) {
    let z = y + cs;
    (z.abs() < p.gamma1 - p.beta, z)
}

/// Combined evaluation over a table of `s` followed by `e` (`l + k`
/// polynomials). Per coefficient index, the `e` digits are extracted and
/// checked against the low-bits bound before the `s` digits are checked
/// against the `z` bound.
///
/// `y` is centered, `w` canonical.
pub fn pspm_tee_combined(
    c: &Challenge,
    table: &PspmTable,
    y: &[Poly],
    w: &[Poly],
    p: &ParamSet,
) -> TeeOutcome<CombinedOutput> {
    let params = &table.params;
    assert_eq!(params.len, p.l + p.k, "combined table must hold s then e");
    let acc = accumulate(c, table);
    let mut z = vec![Poly::zero(); p.l];
    let mut r = vec![Poly::zero(); p.k];
    for i in 0..N {
        let ok = acc.extract_descending(params, i, |poly, value| {
            if poly >= p.l {
                let j = poly - p.l;
                let (ok, rv) = r0_ok(w[j].coeffs[i], value, p);
                r[j].coeffs[i] = rv;
                ok
            } else {
                let (ok, zv) = z_ok(y[poly].coeffs[i], value, p);
                z[poly].coeffs[i] = zv;
                ok
            }
        });
        if !ok {
            return TeeOutcome::Reject;
        }
    }
    TeeOutcome::Accept(CombinedOutput { z, r })
}

/// `z = y + c·s` with the `z` bound checked per coefficient. `y` centered.
pub fn pspm_tee_z(
    c: &Challenge,
    table_s: &PspmTable,
    y: &[Poly],
    p: &ParamSet,
) -> TeeOutcome<Vec<Poly>> {
    let params = &table_s.params;
    assert_eq!(params.len, p.l);
    let acc = accumulate(c, table_s);
    let mut z = vec![Poly::zero(); p.l];
    for i in 0..N {
        let ok = acc.extract_descending(params, i, |poly, value| {
            let (ok, zv) = z_ok(y[poly].coeffs[i], value, p);
            z[poly].coeffs[i] = zv;
            ok
        });
        if !ok {
            return TeeOutcome::Reject;
        }
    }
    TeeOutcome::Accept(z)
}

/// `r = w - c·e` with the low-bits bound checked per coefficient. `w`
/// canonical; the accepted `r` is canonical.
pub fn pspm_tee_r0(
    c: &Challenge,
    table_e: &PspmTable,
    w: &[Poly],
    p: &ParamSet,
) -> TeeOutcome<Vec<Poly>> {
    let params = &table_e.params;
    assert_eq!(params.len, p.k);
    let acc = accumulate(c, table_e);
    let mut r = vec![Poly::zero(); p.k];
    for i in 0..N {
        let ok = acc.extract_descending(params, i, |poly, value| {
            let (ok, rv) = r0_ok(w[poly].coeffs[i], value, p);
            r[poly].coeffs[i] = rv;
            ok
        });
        if !ok {
            return TeeOutcome::Reject;
        }
    }
    TeeOutcome::Accept(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Q;
    use crate::params::{Level, PspmTarget, DILITHIUM2, DILITHIUM3};
    use crate::poly::schoolbook_mul;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_challenge(rng: &mut impl Rng, tau: usize) -> Challenge {
        let mut p = Poly::zero();
        let mut placed = 0;
        while placed < tau {
            let i = rng.gen_range(0..N);
            if p.coeffs[i] == 0 {
                p.coeffs[i] = if rng.gen() { 1 } else { -1 };
                placed += 1;
            }
        }
        Challenge::from_poly(&p).unwrap()
    }

    fn random_small(rng: &mut impl Rng, bound: i32) -> Poly {
        Poly::from_fn(|_| rng.gen_range(-bound..=bound))
    }

    #[test]
    fn zero_polynomial_table() {
        let params = PspmParams::new(39, 2, 8, 1).unwrap();
        let table = pspm_prepare(&[Poly::zero()], &params).unwrap();
        assert!(table.row(0).iter().all(|&v| v == 2));
    }

    #[test]
    fn companion_digit() {
        let params = PspmParams::new(39, 2, 8, 1).unwrap();
        let a = Poly::from_fn(|i| if i == 0 { -2 } else { 0 });
        let table = pspm_prepare(&[a], &params).unwrap();
        assert_eq!(table.row(0)[N], 0);
        assert_eq!(table.row(0)[0], 4);
    }

    #[test]
    fn combined_level2_layout() {
        let params = PspmParams::combined(Level::Two);
        assert_eq!(
            (params.len, params.words_per_index, params.digits_per_word),
            (8, 2, 4)
        );
        let polys: Vec<Poly> = (0..8).map(|j| Poly::from_fn(|_| j % 5 - 2)).collect();
        let table = pspm_prepare(&polys, &params).unwrap();
        // word 0 = s0..s3, s0 most significant; word 1 = e0..e3
        assert_eq!(table.row(0)[N], u32::from_be_bytes([0, 1, 2, 3]));
        assert_eq!(table.row(1)[N], u32::from_be_bytes([4, 0, 1, 2]));
    }

    #[test]
    fn out_of_bound_coefficient() {
        let params = PspmParams::new(39, 2, 8, 1).unwrap();
        let a = Poly::from_fn(|i| if i == 7 { 3 } else { 0 });
        assert_eq!(
            pspm_prepare(&[a], &params),
            Err(Error::CoefficientOutOfBound {
                index: 7,
                value: 3,
                bound: 2
            })
        );
    }

    #[test]
    fn unit_challenges() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let params = PspmParams::new(1, 2, 8, 3).unwrap();
        let a: Vec<Poly> = (0..3).map(|_| random_small(&mut rng, 2)).collect();
        let table = pspm_prepare(&a, &params).unwrap();
        let plus = Challenge::from_poly(&Poly::monomial(0, 1)).unwrap();
        let minus = Challenge::from_poly(&Poly::monomial(0, -1)).unwrap();
        let got_plus = pspm_multiply(&plus, &table);
        let got_minus = pspm_multiply(&minus, &table);
        for j in 0..3 {
            assert_eq!(got_plus[j], a[j].freeze());
            assert_eq!(got_minus[j], a[j].neg().freeze());
        }
    }

    #[test]
    fn matches_schoolbook_on_every_row() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for level in Level::ALL {
            for target in PspmTarget::ALL {
                let params = PspmParams::for_level(level, target);
                for _ in 0..5 {
                    let c = random_challenge(&mut rng, params.tau);
                    let a: Vec<Poly> = (0..params.len)
                        .map(|_| random_small(&mut rng, params.bound))
                        .collect();
                    let table = pspm_prepare(&a, &params).unwrap();
                    let got = pspm_multiply(&c, &table);
                    for j in 0..params.len {
                        assert_eq!(
                            got[j],
                            schoolbook_mul(c.poly(), &a[j].freeze()),
                            "{level:?} {target:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn word_addition_is_digitwise() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let params = PspmParams::for_level(Level::Three, PspmTarget::Ce);
        for _ in 0..20 {
            let a: Vec<Poly> = (0..params.len)
                .map(|_| random_small(&mut rng, params.bound))
                .collect();
            let table = pspm_prepare(&a, &params).unwrap();
            let c = random_challenge(&mut rng, params.tau);
            let acc = accumulate(&c, &table);
            // digit-by-digit reference: offset + signed sum, no carries
            for i in 0..N {
                let mut want: Vec<i64> = vec![0; params.len];
                for &(pos, sign) in c.nonzero() {
                    for (j, poly) in a.iter().enumerate() {
                        let (src, wrap) = if i >= pos {
                            (i - pos, 1)
                        } else {
                            (i + N - pos, -1)
                        };
                        want[j] += params.bound as i64
                            + sign as i64 * wrap * small(poly.coeffs[src]) as i64;
                    }
                }
                acc.extract_descending(&params, i, |poly, v| {
                    assert_eq!(v as i64 + acc.offset as i64, want[poly]);
                    true
                });
            }
        }
    }

    #[test]
    fn backends_agree() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let params = PspmParams::for_level(Level::Five, PspmTarget::Ce);
        let a: Vec<Poly> = (0..params.len)
            .map(|_| random_small(&mut rng, params.bound))
            .collect();
        let table = pspm_prepare(&a, &params).unwrap();
        let c = random_challenge(&mut rng, params.tau);
        let s = kernels::with_backend(Backend::Scalar, || pspm_multiply(&c, &table));
        let l = kernels::with_backend(Backend::Lanes, || pspm_multiply(&c, &table));
        assert_eq!(s, l);
    }

    fn zero_weight() -> Challenge {
        Challenge::from_poly(&Poly::zero()).unwrap()
    }

    #[test]
    fn combined_all_zero() {
        let p = &DILITHIUM2;
        let params = PspmParams::combined(Level::Two);
        let table = pspm_prepare(&vec![Poly::zero(); 8], &params).unwrap();
        let out = pspm_tee_combined(
            &zero_weight(),
            &table,
            &vec![Poly::zero(); 4],
            &vec![Poly::zero(); 4],
            p,
        );
        let out = out.accepted().expect("accepted");
        assert!(out.z.iter().chain(&out.r).all(|x| *x == Poly::zero()));
    }

    #[test]
    fn combined_rejects_z_on_boundary() {
        let p = &DILITHIUM2;
        let params = PspmParams::combined(Level::Two);
        let mut s = vec![Poly::zero(); 8];
        s[1].coeffs[0] = 1;
        let table = pspm_prepare(&s, &params).unwrap();
        let c = Challenge::from_poly(&Poly::monomial(0, 1)).unwrap();
        let mut y = vec![Poly::zero(); 4];
        y[1].coeffs[0] = p.gamma1 - p.beta - 1; // z = gamma1 - beta exactly
        let w = vec![Poly::zero(); 4];
        assert_eq!(pspm_tee_combined(&c, &table, &y, &w, p), TeeOutcome::Reject);
        y[1].coeffs[0] -= 1;
        assert!(pspm_tee_combined(&c, &table, &y, &w, p).is_accept());
    }

    #[test]
    fn z_variant_cancellation() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let p = &DILITHIUM3;
        let params = PspmParams::for_level(Level::Three, PspmTarget::Cs);
        let s: Vec<Poly> = (0..p.l).map(|_| random_small(&mut rng, p.eta)).collect();
        let table = pspm_prepare(&s, &params).unwrap();
        let c = random_challenge(&mut rng, p.tau);
        let y: Vec<Poly> = s
            .iter()
            .map(|sj| schoolbook_mul(c.poly(), &sj.freeze()).centered().neg())
            .collect();
        let z = pspm_tee_z(&c, &table, &y, p)
            .accepted()
            .expect("z = 0 accepted");
        assert!(z.iter().all(|zj| *zj == Poly::zero()));

        let zero_table = pspm_prepare(&vec![Poly::zero(); p.l], &params).unwrap();
        assert!(pspm_tee_z(&zero_weight(), &zero_table, &vec![Poly::zero(); p.l], p).is_accept());
    }

    #[test]
    fn r0_variant_boundary() {
        let p = &DILITHIUM3;
        let params = PspmParams::for_level(Level::Three, PspmTarget::Ce);
        let table = pspm_prepare(&vec![Poly::zero(); p.k], &params).unwrap();
        let mut w = vec![Poly::zero(); p.k];
        let r = pspm_tee_r0(&zero_weight(), &table, &w, p)
            .accepted()
            .unwrap();
        assert!(r.iter().all(|x| *x == Poly::zero()));

        // LowBits(gamma2 - beta) = gamma2 - beta: rejected; one less accepted.
        w[3].coeffs[17] = p.gamma2 - p.beta;
        assert_eq!(
            rounding::low_bits(w[3].coeffs[17], p.gamma2),
            p.gamma2 - p.beta
        );
        assert_eq!(
            pspm_tee_r0(&zero_weight(), &table, &w, p),
            TeeOutcome::Reject
        );
        w[3].coeffs[17] -= 1;
        assert!(pspm_tee_r0(&zero_weight(), &table, &w, p).is_accept());
        // and the negative side
        w[3].coeffs[17] = Q - (p.gamma2 - p.beta);
        assert_eq!(
            pspm_tee_r0(&zero_weight(), &table, &w, p),
            TeeOutcome::Reject
        );
    }

    #[test]
    fn r0_variant_matches_schoolbook() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let p = &DILITHIUM3;
        let params = PspmParams::for_level(Level::Three, PspmTarget::Ce);
        let mut accepted = 0;
        for _ in 0..200 {
            let e: Vec<Poly> = (0..p.k).map(|_| random_small(&mut rng, p.eta)).collect();
            let table = pspm_prepare(&e, &params).unwrap();
            let c = random_challenge(&mut rng, p.tau);
            // w with small low bits so acceptance is likely
            let w: Vec<Poly> = (0..p.k)
                .map(|_| {
                    Poly::from_fn(|_| {
                        rng.gen_range(0..16) * 2 * p.gamma2 + rng.gen_range(-1000..1000)
                    })
                    .freeze()
                })
                .collect();
            let expect: Vec<Poly> = (0..p.k)
                .map(|j| w[j].sub(&schoolbook_mul(c.poly(), &e[j].freeze())).freeze())
                .collect();
            let naive_ok = expect.iter().all(|r| {
                r.coeffs
                    .iter()
                    .all(|&x| rounding::low_bits(x, p.gamma2).abs() < p.gamma2 - p.beta)
            });
            match pspm_tee_r0(&c, &table, &w, p) {
                TeeOutcome::Accept(r) => {
                    assert!(naive_ok);
                    assert_eq!(r, expect);
                    accepted += 1;
                }
                TeeOutcome::Reject => assert!(!naive_ok),
            }
        }
        assert!(accepted > 0);
    }
}
