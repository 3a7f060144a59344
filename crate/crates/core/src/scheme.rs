//! Key generation, signing and verification.
//!
//! `w = A·y` and `c·t0` always go through the NTT. The engine choice only
//! affects `c·s` and `c·e`, and both engines produce the same signature for
//! the same inputs.

use crate::encode::{self, PublicKey, SecretKey, Signature};
use crate::ntt::{self, FirstLevel};
use crate::params::{Level, ParamSet, PspmParams, PspmTarget, CRH_BYTES, D, SEED_BYTES};
use crate::poly::Poly;
use crate::pspm::{self, Challenge, PspmTable, TeeOutcome};
use crate::rounding::{self, HintVector};
use crate::sampling;
use crate::Error;

/// How `c·s` and `c·e` are computed while signing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Engine {
    Ntt,
    #[default]
    PspmTee,
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Engine::Ntt => "ntt",
            Engine::PspmTee => "pspm",
        })
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "ntt" => Ok(Engine::Ntt),
            "pspm" | "pspm_tee" | "pspm-tee" => Ok(Engine::PspmTee),
            _ => Err(Error::decode("engine", format!("unknown engine {s:?}"))),
        }
    }
}

/// Which rejection condition of an attempt is evaluated first. The choice
/// never changes the signature, only how much work a rejected attempt costs.
/// With the PSPM engine at level 2 the combined table interleaves both
/// checks per coefficient and this flag has no effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CheckOrder {
    #[default]
    R0First,
    ZFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SignOptions {
    pub engine: Engine,
    pub check_order: CheckOrder,
    /// Randomized signing: used directly as the 64-byte mask seed.
    pub rnd: Option<[u8; CRH_BYTES]>,
}

/// Attempt counters of one signing call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SignStats {
    pub attempts: u32,
    pub rejected_z: u32,
    pub rejected_r0: u32,
    pub rejected_ct0: u32,
    pub rejected_hint: u32,
}

fn h(parts: &[&[u8]], out: &mut [u8]) {
    crate::xof::shake256(parts, out)
}

/// Forward NTT followed by a partial reduction, so any two transformed
/// operands can be multiplied pointwise.
fn ntt_reduced(p: &Poly, mode: FirstLevel) -> Poly {
    ntt::ntt_forward(p, mode).partial_reduce()
}

/// `sum_j a_hat[j] ∘ x_hat[j]` back in the coefficient domain, canonical.
fn mat_row_mul(a_hat: &[Poly], x_hat: &[Poly]) -> Poly {
    let mut acc = ntt::pointwise_acc_montgomery(a_hat, x_hat);
    ntt::ntt_inverse_to_mont_in_place(&mut acc);
    acc.freeze()
}

fn product(c_hat: &Poly, x_hat: &Poly) -> Poly {
    let mut t = ntt::pointwise_montgomery(c_hat, x_hat);
    ntt::ntt_inverse_to_mont_in_place(&mut t);
    t.freeze()
}

/// Generates `(pk, sk)` deterministically from a 32-byte seed.
pub fn keygen(zeta: &[u8; SEED_BYTES], level: Level) -> (Vec<u8>, Vec<u8>) {
    let p = level.params();
    let mut seeds = [0u8; 2 * SEED_BYTES + CRH_BYTES];
    h(&[zeta], &mut seeds);
    let rho: [u8; SEED_BYTES] = seeds[..SEED_BYTES].try_into().unwrap();
    let rho_prime: [u8; CRH_BYTES] = seeds[SEED_BYTES..SEED_BYTES + CRH_BYTES]
        .try_into()
        .unwrap();
    let key: [u8; SEED_BYTES] = seeds[SEED_BYTES + CRH_BYTES..].try_into().unwrap();

    let a_hat = sampling::expand_a(&rho, p);
    let (s, e) = sampling::expand_s(&rho_prime, p);
    let s_hat: Vec<Poly> = s.iter().map(|x| ntt_reduced(x, FirstLevel::Skip)).collect();
    let mut t1 = Vec::with_capacity(p.k);
    let mut t0 = Vec::with_capacity(p.k);
    for i in 0..p.k {
        let t = mat_row_mul(&a_hat[i], &s_hat).add(&e[i]).freeze();
        let (hi, lo) = rounding::poly_power2round(&t);
        t1.push(hi);
        t0.push(lo);
    }
    let pk = encode::encode_pk(&PublicKey { level, rho, t1 });
    let mut tr = [0u8; SEED_BYTES];
    h(&[&pk], &mut tr);
    let sk = encode::encode_sk(&SecretKey {
        level,
        rho,
        key,
        tr,
        s,
        e,
        t0,
    })
    .expect("generated secrets are in range");
    (pk, sk)
}

/// Deterministic (`rnd = None`) or randomized signature with default check
/// order.
pub fn sign(
    sk: &[u8],
    msg: &[u8],
    engine: Engine,
    rnd: Option<&[u8; CRH_BYTES]>,
) -> Result<Vec<u8>, Error> {
    let opts = SignOptions {
        engine,
        rnd: rnd.copied(),
        ..SignOptions::default()
    };
    sign_with(sk, msg, &opts).map(|(sig, _)| sig)
}

pub fn sign_with(sk: &[u8], msg: &[u8], opts: &SignOptions) -> Result<(Vec<u8>, SignStats), Error> {
    let ctx = SigningContext::new(sk, opts.engine)?;
    Ok(ctx.sign(msg, opts.check_order, opts.rnd.as_ref()))
}

/// Tables for the PSPM engine.
#[derive(Debug, Clone)]
enum Tables {
    None,
    /// `s` followed by `e` in one table.
    Combined(PspmTable),
    Split {
        s: PspmTable,
        e: PspmTable,
    },
}

/// Everything one signing attempt needs from the mask and the challenge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttemptInputs {
    /// Mask, centered.
    pub y: Vec<Poly>,
    /// `A·y`, canonical.
    pub w: Vec<Poly>,
    pub c_tilde: [u8; SEED_BYTES],
    pub c: Challenge,
}

/// Which checks an attempt passes; all four are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttemptProbe {
    pub z_ok: bool,
    pub r0_ok: bool,
    pub ct0_ok: bool,
    pub hint_ok: bool,
}

/// A decoded secret key with its transformed and packed forms.
#[derive(Debug, Clone)]
pub struct SigningContext {
    p: &'static ParamSet,
    sk: SecretKey,
    engine: Engine,
    a_hat: Vec<Vec<Poly>>,
    s_hat: Vec<Poly>,
    e_hat: Vec<Poly>,
    t0_hat: Vec<Poly>,
    tables: Tables,
}

enum Stage {
    Z,
    R0,
    Ct0,
    Hint,
}

impl SigningContext {
    pub fn new(sk_bytes: &[u8], engine: Engine) -> Result<Self, Error> {
        let level = Level::from_sk_len(sk_bytes.len())?;
        let sk = encode::decode_sk(level, sk_bytes)?;
        Ok(Self::from_secret_key(sk, engine))
    }

    pub fn from_secret_key(sk: SecretKey, engine: Engine) -> Self {
        let level = sk.level;
        let p = level.params();
        let a_hat = sampling::expand_a(&sk.rho, p);
        let s_hat =
            sk.s.iter()
                .map(|x| ntt_reduced(x, FirstLevel::Skip))
                .collect();
        let e_hat =
            sk.e.iter()
                .map(|x| ntt_reduced(x, FirstLevel::Skip))
                .collect();
        let t0_hat = sk
            .t0
            .iter()
            .map(|x| ntt_reduced(x, FirstLevel::Tailored))
            .collect();
        let tables = match engine {
            Engine::Ntt => Tables::None,
            Engine::PspmTee => {
                if level == Level::Two {
                    let se: Vec<Poly> = sk.s.iter().chain(&sk.e).copied().collect();
                    let combined = PspmParams::combined(level);
                    Tables::Combined(
                        pspm::pspm_prepare(&se, &combined).expect("secrets within eta"),
                    )
                } else {
                    let s =
                        pspm::pspm_prepare(&sk.s, &PspmParams::for_level(level, PspmTarget::Cs));
                    let e =
                        pspm::pspm_prepare(&sk.e, &PspmParams::for_level(level, PspmTarget::Ce));
                    Tables::Split {
                        s: s.expect("secrets within eta"),
                        e: e.expect("secrets within eta"),
                    }
                }
            }
        };
        SigningContext {
            p,
            sk,
            engine,
            a_hat,
            s_hat,
            e_hat,
            t0_hat,
            tables,
        }
    }

    pub fn params(&self) -> &'static ParamSet {
        self.p
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn secret_key(&self) -> &SecretKey {
        &self.sk
    }

    /// `H(tr ‖ msg)`.
    pub fn message_digest(&self, msg: &[u8]) -> [u8; CRH_BYTES] {
        let mut mu = [0u8; CRH_BYTES];
        h(&[&self.sk.tr, msg], &mut mu);
        mu
    }

    /// Mask seed: `rnd` if given, else `H(K ‖ mu)`.
    pub fn mask_seed(
        &self,
        mu: &[u8; CRH_BYTES],
        rnd: Option<&[u8; CRH_BYTES]>,
    ) -> [u8; CRH_BYTES] {
        match rnd {
            Some(r) => *r,
            None => {
                let mut rho_prime = [0u8; CRH_BYTES];
                h(&[&self.sk.key, mu], &mut rho_prime);
                rho_prime
            }
        }
    }

    pub fn sign(
        &self,
        msg: &[u8],
        order: CheckOrder,
        rnd: Option<&[u8; CRH_BYTES]>,
    ) -> (Vec<u8>, SignStats) {
        let mu = self.message_digest(msg);
        let rho_prime = self.mask_seed(&mu, rnd);
        let mut stats = SignStats::default();
        let mut kappa: u16 = 0;
        loop {
            stats.attempts += 1;
            let inputs = self.attempt_inputs(&mu, &rho_prime, kappa);
            match self.finish_attempt(&inputs, order) {
                Ok(sig) => {
                    let bytes = encode::encode_sig(self.sk.level, &sig)
                        .expect("accepted signature encodes");
                    return (bytes, stats);
                }
                Err(Stage::Z) => stats.rejected_z += 1,
                Err(Stage::R0) => stats.rejected_r0 += 1,
                Err(Stage::Ct0) => stats.rejected_ct0 += 1,
                Err(Stage::Hint) => stats.rejected_hint += 1,
            }
            kappa = kappa.wrapping_add(self.p.l as u16);
        }
    }

    /// Mask, commitment and challenge of attempt `kappa`.
    pub fn attempt_inputs(
        &self,
        mu: &[u8; CRH_BYTES],
        rho_prime: &[u8; CRH_BYTES],
        kappa: u16,
    ) -> AttemptInputs {
        let p = self.p;
        let y = sampling::expand_mask(rho_prime, kappa, p);
        let y_mode = if p.gamma1 < 1 << 18 {
            FirstLevel::Tailored
        } else {
            FirstLevel::Montgomery
        };
        let y_hat: Vec<Poly> = y.iter().map(|x| ntt_reduced(x, y_mode)).collect();
        let w: Vec<Poly> = self
            .a_hat
            .iter()
            .map(|row| mat_row_mul(row, &y_hat))
            .collect();
        let w1: Vec<Poly> = w
            .iter()
            .map(|x| rounding::poly_high_bits(x, p.gamma2))
            .collect();
        let mut c_tilde = [0u8; SEED_BYTES];
        h(&[mu, &encode::pack_w1(p, &w1)], &mut c_tilde);
        let c = Challenge::from_poly(&sampling::sample_in_ball(&c_tilde, p.tau))
            .expect("ternary challenge");
        AttemptInputs { y, w, c_tilde, c }
    }

    fn challenge_ntt(c: &Challenge) -> Poly {
        ntt_reduced(c.poly(), FirstLevel::Skip)
    }

    /// `z = y + c·s` (centered) and `r = w - c·e` (canonical) through the
    /// selected engine, or `Err` with the first failing check.
    fn z_and_r(
        &self,
        inputs: &AttemptInputs,
        c_hat: &Poly,
        order: CheckOrder,
    ) -> Result<(Vec<Poly>, Vec<Poly>), Stage> {
        let p = self.p;
        let c = &inputs.c;
        match &self.tables {
            Tables::Combined(t) => match pspm::pspm_tee_combined(c, t, &inputs.y, &inputs.w, p) {
                TeeOutcome::Accept(out) => Ok((out.z, out.r)),
                // The combined table checks both per coefficient; attribute
                // the rejection by re-evaluating the cheaper side.
                TeeOutcome::Reject => Err(self.rejection_stage(inputs, c_hat)),
            },
            Tables::Split { s, e } => {
                let r_check = || {
                    pspm::pspm_tee_r0(c, e, &inputs.w, p)
                        .accepted()
                        .ok_or(Stage::R0)
                };
                let z_check = || {
                    pspm::pspm_tee_z(c, s, &inputs.y, p)
                        .accepted()
                        .ok_or(Stage::Z)
                };
                match order {
                    CheckOrder::R0First => {
                        let r = r_check()?;
                        Ok((z_check()?, r))
                    }
                    CheckOrder::ZFirst => {
                        let z = z_check()?;
                        Ok((z, r_check()?))
                    }
                }
            }
            Tables::None => {
                let r_check = || {
                    let r = self.ntt_r(inputs, c_hat);
                    if r0_exceeds(&r, p) {
                        Err(Stage::R0)
                    } else {
                        Ok(r)
                    }
                };
                let z_check = || {
                    let z = self.ntt_z(inputs, c_hat);
                    if rounding::norm_exceeds(&z, p.gamma1 - p.beta) {
                        Err(Stage::Z)
                    } else {
                        Ok(z)
                    }
                };
                match order {
                    CheckOrder::R0First => {
                        let r = r_check()?;
                        Ok((z_check()?, r))
                    }
                    CheckOrder::ZFirst => {
                        let z = z_check()?;
                        Ok((z, r_check()?))
                    }
                }
            }
        }
    }

    fn rejection_stage(&self, inputs: &AttemptInputs, c_hat: &Poly) -> Stage {
        if r0_exceeds(&self.ntt_r(inputs, c_hat), self.p) {
            Stage::R0
        } else {
            Stage::Z
        }
    }

    fn ntt_z(&self, inputs: &AttemptInputs, c_hat: &Poly) -> Vec<Poly> {
        inputs
            .y
            .iter()
            .zip(&self.s_hat)
            .map(|(y, s)| y.add(&product(c_hat, s).centered()))
            .collect()
    }

    fn ntt_r(&self, inputs: &AttemptInputs, c_hat: &Poly) -> Vec<Poly> {
        inputs
            .w
            .iter()
            .zip(&self.e_hat)
            .map(|(w, e)| w.sub(&product(c_hat, e)).freeze())
            .collect()
    }

    fn finish_attempt(
        &self,
        inputs: &AttemptInputs,
        order: CheckOrder,
    ) -> Result<Signature, Stage> {
        let p = self.p;
        let c_hat = Self::challenge_ntt(&inputs.c);
        let (z, r) = self.z_and_r(inputs, &c_hat, order)?;
        let ct0: Vec<Poly> = self
            .t0_hat
            .iter()
            .map(|t| product(&c_hat, t).centered())
            .collect();
        if rounding::norm_exceeds(&ct0, p.gamma2) {
            return Err(Stage::Ct0);
        }
        let h = make_hints(&ct0, &r, p);
        if h.weight() > p.omega {
            return Err(Stage::Hint);
        }
        Ok(Signature {
            c_tilde: inputs.c_tilde,
            z,
            h,
        })
    }

    /// The engine's fused `(z, r)` computation on one attempt, as returned to
    /// the rest of the signing loop; `None` if the attempt is rejected there.
    pub fn tee_check(
        &self,
        inputs: &AttemptInputs,
        order: CheckOrder,
    ) -> Option<(Vec<Poly>, Vec<Poly>)> {
        let c_hat = Self::challenge_ntt(&inputs.c);
        self.z_and_r(inputs, &c_hat, order).ok()
    }

    /// Evaluates every check of an attempt without stopping early.
    pub fn probe(&self, inputs: &AttemptInputs) -> AttemptProbe {
        let p = self.p;
        let c_hat = Self::challenge_ntt(&inputs.c);
        let z = self.ntt_z(inputs, &c_hat);
        let r = self.ntt_r(inputs, &c_hat);
        let ct0: Vec<Poly> = self
            .t0_hat
            .iter()
            .map(|t| product(&c_hat, t).centered())
            .collect();
        AttemptProbe {
            z_ok: !rounding::norm_exceeds(&z, p.gamma1 - p.beta),
            r0_ok: !r0_exceeds(&r, p),
            ct0_ok: !rounding::norm_exceeds(&ct0, p.gamma2),
            hint_ok: make_hints(&ct0, &r, p).weight() <= p.omega,
        }
    }
}

fn r0_exceeds(r: &[Poly], p: &ParamSet) -> bool {
    let r0: Vec<Poly> = r
        .iter()
        .map(|x| rounding::poly_decompose(x, p.gamma2).1)
        .collect();
    rounding::norm_exceeds(&r0, p.gamma2 - p.beta)
}

/// Hints for `-ct0` against `w - ce + ct0`.
fn make_hints(ct0: &[Poly], r: &[Poly], p: &ParamSet) -> HintVector {
    let polys = ct0
        .iter()
        .zip(r)
        .map(|(ct0, r)| {
            let shifted = r.add(ct0).freeze();
            Poly::from_fn(|i| rounding::make_hint(-ct0.coeffs[i], shifted.coeffs[i], p.gamma2))
        })
        .collect();
    HintVector { polys }
}

/// Checks a signature. Any malformed input is a rejection.
pub fn verify(pk: &[u8], msg: &[u8], sig: &[u8]) -> bool {
    let Ok(level) = Level::from_pk_len(pk.len()) else {
        return false;
    };
    let p = level.params();
    let (Ok(key), Ok(sig)) = (encode::decode_pk(level, pk), encode::decode_sig(level, sig)) else {
        return false;
    };
    if rounding::norm_exceeds(&sig.z, p.gamma1 - p.beta) || sig.h.weight() > p.omega {
        return false;
    }
    let mut tr = [0u8; SEED_BYTES];
    h(&[pk], &mut tr);
    let mut mu = [0u8; CRH_BYTES];
    h(&[&tr, msg], &mut mu);

    let c = sampling::sample_in_ball(&sig.c_tilde, p.tau);
    let c_hat = ntt_reduced(&c, FirstLevel::Skip);
    let a_hat = sampling::expand_a(&key.rho, p);
    let z_hat: Vec<Poly> = sig
        .z
        .iter()
        .map(|z| ntt_reduced(z, FirstLevel::Montgomery))
        .collect();
    let w1: Vec<Poly> = a_hat
        .iter()
        .zip(&key.t1)
        .zip(&sig.h.polys)
        .map(|((row, t1), hint)| {
            let t1_hat = ntt_reduced(&t1.shift_left(D), FirstLevel::Montgomery);
            let ct1 = ntt::pointwise_montgomery(&c_hat, &t1_hat);
            let mut acc = ntt::pointwise_acc_montgomery(row, &z_hat).sub(&ct1);
            ntt::ntt_inverse_to_mont_in_place(&mut acc);
            rounding::poly_use_hint(hint, &acc.freeze(), p.gamma2)
        })
        .collect();
    let mut c_tilde = [0u8; SEED_BYTES];
    h(&[&mu, &encode::pack_w1(p, &w1)], &mut c_tilde);
    c_tilde == sig.c_tilde
}
