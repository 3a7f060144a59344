//! Median-timing harness.
//!
//! Wall time comes from [`Instant`]. On x86-64 the time-stamp counter is read
//! as well and reported as `median_cycles`; elsewhere that column is empty.

use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use crate::ntt::{self, FirstLevel};
use crate::params::{Level, PspmParams, PspmTarget, CRH_BYTES, SEED_BYTES};
use crate::poly::Poly;
use crate::pspm::{self, Challenge};
use crate::sampling;
use crate::scheme::{keygen, verify, CheckOrder, Engine, SigningContext};
use crate::xof::{shake, ShakeVariant};
use crate::Error;

pub const MIN_ITERATIONS: usize = 1000;
pub const MIN_WARMUP: usize = 100;

/// Published speedup range of packed `c·s` over the NTT path, as a fraction
/// of the NTT time saved. Printed next to measured ratios for comparison.
pub const REFERENCE_CS_SAVING: (f64, f64) = (0.47, 0.66);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchOp {
    Ntt,
    Intt,
    Pointwise,
    PspmCs,
    NttCs,
    Sign,
    Verify,
    Keygen,
    Shake,
}

impl BenchOp {
    pub const ALL: [BenchOp; 9] = [
        BenchOp::Ntt,
        BenchOp::Intt,
        BenchOp::Pointwise,
        BenchOp::PspmCs,
        BenchOp::NttCs,
        BenchOp::Sign,
        BenchOp::Verify,
        BenchOp::Keygen,
        BenchOp::Shake,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchOp::Ntt => "ntt",
            BenchOp::Intt => "intt",
            BenchOp::Pointwise => "pointwise",
            BenchOp::PspmCs => "pspm_cs",
            BenchOp::NttCs => "ntt_cs",
            BenchOp::Sign => "sign",
            BenchOp::Verify => "verify",
            BenchOp::Keygen => "keygen",
            BenchOp::Shake => "shake",
        }
    }
}

impl fmt::Display for BenchOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        BenchOp::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| Error::decode("bench op", format!("unknown op {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub level: Level,
    pub engine: Engine,
    pub op: BenchOp,
    pub iters: usize,
    pub median_ns: f64,
    pub mean_ns: f64,
    pub median_cycles: Option<u64>,
}

impl BenchReport {
    pub const CSV_HEADER: &'static str = "level,engine,op,iters,median_ns,mean_ns,median_cycles";

    pub fn csv_row(&self) -> String {
        let cycles = self
            .median_cycles
            .map(|c| c.to_string())
            .unwrap_or_default();
        format!(
            "{},{},{},{},{:.1},{:.1},{}",
            self.level.number(),
            self.engine,
            self.op,
            self.iters,
            self.median_ns,
            self.mean_ns,
            cycles
        )
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "level {} {:<5} {:<9} iters {:>6}  median {:>12.1} ns  mean {:>12.1} ns",
            self.level.number(),
            self.engine,
            self.op,
            self.iters,
            self.median_ns,
            self.mean_ns
        )?;
        if let Some(c) = self.median_cycles {
            write!(f, "  median {c} cycles (TSC)")?;
        }
        Ok(())
    }
}

#[cfg(target_arch = "x86_64")]
fn cycles() -> Option<u64> {
    // SAFETY: rdtsc has no preconditions on x86-64.
    Some(unsafe { core::arch::x86_64::_rdtsc() })
}

#[cfg(not(target_arch = "x86_64"))]
fn cycles() -> Option<u64> {
    None
}

fn median_u64(v: &mut [u64]) -> u64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2
    }
}

#[derive(Default)]
struct Samples {
    ns: Vec<u64>,
    cycles: Vec<u64>,
}

impl Samples {
    fn time(&mut self, f: impl FnOnce()) {
        let c0 = cycles();
        let t0 = Instant::now();
        f();
        let elapsed = t0.elapsed().as_nanos() as u64;
        if let (Some(a), Some(b)) = (c0, cycles()) {
            self.cycles.push(b.wrapping_sub(a));
        }
        self.ns.push(elapsed);
    }

    fn summary(mut self) -> (f64, f64, Option<u64>) {
        let mean = self.ns.iter().sum::<u64>() as f64 / self.ns.len() as f64;
        let median = median_u64(&mut self.ns) as f64;
        let cycles = (!self.cycles.is_empty()).then(|| median_u64(&mut self.cycles));
        (median, mean, cycles)
    }
}

/// Times `f(i)` for `iters` iterations after `warmup` untimed ones.
/// Returns `(median_ns, mean_ns, median_cycles)`.
pub fn measure(iters: usize, warmup: usize, mut f: impl FnMut(usize)) -> (f64, f64, Option<u64>) {
    assert!(iters > 0);
    (0..warmup).for_each(&mut f);
    let mut s = Samples::default();
    for i in 0..iters {
        s.time(|| f(warmup + i));
    }
    s.summary()
}

/// Like [`measure`] for two bodies, alternating which one runs first.
#[allow(clippy::type_complexity)]
pub fn measure_pair(
    iters: usize,
    warmup: usize,
    mut f: impl FnMut(usize),
    mut g: impl FnMut(usize),
) -> ((f64, f64, Option<u64>), (f64, f64, Option<u64>)) {
    assert!(iters > 0);
    for i in 0..warmup {
        f(i);
        g(i);
    }
    let (mut sf, mut sg) = (Samples::default(), Samples::default());
    for i in 0..iters {
        if i % 2 == 0 {
            sf.time(|| f(warmup + i));
            sg.time(|| g(warmup + i));
        } else {
            sg.time(|| g(warmup + i));
            sf.time(|| f(warmup + i));
        }
    }
    (sf.summary(), sg.summary())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchConfig {
    pub level: Level,
    pub op: BenchOp,
    pub engine: Engine,
    pub check_order: CheckOrder,
    pub iters: usize,
    pub warmup: usize,
}

impl BenchConfig {
    pub fn new(level: Level, op: BenchOp, engine: Engine) -> Self {
        BenchConfig {
            level,
            op,
            engine,
            check_order: CheckOrder::R0First,
            iters: MIN_ITERATIONS,
            warmup: MIN_WARMUP,
        }
    }
}

fn fixed_key(level: Level) -> (Vec<u8>, Vec<u8>) {
    keygen(&[0x42; SEED_BYTES], level)
}

/// Deterministic pseudo-random inputs so runs are comparable.
fn mask_poly(level: Level, i: usize) -> Poly {
    let p = level.params();
    sampling::expand_mask(&[0x17; CRH_BYTES], (i * p.l) as u16, p)[0]
}

fn challenge(level: Level, i: usize) -> Challenge {
    let mut seed = [0u8; SEED_BYTES];
    seed[..8].copy_from_slice(&(i as u64).to_le_bytes());
    let c = sampling::sample_in_ball(&seed, level.params().tau);
    Challenge::from_poly(&c).expect("ternary challenge")
}

/// Prepares the inputs of `cfg.op` and returns the timed body.
fn workload(cfg: &BenchConfig) -> Box<dyn FnMut(usize) + '_> {
    let level = cfg.level;
    const POOL: usize = 64;
    match cfg.op {
        BenchOp::Ntt => {
            let inputs: Vec<Poly> = (0..POOL).map(|i| mask_poly(level, i)).collect();
            Box::new(move |i| {
                black_box(ntt::ntt_forward(
                    black_box(&inputs[i % POOL]),
                    FirstLevel::Montgomery,
                ));
            })
        }
        BenchOp::Intt => {
            let inputs: Vec<Poly> = (0..POOL).map(|i| mask_poly(level, i).freeze()).collect();
            Box::new(move |i| {
                black_box(ntt::ntt_inverse_to_mont(black_box(&inputs[i % POOL])));
            })
        }
        BenchOp::Pointwise => {
            let inputs: Vec<Poly> = (0..POOL).map(|i| mask_poly(level, i)).collect();
            Box::new(move |i| {
                black_box(ntt::pointwise_montgomery(
                    &inputs[i % POOL],
                    &inputs[(i + 1) % POOL],
                ));
            })
        }
        BenchOp::PspmCs => {
            let (_, sk) = fixed_key(level);
            let ctx = SigningContext::new(&sk, Engine::PspmTee).expect("fixed key");
            let params = PspmParams::for_level(level, PspmTarget::Cs);
            let table =
                pspm::pspm_prepare(&ctx.secret_key().s, &params).expect("secrets within eta");
            let cs: Vec<Challenge> = (0..POOL).map(|i| challenge(level, i)).collect();
            Box::new(move |i| {
                black_box(pspm::pspm_multiply(black_box(&cs[i % POOL]), &table));
            })
        }
        BenchOp::NttCs => {
            let (_, sk) = fixed_key(level);
            let ctx = SigningContext::new(&sk, Engine::Ntt).expect("fixed key");
            let s_hat: Vec<Poly> = ctx
                .secret_key()
                .s
                .iter()
                .map(|s| ntt::ntt_forward(s, FirstLevel::Skip).partial_reduce())
                .collect();
            let cs: Vec<Challenge> = (0..POOL).map(|i| challenge(level, i)).collect();
            Box::new(move |i| {
                let c_hat = ntt::ntt_forward(black_box(cs[i % POOL].poly()), FirstLevel::Skip)
                    .partial_reduce();
                let out: Vec<Poly> = s_hat
                    .iter()
                    .map(|s| {
                        ntt::ntt_inverse_to_mont(&ntt::pointwise_montgomery(&c_hat, s)).freeze()
                    })
                    .collect();
                black_box(out);
            })
        }
        BenchOp::Sign => {
            let (_, sk) = fixed_key(level);
            let ctx = SigningContext::new(&sk, cfg.engine).expect("fixed key");
            Box::new(move |i| {
                black_box(ctx.sign(&(i as u64).to_le_bytes(), cfg.check_order, None));
            })
        }
        BenchOp::Verify => {
            let (pk, sk) = fixed_key(level);
            let ctx = SigningContext::new(&sk, cfg.engine).expect("fixed key");
            let sigs: Vec<Vec<u8>> = (0..POOL as u64)
                .map(|i| ctx.sign(&i.to_le_bytes(), CheckOrder::R0First, None).0)
                .collect();
            Box::new(move |i| {
                let j = i % POOL;
                assert!(black_box(verify(&pk, &(j as u64).to_le_bytes(), &sigs[j])));
            })
        }
        BenchOp::Keygen => Box::new(move |i| {
            let mut zeta = [0u8; SEED_BYTES];
            zeta[..8].copy_from_slice(&(i as u64).to_le_bytes());
            black_box(keygen(&zeta, level));
        }),
        BenchOp::Shake => Box::new(move |i| {
            let mut input = [0u8; SEED_BYTES + 2];
            input[..8].copy_from_slice(&(i as u64).to_le_bytes());
            black_box(shake(ShakeVariant::Shake128, &input, 5 * 168));
        }),
    }
}

fn report(
    cfg: &BenchConfig,
    (median_ns, mean_ns, median_cycles): (f64, f64, Option<u64>),
) -> BenchReport {
    BenchReport {
        level: cfg.level,
        engine: cfg.engine,
        op: cfg.op,
        iters: cfg.iters,
        median_ns,
        mean_ns,
        median_cycles,
    }
}

pub fn run(cfg: &BenchConfig) -> BenchReport {
    let mut f = workload(cfg);
    report(cfg, measure(cfg.iters, cfg.warmup, &mut f))
}

/// Runs two configurations with alternating iterations, so slow drift of
/// the machine affects both equally. Iteration counts come from `a`.
pub fn run_interleaved(a: &BenchConfig, b: &BenchConfig) -> (BenchReport, BenchReport) {
    let (mut f, mut g) = (workload(a), workload(b));
    let (ra, rb) = measure_pair(a.iters, a.warmup, &mut f, &mut g);
    let b = BenchConfig {
        iters: a.iters,
        warmup: a.warmup,
        ..*b
    };
    (report(a, ra), report(&b, rb))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn op_names_roundtrip() {
        for op in BenchOp::ALL {
            assert_eq!(op.name().parse::<BenchOp>().unwrap(), op);
        }
        assert!("fft".parse::<BenchOp>().is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median_u64(&mut [3, 1, 2]), 2);
        assert_eq!(median_u64(&mut [4, 1, 3, 2]), 2);
    }

    #[test]
    fn short_run_reports_positive_median() {
        for op in [BenchOp::PspmCs, BenchOp::NttCs, BenchOp::Shake] {
            let cfg = BenchConfig {
                iters: 20,
                warmup: 2,
                ..BenchConfig::new(Level::Two, op, Engine::PspmTee)
            };
            let r = run(&cfg);
            assert!(r.median_ns > 0.0 && r.mean_ns > 0.0, "{op}");
            assert_eq!(r.csv_row().split(',').count(), 7);
        }
    }
}
