use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::RngCore;

use dilithium_pspm::analysis;
use dilithium_pspm::bench::{self, BenchConfig, BenchOp, BenchReport};
use dilithium_pspm::xof::shake256;
use dilithium_pspm::{keygen, sign_with, verify, CheckOrder, Engine, Level, SignOptions};

#[derive(Parser)]
#[command(
    name = "dilithium-pspm",
    version,
    about = "Dilithium signatures with NTT and PSPM engines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Ntt,
    Pspm,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::Ntt => Engine::Ntt,
            EngineArg::Pspm => Engine::PspmTee,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    R0,
    Z,
}

impl From<OrderArg> for CheckOrder {
    fn from(o: OrderArg) -> CheckOrder {
        match o {
            OrderArg::R0 => CheckOrder::R0First,
            OrderArg::Z => CheckOrder::ZFirst,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair.
    Keygen {
        #[arg(long, value_parser = parse_level)]
        level: Level,
        /// 32-byte seed in hex; OS entropy if absent.
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        out_pk: PathBuf,
        #[arg(long)]
        out_sk: PathBuf,
    },
    /// Sign a message file.
    Sign {
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        msg: PathBuf,
        #[arg(long, value_enum, default_value = "pspm")]
        engine: EngineArg,
        /// 64-byte mask seed in hex for randomized signing.
        #[arg(long)]
        rnd: Option<String>,
        #[arg(long, value_enum, default_value = "r0")]
        check_order: OrderArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify a signature; exits 0 if valid, 1 otherwise.
    Verify {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        msg: PathBuf,
        #[arg(long)]
        sig: PathBuf,
    },
    /// Write deterministic known-answer records.
    Kat {
        #[arg(long, value_parser = parse_level)]
        level: Level,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Master seed in hex (any length).
        #[arg(long, default_value = "00")]
        seed: String,
        #[arg(long, value_enum, default_value = "pspm")]
        engine: EngineArg,
        /// Output file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time one operation.
    Bench {
        /// 2, 3 or 5.
        #[arg(long, value_parser = parse_level)]
        level: Level,
        /// ntt, intt, pointwise, pspm_cs, ntt_cs, sign, verify, keygen or shake.
        #[arg(long, value_parser = parse_op)]
        op: BenchOp,
        #[arg(long, value_enum, default_value = "pspm")]
        engine: EngineArg,
        #[arg(long, value_enum, default_value = "r0")]
        check_order: OrderArg,
        #[arg(long, default_value_t = bench::MIN_ITERATIONS)]
        iters: usize,
        #[arg(long, default_value_t = bench::MIN_WARMUP)]
        warmup: usize,
        /// Also run the counterpart (ntt_cs for pspm_cs and back, the other
        /// check order for sign) and print the ratio.
        #[arg(long)]
        compare: bool,
        #[arg(long)]
        csv: bool,
    },
    /// Print rejection-check acceptance probabilities.
    Probs {
        #[arg(long, value_parser = parse_level)]
        level: Level,
        /// Also measure the rates over this many signing attempts.
        #[arg(long)]
        empirical: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn parse_level(s: &str) -> Result<Level, String> {
    s.parse::<Level>().map_err(|e| e.to_string())
}

fn parse_op(s: &str) -> Result<BenchOp, String> {
    s.parse::<BenchOp>().map_err(|e| e.to_string())
}

fn hex_array<const L: usize>(what: &str, s: &str) -> Result<[u8; L]> {
    let bytes = hex::decode(s).with_context(|| format!("{what} is not valid hex"))?;
    bytes
        .try_into()
        .map_err(|b: Vec<u8>| anyhow::anyhow!("{what} must be {L} bytes, got {}", b.len()))
}

fn read(path: &PathBuf) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &PathBuf, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Seed and message of KAT record `i`.
fn kat_inputs(master: &[u8], i: usize) -> ([u8; 32], Vec<u8>) {
    let mut seed = [0u8; 32];
    shake256(&[b"kat-seed", master, &(i as u64).to_le_bytes()], &mut seed);
    let mut msg = vec![0u8; 33 * (i + 1)];
    shake256(&[b"kat-msg", &seed], &mut msg);
    (seed, msg)
}

fn kat(level: Level, count: usize, master: &[u8], engine: Engine) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "# dilithium{}", level.number())?;
    for i in 0..count {
        let (seed, msg) = kat_inputs(master, i);
        let (pk, sk) = keygen(&seed, level);
        let opts = SignOptions {
            engine,
            ..SignOptions::default()
        };
        let (sig, _) = sign_with(&sk, &msg, &opts)?;
        if !verify(&pk, &msg, &sig) {
            bail!("record {i}: signature does not verify");
        }
        writeln!(out)?;
        writeln!(out, "count = {i}")?;
        writeln!(out, "seed = {}", hex::encode_upper(seed))?;
        writeln!(out, "mlen = {}", msg.len())?;
        writeln!(out, "msg = {}", hex::encode_upper(&msg))?;
        writeln!(out, "pk = {}", hex::encode_upper(&pk))?;
        writeln!(out, "sk = {}", hex::encode_upper(&sk))?;
        writeln!(out, "siglen = {}", sig.len())?;
        writeln!(out, "sig = {}", hex::encode_upper(&sig))?;
    }
    Ok(out)
}

fn print_report(r: &BenchReport, csv: bool) {
    if csv {
        println!("{}", r.csv_row());
    } else {
        println!("{r}");
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Keygen {
            level,
            seed,
            out_pk,
            out_sk,
        } => {
            let zeta = match seed {
                Some(s) => hex_array::<32>("seed", &s)?,
                None => {
                    let mut z = [0u8; 32];
                    rand::rngs::OsRng.fill_bytes(&mut z);
                    z
                }
            };
            let (pk, sk) = keygen(&zeta, level);
            write(&out_pk, &pk)?;
            write(&out_sk, &sk)?;
        }
        Command::Sign {
            sk,
            msg,
            engine,
            rnd,
            check_order,
            out,
        } => {
            let rnd = rnd.map(|r| hex_array::<64>("rnd", &r)).transpose()?;
            let opts = SignOptions {
                engine: engine.into(),
                check_order: check_order.into(),
                rnd,
            };
            let (sig, _) = sign_with(&read(&sk)?, &read(&msg)?, &opts).context("signing failed")?;
            write(&out, &sig)?;
        }
        Command::Verify { pk, msg, sig } => {
            let ok = verify(&read(&pk)?, &read(&msg)?, &read(&sig)?);
            println!("{}", if ok { "valid" } else { "invalid" });
            return Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            });
        }
        Command::Kat {
            level,
            count,
            seed,
            engine,
            out,
        } => {
            let master = hex::decode(&seed).context("seed is not valid hex")?;
            let text = kat(level, count, &master, engine.into())?;
            match out {
                Some(path) => write(&path, text.as_bytes())?,
                None => print!("{text}"),
            }
        }
        Command::Bench {
            level,
            op,
            engine,
            check_order,
            iters,
            warmup,
            compare,
            csv,
        } => {
            if iters == 0 {
                bail!("--iters must be positive");
            }
            let cfg = BenchConfig {
                level,
                op,
                engine: engine.into(),
                check_order: check_order.into(),
                iters,
                warmup,
            };
            if csv {
                println!("{}", BenchReport::CSV_HEADER);
            }
            if compare {
                compare_with_counterpart(&cfg, csv)?;
            } else {
                print_report(&bench::run(&cfg), csv);
            }
        }
        Command::Probs {
            level,
            empirical,
            seed,
        } => {
            let p = level.params();
            let (pz, pr) = (analysis::prob_z_good(p), analysis::prob_r0_good(p));
            println!("level {}", level.number());
            println!("analytic  Pr(z good)  = {pz:.6}");
            println!("analytic  Pr(r0 good) = {pr:.6}");
            println!(
                "analytic  mean attempts from both checks = {:.3}",
                analysis::expected_attempts(p)
            );
            if let Some(n) = empirical {
                if n == 0 {
                    bail!("--empirical must be positive");
                }
                let r = analysis::empirical_rates(level, n, seed);
                println!("empirical attempts    = {}", r.attempts);
                println!("empirical Pr(z good)  = {:.6}", r.z_rate());
                println!("empirical Pr(r0 good) = {:.6}", r.r0_rate());
                println!("empirical Pr(both)    = {:.6}", r.both_rate());
                println!("empirical Pr(accept)  = {:.6}", r.accept_rate());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Times `cfg` and its counterpart with interleaved iterations.
fn compare_with_counterpart(cfg: &BenchConfig, csv: bool) -> Result<()> {
    let other = match cfg.op {
        BenchOp::PspmCs => BenchConfig {
            op: BenchOp::NttCs,
            ..*cfg
        },
        BenchOp::NttCs => BenchConfig {
            op: BenchOp::PspmCs,
            ..*cfg
        },
        BenchOp::Sign => {
            let check_order = match cfg.check_order {
                CheckOrder::R0First => CheckOrder::ZFirst,
                CheckOrder::ZFirst => CheckOrder::R0First,
            };
            BenchConfig {
                check_order,
                ..*cfg
            }
        }
        op => bail!("--compare is only defined for pspm_cs, ntt_cs and sign, not {op}"),
    };
    let (first, second) = bench::run_interleaved(cfg, &other);
    let first = &first;
    print_report(first, csv);
    print_report(&second, csv);
    if csv {
        return Ok(());
    }
    match cfg.op {
        BenchOp::Sign => {
            let (r0, z) = if cfg.check_order == CheckOrder::R0First {
                (first, &second)
            } else {
                (&second, first)
            };
            println!(
                "median sign time, r0 first / z first = {:.3}",
                r0.median_ns / z.median_ns
            );
        }
        _ => {
            let (pspm, ntt) = if cfg.op == BenchOp::PspmCs {
                (first, &second)
            } else {
                (&second, first)
            };
            let saving = 1.0 - pspm.median_ns / ntt.median_ns;
            let (lo, hi) = bench::REFERENCE_CS_SAVING;
            println!(
                "c·s: pspm / ntt = {:.3}, time saved {:.1}% (published range on wide-vector hardware: {:.0}-{:.0}%)",
                pspm.median_ns / ntt.median_ns,
                100.0 * saving,
                100.0 * lo,
                100.0 * hi
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
