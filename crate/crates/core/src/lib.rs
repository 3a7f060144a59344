//! Dilithium (round-3 lineage of ML-DSA) with two interchangeable engines for
//! the challenge products `c·s` and `c·e`:
//!
//! * the NTT engine, using lazy first-level reduction (skip / tailored /
//!   Montgomery) in the forward transform, and
//! * the PSPM-TEE engine, which packs the small secret polynomials as base-M
//!   digits of 32-bit words and aborts extraction on the first coefficient
//!   that fails a rejection check.
//!
//! Both engines produce byte-identical signatures.
//!
//! Module map:
//!
//! | module     | contents                                                  |
//! |------------|-----------------------------------------------------------|
//! | `params`   | per-level constants and PSPM packing parameters           |
//! | `ring`     | Montgomery, tailored, partial reduction, normalization    |
//! | `ntt`      | forward/inverse negacyclic NTT, pointwise products        |
//! | `pspm`     | packed tables, plain and early-evaluation products        |
//! | `xof`      | Keccak-f[1600], SHAKE-128/256, batched N-lane streams     |
//! | `sampling` | ExpandA, ExpandS, ExpandMask, SampleInBall                |
//! | `rounding` | Power2Round, Decompose, hints, norm checks                |
//! | `encode`   | key / signature byte codecs                               |
//! | `scheme`   | KeyGen, Sign, Verify                                      |
//! | `kernels`  | lane-parallel backend, bit-equivalent to the scalar path  |
//! | `analysis` | rejection probabilities, attempt probes                   |
//! | `bench`    | median-timing harness used by the CLI                     |

pub mod analysis;
pub mod bench;
pub mod encode;
mod error;
pub mod kernels;
pub mod ntt;
pub mod params;
pub mod poly;
pub mod pspm;
pub mod ring;
pub mod rounding;
pub mod sampling;
pub mod scheme;
pub mod xof;

pub use error::Error;
pub use params::{Level, ParamSet};
pub use poly::Poly;
pub use scheme::{keygen, sign, sign_with, verify, CheckOrder, Engine, SignOptions, SignStats};
