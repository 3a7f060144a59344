//! Lane-parallel backend.
//!
//! Every kernel here works on fixed blocks of [`LANES`] coefficients in
//! lockstep and is bit-equivalent to the scalar routines in [`crate::ring`],
//! [`crate::ntt`], [`crate::sampling`] and [`crate::pspm`]. The blocks are
//! plain arrays so the compiler can map them onto whatever vector unit the
//! target offers; no particular instruction sequence is relied on.
//!
//! The scalar path is always compiled and remains the reference. Which path
//! runs is chosen by [`backend`]: a per-thread override set with
//! [`with_backend`], else the process default. The default is
//! [`Backend::Lanes`] unless the `DILITHIUM_FORCE_SCALAR` environment
//! variable is set to a non-empty value other than `0`.

use std::cell::Cell;
use std::sync::atomic::{AtomicU8, Ordering};

use crate::params::Q;
use crate::ring::{self, QINV};

/// Block width, matching a 512-bit register of 32-bit lanes.
pub const LANES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Scalar,
    Lanes,
}

const UNSET: u8 = 0;
const SCALAR: u8 = 1;
const LANED: u8 = 2;

static DEFAULT_BACKEND: AtomicU8 = AtomicU8::new(UNSET);

thread_local! {
    static OVERRIDE: Cell<Option<Backend>> = const { Cell::new(None) };
}

fn encode(b: Backend) -> u8 {
    match b {
        Backend::Scalar => SCALAR,
        Backend::Lanes => LANED,
    }
}

fn default_backend() -> Backend {
    match DEFAULT_BACKEND.load(Ordering::Relaxed) {
        SCALAR => Backend::Scalar,
        LANED => Backend::Lanes,
        _ => {
            let forced = std::env::var("DILITHIUM_FORCE_SCALAR")
                .map(|v| !v.is_empty() && v != "0")
                .unwrap_or(false);
            let b = if forced {
                Backend::Scalar
            } else {
                Backend::Lanes
            };
            DEFAULT_BACKEND.store(encode(b), Ordering::Relaxed);
            b
        }
    }
}

/// Backend in effect on the current thread.
pub fn backend() -> Backend {
    OVERRIDE.with(|o| o.get()).unwrap_or_else(default_backend)
}

/// Sets the process-wide default backend.
pub fn set_default_backend(b: Backend) {
    DEFAULT_BACKEND.store(encode(b), Ordering::Relaxed);
}

/// Runs `f` with `b` forced on the current thread.
pub fn with_backend<R>(b: Backend, f: impl FnOnce() -> R) -> R {
    struct Restore(Option<Backend>);
    impl Drop for Restore {
        fn drop(&mut self) {
            OVERRIDE.with(|o| o.set(self.0));
        }
    }
    let _restore = Restore(OVERRIDE.with(|o| o.replace(Some(b))));
    f()
}

pub fn lanes_montgomery(zs: &[i64; LANES]) -> [i32; LANES] {
    let mut lo = [0i32; LANES];
    let mut m = [0i32; LANES];
    let mut out = [0i32; LANES];
    for i in 0..LANES {
        debug_assert!((-ring::MONTGOMERY_LIMIT..ring::MONTGOMERY_LIMIT).contains(&zs[i]));
        lo[i] = zs[i] as i32;
    }
    for i in 0..LANES {
        m[i] = lo[i].wrapping_mul(QINV);
    }
    for i in 0..LANES {
        out[i] = ((zs[i] - m[i] as i64 * Q as i64) >> 32) as i32;
    }
    out
}

/// Shift, then multiply-subtract: `z - floor(z / 2^23)·q` per lane.
pub fn lanes_tailored(zs: &[i64; LANES]) -> [i64; LANES] {
    let mut hi = [0i64; LANES];
    let mut out = [0i64; LANES];
    for i in 0..LANES {
        debug_assert!(zs[i] > -ring::TAILORED_LIMIT && zs[i] <= ring::TAILORED_LIMIT);
        hi[i] = zs[i] >> 23;
    }
    for i in 0..LANES {
        out[i] = zs[i] - hi[i] * Q as i64;
    }
    out
}

/// Stable compaction of the lanes whose mask bit is set, written to the
/// front of `out`. Returns the number of survivors.
///
/// `out` must have room for `LANES` values even if fewer survive.
pub fn lanes_compact(values: &[i32; LANES], accept_mask: u16, out: &mut [i32]) -> usize {
    let mut buf = [0i32; LANES];
    let mut pos = 0usize;
    for (i, &v) in values.iter().enumerate() {
        buf[pos] = v;
        pos += ((accept_mask >> i) & 1) as usize;
    }
    out[..LANES].copy_from_slice(&buf);
    pos
}

/// Lane mask of `values[i] < bound`.
pub fn lanes_less_than(values: &[i32; LANES], bound: i32) -> u16 {
    let mut mask = 0u16;
    for (i, &v) in values.iter().enumerate() {
        mask |= ((v < bound) as u16) << i;
    }
    mask
}

/// Montgomery product with a twiddle whose `zeta·q^-1 mod 2^32` is
/// precomputed. Equal to `montgomery_reduce(a·zeta)` per lane.
#[inline(always)]
fn lanes_mul_twiddle(a: &[i32; LANES], zeta: i32, zeta_qinv: i32) -> [i32; LANES] {
    let mut out = [0i32; LANES];
    for i in 0..LANES {
        let m = a[i].wrapping_mul(zeta_qinv);
        out[i] = ((a[i] as i64 * zeta as i64 - m as i64 * Q as i64) >> 32) as i32;
    }
    out
}

fn block(s: &[i32]) -> &[i32; LANES] {
    s.try_into().expect("block of LANES coefficients")
}

/// Cooley-Tukey butterflies `(lo, hi) <- (lo + zeta·hi, lo - zeta·hi)` over
/// equal-length slices whose length is a multiple of `LANES`.
pub(crate) fn ct_butterflies(lo: &mut [i32], hi: &mut [i32], zeta: i32, zeta_qinv: i32) {
    for (l, h) in lo.chunks_exact_mut(LANES).zip(hi.chunks_exact_mut(LANES)) {
        let t = lanes_mul_twiddle(block(h), zeta, zeta_qinv);
        for i in 0..LANES {
            h[i] = l[i] - t[i];
            l[i] += t[i];
        }
    }
}

/// Gentleman-Sande butterflies `(lo, hi) <- (lo + hi, zeta·(lo - hi))`.
pub(crate) fn gs_butterflies(lo: &mut [i32], hi: &mut [i32], zeta: i32, zeta_qinv: i32) {
    for (l, h) in lo.chunks_exact_mut(LANES).zip(hi.chunks_exact_mut(LANES)) {
        let mut diff = [0i32; LANES];
        for i in 0..LANES {
            diff[i] = l[i] - h[i];
            l[i] += h[i];
        }
        h.copy_from_slice(&lanes_mul_twiddle(&diff, zeta, zeta_qinv));
    }
}

pub(crate) fn pointwise_montgomery(out: &mut [i32], a: &[i32], b: &[i32]) {
    for ((o, x), y) in out
        .chunks_exact_mut(LANES)
        .zip(a.chunks_exact(LANES))
        .zip(b.chunks_exact(LANES))
    {
        let mut prod = [0i64; LANES];
        for i in 0..LANES {
            prod[i] = x[i] as i64 * y[i] as i64;
        }
        o.copy_from_slice(&lanes_montgomery(&prod));
    }
}

pub(crate) fn scale_montgomery(a: &mut [i32], factor: i32) {
    for chunk in a.chunks_exact_mut(LANES) {
        let mut prod = [0i64; LANES];
        for i in 0..LANES {
            prod[i] = chunk[i] as i64 * factor as i64;
        }
        chunk.copy_from_slice(&lanes_montgomery(&prod));
    }
}

/// First forward level in tailored mode: the twiddle is a plain residue and
/// each product is brought back under 2^31 by the tailored reduction.
pub(crate) fn ct_butterflies_tailored(lo: &mut [i32], hi: &mut [i32], zeta_plain: i32) {
    for (l, h) in lo.chunks_exact_mut(LANES).zip(hi.chunks_exact_mut(LANES)) {
        let mut prod = [0i64; LANES];
        for i in 0..LANES {
            prod[i] = h[i] as i64 * zeta_plain as i64;
        }
        let t = lanes_tailored(&prod);
        for i in 0..LANES {
            let t = t[i] as i32;
            h[i] = l[i] - t;
            l[i] += t;
        }
    }
}

/// Uniform rejection sampling over a buffer of 3-byte candidates, 16 at a
/// time: mask, compare against q, compress-store. Returns the new fill
/// count of `out`.
pub(crate) fn rej_uniform(out: &mut [i32], mut filled: usize, bytes: &[u8]) -> usize {
    let mut chunks = bytes.chunks_exact(3 * LANES);
    let mut staging = [0i32; LANES];
    for chunk in &mut chunks {
        if filled >= out.len() {
            return filled;
        }
        let mut cand = [0i32; LANES];
        for i in 0..LANES {
            let b = &chunk[3 * i..3 * i + 3];
            cand[i] = (b[0] as i32 | (b[1] as i32) << 8 | (b[2] as i32) << 16) & 0x7F_FFFF;
        }
        let mask = lanes_less_than(&cand, Q);
        let got = lanes_compact(&cand, mask, &mut staging);
        let take = got.min(out.len() - filled);
        out[filled..filled + take].copy_from_slice(&staging[..take]);
        filled += take;
    }
    crate::sampling::rej_uniform_scalar(out, filled, chunks.remainder())
}

/// Packed-word accumulation `acc[j] += src[j]` (`negate == false`) or
/// `acc[j] += gamma - src[j]` over equal-length slices.
pub(crate) fn accumulate_words(acc: &mut [u32], src: &[u32], gamma: u32, negate: bool) {
    let (sign_mask, offset) = if negate {
        (u32::MAX, gamma.wrapping_add(1))
    } else {
        (0, 0)
    };
    // gamma - v == gamma + !v + 1 (mod 2^32); select with a mask so both
    // signs share one loop body.
    let mut a_chunks = acc.chunks_exact_mut(LANES);
    let mut s_chunks = src.chunks_exact(LANES);
    for (a, s) in (&mut a_chunks).zip(&mut s_chunks) {
        for i in 0..LANES {
            a[i] = a[i].wrapping_add((s[i] ^ sign_mask).wrapping_add(offset));
        }
    }
    for (a, s) in a_chunks
        .into_remainder()
        .iter_mut()
        .zip(s_chunks.remainder())
    {
        *a = a.wrapping_add((s ^ sign_mask).wrapping_add(offset));
    }
}
