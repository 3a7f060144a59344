//! Scalar coefficient arithmetic modulo `q`.
//!
//! None of these functions branch on their argument.

use crate::params::Q;

/// `q^-1 mod 2^32`, computed by the extended Euclidean algorithm at compile
/// time.
pub const QINV: i32 = inverse_mod_2_32(Q as i64);

/// `2^32 mod q`, the Montgomery form of 1.
pub const MONT: i32 = ((1i64 << 32) % Q as i64) as i32;

const _: () = assert!(Q.wrapping_mul(QINV) == 1, "q * q^-1 must be 1 mod 2^32");

const fn inverse_mod_2_32(a: i64) -> i32 {
    let m = 1i64 << 32;
    let (mut old_r, mut r) = (a, m);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let quot = old_r / r;
        let tmp = old_r - quot * r;
        old_r = r;
        r = tmp;
        let tmp = old_s - quot * s;
        old_s = s;
        s = tmp;
    }
    // old_r == gcd == 1, old_s·a ≡ 1 (mod 2^32)
    old_s.rem_euclid(m) as u32 as i32
}

/// Upper bound on Montgomery inputs: `|z| < 2^31·q`.
pub const MONTGOMERY_LIMIT: i64 = (1i64 << 31) * Q as i64;

/// Signed Montgomery reduction: returns `r ≡ z·2^-32 (mod q)` with `|r| < q`.
#[inline(always)]
pub fn montgomery_reduce(z: i64) -> i32 {
    debug_assert!(
        (-MONTGOMERY_LIMIT..MONTGOMERY_LIMIT).contains(&z),
        "montgomery input {z} out of range"
    );
    let m = (z as i32).wrapping_mul(QINV);
    ((z - m as i64 * Q as i64) >> 32) as i32
}

/// Tailored reduction domain bound: inputs must lie in `(-2^40, 2^40]`.
pub const TAILORED_LIMIT: i64 = 1i64 << 40;

/// Reduction specialised to `q = 2^23 - 2^13 + 1`: `z - q·floor(z / 2^23)`.
///
/// For `z` in `(-2^40, 2^40]` the result is congruent to `z` and lies strictly
/// inside `(-2^31, 2^31)`. The shift is arithmetic, so negative inputs round
/// toward negative infinity.
#[inline(always)]
pub fn tailored_reduce(z: i64) -> i64 {
    debug_assert!(
        z > -TAILORED_LIMIT && z <= TAILORED_LIMIT,
        "tailored input {z} out of range"
    );
    z - (z >> 23) * Q as i64
}

/// Reduces `|a| < 2^31 - 2^22` to a representative with `|r| <= 6283008`.
#[inline(always)]
pub fn partial_reduce(a: i32) -> i32 {
    let t = (a + (1 << 22)) >> 23;
    a - t * Q
}

/// Maps `-q < a < q` to `[0, q)`.
#[inline(always)]
pub fn normalize(a: i32) -> i32 {
    a + ((a >> 31) & Q)
}

/// Canonical representative in `[0, q)` of any `|a| < 2^31 - 2^22`.
#[inline(always)]
pub fn freeze(a: i32) -> i32 {
    normalize(partial_reduce(a))
}

/// Centered representative in `[-(q-1)/2, (q-1)/2]` of a canonical value.
#[inline(always)]
pub fn center(a: i32) -> i32 {
    debug_assert!((0..Q).contains(&a));
    a - (((Q - 1) / 2 - a) >> 31 & Q)
}
