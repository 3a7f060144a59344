//! Byte encodings of polynomials, keys and signatures.
//!
//! Coefficients are concatenated in ascending index order, each as a
//! little-endian bit string of fixed width; bytes are filled from the least
//! significant bit. Signed ranges are mapped to unsigned ones first (see
//! [`Transform`]). All decoders validate lengths and ranges and never panic
//! on untrusted input.

use crate::params::{Level, ParamSet, D, N, SEED_BYTES, T0_POLY_BYTES, T1_BITS, T1_POLY_BYTES};
use crate::poly::Poly;
use crate::rounding::HintVector;
use crate::Error;

/// Signed-to-unsigned mapping applied before packing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    None,
    /// `eta - a`, valid for `a` in `[-eta, eta]`.
    EtaOffset(i32),
    /// `2^(d-1) - a`, valid for `a` in `(-2^(d-1), 2^(d-1)]`.
    T0Offset,
    /// `gamma1 - a`, valid for `a` in `(-gamma1, gamma1]`.
    Gamma1Offset(i32),
}

impl Transform {
    fn forward(self, a: i32) -> i32 {
        match self {
            Transform::None => a,
            Transform::EtaOffset(eta) => eta - a,
            Transform::T0Offset => (1 << (D - 1)) - a,
            Transform::Gamma1Offset(g) => g - a,
        }
    }

    /// Exclusive upper bound on the unsigned value, if tighter than `2^width`.
    fn value_limit(self) -> Option<i64> {
        match self {
            Transform::EtaOffset(eta) => Some(2 * eta as i64 + 1),
            Transform::Gamma1Offset(g) => Some(2 * g as i64),
            Transform::None | Transform::T0Offset => None,
        }
    }
}

pub fn packed_len(width: u32) -> usize {
    N * width as usize / 8
}

/// Packs one polynomial into `out`, which must be exactly
/// `packed_len(width)` bytes.
pub fn pack_bits_into(
    p: &Poly,
    width: u32,
    transform: Transform,
    out: &mut [u8],
) -> Result<(), Error> {
    assert_eq!(out.len(), packed_len(width), "output buffer length");
    let limit = transform
        .value_limit()
        .unwrap_or(1i64 << width)
        .min(1i64 << width);
    out.fill(0);
    let mut acc: u64 = 0;
    let mut bits = 0u32;
    let mut pos = 0;
    for &a in p.coeffs.iter() {
        let v = transform.forward(a);
        if v < 0 || v as i64 >= limit {
            return Err(Error::Encode { value: a, width });
        }
        acc |= (v as u64) << bits;
        bits += width;
        while bits >= 8 {
            out[pos] = acc as u8;
            pos += 1;
            acc >>= 8;
            bits -= 8;
        }
    }
    debug_assert_eq!(bits, 0);
    Ok(())
}

pub fn pack_bits(p: &Poly, width: u32, transform: Transform) -> Result<Vec<u8>, Error> {
    let mut out = vec![0u8; packed_len(width)];
    pack_bits_into(p, width, transform, &mut out)?;
    Ok(out)
}

pub fn unpack_bits(bytes: &[u8], width: u32, transform: Transform) -> Result<Poly, Error> {
    if bytes.len() != packed_len(width) {
        return Err(Error::decode(
            "packed polynomial",
            format!("expected {} bytes, got {}", packed_len(width), bytes.len()),
        ));
    }
    let limit = transform.value_limit();
    let mask = (1u64 << width) - 1;
    let mut p = Poly::zero();
    let mut acc: u64 = 0;
    let mut bits = 0u32;
    let mut iter = bytes.iter();
    for c in p.coeffs.iter_mut() {
        while bits < width {
            acc |= (*iter.next().expect("length checked") as u64) << bits;
            bits += 8;
        }
        let v = (acc & mask) as i64;
        acc >>= width;
        bits -= width;
        if limit.is_some_and(|l| v >= l) {
            return Err(Error::decode(
                "packed polynomial",
                format!("value {v} outside the {transform:?} range"),
            ));
        }
        let v = v as i32;
        *c = match transform {
            Transform::None => v,
            Transform::EtaOffset(eta) => eta - v,
            Transform::T0Offset => (1 << (D - 1)) - v,
            Transform::Gamma1Offset(g) => g - v,
        };
    }
    Ok(p)
}

/// Hint encoding: positions of the ones in each polynomial, concatenated in
/// the first `omega` bytes, then one cumulative count per polynomial.
pub fn encode_hints(h: &HintVector, omega: usize) -> Result<Vec<u8>, Error> {
    let weight = h.weight();
    if weight > omega {
        return Err(Error::HintWeight { weight, omega });
    }
    let k = h.polys.len();
    let mut out = vec![0u8; omega + k];
    let mut count = 0;
    for (i, p) in h.polys.iter().enumerate() {
        for (j, &bit) in p.coeffs.iter().enumerate() {
            if bit != 0 {
                out[count] = j as u8;
                count += 1;
            }
        }
        out[omega + i] = count as u8;
    }
    Ok(out)
}

/// Strict inverse of [`encode_hints`]: rejects decreasing cumulative counts,
/// counts above omega, positions that are not strictly increasing within a
/// polynomial, and nonzero padding.
pub fn decode_hints(bytes: &[u8], k: usize, omega: usize) -> Result<HintVector, Error> {
    if bytes.len() != omega + k {
        return Err(Error::decode(
            "hint",
            format!("expected {} bytes, got {}", omega + k, bytes.len()),
        ));
    }
    let mut polys = vec![Poly::zero(); k];
    let mut prev = 0usize;
    for (i, p) in polys.iter_mut().enumerate() {
        let end = bytes[omega + i] as usize;
        if end < prev || end > omega {
            return Err(Error::decode(
                "hint",
                "cumulative counts not monotone or above omega",
            ));
        }
        for j in prev..end {
            if j > prev && bytes[j] <= bytes[j - 1] {
                return Err(Error::decode("hint", "positions not strictly increasing"));
            }
            p.coeffs[bytes[j] as usize] = 1;
        }
        prev = end;
    }
    if bytes[prev..omega].iter().any(|&b| b != 0) {
        return Err(Error::decode("hint", "nonzero padding"));
    }
    Ok(HintVector { polys })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub level: Level,
    pub rho: [u8; SEED_BYTES],
    pub t1: Vec<Poly>,
}

#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey {
    pub level: Level,
    pub rho: [u8; SEED_BYTES],
    pub key: [u8; SEED_BYTES],
    pub tr: [u8; SEED_BYTES],
    pub s: Vec<Poly>,
    pub e: Vec<Poly>,
    pub t0: Vec<Poly>,
}

impl std::fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SecretKey")
            .field("level", &self.level)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub c_tilde: [u8; SEED_BYTES],
    pub z: Vec<Poly>,
    pub h: HintVector,
}

fn seed(bytes: &[u8]) -> [u8; SEED_BYTES] {
    bytes.try_into().expect("seed slice length")
}

fn check_len(what: &'static str, bytes: &[u8], want: usize) -> Result<(), Error> {
    if bytes.len() == want {
        Ok(())
    } else {
        Err(Error::decode(
            what,
            format!("expected {want} bytes, got {}", bytes.len()),
        ))
    }
}

fn level_for_len(
    what: &'static str,
    len: usize,
    size: impl Fn(&ParamSet) -> usize,
) -> Result<Level, Error> {
    Level::ALL
        .into_iter()
        .find(|l| size(l.params()) == len)
        .ok_or_else(|| Error::decode(what, format!("no parameter set has a {len}-byte encoding")))
}

impl Level {
    pub fn from_pk_len(len: usize) -> Result<Level, Error> {
        level_for_len("public key", len, ParamSet::pk_bytes)
    }

    pub fn from_sk_len(len: usize) -> Result<Level, Error> {
        level_for_len("secret key", len, ParamSet::sk_bytes)
    }

    pub fn from_sig_len(len: usize) -> Result<Level, Error> {
        level_for_len("signature", len, ParamSet::sig_bytes)
    }
}

pub fn encode_pk(pk: &PublicKey) -> Vec<u8> {
    let p = pk.level.params();
    let mut out = Vec::with_capacity(p.pk_bytes());
    out.extend_from_slice(&pk.rho);
    for t in &pk.t1 {
        out.extend(pack_bits(t, T1_BITS, Transform::None).expect("t1 coefficients are 10-bit"));
    }
    out
}

pub fn decode_pk(level: Level, bytes: &[u8]) -> Result<PublicKey, Error> {
    let p = level.params();
    check_len("public key", bytes, p.pk_bytes())?;
    let (rho, rest) = bytes.split_at(SEED_BYTES);
    let t1 = rest
        .chunks_exact(T1_POLY_BYTES)
        .map(|c| unpack_bits(c, T1_BITS, Transform::None))
        .collect::<Result<_, _>>()?;
    Ok(PublicKey {
        level,
        rho: seed(rho),
        t1,
    })
}

pub fn encode_sk(sk: &SecretKey) -> Result<Vec<u8>, Error> {
    let p = sk.level.params();
    let mut out = Vec::with_capacity(p.sk_bytes());
    out.extend_from_slice(&sk.rho);
    out.extend_from_slice(&sk.key);
    out.extend_from_slice(&sk.tr);
    for poly in sk.s.iter().chain(&sk.e) {
        out.extend(pack_bits(poly, p.eta_bits(), Transform::EtaOffset(p.eta))?);
    }
    for poly in &sk.t0 {
        out.extend(pack_bits(poly, D, Transform::T0Offset)?);
    }
    Ok(out)
}

pub fn decode_sk(level: Level, bytes: &[u8]) -> Result<SecretKey, Error> {
    let p = level.params();
    check_len("secret key", bytes, p.sk_bytes())?;
    let (rho, rest) = bytes.split_at(SEED_BYTES);
    let (key, rest) = rest.split_at(SEED_BYTES);
    let (tr, rest) = rest.split_at(SEED_BYTES);
    let (s_bytes, rest) = rest.split_at(p.l * p.eta_poly_bytes());
    let (e_bytes, t0_bytes) = rest.split_at(p.k * p.eta_poly_bytes());
    let eta = |chunk: &[u8]| unpack_bits(chunk, p.eta_bits(), Transform::EtaOffset(p.eta));
    let s = s_bytes
        .chunks_exact(p.eta_poly_bytes())
        .map(eta)
        .collect::<Result<_, _>>()?;
    let e = e_bytes
        .chunks_exact(p.eta_poly_bytes())
        .map(eta)
        .collect::<Result<_, _>>()?;
    let t0 = t0_bytes
        .chunks_exact(T0_POLY_BYTES)
        .map(|c| unpack_bits(c, D, Transform::T0Offset))
        .collect::<Result<_, _>>()?;
    Ok(SecretKey {
        level,
        rho: seed(rho),
        key: seed(key),
        tr: seed(tr),
        s,
        e,
        t0,
    })
}

pub fn encode_sig(level: Level, sig: &Signature) -> Result<Vec<u8>, Error> {
    let p = level.params();
    let mut out = Vec::with_capacity(p.sig_bytes());
    out.extend_from_slice(&sig.c_tilde);
    for z in &sig.z {
        out.extend(pack_bits(z, p.z_bits(), Transform::Gamma1Offset(p.gamma1))?);
    }
    out.extend(encode_hints(&sig.h, p.omega)?);
    Ok(out)
}

pub fn decode_sig(level: Level, bytes: &[u8]) -> Result<Signature, Error> {
    let p = level.params();
    check_len("signature", bytes, p.sig_bytes())?;
    let (c_tilde, rest) = bytes.split_at(SEED_BYTES);
    let (z_bytes, h_bytes) = rest.split_at(p.l * p.z_poly_bytes());
    let z = z_bytes
        .chunks_exact(p.z_poly_bytes())
        .map(|c| unpack_bits(c, p.z_bits(), Transform::Gamma1Offset(p.gamma1)))
        .collect::<Result<_, _>>()?;
    let h = decode_hints(h_bytes, p.k, p.omega)?;
    Ok(Signature {
        c_tilde: seed(c_tilde),
        z,
        h,
    })
}

/// Packs w1 (range `[0, 43]` or `[0, 15]`) for the challenge hash.
pub fn pack_w1(p: &ParamSet, w1: &[Poly]) -> Vec<u8> {
    let mut out = vec![0u8; w1.len() * p.w1_poly_bytes()];
    for (poly, chunk) in w1.iter().zip(out.chunks_exact_mut(p.w1_poly_bytes())) {
        pack_bits_into(poly, p.w1_bits(), Transform::None, chunk).expect("w1 fits its width");
    }
    out
}
