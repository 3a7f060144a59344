//! Keys and deterministic signatures compared against digests produced by
//! an independent implementation of the same round-3 scheme. Digests are
//! SHAKE256(bytes, 16).

use dilithium_pspm::xof::{shake, ShakeVariant};
use dilithium_pspm::{keygen, sign, verify, Engine, Level};

struct Vector {
    level: Level,
    zeta: &'static str,
    msg: &'static str,
    pk: &'static str,
    sk: &'static str,
    sig: &'static str,
}

const SEQ: &str = "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f";
const ONES: &str = "0101010101010101010101010101010101010101010101010101010101010101";
const MSG0: &str = "696e7465726f70206d6573736167652000";
const MSG1: &str = "696e7465726f70206d6573736167652001";

const VECTORS: [Vector; 6] = [
    Vector {
        level: Level::Two,
        zeta: SEQ,
        msg: MSG0,
        pk: "8522a0b08e82b4e7ca1480f7e21cb144",
        sk: "3f8fd5d916d6168653c2fda51ed55ddc",
        sig: "dcf0b84c4c94efd63c9e39bbb2e3d4af",
    },
    Vector {
        level: Level::Two,
        zeta: ONES,
        msg: MSG1,
        pk: "48fbedb17fc0a6f48d3c243227571cb0",
        sk: "3b2b9ec64b299c18d31aaa734a0e3b21",
        sig: "f036ecea9154f0e68184937d8e1cada4",
    },
    Vector {
        level: Level::Three,
        zeta: SEQ,
        msg: MSG0,
        pk: "561d4f1572fa8d7434d604252888a00f",
        sk: "bac7c256a59df612c68219a727cf9742",
        sig: "6cd05836bb2e1e6039f31e4cb7fa2b65",
    },
    Vector {
        level: Level::Three,
        zeta: ONES,
        msg: MSG1,
        pk: "6fc3360c14c738583733ca9f0c00b457",
        sk: "dd89a5de6c383f0f9c2c113b41685c9e",
        sig: "07f38f67ad7bcb2cebeb3dcb5e53d2c4",
    },
    Vector {
        level: Level::Five,
        zeta: SEQ,
        msg: MSG0,
        pk: "3668d081fc726c0986cb496c3525f833",
        sk: "0ce92224b9cfd2a917cb5490a6f90da5",
        sig: "3737354b5a38ce351c6c72f3d67f92a0",
    },
    Vector {
        level: Level::Five,
        zeta: ONES,
        msg: MSG1,
        pk: "e3d952a53ed4a3f43828f79e0c9bb09e",
        sk: "54a0b8ec5d9f54a75c627c7ed980e328",
        sig: "0220e8e5f9c5888faf6b8d49ffb63c1b",
    },
];

fn unhex(s: &str) -> Vec<u8> {
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap())
        .collect()
}

fn digest(bytes: &[u8]) -> String {
    shake(ShakeVariant::Shake256, bytes, 16)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[test]
fn matches_independent_implementation() {
    for v in &VECTORS {
        let zeta: [u8; 32] = unhex(v.zeta).try_into().unwrap();
        let msg = unhex(v.msg);
        let (pk, sk) = keygen(&zeta, v.level);
        assert_eq!(digest(&pk), v.pk, "{:?} pk", v.level);
        assert_eq!(digest(&sk), v.sk, "{:?} sk", v.level);
        for engine in [Engine::Ntt, Engine::PspmTee] {
            let sig = sign(&sk, &msg, engine, None).unwrap();
            assert_eq!(digest(&sig), v.sig, "{:?} {engine} sig", v.level);
            assert!(verify(&pk, &msg, &sig));
        }
    }
}
