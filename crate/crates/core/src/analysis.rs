//! Acceptance probabilities of the two main rejection checks, analytic and
//! measured.

use crate::params::{Level, ParamSet, CRH_BYTES, SEED_BYTES};
use crate::scheme::{keygen, Engine, SigningContext};
use crate::xof::shake256;

/// Probability that `z = y + c·s` passes `||z|| < gamma1 - beta`, treating
/// coefficients as independent and uniform over the mask range.
pub fn prob_z_good(p: &ParamSet) -> f64 {
    let num = 2.0 * (p.gamma1 - p.beta) as f64 - 1.0;
    let den = 2.0 * p.gamma1 as f64 - 1.0;
    (num / den).powi((256 * p.l) as i32)
}

/// Probability that the low bits of `w - c·e` stay below `gamma2 - beta`.
pub fn prob_r0_good(p: &ParamSet) -> f64 {
    let num = 2.0 * (p.gamma2 - p.beta) as f64 - 1.0;
    let den = 2.0 * p.gamma2 as f64;
    (num / den).powi((256 * p.k) as i32)
}

/// Mean number of attempts implied by the two checks alone.
pub fn expected_attempts(p: &ParamSet) -> f64 {
    1.0 / (prob_z_good(p) * prob_r0_good(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EmpiricalRates {
    pub attempts: u64,
    pub z_good: u64,
    pub r0_good: u64,
    pub both_good: u64,
    pub accepted: u64,
}

impl EmpiricalRates {
    pub fn z_rate(&self) -> f64 {
        self.z_good as f64 / self.attempts as f64
    }

    pub fn r0_rate(&self) -> f64 {
        self.r0_good as f64 / self.attempts as f64
    }

    pub fn both_rate(&self) -> f64 {
        self.both_good as f64 / self.attempts as f64
    }

    pub fn accept_rate(&self) -> f64 {
        self.accepted as f64 / self.attempts as f64
    }
}

/// Attempts per generated key.
const ATTEMPTS_PER_KEY: u64 = 250;
/// Attempts per message.
const ATTEMPTS_PER_MESSAGE: u64 = 10;

/// Runs `attempts` signing-loop attempts over keys and messages derived from
/// `seed`, evaluating every check on each attempt.
pub fn empirical_rates(level: Level, attempts: u64, seed: u64) -> EmpiricalRates {
    let mut rates = EmpiricalRates::default();
    let mut key_index = 0u64;
    while rates.attempts < attempts {
        let mut zeta = [0u8; SEED_BYTES];
        shake256(
            &[b"key", &seed.to_le_bytes(), &key_index.to_le_bytes()],
            &mut zeta,
        );
        key_index += 1;
        let (_, sk) = keygen(&zeta, level);
        let ctx = SigningContext::new(&sk, Engine::Ntt).expect("fresh key decodes");
        let l = ctx.params().l as u16;
        let mut msg_index = 0u64;
        let key_budget = ATTEMPTS_PER_KEY.min(attempts - rates.attempts);
        let key_end = rates.attempts + key_budget;
        while rates.attempts < key_end {
            let mu = ctx.message_digest(&msg_index.to_le_bytes());
            msg_index += 1;
            let rho_prime: [u8; CRH_BYTES] = ctx.mask_seed(&mu, None);
            for a in 0..ATTEMPTS_PER_MESSAGE.min(key_end - rates.attempts) {
                let inputs = ctx.attempt_inputs(&mu, &rho_prime, a as u16 * l);
                let probe = ctx.probe(&inputs);
                rates.attempts += 1;
                rates.z_good += probe.z_ok as u64;
                rates.r0_good += probe.r0_ok as u64;
                rates.both_good += (probe.z_ok && probe.r0_ok) as u64;
                rates.accepted +=
                    (probe.z_ok && probe.r0_ok && probe.ct0_ok && probe.hint_ok) as u64;
            }
        }
    }
    rates
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{DILITHIUM2, DILITHIUM3, DILITHIUM5};

    #[test]
    fn analytic_values() {
        let cases = [
            (&DILITHIUM2, 0.543591, 0.429801),
            (&DILITHIUM3, 0.619647, 0.315712),
            (&DILITHIUM5, 0.663515, 0.389636),
        ];
        for (p, z, r0) in cases {
            assert!((prob_z_good(p) - z).abs() < 1e-4, "{:?}", p.level);
            assert!((prob_r0_good(p) - r0).abs() < 1e-4, "{:?}", p.level);
        }
        assert!((expected_attempts(&DILITHIUM2) - 4.28).abs() < 0.05);
    }

    #[test]
    fn small_empirical_run() {
        let r = empirical_rates(Level::Two, 300, 1);
        assert_eq!(r.attempts, 300);
        assert!(r.both_good <= r.z_good.min(r.r0_good));
        assert!((r.z_rate() - prob_z_good(&DILITHIUM2)).abs() < 0.15);
    }
}
