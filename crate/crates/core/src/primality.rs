//! R-fold quantum counting over the witness oracle of a fixed `k`.
//!
//! A prime `k` has no witnesses, so every ancilla returns to `|0>` with
//! certainty; a composite `k` leaves the all-zero tuple with probability
//! `alpha_k^(2R)`.

use serde::Serialize;

use crate::counting::{self, CountSetup};
use crate::error::{QntError, Result};
use crate::ntcore;
use crate::statevec::{stream_rng, RegId, MAX_DIM_CEILING};

#[derive(Debug, Clone, Serialize)]
pub struct PrimalityConfig {
    pub k: usize,
    pub p: usize,
    pub r: usize,
    pub seed: u64,
    pub max_dim: usize,
}

impl PrimalityConfig {
    pub fn new(k: usize, p: usize, r: usize, seed: u64) -> Self {
        PrimalityConfig {
            k,
            p,
            r,
            seed,
            max_dim: MAX_DIM_CEILING,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(QntError::invalid(format!(
                "k must be at least 2, got {}",
                self.k
            )));
        }
        if self.p < 4 || !counting::is_power_of_two(self.p) {
            return Err(QntError::invalid(format!(
                "P must be a power of two >= 4, got {}",
                self.p
            )));
        }
        if self.r == 0 {
            return Err(QntError::invalid("R must be at least 1"));
        }
        let dims: Vec<usize> = std::iter::repeat_n(self.p, self.r)
            .chain([self.k])
            .collect();
        let total = crate::statevec::RegisterLayout::product(dims);
        let cap = self.max_dim.min(MAX_DIM_CEILING);
        if total > cap as u128 {
            return Err(QntError::DimensionCap {
                requested: total,
                cap,
            });
        }
        Ok(())
    }

    fn setup(&self) -> Result<CountSetup> {
        self.validate()?;
        let k = self.k as u64;
        CountSetup::new(self.k, self.p, self.r, |a| {
            ntcore::is_witness_extended(k, a as u64)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CompositeCertain,
    ProbablyPrime,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrimalityOutcome {
    pub verdict: Verdict,
    pub outcomes: Vec<usize>,
    /// `(2 / (sqrt(3) P))^(2R)`.
    pub error_probability_bound: f64,
    /// Exact probability of the all-zero tuple before measurement.
    pub zero_probability: f64,
    /// Witness count of `k` over `1 <= a < k`.
    pub witnesses: usize,
    /// `f_k = P theta_k / pi`.
    pub f: f64,
}

/// `(2 / (sqrt(3) P))^(2R)`.
pub fn error_probability_bound(p: usize, r: usize) -> f64 {
    (2.0 / (3f64.sqrt() * p as f64)).powi(2 * r as i32)
}

/// Closed-form probability of the all-zero ancilla tuple: `alpha_k^(2R)`.
pub fn analytic_zero_probability(k: usize, p: usize, r: usize) -> Result<f64> {
    let t = ntcore::count_witnesses(k as u64)? as usize;
    let alpha = counting::alpha(counting::phase_fraction(t, k, p), p);
    Ok(alpha.powi(2 * r as i32))
}

/// Simulated probability of the all-zero ancilla tuple.
pub fn zero_probability(k: usize, p: usize, r: usize) -> Result<f64> {
    let setup = PrimalityConfig::new(k, p, r, 0).setup()?;
    let state = setup.run()?;
    Ok(setup.ancilla_distribution(&state)[0])
}

pub fn run_primality(config: &PrimalityConfig) -> Result<PrimalityOutcome> {
    let setup = config.setup()?;
    let mut state = setup.run()?;
    let zero_probability = setup.ancilla_distribution(&state)[0];
    let mut rng = stream_rng(config.seed, 0);
    let outcomes = (0..config.r)
        .map(|i| state.measure_with(RegId(i), &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let witnesses = setup.marked_count();
    let verdict = if outcomes.iter().all(|&l| l == 0) {
        Verdict::ProbablyPrime
    } else {
        Verdict::CompositeCertain
    };
    Ok(PrimalityOutcome {
        verdict,
        outcomes,
        error_probability_bound: error_probability_bound(config.p, config.r),
        zero_probability,
        witnesses,
        f: counting::phase_fraction(witnesses, config.k, config.p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn prime_is_certain() {
        for p in [4, 8, 16] {
            for r in [1, 2] {
                assert_abs_diff_eq!(zero_probability(7, p, r).unwrap(), 1.0, epsilon = 1e-12);
                let out = run_primality(&PrimalityConfig::new(7, p, r, 3)).unwrap();
                assert_eq!(out.verdict, Verdict::ProbablyPrime);
                assert_eq!(out.witnesses, 0);
            }
        }
    }

    #[test]
    fn composite_zero_probability_matches_alpha() {
        for (k, t) in [(9, 6), (15, 12)] {
            assert_eq!(ntcore::count_witnesses(k).unwrap(), t);
            let theta = (t as f64 / k as f64).sqrt().asin();
            let f = 8.0 * theta / std::f64::consts::PI;
            let alpha =
                (std::f64::consts::PI * f).sin() / (8.0 * (std::f64::consts::PI * f / 8.0).sin());
            for r in [1, 2] {
                let sim = zero_probability(k as usize, 8, r).unwrap();
                assert_abs_diff_eq!(sim, alpha.powi(2 * r as i32), epsilon = 1e-10);
            }
        }
        assert!(zero_probability(15, 8, 1).unwrap() <= error_probability_bound(8, 1));
    }

    #[test]
    fn bound_formula() {
        assert_abs_diff_eq!(
            error_probability_bound(8, 2),
            (2.0 / (3f64.sqrt() * 8.0)).powi(4),
            epsilon = 1e-18
        );
        assert_abs_diff_eq!(error_probability_bound(8, 1), 0.0208333, epsilon = 1e-6);
    }

    #[test]
    fn config_errors() {
        assert!(PrimalityConfig::new(1, 8, 1, 0).validate().is_err());
        assert!(PrimalityConfig::new(9, 6, 1, 0).validate().is_err());
        assert!(PrimalityConfig::new(9, 2, 1, 0).validate().is_err());
        assert!(PrimalityConfig::new(9, 8, 0, 0).validate().is_err());
        let err = PrimalityConfig::new(9, 16, 7, 0).validate().unwrap_err();
        assert!(err.is_capacity());
    }

    #[test]
    fn deterministic_per_seed() {
        let c = PrimalityConfig::new(15, 8, 2, 42);
        assert_eq!(
            run_primality(&c).unwrap().outcomes,
            run_primality(&c).unwrap().outcomes
        );
    }
}
