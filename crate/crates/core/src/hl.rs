//! Counting ordered prime pairs `(k, 2N - k)` with a phase oracle that runs
//! two nested witness counts, one per member of the pair.

use std::sync::Arc;

use serde::Serialize;

use crate::counting::{self, CountEstimate};
use crate::error::{QntError, Result};
use crate::mainloop::{self, ErrorBudget, LoopStatistics, PhaseOracle, SharedTable, WitnessTable};
use crate::ntcore;
use crate::pnt::CheckVerdict;
use crate::statevec::{
    self, Direction, EffectiveDim, Op, PhasePredicate, QState, RegId, RegisterLayout,
    MAX_DIM_CEILING,
};

const K: RegId = RegId(0);
const MP1: RegId = RegId(1);
const MP2: RegId = RegId(2);
const A1: RegId = RegId(3);
const A2: RegId = RegId(4);

/// `S'1` on registers `(k: 2N, mP1: P, mP2: P, a1: 2N, a2: 2N)`: witness
/// counts of `k` into `mP1` and of `2N - k` into `mP2`, a flip where both
/// counts read zero (for `k >= 2` and `2N - k >= 2`), and the counts undone.
#[derive(Debug, Clone)]
pub struct SPrime {
    layout: RegisterLayout,
    u1: Vec<Op>,
    flip: Op,
    good: Vec<bool>,
    table: SharedTable,
    p: usize,
}

impl SPrime {
    pub fn new(two_n: usize, p: usize, table: WitnessTable) -> Result<Self> {
        if two_n < 4 || !two_n.is_multiple_of(2) {
            return Err(QntError::invalid(format!(
                "2N must be even and at least 4, got {two_n}"
            )));
        }
        mainloop::check_precision("P", p)?;
        if table.max_k() < two_n {
            return Err(QntError::invalid("witness table does not cover 2N"));
        }
        let layout = RegisterLayout::new([
            ("k", two_n),
            ("mP1", p),
            ("mP2", p),
            ("a1", two_n),
            ("a2", two_n),
        ])?;
        let table = Arc::new(table);
        let first = {
            let table = Arc::clone(&table);
            PhasePredicate::new(move |v| table.is_witness(v[K.index()], v[A1.index()]))
        };
        let second = {
            let table = Arc::clone(&table);
            PhasePredicate::new(move |v| table.is_witness(two_n - v[K.index()], v[A2.index()]))
        };
        let dim1 = EffectiveDim::controlled(K, |k| k.max(1));
        let dim2 = EffectiveDim::controlled(K, move |k| (two_n - k).max(1));
        let u1 = vec![
            Op::dft(MP1, Direction::Forward),
            Op::dft(MP2, Direction::Forward),
            Op::Dft {
                target: A1,
                dim: dim1.clone(),
                direction: Direction::Forward,
            },
            Op::Dft {
                target: A2,
                dim: dim2.clone(),
                direction: Direction::Forward,
            },
            Op::controlled_grover(vec![MP1], A1, dim1, first),
            Op::controlled_grover(vec![MP2], A2, dim2, second),
            Op::dft(MP1, Direction::Forward),
            Op::dft(MP2, Direction::Forward),
        ];
        let flip = Op::S0 {
            registers: vec![MP1, MP2],
            gate: Some(PhasePredicate::new(move |v| {
                v[K.index()] >= 2 && two_n - v[K.index()] >= 2
            })),
        };
        let good = (0..two_n)
            .map(|k| table.passes(k) && table.passes(two_n - k))
            .collect();
        Ok(SPrime {
            layout,
            u1,
            flip,
            good,
            table,
            p,
        })
    }

    pub fn strong(two_n: usize, p: usize) -> Result<Self> {
        Self::new(two_n, p, WitnessTable::strong(two_n))
    }

    pub fn table(&self) -> &WitnessTable {
        &self.table
    }

    pub fn precision(&self) -> usize {
        self.p
    }

    pub fn two_n(&self) -> usize {
        self.layout.dim(K)
    }
}

impl PhaseOracle for SPrime {
    fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    fn apply(&self, state: &mut QState) -> Result<()> {
        if state.layout() != &self.layout {
            return Err(QntError::invalid(
                "state layout does not match (k, mP1, mP2, a1, a2)",
            ));
        }
        for op in &self.u1 {
            op.apply(state)?;
        }
        self.flip.apply(state)?;
        statevec::run_adjoint(state, &self.u1)
    }

    fn good(&self) -> &[bool] {
        &self.good
    }

    fn analytic_error(&self) -> f64 {
        let two_n = self.two_n();
        let sum: f64 = (2..=two_n - 2)
            .filter(|&k| !self.good[k])
            .map(|k| (self.table.alpha(k, self.p) * self.table.alpha(two_n - k, self.p)).powi(2))
            .sum();
        4.0 * sum / two_n as f64
    }
}

/// `<E'|E'>` of the strong-witness pair oracle on the flat input.
pub fn s_prime_error(two_n: usize, p: usize) -> Result<ErrorBudget> {
    let s = SPrime::strong(two_n, p)?;
    Ok(ErrorBudget::residual_only(
        mainloop::oracle_residual(&s)?,
        s.analytic_error(),
        p,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct HlConfig {
    pub two_n: usize,
    pub p: usize,
    pub q: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub nu: f64,
    pub mu: f64,
    pub max_dim: usize,
}

impl HlConfig {
    pub fn new(two_n: usize, p: usize, q: usize) -> Self {
        HlConfig {
            two_n,
            p,
            q,
            repetitions: 1,
            seed: 0,
            nu: 0.1,
            mu: 2.0,
            max_dim: MAX_DIM_CEILING,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.two_n < 8 || !self.two_n.is_multiple_of(2) {
            return Err(QntError::invalid(format!(
                "2N must be even and at least 8, got {}",
                self.two_n
            )));
        }
        mainloop::check_precision("P", self.p)?;
        mainloop::check_precision("Q", self.q)?;
        if self.repetitions == 0 {
            return Err(QntError::invalid("repetitions must be at least 1"));
        }
        if !self.nu.is_finite() || self.nu <= 0.0 {
            return Err(QntError::invalid(format!(
                "nu must be finite and > 0, got {}",
                self.nu
            )));
        }
        if !self.mu.is_finite() || self.mu <= 0.0 {
            return Err(QntError::invalid(format!(
                "mu must be finite and > 0, got {}",
                self.mu
            )));
        }
        let d = self.two_n;
        let total = RegisterLayout::product([self.q, d, self.p, self.p, d, d]);
        let cap = self.max_dim.min(MAX_DIM_CEILING);
        if total > cap as u128 {
            return Err(QntError::DimensionCap {
                requested: total,
                cap,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HlReport {
    pub config: HlConfig,
    pub outcomes: Vec<usize>,
    pub estimate: CountEstimate,
    pub r2_estimate_rounded: i64,
    /// Ordered prime pairs from the sieve.
    pub r2_true: usize,
    /// `|r~2 - r2|`.
    pub delta_r_exp: f64,
    /// `pi 2N / Q (pi / Q + 2 sqrt(r2 / 2N))`.
    pub delta_r_bound: f64,
    /// `N (ln N)^(-mu - nu)`.
    pub delta_r_th: f64,
    pub within_bound: bool,
    /// `r~2 (ln N)^mu / N`.
    pub conjecture_ratio_estimate: f64,
    /// `r2 (ln N)^mu / N`.
    pub conjecture_ratio_true: f64,
    /// `ln Q / ln ln N`.
    pub rho_effective: f64,
    /// `ln P / ln ln N`.
    pub sigma_effective: f64,
    /// `rho > mu/2 + nu`.
    pub rho_ok: bool,
    /// `sigma > rho`.
    pub sigma_ok: bool,
    pub ansatz_ok: bool,
    pub verdict: CheckVerdict,
    pub budget: ErrorBudget,
    pub statistics: LoopStatistics,
    pub success_ok: bool,
    pub w_err_ok: bool,
}

/// Seed-independent part of a pair-counting run.
#[derive(Debug, Clone)]
pub struct HlSimulation {
    pub config: HlConfig,
    pub r2_true: usize,
    pub budget: ErrorBudget,
    pub statistics: LoopStatistics,
}

impl HlSimulation {
    pub fn new(config: &HlConfig) -> Result<Self> {
        config.validate()?;
        let oracle = SPrime::strong(config.two_n, config.p)?;
        let r2_true = ntcore::r2_pairs(config.two_n as u64)? as usize;
        if r2_true != mainloop::good_count(oracle.good()) {
            return Err(QntError::invalid(
                "oracle good set disagrees with the sieve",
            ));
        }
        let state =
            mainloop::counting_state(&oracle, config.q, config.max_dim.min(MAX_DIM_CEILING))?;
        let statistics = mainloop::loop_statistics(&state, config.two_n, r2_true)?;
        drop(state);
        let mut budget = ErrorBudget::residual_only(
            mainloop::oracle_residual(&oracle)?,
            oracle.analytic_error(),
            config.p,
        );
        budget.en_norm_sq = mainloop::iterate_errors(&oracle, config.q)?;
        budget.w_err = Some((statistics.modal_mass - statistics.ideal_modal_mass).abs());
        budget.w_err_bound = Some(4.0 * budget.en_norm_sq[config.q].sqrt());
        Ok(HlSimulation {
            config: config.clone(),
            r2_true,
            budget,
            statistics,
        })
    }

    pub fn report(&self, seed: u64) -> Result<HlReport> {
        let c = &self.config;
        let estimates = mainloop::sample_estimates(
            &self.statistics.distribution,
            c.two_n,
            c.repetitions,
            seed,
        )?;
        let estimate = counting::majority_estimate(&estimates)?;
        let n = c.two_n / 2;
        let ln_n = (n as f64).ln();
        let delta_r_exp = (estimate.t - self.r2_true as f64).abs();
        let delta_r_bound = counting::error_bound(c.two_n, c.q, self.r2_true as f64);
        let rho_effective = mainloop::log_log_exponent(c.q, n)?;
        let sigma_effective = mainloop::log_log_exponent(c.p, n)?;
        let within_bound = delta_r_exp <= delta_r_bound;
        let rho_ok = rho_effective > c.mu / 2.0 + c.nu;
        let sigma_ok = sigma_effective > rho_effective;
        let ansatz_ok = self.statistics.ansatz_ok;
        let verdict = if !ansatz_ok {
            CheckVerdict::AnsatzViolated
        } else if within_bound && rho_ok {
            CheckVerdict::Pass
        } else {
            CheckVerdict::Fail
        };
        let w_err = self.budget.w_err.unwrap_or(0.0);
        Ok(HlReport {
            config: HlConfig { seed, ..c.clone() },
            outcomes: estimates.iter().map(|e| e.outcome).collect(),
            r2_estimate_rounded: estimate.rounded(),
            r2_true: self.r2_true,
            delta_r_exp,
            delta_r_bound,
            delta_r_th: n as f64 * ln_n.powf(-c.mu - c.nu),
            within_bound,
            conjecture_ratio_estimate: estimate.t * ln_n.powf(c.mu) / n as f64,
            conjecture_ratio_true: self.r2_true as f64 * ln_n.powf(c.mu) / n as f64,
            rho_effective,
            sigma_effective,
            rho_ok,
            sigma_ok,
            ansatz_ok,
            verdict,
            estimate,
            budget: self.budget.clone(),
            statistics: self.statistics.clone(),
            success_ok: self.statistics.modal_mass >= self.statistics.success_floor - w_err,
            w_err_ok: self.budget.w_err_bound.is_some_and(|b| w_err <= b),
        })
    }
}

pub fn run_hl(config: &HlConfig) -> Result<HlReport> {
    HlSimulation::new(config)?.report(config.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn diagonal(s: &SPrime, k: usize) -> f64 {
        let mut st = QState::basis(s.layout().clone(), &[k, 0, 0, 0, 0]).unwrap();
        s.apply(&mut st).unwrap();
        st.amplitude(&[k, 0, 0, 0, 0]).re
    }

    #[test]
    fn good_pairs_flip_exactly() {
        let s = SPrime::strong(20, 8).unwrap();
        assert_abs_diff_eq!(diagonal(&s, 3), -1.0, epsilon = 1e-10);
        for k in [7, 13, 17] {
            assert_abs_diff_eq!(diagonal(&s, k), -1.0, epsilon = 1e-10);
        }
        assert_eq!(mainloop::good_count(s.good()), 4);
        for k in [0, 1, 19] {
            assert_abs_diff_eq!(diagonal(&s, k), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bad_branch_deviation() {
        let s = SPrime::strong(20, 8).unwrap();
        let a = s.table().alpha(4, 8) * s.table().alpha(16, 8);
        assert_abs_diff_eq!(1.0 - diagonal(&s, 4), 2.0 * a * a, epsilon = 1e-10);
    }

    #[test]
    fn residual_matches_closed_form() {
        let b = s_prime_error(16, 8).unwrap();
        assert_abs_diff_eq!(b.e_norm_sq, b.e_norm_sq_analytic, epsilon = 1e-10);
        assert!(b.e_within_bound);
        let all_good = SPrime::new(16, 8, WitnessTable::no_witnesses(16)).unwrap();
        assert!(mainloop::oracle_residual(&all_good).unwrap() < 1e-20);
    }

    #[test]
    fn config_validation() {
        assert!(HlConfig::new(15, 8, 16).validate().is_err());
        assert!(HlConfig::new(6, 8, 16).validate().is_err());
        assert!(HlConfig {
            nu: 0.0,
            ..HlConfig::new(16, 8, 16)
        }
        .validate()
        .is_err());
        assert!(HlConfig::new(20, 16, 16)
            .validate()
            .unwrap_err()
            .is_capacity());
        assert!(HlConfig::new(20, 8, 16).validate().is_ok());
    }
}
