//! Counting primes below `N` with a unitary phase oracle built from a nested
//! witness count, then comparing the estimate with the sieve and `N / ln N`.

use std::sync::Arc;

use serde::Serialize;

use crate::counting::{self, CountEstimate};
use crate::error::{QntError, Result};
use crate::mainloop::{self, ErrorBudget, LoopStatistics, PhaseOracle, SharedTable, WitnessTable};
use crate::ntcore;
use crate::statevec::{
    self, Direction, EffectiveDim, Op, PhasePredicate, QState, RegId, RegisterLayout,
    MAX_DIM_CEILING,
};

const K: RegId = RegId(0);
const MP: RegId = RegId(1);
const A: RegId = RegId(2);

/// `S~1 = U1^dagger S0 U1` on registers `(k: N, mP: P, a: N)`.
///
/// `U1` runs a witness count of `k` into `mP`: `F` on `mP`, `F_k` on the
/// leading `k` values of `a`, `G^mP` on `a` with the witness oracle of `k`,
/// and `F` on `mP` again. `S0` flips `mP = 0` on branches with `k >= 2`.
#[derive(Debug, Clone)]
pub struct STilde {
    layout: RegisterLayout,
    u1: Vec<Op>,
    flip: Op,
    good: Vec<bool>,
    table: SharedTable,
    p: usize,
}

impl STilde {
    pub fn new(n: usize, p: usize, table: WitnessTable) -> Result<Self> {
        if n < 2 {
            return Err(QntError::invalid(format!("N must be at least 2, got {n}")));
        }
        mainloop::check_precision("P", p)?;
        if table.max_k() + 1 < n {
            return Err(QntError::invalid(
                "witness table does not cover the k register",
            ));
        }
        let layout = RegisterLayout::new([("k", n), ("mP", p), ("a", n)])?;
        let table = Arc::new(table);
        let oracle = {
            let table = Arc::clone(&table);
            PhasePredicate::new(move |v| table.is_witness(v[K.index()], v[A.index()]))
        };
        let branch_dim = EffectiveDim::controlled(K, |k| k.max(1));
        let u1 = vec![
            Op::dft(MP, Direction::Forward),
            Op::Dft {
                target: A,
                dim: branch_dim.clone(),
                direction: Direction::Forward,
            },
            Op::controlled_grover(vec![MP], A, branch_dim, oracle),
            Op::dft(MP, Direction::Forward),
        ];
        let flip = Op::S0 {
            registers: vec![MP],
            gate: Some(PhasePredicate::new(|v| v[K.index()] >= 2)),
        };
        let good = (0..n).map(|k| table.passes(k)).collect();
        Ok(STilde {
            layout,
            u1,
            flip,
            good,
            table,
            p,
        })
    }

    /// The oracle for the strong witness predicate.
    pub fn strong(n: usize, p: usize) -> Result<Self> {
        Self::new(n, p, WitnessTable::strong(n.saturating_sub(1)))
    }

    pub fn table(&self) -> &WitnessTable {
        &self.table
    }

    pub fn precision(&self) -> usize {
        self.p
    }

    /// `G~ = U2 S~1`.
    pub fn apply_g_tilde(&self, state: &mut QState) -> Result<()> {
        mainloop::apply_iterate(self, state)
    }
}

impl PhaseOracle for STilde {
    fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    fn apply(&self, state: &mut QState) -> Result<()> {
        if state.layout() != &self.layout {
            return Err(QntError::invalid("state layout does not match (k, mP, a)"));
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
        let n = self.layout.dim(K);
        let sum: f64 = (2..n)
            .filter(|&k| !self.good[k])
            .map(|k| self.table.alpha(k, self.p).powi(2))
            .sum();
        4.0 * sum / n as f64
    }
}

/// `<E|E>` of the strong-witness oracle on the flat input.
pub fn s_tilde_error(n: usize, p: usize) -> Result<ErrorBudget> {
    let s = STilde::strong(n, p)?;
    Ok(ErrorBudget::residual_only(
        mainloop::oracle_residual(&s)?,
        s.analytic_error(),
        p,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct PntConfig {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub delta: f64,
    pub max_dim: usize,
}

impl PntConfig {
    pub fn new(n: usize, p: usize, q: usize) -> Self {
        PntConfig {
            n,
            p,
            q,
            repetitions: 1,
            seed: 0,
            delta: 0.0,
            max_dim: MAX_DIM_CEILING,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || !counting::is_power_of_two(self.n) {
            return Err(QntError::invalid(format!(
                "N must be a power of two >= 8, got {}",
                self.n
            )));
        }
        mainloop::check_precision("P", self.p)?;
        mainloop::check_precision("Q", self.q)?;
        if self.repetitions == 0 {
            return Err(QntError::invalid("repetitions must be at least 1"));
        }
        if !self.delta.is_finite() || self.delta < 0.0 {
            return Err(QntError::invalid(format!(
                "delta must be finite and >= 0, got {}",
                self.delta
            )));
        }
        let total = RegisterLayout::product([self.q, self.n, self.p, self.n]);
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

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckVerdict {
    Pass,
    Fail,
    AnsatzViolated,
}

/// An estimate of `pi(N)` set against the sieve, `N / ln N` and the bounds.
#[derive(Debug, Clone, Serialize)]
pub struct PntCheck {
    pub t_estimate: f64,
    pub t_estimate_rounded: i64,
    pub t_true: usize,
    pub n_over_ln_n: f64,
    /// `t_N - N / ln N`.
    pub asymptotic_slack: f64,
    /// `|t~ - t_N|`.
    pub delta_t_exp: f64,
    /// `pi N / Q (pi / Q + 2 sqrt(t_N / N))`.
    pub delta_t_bound: f64,
    /// `N (ln N)^(-delta - 1)`.
    pub delta_t_th: f64,
    pub within_bound: bool,
    pub f_q: f64,
    /// `1 < f_Q < Q/2 - 1`.
    pub ansatz_ok: bool,
    /// `ln Q / ln ln N`.
    pub beta_effective: f64,
    /// `delta + 1/2`.
    pub beta_required: f64,
    pub beta_ok: bool,
    pub verdict: CheckVerdict,
}

pub fn check_pnt(estimate: &CountEstimate, n: usize, delta: f64) -> Result<PntCheck> {
    let q = estimate.precision;
    let t_true = ntcore::sieve_pi(n as u64)?.0 as usize;
    let ln_n = (n as f64).ln();
    let f_q = counting::phase_fraction(t_true, n, q);
    let delta_t_exp = (estimate.t - t_true as f64).abs();
    let delta_t_bound = counting::error_bound(n, q, t_true as f64);
    let beta_effective = mainloop::log_log_exponent(q, n)?;
    let beta_required = delta + 0.5;
    let within_bound = delta_t_exp <= delta_t_bound;
    let ansatz_ok = f_q > 1.0 && f_q < q as f64 / 2.0 - 1.0;
    let beta_ok = beta_effective > beta_required;
    let verdict = if !ansatz_ok {
        CheckVerdict::AnsatzViolated
    } else if within_bound && beta_ok {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    Ok(PntCheck {
        t_estimate: estimate.t,
        t_estimate_rounded: estimate.rounded(),
        t_true,
        n_over_ln_n: n as f64 / ln_n,
        asymptotic_slack: t_true as f64 - n as f64 / ln_n,
        delta_t_exp,
        delta_t_bound,
        delta_t_th: n as f64 * ln_n.powf(-delta - 1.0),
        within_bound,
        f_q,
        ansatz_ok,
        beta_effective,
        beta_required,
        beta_ok,
        verdict,
    })
}

/// Everything about one run that does not depend on the measurement seed.
#[derive(Debug, Clone)]
pub struct PntSimulation {
    pub config: PntConfig,
    pub oracle_good: usize,
    pub budget: ErrorBudget,
    pub statistics: LoopStatistics,
}

#[derive(Debug, Clone, Serialize)]
pub struct PntReport {
    pub config: PntConfig,
    pub outcomes: Vec<usize>,
    pub estimate: CountEstimate,
    pub check: PntCheck,
    pub oracle_good: usize,
    pub budget: ErrorBudget,
    pub statistics: LoopStatistics,
    /// `ln P / ln ln N`.
    pub gamma_effective: f64,
    /// Modal mass `>= 8/pi^2 - w_err`.
    pub success_ok: bool,
    /// `w_err <= 4 sqrt(<E_Q|E_Q>)`.
    pub w_err_ok: bool,
}

impl PntSimulation {
    pub fn new(config: &PntConfig) -> Result<Self> {
        config.validate()?;
        Self::with_oracle(config, &STilde::strong(config.n, config.p)?)
    }

    /// Runs the main loop with a caller-supplied oracle; the loop statistics
    /// are taken against that oracle's own good set.
    pub fn with_oracle(config: &PntConfig, oracle: &STilde) -> Result<Self> {
        config.validate()?;
        if oracle.layout().dim(K) != config.n || oracle.precision() != config.p {
            return Err(QntError::invalid("oracle does not match the configuration"));
        }
        let oracle_good = mainloop::good_count(oracle.good());
        let state =
            mainloop::counting_state(oracle, config.q, config.max_dim.min(MAX_DIM_CEILING))?;
        let statistics = mainloop::loop_statistics(&state, config.n, oracle_good)?;
        drop(state);
        let mut budget = ErrorBudget::residual_only(
            mainloop::oracle_residual(oracle)?,
            oracle.analytic_error(),
            config.p,
        );
        budget.en_norm_sq = mainloop::iterate_errors(oracle, config.q)?;
        budget.w_err = Some((statistics.modal_mass - statistics.ideal_modal_mass).abs());
        budget.w_err_bound = Some(4.0 * budget.en_norm_sq[config.q].sqrt());
        Ok(PntSimulation {
            config: config.clone(),
            oracle_good,
            budget,
            statistics,
        })
    }

    /// Measurement stage with `repetitions` draws from stream `seed`.
    pub fn report(&self, seed: u64) -> Result<PntReport> {
        let c = &self.config;
        let estimates =
            mainloop::sample_estimates(&self.statistics.distribution, c.n, c.repetitions, seed)?;
        let estimate = counting::majority_estimate(&estimates)?;
        let w_err = self.budget.w_err.unwrap_or(0.0);
        Ok(PntReport {
            config: PntConfig { seed, ..c.clone() },
            outcomes: estimates.iter().map(|e| e.outcome).collect(),
            check: check_pnt(&estimate, c.n, c.delta)?,
            estimate,
            oracle_good: self.oracle_good,
            budget: self.budget.clone(),
            statistics: self.statistics.clone(),
            gamma_effective: mainloop::log_log_exponent(c.p, c.n)?,
            success_ok: self.statistics.modal_mass >= self.statistics.success_floor - w_err,
            w_err_ok: self.budget.w_err_bound.is_some_and(|b| w_err <= b),
        })
    }
}

pub fn run_pnt(config: &PntConfig) -> Result<PntReport> {
    PntSimulation::new(config)?.report(config.seed)
}
