//! Machinery shared by the prime-counting and prime-pair-counting pipelines:
//! tabulated witness oracles, residual error norms of an approximate phase
//! oracle, and the outer counting loop driven by a `Q`-dimensional ancilla.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::counting::{self, CountEstimate};
use crate::error::{QntError, Result};
use crate::ntcore;
use crate::statevec::{self, Direction, PhasePredicate, QState, RegId, RegisterLayout};

/// Witness predicate `W_k(a)` tabulated for `0 <= k <= max_k`, `0 <= a < k`.
#[derive(Debug, Clone)]
pub struct WitnessTable {
    rows: Vec<Vec<bool>>,
}

impl WitnessTable {
    pub fn from_fn(max_k: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        WitnessTable {
            rows: (0..=max_k)
                .map(|k| (0..k).map(|a| f(k, a)).collect())
                .collect(),
        }
    }

    /// The strong (Miller-Rabin) predicate; `a = 0` is never a witness.
    pub fn strong(max_k: usize) -> Self {
        Self::from_fn(max_k, |k, a| {
            ntcore::is_witness_extended(k as u64, a as u64)
        })
    }

    /// Every `k` looks prime.
    pub fn no_witnesses(max_k: usize) -> Self {
        Self::from_fn(max_k, |_, _| false)
    }

    /// Every `1 <= a < k` is a witness, so every `k >= 2` looks composite.
    pub fn all_witnesses(max_k: usize) -> Self {
        Self::from_fn(max_k, |_, a| a >= 1)
    }

    pub fn max_k(&self) -> usize {
        self.rows.len() - 1
    }

    #[inline]
    pub fn is_witness(&self, k: usize, a: usize) -> bool {
        self.rows
            .get(k)
            .and_then(|r| r.get(a))
            .copied()
            .unwrap_or(false)
    }

    pub fn count(&self, k: usize) -> usize {
        self.rows[k].iter().filter(|&&w| w).count()
    }

    /// `k >= 2` with no witnesses.
    pub fn passes(&self, k: usize) -> bool {
        k >= 2 && self.count(k) == 0
    }

    /// Zero-outcome amplitude of the witness count of `k` with precision `p`.
    pub fn alpha(&self, k: usize, p: usize) -> f64 {
        let d = k.max(1);
        counting::alpha(counting::phase_fraction(self.count(k), d, p), p)
    }
}

/// Numerically measured error norms of an approximate phase oracle and of the
/// counting loop built on it, next to the bounds they are checked against.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorBudget {
    /// `<E|E>`: squared residual of one oracle application on the flat input.
    pub e_norm_sq: f64,
    /// The same norm predicted from the per-branch zero amplitudes.
    pub e_norm_sq_analytic: f64,
    /// `4 (2 / (sqrt(3) P))^2`.
    pub e_bound: f64,
    pub e_within_bound: bool,
    /// `<E_n|E_n>` for `n = 0..=n_max`.
    pub en_norm_sq: Vec<f64>,
    /// `|W_{E_n}|`: exact loss (or gain) of modal-outcome mass against the
    /// error-free distribution.
    pub w_err: Option<f64>,
    /// `4 sqrt(<E_Q|E_Q>)`.
    pub w_err_bound: Option<f64>,
}

impl ErrorBudget {
    pub fn residual_only(e_norm_sq: f64, e_norm_sq_analytic: f64, p: usize) -> Self {
        let e_bound = residual_bound(p);
        ErrorBudget {
            e_norm_sq,
            e_norm_sq_analytic,
            e_bound,
            e_within_bound: e_norm_sq <= e_bound,
            en_norm_sq: Vec::new(),
            w_err: None,
            w_err_bound: None,
        }
    }
}

/// `4 (2 / (sqrt(3) P))^2`.
pub fn residual_bound(p: usize) -> f64 {
    4.0 * (2.0 / (3f64.sqrt() * p as f64)).powi(2)
}

/// An approximate phase oracle `O ~ I - 2 sum_good |k><k|` acting on a layout
/// whose first register `k` is the counted one and whose other registers are
/// ancillas that should come back to zero.
pub trait PhaseOracle {
    fn layout(&self) -> &RegisterLayout;

    fn apply(&self, state: &mut QState) -> Result<()>;

    /// Which values of the counted register should pick up a sign.
    fn good(&self) -> &[bool];

    /// `<E|E>` from the closed form `4/N sum alpha^2` over the flipped-but-bad
    /// branches.
    fn analytic_error(&self) -> f64;
}

const COUNTED: RegId = RegId(0);

pub fn good_count(good: &[bool]) -> usize {
    good.iter().filter(|&&g| g).count()
}

/// `sum_k |k> |0...0> / sqrt(N)`.
pub fn flat_input(layout: &RegisterLayout) -> Result<QState> {
    let mut s = QState::init_zero(layout.clone());
    s.apply_dft(COUNTED, layout.dim(COUNTED), Direction::Forward)?;
    Ok(s)
}

/// The ideal image of the flat input: good branches negated, ancillas zero.
pub fn ideal_flipped(layout: &RegisterLayout, good: &[bool]) -> Result<QState> {
    let n = layout.dim(COUNTED);
    let amp = 1.0 / (n as f64).sqrt();
    branch_state(layout, |k| if good[k] { -amp } else { amp })
}

/// `G^n` applied ideally to the flat input:
/// `sin((2n+1) theta)|G> + cos((2n+1) theta)|B>` with `sin^2 theta = t/N`.
pub fn ideal_iterate(layout: &RegisterLayout, good: &[bool], n_iter: usize) -> Result<QState> {
    let n = layout.dim(COUNTED);
    let t = good_count(good);
    let theta = (t as f64 / n as f64).sqrt().asin();
    let phase = (2 * n_iter + 1) as f64 * theta;
    let g = if t > 0 {
        phase.sin() / (t as f64).sqrt()
    } else {
        0.0
    };
    let b = if t < n {
        phase.cos() / ((n - t) as f64).sqrt()
    } else {
        0.0
    };
    branch_state(layout, |k| if good[k] { g } else { b })
}

fn branch_state(layout: &RegisterLayout, amp_of: impl Fn(usize) -> f64) -> Result<QState> {
    let stride = layout.stride(COUNTED);
    let mut amps = vec![Complex64::new(0.0, 0.0); layout.total_dim()];
    for k in 0..layout.dim(COUNTED) {
        amps[k * stride] = Complex64::new(amp_of(k), 0.0);
    }
    QState::from_amplitudes(layout.clone(), amps)
}

/// `U_2 = -F S0 F^dagger` on the counted register: inversion about the mean.
pub fn apply_outer_diffusion(state: &mut QState) -> Result<()> {
    let n = state.layout().dim(COUNTED);
    state.grover_step(COUNTED, n, &PhasePredicate::never())
}

/// The outer Grover iterate `U_2 O`.
pub fn apply_iterate<O: PhaseOracle + ?Sized>(oracle: &O, state: &mut QState) -> Result<()> {
    oracle.apply(state)?;
    apply_outer_diffusion(state)
}

/// `<E|E>` with `|E> = O|flat> - |Psi>`.
pub fn oracle_residual<O: PhaseOracle + ?Sized>(oracle: &O) -> Result<f64> {
    let mut s = flat_input(oracle.layout())?;
    oracle.apply(&mut s)?;
    s.distance_sqr(&ideal_flipped(oracle.layout(), oracle.good())?)
}

/// `<E_n|E_n>` for `n = 0..=n_max`, with `|E_n> = (U_2 O)^n|flat> - G^n|flat>`.
pub fn iterate_errors<O: PhaseOracle + ?Sized>(oracle: &O, n_max: usize) -> Result<Vec<f64>> {
    let mut s = flat_input(oracle.layout())?;
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            apply_iterate(oracle, &mut s)?;
        }
        out.push(s.distance_sqr(&ideal_iterate(oracle.layout(), oracle.good(), n)?)?);
    }
    Ok(out)
}

/// Name of the outer ancilla register.
pub const OUTER: &str = "q";

/// Pre-measurement state of the outer counting loop:
/// `F_Q` on `q` after `sum_m |m>_q (U_2 O)^m |flat> / sqrt(Q)`.
pub fn counting_state<O: PhaseOracle + ?Sized>(oracle: &O, q: usize, cap: usize) -> Result<QState> {
    let base = flat_input(oracle.layout())?;
    let mut state =
        QState::controlled_powers_from_flat(OUTER, q, &base, cap, |s| apply_iterate(oracle, s))?;
    state.apply_dft(RegId(0), q, Direction::Forward)?;
    Ok(state)
}

/// Exact outcome statistics of the outer loop against the error-free ideal.
#[derive(Debug, Clone, Serialize)]
pub struct LoopStatistics {
    /// Marginal distribution of the outer register.
    pub distribution: Vec<f64>,
    /// The same distribution for an exact phase oracle.
    pub ideal_distribution: Vec<f64>,
    /// `f_Q = Q theta_N / pi` from the true count.
    pub f_q: f64,
    pub modal_outcomes: Vec<usize>,
    pub modal_mass: f64,
    pub ideal_modal_mass: f64,
    /// `8 / pi^2`.
    pub success_floor: f64,
    /// `1 < f_Q < Q/2 - 1`.
    pub ansatz_ok: bool,
}

pub fn loop_statistics(state: &QState, domain: usize, truth: usize) -> Result<LoopStatistics> {
    let q = state.layout().dim(RegId(0));
    let distribution = state.marginal_probabilities(RegId(0));
    let ideal_distribution = counting::predict_distribution(domain, truth, q, 1)?;
    let f_q = counting::phase_fraction(truth, domain, q);
    let modal_outcomes = counting::modal_outcomes(f_q, q);
    let mass = |d: &[f64]| modal_outcomes.iter().map(|&l| d[l]).sum::<f64>();
    Ok(LoopStatistics {
        modal_mass: mass(&distribution),
        ideal_modal_mass: mass(&ideal_distribution),
        success_floor: 8.0 / (PI * PI),
        ansatz_ok: f_q > 1.0 && f_q < q as f64 / 2.0 - 1.0,
        distribution,
        ideal_distribution,
        f_q,
        modal_outcomes,
    })
}

/// One estimate per repetition; repetition `i` draws from stream `(seed, i)`.
pub fn sample_estimates(
    distribution: &[f64],
    domain: usize,
    repetitions: usize,
    seed: u64,
) -> Result<Vec<CountEstimate>> {
    let q = distribution.len();
    (0..repetitions)
        .map(|i| {
            let outcome =
                statevec::sample_from(distribution, &mut statevec::stream_rng(seed, i as u64));
            counting::estimate_from_outcome(outcome, q, domain)
        })
        .collect()
}

/// `ln(x) / ln(ln(N))`: the exponent `e` with `x = (ln N)^e`.
pub fn log_log_exponent(x: usize, n: usize) -> Result<f64> {
    let lnln = (n as f64).ln().ln();
    if lnln <= 0.0 {
        return Err(QntError::invalid(format!(
            "ln ln N must be positive, got N={n}"
        )));
    }
    Ok((x as f64).ln() / lnln)
}

/// Checks a precision parameter: a power of two, at least 2.
pub(crate) fn check_precision(name: &str, value: usize) -> Result<()> {
    if value < 2 || !counting::is_power_of_two(value) {
        return Err(QntError::invalid(format!(
            "{name} must be a power of two >= 2, got {value}"
        )));
    }
    Ok(())
}

/// Shared handle to a witness table, as captured by oracle predicates.
pub type SharedTable = Arc<WitnessTable>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_ntcore() {
        let t = WitnessTable::strong(40);
        for k in 2..=40 {
            assert_eq!(
                t.count(k) as u64,
                ntcore::count_witnesses(k as u64).unwrap()
            );
            assert_eq!(t.passes(k), ntcore::Sieve::new(41).is_prime(k));
        }
        assert!(!t.passes(0) && !t.passes(1));
        assert!(!t.is_witness(15, 0));
        assert!(!t.is_witness(99, 3));
        assert!(WitnessTable::no_witnesses(8).passes(8));
        assert_eq!(WitnessTable::all_witnesses(8).count(8), 7);
    }

    #[test]
    fn ideal_states_are_normalised() {
        let l = RegisterLayout::new([("k", 16), ("p", 4), ("a", 16)]).unwrap();
        let good: Vec<bool> = (0..16)
            .map(|k| ntcore::Sieve::new(16).is_prime(k))
            .collect();
        for n in 0..6 {
            assert!((ideal_iterate(&l, &good, n).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
        }
        let flat = flat_input(&l).unwrap();
        assert!(
            ideal_iterate(&l, &good, 0)
                .unwrap()
                .distance(&flat)
                .unwrap()
                < 1e-12
        );
        assert!((ideal_flipped(&l, &good).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_log_exponent_guards_small_n() {
        assert!(log_log_exponent(16, 2).is_err());
        let beta = log_log_exponent(16, 16).unwrap();
        assert!((beta - 16f64.ln() / 16f64.ln().ln()).abs() < 1e-15);
    }
}
