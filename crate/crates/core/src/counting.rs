//! Quantum counting: controlled Grover powers followed by a Fourier transform
//! on each ancilla, the exact analytic distribution of the measured ancillas,
//! and the estimator mapping an outcome back to a cardinality.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{QntError, Result};
use crate::statevec::{Direction, EffectiveDim, PhasePredicate, QState, RegId, RegisterLayout};

pub fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

/// `sin(pi x) / (P sin(pi x / P))`, with the limit value 1 wherever
/// `x` is a multiple of `P`.
pub fn sinc_ratio(x: f64, p: usize) -> f64 {
    let p = p as f64;
    let offset = x - p * (x / p).round();
    if offset.abs() < 1e-9 {
        return 1.0;
    }
    (PI * x).sin() / (p * (PI * x / p).sin())
}

/// `f = P theta / pi` with `sin(theta) = sqrt(t / n)`; lies in `[0, P/2]`.
pub fn phase_fraction(t: usize, n: usize, p: usize) -> f64 {
    p as f64 * (t as f64 / n as f64).sqrt().asin() / PI
}

/// Amplitude left on the all-zero outcome of one ancilla: `s(f)` at `l = 0`.
pub fn alpha(f: f64, p: usize) -> f64 {
    sinc_ratio(f, p)
}

/// The weights `s_-(l) = s(l - f)` and `s_+(l) = s(l + f)` that govern the
/// outcome distribution of one ancilla of dimension `P`.
///
/// The ancilla amplitudes also carry the phase `exp(+-i pi f (R + (1-R)/P))`,
/// but it multiplies the two branches of orthogonal subspaces and drops out of
/// every probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SincWeights {
    pub f: f64,
    pub p: usize,
}

impl SincWeights {
    pub fn new(f: f64, p: usize) -> Self {
        SincWeights { f, p }
    }

    pub fn s_minus(&self, l: usize) -> f64 {
        sinc_ratio(l as f64 - self.f, self.p)
    }

    pub fn s_plus(&self, l: usize) -> f64 {
        sinc_ratio(l as f64 + self.f, self.p)
    }
}

/// Exact distribution of the `R` measured ancillas after the COUNT transform
/// on a domain of size `n` containing `t` marked states.
///
/// Writing the domain state after `G^m` as `sin((2m+1)th)|B1> + cos((2m+1)th)|B2>`
/// and expanding the sines into exponentials, each ancilla tuple carries the
/// amplitudes `A_+ = prod s_+(l_i)` and `A_- = prod s_-(l_i)` (up to phases) on
/// `(-i|B1> + |B2>)/2` and `(i|B1> + |B2>)/2`. The cross terms cancel between
/// the two orthogonal components, leaving `(A_+^2 + A_-^2) / 2`.
///
/// The result is indexed row-major over `(l_1, ..., l_R)`.
pub fn predict_distribution(n: usize, t: usize, p: usize, r: usize) -> Result<Vec<f64>> {
    if n == 0 || t > n {
        return Err(QntError::invalid(format!(
            "need 0 <= t <= N with N >= 1, got t={t}, N={n}"
        )));
    }
    if p < 2 || r == 0 {
        return Err(QntError::invalid(format!(
            "need P >= 2 and R >= 1, got P={p}, R={r}"
        )));
    }
    let total = p
        .checked_pow(r as u32)
        .ok_or_else(|| QntError::invalid("P^R overflows"))?;
    let w = SincWeights::new(phase_fraction(t, n, p), p);
    let plus: Vec<f64> = (0..p).map(|l| w.s_plus(l)).collect();
    let minus: Vec<f64> = (0..p).map(|l| w.s_minus(l)).collect();
    Ok((0..total)
        .map(|mut idx| {
            let (mut a_plus, mut a_minus) = (1.0, 1.0);
            for _ in 0..r {
                let l = idx % p;
                idx /= p;
                a_plus *= plus[l];
                a_minus *= minus[l];
            }
            (a_plus * a_plus + a_minus * a_minus) / 2.0
        })
        .collect())
}

/// Parameters of one COUNT run: a domain of `domain_dim` states of which the
/// `marked` ones are counted, and `repetitions` ancillas of dimension
/// `ancilla_dim`.
#[derive(Debug, Clone)]
pub struct CountSetup {
    pub domain_dim: usize,
    pub ancilla_dim: usize,
    pub repetitions: usize,
    marked: Vec<bool>,
}

impl CountSetup {
    pub fn new(
        domain_dim: usize,
        ancilla_dim: usize,
        repetitions: usize,
        predicate: impl Fn(usize) -> bool,
    ) -> Result<Self> {
        if domain_dim < 2 {
            return Err(QntError::invalid(format!(
                "domain dimension must be at least 2, got {domain_dim}"
            )));
        }
        if ancilla_dim < 2 || !is_power_of_two(ancilla_dim) {
            return Err(QntError::invalid(format!(
                "ancilla dimension must be a power of two >= 2, got {ancilla_dim}"
            )));
        }
        if repetitions == 0 {
            return Err(QntError::invalid("at least one ancilla register is needed"));
        }
        Ok(CountSetup {
            domain_dim,
            ancilla_dim,
            repetitions,
            marked: (0..domain_dim).map(predicate).collect(),
        })
    }

    /// Number of marked domain states.
    pub fn marked_count(&self) -> usize {
        self.marked.iter().filter(|&&m| m).count()
    }

    /// Ancillas `m1..mR` (outermost) followed by the domain register `x`.
    pub fn layout(&self) -> Result<RegisterLayout> {
        RegisterLayout::new(
            (1..=self.repetitions)
                .map(|i| (format!("m{i}"), self.ancilla_dim))
                .chain(std::iter::once(("x".to_string(), self.domain_dim))),
        )
    }

    fn ancillas(&self) -> Vec<RegId> {
        (0..self.repetitions).map(RegId).collect()
    }

    fn domain(&self) -> RegId {
        RegId(self.repetitions)
    }

    /// Flat superposition on every register.
    pub fn prepare(&self) -> Result<QState> {
        let mut state = QState::init_zero(self.layout()?);
        for id in state.layout().ids().collect::<Vec<_>>() {
            let d = state.layout().dim(id);
            state.apply_dft(id, d, Direction::Forward)?;
        }
        Ok(state)
    }

    /// Controlled `G^(m_1 + ... + m_R)` on the domain, then `F` on each ancilla.
    pub fn count_transform(&self, state: &mut QState) -> Result<()> {
        let predicate = PhasePredicate::on_register(self.domain(), self.marked.clone());
        state.apply_controlled_grover_power(
            &self.ancillas(),
            self.domain(),
            &EffectiveDim::Full,
            &predicate,
        )?;
        for m in self.ancillas() {
            state.apply_dft(m, self.ancilla_dim, Direction::Forward)?;
        }
        Ok(())
    }

    pub fn run(&self) -> Result<QState> {
        let mut state = self.prepare()?;
        self.count_transform(&mut state)?;
        Ok(state)
    }

    /// Joint distribution of the ancillas, row-major over `(l_1, ..., l_R)`.
    pub fn ancilla_distribution(&self, state: &QState) -> Vec<f64> {
        state
            .amplitudes()
            .chunks(self.domain_dim)
            .map(|block| block.iter().map(|a| a.norm_sqr()).sum())
            .collect()
    }
}

/// Count estimate inferred from one measured ancilla outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountEstimate {
    pub outcome: usize,
    pub precision: usize,
    pub domain: usize,
    /// `min(l, P - l)`.
    pub f: f64,
    pub theta: f64,
    /// `N sin^2(theta)`.
    pub t: f64,
    /// `pi N / P (pi / P + 2 sqrt(t / N))` evaluated at the estimate.
    pub error_bound: f64,
}

impl CountEstimate {
    pub fn rounded(&self) -> i64 {
        self.t.round() as i64
    }
}

/// `pi N / P (pi / P + 2 sqrt(t / N))`.
pub fn error_bound(n: usize, p: usize, t: f64) -> f64 {
    let (n, p) = (n as f64, p as f64);
    PI * n / p * (PI / p + 2.0 * (t / n).max(0.0).sqrt())
}

pub fn estimate_from_outcome(outcome: usize, p: usize, n: usize) -> Result<CountEstimate> {
    if outcome >= p {
        return Err(QntError::invalid(format!(
            "outcome {outcome} out of range for P={p}"
        )));
    }
    let f = outcome.min(p - outcome) as f64;
    let theta = PI * f / p as f64;
    let t = n as f64 * theta.sin().powi(2);
    Ok(CountEstimate {
        outcome,
        precision: p,
        domain: n,
        f,
        theta,
        t,
        error_bound: error_bound(n, p, t),
    })
}

/// Most frequent rounded estimate; ties go to the smaller value. Returns the
/// member closest to the winning value.
pub fn majority_estimate(estimates: &[CountEstimate]) -> Result<CountEstimate> {
    if estimates.is_empty() {
        return Err(QntError::invalid("majority of an empty set of estimates"));
    }
    let mut votes: Vec<(i64, usize)> = Vec::new();
    for e in estimates {
        match votes.iter_mut().find(|(v, _)| *v == e.rounded()) {
            Some((_, n)) => *n += 1,
            None => votes.push((e.rounded(), 1)),
        }
    }
    let winner = votes
        .iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|&(v, _)| v)
        .expect("non-empty");
    Ok(*estimates
        .iter()
        .min_by(|a, b| {
            (a.t - winner as f64)
                .abs()
                .total_cmp(&(b.t - winner as f64).abs())
        })
        .expect("non-empty"))
}

/// `{floor f, ceil f, P - floor f, P - ceil f}` reduced mod `P`, deduplicated.
pub fn modal_outcomes(f: f64, p: usize) -> Vec<usize> {
    let (lo, hi) = (f.floor() as usize, f.ceil() as usize);
    let mut out: Vec<usize> = [lo, hi, p - lo, p - hi].iter().map(|&l| l % p).collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn simulate(n: usize, t: usize, p: usize, r: usize) -> Vec<f64> {
        let setup = CountSetup::new(n, p, r, |x| x < t).unwrap();
        setup.ancilla_distribution(&setup.run().unwrap())
    }

    #[test]
    fn zero_marked_returns_ancillas_to_zero() {
        for r in 1..=2 {
            let dist = simulate(7, 0, 8, r);
            assert_abs_diff_eq!(dist[0], 1.0, epsilon = 1e-12);
            assert_eq!(predict_distribution(7, 0, 8, r).unwrap()[0], 1.0);
        }
    }

    #[test]
    fn integral_phase_splits_evenly() {
        // N = 4, t = 2: theta = pi/4, f = 2 for P = 8.
        let dist = simulate(4, 2, 8, 1);
        for (l, p) in dist.iter().enumerate() {
            let expect = if l == 2 || l == 6 { 0.5 } else { 0.0 };
            assert_abs_diff_eq!(*p, expect, epsilon = 1e-12);
        }
        let predicted = predict_distribution(4, 2, 8, 1).unwrap();
        assert_abs_diff_eq!(predicted[2], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(predicted[6], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn simulation_matches_prediction() {
        let dist = simulate(16, 4, 16, 1);
        let predicted = predict_distribution(16, 4, 16, 1).unwrap();
        for (a, b) in dist.iter().zip(&predicted) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
        for n in [2, 5, 9, 13] {
            for t in 0..=n {
                for p in [4, 8] {
                    for r in 1..=2 {
                        let sim = simulate(n, t, p, r);
                        let predicted = predict_distribution(n, t, p, r).unwrap();
                        let worst = sim
                            .iter()
                            .zip(&predicted)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max);
                        assert!(worst < 1e-8, "N={n} t={t} P={p} R={r}: {worst}");
                    }
                }
            }
        }
    }

    #[test]
    fn sinc_limits() {
        assert_eq!(sinc_ratio(0.0, 8), 1.0);
        assert_eq!(sinc_ratio(8.0, 8), 1.0);
        assert_abs_diff_eq!(sinc_ratio(3.0, 8), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sinc_ratio(1e-7, 8), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn estimator_examples() {
        let e = estimate_from_outcome(0, 16, 13).unwrap();
        assert_eq!(e.t, 0.0);
        let e = estimate_from_outcome(2, 8, 4).unwrap();
        assert_abs_diff_eq!(e.theta, PI / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.t, 2.0, epsilon = 1e-12);
        let mirrored = estimate_from_outcome(6, 8, 4).unwrap();
        assert_eq!((mirrored.f, mirrored.t), (e.f, e.t));
        assert!(estimate_from_outcome(8, 8, 4).is_err());
    }

    #[test]
    fn estimator_is_exact_for_integral_phase() {
        // t = N sin^2(pi f / P) with integral f and the modal outcome l = f.
        for (n, t, p) in [(4, 2, 8), (4, 2, 16), (8, 4, 4), (16, 8, 8)] {
            let f = phase_fraction(t, n, p);
            if (f - f.round()).abs() > 1e-12 {
                continue;
            }
            let e = estimate_from_outcome(f.round() as usize, p, n).unwrap();
            assert_abs_diff_eq!(e.t, t as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn majority_examples() {
        let at = |t: f64| CountEstimate {
            outcome: 0,
            precision: 8,
            domain: 8,
            f: 0.0,
            theta: 0.0,
            t,
            error_bound: 0.0,
        };
        assert_eq!(majority_estimate(&[at(2.2), at(2.2)]).unwrap().t, 2.2);
        assert_eq!(
            majority_estimate(&[at(2.0), at(2.1), at(3.0)]).unwrap().t,
            2.0
        );
        assert_eq!(majority_estimate(&[at(3.0), at(2.0)]).unwrap().t, 2.0);
        assert!(majority_estimate(&[]).is_err());
    }

    #[test]
    fn modal_outcome_sets() {
        assert_eq!(modal_outcomes(3.36, 16), vec![3, 4, 12, 13]);
        assert_eq!(modal_outcomes(2.0, 8), vec![2, 6]);
        assert_eq!(modal_outcomes(0.0, 8), vec![0]);
    }

    #[test]
    fn setup_validation() {
        assert!(CountSetup::new(1, 8, 1, |_| false).is_err());
        assert!(CountSetup::new(4, 6, 1, |_| false).is_err());
        assert!(CountSetup::new(4, 8, 0, |_| false).is_err());
        assert!(predict_distribution(4, 5, 8, 1).is_err());
    }

    proptest! {
        #[test]
        fn distribution_is_complete(n in 1usize..64, t_frac in 0.0f64..=1.0, logp in 1u32..7, r in 1usize..=3) {
            let t = (t_frac * n as f64).round() as usize;
            let total: f64 = predict_distribution(n, t, 1 << logp, r).unwrap().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
        }

        #[test]
        fn modal_outcomes_concentrate(n in 2usize..200, t_frac in 0.0f64..=1.0, logp in 2u32..8) {
            let p = 1usize << logp;
            let t = (t_frac * n as f64).round() as usize;
            let f = phase_fraction(t, n, p);
            prop_assume!(f > 1.0 && f < p as f64 / 2.0 - 1.0);
            let dist = predict_distribution(n, t, p, 1).unwrap();
            let mass: f64 = modal_outcomes(f, p).iter().map(|&l| dist[l]).sum();
            prop_assert!(mass >= 8.0 / (PI * PI), "mass {mass} at f={f}");
        }
    }
}
