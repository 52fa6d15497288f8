use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::{stream_rng, Direction, EffectiveDim, PhasePredicate, RegId, Register, RegisterLayout};
use crate::error::{QntError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Complex amplitudes over a [`RegisterLayout`].
///
/// Public operations are unitary (or renormalising, for measurement), so a
/// state built from a normalised vector stays normalised.
#[derive(Debug, Clone, PartialEq)]
pub struct QState {
    layout: RegisterLayout,
    amps: Vec<Complex64>,
}

/// JSON-friendly snapshot of the significant amplitudes of a state.
#[derive(Debug, Clone, Serialize)]
pub struct StateDump {
    pub layout: Vec<Register>,
    pub threshold: f64,
    /// `(index, re, im)` for every amplitude with `|amp|^2 > threshold`.
    pub amplitudes: Vec<(usize, f64, f64)>,
}

impl QState {
    /// `|0, 0, ..., 0>`.
    pub fn init_zero(layout: RegisterLayout) -> Self {
        let mut amps = vec![ZERO; layout.total_dim()];
        amps[0] = ONE;
        QState { layout, amps }
    }

    pub fn basis(layout: RegisterLayout, values: &[usize]) -> Result<Self> {
        if values.len() != layout.len()
            || values
                .iter()
                .zip(layout.registers())
                .any(|(v, r)| *v >= r.dim)
        {
            return Err(QntError::invalid(format!(
                "basis values {values:?} do not fit the layout"
            )));
        }
        let mut amps = vec![ZERO; layout.total_dim()];
        amps[layout.encode(values)] = ONE;
        Ok(QState { layout, amps })
    }

    /// Wraps raw amplitudes. The caller is responsible for normalisation.
    pub fn from_amplitudes(layout: RegisterLayout, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != layout.total_dim() {
            return Err(QntError::invalid(format!(
                "{} amplitudes for a layout of dimension {}",
                amps.len(),
                layout.total_dim()
            )));
        }
        Ok(QState { layout, amps })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn amplitude(&self, values: &[usize]) -> Complex64 {
        self.amps[self.layout.encode(values)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_same_layout(&self, other: &QState) -> Result<()> {
        if self.layout != other.layout {
            return Err(QntError::invalid("states have different layouts"));
        }
        Ok(())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QState) -> Result<Complex64> {
        self.check_same_layout(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Squared Euclidean distance `||self - other||^2`.
    pub fn distance_sqr(&self, other: &QState) -> Result<f64> {
        self.check_same_layout(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum())
    }

    pub fn distance(&self, other: &QState) -> Result<f64> {
        self.distance_sqr(other).map(f64::sqrt)
    }

    // ---- Fourier transforms ---------------------------------------------

    /// `F_d` on basis values `[0, d)` of `target`, identity above.
    pub fn apply_dft(
        &mut self,
        target: RegId,
        effective_dim: usize,
        direction: Direction,
    ) -> Result<()> {
        self.apply_dft_with(target, &EffectiveDim::Fixed(effective_dim), direction)
    }

    /// On every branch `c` of `control`, `F_{dim_of(c)}` on `target`.
    pub fn apply_controlled_dft(
        &mut self,
        control: RegId,
        target: RegId,
        dim_of: impl Fn(usize) -> usize + Send + Sync + 'static,
        direction: Direction,
    ) -> Result<()> {
        self.apply_dft_with(
            target,
            &EffectiveDim::controlled(control, dim_of),
            direction,
        )
    }

    pub(crate) fn apply_dft_with(
        &mut self,
        target: RegId,
        dim: &EffectiveDim,
        direction: Direction,
    ) -> Result<()> {
        dim.validate(&self.layout, target)?;
        let full = self.layout.dim(target);
        let mut tables = TwiddleCache::new(direction, full);
        let mut scratch = vec![ZERO; full];
        for_each_fiber(&self.layout, &mut self.amps, target, |values, fiber| {
            let d = dim.resolve(values, full);
            if d > 1 {
                dft_fiber(&mut fiber[..d], tables.get(d), &mut scratch[..d]);
            }
        });
        Ok(())
    }

    // ---- Phase flips ----------------------------------------------------

    /// `I - 2|0><0|` on the listed registers, optionally gated by a predicate
    /// on the full basis tuple.
    pub fn apply_s0(&mut self, registers: &[RegId], gate: Option<&PhasePredicate>) -> Result<()> {
        for r in registers {
            self.layout.check(*r)?;
        }
        let probes: Vec<(usize, usize)> = registers
            .iter()
            .map(|&r| (self.layout.stride(r), self.layout.dim(r)))
            .collect();
        let mut values = vec![0; self.layout.len()];
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            if probes.iter().any(|&(s, d)| (idx / s) % d != 0) {
                continue;
            }
            if let Some(gate) = gate {
                self.layout.decode(idx, &mut values);
                if !gate.eval(&values) {
                    continue;
                }
            }
            *amp = -*amp;
        }
        Ok(())
    }

    /// `amp(x) -> (-1)^predicate(x) amp(x)`.
    pub fn apply_s1(&mut self, predicate: &PhasePredicate) {
        let mut values = vec![0; self.layout.len()];
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            self.layout.decode(idx, &mut values);
            if predicate.eval(&values) {
                *amp = -*amp;
            }
        }
    }

    // ---- Grover iterates ------------------------------------------------

    /// One Grover iterate `G = -F_d S0 F_d^dagger S1` on `target`.
    pub fn grover_step(
        &mut self,
        target: RegId,
        effective_dim: usize,
        predicate: &PhasePredicate,
    ) -> Result<()> {
        self.grover_power(
            &[],
            1,
            target,
            &EffectiveDim::Fixed(effective_dim),
            predicate,
            false,
        )
    }

    /// On each joint branch of `controls`, `G^(m_1 + ... + m_R)` on `target`.
    pub fn apply_controlled_grover_power(
        &mut self,
        controls: &[RegId],
        target: RegId,
        dim: &EffectiveDim,
        predicate: &PhasePredicate,
    ) -> Result<()> {
        self.grover_power(controls, 0, target, dim, predicate, false)
    }

    /// `(G^dagger)^m` with the same control structure.
    pub fn apply_controlled_grover_power_adjoint(
        &mut self,
        controls: &[RegId],
        target: RegId,
        dim: &EffectiveDim,
        predicate: &PhasePredicate,
    ) -> Result<()> {
        self.grover_power(controls, 0, target, dim, predicate, true)
    }

    // The diffusion `-F S0 F^dagger` equals `2|s><s| - I` with `|s>` the flat
    // state on `[0, d)`, i.e. reflection of each amplitude about the fiber mean.
    pub(crate) fn grover_power(
        &mut self,
        controls: &[RegId],
        fixed: usize,
        target: RegId,
        dim: &EffectiveDim,
        predicate: &PhasePredicate,
        adjoint: bool,
    ) -> Result<()> {
        dim.validate(&self.layout, target)?;
        for &c in controls {
            self.layout.check(c)?;
            if c == target {
                return Err(QntError::invalid(
                    "a register cannot control its own Grover power",
                ));
            }
        }
        let full = self.layout.dim(target);
        let t = target.index();
        let mut mask = vec![false; full];
        for_each_fiber(&self.layout, &mut self.amps, target, |values, fiber| {
            let steps = fixed + controls.iter().map(|c| values[c.index()]).sum::<usize>();
            if steps == 0 {
                return;
            }
            let d = dim.resolve(values, full);
            for (x, m) in mask[..d].iter_mut().enumerate() {
                values[t] = x;
                *m = predicate.eval(values);
            }
            values[t] = 0;
            let fiber = &mut fiber[..d];
            let mask = &mask[..d];
            for _ in 0..steps {
                if adjoint {
                    diffuse(fiber);
                    flip(fiber, mask);
                } else {
                    flip(fiber, mask);
                    diffuse(fiber);
                }
            }
        });
        Ok(())
    }

    // ---- Controlled composite unitaries ---------------------------------

    /// On every branch `m` of `control`, applies `unitary` `m` times to the
    /// sub-state over the remaining registers.
    ///
    /// The sub-states handed to `unitary` are unnormalised slices of `self`
    /// with layout `self.layout().without(control)`.
    pub fn apply_controlled_power<F>(&mut self, control: RegId, mut unitary: F) -> Result<()>
    where
        F: FnMut(&mut QState) -> Result<()>,
    {
        let sub_layout = self.layout.without(control)?;
        let d = self.layout.dim(control);
        let s = self.layout.stride(control);
        let n = self.amps.len();
        for m in 1..d {
            let indices = (0..n)
                .step_by(d * s)
                .flat_map(|outer| (0..s).map(move |i| outer + m * s + i));
            let amps = indices.clone().map(|i| self.amps[i]).collect();
            let mut sub = QState {
                layout: sub_layout.clone(),
                amps,
            };
            for _ in 0..m {
                unitary(&mut sub)?;
            }
            for (i, a) in indices.zip(sub.amps) {
                self.amps[i] = a;
            }
        }
        Ok(())
    }

    /// `sum_m |m> U^m |base> / sqrt(dim)` with the new register `name`
    /// outermost.
    ///
    /// Equals preparing `F|0> (x) |base>` and applying
    /// [`apply_controlled_power`](Self::apply_controlled_power), but costs
    /// `dim - 1` applications of `unitary` instead of `dim (dim - 1) / 2`.
    pub fn controlled_powers_from_flat<F>(
        name: &str,
        dim: usize,
        base: &QState,
        cap: usize,
        mut unitary: F,
    ) -> Result<QState>
    where
        F: FnMut(&mut QState) -> Result<()>,
    {
        let layout = RegisterLayout::new(
            std::iter::once((name.to_string(), dim)).chain(
                base.layout
                    .registers()
                    .iter()
                    .map(|r| (r.name.clone(), r.dim)),
            ),
        )?;
        layout.check_cap(cap)?;
        let scale = 1.0 / (dim as f64).sqrt();
        let mut amps = Vec::with_capacity(layout.total_dim());
        let mut current = base.clone();
        for m in 0..dim {
            if m > 0 {
                unitary(&mut current)?;
            }
            amps.extend(current.amps.iter().map(|a| a * scale));
        }
        Ok(QState { layout, amps })
    }

    // ---- Measurement ----------------------------------------------------

    /// Born-rule marginal distribution of one register.
    pub fn marginal_probabilities(&self, register: RegId) -> Vec<f64> {
        let d = self.layout.dim(register);
        let s = self.layout.stride(register);
        let mut probs = vec![0.0; d];
        for (idx, a) in self.amps.iter().enumerate() {
            probs[(idx / s) % d] += a.norm_sqr();
        }
        probs
    }

    /// Total probability of the basis states whose tuple satisfies `select`.
    pub fn probability_where(&self, select: impl Fn(&[usize]) -> bool) -> f64 {
        let mut values = vec![0; self.layout.len()];
        let mut p = 0.0;
        for (idx, a) in self.amps.iter().enumerate() {
            self.layout.decode(idx, &mut values);
            if select(&values) {
                p += a.norm_sqr();
            }
        }
        p
    }

    /// Draws an outcome of `register` without collapsing the state.
    pub fn sample<R: Rng + ?Sized>(&self, register: RegId, rng: &mut R) -> usize {
        sample_index(&self.marginal_probabilities(register), rng)
    }

    /// Measures `register` with a generator seeded from `seed`, collapsing
    /// and renormalising the state.
    pub fn measure(&mut self, register: RegId, seed: u64) -> Result<usize> {
        self.measure_with(register, &mut stream_rng(seed, 0))
    }

    pub fn measure_with<R: Rng + ?Sized>(&mut self, register: RegId, rng: &mut R) -> Result<usize> {
        self.layout.check(register)?;
        let probs = self.marginal_probabilities(register);
        let outcome = sample_index(&probs, rng);
        let d = self.layout.dim(register);
        let s = self.layout.stride(register);
        let scale = 1.0 / probs[outcome].sqrt();
        for (idx, a) in self.amps.iter_mut().enumerate() {
            if (idx / s) % d == outcome {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
        Ok(outcome)
    }

    pub fn dump(&self, threshold: f64) -> StateDump {
        StateDump {
            layout: self.layout.registers().to_vec(),
            threshold,
            amplitudes: self
                .amps
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm_sqr() > threshold)
                .map(|(i, a)| (i, a.re, a.im))
                .collect(),
        }
    }
}

/// Inverse-CDF draw from a discrete distribution.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left `u` past the final partial sum.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Visits every fiber of `target` (all values of `target` at fixed values of
/// the other registers). The closure receives the basis tuple with the target
/// slot set to 0, and the fiber amplitudes in target order.
fn for_each_fiber<F>(layout: &RegisterLayout, amps: &mut [Complex64], target: RegId, mut f: F)
where
    F: FnMut(&mut [usize], &mut [Complex64]),
{
    let d = layout.dim(target);
    let s = layout.stride(target);
    let mut values = vec![0; layout.len()];
    let mut buf = vec![ZERO; d];
    for outer in (0..amps.len()).step_by(d * s) {
        for i in 0..s {
            let base = outer + i;
            layout.decode(base, &mut values);
            if s == 1 {
                f(&mut values, &mut amps[base..base + d]);
            } else {
                for (x, b) in buf.iter_mut().enumerate() {
                    *b = amps[base + x * s];
                }
                f(&mut values, &mut buf);
                for (x, b) in buf.iter().enumerate() {
                    amps[base + x * s] = *b;
                }
            }
        }
    }
}

struct TwiddleCache {
    sign: f64,
    tables: Vec<Option<Vec<Complex64>>>,
}

impl TwiddleCache {
    fn new(direction: Direction, max_dim: usize) -> Self {
        let sign = match direction {
            Direction::Forward => 1.0,
            Direction::Inverse => -1.0,
        };
        TwiddleCache {
            sign,
            tables: vec![None; max_dim + 1],
        }
    }

    /// `exp(sign 2 pi i j / d)` for `j < d`.
    fn get(&mut self, d: usize) -> &[Complex64] {
        let sign = self.sign;
        self.tables[d].get_or_insert_with(|| {
            (0..d)
                .map(|j| {
                    Complex64::from_polar(1.0, sign * std::f64::consts::TAU * j as f64 / d as f64)
                })
                .collect()
        })
    }
}

fn dft_fiber(fiber: &mut [Complex64], table: &[Complex64], scratch: &mut [Complex64]) {
    let d = fiber.len();
    let norm = 1.0 / (d as f64).sqrt();
    for (b, out) in scratch.iter_mut().enumerate() {
        let mut acc = ZERO;
        let mut phase = 0;
        for a in fiber.iter() {
            acc += a * table[phase];
            phase += b;
            if phase >= d {
                phase -= d;
            }
        }
        *out = acc * norm;
    }
    fiber.copy_from_slice(scratch);
}

#[inline]
fn flip(fiber: &mut [Complex64], mask: &[bool]) {
    for (a, &m) in fiber.iter_mut().zip(mask) {
        if m {
            *a = -*a;
        }
    }
}

#[inline]
fn diffuse(fiber: &mut [Complex64]) {
    let twice_mean = fiber.iter().sum::<Complex64>() * (2.0 / fiber.len() as f64);
    for a in fiber.iter_mut() {
        *a = twice_mean - *a;
    }
}
