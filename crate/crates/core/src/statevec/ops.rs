use std::fmt;
use std::sync::Arc;

use super::{QState, RegId, RegisterLayout};
use crate::error::{QntError, Result};

/// Sign of the exponent in the discrete Fourier transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Entries `exp(+2 pi i a b / d) / sqrt(d)`.
    Forward,
    Inverse,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::Forward => Direction::Inverse,
            Direction::Inverse => Direction::Forward,
        }
    }
}

type BasisFn = dyn Fn(&[usize]) -> bool + Send + Sync;

/// Pure predicate on the full tuple of register values of a basis state.
#[derive(Clone)]
pub struct PhasePredicate(Arc<BasisFn>);

impl PhasePredicate {
    pub fn new(f: impl Fn(&[usize]) -> bool + Send + Sync + 'static) -> Self {
        PhasePredicate(Arc::new(f))
    }

    pub fn never() -> Self {
        PhasePredicate::new(|_| false)
    }

    pub fn always() -> Self {
        PhasePredicate::new(|_| true)
    }

    /// Marks the basis values of one register listed in `marked`.
    pub fn on_register(reg: RegId, marked: Vec<bool>) -> Self {
        PhasePredicate::new(move |v| marked.get(v[reg.0]).copied().unwrap_or(false))
    }

    #[inline]
    pub fn eval(&self, values: &[usize]) -> bool {
        (self.0)(values)
    }
}

impl fmt::Debug for PhasePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PhasePredicate(..)")
    }
}

/// How many leading basis values of a target register an operation acts on.
/// Values at or above the effective dimension are left untouched.
#[derive(Clone)]
pub enum EffectiveDim {
    Full,
    Fixed(usize),
    /// Chosen per branch from the value of another register.
    Controlled {
        control: RegId,
        dim_of: Arc<dyn Fn(usize) -> usize + Send + Sync>,
    },
}

impl EffectiveDim {
    pub fn controlled(
        control: RegId,
        dim_of: impl Fn(usize) -> usize + Send + Sync + 'static,
    ) -> Self {
        EffectiveDim::Controlled {
            control,
            dim_of: Arc::new(dim_of),
        }
    }

    #[inline]
    pub(crate) fn resolve(&self, values: &[usize], full: usize) -> usize {
        match self {
            EffectiveDim::Full => full,
            EffectiveDim::Fixed(d) => *d,
            EffectiveDim::Controlled { control, dim_of } => dim_of(values[control.0]),
        }
    }

    /// Checks every dimension this can resolve to against the target register.
    pub(crate) fn validate(&self, layout: &RegisterLayout, target: RegId) -> Result<()> {
        layout.check(target)?;
        let full = layout.dim(target);
        let check = |d: usize, ctx: &str| {
            if d == 0 || d > full {
                Err(QntError::invalid(format!(
                    "effective dimension {d}{ctx} not in [1, {full}] for register `{}`",
                    layout.name(target)
                )))
            } else {
                Ok(())
            }
        };
        match self {
            EffectiveDim::Full => Ok(()),
            EffectiveDim::Fixed(d) => check(*d, ""),
            EffectiveDim::Controlled { control, dim_of } => {
                layout.check(*control)?;
                if *control == target {
                    return Err(QntError::invalid(
                        "a register cannot control its own dimension",
                    ));
                }
                (0..layout.dim(*control))
                    .try_for_each(|c| check(dim_of(c), &format!(" (control value {c})")))
            }
        }
    }
}

impl fmt::Debug for EffectiveDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EffectiveDim::Full => f.write_str("Full"),
            EffectiveDim::Fixed(d) => write!(f, "Fixed({d})"),
            EffectiveDim::Controlled { control, .. } => write!(f, "Controlled({control:?})"),
        }
    }
}

/// A recordable state operation.
#[derive(Debug, Clone)]
pub enum Op {
    /// Fourier transform on the leading `dim` values of `target`.
    Dft {
        target: RegId,
        dim: EffectiveDim,
        direction: Direction,
    },
    /// Sign flip where every listed register is 0 and `gate` (if any) holds.
    S0 {
        registers: Vec<RegId>,
        gate: Option<PhasePredicate>,
    },
    /// Sign flip on every basis state satisfying the predicate.
    S1 { predicate: PhasePredicate },
    /// `G^(fixed + sum of control values)` on `target`, or its adjoint.
    GroverPower {
        controls: Vec<RegId>,
        fixed: usize,
        target: RegId,
        dim: EffectiveDim,
        predicate: PhasePredicate,
        adjoint: bool,
    },
    /// Projective measurement; has no adjoint.
    Measure { register: RegId, seed: u64 },
}

impl Op {
    pub fn dft(target: RegId, direction: Direction) -> Self {
        Op::Dft {
            target,
            dim: EffectiveDim::Full,
            direction,
        }
    }

    pub fn grover_step(target: RegId, dim: EffectiveDim, predicate: PhasePredicate) -> Self {
        Op::GroverPower {
            controls: Vec::new(),
            fixed: 1,
            target,
            dim,
            predicate,
            adjoint: false,
        }
    }

    pub fn controlled_grover(
        controls: Vec<RegId>,
        target: RegId,
        dim: EffectiveDim,
        predicate: PhasePredicate,
    ) -> Self {
        Op::GroverPower {
            controls,
            fixed: 0,
            target,
            dim,
            predicate,
            adjoint: false,
        }
    }

    pub fn apply(&self, state: &mut QState) -> Result<()> {
        match self {
            Op::Dft {
                target,
                dim,
                direction,
            } => state.apply_dft_with(*target, dim, *direction),
            Op::S0 { registers, gate } => state.apply_s0(registers, gate.as_ref()),
            Op::S1 { predicate } => {
                state.apply_s1(predicate);
                Ok(())
            }
            Op::GroverPower {
                controls,
                fixed,
                target,
                dim,
                predicate,
                adjoint,
            } => state.grover_power(controls, *fixed, *target, dim, predicate, *adjoint),
            Op::Measure { register, seed } => state.measure(*register, *seed).map(|_| ()),
        }
    }

    pub fn adjoint(&self) -> Result<Op> {
        Ok(match self {
            Op::Dft {
                target,
                dim,
                direction,
            } => Op::Dft {
                target: *target,
                dim: dim.clone(),
                direction: direction.reversed(),
            },
            Op::S0 { .. } | Op::S1 { .. } => self.clone(),
            Op::GroverPower {
                controls,
                fixed,
                target,
                dim,
                predicate,
                adjoint,
            } => Op::GroverPower {
                controls: controls.clone(),
                fixed: *fixed,
                target: *target,
                dim: dim.clone(),
                predicate: predicate.clone(),
                adjoint: !adjoint,
            },
            Op::Measure { .. } => return Err(QntError::NonUnitary),
        })
    }
}

/// Applies the inverse of `ops` (reverse order, each op inverted).
///
/// The whole sequence is checked before the state is touched.
pub fn run_adjoint(state: &mut QState, ops: &[Op]) -> Result<()> {
    let inverse: Vec<Op> = ops.iter().rev().map(Op::adjoint).collect::<Result<_>>()?;
    inverse.iter().try_for_each(|op| op.apply(state))
}

/// Explicit opt-in log of applied operations.
#[derive(Debug, Clone, Default)]
pub struct Recording {
    ops: Vec<Op>,
}

impl Recording {
    pub fn new() -> Self {
        Self::default()
    }

    /// Applies `op` and records it if it succeeded.
    pub fn apply(&mut self, state: &mut QState, op: Op) -> Result<()> {
        op.apply(state)?;
        self.ops.push(op);
        Ok(())
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn run_adjoint(&self, state: &mut QState) -> Result<()> {
        run_adjoint(state, &self.ops)
    }
}
