use serde::Serialize;

use crate::error::{QntError, Result};

/// Largest total dimension any state may have.
pub const MAX_DIM_CEILING: usize = 1 << 24;

/// Handle to a register within one particular [`RegisterLayout`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RegId(pub(crate) usize);

impl RegId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Register {
    pub name: String,
    pub dim: usize,
}

/// Named registers and the row-major index arithmetic over them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    strides: Vec<usize>,
    total: usize,
}

impl RegisterLayout {
    pub fn new<I, S>(registers: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let registers: Vec<Register> = registers
            .into_iter()
            .map(|(name, dim)| Register {
                name: name.into(),
                dim,
            })
            .collect();
        if registers.is_empty() {
            return Err(QntError::invalid("a layout needs at least one register"));
        }
        for (i, r) in registers.iter().enumerate() {
            if r.dim == 0 {
                return Err(QntError::invalid(format!(
                    "register `{}` has dimension 0",
                    r.name
                )));
            }
            if registers[..i].iter().any(|o| o.name == r.name) {
                return Err(QntError::invalid(format!(
                    "duplicate register name `{}`",
                    r.name
                )));
            }
        }
        let requested = Self::product(registers.iter().map(|r| r.dim));
        if requested > MAX_DIM_CEILING as u128 {
            return Err(QntError::DimensionCap {
                requested,
                cap: MAX_DIM_CEILING,
            });
        }
        let mut strides = vec![1; registers.len()];
        for i in (0..registers.len() - 1).rev() {
            strides[i] = strides[i + 1] * registers[i + 1].dim;
        }
        Ok(RegisterLayout {
            total: requested as usize,
            registers,
            strides,
        })
    }

    /// Overflow-free product of dimensions, for validating before allocating.
    pub fn product(dims: impl IntoIterator<Item = usize>) -> u128 {
        dims.into_iter()
            .fold(1u128, |acc, d| acc.saturating_mul(d as u128))
    }

    pub fn check_cap(&self, cap: usize) -> Result<()> {
        if self.total > cap {
            return Err(QntError::DimensionCap {
                requested: self.total as u128,
                cap,
            });
        }
        Ok(())
    }

    pub fn id(&self, name: &str) -> Result<RegId> {
        self.registers
            .iter()
            .position(|r| r.name == name)
            .map(RegId)
            .ok_or_else(|| QntError::UnknownRegister(name.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = RegId> {
        (0..self.registers.len()).map(RegId)
    }

    pub(crate) fn check(&self, id: RegId) -> Result<()> {
        if id.0 < self.registers.len() {
            Ok(())
        } else {
            Err(QntError::UnknownRegister(format!("#{}", id.0)))
        }
    }

    pub fn dim(&self, id: RegId) -> usize {
        self.registers[id.0].dim
    }

    pub fn name(&self, id: RegId) -> &str {
        &self.registers[id.0].name
    }

    pub fn stride(&self, id: RegId) -> usize {
        self.strides[id.0]
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    /// Writes the register values of basis `index` into `values`.
    pub fn decode(&self, mut index: usize, values: &mut [usize]) {
        for (v, &s) in values.iter_mut().zip(&self.strides) {
            *v = index / s;
            index %= s;
        }
    }

    pub fn encode(&self, values: &[usize]) -> usize {
        values.iter().zip(&self.strides).map(|(v, s)| v * s).sum()
    }

    /// The same layout with one register removed.
    pub fn without(&self, id: RegId) -> Result<RegisterLayout> {
        self.check(id)?;
        if self.registers.len() < 2 {
            return Err(QntError::invalid(
                "cannot remove the only register of a layout",
            ));
        }
        RegisterLayout::new(
            self.registers
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != id.0)
                .map(|(_, r)| (r.name.clone(), r.dim)),
        )
    }
}
