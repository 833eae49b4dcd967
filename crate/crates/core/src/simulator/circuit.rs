use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{Gate, SimulatorError};

/// A named, contiguous block of qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl Register {
    pub fn qubits(&self) -> Range<usize> {
        self.start..self.start + self.len
    }

    /// Qubit `k` of the register (`k = 0` is least significant).
    pub fn qubit(&self, k: usize) -> usize {
        assert!(k < self.len, "qubit {k} outside register `{}`", self.name);
        self.start + k
    }
}

/// Gates over a layout of registers, allocated in order from qubit 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    registers: Vec<Register>,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    /// A circuit with one anonymous register of `num_qubits`.
    pub fn with_qubits(num_qubits: usize) -> Self {
        let mut c = Self::new();
        c.add_register("q", num_qubits);
        c
    }

    /// Appends a register after the existing ones and returns it.
    pub fn add_register(&mut self, name: &str, len: usize) -> Register {
        let reg = Register {
            name: name.to_string(),
            start: self.num_qubits(),
            len,
        };
        self.registers.push(reg.clone());
        reg
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn num_qubits(&self) -> usize {
        self.registers.iter().map(|r| r.len).sum()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), SimulatorError> {
        gate.validate(self.num_qubits())?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<(), SimulatorError> {
        gates.into_iter().try_for_each(|g| self.push(g))
    }

    /// Index one past the last gate; marks a point to stop simulation at.
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}
