//! Dense statevector simulation.
//!
//! Qubit `q` is bit `q` of the amplitude index, so qubit 0 is the least
//! significant. Registers are laid out in allocation order from qubit 0.

mod circuit;
mod gate;

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use thiserror::Error;

pub use circuit::{Circuit, Register};
pub use gate::{Control, Gate, GateKind, Matrix2};

/// Tolerance on `‖ψ‖ = 1` accepted by constructors.
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum SimulatorError {
    #[error("qubit {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("qubit {0} used more than once by a gate")]
    OverlappingQubits(usize),
    #[error("gate angle is not finite")]
    NonFiniteAngle,
    #[error("amplitude count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("state norm {0} differs from 1")]
    NotNormalized(f64),
    #[error("outcome {outcome} of qubit {qubit} has zero probability")]
    ZeroProbability { qubit: usize, outcome: u8 },
    #[error("shot count must be at least 1")]
    NoShots,
    #[error("{0}")]
    GateSyntax(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self {
            num_qubits,
            amplitudes,
        }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, SimulatorError> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(SimulatorError::NotPowerOfTwo(len));
        }
        let state = Self {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes,
        };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(SimulatorError::NotNormalized(norm));
        }
        Ok(state)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self, SimulatorError> {
        Self::from_amplitudes(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Applies `gate` in place. Returns the number of amplitude pairs updated,
    /// which is `2^(Q − k − 1)` for a gate with `k` controls.
    pub fn apply(&mut self, gate: &Gate) -> Result<usize, SimulatorError> {
        gate.validate(self.num_qubits)?;
        let m = gate.kind.matrix();
        let target_bit = 1usize << gate.target;

        let mut fixed: Vec<usize> = gate.controls.iter().map(|c| c.qubit).collect();
        fixed.push(gate.target);
        fixed.sort_unstable();
        let control_bits = gate
            .controls
            .iter()
            .filter(|c| c.polarity)
            .fold(0usize, |acc, c| acc | (1 << c.qubit));

        let pairs = 1usize << (self.num_qubits - fixed.len());
        for r in 0..pairs {
            let mut i0 = r;
            for &bit in &fixed {
                i0 = ((i0 >> bit) << (bit + 1)) | (i0 & ((1 << bit) - 1));
            }
            i0 |= control_bits;
            let i1 = i0 | target_bit;
            let (a0, a1) = (self.amplitudes[i0], self.amplitudes[i1]);
            self.amplitudes[i0] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
        Ok(pairs)
    }

    /// Probability that measuring `qubit` gives `outcome`.
    pub fn probability(&self, qubit: usize, outcome: bool) -> Result<f64, SimulatorError> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        let want = if outcome { bit } else { 0 };
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit == want)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Projects onto `qubit = outcome` and renormalizes.
    pub fn collapse(&self, qubit: usize, outcome: bool) -> Result<Statevector, SimulatorError> {
        let p = self.probability(qubit, outcome)?;
        if p <= 0.0 {
            return Err(SimulatorError::ZeroProbability {
                qubit,
                outcome: outcome as u8,
            });
        }
        let bit = 1usize << qubit;
        let want = if outcome { bit } else { 0 };
        let scale = 1.0 / p.sqrt();
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &a)| if i & bit == want { a * scale } else { Complex64::new(0.0, 0.0) })
            .collect();
        Ok(Statevector {
            num_qubits: self.num_qubits,
            amplitudes,
        })
    }

    /// Joint outcome distribution of `qubits`; entry `k` has bit `b` equal to
    /// the outcome of `qubits[b]`.
    pub fn marginal(&self, qubits: &[usize]) -> Result<Vec<f64>, SimulatorError> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let mut dist = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let k = qubits
                .iter()
                .enumerate()
                .fold(0usize, |acc, (b, &q)| acc | (((i >> q) & 1) << b));
            dist[k] += a.norm_sqr();
        }
        Ok(dist)
    }

    /// Draws `shots` joint measurements of `qubits`. Keys are bitstrings whose
    /// `b`-th character is the outcome of `qubits[b]`.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        qubits: &[usize],
        shots: usize,
        rng: &mut R,
    ) -> Result<BTreeMap<String, usize>, SimulatorError> {
        if shots == 0 {
            return Err(SimulatorError::NoShots);
        }
        let dist = self.marginal(qubits)?;
        let picker = WeightedIndex::new(&dist).map_err(|_| SimulatorError::NotNormalized(self.norm()))?;
        let mut counts = vec![0usize; dist.len()];
        for _ in 0..shots {
            counts[picker.sample(rng)] += 1;
        }
        Ok(counts
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(k, c)| {
                let bits = (0..qubits.len())
                    .map(|b| if (k >> b) & 1 == 1 { '1' } else { '0' })
                    .collect();
                (bits, c)
            })
            .collect())
    }

    fn check_qubit(&self, qubit: usize) -> Result<(), SimulatorError> {
        if qubit >= self.num_qubits {
            return Err(SimulatorError::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }
}

/// Value-semantic gate application.
pub fn apply_gate(state: &Statevector, gate: &Gate) -> Result<Statevector, SimulatorError> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

/// Runs every gate of `circuit` on `|0…0⟩`.
pub fn run(circuit: &Circuit) -> Result<Statevector, SimulatorError> {
    run_prefix(circuit, circuit.len())
}

/// Runs the first `count` gates of `circuit` on `|0…0⟩`.
pub fn run_prefix(circuit: &Circuit, count: usize) -> Result<Statevector, SimulatorError> {
    let mut state = Statevector::zero(circuit.num_qubits());
    for gate in &circuit.gates()[..count.min(circuit.len())] {
        state.apply(gate)?;
    }
    Ok(state)
}
