//! Amplitude encoding of adjacency vectors and state-preparation synthesis.

pub mod multiplexor;
mod state_prep;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::graphs::AdjacencyVector;
use crate::simulator::{Control, Gate, SimulatorError};

pub use multiplexor::{gray_code, multiplexed_rotation, Axis};
pub use state_prep::{prepare, synthesize_state_prep, ELISION_TOLERANCE};

/// Accepted deviation of `Σ|a|²` from 1.
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum EncodingError {
    #[error("cannot encode an all-zero vector")]
    ZeroVector,
    #[error("vector entries must be finite")]
    NonFinite,
    #[error("amplitudes have squared norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("amplitude count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("multiplexor needs {expected} angles, got {got}")]
    AngleCount { expected: usize, got: usize },
    #[error("circuit text line {line}: {source}")]
    Text { line: usize, source: SimulatorError },
    #[error("circuit text: {0}")]
    Header(String),
}

/// Number of qubits whose basis states index `len` entries, `⌈log₂ len⌉`.
pub fn qubits_for(len: usize) -> usize {
    len.max(1).next_power_of_two().trailing_zeros() as usize
}

/// A normalized amplitude array of length `2^N`, with the normalization
/// constant of the vector it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector {
    amplitudes: Vec<Complex64>,
    gamma: f64,
    num_qubits: usize,
}

impl AmplitudeVector {
    /// Wraps already normalized amplitudes (`gamma = 1`).
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, EncodingError> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(EncodingError::NotPowerOfTwo(len));
        }
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(EncodingError::NonFinite);
        }
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOLERANCE {
            return Err(EncodingError::NotNormalized(norm2));
        }
        Ok(Self {
            amplitudes,
            gamma: 1.0,
            num_qubits: len.trailing_zeros() as usize,
        })
    }

    /// Normalizes `values` by `γ = √(Σ g_k²)` and zero-pads to a power of two.
    pub fn normalize(values: &[f64]) -> Result<Self, EncodingError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EncodingError::NonFinite);
        }
        let gamma = values.iter().filter(|&&v| v != 0.0).map(|v| v * v).sum::<f64>().sqrt();
        if gamma == 0.0 {
            return Err(EncodingError::ZeroVector);
        }
        let num_qubits = qubits_for(values.len());
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        for (a, &v) in amplitudes.iter_mut().zip(values) {
            *a = Complex64::new(v / gamma, 0.0);
        }
        Ok(Self {
            amplitudes,
            gamma,
            num_qubits,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Real parts of the amplitudes.
    pub fn real(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.re).collect()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn is_real(&self) -> bool {
        self.amplitudes.iter().all(|a| a.im == 0.0)
    }
}

/// Amplitude encoding `|G⟩ = (1/γ) Σ_k g_k |k−1⟩` of a graph's adjacency vector.
pub fn encode(vector: &AdjacencyVector) -> Result<AmplitudeVector, EncodingError> {
    AmplitudeVector::normalize(vector.entries())
}

/// An ordered gate list over qubits `0..num_qubits`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CircuitFragment {
    gates: Vec<Gate>,
    num_qubits: usize,
}

impl CircuitFragment {
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Self, EncodingError> {
        for (line, g) in gates.iter().enumerate() {
            g.validate(num_qubits).map_err(|source| EncodingError::Text { line, source })?;
        }
        Ok(Self { gates, num_qubits })
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// The fragment moved onto `qubits[0..N]` of a larger circuit, with
    /// `extra` controls added to every gate.
    pub fn embed<'a>(&'a self, qubits: &'a [usize], extra: &'a [Control]) -> impl Iterator<Item = Gate> + 'a {
        assert_eq!(qubits.len(), self.num_qubits, "qubit map must cover the fragment");
        self.gates.iter().map(move |g| Gate {
            kind: g.kind,
            target: qubits[g.target],
            controls: g
                .controls
                .iter()
                .map(|c| Control {
                    qubit: qubits[c.qubit],
                    polarity: c.polarity,
                })
                .chain(extra.iter().copied())
                .collect(),
        })
    }
}

/// Text listing: a `qubits N` header, then one gate per line. Lines starting
/// with `#` are comments.
impl fmt::Display for CircuitFragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.num_qubits)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for CircuitFragment {
    type Err = EncodingError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let num_qubits = lines
            .next()
            .and_then(|(_, l)| l.strip_prefix("qubits "))
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| EncodingError::Header("expected `qubits N` first".into()))?;
        let gates = lines
            .map(|(line, l)| l.parse::<Gate>().map_err(|source| EncodingError::Text { line, source }))
            .collect::<Result<Vec<_>, _>>()?;
        CircuitFragment::new(num_qubits, gates)
    }
}
