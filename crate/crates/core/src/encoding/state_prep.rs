//! State preparation by recursive disentangling.
//!
//! Working from qubit 0 upward, each amplitude pair `(a, b)` that differs
//! only in the current qubit is rotated to `(r·e^{it}, 0)` by `Rz(−φ)` and then
//! `Ry(−θ)`, with `θ = 2·atan2(|b|, |a|)`, `φ = arg b − arg a`. The rotations are
//! uniformly controlled by the higher qubits. Reversing and inverting the
//! whole sequence maps `|0…0⟩` to the target, up to a global phase.

use num_complex::Complex64;

use super::multiplexor::{compact_multiplexed_rotation, Axis};
use super::{AmplitudeVector, CircuitFragment, EncodingError};
use crate::simulator::Gate;

/// Rotations with a smaller angle magnitude are dropped.
pub const ELISION_TOLERANCE: f64 = 1e-14;

/// Circuit `G` with `G|0…0⟩ = target` (global phase ignored).
pub fn synthesize_state_prep(target: &AmplitudeVector) -> Result<CircuitFragment, EncodingError> {
    let num_qubits = target.num_qubits();
    let mut level: Vec<Complex64> = target.amplitudes().to_vec();
    // stages[i] prepares qubit i given the higher qubits
    let mut stages: Vec<Vec<Gate>> = Vec::with_capacity(num_qubits);

    for qubit in 0..num_qubits {
        let half = level.len() / 2;
        let mut thetas = Vec::with_capacity(half);
        let mut phis = Vec::with_capacity(half);
        let mut next = Vec::with_capacity(half);
        for pair in level.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            let r = a.norm().hypot(b.norm());
            if r == 0.0 {
                thetas.push(0.0);
                phis.push(0.0);
                next.push(Complex64::new(0.0, 0.0));
                continue;
            }
            let (alpha, beta) = (a.arg(), b.arg());
            thetas.push(2.0 * b.norm().atan2(a.norm()));
            phis.push(beta - alpha);
            next.push(Complex64::from_polar(r, (alpha + beta) / 2.0));
        }
        let controls: Vec<usize> = (qubit + 1..num_qubits).collect();
        let mut stage = compact_multiplexed_rotation(&thetas, Axis::Y, qubit, &controls, ELISION_TOLERANCE)?;
        stage.extend(compact_multiplexed_rotation(&phis, Axis::Z, qubit, &controls, ELISION_TOLERANCE)?);
        stages.push(stage);
        level = next;
    }

    let gates = stages.into_iter().rev().flatten().collect();
    CircuitFragment::new(num_qubits, gates)
}

/// Validates raw amplitudes and synthesizes their preparation circuit.
pub fn prepare(amplitudes: &[Complex64]) -> Result<CircuitFragment, EncodingError> {
    synthesize_state_prep(&AmplitudeVector::from_amplitudes(amplitudes.to_vec())?)
}
