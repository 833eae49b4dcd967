//! Uniformly controlled (multiplexed) rotations.
//!
//! A multiplexor applies `R(α_j)` to the target when the control register
//! reads `j` (bit `l` of `j` is `controls[l]`). It decomposes into `2^k`
//! uncontrolled rotations separated by CX gates whose control walks the
//! reflected Gray code. Because `X R(θ) X = R(−θ)` for both `Ry` and `Rz`, the
//! control value `j` sees `Σ_i (−1)^{popcount(j & g_i)} θ'_i` where `g_i` is the
//! `i`-th Gray code word, so `θ' = 2^{−k} Mᵀ α` with the same sign matrix `M`.

use serde::{Deserialize, Serialize};

use super::EncodingError;
use crate::simulator::{Gate, GateKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Y,
    Z,
}

impl Axis {
    pub fn gate(&self, angle: f64, target: usize) -> Gate {
        match self {
            Axis::Y => Gate::new(GateKind::Ry(angle), target),
            Axis::Z => Gate::new(GateKind::Rz(angle), target),
        }
    }
}

pub fn gray_code(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Angles of the uncontrolled rotations in Gray-code order.
pub fn gray_code_angles(angles: &[f64]) -> Vec<f64> {
    let count = angles.len();
    let scale = 1.0 / count as f64;
    (0..count)
        .map(|i| {
            let g = gray_code(i);
            scale
                * angles
                    .iter()
                    .enumerate()
                    .map(|(j, &a)| if (j & g).count_ones().is_multiple_of(2) { a } else { -a })
                    .sum::<f64>()
        })
        .collect()
}

/// Control position toggled after rotation `i` of a `2^k`-step cycle.
fn toggled_bit(i: usize, count: usize) -> usize {
    if i + 1 < count {
        (i + 1).trailing_zeros() as usize
    } else {
        count.trailing_zeros() as usize - 1
    }
}

/// Gate list for the multiplexed rotation about `axis` with one angle per
/// control value. Every rotation is kept, including zero angles.
pub fn multiplexed_rotation(
    angles: &[f64],
    axis: Axis,
    target: usize,
    controls: &[usize],
) -> Result<Vec<Gate>, EncodingError> {
    let expected = 1usize << controls.len();
    if angles.len() != expected {
        return Err(EncodingError::AngleCount {
            expected,
            got: angles.len(),
        });
    }
    if controls.is_empty() {
        return Ok(vec![axis.gate(angles[0], target)]);
    }
    let rotated = gray_code_angles(angles);
    let mut gates = Vec::with_capacity(2 * expected);
    for (i, &theta) in rotated.iter().enumerate() {
        gates.push(axis.gate(theta, target));
        gates.push(Gate::cx(controls[toggled_bit(i, expected)], target));
    }
    Ok(gates)
}

/// Like [`multiplexed_rotation`] but drops numerically inert pieces: nothing
/// when every angle is below `tolerance`, a single uncontrolled rotation when
/// all angles are equal, and otherwise the full ladder without near-zero
/// rotations.
pub(crate) fn compact_multiplexed_rotation(
    angles: &[f64],
    axis: Axis,
    target: usize,
    controls: &[usize],
    tolerance: f64,
) -> Result<Vec<Gate>, EncodingError> {
    if angles.iter().all(|a| a.abs() < tolerance) {
        return Ok(Vec::new());
    }
    let mut gates = multiplexed_rotation(angles, axis, target, controls)?;
    if controls.is_empty() {
        return Ok(gates);
    }
    let rotated = gray_code_angles(angles);
    if rotated[1..].iter().all(|a| a.abs() < tolerance) {
        return Ok(vec![axis.gate(rotated[0], target)]);
    }
    gates.retain(|g| g.kind.angle().is_none_or(|a| a.abs() >= tolerance));
    Ok(gates)
}
