//! Interference-based distance classifier and its classical counterpart.
//!
//! Register layout, least significant first: ancilla `a` (1 qubit), index
//! `m` (`⌈log₂ M⌉`), graph `g` (`⌈log₂ d⌉`), class `c` (1 qubit). Before the
//! final Hadamard the circuit holds
//!
//! ```text
//! (1/√(2M)) Σ_m (|0⟩_a |G_test⟩ + |1⟩_a |G_m⟩) |m⟩ |y_m⟩
//! ```
//!
//! and after it, post-selecting `a = 0` leaves amplitudes proportional to
//! `g_test + g_m` on branch `m`. Class qubit `|0⟩` stands for label `+1`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::{self, qubits_for, AmplitudeVector, CircuitFragment, EncodingError};
use crate::graphs::AdjacencyVector;
use crate::landmarks::Expression;
use crate::simulator::{self, Circuit, Control, Gate, Register, SimulatorError, Statevector};

/// Half-width of the band around `p = 0.5` reported as "unknown".
pub const QUANTUM_TIE_BAND: f64 = 0.0005;

/// Distance-sum magnitude below which the classical rule reports "unknown".
pub const CLASSICAL_TIE_TOLERANCE: f64 = 0.001;

/// Shots per classification when none are given.
pub const DEFAULT_SHOTS: usize = 1024;

/// Allowed disagreement between the simulated and closed-form probability.
pub const FORMULA_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("training set needs at least 2 members, got {0}")]
    TooFewMembers(usize),
    #[error("training set must contain both labels")]
    MissingLabel,
    #[error("graph dimensions differ: {expected} vs {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ancilla outcome 0 has zero probability; nothing to post-select")]
    PostSelection,
    #[error("all {shots} shots were discarded by post-selection")]
    Starvation { shots: usize },
    #[error("circuit gives p = {circuit}, closed form gives {closed_form}")]
    FormulaMismatch { circuit: f64, closed_form: f64 },
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Simulator(#[from] SimulatorError),
}

/// Binary class label `y ∈ {+1, −1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl ClassLabel {
    pub fn sign(&self) -> f64 {
        match self {
            ClassLabel::Plus => 1.0,
            ClassLabel::Minus => -1.0,
        }
    }

    /// Value of the class qubit: `+1 ↔ |0⟩`, `−1 ↔ |1⟩`.
    pub fn class_bit(&self) -> bool {
        matches!(self, ClassLabel::Minus)
    }

    pub fn flipped(&self) -> ClassLabel {
        match self {
            ClassLabel::Plus => ClassLabel::Minus,
            ClassLabel::Minus => ClassLabel::Plus,
        }
    }
}

/// Which expression plays the `+1` class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelWiring {
    pub positive: Expression,
}

impl Default for LabelWiring {
    fn default() -> Self {
        Self {
            positive: Expression::Happy,
        }
    }
}

impl LabelWiring {
    pub fn label(&self, expression: Expression) -> ClassLabel {
        if expression == self.positive {
            ClassLabel::Plus
        } else {
            ClassLabel::Minus
        }
    }

    pub fn expression(&self, label: ClassLabel) -> Expression {
        match (label, self.positive) {
            (ClassLabel::Plus, e) => e,
            (ClassLabel::Minus, Expression::Happy) => Expression::Sad,
            (ClassLabel::Minus, Expression::Sad) => Expression::Happy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
    #[serde(rename = "unknown")]
    Unknown,
}

impl Decision {
    pub fn label(&self) -> Option<ClassLabel> {
        match self {
            Decision::Plus => Some(ClassLabel::Plus),
            Decision::Minus => Some(ClassLabel::Minus),
            Decision::Unknown => None,
        }
    }

    /// Decision for `p(c = 0)` with the symmetric tie band.
    pub fn from_probability(p: f64) -> Decision {
        if p > 0.5 + QUANTUM_TIE_BAND {
            Decision::Plus
        } else if p < 0.5 - QUANTUM_TIE_BAND {
            Decision::Minus
        } else {
            Decision::Unknown
        }
    }

    pub fn negated(&self) -> Decision {
        match self {
            Decision::Plus => Decision::Minus,
            Decision::Minus => Decision::Plus,
            Decision::Unknown => Decision::Unknown,
        }
    }
}

/// Labeled adjacency vectors, `M ≥ 2`, both classes present, common length.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    members: Vec<(AdjacencyVector, ClassLabel)>,
}

fn check_members<T>(members: &[(T, ClassLabel)], dim: impl Fn(&T) -> usize) -> Result<(), ClassifierError> {
    if members.len() < 2 {
        return Err(ClassifierError::TooFewMembers(members.len()));
    }
    let has = |l| members.iter().any(|(_, y)| *y == l);
    if !(has(ClassLabel::Plus) && has(ClassLabel::Minus)) {
        return Err(ClassifierError::MissingLabel);
    }
    let expected = dim(&members[0].0);
    for (g, _) in members {
        if dim(g) != expected {
            return Err(ClassifierError::DimensionMismatch {
                expected,
                got: dim(g),
            });
        }
    }
    Ok(())
}

impl TrainingSet {
    pub fn new(members: Vec<(AdjacencyVector, ClassLabel)>) -> Result<Self, ClassifierError> {
        check_members(&members, |g| g.len())?;
        Ok(Self { members })
    }

    /// The two-graph set used throughout the experiments: one `+1`, one `−1`.
    pub fn pair(positive: AdjacencyVector, negative: AdjacencyVector) -> Result<Self, ClassifierError> {
        Self::new(vec![(positive, ClassLabel::Plus), (negative, ClassLabel::Minus)])
    }

    pub fn members(&self) -> &[(AdjacencyVector, ClassLabel)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// An encoded graph together with its preparation circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedState {
    state: AmplitudeVector,
    prep: CircuitFragment,
}

impl PreparedState {
    pub fn new(state: AmplitudeVector) -> Result<Self, ClassifierError> {
        let prep = encoding::synthesize_state_prep(&state)?;
        Ok(Self { state, prep })
    }

    pub fn from_vector(vector: &AdjacencyVector) -> Result<Self, ClassifierError> {
        Self::new(encoding::encode(vector)?)
    }

    pub fn state(&self) -> &AmplitudeVector {
        &self.state
    }

    pub fn prep(&self) -> &CircuitFragment {
        &self.prep
    }

    pub fn num_qubits(&self) -> usize {
        self.state.num_qubits()
    }
}

/// Training set in encoded form, ready for circuit assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumTrainingSet {
    members: Vec<(PreparedState, ClassLabel)>,
}

impl QuantumTrainingSet {
    pub fn new(members: Vec<(PreparedState, ClassLabel)>) -> Result<Self, ClassifierError> {
        check_members(&members, |g| g.num_qubits())?;
        Ok(Self { members })
    }

    pub fn encode(train: &TrainingSet) -> Result<Self, ClassifierError> {
        let members = train
            .members()
            .iter()
            .map(|(v, y)| Ok((PreparedState::from_vector(v)?, *y)))
            .collect::<Result<Vec<_>, ClassifierError>>()?;
        Self::new(members)
    }

    pub fn members(&self) -> &[(PreparedState, ClassLabel)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn num_qubits(&self) -> usize {
        self.members[0].0.num_qubits()
    }
}

/// The assembled classifier and where its registers live.
#[derive(Debug, Clone)]
pub struct ClassifierCircuit {
    pub circuit: Circuit,
    pub ancilla: Register,
    pub index: Register,
    pub graph: Register,
    pub class: Register,
    /// Number of leading gates that precede the final Hadamard.
    pub interference_at: usize,
}

impl ClassifierCircuit {
    pub fn num_qubits(&self) -> usize {
        self.circuit.num_qubits()
    }
}

fn index_controls(index: &Register, m: usize) -> Vec<Control> {
    (0..index.len)
        .map(|b| Control {
            qubit: index.qubit(b),
            polarity: (m >> b) & 1 == 1,
        })
        .collect()
}

/// Assembles the classifier for `test` against `train`.
///
/// With two training graphs this is the four-register circuit: H on the
/// ancilla and index, the test preparation controlled on the ancilla followed
/// by X on the ancilla, the first training preparation controlled on ancilla
/// and index, X on the index, the second training preparation, the class
/// flip from the index and a final Hadamard on the ancilla. Larger sets use
/// one preparation per index value, selected by the index bits directly.
pub fn build_classifier_circuit(
    test: &PreparedState,
    train: &QuantumTrainingSet,
) -> Result<ClassifierCircuit, ClassifierError> {
    let dim = test.num_qubits();
    if train.num_qubits() != dim {
        return Err(ClassifierError::DimensionMismatch {
            expected: dim,
            got: train.num_qubits(),
        });
    }
    let count = train.len();

    let mut circuit = Circuit::new();
    let ancilla = circuit.add_register("a", 1);
    let index = circuit.add_register("m", qubits_for(count));
    let graph = circuit.add_register("g", dim);
    let class = circuit.add_register("c", 1);
    let a = ancilla.qubit(0);
    let c = class.qubit(0);
    let g_qubits: Vec<usize> = graph.qubits().collect();
    let m_qubits: Vec<usize> = index.qubits().collect();

    circuit.push(Gate::h(a))?;
    if count.is_power_of_two() {
        for &q in &m_qubits {
            circuit.push(Gate::h(q))?;
        }
    } else {
        let uniform = vec![Complex64::new(1.0 / (count as f64).sqrt(), 0.0); count]
            .into_iter()
            .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
            .take(1 << index.len)
            .collect::<Vec<_>>();
        let prep = encoding::prepare(&uniform)?;
        circuit.extend(prep.embed(&m_qubits, &[]))?;
    }

    circuit.extend(test.prep().embed(&g_qubits, &[Control::on(a)]))?;
    circuit.push(Gate::x(a))?;

    let members = train.members();
    if count == 2 {
        let m = index.qubit(0);
        let both = [Control::on(a), Control::on(m)];
        circuit.extend(members[0].0.prep().embed(&g_qubits, &both))?;
        circuit.push(Gate::x(m))?;
        circuit.extend(members[1].0.prep().embed(&g_qubits, &both))?;
    } else {
        for (k, (state, _)) in members.iter().enumerate() {
            let mut controls = vec![Control::on(a)];
            controls.extend(index_controls(&index, k));
            circuit.extend(state.prep().embed(&g_qubits, &controls))?;
        }
    }

    for (k, (_, label)) in members.iter().enumerate() {
        if label.class_bit() {
            circuit.push(Gate::x(c).with_controls(index_controls(&index, k)))?;
        }
    }

    let interference_at = circuit.len();
    circuit.push(Gate::h(a))?;

    Ok(ClassifierCircuit {
        circuit,
        ancilla,
        index,
        graph,
        class,
        interference_at,
    })
}

/// `Σ_m ‖g_test + g_m‖²` split by class: `(class +1 part, total)`.
fn overlap_sums(test: &AmplitudeVector, train: &[(&AmplitudeVector, ClassLabel)]) -> (f64, f64) {
    let mut plus = 0.0;
    let mut total = 0.0;
    for (g, y) in train {
        let s: f64 = test
            .amplitudes()
            .iter()
            .zip(g.amplitudes())
            .map(|(t, m)| (t + m).norm_sqr())
            .sum();
        total += s;
        if *y == ClassLabel::Plus {
            plus += s;
        }
    }
    (plus, total)
}

fn amplitude_members(train: &QuantumTrainingSet) -> Vec<(&AmplitudeVector, ClassLabel)> {
    train.members().iter().map(|(s, y)| (s.state(), *y)).collect()
}

/// `p(c = 0 | a = 0) = Σ_{m: y_m = +1} ‖g_test + g_m‖² / Σ_m ‖g_test + g_m‖²`
/// on normalized amplitudes.
pub fn closed_form_probability(test: &AmplitudeVector, train: &[(&AmplitudeVector, ClassLabel)]) -> f64 {
    let (plus, total) = overlap_sums(test, train);
    plus / total
}

/// The same probability through distances of unit vectors, using
/// `‖t + g‖² = 4 − ‖t − g‖²`: `Σ_{+1} (4 − d_m²) / Σ_m (4 − d_m²)`.
pub fn distance_form_probability(test: &AmplitudeVector, train: &[(&AmplitudeVector, ClassLabel)]) -> f64 {
    let mut plus = 0.0;
    let mut total = 0.0;
    for (g, y) in train {
        let d2: f64 = test
            .amplitudes()
            .iter()
            .zip(g.amplitudes())
            .map(|(t, m)| (t - m).norm_sqr())
            .sum();
        total += 4.0 - d2;
        if *y == ClassLabel::Plus {
            plus += 4.0 - d2;
        }
    }
    plus / total
}

/// Probability of reading the ancilla as 0: `(1/4M) Σ_m ‖g_test + g_m‖²`.
pub fn ancilla_zero_probability(test: &AmplitudeVector, train: &[(&AmplitudeVector, ClassLabel)]) -> f64 {
    let (_, total) = overlap_sums(test, train);
    total / (4.0 * train.len() as f64)
}

/// Statevector just before the final Hadamard, built directly from the
/// superposition formula (for checking the circuit).
pub fn interference_state(layout: &ClassifierCircuit, test: &AmplitudeVector, train: &QuantumTrainingSet) -> Vec<Complex64> {
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << layout.num_qubits()];
    let scale = 1.0 / (2.0 * train.len() as f64).sqrt();
    let a = layout.ancilla.start;
    for (m, (g, y)) in train.members().iter().enumerate() {
        let base = (m << layout.index.start) | ((y.class_bit() as usize) << layout.class.start);
        for k in 0..(1 << layout.graph.len) {
            let idx = base | (k << layout.graph.start);
            amps[idx] += scale * test.amplitudes()[k];
            amps[idx | (1 << a)] += scale * g.state().amplitudes()[k];
        }
    }
    amps
}

/// Probabilities read off one run of the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactProbabilities {
    /// `p(c = 0 | a = 0)` from the simulated state.
    pub class0: f64,
    /// The same quantity from the closed form.
    pub closed_form: f64,
    /// `p(a = 0)`.
    pub ancilla0: f64,
}

fn final_state(test: &PreparedState, train: &QuantumTrainingSet) -> Result<(ClassifierCircuit, Statevector), ClassifierError> {
    let layout = build_classifier_circuit(test, train)?;
    let state = simulator::run(&layout.circuit)?;
    Ok((layout, state))
}

/// Simulates the circuit, post-selects `a = 0` and returns `p(c = 0)`, checked
/// against the closed form.
pub fn exact_probabilities(test: &PreparedState, train: &QuantumTrainingSet) -> Result<ExactProbabilities, ClassifierError> {
    let (layout, state) = final_state(test, train)?;
    let a = layout.ancilla.start;
    let ancilla0 = state.probability(a, false)?;
    let post = state.collapse(a, false).map_err(|e| match e {
        SimulatorError::ZeroProbability { .. } => ClassifierError::PostSelection,
        other => other.into(),
    })?;
    let class0 = post.probability(layout.class.start, false)?;
    let closed_form = closed_form_probability(test.state(), &amplitude_members(train));
    if (class0 - closed_form).abs() > FORMULA_TOLERANCE {
        return Err(ClassifierError::FormulaMismatch {
            circuit: class0,
            closed_form,
        });
    }
    Ok(ExactProbabilities {
        class0,
        closed_form,
        ancilla0,
    })
}

pub fn exact_class_probability(test: &PreparedState, train: &QuantumTrainingSet) -> Result<f64, ClassifierError> {
    Ok(exact_probabilities(test, train)?.class0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Shots(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassificationOutcome {
    #[serde(rename = "p")]
    pub p_class0: f64,
    pub decision: Decision,
    #[serde(serialize_with = "mode_name")]
    pub mode: Mode,
    pub shots_kept: usize,
    pub shots_total: usize,
}

fn mode_name<S: serde::Serializer>(mode: &Mode, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match mode {
        Mode::Exact => "exact",
        Mode::Shots(_) => "shots",
    })
}

/// Post-selected shot estimate: `(#(a=0, c=0), #(a=0))` out of `shots` runs.
pub fn sample_post_selected<R: Rng + ?Sized>(
    test: &PreparedState,
    train: &QuantumTrainingSet,
    shots: usize,
    rng: &mut R,
) -> Result<(usize, usize), ClassifierError> {
    let (layout, state) = final_state(test, train)?;
    let hist: BTreeMap<String, usize> = state.sample(&[layout.ancilla.start, layout.class.start], shots, rng)?;
    let kept_class0 = hist.get("00").copied().unwrap_or(0);
    let kept = kept_class0 + hist.get("01").copied().unwrap_or(0);
    Ok((kept_class0, kept))
}

/// Classifies `test` exactly or from `S` shots. Shots with ancilla 1 are
/// discarded, not re-run.
pub fn classify_quantum<R: Rng + ?Sized>(
    test: &PreparedState,
    train: &QuantumTrainingSet,
    mode: Mode,
    rng: &mut R,
) -> Result<ClassificationOutcome, ClassifierError> {
    match mode {
        Mode::Exact => {
            let p = exact_class_probability(test, train)?;
            Ok(ClassificationOutcome {
                p_class0: p,
                decision: Decision::from_probability(p),
                mode,
                shots_kept: 0,
                shots_total: 0,
            })
        }
        Mode::Shots(shots) => {
            let (class0, kept) = sample_post_selected(test, train, shots, rng)?;
            if kept == 0 {
                return Err(ClassifierError::Starvation { shots });
            }
            let p = class0 as f64 / kept as f64;
            Ok(ClassificationOutcome {
                p_class0: p,
                decision: Decision::from_probability(p),
                mode,
                shots_kept: kept,
                shots_total: shots,
            })
        }
    }
}

/// Euclidean distance of two adjacency vectors over raw entries. Each edge
/// counts once; the Frobenius norm of the full symmetric difference matrix
/// is `√2` times this.
pub fn frobenius_distance(a: &[f64], b: &[f64]) -> Result<f64, ClassifierError> {
    if a.len() != b.len() {
        return Err(ClassifierError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

/// `−sgn(Σ_m y_m d(test, G_m))` over raw vectors; "unknown" when the sum is
/// within `tolerance` of zero.
pub fn classify_by_distance<'a>(
    test: &[f64],
    train: impl IntoIterator<Item = (&'a [f64], ClassLabel)>,
    tolerance: f64,
) -> Result<Decision, ClassifierError> {
    let mut sum = 0.0;
    for (g, y) in train {
        sum += y.sign() * frobenius_distance(test, g)?;
    }
    Ok(if sum.abs() < tolerance {
        Decision::Unknown
    } else if sum < 0.0 {
        Decision::Plus
    } else {
        Decision::Minus
    })
}

pub fn classify_classical(test: &AdjacencyVector, train: &TrainingSet) -> Result<Decision, ClassifierError> {
    classify_by_distance(
        test.entries(),
        train.members().iter().map(|(g, y)| (g.entries(), *y)),
        CLASSICAL_TIE_TOLERANCE,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::run_prefix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn state(values: &[f64]) -> PreparedState {
        PreparedState::new(AmplitudeVector::normalize(values).unwrap()).unwrap()
    }

    fn pair(plus: &[f64], minus: &[f64]) -> QuantumTrainingSet {
        QuantumTrainingSet::new(vec![(state(plus), ClassLabel::Plus), (state(minus), ClassLabel::Minus)]).unwrap()
    }

    #[test]
    fn hand_evaluated_example() {
        // test = (1,0), +1 graph = (1,0), −1 graph = (0,1):
        // ‖t + g₊‖² = 4, ‖t + g₋‖² = 2, so p = 4 / 6 and p(a = 0) = 6 / 8.
        let t = state(&[1.0, 0.0]);
        let train = pair(&[1.0, 0.0], &[0.0, 1.0]);
        let p = exact_probabilities(&t, &train).unwrap();
        assert!((p.class0 - 4.0 / 6.0).abs() < 1e-12);
        assert!((p.ancilla0 - 0.75).abs() < 1e-12);
        let dist = distance_form_probability(t.state(), &amplitude_members(&train));
        assert!((dist - 4.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn one_minus_distance_ratio_disagrees_with_the_circuit() {
        // 1 − Σ_{+1} d² / Σ_m ‖t + g_m‖² gives 1 here, not 2/3.
        let t = AmplitudeVector::normalize(&[1.0, 0.0]).unwrap();
        let plus = AmplitudeVector::normalize(&[1.0, 0.0]).unwrap();
        let minus = AmplitudeVector::normalize(&[0.0, 1.0]).unwrap();
        let (_, total) = overlap_sums(&t, &[(&plus, ClassLabel::Plus), (&minus, ClassLabel::Minus)]);
        let alternative = 1.0 - 0.0 / total;
        assert_eq!(alternative, 1.0);
        let p = closed_form_probability(&t, &[(&plus, ClassLabel::Plus), (&minus, ClassLabel::Minus)]);
        assert!((alternative - p).abs() > 0.3);
    }

    #[test]
    fn equidistant_and_identical_training_give_one_half() {
        let t = state(&[1.0, 1.0]);
        let p = exact_class_probability(&t, &pair(&[1.0, 0.0], &[0.0, 1.0])).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let p = exact_class_probability(&state(&[0.3, 0.9]), &pair(&[2.0, 1.0], &[2.0, 1.0])).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn first_two_hadamards_give_the_uniform_product() {
        let t = state(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let layout = build_classifier_circuit(&t, &pair(&[1.0; 6], &[6.0, 5.0, 4.0, 3.0, 2.0, 1.0])).unwrap();
        let s = run_prefix(&layout.circuit, 2).unwrap();
        for (i, a) in s.amplitudes().iter().enumerate() {
            let expect = if i < 4 { 0.5 } else { 0.0 };
            assert!((a - Complex64::new(expect, 0.0)).norm() < 1e-15, "{i}: {a}");
        }
    }

    #[test]
    fn pre_interference_state_matches_the_superposition() {
        let t = state(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let train = pair(&[1.0, 0.0, 3.0, 0.0, 2.0, 7.0], &[6.0, 5.0, 4.0, 3.0, 2.0, 1.0]);
        let layout = build_classifier_circuit(&t, &train).unwrap();
        let s = run_prefix(&layout.circuit, layout.interference_at).unwrap();
        let expected = interference_state(&layout, t.state(), &train);
        for (x, y) in s.amplitudes().iter().zip(&expected) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn identical_graphs_interfere_perfectly() {
        let v = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0];
        let layout = build_classifier_circuit(&state(&v), &pair(&v, &v)).unwrap();
        let s = simulator::run(&layout.circuit).unwrap();
        assert!(s.probability(layout.ancilla.start, true).unwrap() < 1e-20);
    }

    #[test]
    fn qubit_count_for_two_training_graphs() {
        let t = state(&[1.0; 6]);
        let layout = build_classifier_circuit(&t, &pair(&[1.0; 6], &[2.0, 1.0, 1.0, 1.0, 1.0, 1.0])).unwrap();
        assert_eq!(layout.num_qubits(), 2 + 3 + 1);
        assert_eq!(layout.graph.len, 3);
    }

    #[test]
    fn reversed_label_order_wires_the_class_qubit() {
        let t = state(&[1.0, 0.2]);
        let a = pair(&[1.0, 0.0], &[0.0, 1.0]);
        let b = QuantumTrainingSet::new(vec![
            (state(&[0.0, 1.0]), ClassLabel::Minus),
            (state(&[1.0, 0.0]), ClassLabel::Plus),
        ])
        .unwrap();
        let pa = exact_class_probability(&t, &a).unwrap();
        let pb = exact_class_probability(&t, &b).unwrap();
        assert!((pa - pb).abs() < 1e-12);
    }

    #[test]
    fn larger_training_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for count in [3usize, 4, 5] {
            let members: Vec<_> = (0..count)
                .map(|k| {
                    let v: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
                    let y = if k % 2 == 0 { ClassLabel::Plus } else { ClassLabel::Minus };
                    (state(&v), y)
                })
                .collect();
            let train = QuantumTrainingSet::new(members).unwrap();
            let t = state(&(0..6).map(|_| rng.random::<f64>()).collect::<Vec<_>>());
            let layout = build_classifier_circuit(&t, &train).unwrap();
            let s = run_prefix(&layout.circuit, layout.interference_at).unwrap();
            let expected = interference_state(&layout, t.state(), &train);
            for (x, y) in s.amplitudes().iter().zip(&expected) {
                assert!((x - y).norm() < 1e-10, "M = {count}");
            }
            let p = exact_probabilities(&t, &train).unwrap();
            let a0 = ancilla_zero_probability(t.state(), &amplitude_members(&train));
            assert!((p.ancilla0 - a0).abs() < 1e-10);
        }
    }

    #[test]
    fn training_set_validation() {
        let v = AdjacencyVector::from_entries(vec![1.0, 2.0, 3.0]).unwrap();
        let w = AdjacencyVector::from_entries(vec![1.0; 6]).unwrap();
        assert_eq!(
            TrainingSet::new(vec![(v.clone(), ClassLabel::Plus)]),
            Err(ClassifierError::TooFewMembers(1))
        );
        assert_eq!(
            TrainingSet::new(vec![(v.clone(), ClassLabel::Plus), (v.clone(), ClassLabel::Plus)]),
            Err(ClassifierError::MissingLabel)
        );
        assert!(matches!(
            TrainingSet::pair(v.clone(), w),
            Err(ClassifierError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn decision_thresholds() {
        assert_eq!(Decision::from_probability(0.8), Decision::Plus);
        assert_eq!(Decision::from_probability(0.5), Decision::Unknown);
        assert_eq!(Decision::from_probability(0.5004), Decision::Unknown);
        assert_eq!(Decision::from_probability(0.4994), Decision::Minus);
        assert_eq!(Decision::from_probability(0.2), Decision::Minus);
    }

    #[test]
    fn exact_mode_outcome() {
        let t = state(&[1.0, 0.0]);
        let out = classify_quantum(&t, &pair(&[1.0, 0.0], &[0.0, 1.0]), Mode::Exact, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(out.decision, Decision::Plus);
        assert_eq!((out.shots_kept, out.shots_total), (0, 0));
        let json = serde_json::to_value(out).unwrap();
        assert_eq!(json["decision"], "+1");
        assert_eq!(json["mode"], "exact");
        assert!(json["p"].as_f64().unwrap() > 0.66);
    }

    #[test]
    fn shots_track_the_exact_probability() {
        // p = (1 + cos)² terms chosen so the exact value is near 0.7.
        let t = state(&[1.0, 0.0]);
        let train = pair(&[1.0, 0.0], &[0.0, 1.0]);
        let exact = exact_class_probability(&t, &train).unwrap();
        let out = classify_quantum(&t, &train, Mode::Shots(4096), &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let sigma = (exact * (1.0 - exact) / out.shots_kept as f64).sqrt();
        assert!((out.p_class0 - exact).abs() < 4.0 * sigma);
        assert_eq!(out.decision, Decision::Plus);
        assert_eq!(out.shots_total, 4096);
        assert!(out.shots_kept < 4096);
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(frobenius_distance(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(frobenius_distance(&[0.0, 3.0], &[4.0, 0.0]).unwrap(), 5.0);
        assert!(frobenius_distance(&[0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn classical_rule() {
        let v = |e: Vec<f64>| AdjacencyVector::from_entries(e).unwrap();
        let train = TrainingSet::pair(v(vec![1.0, 1.0, 1.0]), v(vec![5.0, 5.0, 5.0])).unwrap();
        assert_eq!(classify_classical(&v(vec![1.5, 1.0, 1.0]), &train).unwrap(), Decision::Plus);
        assert_eq!(classify_classical(&v(vec![4.0, 5.0, 5.0]), &train).unwrap(), Decision::Minus);
        assert_eq!(classify_classical(&v(vec![3.0, 3.0, 3.0]), &train).unwrap(), Decision::Unknown);
    }
}
