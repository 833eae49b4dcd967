//! Evaluation protocol: items of the form (test, sad, happy), classification
//! against one training pair or by majority vote over all pairs, and the
//! accuracy sweep over vertex counts, strategies and backends.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{
    self, classify_by_distance, ClassificationOutcome, ClassifierError, Decision, LabelWiring, Mode, PreparedState,
    QuantumTrainingSet, CLASSICAL_TIE_TOLERANCE,
};
use crate::graphs::{adjacency_vector, AdjacencyVector, GraphError, Strategy};
use crate::landmarks::{extract_mouth, Expression, LandmarkError, PointCloud, VertexSelection, MIN_VERTICES, MOUTH_POINTS};
use crate::rng::{self, DEFAULT_SEED};

pub const DEFAULT_N_VALUES: [usize; 9] = [4, 6, 8, 10, 12, 14, 16, 18, 20];
pub const DEFAULT_SUBSETS: usize = 20;
pub const DEFAULT_TEST_FACES: usize = 10;
pub const DEFAULT_TRAINING_PAIRS: usize = 25;

// Stream tags keep the plan, subset and item streams apart.
const PLAN_STREAM: u64 = 1;
const SUBSET_STREAM: u64 = 2;
const ITEM_STREAM: u64 = 3;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid dataset: {0}")]
    Dataset(String),
    #[error(transparent)]
    Landmark(#[from] LandmarkError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error("{item}: {source}")]
    Item {
        item: ItemId,
        source: Box<ExperimentError>,
        /// Statistics over every subset that finished before the failure.
        partial: Box<ExperimentReport>,
    },
}

/// How an item is classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Frobenius distances between raw adjacency vectors.
    Classical,
    /// Frobenius distances between unit-normalized adjacency vectors.
    ClassicalNormalized,
    /// Simulated circuit, exact post-selected probability.
    QuantumExact,
    /// Simulated circuit, estimated from shots.
    QuantumShots,
}

impl Backend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Backend::Classical => "classical",
            Backend::ClassicalNormalized => "classical-normalized",
            Backend::QuantumExact => "quantum-exact",
            Backend::QuantumShots => "quantum-shots",
        }
    }

    pub fn is_quantum(&self) -> bool {
        matches!(self, Backend::QuantumExact | Backend::QuantumShots)
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('_', "-").as_str() {
            "classical" => Ok(Backend::Classical),
            "classical-normalized" => Ok(Backend::ClassicalNormalized),
            "quantum-exact" => Ok(Backend::QuantumExact),
            "quantum-shots" => Ok(Backend::QuantumShots),
            _ => Err(format!(
                "unknown backend `{s}` (expected classical, quantum-exact or quantum-shots)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prediction {
    Happy,
    Sad,
    Unknown,
}

impl Prediction {
    pub fn from_decision(decision: Decision, wiring: LabelWiring) -> Self {
        match decision.label().map(|l| wiring.expression(l)) {
            Some(Expression::Happy) => Prediction::Happy,
            Some(Expression::Sad) => Prediction::Sad,
            None => Prediction::Unknown,
        }
    }

    pub fn is(&self, label: Expression) -> bool {
        matches!(
            (self, label),
            (Prediction::Happy, Expression::Happy) | (Prediction::Sad, Expression::Sad)
        )
    }
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Prediction::Happy => "happy",
            Prediction::Sad => "sad",
            Prediction::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_values: Vec<usize>,
    pub subsets_per_n: usize,
    pub test_faces: usize,
    pub training_pairs: usize,
    pub shots: usize,
    pub backends: Vec<Backend>,
    pub strategies: Vec<Strategy>,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_values: DEFAULT_N_VALUES.to_vec(),
            subsets_per_n: DEFAULT_SUBSETS,
            test_faces: DEFAULT_TEST_FACES,
            training_pairs: DEFAULT_TRAINING_PAIRS,
            shots: classifier::DEFAULT_SHOTS,
            backends: vec![Backend::Classical],
            strategies: vec![Strategy::Complete],
            seed: DEFAULT_SEED,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let fail = |m: String| Err(ExperimentError::Config(m));
        for (name, value) in [
            ("subsets", self.subsets_per_n),
            ("test faces", self.test_faces),
            ("training pairs", self.training_pairs),
            ("shots", self.shots),
        ] {
            if value == 0 {
                return fail(format!("{name} must be at least 1"));
            }
        }
        if self.n_values.is_empty() || self.backends.is_empty() || self.strategies.is_empty() {
            return fail("n values, backends and strategies must be non-empty".into());
        }
        if let Some(n) = self.n_values.iter().find(|n| !(MIN_VERTICES..=MOUTH_POINTS).contains(n)) {
            return fail(format!("n = {n} outside [{MIN_VERTICES}, {MOUTH_POINTS}]"));
        }
        Ok(())
    }

    /// Subsets drawn for `n`; with every mouth point there is only one.
    pub fn subsets_for(&self, n: usize) -> usize {
        if n == MOUTH_POINTS {
            1
        } else {
            self.subsets_per_n
        }
    }

    fn needs_quantum(&self) -> bool {
        self.backends.iter().any(Backend::is_quantum)
    }
}

/// Labeled mouth clouds.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    mouths: Vec<PointCloud>,
}

impl Dataset {
    /// Accepts full faces (the mouth is cut out) or mouth clouds.
    pub fn from_faces(faces: &[PointCloud]) -> Result<Self, ExperimentError> {
        let mouths = faces
            .iter()
            .map(|f| if f.len() == MOUTH_POINTS { Ok(f.clone()) } else { extract_mouth(f) })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { mouths })
    }

    pub fn mouths(&self) -> &[PointCloud] {
        &self.mouths
    }

    pub fn labels(&self) -> Vec<Expression> {
        self.mouths.iter().map(PointCloud::label).collect()
    }

    pub fn len(&self) -> usize {
        self.mouths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mouths.is_empty()
    }
}

/// Test faces and `(sad, happy)` training pairs, all indices into a dataset.
/// A face used for testing never appears in a training pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemPlan {
    pub tests: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
}

impl ItemPlan {
    pub fn new(labels: &[Expression], tests: Vec<usize>, pairs: Vec<(usize, usize)>) -> Result<Self, ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Dataset(m));
        if tests.is_empty() || pairs.is_empty() {
            return bad("a plan needs at least one test face and one pair".into());
        }
        for &i in tests.iter().chain(pairs.iter().flat_map(|(s, h)| [s, h])) {
            if i >= labels.len() {
                return bad(format!("face index {i} out of range for {} faces", labels.len()));
            }
        }
        for &(s, h) in &pairs {
            if labels[s] != Expression::Sad || labels[h] != Expression::Happy {
                return bad(format!("pair ({s}, {h}) is not (sad, happy)"));
            }
            if tests.contains(&s) || tests.contains(&h) {
                return bad(format!("pair ({s}, {h}) reuses a test face"));
            }
        }
        Ok(Self { tests, pairs })
    }

    /// Draws `test_faces` tests uniformly, then `pairs` distinct `(sad, happy)`
    /// pairs from the remaining faces.
    pub fn sample<R: Rng + ?Sized>(
        labels: &[Expression],
        test_faces: usize,
        pairs: usize,
        rng: &mut R,
    ) -> Result<Self, ExperimentError> {
        if test_faces >= labels.len() {
            return Err(ExperimentError::Dataset(format!(
                "{test_faces} test faces leave no training faces among {}",
                labels.len()
            )));
        }
        let mut tests = index::sample(rng, labels.len(), test_faces).into_vec();
        tests.sort_unstable();
        let rest = |e| (0..labels.len()).filter(|i| labels[*i] == e && !tests.contains(i)).collect::<Vec<_>>();
        let (sad, happy) = (rest(Expression::Sad), rest(Expression::Happy));
        let available = sad.len() * happy.len();
        if available < pairs {
            return Err(ExperimentError::Dataset(format!(
                "only {available} (sad, happy) pairs remain after drawing test faces, {pairs} requested"
            )));
        }
        let mut chosen: Vec<(usize, usize)> = index::sample(rng, available, pairs)
            .into_iter()
            .map(|k| (sad[k / happy.len()], happy[k % happy.len()]))
            .collect();
        chosen.sort_unstable();
        Self::new(labels, tests, chosen)
    }

    pub fn item_count(&self) -> usize {
        self.tests.len() * self.pairs.len()
    }

    /// Every face the plan touches, ascending.
    pub fn faces(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self
            .tests
            .iter()
            .copied()
            .chain(self.pairs.iter().flat_map(|&(s, h)| [s, h]))
            .collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

/// One face reduced to a graph, in every form a backend may need.
#[derive(Debug, Clone)]
pub struct FaceGraph {
    pub label: Expression,
    pub vector: AdjacencyVector,
    pub normalized: Vec<f64>,
    pub prepared: Option<PreparedState>,
}

impl FaceGraph {
    pub fn build(
        mouth: &PointCloud,
        selection: &VertexSelection,
        strategy: Strategy,
        quantum: bool,
    ) -> Result<Self, ExperimentError> {
        let cloud = selection.apply(mouth)?;
        let vector = adjacency_vector(&strategy.build(&cloud)?);
        let state = crate::encoding::encode(&vector).map_err(ClassifierError::from)?;
        let normalized = state.real()[..vector.len()].to_vec();
        let prepared = if quantum { Some(PreparedState::new(state)?) } else { None };
        Ok(Self {
            label: cloud.label(),
            vector,
            normalized,
            prepared,
        })
    }

    fn prepared(&self) -> Result<&PreparedState, ExperimentError> {
        self.prepared
            .as_ref()
            .ok_or_else(|| ExperimentError::Config("quantum backend on a graph built without its circuit".into()))
    }
}

/// A `(sad, happy)` training pair with its encoded training set, when needed.
pub struct TrainingPair<'a> {
    pub sad: &'a FaceGraph,
    pub happy: &'a FaceGraph,
    quantum: Option<QuantumTrainingSet>,
}

impl<'a> TrainingPair<'a> {
    pub fn new(sad: &'a FaceGraph, happy: &'a FaceGraph, quantum: bool) -> Result<Self, ExperimentError> {
        let wiring = LabelWiring::default();
        let quantum = if quantum {
            Some(QuantumTrainingSet::new(vec![
                (happy.prepared()?.clone(), wiring.label(Expression::Happy)),
                (sad.prepared()?.clone(), wiring.label(Expression::Sad)),
            ])?)
        } else {
            None
        };
        Ok(Self { sad, happy, quantum })
    }

    pub fn quantum_set(&self) -> Option<&QuantumTrainingSet> {
        self.quantum.as_ref()
    }

    /// Full outcome of the circuit for `test`, with the probability behind
    /// the decision.
    pub fn quantum_outcome<R: Rng + ?Sized>(
        &self,
        test: &FaceGraph,
        mode: Mode,
        rng: &mut R,
    ) -> Result<ClassificationOutcome, ExperimentError> {
        let train = self
            .quantum
            .as_ref()
            .ok_or_else(|| ExperimentError::Config("training pair built without circuits".into()))?;
        Ok(classifier::classify_quantum(test.prepared()?, train, mode, rng)?)
    }

    pub fn classify<R: Rng + ?Sized>(
        &self,
        test: &FaceGraph,
        backend: Backend,
        shots: usize,
        rng: &mut R,
    ) -> Result<Prediction, ExperimentError> {
        let wiring = LabelWiring::default();
        let decision = match backend {
            Backend::Classical | Backend::ClassicalNormalized => {
                let pick = |g: &'a FaceGraph| -> &'a [f64] {
                    if backend == Backend::Classical {
                        g.vector.entries()
                    } else {
                        &g.normalized
                    }
                };
                let t = if backend == Backend::Classical { test.vector.entries() } else { &test.normalized[..] };
                classify_by_distance(
                    t,
                    [
                        (pick(self.happy), wiring.label(Expression::Happy)),
                        (pick(self.sad), wiring.label(Expression::Sad)),
                    ],
                    CLASSICAL_TIE_TOLERANCE,
                )?
            }
            Backend::QuantumExact | Backend::QuantumShots => {
                let mode = if backend == Backend::QuantumExact { Mode::Exact } else { Mode::Shots(shots) };
                self.quantum_outcome(test, mode, rng)?.decision
            }
        };
        Ok(Prediction::from_decision(decision, wiring))
    }
}

/// Classifies `test` as the nearer of `sad` and `happy`; "unknown" inside the
/// backend's tie band.
pub fn classify_wrt_single_face<R: Rng + ?Sized>(
    test: &FaceGraph,
    sad: &FaceGraph,
    happy: &FaceGraph,
    backend: Backend,
    shots: usize,
    rng: &mut R,
) -> Result<Prediction, ExperimentError> {
    TrainingPair::new(sad, happy, backend.is_quantum())?.classify(test, backend, shots, rng)
}

/// Majority vote over per-pair predictions. Every non-happy prediction,
/// unknown included, counts for sad; a tied count is unknown.
pub fn whole_set_vote(predictions: &[Prediction]) -> Prediction {
    let happy = predictions.iter().filter(|p| **p == Prediction::Happy).count();
    let sad = predictions.len() - happy;
    match happy.cmp(&sad) {
        std::cmp::Ordering::Greater => Prediction::Happy,
        std::cmp::Ordering::Less => Prediction::Sad,
        std::cmp::Ordering::Equal => Prediction::Unknown,
    }
}

/// Correct, unknown and total counts. Unknown counts as wrong.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub correct: usize,
    pub unknown: usize,
    pub total: usize,
}

impl Tally {
    pub fn record(&mut self, prediction: Prediction, truth: Expression) {
        self.total += 1;
        if prediction.is(truth) {
            self.correct += 1;
        } else if prediction == Prediction::Unknown {
            self.unknown += 1;
        }
    }

    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }

    pub fn unknown_rate(&self) -> f64 {
        self.unknown as f64 / self.total as f64
    }
}

/// Which `(n, subset)` a stream belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    pub seed: u64,
    pub n: usize,
    pub subset: usize,
}

impl StreamKey {
    pub fn item_rng(&self, item: usize) -> rand_chacha::ChaCha8Rng {
        rng::stream(&[self.seed, ITEM_STREAM, self.n as u64, self.subset as u64, item as u64])
    }
}

/// Face graphs for one vertex selection and strategy, by dataset index.
#[derive(Debug, Clone)]
pub struct GraphSet {
    graphs: Vec<Option<FaceGraph>>,
}

impl GraphSet {
    /// Builds graphs for `faces` only; returns the failing face on error.
    pub fn build(
        dataset: &Dataset,
        faces: &[usize],
        selection: &VertexSelection,
        strategy: Strategy,
        quantum: bool,
    ) -> Result<Self, (usize, ExperimentError)> {
        let mut graphs = vec![None; dataset.len()];
        for &f in faces {
            graphs[f] = Some(FaceGraph::build(&dataset.mouths()[f], selection, strategy, quantum).map_err(|e| (f, e))?);
        }
        Ok(Self { graphs })
    }

    pub fn get(&self, face: usize) -> &FaceGraph {
        self.graphs[face].as_ref().expect("graph built for every planned face")
    }
}

/// Per-item predictions for a plan, `decisions[t][p]` for test `t` and pair `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub decisions: Vec<Vec<Prediction>>,
    pub single: Tally,
    pub whole_set: Tally,
}

/// Where an item failure happened.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ItemId {
    pub n: usize,
    pub subset: usize,
    pub strategy: Strategy,
    pub backend: Option<Backend>,
    pub face: usize,
    pub pair: Option<(usize, usize)>,
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n = {}, subset {}, {}", self.n, self.subset, self.strategy)?;
        if let Some(b) = self.backend {
            write!(f, ", {b}")?;
        }
        write!(f, ", face {}", self.face)?;
        if let Some((s, h)) = self.pair {
            write!(f, " vs pair (sad {s}, happy {h})")?;
        }
        Ok(())
    }
}

/// A test face and, when the failure is pair-specific, the training pair.
pub type ItemRef = (usize, Option<(usize, usize)>);

/// Classifies every `(test, pair)` item of `plan` in parallel. On failure,
/// returns the first failing item in plan order.
pub fn evaluate(
    graphs: &GraphSet,
    plan: &ItemPlan,
    backend: Backend,
    shots: usize,
    key: StreamKey,
) -> Result<Evaluation, (ItemRef, ExperimentError)> {
    let pairs = plan
        .pairs
        .iter()
        .map(|&(s, h)| TrainingPair::new(graphs.get(s), graphs.get(h), backend.is_quantum()).map_err(|e| ((s, Some((s, h))), e)))
        .collect::<Result<Vec<_>, _>>()?;
    let per_item: Vec<Result<Prediction, ExperimentError>> = (0..plan.item_count())
        .into_par_iter()
        .map(|item| {
            let (t, p) = (item / plan.pairs.len(), item % plan.pairs.len());
            pairs[p].classify(graphs.get(plan.tests[t]), backend, shots, &mut key.item_rng(item))
        })
        .collect();

    let mut decisions = vec![Vec::with_capacity(plan.pairs.len()); plan.tests.len()];
    for (item, result) in per_item.into_iter().enumerate() {
        let (t, p) = (item / plan.pairs.len(), item % plan.pairs.len());
        let prediction = result.map_err(|e| ((plan.tests[t], Some(plan.pairs[p])), e))?;
        decisions[t].push(prediction);
    }

    let mut single = Tally::default();
    let mut whole_set = Tally::default();
    for (t, row) in decisions.iter().enumerate() {
        let truth = graphs.get(plan.tests[t]).label;
        for &d in row {
            single.record(d, truth);
        }
        whole_set.record(whole_set_vote(row), truth);
    }
    Ok(Evaluation {
        decisions,
        single,
        whole_set,
    })
}

/// Single-face accuracy over every item of `plan`.
pub fn accuracy_wrt_single_face(
    graphs: &GraphSet,
    plan: &ItemPlan,
    backend: Backend,
    shots: usize,
    key: StreamKey,
) -> Result<Tally, ExperimentError> {
    evaluate(graphs, plan, backend, shots, key).map(|e| e.single).map_err(|(_, e)| e)
}

/// Whole-set accuracy: one vote over all pairs per test face.
pub fn accuracy_whole_set(
    graphs: &GraphSet,
    plan: &ItemPlan,
    backend: Backend,
    shots: usize,
    key: StreamKey,
) -> Result<Tally, ExperimentError> {
    evaluate(graphs, plan, backend, shots, key).map(|e| e.whole_set).map_err(|(_, e)| e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Self {
        Self {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Accuracy of one subset under one strategy and backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsetResult {
    pub n: usize,
    pub subset: usize,
    pub strategy: Strategy,
    pub backend: Backend,
    pub single: Tally,
    pub whole_set: Tally,
}

/// Statistics for one `(n, strategy, backend)` over all subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub n: usize,
    pub strategy: Strategy,
    pub backend: Backend,
    pub subsets: usize,
    /// Items per subset.
    pub item_count: usize,
    pub accuracy_single: Stats,
    pub accuracy_whole_set: Stats,
    /// Share of single-face items answered "unknown", over all subsets.
    pub unknown_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub plan: ItemPlan,
    pub cells: Vec<ReportCell>,
    pub subsets: Vec<SubsetResult>,
}

impl ExperimentReport {
    fn assemble(config: &ExperimentConfig, plan: &ItemPlan, subsets: Vec<SubsetResult>) -> Self {
        let mut cells = Vec::new();
        for &n in &config.n_values {
            for &strategy in &config.strategies {
                for &backend in &config.backends {
                    let rows: Vec<&SubsetResult> = subsets
                        .iter()
                        .filter(|r| r.n == n && r.strategy == strategy && r.backend == backend)
                        .collect();
                    if rows.is_empty() {
                        continue;
                    }
                    let single: Vec<f64> = rows.iter().map(|r| r.single.accuracy()).collect();
                    let whole: Vec<f64> = rows.iter().map(|r| r.whole_set.accuracy()).collect();
                    let unknown = rows.iter().map(|r| r.single.unknown).sum::<usize>() as f64
                        / rows.iter().map(|r| r.single.total).sum::<usize>() as f64;
                    cells.push(ReportCell {
                        n,
                        strategy,
                        backend,
                        subsets: rows.len(),
                        item_count: plan.item_count(),
                        accuracy_single: Stats::of(&single),
                        accuracy_whole_set: Stats::of(&whole),
                        unknown_rate: unknown,
                    });
                }
            }
        }
        Self {
            config: config.clone(),
            plan: plan.clone(),
            cells,
            subsets,
        }
    }

    pub fn cell(&self, n: usize, strategy: Strategy, backend: Backend) -> Option<&ReportCell> {
        self.cells
            .iter()
            .find(|c| c.n == n && c.strategy == strategy && c.backend == backend)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per `(n, strategy, backend)`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "n",
            "strategy",
            "backend",
            "subsets",
            "item_count",
            "single_mean",
            "single_min",
            "single_max",
            "whole_set_mean",
            "whole_set_min",
            "whole_set_max",
            "unknown_rate",
        ])?;
        for c in &self.cells {
            let (s, g) = (c.accuracy_single, c.accuracy_whole_set);
            w.write_record([
                c.n.to_string(),
                c.strategy.to_string(),
                c.backend.to_string(),
                c.subsets.to_string(),
                c.item_count.to_string(),
                format!("{:.6}", s.mean),
                format!("{:.6}", s.min),
                format!("{:.6}", s.max),
                format!("{:.6}", g.mean),
                format!("{:.6}", g.min),
                format!("{:.6}", g.max),
                format!("{:.6}", c.unknown_rate),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Fixed-width summary for terminals.
    pub fn summary_table(&self) -> String {
        let mut out = format!(
            "{:>3}  {:<9} {:<21} {:>7} {:>7} {:>7}  {:>7} {:>7} {:>7}  {:>7}\n",
            "n", "strategy", "backend", "single", "min", "max", "whole", "min", "max", "unknown"
        );
        for c in &self.cells {
            let (s, g) = (c.accuracy_single, c.accuracy_whole_set);
            out.push_str(&format!(
                "{:>3}  {:<9} {:<21} {:>7.3} {:>7.3} {:>7.3}  {:>7.3} {:>7.3} {:>7.3}  {:>7.3}\n",
                c.n,
                c.strategy.as_str(),
                c.backend.as_str(),
                s.mean,
                s.min,
                s.max,
                g.mean,
                g.min,
                g.max,
                c.unknown_rate
            ));
        }
        out
    }
}

/// Vertex selection for subset `subset` at size `n`, shared by all faces,
/// strategies and backends.
pub fn subset_selection(seed: u64, n: usize, subset: usize) -> Result<VertexSelection, ExperimentError> {
    let mut rng = rng::stream(&[seed, SUBSET_STREAM, n as u64, subset as u64]);
    Ok(VertexSelection::sample(n, &mut rng)?)
}

/// The item plan a run with `config` uses on `dataset`.
pub fn plan_items(config: &ExperimentConfig, dataset: &Dataset) -> Result<ItemPlan, ExperimentError> {
    let mut rng = rng::stream(&[config.seed, PLAN_STREAM]);
    ItemPlan::sample(&dataset.labels(), config.test_faces, config.training_pairs, &mut rng)
}

type JobFailure = Box<(ItemId, ExperimentError)>;

fn run_job(
    config: &ExperimentConfig,
    dataset: &Dataset,
    plan: &ItemPlan,
    faces: &[usize],
    n: usize,
    subset: usize,
) -> Result<Vec<SubsetResult>, JobFailure> {
    let job_failure = |strategy, backend, face, pair, e| {
        Box::new((
            ItemId {
                n,
                subset,
                strategy,
                backend,
                face,
                pair,
            },
            e,
        ))
    };
    let selection = subset_selection(config.seed, n, subset)
        .map_err(|e| job_failure(config.strategies[0], None, faces[0], None, e))?;
    let key = StreamKey {
        seed: config.seed,
        n,
        subset,
    };
    let mut results = Vec::new();
    for &strategy in &config.strategies {
        let graphs = GraphSet::build(dataset, faces, &selection, strategy, config.needs_quantum())
            .map_err(|(face, e)| job_failure(strategy, None, face, None, e))?;
        for &backend in &config.backends {
            let eval = evaluate(&graphs, plan, backend, config.shots, key)
                .map_err(|((face, pair), e)| job_failure(strategy, Some(backend), face, pair, e))?;
            results.push(SubsetResult {
                n,
                subset,
                strategy,
                backend,
                single: eval.single,
                whole_set: eval.whole_set,
            });
        }
    }
    Ok(results)
}

/// Runs the whole sweep. Output depends only on `config` and `dataset`.
///
/// If an item fails, the error names it and carries a report over every
/// `(n, subset)` job that completed.
pub fn run_experiment(config: &ExperimentConfig, dataset: &Dataset) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    for label in [Expression::Happy, Expression::Sad] {
        if !dataset.labels().contains(&label) {
            return Err(ExperimentError::Dataset(format!("no {label} faces")));
        }
    }
    let plan = plan_items(config, dataset)?;
    let faces = plan.faces();

    let jobs: Vec<(usize, usize)> = config
        .n_values
        .iter()
        .flat_map(|&n| (0..config.subsets_for(n)).map(move |s| (n, s)))
        .collect();
    let outcomes: Vec<Result<Vec<SubsetResult>, JobFailure>> = jobs
        .par_iter()
        .map(|&(n, s)| run_job(config, dataset, &plan, &faces, n, s))
        .collect();

    let mut done = Vec::new();
    let mut failure = None;
    for outcome in outcomes {
        match outcome {
            Ok(rows) => done.extend(rows),
            Err(f) => {
                failure.get_or_insert(f);
            }
        }
    }
    let report = ExperimentReport::assemble(config, &plan, done);
    match failure {
        None => Ok(report),
        Some(failure) => {
            let (item, source) = *failure;
            log::error!("item failed: {item}: {source}");
            Err(ExperimentError::Item {
                item,
                source: Box::new(source),
                partial: Box::new(report),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landmarks::synthesize_face;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dataset(per_class: usize, noise: f64, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let faces: Vec<PointCloud> = [Expression::Happy, Expression::Sad]
            .iter()
            .flat_map(|&e| (0..per_class).map(move |_| e))
            .map(|e| synthesize_face(e, noise, &mut rng).unwrap())
            .collect();
        Dataset::from_faces(&faces).unwrap()
    }

    fn graphs(data: &Dataset, n: usize, strategy: Strategy, quantum: bool) -> GraphSet {
        let all: Vec<usize> = (0..data.len()).collect();
        let sel = subset_selection(7, n, 0).unwrap();
        GraphSet::build(data, &all, &sel, strategy, quantum).unwrap()
    }

    fn key() -> StreamKey {
        StreamKey { seed: 1, n: 0, subset: 0 }
    }

    #[test]
    fn test_equal_to_happy_training_graph_is_happy() {
        let data = dataset(3, 2.0, 1);
        let g = graphs(&data, 8, Strategy::Complete, true);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for backend in [Backend::Classical, Backend::ClassicalNormalized, Backend::QuantumExact] {
            let p = classify_wrt_single_face(g.get(0), g.get(3), g.get(0), backend, 1, &mut rng).unwrap();
            assert_eq!(p, Prediction::Happy, "{backend}");
            let p = classify_wrt_single_face(g.get(4), g.get(4), g.get(1), backend, 1, &mut rng).unwrap();
            assert_eq!(p, Prediction::Sad, "{backend}");
        }
    }

    #[test]
    fn equidistant_is_unknown() {
        let data = dataset(1, 0.0, 1);
        let g = graphs(&data, 6, Strategy::Meshed, true);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // identical training graphs: both distances agree exactly
        for backend in [Backend::Classical, Backend::QuantumExact] {
            let p = classify_wrt_single_face(g.get(1), g.get(0), g.get(0), backend, 1, &mut rng).unwrap();
            assert_eq!(p, Prediction::Unknown);
        }
    }

    #[test]
    fn votes() {
        use Prediction::*;
        assert_eq!(whole_set_vote(&[Happy, Happy, Sad]), Happy);
        assert_eq!(whole_set_vote(&[Happy, Sad]), Unknown);
        assert_eq!(whole_set_vote(&[Happy, Unknown]), Unknown);
        assert_eq!(whole_set_vote(&[Unknown, Unknown, Happy]), Sad);
    }

    #[test]
    fn vote_matches_a_recount() {
        let data = dataset(8, 6.0, 3);
        let g = graphs(&data, 6, Strategy::Meshed, false);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let plan = ItemPlan::sample(&data.labels(), 5, 12, &mut rng).unwrap();
        let eval = evaluate(&g, &plan, Backend::Classical, 1, key()).unwrap();
        let mut whole = Tally::default();
        for (t, row) in eval.decisions.iter().enumerate() {
            let happy = row.iter().filter(|p| **p == Prediction::Happy).count();
            let sad = row.len() - happy;
            let vote = if happy > sad {
                Prediction::Happy
            } else if sad > happy {
                Prediction::Sad
            } else {
                Prediction::Unknown
            };
            whole.record(vote, data.labels()[plan.tests[t]]);
        }
        assert_eq!(whole, eval.whole_set);
    }

    #[test]
    fn noise_free_faces_are_always_right() {
        let data = dataset(4, 0.0, 0);
        let plan = ItemPlan::sample(&data.labels(), 2, 4, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        for strategy in Strategy::ALL {
            let g = graphs(&data, 10, strategy, false);
            let eval = evaluate(&g, &plan, Backend::Classical, 1, key()).unwrap();
            assert_eq!(eval.single.accuracy(), 1.0);
            assert_eq!(eval.whole_set.accuracy(), 1.0);
        }
    }

    #[test]
    fn single_item_plan_reduces_to_one_call() {
        let data = dataset(3, 4.0, 9);
        let g = graphs(&data, 12, Strategy::Complete, false);
        let plan = ItemPlan::new(&data.labels(), vec![0], vec![(4, 1)]).unwrap();
        let eval = evaluate(&g, &plan, Backend::Classical, 1, key()).unwrap();
        let direct = classify_wrt_single_face(g.get(0), g.get(4), g.get(1), Backend::Classical, 1, &mut key().item_rng(0)).unwrap();
        assert_eq!(eval.decisions, vec![vec![direct]]);
        assert_eq!(eval.single.accuracy(), eval.whole_set.accuracy());
    }

    #[test]
    fn shuffled_labels_give_chance_accuracy() {
        // Labels assigned independently of the geometry: the classifier can
        // only be right by chance. Bound: 4σ of a fair binomial.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let faces: Vec<PointCloud> = (0..40)
            .map(|_| {
                let shape = if rng.random() { Expression::Happy } else { Expression::Sad };
                let label = if rng.random() { Expression::Happy } else { Expression::Sad };
                let f = synthesize_face(shape, 3.0, &mut rng).unwrap();
                PointCloud::new(f.points().to_vec(), label).unwrap()
            })
            .collect();
        let data = Dataset::from_faces(&faces).unwrap();
        let mut correct = 0;
        let mut total = 0;
        let mut tests = 0;
        for s in 0..8 {
            let plan = ItemPlan::sample(&data.labels(), 10, 25, &mut rng::stream(&[s, 99])).unwrap();
            let g = graphs(&data, 10, Strategy::Complete, false);
            let eval = evaluate(&g, &plan, Backend::Classical, 1, key()).unwrap();
            correct += eval.single.correct;
            total += eval.single.total;
            tests += plan.tests.len();
        }
        let acc = correct as f64 / total as f64;
        // Items sharing a test face are correlated, so count test faces, not
        // items, as the independent trials.
        let sigma = (0.25 / tests as f64).sqrt();
        assert!((acc - 0.5).abs() < 4.0 * sigma, "{acc}");
    }

    #[test]
    fn plans_are_disjoint_and_validated() {
        let data = dataset(6, 1.0, 2);
        let labels = data.labels();
        let plan = ItemPlan::sample(&labels, 4, 10, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(plan.item_count(), 40);
        for &(s, h) in &plan.pairs {
            assert_eq!(labels[s], Expression::Sad);
            assert_eq!(labels[h], Expression::Happy);
            assert!(!plan.tests.contains(&s) && !plan.tests.contains(&h));
        }
        assert!(ItemPlan::sample(&labels, 4, 1000, &mut ChaCha8Rng::seed_from_u64(3)).is_err());
        assert!(ItemPlan::new(&labels, vec![0], vec![(0, 1)]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let c = ExperimentConfig { n_values: vec![2], ..ExperimentConfig::default() };
        assert!(c.validate().is_err());
        let c = ExperimentConfig { shots: 0, ..ExperimentConfig::default() };
        assert!(c.validate().is_err());
        assert_eq!(ExperimentConfig::default().subsets_for(20), 1);
        assert_eq!(ExperimentConfig::default().subsets_for(18), 20);
    }

    #[test]
    fn small_run_is_deterministic_and_well_formed() {
        let data = dataset(10, 2.4, 5);
        let config = ExperimentConfig {
            n_values: vec![4, 20],
            subsets_per_n: 3,
            test_faces: 4,
            training_pairs: 5,
            backends: vec![Backend::Classical, Backend::QuantumShots],
            strategies: Strategy::ALL.to_vec(),
            shots: 256,
            ..ExperimentConfig::default()
        };
        let a = run_experiment(&config, &data).unwrap();
        let b = run_experiment(&config, &data).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.cells.len(), 2 * 2 * 2);
        let full = a.cell(20, Strategy::Meshed, Backend::Classical).unwrap();
        assert_eq!(full.subsets, 1);
        assert_eq!(full.accuracy_single.min, full.accuracy_single.max);
        assert_eq!(full.item_count, 20);
        let mut csv = Vec::new();
        a.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 9);
    }

    #[test]
    fn backend_names_round_trip() {
        for b in [Backend::Classical, Backend::ClassicalNormalized, Backend::QuantumExact, Backend::QuantumShots] {
            assert_eq!(b.as_str().parse::<Backend>().unwrap(), b);
            assert_eq!(serde_json::to_value(b).unwrap(), b.as_str());
        }
        assert_eq!("quantum_exact".parse::<Backend>().unwrap(), Backend::QuantumExact);
        assert!("quantum".parse::<Backend>().is_err());
    }
}
