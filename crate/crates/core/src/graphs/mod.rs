//! Weighted graphs over landmark point clouds and their adjacency vectors.
//!
//! Vertices are 0-based in memory. [`edge_index`] keeps the 1-based
//! convention of the upper-triangle enumeration `a12, a13, .., a1n, a23, ..`.

pub mod delaunay;
pub mod predicates;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::landmarks::{Point, PointCloud};

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("all points are collinear")]
    Collinear,
    #[error("points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),
    #[error("edge index needs 1 <= i < j <= n, got i={i}, j={j}, n={n}")]
    EdgeIndex { i: usize, j: usize, n: usize },
    #[error("adjacency vector of length {len} does not match any vertex count")]
    VectorLength { len: usize },
    #[error("weight matrix is not a valid {n}x{n} adjacency matrix: {reason}")]
    InvalidMatrix { n: usize, reason: String },
}

/// Symmetric, non-negative weight matrix with a zero diagonal. A zero
/// off-diagonal weight means "no edge".
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    weights: Vec<f64>,
}

impl WeightedGraph {
    /// Validates and wraps a row-major `n × n` matrix.
    pub fn from_matrix(n: usize, weights: Vec<f64>) -> Result<Self, GraphError> {
        let invalid = |reason: &str| GraphError::InvalidMatrix {
            n,
            reason: reason.to_string(),
        };
        if weights.len() != n * n {
            return Err(invalid("wrong entry count"));
        }
        for i in 0..n {
            if weights[i * n + i] != 0.0 {
                return Err(invalid("non-zero diagonal"));
            }
            for j in 0..n {
                let w = weights[i * n + j];
                if !w.is_finite() || w < 0.0 {
                    return Err(invalid("negative or non-finite weight"));
                }
                if w != weights[j * n + i] {
                    return Err(invalid("not symmetric"));
                }
            }
        }
        Ok(Self { n, weights })
    }

    fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut weights = vec![0.0; n * n];
        for (i, j, w) in edges {
            weights[i * n + j] = w;
            weights[j * n + i] = w;
        }
        Self { n, weights }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Row-major matrix entries.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Edges `(i, j, w)` with `i < j` and non-zero weight, row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i + 1..self.n).filter_map(move |j| {
                let w = self.weight(i, j);
                (w != 0.0).then_some((i, j, w))
            })
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl Serialize for WeightedGraph {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GraphJson {
            n: self.n,
            edges: self.edges().collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WeightedGraph {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = GraphJson::deserialize(deserializer)?;
        let mut weights = vec![0.0; raw.n * raw.n];
        for (i, j, w) in raw.edges {
            if i >= raw.n || j >= raw.n {
                return Err(D::Error::custom(format!("edge ({i}, {j}) out of range")));
            }
            weights[i * raw.n + j] = w;
            weights[j * raw.n + i] = w;
        }
        WeightedGraph::from_matrix(raw.n, weights).map_err(D::Error::custom)
    }
}

/// Every pair of landmarks joined by its Euclidean distance.
pub fn complete_graph(cloud: &PointCloud) -> Result<WeightedGraph, GraphError> {
    let pts = cloud.points();
    let n = pts.len();
    if n < 2 {
        return Err(GraphError::TooFewPoints { needed: 2, got: n });
    }
    Ok(WeightedGraph::from_edges(
        n,
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, pts[i].distance(&pts[j])))),
    ))
}

/// Edges of the Delaunay triangulation weighted by Euclidean distance (the
/// "meshed" graph).
pub fn delaunay_graph(cloud: &PointCloud) -> Result<WeightedGraph, GraphError> {
    let pts: &[Point] = cloud.points();
    let triangles = delaunay::triangulate(pts)?;
    Ok(WeightedGraph::from_edges(
        pts.len(),
        delaunay::edges(&triangles)
            .into_iter()
            .map(|(i, j)| (i, j, pts[i].distance(&pts[j]))),
    ))
}

/// Graph construction strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Complete,
    Meshed,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::Complete, Strategy::Meshed];

    pub fn build(&self, cloud: &PointCloud) -> Result<WeightedGraph, GraphError> {
        match self {
            Strategy::Complete => complete_graph(cloud),
            Strategy::Meshed => delaunay_graph(cloud),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Complete => "complete",
            Strategy::Meshed => "meshed",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "complete" => Ok(Strategy::Complete),
            "meshed" => Ok(Strategy::Meshed),
            other => Err(format!("unknown strategy `{other}` (expected complete or meshed)")),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.as_str())
    }
}

/// Number of upper-triangle entries of an `n`-vertex adjacency matrix.
pub fn vector_len(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// 1-based position `k = i·n − i(i+1)/2 − n + j` of entry `a_ij` (1-based,
/// `i < j`) in the flattened upper triangle.
pub fn edge_index(i: usize, j: usize, n: usize) -> Result<usize, GraphError> {
    if !(1 <= i && i < j && j <= n) {
        return Err(GraphError::EdgeIndex { i, j, n });
    }
    Ok(i * n + j - i * (i + 1) / 2 - n)
}

/// Flattened upper triangle of a weighted adjacency matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyVector {
    n: usize,
    entries: Vec<f64>,
}

impl AdjacencyVector {
    pub fn from_graph(graph: &WeightedGraph) -> Self {
        let n = graph.n();
        let mut entries = vec![0.0; vector_len(n)];
        for i in 0..n {
            for j in i + 1..n {
                let k = edge_index(i + 1, j + 1, n).expect("i < j <= n");
                entries[k - 1] = graph.weight(i, j);
            }
        }
        Self { n, entries }
    }

    /// Wraps raw entries; the length must be `n(n−1)/2` for some `n ≥ 2`.
    pub fn from_entries(entries: Vec<f64>) -> Result<Self, GraphError> {
        let len = entries.len();
        let n = (2..=len + 1)
            .find(|&n| vector_len(n) >= len)
            .filter(|&n| vector_len(n) == len)
            .ok_or(GraphError::VectorLength { len })?;
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Rebuilds the symmetric matrix.
    pub fn to_graph(&self) -> Result<WeightedGraph, GraphError> {
        let n = self.n;
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let w = self.entries[edge_index(i + 1, j + 1, n)? - 1];
                weights[i * n + j] = w;
                weights[j * n + i] = w;
            }
        }
        WeightedGraph::from_matrix(n, weights)
    }
}

pub fn adjacency_vector(graph: &WeightedGraph) -> AdjacencyVector {
    AdjacencyVector::from_graph(graph)
}
