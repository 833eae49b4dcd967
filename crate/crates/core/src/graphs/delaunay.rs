//! Incremental (Bowyer–Watson) Delaunay triangulation in the plane.
//!
//! The hull is closed with "ghost" triangles that share one vertex at
//! infinity, so no bounding super-triangle is needed and hull edges are never
//! lost. A ghost triangle `(p, q, ∞)` conflicts with a new point that lies
//! strictly left of `p → q` (outside the hull) or on the open segment `pq`.
//! Points are inserted in a seeded random order; the result does not depend
//! on it because cocircular ties are broken by a global perturbation.

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::predicates::{in_circle_perturbed, orient};
use super::GraphError;
use crate::landmarks::Point;

const GHOST: usize = usize::MAX;
const INSERTION_SEED: u64 = 0x5eed_de1a;

/// Counterclockwise triangles of the triangulation, as point indices.
pub fn triangulate(points: &[Point]) -> Result<Vec<[usize; 3]>, GraphError> {
    let n = points.len();
    if n < 3 {
        return Err(GraphError::TooFewPoints { needed: 3, got: n });
    }
    for i in 0..n {
        for j in i + 1..n {
            if points[i] == points[j] {
                return Err(GraphError::DuplicatePoints(i, j));
            }
        }
    }

    let (a, b) = (0, 1);
    let c = (2..n)
        .find(|&k| orient(&points[a], &points[b], &points[k]) != Ordering::Equal)
        .ok_or(GraphError::Collinear)?;
    let (a, b) = if orient(&points[a], &points[b], &points[c]) == Ordering::Greater {
        (a, b)
    } else {
        (b, a)
    };
    let mut triangles: Vec<[usize; 3]> = vec![[a, b, c], [b, a, GHOST], [c, b, GHOST], [a, c, GHOST]];

    let mut order: Vec<usize> = (0..n).filter(|&k| k != a && k != b && k != c).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(INSERTION_SEED));

    for r in order {
        insert(points, &mut triangles, r);
    }

    triangles.retain(|t| !t.contains(&GHOST));
    Ok(triangles)
}

fn conflicts(points: &[Point], t: &[usize; 3], r: usize) -> bool {
    let pr = &points[r];
    if t[2] == GHOST {
        let (p, q) = (&points[t[0]], &points[t[1]]);
        match orient(p, q, pr) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => strictly_between(p, q, pr),
        }
    } else {
        in_circle_perturbed(&points[t[0]], &points[t[1]], &points[t[2]], pr)
    }
}

/// `r` is collinear with `p, q`; is it inside the open segment?
fn strictly_between(p: &Point, q: &Point, r: &Point) -> bool {
    let dot = (r.x - p.x) * (q.x - p.x) + (r.y - p.y) * (q.y - p.y);
    let len2 = (q.x - p.x).powi(2) + (q.y - p.y).powi(2);
    dot > 0.0 && dot < len2
}

fn insert(points: &[Point], triangles: &mut Vec<[usize; 3]>, r: usize) {
    let (bad, keep): (Vec<[usize; 3]>, Vec<[usize; 3]>) = triangles.iter().copied().partition(|t| conflicts(points, t, r));
    debug_assert!(!bad.is_empty(), "every point conflicts with some triangle");

    // Directed cavity edges; an edge shared by two bad triangles appears once
    // in each direction and is interior.
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &bad {
        for k in 0..3 {
            *edges.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
        }
    }
    let mut boundary: Vec<(usize, usize)> = edges
        .keys()
        .filter(|&&(u, v)| !edges.contains_key(&(v, u)))
        .copied()
        .collect();
    boundary.sort_unstable();

    *triangles = keep;
    for (u, v) in boundary {
        let t = if u == GHOST {
            [v, r, GHOST]
        } else if v == GHOST {
            [r, u, GHOST]
        } else {
            [u, v, r]
        };
        triangles.push(t);
    }
}

/// Undirected edges `(i, j)` with `i < j` of a set of triangles, sorted.
pub fn edges(triangles: &[[usize; 3]]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = triangles
        .iter()
        .flat_map(|t| (0..3).map(move |k| (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]))))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}
