//! Exact orientation and in-circle tests, with a symbolic perturbation that
//! breaks cocircular ties consistently.

use std::cmp::Ordering;

use robust::Coord;

use crate::landmarks::Point;

fn coord(p: &Point) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

/// Sign of the orientation of `(a, b, c)`: positive when counterclockwise
/// (in a y-up frame), zero when collinear. Exact.
pub fn orient(a: &Point, b: &Point, c: &Point) -> Ordering {
    robust::orient2d(coord(a), coord(b), coord(c))
        .partial_cmp(&0.0)
        .unwrap_or(Ordering::Equal)
}

/// Sign of the in-circle test: `Greater` when `d` is strictly inside the
/// circle through the counterclockwise triangle `(a, b, c)`. Exact.
pub fn in_circle(a: &Point, b: &Point, c: &Point, d: &Point) -> Ordering {
    robust::incircle(coord(a), coord(b), coord(c), coord(d))
        .partial_cmp(&0.0)
        .unwrap_or(Ordering::Equal)
}

/// Lexicographic (x, then y) order of points; the perturbation priority.
pub fn lexicographic(a: &Point, b: &Point) -> Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y))
}

/// In-circle test on the perturbed lifting `z = x² + y² + ε^(rank+1)`, where
/// `rank` is a point's position in lexicographic order. Never returns `Equal`
/// for a non-degenerate counterclockwise triangle and a fourth distinct point.
///
/// When the exact test is zero, the sign comes from the first non-vanishing
/// term of the perturbation polynomial. Raising the lifted `d` pushes it out of
/// the circle (coefficient −1); raising a triangle vertex `v` raises the plane
/// at `d` by the barycentric weight of `v`, whose sign is the orientation of
/// the triangle with `v` replaced by `d`.
pub fn in_circle_perturbed(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    match in_circle(a, b, c, d) {
        Ordering::Greater => return true,
        Ordering::Less => return false,
        Ordering::Equal => {}
    }
    let mut order = [(a, 0usize), (b, 1), (c, 2), (d, 3)];
    order.sort_by(|x, y| lexicographic(x.0, y.0));
    for (_, role) in order {
        let sign = match role {
            0 => orient(d, b, c),
            1 => orient(a, d, c),
            2 => orient(a, b, d),
            _ => Ordering::Less,
        };
        match sign {
            Ordering::Greater => return true,
            Ordering::Less => return false,
            Ordering::Equal => {}
        }
    }
    unreachable!("the coefficient of the query point never vanishes")
}
