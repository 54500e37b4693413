//! Concave overestimators of the squared difference `(x_j - x_i)^2` over
//! small two-dimensional domains.
//!
//! Over a polytope the tightest concave overestimator of a convex function
//! is piecewise affine: its hypograph is the convex hull of the function
//! values lifted at the polytope vertices. Each upper facet of that hull is
//! one [`AffinePiece`]; the envelope is the pointwise minimum of the pieces.
//! Everything here is exact rational arithmetic, so the pieces can be used
//! directly as certified linear constraints.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::model::{rat, Rat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnvelopeError {
    #[error("domain bound must be strictly positive")]
    NonPositiveBound,
    #[error("polytope is degenerate: {0}")]
    DegenerateDomain(String),
}

/// Affine function `a0 + ai * xi + aj * xj`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AffinePiece {
    pub a0: Rat,
    pub ai: Rat,
    pub aj: Rat,
}

impl AffinePiece {
    pub fn new(a0: Rat, ai: Rat, aj: Rat) -> Self {
        AffinePiece { a0, ai, aj }
    }

    pub fn eval(&self, xi: &Rat, xj: &Rat) -> Rat {
        &self.a0 + &self.ai * xi + &self.aj * xj
    }
}

/// Convex polygon given by at least three vertices in strictly convex
/// counterclockwise position (no repeated or collinear vertices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polytope2 {
    vertices: Vec<(Rat, Rat)>,
}

impl Polytope2 {
    pub fn new(vertices: Vec<(Rat, Rat)>) -> Result<Self, EnvelopeError> {
        if vertices.len() < 3 {
            return Err(EnvelopeError::DegenerateDomain(format!(
                "{} vertices, need at least 3",
                vertices.len()
            )));
        }
        let k = vertices.len();
        for a in 0..k {
            let b = (a + 1) % k;
            let c = (a + 2) % k;
            let cr = cross(&vertices[a], &vertices[b], &vertices[c]);
            if !cr.is_positive() {
                return Err(EnvelopeError::DegenerateDomain(format!(
                    "vertices {a}, {b}, {c} are not in strictly convex counterclockwise position"
                )));
            }
        }
        Ok(Polytope2 { vertices })
    }

    /// Axis-aligned box `[0, u1] x [0, u2]`.
    pub fn unit_box(u1: &Rat, u2: &Rat) -> Result<Self, EnvelopeError> {
        if !u1.is_positive() || !u2.is_positive() {
            return Err(EnvelopeError::NonPositiveBound);
        }
        let z = Rat::zero();
        Polytope2::new(vec![
            (z.clone(), z.clone()),
            (u1.clone(), z.clone()),
            (u1.clone(), u2.clone()),
            (z, u2.clone()),
        ])
    }

    /// Order triangle `{ 0 <= xi <= xj <= u }`.
    pub fn order_triangle(u: &Rat) -> Result<Self, EnvelopeError> {
        if !u.is_positive() {
            return Err(EnvelopeError::NonPositiveBound);
        }
        let z = Rat::zero();
        Polytope2::new(vec![
            (z.clone(), z.clone()),
            (u.clone(), u.clone()),
            (z, u.clone()),
        ])
    }

    pub fn vertices(&self) -> &[(Rat, Rat)] {
        &self.vertices
    }
}

/// Signed cross product of (b - a) and (c - b).
fn cross(a: &(Rat, Rat), b: &(Rat, Rat), c: &(Rat, Rat)) -> Rat {
    let ux = &b.0 - &a.0;
    let uy = &b.1 - &a.1;
    let vx = &c.0 - &b.0;
    let vy = &c.1 - &b.1;
    &ux * &vy - &uy * &vx
}

/// Pointwise minimum of affine pieces: a concave piecewise-affine function.
/// Pieces are kept in lexicographic `(a0, ai, aj)` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvelopeSet {
    pieces: Vec<AffinePiece>,
}

impl EnvelopeSet {
    fn from_pieces(mut pieces: Vec<AffinePiece>) -> Self {
        pieces.sort();
        pieces.dedup();
        EnvelopeSet { pieces }
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn eval(&self, xi: &Rat, xj: &Rat) -> Rat {
        self.pieces
            .iter()
            .map(|p| p.eval(xi, xj))
            .min()
            .expect("envelope has at least one piece")
    }
}

/// Domain of a coordinate pair, as seen by one relaxation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Domain {
    /// `[0, u1] x [0, u2]`.
    Box { u1: Rat, u2: Rat },
    /// `{ 0 <= xi <= xj <= u }`.
    Triangle { u: Rat },
    /// General convex polygon.
    Polytope(Polytope2),
}

impl Domain {
    pub fn envelope(&self) -> Result<EnvelopeSet, EnvelopeError> {
        match self {
            Domain::Box { u1, u2 } => envelope_box(u1, u2),
            Domain::Triangle { u } => envelope_triangle(u),
            Domain::Polytope(p) => envelope_polytope(p),
        }
    }

    pub fn unit() -> Self {
        Domain::Box {
            u1: rat(1, 1),
            u2: rat(1, 1),
        }
    }
}

/// Envelope of `(xj - xi)^2` over the box `[0, u1] x [0, u2]`.
///
/// Exactly two pieces: the plane through the three vertices adjacent to the
/// origin, and the plane through the three vertices adjacent to `(u1, u2)`.
pub fn envelope_box(u1: &Rat, u2: &Rat) -> Result<EnvelopeSet, EnvelopeError> {
    if !u1.is_positive() || !u2.is_positive() {
        return Err(EnvelopeError::NonPositiveBound);
    }
    let two = rat(2, 1);
    let p1 = AffinePiece::new(Rat::zero(), u1.clone(), u2.clone());
    let p2 = AffinePiece::new(
        &two * u1 * u2,
        u1 - &(&two * u2),
        u2 - &(&two * u1),
    );
    Ok(EnvelopeSet::from_pieces(vec![p1, p2]))
}

/// Envelope of `(xj - xi)^2` over the triangle `{ 0 <= xi <= xj <= u }`:
/// the single plane `u * (xj - xi)`.
pub fn envelope_triangle(u: &Rat) -> Result<EnvelopeSet, EnvelopeError> {
    if !u.is_positive() {
        return Err(EnvelopeError::NonPositiveBound);
    }
    let piece = AffinePiece::new(Rat::zero(), -u.clone(), u.clone());
    Ok(EnvelopeSet::from_pieces(vec![piece]))
}

/// Envelope of `(xj - xi)^2` over an arbitrary convex polygon, computed as
/// the upper facets of the convex hull of the lifted vertices.
///
/// Every vertex triple spanning a plane that weakly dominates all lifted
/// vertices is a candidate; candidates whose contact set is not
/// two-dimensional are redundant (they never realize the minimum on a region
/// of positive area) and are pruned. Duplicates collapse and the surviving
/// pieces are ordered lexicographically, so the output is deterministic.
pub fn envelope_polytope(poly: &Polytope2) -> Result<EnvelopeSet, EnvelopeError> {
    let vs = poly.vertices();
    let k = vs.len();
    let f: Vec<Rat> = vs.iter().map(|(xi, xj)| {
        let d = xj - xi;
        &d * &d
    }).collect();

    let mut pieces: Vec<AffinePiece> = Vec::new();
    for a in 0..k {
        for b in (a + 1)..k {
            for c in (b + 1)..k {
                let Some(plane) = plane_through(
                    (&vs[a], &f[a]),
                    (&vs[b], &f[b]),
                    (&vs[c], &f[c]),
                ) else {
                    continue;
                };
                // Upper plane: weakly dominates every lifted vertex.
                let mut upper = true;
                let mut contact: Vec<usize> = Vec::new();
                for (idx, v) in vs.iter().enumerate() {
                    let val = plane.eval(&v.0, &v.1);
                    match val.cmp(&f[idx]) {
                        std::cmp::Ordering::Less => {
                            upper = false;
                            break;
                        }
                        std::cmp::Ordering::Equal => contact.push(idx),
                        std::cmp::Ordering::Greater => {}
                    }
                }
                if upper && contact_spans_area(vs, &contact) {
                    pieces.push(plane);
                }
            }
        }
    }
    if pieces.is_empty() {
        return Err(EnvelopeError::DegenerateDomain(
            "no upper facet found".to_string(),
        ));
    }
    Ok(EnvelopeSet::from_pieces(pieces))
}

/// Plane `a0 + ai xi + aj xj` through three lifted points, or `None` if the
/// base points are collinear.
fn plane_through(
    p: (&(Rat, Rat), &Rat),
    q: (&(Rat, Rat), &Rat),
    r: (&(Rat, Rat), &Rat),
) -> Option<AffinePiece> {
    let det = cross(p.0, q.0, r.0);
    if det.is_zero() {
        return None;
    }
    // Cramer's rule on  a0 + ai*x + aj*y = f  for the three points.
    let (x1, y1, f1) = (&p.0 .0, &p.0 .1, p.1);
    let (x2, y2, f2) = (&q.0 .0, &q.0 .1, q.1);
    let (x3, y3, f3) = (&r.0 .0, &r.0 .1, r.1);
    let det3 = |a: &Rat, b: &Rat, c: &Rat, d: &Rat, e: &Rat, g: &Rat, h: &Rat, i: &Rat, j: &Rat| {
        a * &(e * j - g * i) - b * &(d * j - g * h) + c * &(d * i - e * h)
    };
    let d = det3(
        &rat(1, 1), x1, y1,
        &rat(1, 1), x2, y2,
        &rat(1, 1), x3, y3,
    );
    debug_assert!(!d.is_zero());
    let d0 = det3(f1, x1, y1, f2, x2, y2, f3, x3, y3);
    let di = det3(&rat(1, 1), f1, y1, &rat(1, 1), f2, y2, &rat(1, 1), f3, y3);
    let dj = det3(&rat(1, 1), x1, f1, &rat(1, 1), x2, f2, &rat(1, 1), x3, f3);
    Some(AffinePiece::new(&d0 / &d, &di / &d, &dj / &d))
}

/// True if the contact vertex set contains three non-collinear points.
fn contact_spans_area(vs: &[(Rat, Rat)], contact: &[usize]) -> bool {
    if contact.len() < 3 {
        return false;
    }
    for (p, &a) in contact.iter().enumerate() {
        for (q, &b) in contact.iter().enumerate().skip(p + 1) {
            for &c in contact.iter().skip(q + 1) {
                if !cross(&vs[a], &vs[b], &vs[c]).is_zero() {
                    return true;
                }
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rint;

    fn sq(xi: &Rat, xj: &Rat) -> Rat {
        let d = xj - xi;
        &d * &d
    }

    /// Deterministic rational point stream for sampling tests.
    struct Lcg(u64);

    impl Lcg {
        fn next_u32(&mut self) -> u32 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (self.0 >> 33) as u32
        }

        /// Rational in [0, 1] with denominator up to 97.
        fn unit_rat(&mut self) -> Rat {
            let den = 1 + (self.next_u32() % 97) as i64;
            let num = (self.next_u32() as i64) % (den + 1);
            rat(num, den)
        }
    }

    /// Random point inside the polytope: convex combination of vertices.
    fn sample_point(rng: &mut Lcg, poly: &Polytope2) -> (Rat, Rat) {
        let weights: Vec<Rat> = poly.vertices().iter().map(|_| rng.unit_rat()).collect();
        let total: Rat = weights.iter().sum();
        if total.is_zero() {
            return poly.vertices()[0].clone();
        }
        let mut x = Rat::zero();
        let mut y = Rat::zero();
        for (w, v) in weights.iter().zip(poly.vertices()) {
            x += w / &total * &v.0;
            y += w / &total * &v.1;
        }
        (x, y)
    }

    #[test]
    fn unit_box_pieces_are_the_two_known_planes() {
        let env = envelope_box(&rint(1), &rint(1)).unwrap();
        assert_eq!(
            env.pieces(),
            &[
                AffinePiece::new(rint(0), rint(1), rint(1)),
                AffinePiece::new(rint(2), rint(-1), rint(-1)),
            ]
        );
    }

    #[test]
    fn half_box_pieces() {
        let env = envelope_box(&rat(1, 2), &rat(1, 2)).unwrap();
        assert_eq!(
            env.pieces(),
            &[
                AffinePiece::new(rint(0), rat(1, 2), rat(1, 2)),
                AffinePiece::new(rat(1, 2), rat(-1, 2), rat(-1, 2)),
            ]
        );
    }

    #[test]
    fn triangle_is_one_plane() {
        let env = envelope_triangle(&rat(1, 2)).unwrap();
        assert_eq!(
            env.pieces(),
            &[AffinePiece::new(rint(0), rat(-1, 2), rat(1, 2))]
        );
    }

    #[test]
    fn mixed_trapezoid_pieces() {
        // Domain for a pair with the left point confined to [0, 1/2] below
        // the right point: vertices (0,0), (1/2,1/2), (1/2,1), (0,1).
        let poly = Polytope2::new(vec![
            (rint(0), rint(0)),
            (rat(1, 2), rat(1, 2)),
            (rat(1, 2), rint(1)),
            (rint(0), rint(1)),
        ])
        .unwrap();
        let env = envelope_polytope(&poly).unwrap();
        assert_eq!(
            env.pieces(),
            &[
                AffinePiece::new(rint(0), rint(-1), rint(1)),
                AffinePiece::new(rat(1, 2), rat(-3, 2), rat(1, 2)),
            ]
        );
    }

    #[test]
    fn nonpositive_bounds_rejected() {
        assert_eq!(
            envelope_box(&rint(0), &rint(1)).unwrap_err(),
            EnvelopeError::NonPositiveBound
        );
        assert_eq!(
            envelope_triangle(&rat(-1, 2)).unwrap_err(),
            EnvelopeError::NonPositiveBound
        );
    }

    #[test]
    fn degenerate_polytopes_rejected() {
        // Clockwise square.
        let cw = Polytope2::new(vec![
            (rint(0), rint(0)),
            (rint(0), rint(1)),
            (rint(1), rint(1)),
            (rint(1), rint(0)),
        ]);
        assert!(matches!(cw, Err(EnvelopeError::DegenerateDomain(_))));
        // Collinear triple.
        let line = Polytope2::new(vec![
            (rint(0), rint(0)),
            (rat(1, 2), rat(1, 2)),
            (rint(1), rint(1)),
        ]);
        assert!(matches!(line, Err(EnvelopeError::DegenerateDomain(_))));
        // Repeated vertex.
        let dup = Polytope2::new(vec![
            (rint(0), rint(0)),
            (rint(1), rint(0)),
            (rint(1), rint(0)),
            (rint(0), rint(1)),
        ]);
        assert!(matches!(dup, Err(EnvelopeError::DegenerateDomain(_))));
    }

    #[test]
    fn box_and_triangle_match_polytope_path() {
        for (u1, u2) in [
            (rint(1), rint(1)),
            (rat(1, 2), rint(1)),
            (rat(1, 2), rat(1, 2)),
            (rat(3, 4), rat(2, 5)),
        ] {
            let direct = envelope_box(&u1, &u2).unwrap();
            let poly = Polytope2::unit_box(&u1, &u2).unwrap();
            let via_hull = envelope_polytope(&poly).unwrap();
            assert_eq!(direct, via_hull, "box ({u1}, {u2})");
        }
        for u in [rint(1), rat(1, 2), rat(2, 3)] {
            let direct = envelope_triangle(&u).unwrap();
            let poly = Polytope2::order_triangle(&u).unwrap();
            let via_hull = envelope_polytope(&poly).unwrap();
            assert_eq!(direct, via_hull, "triangle {u}");
        }
    }

    #[test]
    fn envelope_overestimates_on_sampled_points() {
        let domains: Vec<Polytope2> = vec![
            Polytope2::unit_box(&rint(1), &rint(1)).unwrap(),
            Polytope2::unit_box(&rat(1, 2), &rint(1)).unwrap(),
            Polytope2::order_triangle(&rint(1)).unwrap(),
            Polytope2::new(vec![
                (rint(0), rint(0)),
                (rat(1, 2), rat(1, 2)),
                (rat(1, 2), rint(1)),
                (rint(0), rint(1)),
            ])
            .unwrap(),
        ];
        let mut rng = Lcg(0x5eed_cafe_f00d_0001);
        for poly in &domains {
            let env = envelope_polytope(poly).unwrap();
            for _ in 0..1000 {
                let (xi, xj) = sample_point(&mut rng, poly);
                let e = env.eval(&xi, &xj);
                let f = sq(&xi, &xj);
                assert!(e >= f, "envelope {e} below function {f} at ({xi}, {xj})");
            }
        }
    }

    #[test]
    fn envelope_is_tight_at_vertices() {
        let domains: Vec<Polytope2> = vec![
            Polytope2::unit_box(&rint(1), &rint(1)).unwrap(),
            Polytope2::unit_box(&rat(1, 2), &rat(1, 2)).unwrap(),
            Polytope2::order_triangle(&rat(1, 2)).unwrap(),
            Polytope2::new(vec![
                (rint(0), rint(0)),
                (rat(1, 2), rat(1, 2)),
                (rat(1, 2), rint(1)),
                (rint(0), rint(1)),
            ])
            .unwrap(),
        ];
        for poly in &domains {
            let env = envelope_polytope(poly).unwrap();
            for (xi, xj) in poly.vertices() {
                assert_eq!(env.eval(xi, xj), sq(xi, xj), "vertex ({xi}, {xj})");
            }
        }
    }

    #[test]
    fn shrinking_the_box_never_raises_the_envelope() {
        let mut rng = Lcg(0x5eed_0002);
        for _ in 0..60 {
            let mut u1 = rng.unit_rat();
            let mut u2 = rng.unit_rat();
            if u1.is_zero() {
                u1 = rat(1, 7);
            }
            if u2.is_zero() {
                u2 = rat(1, 7);
            }
            let w1 = &u1 + rng.unit_rat();
            let w2 = &u2 + rng.unit_rat();
            let small = envelope_box(&u1, &u2).unwrap();
            let big = envelope_box(&w1, &w2).unwrap();
            let inner = Polytope2::unit_box(&u1, &u2).unwrap();
            for _ in 0..40 {
                let (xi, xj) = sample_point(&mut rng, &inner);
                assert!(
                    small.eval(&xi, &xj) <= big.eval(&xi, &xj),
                    "shrink monotonicity failed at ({xi}, {xj}) for [{u1},{u2}] vs [{w1},{w2}]"
                );
            }
        }
    }
}
