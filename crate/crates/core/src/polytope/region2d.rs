use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::HalfspaceSystem;
use crate::error::{invalid, Error, Result};
use crate::rational::Rational;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Point2 {
    pub x: Rational,
    pub y: Rational,
}

impl Point2 {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point2 { x, y }
    }

    pub fn origin() -> Self {
        Point2::new(Rational::zero(), Rational::zero())
    }

    fn sub(&self, other: &Point2) -> Point2 {
        Point2::new(&self.x - &other.x, &self.y - &other.y)
    }

    fn add(&self, other: &Point2) -> Point2 {
        Point2::new(&self.x + &other.x, &self.y + &other.y)
    }

    fn dot(&self, dx: &Rational, dy: &Rational) -> Rational {
        &self.x * dx + &self.y * dy
    }
}

impl fmt::Debug for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.x, self.y)
    }
}

fn cross(o: &Point2, a: &Point2, b: &Point2) -> Rational {
    (&a.x - &o.x) * (&b.y - &o.y) - (&a.y - &o.y) * (&b.x - &o.x)
}

fn cross_vec(a: &Point2, b: &Point2) -> Rational {
    &a.x * &b.y - &a.y * &b.x
}

/// Strict convex hull (no repeated or collinear vertices), counter-clockwise,
/// starting at the lexicographically smallest point.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Point2> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && !cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive() {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Point2> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && !cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive() {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// A bounded convex polygon with exact vertices, possibly degenerate
/// (a segment has two vertices, a point one).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRegion")]
pub struct ConvexRegion2D {
    vertices: Vec<Point2>,
}

#[derive(Deserialize)]
struct RawRegion {
    vertices: Vec<Point2>,
}

impl TryFrom<RawRegion> for ConvexRegion2D {
    type Error = Error;

    fn try_from(raw: RawRegion) -> Result<Self> {
        ConvexRegion2D::from_vertices(raw.vertices)
    }
}

impl fmt::Debug for ConvexRegion2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.vertices).finish()
    }
}

impl ConvexRegion2D {
    /// Hull of an arbitrary nonempty point set.
    pub fn hull_of(points: &[Point2]) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("empty point set"));
        }
        Ok(ConvexRegion2D { vertices: convex_hull(points) })
    }

    /// Accepts an already-convex vertex list in any rotation; rejects lists
    /// that are clockwise, non-convex, or carry collinear/repeated points.
    pub fn from_vertices(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(invalid("region needs at least one vertex"));
        }
        let hull = convex_hull(&vertices);
        if hull.len() != vertices.len() {
            return Err(invalid("vertex list is not strictly convex"));
        }
        let start = vertices.iter().enumerate().min_by(|a, b| a.1.cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
        let mut rotated = vertices[start..].to_vec();
        rotated.extend_from_slice(&vertices[..start]);
        if rotated != hull {
            return Err(invalid("vertices must be listed counter-clockwise"));
        }
        Ok(ConvexRegion2D { vertices: hull })
    }

    pub fn point(p: Point2) -> Self {
        ConvexRegion2D { vertices: vec![p] }
    }

    /// `[0, width] x [0, height]`.
    pub fn rectangle(width: &Rational, height: &Rational) -> Result<Self> {
        Self::box_region(&Rational::zero(), width, &Rational::zero(), height)
    }

    pub fn box_region(x_lo: &Rational, x_hi: &Rational, y_lo: &Rational, y_hi: &Rational) -> Result<Self> {
        if x_lo > x_hi || y_lo > y_hi {
            return Err(invalid("box bounds out of order"));
        }
        let corners = [
            Point2::new(x_lo.clone(), y_lo.clone()),
            Point2::new(x_hi.clone(), y_lo.clone()),
            Point2::new(x_hi.clone(), y_hi.clone()),
            Point2::new(x_lo.clone(), y_hi.clone()),
        ];
        Self::hull_of(&corners)
    }

    /// `{x >= 0, y >= 0, x + y <= 1}`
    pub fn unit_triangle() -> Self {
        Self::hull_of(&[Point2::origin(), Point2::new(Rational::one(), Rational::zero()), Point2::new(Rational::zero(), Rational::one())])
            .expect("nonempty")
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn support(&self, dx: &Rational, dy: &Rational) -> Rational {
        self.vertices.iter().map(|v| v.dot(dx, dy)).max().expect("nonempty region")
    }

    pub fn max_x(&self) -> Rational {
        self.support(&Rational::one(), &Rational::zero())
    }

    pub fn max_y(&self) -> Rational {
        self.support(&Rational::zero(), &Rational::one())
    }

    pub fn min_x(&self) -> Rational {
        -self.support(&-Rational::one(), &Rational::zero())
    }

    pub fn min_y(&self) -> Rational {
        -self.support(&Rational::zero(), &-Rational::one())
    }

    pub fn contains(&self, p: &Point2) -> bool {
        let v = &self.vertices;
        match v.len() {
            1 => v[0] == *p,
            2 => {
                cross(&v[0], &v[1], p).is_zero()
                    && p.x >= v[0].x.clone().min(v[1].x.clone())
                    && p.x <= v[0].x.clone().max(v[1].x.clone())
                    && p.y >= v[0].y.clone().min(v[1].y.clone())
                    && p.y <= v[0].y.clone().max(v[1].y.clone())
            }
            n => (0..n).all(|i| !cross(&v[i], &v[(i + 1) % n], p).is_negative()),
        }
    }

    pub fn contains_region(&self, other: &ConvexRegion2D) -> bool {
        other.vertices.iter().all(|p| self.contains(p))
    }

    /// Every vertex multiplied by `factor`.
    pub fn scale(&self, factor: &Rational) -> Result<Self> {
        if factor.is_negative() {
            return Err(invalid("scale factor must be nonnegative"));
        }
        if factor.is_zero() {
            return Ok(Self::point(Point2::origin()));
        }
        Ok(ConvexRegion2D { vertices: self.vertices.iter().map(|v| Point2::new(&v.x * factor, &v.y * factor)).collect() })
    }

    pub fn translate(&self, by: &Point2) -> Self {
        ConvexRegion2D { vertices: self.vertices.iter().map(|v| v.add(by)).collect() }
    }

    /// Mirror across the diagonal `x = y`.
    pub fn reflect_diagonal(&self) -> Self {
        let swapped: Vec<Point2> = self.vertices.iter().map(|v| Point2::new(v.y.clone(), v.x.clone())).collect();
        ConvexRegion2D { vertices: convex_hull(&swapped) }
    }

    /// Intersection with `{p : a*x + b*y <= c}`; `None` when empty.
    pub fn clip(&self, a: &Rational, b: &Rational, c: &Rational) -> Option<Self> {
        let value = |p: &Point2| p.dot(a, b) - c;
        let v = &self.vertices;
        if v.len() == 1 {
            return (!value(&v[0]).is_positive()).then(|| self.clone());
        }
        let mut out = Vec::new();
        let n = v.len();
        for i in 0..n {
            let cur = &v[i];
            let next = &v[(i + 1) % n];
            let fc = value(cur);
            let fn_ = value(next);
            if !fc.is_positive() {
                out.push(cur.clone());
            }
            if (fc.is_positive() && fn_.is_negative()) || (fc.is_negative() && fn_.is_positive()) {
                let t = &fc / &(&fc - &fn_);
                let d = next.sub(cur);
                out.push(Point2::new(&cur.x + &t * &d.x, &cur.y + &t * &d.y));
            }
        }
        (!out.is_empty()).then(|| ConvexRegion2D { vertices: convex_hull(&out) })
    }

    /// Edge vectors in counter-clockwise order, starting from the lowest
    /// (then leftmost) vertex, which is also returned.
    fn edges_from_bottom(&self) -> (Point2, Vec<Point2>) {
        let v = &self.vertices;
        let start = (0..v.len()).min_by(|&i, &j| v[i].y.cmp(&v[j].y).then_with(|| v[i].x.cmp(&v[j].x))).expect("nonempty region");
        let n = v.len();
        let edges = if n == 1 { Vec::new() } else { (0..n).map(|k| v[(start + k + 1) % n].sub(&v[(start + k) % n])).collect() };
        (v[start].clone(), edges)
    }

    /// Minkowski sum by merging the two edge sequences in angular order.
    pub fn minkowski_sum(&self, other: &ConvexRegion2D) -> Self {
        let (sa, ea) = self.edges_from_bottom();
        let (sb, eb) = other.edges_from_bottom();
        let mut current = sa.add(&sb);
        let mut points = vec![current.clone()];
        let (mut i, mut j) = (0, 0);
        while i < ea.len() || j < eb.len() {
            let take_a = if i == ea.len() {
                false
            } else if j == eb.len() {
                true
            } else {
                angle_cmp(&ea[i], &eb[j]) != Ordering::Greater
            };
            let step = if take_a {
                i += 1;
                &ea[i - 1]
            } else {
                j += 1;
                &eb[j - 1]
            };
            current = current.add(step);
            points.push(current.clone());
        }
        ConvexRegion2D { vertices: convex_hull(&points) }
    }

    /// Halfspace description of the polygon (equalities for degenerate cases).
    pub fn to_halfspaces(&self) -> HalfspaceSystem {
        let mut sys = HalfspaceSystem::new(2);
        let v = &self.vertices;
        let push_edge = |sys: &mut HalfspaceSystem, from: &Point2, to: &Point2| {
            let e = to.sub(from);
            // cross(e, p - from) >= 0  <=>  e.y*p.x - e.x*p.y <= e.y*from.x - e.x*from.y
            let bound = &e.y * &from.x - &e.x * &from.y;
            sys.add_inequality(vec![e.y.clone(), -e.x.clone()], bound).expect("dimension 2");
        };
        match v.len() {
            1 => {
                sys.add_equality(vec![Rational::one(), Rational::zero()], v[0].x.clone()).expect("dim");
                sys.add_equality(vec![Rational::zero(), Rational::one()], v[0].y.clone()).expect("dim");
            }
            2 => {
                let e = v[1].sub(&v[0]);
                let value = &e.y * &v[0].x - &e.x * &v[0].y;
                sys.add_equality(vec![e.y.clone(), -e.x.clone()], value).expect("dim");
                // Endpoints: e·p between e·v0 and e·v1.
                sys.add_inequality(vec![e.x.clone(), e.y.clone()], v[1].dot(&e.x, &e.y)).expect("dim");
                sys.add_inequality(vec![-e.x.clone(), -e.y.clone()], -v[0].dot(&e.x, &e.y)).expect("dim");
            }
            n => {
                for i in 0..n {
                    push_edge(&mut sys, &v[i], &v[(i + 1) % n]);
                }
            }
        }
        sys
    }
}

/// Orders direction vectors by polar angle in `[0, 2π)`.
fn angle_cmp(a: &Point2, b: &Point2) -> Ordering {
    let half = |p: &Point2| {
        if p.y.is_positive() || (p.y.is_zero() && p.x.is_positive()) {
            0
        } else {
            1
        }
    };
    half(a).cmp(&half(b)).then_with(|| {
        let c = cross_vec(a, b);
        if c.is_positive() {
            Ordering::Less
        } else if c.is_negative() {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    })
}

/// Exact vertex enumeration of a bounded nonempty 2-D halfspace system.
pub fn vertices_2d(sys: &HalfspaceSystem) -> Result<ConvexRegion2D> {
    if sys.dimension != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: sys.dimension });
    }
    let one = Rational::one();
    let zero = Rational::zero();
    for dir in [[&one, &zero], [&zero, &one]] {
        for sign in [Rational::one(), -Rational::one()] {
            sys.support(&[dir[0] * &sign, dir[1] * &sign])?;
        }
    }
    let mut lines: Vec<(Rational, Rational, Rational)> = Vec::new();
    for h in &sys.inequalities {
        lines.push((h.coeffs[0].clone(), h.coeffs[1].clone(), h.bound.clone()));
    }
    for e in &sys.equalities {
        lines.push((e.coeffs[0].clone(), e.coeffs[1].clone(), e.value.clone()));
    }
    let mut candidates = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a1, b1, c1) = &lines[i];
            let (a2, b2, c2) = &lines[j];
            let det = a1 * b2 - a2 * b1;
            if det.is_zero() {
                continue;
            }
            let x = (c1 * b2 - c2 * b1) / &det;
            let y = (a1 * c2 - a2 * c1) / &det;
            if sys.contains(&[x.clone(), y.clone()])? {
                candidates.push(Point2::new(x, y));
            }
        }
    }
    if candidates.is_empty() {
        // Bounded and feasible but no pair of independent boundary lines: only
        // possible when the system has fewer than two independent rows, which
        // cannot bound the plane.
        return Err(Error::Unbounded);
    }
    ConvexRegion2D::hull_of(&candidates)
}
