//! Planar geometry kernel.
//!
//! Orientation predicate, proper segment crossing, monotone-chain convex hull,
//! convex containment and hull-vs-hull classification. All coordinates are
//! meters in a fixed world frame.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Collinearity band for cross products, m².
pub const EPS_GEOM: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

/// Free vectors (velocities, displacements) share the point representation.
pub type Vec2 = Point2;

impl Point2 {
    pub const ZERO: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector pointing along `angle` (radians, CCW from +x).
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self { x: c, y: s }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Self) -> Self {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Self) -> Self {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Self {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Self {
        Point2::new(-self.x, -self.y)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
    Collinear,
}

/// `(q - p) × (r - p)`.
pub fn cross3(p: Point2, q: Point2, r: Point2) -> f64 {
    (q - p).cross(r - p)
}

pub fn orient(p: Point2, q: Point2, r: Point2) -> Orientation {
    let c = cross3(p, q, r);
    if c.abs() <= EPS_GEOM {
        Orientation::Collinear
    } else if c > 0.0 {
        Orientation::CounterClockwise
    } else {
        Orientation::Clockwise
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub const fn new(a: Point2, b: Point2) -> Self {
        Self { a, b }
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }
}

/// Proper crossing test: both endpoint pairs straddle the other segment's
/// supporting line and none of the four orientations is collinear. Touching
/// endpoints and collinear overlaps are not intersections.
pub fn segments_intersect(s1: &Segment, s2: &Segment) -> bool {
    if s1.is_degenerate() || s2.is_degenerate() {
        return false;
    }
    let o1 = orient(s1.a, s1.b, s2.a);
    let o2 = orient(s1.a, s1.b, s2.b);
    let o3 = orient(s2.a, s2.b, s1.a);
    let o4 = orient(s2.a, s2.b, s1.b);
    if [o1, o2, o3, o4].contains(&Orientation::Collinear) {
        return false;
    }
    o1 != o2 && o3 != o4
}

fn on_segment(p: Point2, s: &Segment) -> bool {
    if orient(s.a, s.b, p) != Orientation::Collinear {
        return false;
    }
    let d = s.b - s.a;
    let len_sq = d.norm_sq();
    if len_sq == 0.0 {
        return (p - s.a).norm_sq() <= EPS_GEOM * EPS_GEOM;
    }
    let t = (p - s.a).dot(d);
    t >= -EPS_GEOM && t <= len_sq + EPS_GEOM
}

/// Contact that is not a proper crossing: an endpoint of one segment lies on
/// the other (endpoint touch or collinear overlap).
pub fn segments_touch(s1: &Segment, s2: &Segment) -> bool {
    if segments_intersect(s1, s2) {
        return false;
    }
    on_segment(s1.a, s2) || on_segment(s1.b, s2) || on_segment(s2.a, s1) || on_segment(s2.b, s1)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("convex hull of an empty point set")]
    EmptyInput,
    #[error("non-finite coordinate at input index {0}")]
    NonFinite(usize),
    #[error("hull vertex {0} breaks counter-clockwise convexity")]
    NotConvex(usize),
    #[error("hull vertex {0} duplicates its predecessor")]
    Duplicate(usize),
}

/// Closed convex hull: counter-clockwise vertices, no duplicates, no three
/// consecutive collinear points. One- and two-point hulls are valid
/// degenerate states (a point, a segment).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HullPolygon {
    points: Vec<Point2>,
}

impl HullPolygon {
    /// Validates an already ordered vertex list.
    pub fn from_ccw(points: Vec<Point2>) -> Result<Self, GeometryError> {
        let n = points.len();
        if n == 0 {
            return Err(GeometryError::EmptyInput);
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite(i));
        }
        for i in 0..n {
            if n > 1 && points[i] == points[(i + 1) % n] {
                return Err(GeometryError::Duplicate((i + 1) % n));
            }
        }
        if n >= 3 {
            for i in 0..n {
                let o = orient(points[i], points[(i + 1) % n], points[(i + 2) % n]);
                if o != Orientation::CounterClockwise {
                    return Err(GeometryError::NotConvex((i + 1) % n));
                }
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fewer than three vertices: a point or a segment.
    pub fn is_degenerate(&self) -> bool {
        self.points.len() < 3
    }

    /// Boundary edges. A two-point hull has one edge, a point hull none.
    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.points.len();
        let count = match n {
            0 | 1 => 0,
            2 => 1,
            _ => n,
        };
        (0..count).map(move |i| Segment::new(self.points[i], self.points[(i + 1) % n]))
    }

    pub fn translate(&self, offset: Vec2) -> Self {
        Self {
            points: self.points.iter().map(|&p| p + offset).collect(),
        }
    }

    /// Shoelace area, m².
    pub fn area(&self) -> f64 {
        let n = self.points.len();
        if n < 3 {
            return 0.0;
        }
        0.5 * (0..n)
            .map(|i| self.points[i].cross(self.points[(i + 1) % n]))
            .sum::<f64>()
    }

    pub fn centroid_of_vertices(&self) -> Point2 {
        let n = self.points.len() as f64;
        let sum = self.points.iter().fold(Point2::ZERO, |acc, &p| acc + p);
        sum * (1.0 / n)
    }

    pub fn contains(&self, p: Point2) -> bool {
        point_in_convex(p, self)
    }
}

/// Andrew's monotone chain. Output starts at the lexicographically smallest
/// point and runs counter-clockwise; collinear boundary points are dropped.
pub fn convex_hull(points: &[Point2]) -> Result<HullPolygon, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite(i));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    sorted.dedup();
    if sorted.len() < 3 {
        return Ok(HullPolygon { points: sorted });
    }

    let mut lower: Vec<Point2> = Vec::with_capacity(sorted.len());
    for &p in &sorted {
        while lower.len() >= 2
            && orient(lower[lower.len() - 2], lower[lower.len() - 1], p) != Orientation::CounterClockwise
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::with_capacity(sorted.len());
    for &p in sorted.iter().rev() {
        while upper.len() >= 2
            && orient(upper[upper.len() - 2], upper[upper.len() - 1], p) != Orientation::CounterClockwise
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    // All-collinear input leaves [first, last] twice over.
    lower.dedup();
    if lower.len() == 2 && lower[0] == lower[1] {
        lower.pop();
    }
    Ok(HullPolygon { points: lower })
}

/// Inclusive containment: boundary points count as inside.
pub fn point_in_convex(p: Point2, hull: &HullPolygon) -> bool {
    let pts = hull.points();
    match pts.len() {
        0 => false,
        1 => (p.x - pts[0].x).abs() <= EPS_GEOM && (p.y - pts[0].y).abs() <= EPS_GEOM,
        2 => on_segment(p, &Segment::new(pts[0], pts[1])),
        n => (0..n).all(|i| orient(pts[i], pts[(i + 1) % n], p) != Orientation::Clockwise),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HullRelation {
    Disjoint,
    EdgeIntersect,
    H1ContainsH2,
    H2ContainsH1,
}

/// Classifies two convex hulls by proper edge crossings first, containment
/// second.
///
/// Containment checks every vertex rather than a single one, so hulls that
/// only touch along an edge or at a vertex classify as `Disjoint`.
pub fn hulls_relate(h1: &HullPolygon, h2: &HullPolygon) -> HullRelation {
    if edges_cross(h1, h2) {
        return HullRelation::EdgeIntersect;
    }
    if h2.points().iter().all(|&p| point_in_convex(p, h1)) {
        return HullRelation::H1ContainsH2;
    }
    if h1.points().iter().all(|&p| point_in_convex(p, h2)) {
        return HullRelation::H2ContainsH1;
    }
    HullRelation::Disjoint
}

/// True if any edge of `h1` properly crosses any edge of `h2`.
pub fn edges_cross(h1: &HullPolygon, h2: &HullPolygon) -> bool {
    h1.edges()
        .any(|e1| h2.edges().any(|e2| segments_intersect(&e1, &e2)))
}

/// True if the boundaries touch without any proper crossing (the collinear
/// and endpoint-contact cases the crossing test deliberately ignores).
pub fn boundary_contact_without_crossing(h1: &HullPolygon, h2: &HullPolygon) -> bool {
    !edges_cross(h1, h2) && h1.edges().any(|e1| h2.edges().any(|e2| segments_touch(&e1, &e2)))
}

/// Rectangle with axes along `heading` and `heading + π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    pub center: Point2,
    pub heading: f64,
    pub half_length: f64,
    pub half_width: f64,
}

impl OrientedBox {
    pub fn new(center: Point2, heading: f64, length: f64, width: f64) -> Self {
        Self {
            center,
            heading,
            half_length: 0.5 * length,
            half_width: 0.5 * width,
        }
    }

    pub fn axes(&self) -> (Vec2, Vec2) {
        let u = Point2::from_angle(self.heading);
        (u, Point2::new(-u.y, u.x))
    }

    /// Counter-clockwise corners, starting front-right.
    pub fn corners(&self) -> [Point2; 4] {
        let (u, w) = self.axes();
        let (l, h) = (self.half_length, self.half_width);
        [
            self.center + u * l - w * h,
            self.center + u * l + w * h,
            self.center - u * l + w * h,
            self.center - u * l - w * h,
        ]
    }

    pub fn to_hull(&self) -> HullPolygon {
        convex_hull(&self.corners()).expect("box corners are finite and non-empty")
    }

    /// Grows every side outward by `margin` meters.
    pub fn expanded(&self, margin: f64) -> Self {
        Self {
            half_length: self.half_length + margin,
            half_width: self.half_width + margin,
            ..*self
        }
    }

    /// Inclusive point test in the box's own frame.
    pub fn contains(&self, p: Point2) -> bool {
        let (u, w) = self.axes();
        let d = p - self.center;
        d.dot(u).abs() <= self.half_length + 1e-12 && d.dot(w).abs() <= self.half_width + 1e-12
    }

    /// Axis-aligned bounds as (min, max).
    pub fn aabb(&self) -> (Point2, Point2) {
        let c = self.corners();
        let mut lo = c[0];
        let mut hi = c[0];
        for p in &c[1..] {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Separating-axis overlap test (touching counts as overlap).
    pub fn overlaps(&self, other: &OrientedBox) -> bool {
        let a = self.corners();
        let b = other.corners();
        let (u1, w1) = self.axes();
        let (u2, w2) = other.axes();
        for axis in [u1, w1, u2, w2] {
            let (amin, amax) = project(&a, axis);
            let (bmin, bmax) = project(&b, axis);
            if amax < bmin || bmax < amin {
                return false;
            }
        }
        true
    }
}

fn project(pts: &[Point2; 4], axis: Vec2) -> (f64, f64) {
    pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let d = p.dot(axis);
        (lo.min(d), hi.max(d))
    })
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}
