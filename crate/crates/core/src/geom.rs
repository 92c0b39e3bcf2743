//! Planar geometry kernel shared by every protocol rule.
//!
//! All predicates that the protocol phrases as exact ("on the SEC",
//! "aligned", "at the center") are evaluated under a [`Tolerance`]. The
//! length tolerance is usually derived from the configuration diameter so
//! that every decision is invariant under uniform scaling.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fixed stream used to shuffle SEC input so the result only depends on the
/// input ordering.
const SEC_SHUFFLE_SEED: u64 = 0x5EC0_5EC0_5EC0_5EC0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("no points")]
    NoPoints,
    #[error("degenerate angle")]
    DegenerateAngle,
    #[error("ray misses circle")]
    RayMissesCircle,
}

/// A planar point (also used as a free vector).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

pub type Vector = Point;

impl From<[f64; 2]> for Point {
    fn from(a: [f64; 2]) -> Self {
        Point::new(a[0], a[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Unit vector at `theta` radians from +x.
    #[inline]
    pub fn polar(theta: f64) -> Self {
        Point::new(theta.cos(), theta.sin())
    }

    #[inline]
    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    #[inline]
    pub fn dist_sq(self, o: Point) -> f64 {
        (self - o).norm_sq()
    }

    /// Unit vector in the same direction, `None` for the zero vector.
    pub fn normalized(self) -> Option<Point> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    /// Rotated by +90 degrees.
    #[inline]
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn rotate(self, theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    #[inline]
    pub fn midpoint(self, o: Point) -> Point {
        Point::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }

    #[inline]
    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }

    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    #[inline]
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point, radius: f64) -> Self {
        debug_assert!(radius >= 0.0);
        Circle { center, radius }
    }

    /// Circle having segment `a`-`b` as diameter.
    pub fn from_diameter(a: Point, b: Point) -> Self {
        let center = a.midpoint(b);
        Circle::new(center, 0.5 * a.dist(b))
    }

    /// Circumscribed circle, `None` when the points are (numerically) collinear.
    pub fn circumcircle(a: Point, b: Point, c: Point) -> Option<Self> {
        let ab = b - a;
        let ac = c - a;
        let d = 2.0 * ab.cross(ac);
        let scale = ab.norm_sq().max(ac.norm_sq());
        if d.abs() <= 1e-14 * scale {
            return None;
        }
        let ab2 = ab.norm_sq();
        let ac2 = ac.norm_sq();
        let ux = (ac.y * ab2 - ab.y * ac2) / d;
        let uy = (ab.x * ac2 - ac.x * ab2) / d;
        let center = a + Point::new(ux, uy);
        let radius = center.dist(a).max(center.dist(b)).max(center.dist(c));
        Some(Circle::new(center, radius))
    }

    #[inline]
    pub fn contains(&self, p: Point, eps: f64) -> bool {
        let r = self.radius + eps;
        self.center.dist_sq(p) <= r * r
    }

    /// True when `p` lies on the boundary within `eps`.
    #[inline]
    pub fn on_boundary(&self, p: Point, eps: f64) -> bool {
        (self.center.dist(p) - self.radius).abs() <= eps
    }

    /// Point of the boundary at polar angle `theta` around the center.
    #[inline]
    pub fn point_at(&self, theta: f64) -> Point {
        self.center + Point::polar(theta) * self.radius
    }
}

/// Slack used for the predicates the protocol states exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub eps_len: f64,
    pub eps_ang: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            eps_len: 1e-9,
            eps_ang: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn new(eps_len: f64, eps_ang: f64) -> Self {
        assert!(eps_len > 0.0 && eps_ang > 0.0, "tolerances must be positive");
        Tolerance { eps_len, eps_ang }
    }

    /// Length slack of `rel` times the configuration diameter.
    pub fn relative_to(points: &[Point], rel: f64, eps_ang: f64) -> Self {
        let diam = diameter(points);
        let eps_len = if diam > 0.0 { rel * diam } else { rel };
        Tolerance { eps_len, eps_ang }
    }
}

/// Largest pairwise distance; 0 for fewer than two points.
pub fn diameter(points: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(a.dist_sq(*b));
        }
    }
    best.sqrt()
}

pub fn barycenter(points: &[Point]) -> Result<Point, GeomError> {
    if points.is_empty() {
        return Err(GeomError::NoPoints);
    }
    let sum = points.iter().fold(Point::ORIGIN, |acc, p| acc + *p);
    Ok(sum * (1.0 / points.len() as f64))
}

/// Smallest enclosing circle, randomized incremental construction.
///
/// The input is shuffled with a fixed stream, so the output is a pure
/// function of the input sequence.
pub fn smallest_enclosing_circle(points: &[Point]) -> Result<Circle, GeomError> {
    if points.is_empty() {
        return Err(GeomError::NoPoints);
    }
    let mut pts = points.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(SEC_SHUFFLE_SEED);
    pts.shuffle(&mut rng);

    // Relative slack for the incremental containment tests; the minimal
    // circle is only perturbed by this amount.
    let slack = 1e-12 * diameter_bound(&pts);

    let mut c = Circle::new(pts[0], 0.0);
    for i in 1..pts.len() {
        if c.contains(pts[i], slack) {
            continue;
        }
        c = Circle::new(pts[i], 0.0);
        for j in 0..i {
            if c.contains(pts[j], slack) {
                continue;
            }
            c = Circle::from_diameter(pts[i], pts[j]);
            for k in 0..j {
                if c.contains(pts[k], slack) {
                    continue;
                }
                c = Circle::circumcircle(pts[i], pts[j], pts[k])
                    .unwrap_or_else(|| widest_pair_circle(&[pts[i], pts[j], pts[k]]));
            }
        }
    }
    Ok(c)
}

/// Cheap upper bound on the diameter (bounding-box diagonal).
fn diameter_bound(points: &[Point]) -> f64 {
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    lo.dist(hi)
}

fn widest_pair_circle(points: &[Point]) -> Circle {
    let mut best = Circle::new(points[0], 0.0);
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let c = Circle::from_diameter(*a, *b);
            if c.radius > best.radius {
                best = c;
            }
        }
    }
    best
}

/// Unsigned angle at `vertex` between the rays towards `p` and `q`, in [0, π].
pub fn angle_at(vertex: Point, p: Point, q: Point) -> Result<f64, GeomError> {
    let u = (p - vertex).normalized().ok_or(GeomError::DegenerateAngle)?;
    let v = (q - vertex).normalized().ok_or(GeomError::DegenerateAngle)?;
    Ok(u.dot(v).clamp(-1.0, 1.0).acos())
}

/// Collinearity of three points under `tol.eps_ang`.
///
/// The cross product is normalized by the longest side squared, which is the
/// sine of the (small) angle the triangle makes up to a factor at most 2 and
/// is symmetric in the argument order.
pub fn collinear(a: Point, b: Point, c: Point, tol: Tolerance) -> bool {
    let l = a.dist_sq(b).max(b.dist_sq(c)).max(a.dist_sq(c));
    if l <= tol.eps_len * tol.eps_len {
        return true;
    }
    let area2 = (b - a).cross(c - a).abs();
    area2 <= tol.eps_ang * l
}

/// The four-point variant: conjunction over the three consecutive triples.
pub fn collinear4(a: Point, b: Point, c: Point, d: Point, tol: Tolerance) -> bool {
    collinear(a, b, c, tol) && collinear(b, c, d, tol) && collinear(a, c, d, tol)
}

/// Intersection of a ray with a circle: the exit point when the origin is
/// inside, the first hit otherwise.
pub fn ray_circle_intersection(
    origin: Point,
    direction: Vector,
    c: Circle,
) -> Result<Point, GeomError> {
    let dir = direction.normalized().ok_or(GeomError::RayMissesCircle)?;
    let oc = origin - c.center;
    let b = oc.dot(dir);
    let cc = oc.norm_sq() - c.radius * c.radius;
    let disc = b * b - cc;
    if disc < 0.0 {
        return Err(GeomError::RayMissesCircle);
    }
    let s = disc.sqrt();
    let (t0, t1) = (-b - s, -b + s);
    let t = if cc <= 0.0 {
        t1
    } else if t0 >= 0.0 {
        t0
    } else {
        return Err(GeomError::RayMissesCircle);
    };
    Ok(origin + dir * t)
}

/// Distance from `p` to the closed segment `a`-`b`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Minimum over `t ∈ [0,1]` of the distance between `a0 + t(a1-a0)` and
/// `b0 + t(b1-b0)`, i.e. closest approach of two points moving in lockstep.
/// Returns the distance and the parameter where it occurs.
pub fn closest_approach(a0: Point, a1: Point, b0: Point, b1: Point) -> (f64, f64) {
    let d0 = a0 - b0;
    let dv = (a1 - a0) - (b1 - b0);
    let vv = dv.norm_sq();
    let t = if vv == 0.0 {
        0.0
    } else {
        (-d0.dot(dv) / vv).clamp(0.0, 1.0)
    };
    ((d0 + dv * t).norm(), t)
}

/// Angle normalized to `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn sec_examples() {
        let c = smallest_enclosing_circle(&[p(0., 0.), p(2., 0.)]).unwrap();
        assert!((c.center.dist(p(1., 0.))) < 1e-12 && (c.radius - 1.0).abs() < 1e-12);
        let c = smallest_enclosing_circle(&[p(0., 0.), p(2., 0.), p(1., 1.)]).unwrap();
        assert!((c.center.dist(p(1., 0.))) < 1e-12 && (c.radius - 1.0).abs() < 1e-12);
        let c = smallest_enclosing_circle(&[p(3., 4.)]).unwrap();
        assert_eq!(c.center, p(3., 4.));
        assert_eq!(c.radius, 0.0);
        assert_eq!(smallest_enclosing_circle(&[]), Err(GeomError::NoPoints));
    }

    #[test]
    fn sec_handles_collinear_and_duplicates() {
        let pts = [p(0., 0.), p(1., 0.), p(2., 0.), p(1., 0.), p(3., 0.)];
        let c = smallest_enclosing_circle(&pts).unwrap();
        assert!((c.center.x - 1.5).abs() < 1e-12 && (c.radius - 1.5).abs() < 1e-12);
    }

    #[test]
    fn barycenter_examples() {
        assert_eq!(barycenter(&[p(0., 0.), p(2., 0.), p(1., 3.)]).unwrap(), p(1., 1.));
        assert_eq!(barycenter(&[p(5., 5.)]).unwrap(), p(5., 5.));
        assert_eq!(barycenter(&[p(-1., 0.), p(1., 0.)]).unwrap(), p(0., 0.));
        assert!(barycenter(&[]).is_err());
    }

    #[test]
    fn angle_examples() {
        let o = Point::ORIGIN;
        assert!((angle_at(o, p(1., 0.), p(0., 1.)).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((angle_at(o, p(1., 0.), p(-1., 0.)).unwrap() - PI).abs() < 1e-15);
        assert!((angle_at(o, p(1., 0.), p(1., 1.)).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(angle_at(o, o, p(1., 1.)), Err(GeomError::DegenerateAngle));
    }

    #[test]
    fn collinear_examples() {
        let tol = Tolerance::default();
        assert!(collinear(p(0., 0.), p(1., 1.), p(2., 2.), tol));
        assert!(!collinear(p(0., 0.), p(1., 0.), p(0., 1.), tol));
        // |cross| = 2e-12, longest side squared = 4: 5e-13 <= 1e-9.
        assert!(collinear(p(0., 0.), p(1., 1e-12), p(2., 0.), tol));
        assert!(collinear(p(1., 1.), p(1., 1.), p(3., 7.), tol));
    }

    #[test]
    fn ray_examples() {
        let unit = Circle::new(Point::ORIGIN, 1.0);
        assert_eq!(ray_circle_intersection(p(0., 0.), p(1., 0.), unit).unwrap(), p(1., 0.));
        assert_eq!(ray_circle_intersection(p(-2., 0.), p(1., 0.), unit).unwrap(), p(-1., 0.));
        let two = Circle::new(Point::ORIGIN, 2.0);
        assert_eq!(ray_circle_intersection(p(0., 0.), p(0., -1.), two).unwrap(), p(0., -2.));
        assert_eq!(
            ray_circle_intersection(p(-2., 5.), p(1., 0.), unit),
            Err(GeomError::RayMissesCircle)
        );
        assert_eq!(
            ray_circle_intersection(p(2., 0.), p(1., 0.), unit),
            Err(GeomError::RayMissesCircle)
        );
    }

    #[test]
    fn closest_approach_of_crossing_movers() {
        // Two robots swap across the origin at the same instant.
        let (d, t) = closest_approach(p(-1., 0.), p(1., 0.), p(0., -1.), p(0., 1.));
        assert!(d < 1e-15);
        assert!((t - 0.5).abs() < 1e-15);
        let (d, _) = closest_approach(p(0., 0.), p(1., 0.), p(0., 1.), p(1., 1.));
        assert!((d - 1.0).abs() < 1e-15);
    }
}
