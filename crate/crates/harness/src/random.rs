//! Random initial configurations.

use flock_core::Point;
use rand::Rng;

use crate::scenario::{RandomSpec, Shape};

/// Draws `spec.n` positions, redrawing degenerate configurations (two robots
/// closer than 1e-6 of the box diagonal, or all robots on one line). Returns
/// the positions and the number of rejected draws.
pub fn draw<R: Rng>(spec: &RandomSpec, rng: &mut R) -> (Vec<Point>, u32) {
    let mut rejections = 0;
    loop {
        let pts = match spec.shape {
            Shape::Uniform => uniform(spec, rng),
            Shape::Polygon => polygon(spec, rng),
        };
        if !degenerate(&pts, diagonal(spec) * 1e-6) {
            return (pts, rejections);
        }
        rejections += 1;
    }
}

fn diagonal(spec: &RandomSpec) -> f64 {
    let [x0, y0, x1, y1] = spec.bbox;
    Point::new(x1 - x0, y1 - y0).norm()
}

fn uniform<R: Rng>(spec: &RandomSpec, rng: &mut R) -> Vec<Point> {
    let [x0, y0, x1, y1] = spec.bbox;
    (0..spec.n)
        .map(|_| Point::new(rng.gen_range(x0..x1), rng.gen_range(y0..y1)))
        .collect()
}

fn polygon<R: Rng>(spec: &RandomSpec, rng: &mut R) -> Vec<Point> {
    let [x0, y0, x1, y1] = spec.bbox;
    let c = Point::new((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let r = 0.45 * (x1 - x0).min(y1 - y0);
    let k = (spec.n / 2).max(3).min(spec.n);
    let rot = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut pts: Vec<Point> = (0..k)
        .map(|i| c + Point::polar(rot + std::f64::consts::TAU * i as f64 / k as f64) * r)
        .collect();
    for _ in k..spec.n {
        let rho = 0.6 * r * rng.gen::<f64>().sqrt();
        pts.push(c + Point::polar(rng.gen_range(0.0..std::f64::consts::TAU)) * rho);
    }
    pts
}

/// Coincident points or all points on one line.
pub fn degenerate(pts: &[Point], min_gap: f64) -> bool {
    for (i, a) in pts.iter().enumerate() {
        if pts[i + 1..].iter().any(|b| a.dist(*b) < min_gap) {
            return true;
        }
    }
    let Some((&a, rest)) = pts.split_first() else {
        return true;
    };
    let Some(&b) = rest.iter().max_by(|p, q| a.dist(**p).total_cmp(&a.dist(**q))) else {
        return true;
    };
    let ab = b - a;
    let len = ab.norm();
    rest.iter().all(|&p| (ab.cross(p - a) / len).abs() < min_gap)
}
