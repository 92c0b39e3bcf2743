//! Velocity agreement: the safe regions M and K, the parameter calculus and
//! the motion rules of the head (R1) and the tail (R2).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{self, Point, Tolerance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MotionError {
    #[error("unsafe parameters")]
    UnsafeParameters,
    #[error("robot behind R1")]
    BehindR1,
    #[error("step exceeds the R2 bound")]
    StepTooLong,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MotionParams {
    /// Slope of the borders of M.
    pub k: f64,
    /// Slope of the lower borders of K (the cone at R2).
    pub h: f64,
    /// Slope of the upper borders of K (the cone at O).
    pub h_prime: f64,
    /// R2 step length.
    pub d: f64,
    /// R1–R2 distance that triggers an R2 step.
    pub d_rmax: f64,
    /// Refuse (error) instead of shortening an unsafe R2 step.
    pub strict: bool,
}

impl Default for MotionParams {
    fn default() -> Self {
        MotionParams {
            k: 1.5,
            h: 1.0,
            h_prime: 1.0,
            d: 0.25,
            d_rmax: 3.0,
            strict: false,
        }
    }
}

/// Outcome of [`validate_params`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamCheck {
    pub alpha: f64,
    pub beta: f64,
    pub valid: bool,
}

/// Computes α (at the intersection of y = hx + y_R2 and y = -kx + y_R1) and β
/// (at O, between y = kx and y = -h'x for x > 0). Both must be at least a
/// right angle.
pub fn validate_params(params: &MotionParams) -> ParamCheck {
    let (k, h, hp) = (params.k, params.h, params.h_prime);
    if !(k > 0.0 && h > 0.0 && hp > 0.0) || !k.is_finite() || !h.is_finite() || !hp.is_finite() {
        return ParamCheck {
            alpha: f64::NAN,
            beta: f64::NAN,
            valid: false,
        };
    }
    // Unit frame: R1 = (0,1), R2 = (0,-1).
    let (r1, r2) = (Point::new(0.0, 1.0), Point::new(0.0, -1.0));
    let ax = 2.0 / (h + k);
    let a = Point::new(ax, h * ax - 1.0);
    let alpha = geom::angle_at(a, r1, r2).unwrap_or(f64::NAN);
    let beta = geom::angle_at(Point::ORIGIN, Point::new(1.0, k), Point::new(1.0, -hp)).unwrap_or(f64::NAN);
    let right = std::f64::consts::FRAC_PI_2 - 1e-12;
    ParamCheck {
        alpha,
        beta,
        valid: alpha >= right && beta >= right && params.d > 0.0 && params.d_rmax > 0.0,
    }
}

/// Membership in M, given a point in common-frame coordinates and R1's y.
pub fn region_m_contains(p: Point, y_r1: f64, k: f64, eps: f64) -> bool {
    p.y >= k * p.x + y_r1 - eps && p.y >= -k * p.x + y_r1 - eps
}

/// Membership in K, given a point in common-frame coordinates and R2's y.
pub fn region_k_contains(p: Point, y_r2: f64, h: f64, h_prime: f64, eps: f64) -> bool {
    p.y <= -h_prime * p.x.abs() + eps && p.y >= h * p.x.abs() + y_r2 - eps
}

/// Borders of M violated by `p` (common frame): "left" is y = -kx + y_R1,
/// "right" is y = kx + y_R1.
pub fn violated_m_borders(p: Point, y_r1: f64, k: f64, eps: f64) -> Vec<&'static str> {
    let mut v = Vec::new();
    if p.y < -k * p.x + y_r1 - eps {
        v.push("y=-kx+y_R1");
    }
    if p.y < k * p.x + y_r1 - eps {
        v.push("y=kx+y_R1");
    }
    v
}

/// The published R2 step bound for one witness `b`:
/// dist(R1,R2)/2 - dist(R1,B)/(2 cos δ), δ = ∠R2 R1 B, floored at 0.
pub fn max_step_r2(r1: Point, r2: Point, b: Point) -> Result<f64, MotionError> {
    let delta = geom::angle_at(r1, r2, b).map_err(|_| MotionError::BehindR1)?;
    let c = delta.cos();
    if c <= 0.0 {
        return Err(MotionError::BehindR1);
    }
    Ok((r1.dist(r2) / 2.0 - r1.dist(b) / (2.0 * c)).max(0.0))
}

/// Largest R2 step keeping `b` on or inside the circle with diameter R1 R2'.
pub fn max_step_r2_tight(r1: Point, r2: Point, b: Point) -> Result<f64, MotionError> {
    let delta = geom::angle_at(r1, r2, b).map_err(|_| MotionError::BehindR1)?;
    let c = delta.cos();
    if c <= 0.0 {
        return Err(MotionError::BehindR1);
    }
    Ok((r1.dist(r2) - r1.dist(b) / c).max(0.0))
}

/// Whether `p` lies in the closed disk with diameter `a b`, with slack.
pub fn in_diameter_circle(a: Point, b: Point, p: Point, eps: f64) -> bool {
    let c = a.midpoint(b);
    p.dist(c) <= a.dist(b) / 2.0 + eps
}

/// R2's next position: a step of `min(d, bound)` toward R1, where the bound
/// is the smallest per-robot bound over `others`.
pub fn r2_step(
    r1: Point,
    r2: Point,
    others: &[Point],
    params: &MotionParams,
    tol: Tolerance,
) -> Result<Point, MotionError> {
    let mut bound = f64::INFINITY;
    for &b in others {
        if b.dist(r1) <= tol.eps_len {
            continue;
        }
        bound = bound.min(max_step_r2(r1, r2, b)?);
    }
    let len = if params.d <= bound {
        params.d
    } else if params.strict {
        return Err(MotionError::StepTooLong);
    } else {
        bound
    };
    let dir = (r1 - r2).normalized().ok_or(MotionError::BehindR1)?;
    Ok(r2 + dir * len)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn region_m_examples() {
        assert!(region_m_contains(p(0., 2.), 1.0, 1.0, 0.0));
        assert!(!region_m_contains(p(1., 1.5), 1.0, 1.0, 0.0));
        assert!(region_m_contains(p(0., 1.), 1.0, 1.0, 0.0));
        assert_eq!(violated_m_borders(p(1., 1.5), 1.0, 1.0, 0.0), vec!["y=kx+y_R1"]);
    }

    #[test]
    fn region_k_examples() {
        assert!(region_k_contains(p(0., -0.5), -1.0, 1.0, 1.0, 0.0));
        assert!(!region_k_contains(p(0.6, -0.5), -1.0, 1.0, 1.0, 0.0));
        assert!(region_k_contains(p(0., -1.), -1.0, 1.0, 1.0, 0.0));
    }

    fn check(k: f64, h: f64, hp: f64) -> ParamCheck {
        validate_params(&MotionParams {
            k,
            h,
            h_prime: hp,
            ..Default::default()
        })
    }

    #[test]
    fn validate_examples() {
        let c = check(1.0, 1.0, 1.0);
        assert!((c.alpha - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((c.beta - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(c.valid);
        let c = check(1.0, 2.0, 2.0);
        assert!((c.alpha.to_degrees() - 108.4349).abs() < 1e-3);
        assert!((c.beta.to_degrees() - 108.4349).abs() < 1e-3);
        assert!(c.valid);
        let c = check(1.0, 0.5, 1.0);
        assert!((c.alpha.to_degrees() - 71.5651).abs() < 1e-3);
        assert!(!c.valid);
    }

    #[test]
    fn closed_forms_agree() {
        for &(k, h, hp) in &[(0.3, 4.0, 0.7), (2.0, 0.5, 3.0), (1.5, 1.0, 1.0), (0.9, 0.9, 2.2)] {
            let c = check(k, h, hp);
            assert!((c.alpha - (h.atan() + k.atan())).abs() < 1e-12);
            assert!((c.beta - (hp.atan() + k.atan())).abs() < 1e-12);
            assert_eq!(c.valid, h * k >= 1.0 - 1e-12 && hp * k >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn max_step_examples() {
        let (r1, r2) = (p(0., 1.), p(0., -1.));
        assert!((max_step_r2(r1, r2, p(0., -0.5)).unwrap() - 0.25).abs() < 1e-12);
        assert!((max_step_r2(r1, r2, p(0., 0.)).unwrap() - 0.5).abs() < 1e-12);
        // δ = 60°, dist(R1,B) = 1.
        let b = r1 + (r2 - r1).normalized().unwrap().rotate(60f64.to_radians());
        assert!(max_step_r2(r1, r2, b).unwrap().abs() < 1e-12);
        assert_eq!(max_step_r2(r1, r2, p(0., 2.)), Err(MotionError::BehindR1));
    }

    #[test]
    fn r2_step_example() {
        let (r1, r2) = (p(0., 2.), p(0., -1.));
        let params = MotionParams {
            d: 0.2,
            ..Default::default()
        };
        // Bound for (0,-0.5) is 1.5 - 2.5/2 = 0.25 > d.
        let t = r2_step(r1, r2, &[p(0., -0.5)], &params, Tolerance::default()).unwrap();
        assert!(t.dist(p(0., -0.8)) < 1e-12);
        let strict = MotionParams {
            d: 0.3,
            strict: true,
            ..params
        };
        assert_eq!(
            r2_step(r1, r2, &[p(0., -0.5)], &strict, Tolerance::default()),
            Err(MotionError::StepTooLong)
        );
        let lax = MotionParams { strict: false, ..strict };
        let t = r2_step(r1, r2, &[p(0., -0.5)], &lax, Tolerance::default()).unwrap();
        assert!(t.dist(p(0., -0.75)) < 1e-12);
    }

    #[test]
    fn tight_bound_is_twice_the_published_one() {
        let (r1, r2) = (p(0., 1.), p(0., -1.));
        for b in [p(0.1, -0.5), p(-0.3, -0.2), p(0.0, -0.9)] {
            let a = max_step_r2(r1, r2, b).unwrap();
            let t = max_step_r2_tight(r1, r2, b).unwrap();
            assert!((t - 2.0 * a).abs() < 1e-12);
            let dir = (r1 - r2).normalized().unwrap();
            assert!(in_diameter_circle(r1, r2 + dir * t, b, 1e-12));
            assert!(!in_diameter_circle(r1, r2 + dir * (t * 1.001 + 1e-8), b, 0.0));
        }
    }
}
