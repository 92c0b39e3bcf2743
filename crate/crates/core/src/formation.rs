//! Bootstrapping the pattern (placement on the SEC, circular configuration)
//! and the ordered, collision-free pattern formation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coordsys::{choose, short_arc, CommonFrame, References};
use crate::geom::{self, Circle, Point, Tolerance};
use crate::motion::MotionParams;
use crate::world::Action;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormationError {
    #[error("wrong phase")]
    WrongPhase,
    #[error("references not diametral")]
    NotDiametral,
    #[error("identical points")]
    IdenticalPoints,
    #[error("pattern size mismatch")]
    SizeMismatch,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PatternError {
    #[error("pattern has no points")]
    Empty,
    #[error("anchor bolts coincide")]
    AnchorsCoincide,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("duplicate pattern points {0} and {1}")]
    Duplicate(usize, usize),
    #[error("point {0} outside the diameter circle (placement condition 1)")]
    OutsideCircle(usize),
    #[error("point {0} not strictly on the R2 side (placement condition 2)")]
    WrongSide(usize),
    #[error("point {0} on the SEC center (placement condition 3)")]
    AtCenter(usize),
    #[error("point {0} outside region K")]
    OutsideK(usize),
    #[error("points {0} and {1} share an x coordinate")]
    SharedX(usize, usize),
}

/// Target shape for the non-reference robots, in pattern space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlockPattern {
    pub points: Vec<Point>,
    pub anchor_o: Point,
    pub anchor_r2: Point,
}

/// Multiplies two points as complex numbers.
fn cmul(a: Point, b: Point) -> Point {
    Point::new(a.x * b.x - a.y * b.y, a.x * b.y + a.y * b.x)
}

fn cdiv(a: Point, b: Point) -> Point {
    let n = b.norm_sq();
    Point::new((a.x * b.x + a.y * b.y) / n, (a.y * b.x - a.x * b.y) / n)
}

impl FlockPattern {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points under the similarity sending `anchor_o` to (0,0) and
    /// `anchor_r2` to (0,-1): the unit common frame.
    pub fn normalized(&self) -> Vec<Point> {
        let c = cdiv(Point::new(0.0, -1.0), self.anchor_r2 - self.anchor_o);
        self.points.iter().map(|&p| cmul(p - self.anchor_o, c)).collect()
    }

    /// Global positions of the pattern fitted to a frame with known chirality.
    pub fn fit(&self, frame: &CommonFrame) -> Vec<Point> {
        self.normalized().into_iter().map(|q| frame.from_unit(q)).collect()
    }

    /// Load-time checks; `min_gap` is the smallest admissible x separation in
    /// unit coordinates.
    pub fn validate(&self, motion: &MotionParams, min_gap: f64) -> Result<(), PatternError> {
        if self.points.is_empty() {
            return Err(PatternError::Empty);
        }
        if self.points.iter().chain([&self.anchor_o, &self.anchor_r2]).any(|p| !p.is_finite()) {
            return Err(PatternError::NonFinite);
        }
        if self.anchor_o.dist(self.anchor_r2) <= 1e-12 {
            return Err(PatternError::AnchorsCoincide);
        }
        let q = self.normalized();
        let slack = 1e-12;
        for (i, a) in q.iter().enumerate() {
            for (j, b) in q.iter().enumerate().skip(i + 1) {
                if a.dist(*b) <= 1e-9 {
                    return Err(PatternError::Duplicate(i, j));
                }
                if (a.x - b.x).abs() <= min_gap {
                    return Err(PatternError::SharedX(i, j));
                }
            }
        }
        for (i, p) in q.iter().enumerate() {
            if p.norm() >= 1.0 - 1e-9 {
                return Err(PatternError::OutsideCircle(i));
            }
            if p.y >= 0.0 {
                return Err(PatternError::WrongSide(i));
            }
            if p.norm() <= 1e-9 {
                return Err(PatternError::AtCenter(i));
            }
            if p.y > -motion.h_prime * p.x.abs() + slack || p.y < motion.h * p.x.abs() - 1.0 - slack {
                return Err(PatternError::OutsideK(i));
            }
        }
        Ok(())
    }
}

/// The strict total order on positions: by x, then by y.
pub fn next_order(p: Point, q: Point, eps: f64) -> Result<bool, FormationError> {
    if p.dist(q) <= eps {
        return Err(FormationError::IdenticalPoints);
    }
    if (p.x - q.x).abs() > eps {
        Ok(p.x < q.x)
    } else {
        Ok(p.y < q.y)
    }
}

fn lex(a: &Point, b: &Point) -> std::cmp::Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y))
}

// ---------------------------------------------------------------------------
// Placement on the SEC

fn radial_point(sec: &Circle, p: Point) -> Option<Point> {
    geom::ray_circle_intersection(sec.center, p - sec.center, *sec).ok()
}

fn blocked_segment(points: &[Point], me: usize, a: Point, b: Point, clearance: f64) -> bool {
    points
        .iter()
        .enumerate()
        .any(|(j, &q)| j != me && geom::point_segment_distance(q, a, b) <= clearance)
}

/// Robots (other than the leader) with a clear radius to the SEC.
pub fn free_to_move(points: &[Point], refs: &References, tol: Tolerance) -> Vec<usize> {
    let sec = refs.sec;
    (0..points.len())
        .filter(|&i| i != refs.leader && !sec.on_boundary(points[i], tol.eps_len))
        .filter(|&i| match radial_point(&sec, points[i]) {
            Some(s) => !blocked_segment(points, i, points[i], s, tol.eps_len),
            None => false,
        })
        .collect()
}

/// Placement rules: radial move when the radius is clear, otherwise the
/// robots closest to the SEC slide toward a quarter point of the next arc.
pub fn placement_action(
    points: &[Point],
    me: usize,
    refs: &References,
    quarter: f64,
    tol: Tolerance,
) -> Result<Action, FormationError> {
    let sec = refs.sec;
    let o = sec.center;
    let mine = points[me];
    if me == refs.leader || sec.on_boundary(mine, tol.eps_len) {
        return Ok(Action::Stay);
    }
    let ftm = free_to_move(points, refs, tol);
    if ftm.contains(&me) {
        return Ok(radial_point(&sec, mine).map_or(Action::Stay, Action::Move));
    }
    if !ftm.is_empty() {
        return Ok(Action::Stay);
    }
    let gap = |i: usize| sec.radius - points[i].dist(o);
    let inside: Vec<usize> = (0..points.len())
        .filter(|&i| i != refs.leader && !sec.on_boundary(points[i], tol.eps_len))
        .collect();
    let best = inside.iter().map(|&i| gap(i)).fold(f64::INFINITY, f64::min);
    if gap(me) > best + tol.eps_len {
        return Ok(Action::Stay);
    }
    let Some(s) = radial_point(&sec, mine) else {
        return Ok(Action::Stay);
    };
    let on_sec: Vec<usize> = (0..points.len())
        .filter(|&i| sec.on_boundary(points[i], tol.eps_len))
        .collect();
    if !on_sec.iter().any(|&i| points[i].dist(s) <= tol.eps_len) {
        return Ok(Action::Stay);
    }
    // Next robot on the circle in the clockwise direction of this frame.
    let a0 = (mine - o).angle();
    let ang_eps = tol.eps_len / sec.radius;
    let step = on_sec
        .iter()
        .map(|&i| geom::wrap_angle(a0 - (points[i] - o).angle()))
        .filter(|&d| d > ang_eps && d < std::f64::consts::TAU - ang_eps)
        .fold(f64::INFINITY, f64::min);
    if !step.is_finite() {
        return Ok(Action::Stay);
    }
    let aq = a0 - quarter * step;
    let target = sec.point_at(aq);
    let clearance = 1e-6 * sec.radius;
    if !blocked_segment(points, me, mine, target, clearance) {
        return Ok(Action::Move(target));
    }
    // Something sits near the chord: turn along the current radius instead.
    let r = mine.dist(o);
    Ok(Action::Arc {
        center: o,
        target: o + Point::polar(aq) * r,
        ccw: false,
    })
}

// ---------------------------------------------------------------------------
// Circular flocking configuration

/// Final positions on one semicircle: `side` is +1 for the semicircle reached
/// by turning counter-clockwise from R1, -1 for the other. Ordered from the
/// closest to R1.
pub fn final_positions(
    sec: &Circle,
    r1: Point,
    r2: Point,
    m: usize,
    side: f64,
    tol: Tolerance,
) -> Result<Vec<Point>, FormationError> {
    let o = sec.center;
    if r1.midpoint(r2).dist(o) > tol.eps_len || !sec.on_boundary(r1, tol.eps_len) {
        return Err(FormationError::NotDiametral);
    }
    let half = std::f64::consts::FRAC_PI_2;
    Ok((1..=m)
        .map(|j| {
            let theta = side.signum() * (half + j as f64 * half / (m as f64 + 1.0));
            o + (r1 - o).rotate(theta)
        })
        .collect())
}

fn side_of(o: Point, r1: Point, p: Point) -> f64 {
    if (r1 - o).cross(p - o) >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Unsigned angle at O from R1 to `p`.
fn angle_from_r1(o: Point, r1: Point, p: Point) -> f64 {
    let (a, b) = (r1 - o, p - o);
    a.cross(b).abs().atan2(a.dot(b))
}

/// Target of every rest robot in the circular configuration, as
/// `(robot, target)` pairs.
pub fn circular_targets(
    points: &[Point],
    refs: &References,
    tol: Tolerance,
) -> Result<Vec<(usize, Point)>, FormationError> {
    let o = refs.o();
    let (r1, r2) = (points[refs.r1], points[refs.r2]);
    let mut out = Vec::with_capacity(refs.rest.len());
    for side in [1.0, -1.0] {
        let mut mine: Vec<usize> = refs
            .rest
            .iter()
            .copied()
            .filter(|&i| side_of(o, r1, points[i]) == side)
            .collect();
        mine.sort_by(|&a, &b| angle_from_r1(o, r1, points[a]).total_cmp(&angle_from_r1(o, r1, points[b])));
        let targets = final_positions(&refs.sec, r1, r2, mine.len(), side, tol)?;
        out.extend(mine.into_iter().zip(targets));
    }
    Ok(out)
}

/// Every rest robot is at its final position and the leader is on the axis,
/// off the center.
pub fn circular_config_holds(points: &[Point], refs: &References, tol: Tolerance) -> bool {
    let o = refs.o();
    let (l, r1, r2) = refs.points(points);
    if l.dist(o) <= tol.eps_len || !geom::collinear4(r1, r2, l, o, tol) {
        return false;
    }
    match circular_targets(points, refs, tol) {
        Ok(t) => t.iter().all(|&(i, p)| points[i].dist(p) <= tol.eps_len),
        Err(_) => false,
    }
}

/// Slide along the SEC to the final position when no robot is in the way.
pub fn circular_config_action(
    points: &[Point],
    me: usize,
    refs: &References,
    tol: Tolerance,
) -> Result<Action, FormationError> {
    if !refs.rest.contains(&me) {
        return Ok(Action::Stay);
    }
    let sec = refs.sec;
    let o = sec.center;
    let r1 = points[refs.r1];
    let targets = circular_targets(points, refs, tol)?;
    let Some(&(_, target)) = targets.iter().find(|(i, _)| *i == me) else {
        return Ok(Action::Stay);
    };
    let mine = points[me];
    if mine.dist(target) <= tol.eps_len {
        return Ok(Action::Stay);
    }
    let side = side_of(o, r1, mine);
    let (a0, a1) = (angle_from_r1(o, r1, mine), angle_from_r1(o, r1, target));
    let (lo, hi) = (a0.min(a1), a0.max(a1));
    let ang_eps = tol.eps_len / sec.radius;
    let blocked = (0..points.len()).any(|j| {
        if j == me || !sec.on_boundary(points[j], tol.eps_len) {
            return false;
        }
        let a = angle_from_r1(o, r1, points[j]);
        let same_side = side_of(o, r1, points[j]) == side || a < ang_eps || a > std::f64::consts::PI - ang_eps;
        same_side && a > lo - ang_eps && a < hi + ang_eps && (a - a0).abs() > ang_eps
    });
    if blocked {
        return Ok(Action::Stay);
    }
    Ok(short_arc(o, mine, target))
}

// ---------------------------------------------------------------------------
// Pattern formation

/// Rest robots ranked by the Next order, each paired with the pattern
/// position of equal rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub robots: Vec<usize>,
    pub targets: Vec<Point>,
}

impl Assignment {
    pub fn rank_of(&self, robot: usize) -> Option<usize> {
        self.robots.iter().position(|&r| r == robot)
    }

    /// Largest distance between a robot and its target.
    pub fn max_error(&self, points: &[Point]) -> f64 {
        self.robots
            .iter()
            .zip(&self.targets)
            .map(|(&r, t)| points[r].dist(*t))
            .fold(0.0, f64::max)
    }
}

/// Ranks robots and fitted positions in the frame and pairs them.
pub fn assign(
    points: &[Point],
    rest: &[usize],
    fitted: &[Point],
    frame: &CommonFrame,
) -> Result<Assignment, FormationError> {
    if rest.len() != fitted.len() {
        return Err(FormationError::SizeMismatch);
    }
    let mut robots = rest.to_vec();
    robots.sort_by(|&a, &b| lex(&frame.to_common(points[a]), &frame.to_common(points[b])));
    let mut targets = fitted.to_vec();
    targets.sort_by(|a, b| lex(&frame.to_common(*a), &frame.to_common(*b)));
    Ok(Assignment { robots, targets })
}

/// Ordered pattern formation rules for robot `me`.
pub fn pattern_action(
    points: &[Point],
    me: usize,
    asg: &Assignment,
    frame: &CommonFrame,
    clamp_eps: f64,
    tol: Tolerance,
) -> Action {
    let Some(k) = asg.rank_of(me) else {
        return Action::Stay;
    };
    let mine = points[me];
    let goal = asg.targets[k];
    if mine.dist(goal) <= tol.eps_len {
        return Action::Stay;
    }
    // Rule 1: wait while my position is on someone else's trajectory.
    for (j, (&r, &t)) in asg.robots.iter().zip(&asg.targets).enumerate() {
        if j != k && points[r].dist(t) > tol.eps_len && geom::point_segment_distance(goal, points[r], t) <= tol.eps_len {
            return Action::Stay;
        }
    }
    // Rule 2: never overtake an order neighbor.
    let c = frame.to_common(mine);
    let g = frame.to_common(goal);
    let mut stop_x = g.x;
    if g.x < c.x - tol.eps_len {
        if k > 0 {
            let pred = frame.to_common(points[asg.robots[k - 1]]);
            stop_x = stop_x.max(pred.x + clamp_eps);
        }
        if stop_x >= c.x {
            return Action::Stay;
        }
    } else if g.x > c.x + tol.eps_len {
        if k + 1 < asg.robots.len() {
            let succ = frame.to_common(points[asg.robots[k + 1]]);
            stop_x = stop_x.min(succ.x - clamp_eps);
        }
        if stop_x <= c.x {
            return Action::Stay;
        }
    }
    let target = if (g.x - c.x).abs() <= tol.eps_len || stop_x == g.x {
        goal
    } else {
        let s = (stop_x - c.x) / (g.x - c.x);
        frame.from_common(c + (g - c) * s)
    };
    if blocked_segment(points, me, mine, target, tol.eps_len) {
        return Action::Stay;
    }
    Action::Move(target)
}

/// Distance from O at which the leader sits during pattern formation: at
/// most its current distance, and half the clearance left by the rest robots
/// and their trajectories.
pub fn leader_offset_distance(points: &[Point], refs: &References, asg: &Assignment, tol: Tolerance) -> f64 {
    let o = refs.o();
    let dl = points[refs.leader].dist(o);
    let rho = refs.rest.iter().map(|&i| points[i].dist(o)).fold(f64::INFINITY, f64::min);
    let tau = asg
        .robots
        .iter()
        .zip(&asg.targets)
        .map(|(&r, &t)| geom::point_segment_distance(o, points[r], t))
        .fold(f64::INFINITY, f64::min);
    let clear = (rho / 2.0).min(tau / 2.0);
    if dl > tol.eps_len {
        dl.min(clear)
    } else {
        clear
    }
}

/// Point on the +x axis of `frame` at the leader offset distance.
pub fn leader_offset_point(frame: &CommonFrame, dist: f64) -> Point {
    frame.from_common(Point::new(dist, 0.0))
}

/// Side (sign relative to `base_perp`) the leader picks by itself: the
/// candidate with larger y, then larger x, in its own frame.
pub fn leader_local_side(frame: &CommonFrame, tol: Tolerance) -> f64 {
    let a = frame.origin + frame.base_perp();
    let b = frame.origin - frame.base_perp();
    match choose(a, b, tol) {
        Ok(1) => -1.0,
        _ => 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coordsys::extract_references;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn deg(d: f64) -> Point {
        Point::polar(d.to_radians())
    }

    #[test]
    fn final_position_examples() {
        let sec = Circle::new(Point::ORIGIN, 1.0);
        let (r1, r2) = (deg(90.0), deg(270.0));
        let one = final_positions(&sec, r1, r2, 1, 1.0, tol()).unwrap();
        assert!(one[0].dist(deg(225.0)) < 1e-12);
        let two = final_positions(&sec, r1, r2, 2, 1.0, tol()).unwrap();
        assert!(two[0].dist(deg(210.0)) < 1e-12 && two[1].dist(deg(240.0)) < 1e-12);
        assert!(final_positions(&sec, r1, r2, 0, 1.0, tol()).unwrap().is_empty());
        let right = final_positions(&sec, r1, r2, 1, -1.0, tol()).unwrap();
        assert!(right[0].dist(deg(-45.0)) < 1e-12);
        assert_eq!(
            final_positions(&sec, r1, deg(200.0), 1, 1.0, tol()),
            Err(FormationError::NotDiametral)
        );
    }

    #[test]
    fn next_order_examples() {
        assert_eq!(next_order(p(0., 0.), p(1., 0.), 1e-9), Ok(true));
        assert_eq!(next_order(p(1., 2.), p(1., 3.), 1e-9), Ok(true));
        assert_eq!(next_order(p(2., 0.), p(1., 5.), 1e-9), Ok(false));
        assert_eq!(next_order(p(2., 0.), p(2., 0.), 1e-9), Err(FormationError::IdenticalPoints));
    }

    /// Unit SEC, R1 at top, R2 at bottom, leader on the axis.
    fn base(leader: Point, rest: &[Point]) -> Vec<Point> {
        let mut v = vec![p(0., 1.), p(0., -1.), leader];
        v.extend_from_slice(rest);
        v
    }

    #[test]
    fn placement_radial() {
        let pts = base(p(0., 0.1), &[p(0.5, 0.), p(-0.6, -0.8)]);
        let refs = extract_references(&pts, tol()).unwrap();
        let a = placement_action(&pts, 3, &refs, 0.25, tol()).unwrap();
        assert_eq!(a, Action::Move(p(1., 0.)));
        assert_eq!(placement_action(&pts, 4, &refs, 0.25, tol()).unwrap(), Action::Stay);
        assert_eq!(placement_action(&pts, 2, &refs, 0.25, tol()).unwrap(), Action::Stay);
    }

    #[test]
    fn placement_quarter_point() {
        // (1,0) occupies my radius; clockwise the next SEC robot is R2 at -90°.
        let pts = base(p(0., 0.1), &[p(0.5, 0.), p(1., 0.), deg(135.0)]);
        let refs = extract_references(&pts, tol()).unwrap();
        let a = placement_action(&pts, 3, &refs, 0.25, tol()).unwrap();
        let Action::Move(t) = a else { panic!("{a:?}") };
        assert!(t.dist(deg(-22.5)) < 1e-12, "{t:?}");
    }

    #[test]
    fn placement_waits_for_free_robots() {
        // Robot 3 is blocked, robot 5 can still go radially, so 3 waits.
        let pts = base(p(0., 0.1), &[p(0.5, 0.), p(1., 0.), p(-0.3, -0.2)]);
        let refs = extract_references(&pts, tol()).unwrap();
        assert_eq!(placement_action(&pts, 3, &refs, 0.25, tol()).unwrap(), Action::Stay);
        assert!(matches!(placement_action(&pts, 5, &refs, 0.25, tol()).unwrap(), Action::Move(_)));
    }

    #[test]
    fn circular_config_examples() {
        let pts = base(p(0., 0.3), &[deg(135.0), deg(-60.0)]);
        let refs = extract_references(&pts, tol()).unwrap();
        let a = circular_config_action(&pts, 3, &refs, tol()).unwrap();
        let Action::Arc { target, ccw, .. } = a else { panic!("{a:?}") };
        assert!(target.dist(deg(225.0)) < 1e-12);
        assert!(ccw);

        // A robot between me and my final position blocks me.
        let pts = base(p(0., 0.3), &[deg(100.0), deg(120.0)]);
        let refs = extract_references(&pts, tol()).unwrap();
        let t = circular_targets(&pts, &refs, tol()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(circular_config_action(&pts, 3, &refs, tol()).unwrap(), Action::Stay);
        assert!(matches!(circular_config_action(&pts, 4, &refs, tol()).unwrap(), Action::Arc { .. }));

        // Fixpoint.
        let pts = base(p(0., 0.3), &[deg(210.0), deg(240.0), deg(-45.0)]);
        let refs = extract_references(&pts, tol()).unwrap();
        assert!(circular_config_holds(&pts, &refs, tol()));
        for i in 0..pts.len() {
            assert_eq!(circular_config_action(&pts, i, &refs, tol()).unwrap(), Action::Stay);
        }
    }

    fn frame_with_leader(pts: &[Point]) -> (References, CommonFrame) {
        let refs = extract_references(pts, tol()).unwrap();
        let f = CommonFrame::new(&refs, pts, tol());
        (refs, f)
    }

    #[test]
    fn pattern_single_robot_goes_straight() {
        let pts = base(p(0.1, 0.), &[p(-0.5, -0.3)]);
        let (refs, f) = frame_with_leader(&pts);
        let asg = assign(&pts, &refs.rest, &[p(-0.2, -0.4)], &f).unwrap();
        let a = pattern_action(&pts, 3, &asg, &f, 0.01, tol());
        assert_eq!(a, Action::Move(p(-0.2, -0.4)));
    }

    #[test]
    fn pattern_rule1_waits() {
        // Robot 4 must cross (-0.2,-0.5), the position assigned to robot 3.
        let pts = base(p(0.1, 0.), &[p(-0.6, -0.5), p(-0.4, -0.3)]);
        let (_, f) = frame_with_leader(&pts);
        let asg = Assignment {
            robots: vec![3, 4],
            targets: vec![p(-0.2, -0.5), p(0.0, -0.7)],
        };
        assert_eq!(pattern_action(&pts, 3, &asg, &f, 0.01, tol()), Action::Stay);
    }

    #[test]
    fn pattern_rule2_clamps_at_predecessor() {
        // Moving right toward x = 0.3 behind a successor sitting at x = 0.1.
        let pts = base(p(0.1, 0.), &[p(-0.5, -0.5), p(0.1, -0.3)]);
        let (_, f) = frame_with_leader(&pts);
        let asg = Assignment {
            robots: vec![3, 4],
            targets: vec![p(0.3, -0.5), p(0.5, -0.6)],
        };
        let a = pattern_action(&pts, 3, &asg, &f, 0.01, tol());
        let Action::Move(t) = a else { panic!("{a:?}") };
        assert!((t.x - 0.09).abs() < 1e-12 && (t.y + 0.5).abs() < 1e-12, "{t:?}");

        // Mirror case: moving left toward x = -0.1 with the predecessor at x = -0.3
        // stops at -0.1 (the clamp at -0.29 lies beyond the goal).
        let pts = base(p(0.1, 0.), &[p(-0.3, -0.5), p(0.4, -0.4)]);
        let (_, f) = frame_with_leader(&pts);
        let asg = Assignment {
            robots: vec![3, 4],
            targets: vec![p(-0.5, -0.5), p(-0.1, -0.4)],
        };
        let a = pattern_action(&pts, 4, &asg, &f, 0.01, tol());
        assert_eq!(a, Action::Move(p(-0.1, -0.4)));
        // With the goal beyond the predecessor, the step stops at x = -0.29.
        let asg = Assignment {
            robots: vec![3, 4],
            targets: vec![p(-0.5, -0.5), p(-0.35, -0.4)],
        };
        let Action::Move(t) = pattern_action(&pts, 4, &asg, &f, 0.01, tol()) else { panic!() };
        assert!((t.x + 0.29).abs() < 1e-12, "{t:?}");
    }

    #[test]
    fn pattern_normalization_and_validation() {
        let pat = FlockPattern {
            points: vec![p(1., -2.), p(-1., -3.)],
            anchor_o: p(0., 0.),
            anchor_r2: p(0., -4.),
        };
        let q = pat.normalized();
        assert!(q[0].dist(p(0.25, -0.5)) < 1e-12);
        let mp = MotionParams::default();
        assert!(pat.validate(&mp, 1e-6).is_ok());
        let mirrored = FlockPattern {
            points: vec![p(1., 2.)],
            ..pat.clone()
        };
        assert_eq!(mirrored.validate(&mp, 1e-6), Err(PatternError::WrongSide(0)));
        let dup = FlockPattern {
            points: vec![p(1., -2.), p(1., -2.)],
            ..pat.clone()
        };
        assert_eq!(dup.validate(&mp, 1e-6), Err(PatternError::Duplicate(0, 1)));
        let out_k = FlockPattern {
            points: vec![p(3., -1.)],
            ..pat
        };
        assert!(out_k.validate(&mp, 1e-6).is_err());
    }

    #[test]
    fn leader_offset_respects_clearances() {
        let pts = base(p(0., 0.5), &[deg(210.0), deg(240.0)]);
        let refs = extract_references(&pts, tol()).unwrap();
        let f = CommonFrame::undetermined(&refs, &pts).with_chirality(1.0);
        let asg = assign(&pts, &refs.rest, &[p(-0.3, -0.4), p(0.2, -0.5)], &f).unwrap();
        let l = leader_offset_distance(&pts, &refs, &asg, tol());
        assert!(l <= 0.25 + 1e-12 && l > 0.0);
        // A leader already close to the center keeps its distance.
        let pts = base(p(0., 0.1), &[deg(210.0), deg(240.0)]);
        let refs = extract_references(&pts, tol()).unwrap();
        let l = leader_offset_distance(&pts, &refs, &asg, tol());
        assert!((l - 0.1).abs() < 1e-12);
        let target = leader_offset_point(&f, l);
        assert!(target.dist(p(0.1, 0.)) < 1e-12);
    }
}
