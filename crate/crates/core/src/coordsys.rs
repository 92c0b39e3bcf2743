//! Emergence of the common coordinate system: far-robot separation, leader
//! election, alignment and reference extraction.
//!
//! Every function works on a plain slice of points expressed in one frame
//! (usually the acting robot's local frame) and returns indices into it.

use rand::Rng;
use thiserror::Error;

use crate::geom::{self, collinear, collinear4, Circle, Point, Tolerance, Vector};
use crate::world::{Action, RobotRng};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoordError {
    #[error("too few robots")]
    TooFew,
    #[error("degenerate")]
    Degenerate,
    #[error("wrong phase")]
    WrongPhase,
    #[error("symmetric candidates")]
    SymmetricCandidates,
}

/// Indices of the robots taking part in a maximum-distance pair.
pub fn far_robots(points: &[Point], tol: Tolerance) -> Result<Vec<usize>, CoordError> {
    if points.len() < 2 {
        return Err(CoordError::TooFew);
    }
    let dmax = geom::diameter(points);
    let mut far = vec![false; points.len()];
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i].dist(points[j]) >= dmax - tol.eps_len {
                far[i] = true;
                far[j] = true;
            }
        }
    }
    Ok((0..points.len()).filter(|&i| far[i]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationParams {
    /// Probability of moving, also the fraction of the distance to the
    /// barycenter travelled.
    pub p: f64,
    /// Optional cap on a single move, as a multiple of the current diameter.
    pub cap: Option<f64>,
}

impl Default for SeparationParams {
    fn default() -> Self {
        SeparationParams { p: 0.5, cap: Some(4.0) }
    }
}

/// Probabilistic step away from the barycenter of the far robots.
pub fn separation_action(
    points: &[Point],
    me: usize,
    params: SeparationParams,
    rng: &mut RobotRng,
    tol: Tolerance,
) -> Action {
    let Ok(far) = far_robots(points, tol) else {
        return Action::Stay;
    };
    if far.len() <= 2 || !far.contains(&me) {
        return Action::Stay;
    }
    if !rng.gen_bool(params.p.clamp(0.0, 1.0)) {
        return Action::Stay;
    }
    let fp: Vec<Point> = far.iter().map(|&i| points[i]).collect();
    let bary = geom::barycenter(&fp).expect("non-empty far set");
    let mine = points[me];
    let Some(dir) = (mine - bary).normalized() else {
        return Action::Stay;
    };
    let mut len = mine.dist(bary) * params.p;
    if let Some(c) = params.cap {
        len = len.min(c * geom::diameter(points));
    }
    Action::Move(mine + dir * len)
}

#[derive(Debug, Clone, PartialEq)]
pub enum LeaderElection {
    Unique(usize),
    /// Robots tied for closest to the SEC center.
    Tie(Vec<usize>),
}

/// The leader is the robot strictly closest to the SEC center.
pub fn elect_leader(points: &[Point], sec: &Circle, tol: Tolerance) -> Result<LeaderElection, CoordError> {
    if points.is_empty() {
        return Err(CoordError::TooFew);
    }
    if geom::diameter(points) <= tol.eps_len {
        return Err(CoordError::Degenerate);
    }
    let d: Vec<f64> = points.iter().map(|p| p.dist(sec.center)).collect();
    let best = d.iter().cloned().fold(f64::INFINITY, f64::min);
    let tied: Vec<usize> = (0..points.len()).filter(|&i| d[i] <= best + tol.eps_len).collect();
    Ok(if tied.len() == 1 {
        LeaderElection::Unique(tied[0])
    } else {
        LeaderElection::Tie(tied)
    })
}

/// With probability ½ a tied robot moves halfway toward the SEC center.
/// Far robots only take part when every tied robot is a far robot.
pub fn tie_break_action(
    points: &[Point],
    me: usize,
    sec: &Circle,
    tied: &[usize],
    far: &[usize],
    rng: &mut RobotRng,
) -> Action {
    let movers: Vec<usize> = tied.iter().copied().filter(|i| !far.contains(i)).collect();
    let movers = if movers.is_empty() { tied.to_vec() } else { movers };
    if !movers.contains(&me) || !rng.gen_bool(0.5) {
        return Action::Stay;
    }
    Action::Move(points[me].midpoint(sec.center))
}

/// Picks the candidate with the larger y, then the larger x.
pub fn choose(a: Point, b: Point, tol: Tolerance) -> Result<usize, CoordError> {
    if (a.y - b.y).abs() > tol.eps_len {
        Ok(if a.y > b.y { 0 } else { 1 })
    } else if (a.x - b.x).abs() > tol.eps_len {
        Ok(if a.x > b.x { 0 } else { 1 })
    } else {
        Err(CoordError::SymmetricCandidates)
    }
}

/// Arc along the circle around `center` from `from` to `to`, taking the
/// shorter way.
pub fn short_arc(center: Point, from: Point, to: Point) -> Action {
    let ccw = (from - center).cross(to - center) >= 0.0;
    Action::Arc {
        center,
        target: to,
        ccw,
    }
}

fn leader_of(points: &[Point], sec: &Circle, tol: Tolerance) -> Result<usize, CoordError> {
    match elect_leader(points, sec, tol)? {
        LeaderElection::Unique(l) => Ok(l),
        LeaderElection::Tie(_) => Err(CoordError::WrongPhase),
    }
}

/// Alignment of the far robots, the leader and the SEC center.
pub fn alignment_action(points: &[Point], me: usize, tol: Tolerance) -> Result<Action, CoordError> {
    let far = far_robots(points, tol)?;
    if far.len() != 2 {
        return Err(CoordError::WrongPhase);
    }
    let sec = geom::smallest_enclosing_circle(points).map_err(|_| CoordError::Degenerate)?;
    let leader = leader_of(points, &sec, tol)?;
    let o = sec.center;
    let (ia, ib) = (far[0], far[1]);
    let (ra, rb) = (points[ia], points[ib]);
    let mine = points[me];

    // Rule 1: far robots go to the circle first.
    let on_sec = |p: Point| sec.on_boundary(p, tol.eps_len);
    if far.contains(&me) && !on_sec(mine) {
        let dir = mine - o;
        return Ok(match geom::ray_circle_intersection(o, dir, sec) {
            Ok(t) => Action::Move(t),
            Err(_) => Action::Stay,
        });
    }
    if !on_sec(ra) || !on_sec(rb) {
        return Ok(Action::Stay);
    }
    let l = points[leader];
    let dl = l.dist(o);
    if collinear4(ra, rb, l, o, tol) && dl > tol.eps_len {
        return Ok(Action::Stay);
    }
    let lined_a = collinear(ra, l, o, tol);
    let lined_b = collinear(rb, l, o, tol);
    if lined_a && lined_b {
        // The leader sits on the center: step off it toward the chosen far
        // robot, staying strictly closer than everyone else.
        if me != leader {
            return Ok(Action::Stay);
        }
        let x = if choose(ra, rb, tol)? == 0 { ra } else { rb };
        let nearest = points
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != leader)
            .map(|(_, p)| p.dist(o))
            .fold(f64::INFINITY, f64::min);
        let dir = (x - o).normalized().ok_or(CoordError::Degenerate)?;
        return Ok(Action::Move(o + dir * (nearest / 2.0)));
    }
    if !lined_a && !lined_b {
        // Rule 3.
        if me != leader {
            return Ok(Action::Stay);
        }
        let x = if choose(ra, rb, tol)? == 0 { ra } else { rb };
        let dir = (x - o).normalized().ok_or(CoordError::Degenerate)?;
        return Ok(Action::Move(o + dir * dl));
    }
    // Rule 4: the far robot not lined up goes to the antipode of the other.
    let (lined, other) = if lined_a { (ra, ib) } else { (rb, ia) };
    if me != other {
        return Ok(Action::Stay);
    }
    let antipode = o - (lined - o);
    Ok(short_arc(o, mine, antipode))
}

/// The reference robots, by index into the observed point list.
#[derive(Debug, Clone, PartialEq)]
pub struct References {
    pub leader: usize,
    pub r1: usize,
    pub r2: usize,
    pub sec: Circle,
    /// Every other robot.
    pub rest: Vec<usize>,
    /// R2 is identified by the rest robots all lying on its side, not only
    /// by the leader's position on the axis.
    pub settled: bool,
}

impl References {
    pub fn o(&self) -> Point {
        self.sec.center
    }

    pub fn points(&self, pts: &[Point]) -> (Point, Point, Point) {
        (pts[self.leader], pts[self.r1], pts[self.r2])
    }
}

/// Recognizes Leader, R1 and R2.
///
/// R2 is the far robot strictly nearer every other robot (the side rule);
/// otherwise, when the leader lies on the axis, R1 is the far robot nearer the
/// leader, and the configuration is not settled. The side rule wins when both
/// apply, so an R2 step that leaves the leader behind O keeps the roles.
pub fn extract_references(points: &[Point], tol: Tolerance) -> Option<References> {
    let far = far_robots(points, tol).ok()?;
    if far.len() != 2 || points.len() < 3 {
        return None;
    }
    let sec = geom::smallest_enclosing_circle(points).ok()?;
    let o = sec.center;
    let (fa, fb) = (far[0], far[1]);
    let (pa, pb) = (points[fa], points[fb]);
    if !sec.on_boundary(pa, tol.eps_len) || !sec.on_boundary(pb, tol.eps_len) || pa.midpoint(pb).dist(o) > tol.eps_len {
        return None;
    }
    let leader = match elect_leader(points, &sec, tol).ok()? {
        LeaderElection::Unique(l) if l != fa && l != fb => l,
        _ => return None,
    };
    let rest: Vec<usize> = (0..points.len()).filter(|&i| i != fa && i != fb && i != leader).collect();
    let l = points[leader];

    let side_r2 = if rest.is_empty() {
        None
    } else if rest.iter().all(|&i| points[i].dist(pa) < points[i].dist(pb) - tol.eps_len) {
        Some(fa)
    } else if rest.iter().all(|&i| points[i].dist(pb) < points[i].dist(pa) - tol.eps_len) {
        Some(fb)
    } else {
        None
    };
    let leader_r1 = if collinear4(pa, pb, l, o, tol) {
        if l.dist(pa) < l.dist(pb) - tol.eps_len {
            Some(fa)
        } else if l.dist(pb) < l.dist(pa) - tol.eps_len {
            Some(fb)
        } else {
            None
        }
    } else {
        None
    };
    let other = |i: usize| if i == fa { fb } else { fa };
    let (r1, r2, settled) = match (side_r2, leader_r1) {
        (Some(r2), _) => (other(r2), r2, true),
        (None, Some(r1)) => (r1, other(r1), false),
        (None, None) => return None,
    };
    Some(References {
        leader,
        r1,
        r2,
        sec,
        rest,
        settled,
    })
}

/// Orthonormal frame centered at O with +y toward R1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommonFrame {
    pub origin: Point,
    pub y_axis: Vector,
    /// +x, known once the chirality is fixed.
    pub x_axis: Option<Vector>,
    /// SEC radius, the natural unit of the frame.
    pub radius: f64,
}

impl CommonFrame {
    /// Frame with +x on the leader's side when the leader is off the axis.
    pub fn new(refs: &References, points: &[Point], tol: Tolerance) -> Self {
        let mut f = Self::undetermined(refs, points);
        if let Some(s) = f.leader_side(points[refs.leader], tol) {
            f = f.with_chirality(s);
        }
        f
    }

    pub fn undetermined(refs: &References, points: &[Point]) -> Self {
        let o = refs.o();
        let y_axis = (points[refs.r1] - o).normalized().unwrap_or(Point::new(0.0, 1.0));
        CommonFrame {
            origin: o,
            y_axis,
            x_axis: None,
            radius: refs.sec.radius,
        }
    }

    /// `y_axis` turned clockwise by a right angle.
    pub fn base_perp(&self) -> Vector {
        Point::new(self.y_axis.y, -self.y_axis.x)
    }

    pub fn with_chirality(self, sign: f64) -> Self {
        CommonFrame {
            x_axis: Some(self.base_perp() * sign.signum()),
            ..self
        }
    }

    /// Sign (relative to `base_perp`) of the side of the axis holding `p`,
    /// `None` when `p` is on the axis.
    pub fn leader_side(&self, p: Point, tol: Tolerance) -> Option<f64> {
        let s = (p - self.origin).dot(self.base_perp());
        if s.abs() > tol.eps_len {
            Some(s.signum())
        } else {
            None
        }
    }

    pub fn chirality(&self) -> Option<f64> {
        self.x_axis.map(|x| x.dot(self.base_perp()).signum())
    }

    /// Coordinates in the frame; x is measured along `base_perp` when the
    /// chirality is undetermined.
    pub fn to_common(&self, p: Point) -> Point {
        let d = p - self.origin;
        let x = self.x_axis.unwrap_or(self.base_perp());
        Point::new(d.dot(x), d.dot(self.y_axis))
    }

    pub fn from_common(&self, q: Point) -> Point {
        let x = self.x_axis.unwrap_or(self.base_perp());
        self.origin + x * q.x + self.y_axis * q.y
    }

    /// Coordinates scaled so the SEC radius is one.
    pub fn to_unit(&self, p: Point) -> Point {
        self.to_common(p) * (1.0 / self.radius)
    }

    pub fn from_unit(&self, q: Point) -> Point {
        self.from_common(q * self.radius)
    }
}
