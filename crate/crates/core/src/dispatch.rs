//! The per-robot program: classify the snapshot into a phase, then delegate
//! to the matching rule set.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coordsys::{
    alignment_action, elect_leader, extract_references, far_robots, separation_action, tie_break_action,
    CommonFrame, LeaderElection, References, SeparationParams,
};
use crate::formation::{
    assign, circular_config_action, circular_config_holds, leader_offset_distance, leader_offset_point,
    leader_local_side, pattern_action, placement_action, Assignment, FlockPattern,
};
use crate::geom::{self, Point, Tolerance};
use crate::motion::{self, region_m_contains, r2_step, MotionError, MotionParams};
use crate::world::{Action, Decision, LocalView, Program, RobotRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    Separation,
    LeaderTieBreak,
    Alignment,
    Placement,
    CircularConfig,
    Orientation,
    PatternFormation,
    ToCenter,
    FlockMotion,
    Recovery,
}

impl Phase {
    pub const ALL: [Phase; 10] = [
        Phase::Separation,
        Phase::LeaderTieBreak,
        Phase::Alignment,
        Phase::Placement,
        Phase::CircularConfig,
        Phase::Orientation,
        Phase::PatternFormation,
        Phase::ToCenter,
        Phase::FlockMotion,
        Phase::Recovery,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Phase::Separation => "Separation",
            Phase::LeaderTieBreak => "LeaderTieBreak",
            Phase::Alignment => "Alignment",
            Phase::Placement => "Placement",
            Phase::CircularConfig => "CircularConfig",
            Phase::Orientation => "Orientation",
            Phase::PatternFormation => "PatternFormation",
            Phase::ToCenter => "ToCenter",
            Phase::FlockMotion => "FlockMotion",
            Phase::Recovery => "Recovery",
        }
    }

    pub fn from_label(s: &str) -> Option<Phase> {
        Phase::ALL.into_iter().find(|p| p.label() == s)
    }

    /// Phases in which the references are settled and the pattern is the
    /// target.
    pub fn is_formation_branch(self) -> bool {
        matches!(
            self,
            Phase::Orientation | Phase::PatternFormation | Phase::ToCenter | Phase::FlockMotion | Phase::Recovery
        )
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DispatchError {
    #[error("ambiguous configuration: {0}")]
    Ambiguous(String),
    #[error("pattern size mismatch: {robots} robots for patterns of size {sizes:?}")]
    SizeMismatch { robots: usize, sizes: Vec<usize> },
    #[error("no pattern loaded")]
    NoPattern,
    #[error("unsafe parameters")]
    UnsafeParameters,
    #[error("{0}")]
    Motion(MotionError),
}

/// Everything the program needs besides the snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    /// Candidate patterns; the one matching the number of non-reference
    /// robots is used.
    pub patterns: Vec<FlockPattern>,
    pub motion: MotionParams,
    pub separation_p: f64,
    /// Cap on a separation move, as a multiple of the current diameter.
    pub separation_cap: Option<f64>,
    /// Fraction of the free arc travelled by a blocked placement move.
    pub quarter: f64,
    /// Length tolerance as a fraction of the configuration diameter.
    pub eps_rel: f64,
    pub eps_ang: f64,
    /// Gap kept to an order neighbor, in multiples of the length tolerance.
    pub clamp_factor: f64,
    /// A chirality guess from pattern matching is trusted when the better fit
    /// is below this fraction of the worse one.
    pub chirality_margin: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            patterns: Vec::new(),
            motion: MotionParams::default(),
            separation_p: 0.5,
            separation_cap: Some(4.0),
            quarter: 0.25,
            eps_rel: 1e-9,
            eps_ang: 1e-9,
            clamp_factor: 10.0,
            chirality_margin: 0.5,
        }
    }
}

impl Params {
    pub fn with_pattern(pattern: FlockPattern) -> Self {
        Params {
            patterns: vec![pattern],
            ..Default::default()
        }
    }

    pub fn tolerance(&self, points: &[Point]) -> Tolerance {
        Tolerance::relative_to(points, self.eps_rel, self.eps_ang)
    }

    fn separation(&self) -> SeparationParams {
        SeparationParams {
            p: self.separation_p,
            cap: self.separation_cap,
        }
    }

    pub fn pattern_for(&self, m: usize) -> Result<&FlockPattern, DispatchError> {
        if self.patterns.is_empty() {
            return Err(DispatchError::NoPattern);
        }
        self.patterns.iter().find(|p| p.len() == m).ok_or_else(|| DispatchError::SizeMismatch {
            robots: m,
            sizes: self.patterns.iter().map(|p| p.len()).collect(),
        })
    }
}

/// State of the formation branch.
#[derive(Debug, Clone, PartialEq)]
pub struct FormationState {
    /// Common frame; the chirality is set whenever the phase decides one.
    pub frame: CommonFrame,
    pub assignment: Option<Assignment>,
    /// Leader offset distance under `frame`.
    pub offset: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub phase: Phase,
    pub tol: Tolerance,
    pub far: Vec<usize>,
    pub tied: Vec<usize>,
    pub refs: Option<References>,
    pub formation: Option<FormationState>,
}

fn ambiguous(what: &str, e: impl fmt::Display) -> DispatchError {
    DispatchError::Ambiguous(format!("{what}: {e}"))
}

/// Normalizes a point set for shape comparison: centroid at the origin, unit
/// RMS radius.
fn shape(points: &[Point]) -> Vec<Point> {
    let c = geom::barycenter(points).unwrap_or(Point::ORIGIN);
    let rms = (points.iter().map(|p| p.dist_sq(c)).sum::<f64>() / points.len().max(1) as f64).sqrt();
    let s = if rms > 0.0 { 1.0 / rms } else { 1.0 };
    points.iter().map(|&p| (p - c) * s).collect()
}

fn hausdorff(a: &[Point], b: &[Point]) -> f64 {
    let dir = |x: &[Point], y: &[Point]| {
        x.iter()
            .map(|p| y.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    dir(a, b).max(dir(b, a))
}

/// Chirality under which the rest robots look most like the pattern, when the
/// answer is clear.
pub fn match_chirality(
    points: &[Point],
    refs: &References,
    pattern: &FlockPattern,
    margin: f64,
) -> Option<f64> {
    let base = CommonFrame::undetermined(refs, points);
    let actual: Vec<Point> = refs.rest.iter().map(|&i| base.to_unit(points[i])).collect();
    let actual = shape(&actual);
    let q = pattern.normalized();
    let score = |s: f64| {
        let mirrored: Vec<Point> = q.iter().map(|p| Point::new(s * p.x, p.y)).collect();
        hausdorff(&actual, &shape(&mirrored))
    };
    let (plus, minus) = (score(1.0), score(-1.0));
    if plus < margin * minus {
        Some(1.0)
    } else if minus < margin * plus {
        Some(-1.0)
    } else {
        None
    }
}

fn assignment_for(
    points: &[Point],
    refs: &References,
    pattern: &FlockPattern,
    frame: &CommonFrame,
) -> Result<Assignment, DispatchError> {
    let fitted = pattern.fit(frame);
    assign(points, &refs.rest, &fitted, frame).map_err(|e| ambiguous("assignment", e))
}

/// Phase of a snapshot. Pure; robots observing the same configuration in
/// different frames agree.
pub fn classify(points: &[Point], params: &Params) -> Result<Classification, DispatchError> {
    if points.len() < 4 {
        return Err(DispatchError::Ambiguous(format!("{} robots, at least 4 needed", points.len())));
    }
    let tol = params.tolerance(points);
    let far = far_robots(points, tol).map_err(|e| ambiguous("far robots", e))?;
    let mut out = Classification {
        phase: Phase::Separation,
        tol,
        far: far.clone(),
        tied: Vec::new(),
        refs: None,
        formation: None,
    };
    if far.len() > 2 {
        return Ok(out);
    }
    let sec = geom::smallest_enclosing_circle(points).map_err(|e| ambiguous("SEC", e))?;
    match elect_leader(points, &sec, tol).map_err(|e| ambiguous("leader", e))? {
        LeaderElection::Tie(t) => {
            out.phase = Phase::LeaderTieBreak;
            out.tied = t;
            return Ok(out);
        }
        LeaderElection::Unique(_) => {}
    }
    let Some(refs) = extract_references(points, tol) else {
        out.phase = Phase::Alignment;
        return Ok(out);
    };
    if !refs.settled {
        let off_sec = refs.rest.iter().any(|&i| !refs.sec.on_boundary(points[i], tol.eps_len));
        out.phase = if off_sec { Phase::Placement } else { Phase::CircularConfig };
        out.refs = Some(refs);
        return Ok(out);
    }

    let pattern = params.pattern_for(refs.rest.len())?;
    let base = CommonFrame::undetermined(&refs, points);
    let (leader, _, _) = refs.points(points);
    let dl = leader.dist(refs.o());

    for s in [1.0, -1.0] {
        let frame = base.with_chirality(s);
        let asg = assignment_for(points, &refs, pattern, &frame)?;
        if asg.max_error(points) <= tol.eps_len {
            out.phase = if dl <= tol.eps_len { Phase::FlockMotion } else { Phase::ToCenter };
            out.formation = Some(FormationState {
                frame,
                assignment: Some(asg),
                offset: None,
            });
            out.refs = Some(refs);
            return Ok(out);
        }
    }

    if let Some(s) = base.leader_side(leader, tol) {
        let frame = base.with_chirality(s);
        let asg = assignment_for(points, &refs, pattern, &frame)?;
        let ell = leader_offset_distance(points, &refs, &asg, tol);
        let c = frame.to_common(leader);
        if c.y.abs() <= tol.eps_len && c.x <= ell + tol.eps_len {
            out.phase = Phase::PatternFormation;
            out.formation = Some(FormationState {
                frame,
                assignment: Some(asg),
                offset: Some(ell),
            });
            out.refs = Some(refs);
            return Ok(out);
        }
    }

    out.phase = if circular_config_holds(points, &refs, tol) {
        Phase::Orientation
    } else {
        Phase::Recovery
    };
    out.formation = Some(FormationState {
        frame: base,
        assignment: None,
        offset: None,
    });
    out.refs = Some(refs);
    Ok(out)
}

/// Frame used by the head while flocking, if the snapshot is a flocking
/// formation.
pub fn flock_frame(points: &[Point], params: &Params) -> Option<(References, CommonFrame)> {
    let c = classify(points, params).ok()?;
    if c.phase != Phase::FlockMotion {
        return None;
    }
    Some((c.refs?, c.formation?.frame))
}

/// Side the leader takes when it leaves the center or the axis.
fn leader_target_side(points: &[Point], refs: &References, pattern: &FlockPattern, params: &Params, tol: Tolerance, phase: Phase) -> f64 {
    let base = CommonFrame::undetermined(refs, points);
    if phase == Phase::Recovery {
        if let Some(s) = match_chirality(points, refs, pattern, params.chirality_margin) {
            return s;
        }
        if let Some(s) = base.leader_side(points[refs.leader], tol) {
            return s;
        }
    }
    leader_local_side(&base, tol)
}

/// The program for robot `me` given the snapshot in its own frame.
pub fn compute(
    points: &[Point],
    me: usize,
    params: &Params,
    steer: Option<Point>,
    rng: &mut RobotRng,
) -> Result<Decision, DispatchError> {
    let c = classify(points, params)?;
    let tol = c.tol;
    let label = c.phase.label();
    let decide = |action: Action| Decision {
        action,
        label: label.to_string(),
        consumed_steer: false,
    };
    let action = match c.phase {
        Phase::Separation => separation_action(points, me, params.separation(), rng, tol),
        Phase::LeaderTieBreak => {
            let sec = geom::smallest_enclosing_circle(points).map_err(|e| ambiguous("SEC", e))?;
            tie_break_action(points, me, &sec, &c.tied, &c.far, rng)
        }
        Phase::Alignment => alignment_action(points, me, tol).map_err(|e| ambiguous("alignment", e))?,
        Phase::Placement => {
            let refs = c.refs.as_ref().expect("placement has references");
            placement_action(points, me, refs, params.quarter, tol).map_err(|e| ambiguous("placement", e))?
        }
        Phase::CircularConfig => {
            let refs = c.refs.as_ref().expect("circular phase has references");
            circular_config_action(points, me, refs, tol).map_err(|e| ambiguous("circular configuration", e))?
        }
        Phase::Orientation | Phase::Recovery => {
            let refs = c.refs.as_ref().expect("formation branch has references");
            if me != refs.leader {
                Action::Stay
            } else {
                let pattern = params.pattern_for(refs.rest.len())?;
                let s = leader_target_side(points, refs, pattern, params, tol, c.phase);
                let frame = CommonFrame::undetermined(refs, points).with_chirality(s);
                let asg = assignment_for(points, refs, pattern, &frame)?;
                let ell = leader_offset_distance(points, refs, &asg, tol);
                let target = leader_offset_point(&frame, ell);
                if target.dist(points[me]) <= tol.eps_len {
                    Action::Stay
                } else {
                    Action::Move(target)
                }
            }
        }
        Phase::PatternFormation => {
            let refs = c.refs.as_ref().expect("formation branch has references");
            let st = c.formation.as_ref().expect("pattern formation has a frame");
            let asg = st.assignment.as_ref().expect("pattern formation has an assignment");
            if refs.rest.contains(&me) {
                pattern_action(points, me, asg, &st.frame, params.clamp_factor * tol.eps_len, tol)
            } else {
                Action::Stay
            }
        }
        Phase::ToCenter => {
            let refs = c.refs.as_ref().expect("formation branch has references");
            if me == refs.leader {
                Action::Move(refs.o())
            } else {
                Action::Stay
            }
        }
        Phase::FlockMotion => {
            let refs = c.refs.as_ref().expect("formation branch has references");
            let st = c.formation.as_ref().expect("flock motion has a frame");
            return flock_motion(points, me, refs, &st.frame, params, steer, tol, label);
        }
    };
    Ok(decide(action))
}

#[allow(clippy::too_many_arguments)]
fn flock_motion(
    points: &[Point],
    me: usize,
    refs: &References,
    frame: &CommonFrame,
    params: &Params,
    steer: Option<Point>,
    tol: Tolerance,
    label: &str,
) -> Result<Decision, DispatchError> {
    if me != refs.r1 && me != refs.r2 {
        return Ok(Decision::stay(label));
    }
    if !motion::validate_params(&params.motion).valid {
        return Err(DispatchError::UnsafeParameters);
    }
    let (_, r1, r2) = refs.points(points);
    let span = r1.dist(r2);
    if me == refs.r1 {
        if span >= params.motion.d_rmax {
            return Ok(Decision::stay(label));
        }
        return Ok(match steer {
            Some(t) if steer_admissible(frame, r1, t, &params.motion, tol) => Decision {
                action: Action::Move(t),
                label: label.to_string(),
                consumed_steer: true,
            },
            _ => Decision::stay(label),
        });
    }
    if span < params.motion.d_rmax {
        return Ok(Decision::stay(label));
    }
    let others: Vec<Point> = (0..points.len())
        .filter(|&i| i != refs.r1 && i != refs.r2)
        .map(|i| points[i])
        .collect();
    let t = r2_step(r1, r2, &others, &params.motion, tol).map_err(DispatchError::Motion)?;
    Ok(Decision {
        action: Action::Move(t),
        label: label.to_string(),
        consumed_steer: false,
    })
}

/// A head waypoint is usable when it lies in M and is not R1 itself.
pub fn steer_admissible(frame: &CommonFrame, r1: Point, target: Point, motion: &MotionParams, tol: Tolerance) -> bool {
    if !target.is_finite() || target.dist(r1) <= tol.eps_len {
        return false;
    }
    let y_r1 = frame.to_common(r1).y;
    region_m_contains(frame.to_common(target), y_r1, motion.k, tol.eps_len)
}

/// The protocol as a simulator program.
#[derive(Debug, Clone, Default)]
pub struct Dispatcher {
    pub params: Params,
}

impl Dispatcher {
    pub fn new(params: Params) -> Self {
        Dispatcher { params }
    }
}

impl Program for Dispatcher {
    fn compute(&self, view: &LocalView, steer: Option<Point>, rng: &mut RobotRng) -> Result<Decision, String> {
        compute(&view.points, view.me, &self.params, steer, rng).map_err(|e| e.to_string())
    }

    fn classify_label(&self, positions: &[Point]) -> String {
        match classify(positions, &self.params) {
            Ok(c) => c.phase.label().to_string(),
            Err(_) => "Ambiguous".to_string(),
        }
    }
}
