//! Checks on configurations and traces: the three placement conditions, collision
//! freedom, reference stability, convergence, deadlock and overtaking.

use serde::{Deserialize, Serialize};

use crate::coordsys::{extract_references, CommonFrame, References};
use crate::dispatch::{classify, compute, Params, Phase};
use crate::geom::{self, Point, Tolerance};
use crate::trace::{Event, EventKind, Trace};
use crate::world::{Action, LocalView, RobotRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Trace event index, when the check runs over a trace.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event: Option<u64>,
    pub robots: Vec<usize>,
    pub points: Vec<Point>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub pass: bool,
    /// Slack at the tightest point; negative when violated.
    pub margin: f64,
    pub witness: Option<Witness>,
}

impl Verdict {
    fn ok(check: &str, margin: f64) -> Self {
        Verdict {
            check: check.to_string(),
            pass: true,
            margin,
            witness: None,
        }
    }

    fn fail(check: &str, margin: f64, witness: Witness) -> Self {
        Verdict {
            check: check.to_string(),
            pass: false,
            margin,
            witness: Some(witness),
        }
    }
}

/// JSON array of verdicts.
pub fn report_json(verdicts: &[Verdict]) -> serde_json::Value {
    serde_json::to_value(verdicts).expect("verdicts serialize")
}

// ---------------------------------------------------------------------------
// Replaying traces

/// Positions by robot id, `None` once crashed or before placement.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct State {
    pub positions: Vec<Option<Point>>,
}

impl State {
    pub fn alive(&self) -> (Vec<usize>, Vec<Point>) {
        self.positions
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| (i, p)))
            .unzip()
    }

    fn apply(&mut self, e: &Event) {
        if self.positions.len() <= e.robot {
            self.positions.resize(e.robot + 1, None);
        }
        match e.kind {
            EventKind::Crash => self.positions[e.robot] = None,
            EventKind::Place | EventKind::MoveStep | EventKind::Arrive => self.positions[e.robot] = Some(e.to),
            EventKind::Look | EventKind::Compute => {}
        }
    }
}

/// Calls `f(event, before, after)` for every event that changes the
/// configuration (placement, motion, crash).
pub fn for_each_change(trace: &Trace, mut f: impl FnMut(&Event, &State, &State)) {
    let mut state = State::default();
    for e in &trace.events {
        if matches!(e.kind, EventKind::Look | EventKind::Compute) {
            continue;
        }
        let before = state.clone();
        state.apply(e);
        f(e, &before, &state);
    }
}

fn first_failure(slot: &mut Option<(f64, Witness)>, margin: f64, w: Witness) {
    if slot.is_none() {
        *slot = Some((margin, w));
    }
}

// ---------------------------------------------------------------------------
// Placement conditions

pub const PLACEMENT_CHECKS: [&str; 3] = ["placement_diameter_circle", "placement_r2_side", "placement_leader_circle"];

/// The three conditions for a configuration with recognized references.
pub fn check_placement_conditions(points: &[Point], refs: &References, tol: Tolerance) -> [Verdict; 3] {
    let (l, r1, r2) = refs.points(points);
    let o = refs.o();
    let frame = CommonFrame::undetermined(refs, points);
    let mid = r1.midpoint(r2);
    let half = r1.dist(r2) / 2.0;

    let mut out: Vec<Verdict> = Vec::with_capacity(3);

    let mut margin = f64::INFINITY;
    let mut bad = None;
    for (i, &p) in points.iter().enumerate() {
        let m = half - p.dist(mid);
        margin = margin.min(m);
        if m < -tol.eps_len && bad.is_none() {
            bad = Some((i, p));
        }
    }
    out.push(match bad {
        None => Verdict::ok(PLACEMENT_CHECKS[0], margin),
        Some((i, p)) => Verdict::fail(
            PLACEMENT_CHECKS[0],
            margin,
            Witness {
                event: None,
                robots: vec![i],
                points: vec![p],
                note: "outside the circle with diameter R1R2".into(),
            },
        ),
    });

    let mut margin = f64::INFINITY;
    let mut bad = None;
    for &i in &refs.rest {
        let y = frame.to_common(points[i]).y;
        margin = margin.min(-y);
        if y > -tol.eps_len && bad.is_none() {
            bad = Some((i, points[i]));
        }
    }
    out.push(match bad {
        None => Verdict::ok(PLACEMENT_CHECKS[1], margin),
        Some((i, p)) => Verdict::fail(
            PLACEMENT_CHECKS[1],
            margin,
            Witness {
                event: None,
                robots: vec![i],
                points: vec![p],
                note: "not on the R2 side".into(),
            },
        ),
    });

    let dl = l.dist(o);
    let mut margin = f64::INFINITY;
    let mut bad = None;
    for (i, &p) in points.iter().enumerate() {
        if i == refs.leader {
            continue;
        }
        let m = p.dist(o) - dl;
        margin = margin.min(m);
        if m < -tol.eps_len && bad.is_none() {
            bad = Some((i, p));
        }
    }
    out.push(match bad {
        None => Verdict::ok(PLACEMENT_CHECKS[2], margin),
        Some((i, p)) => Verdict::fail(
            PLACEMENT_CHECKS[2],
            margin,
            Witness {
                event: None,
                robots: vec![i],
                points: vec![p, l],
                note: "inside the leader circle".into(),
            },
        ),
    });
    out.try_into().expect("three verdicts")
}

/// The placement conditions on every configuration of the formation branch.
pub fn check_placement_trace(trace: &Trace, params: &Params) -> [Verdict; 3] {
    let mut margins = [f64::INFINITY; 3];
    let mut fails: [Option<(f64, Witness)>; 3] = [None, None, None];
    for_each_change(trace, |e, _, after| {
        let (ids, pts) = after.alive();
        let Ok(c) = classify(&pts, params) else {
            return;
        };
        if !c.phase.is_formation_branch() {
            return;
        }
        let Some(refs) = c.refs.as_ref() else {
            return;
        };
        for (k, v) in check_placement_conditions(&pts, refs, c.tol).into_iter().enumerate() {
            margins[k] = margins[k].min(v.margin);
            if let Some(mut w) = v.witness {
                w.event = Some(e.i);
                w.robots = w.robots.iter().map(|&r| ids[r]).collect();
                first_failure(&mut fails[k], v.margin, w);
            }
        }
    });
    let mut out = Vec::with_capacity(3);
    for k in 0..3 {
        out.push(match fails[k].take() {
            None => Verdict::ok(PLACEMENT_CHECKS[k], margins[k]),
            Some((_, w)) => Verdict::fail(PLACEMENT_CHECKS[k], margins[k], w),
        });
    }
    out.try_into().expect("three verdicts")
}

// ---------------------------------------------------------------------------
// Collisions

/// Straight motion of one robot over the time window `[t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Track {
    pub robot: usize,
    pub t0: f64,
    pub t1: f64,
    pub from: Point,
    pub to: Point,
}

impl Track {
    fn at(&self, t: f64) -> Point {
        if self.t1 <= self.t0 {
            return self.to;
        }
        self.from.lerp(self.to, ((t - self.t0) / (self.t1 - self.t0)).clamp(0.0, 1.0))
    }
}

/// Pairwise closest approach of tracks of different robots over their
/// common time windows.
pub fn check_tracks(tracks: &[Track], r_min: f64) -> Verdict {
    const NAME: &str = "no_collision";
    let mut margin = f64::INFINITY;
    let mut fail = None;
    for (i, a) in tracks.iter().enumerate() {
        for b in &tracks[i + 1..] {
            if a.robot == b.robot {
                continue;
            }
            let (s, e) = (a.t0.max(b.t0), a.t1.min(b.t1));
            if s > e {
                continue;
            }
            let (d, u) = geom::closest_approach(a.at(s), a.at(e), b.at(s), b.at(e));
            margin = margin.min(d);
            if d <= r_min && fail.is_none() {
                let t = s + (e - s) * u;
                fail = Some(Witness {
                    event: None,
                    robots: vec![a.robot, b.robot],
                    points: vec![a.at(t), b.at(t)],
                    note: format!("distance {d:e} at time {t}"),
                });
            }
        }
    }
    match fail {
        None => Verdict::ok(NAME, margin),
        Some(w) => Verdict::fail(NAME, margin, w),
    }
}

/// Replays the trace; during each motion event only the acting robot moves,
/// along straight chords (arcs are subdivided).
pub fn check_no_collision(trace: &Trace, r_min: f64) -> Result<Verdict, crate::trace::TraceError> {
    const NAME: &str = "no_collision";
    trace.validate()?;
    let mut margin = f64::INFINITY;
    let mut fail: Option<Witness> = None;
    let mut placed = false;
    for_each_change(trace, |e, before, after| {
        if e.kind == EventKind::Place {
            return;
        }
        if !placed {
            placed = true;
            let (ids, pts) = before.alive();
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    let d = pts[i].dist(pts[j]);
                    margin = margin.min(d);
                    if d <= r_min && fail.is_none() {
                        fail = Some(Witness {
                            event: Some(e.i),
                            robots: vec![ids[i], ids[j]],
                            points: vec![pts[i], pts[j]],
                            note: "coincident initial positions".into(),
                        });
                    }
                }
            }
        }
        if !e.kind.is_motion() {
            return;
        }
        let (ids, pts) = after.alive();
        for (a, b) in e.chords() {
            for (k, &q) in pts.iter().enumerate() {
                if ids[k] == e.robot {
                    continue;
                }
                let d = geom::point_segment_distance(q, a, b);
                margin = margin.min(d);
                if d <= r_min && fail.is_none() {
                    fail = Some(Witness {
                        event: Some(e.i),
                        robots: vec![e.robot, ids[k]],
                        points: vec![a, b, q],
                        note: format!("moving robot passes within {d:e}"),
                    });
                }
            }
        }
    });
    Ok(match fail {
        None => Verdict::ok(NAME, margin),
        Some(w) => Verdict::fail(NAME, margin, w),
    })
}

/// Default collision radius: the relative length tolerance applied to the
/// initial diameter.
pub fn default_r_min(trace: &Trace, eps_rel: f64) -> f64 {
    let pts: Vec<Point> = trace
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Place)
        .map(|e| e.to)
        .collect();
    eps_rel * geom::diameter(&pts).max(1.0)
}

/// Phase label each robot saw at the look that opened its current cycle,
/// while that cycle is still running.
#[derive(Debug, Clone, Default)]
pub struct InFlight {
    seen: Vec<Option<String>>,
}

impl InFlight {
    /// Records `e`; a cycle ends at arrival, at a compute that stays put, or
    /// at a crash.
    pub fn record(&mut self, e: &Event) {
        if self.seen.len() <= e.robot {
            self.seen.resize(e.robot + 1, None);
        }
        match e.kind {
            EventKind::Look => self.seen[e.robot] = Some(e.phase.clone()),
            EventKind::Compute if e.from == e.to => self.seen[e.robot] = None,
            EventKind::Arrive | EventKind::Crash => self.seen[e.robot] = None,
            _ => {}
        }
    }

    /// Label seen by `robot` for its running cycle.
    pub fn seen(&self, robot: usize) -> Option<&str> {
        self.seen.get(robot).and_then(|s| s.as_deref())
    }

    /// Some running cycle started from a look labelled outside `ok`.
    pub fn any_outside(&self, robots: impl IntoIterator<Item = usize>, ok: impl Fn(&str) -> bool) -> bool {
        robots.into_iter().any(|r| self.seen(r).is_some_and(|l| !ok(l)))
    }
}

// ---------------------------------------------------------------------------
// Reference stability

/// Physical identities of (Leader, R1, R2).
pub type Triple = (usize, usize, usize);

/// References of the configuration by robot id, when in the formation branch.
pub fn settled_triple(state: &State, params: &Params) -> Option<Triple> {
    let (ids, pts) = state.alive();
    let c = classify(&pts, params).ok()?;
    if !c.phase.is_formation_branch() {
        return None;
    }
    let r = c.refs?;
    Some((ids[r.leader], ids[r.r1], ids[r.r2]))
}

/// Identities of Leader/R1/R2 never change inside a window. A window opens
/// once the references have emerged: the configuration is settled and no
/// robot is still acting on an observation made before (a look labelled
/// outside the formation branch whose cycle has not ended). It closes at a
/// crash or at the end.
pub fn check_reference_stability(trace: &Trace, params: &Params) -> Verdict {
    const NAME: &str = "reference_stability";
    let mut current: Option<Triple> = None;
    let mut windows = 0u32;
    let mut fail = None;
    let mut state = State::default();
    let mut flight = InFlight::default();
    for e in &trace.events {
        if fail.is_some() {
            break;
        }
        flight.record(e);
        if matches!(e.kind, EventKind::Look | EventKind::Compute) {
            continue;
        }
        state.apply(e);
        if e.kind == EventKind::Crash {
            current = None;
            continue;
        }
        let Some(t) = settled_triple(&state, params) else {
            // Unsettled configurations inside a window are themselves a
            // break: the references were lost.
            if let Some(c) = current {
                let (_, pts) = state.alive();
                if extract_references(&pts, params.tolerance(&pts)).is_none() {
                    fail = Some(Witness {
                        event: Some(e.i),
                        robots: vec![c.0, c.1, c.2],
                        points: pts,
                        note: "references no longer recognizable".into(),
                    });
                }
            }
            continue;
        };
        match current {
            None if !flight.any_outside(0..state.positions.len(), |l| {
                Phase::from_label(l).is_some_and(Phase::is_formation_branch)
            }) =>
            {
                current = Some(t);
                windows += 1;
            }
            Some(c) if c != t => {
                let (_, pts) = state.alive();
                fail = Some(Witness {
                    event: Some(e.i),
                    robots: vec![c.0, c.1, c.2, t.0, t.1, t.2],
                    points: pts,
                    note: format!("references changed from {c:?} to {t:?}"),
                });
            }
            _ => {}
        }
    }
    match fail {
        None => Verdict::ok(NAME, windows as f64),
        Some(w) => Verdict::fail(NAME, -1.0, w),
    }
}

// ---------------------------------------------------------------------------
// Rounds and convergence

/// Round index of every event: a round closes as soon as every alive robot
/// has been activated since the previous close.
pub fn round_indices(trace: &Trace) -> Vec<u64> {
    let mut alive: Vec<bool> = Vec::new();
    let mut seen: Vec<bool> = Vec::new();
    let mut round = 0u64;
    let mut out = Vec::with_capacity(trace.events.len());
    for e in &trace.events {
        if alive.len() <= e.robot {
            alive.resize(e.robot + 1, false);
            seen.resize(e.robot + 1, false);
        }
        out.push(round);
        match e.kind {
            EventKind::Place => alive[e.robot] = true,
            EventKind::Crash => alive[e.robot] = false,
            _ => seen[e.robot] = true,
        }
        if !e.kind.eq(&EventKind::Place) && alive.iter().zip(&seen).all(|(&a, &s)| !a || s) && alive.iter().any(|&a| a) {
            round += 1;
            seen.iter_mut().for_each(|s| *s = false);
        }
    }
    out
}

/// Maximal stretch of events sharing one phase label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub phase: String,
    pub start: u64,
    pub end: u64,
    pub rounds: u64,
    /// The trace ended inside this episode.
    pub open: bool,
}

pub fn episodes(trace: &Trace) -> Vec<Episode> {
    let rounds = round_indices(trace);
    let mut out: Vec<Episode> = Vec::new();
    for (k, e) in trace.events.iter().enumerate() {
        if e.kind == EventKind::Place {
            continue;
        }
        match out.last_mut() {
            Some(ep) if ep.phase == e.phase => {
                ep.end = k as u64;
            }
            _ => out.push(Episode {
                phase: e.phase.clone(),
                start: k as u64,
                end: k as u64,
                rounds: 0,
                open: false,
            }),
        }
    }
    for ep in &mut out {
        ep.rounds = rounds[ep.end as usize] - rounds[ep.start as usize] + 1;
        ep.start = trace.events[ep.start as usize].i;
        ep.end = trace.events[ep.end as usize].i;
    }
    if let Some(last) = out.last_mut() {
        last.open = true;
    }
    out
}

/// Stretches between two flocking formations, with no crash in between.
pub fn reformations(trace: &Trace) -> Vec<Episode> {
    let rounds = round_indices(trace);
    let flock = Phase::FlockMotion.label();
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut seen_flock = false;
    for (k, e) in trace.events.iter().enumerate() {
        if e.kind == EventKind::Crash {
            start = None;
            seen_flock = false;
            continue;
        }
        if e.kind == EventKind::Place {
            continue;
        }
        if e.phase == flock {
            if let Some(s) = start.take() {
                out.push(Episode {
                    phase: "Reformation".into(),
                    start: trace.events[s].i,
                    end: e.i,
                    rounds: rounds[k] - rounds[s] + 1,
                    open: false,
                });
            }
            seen_flock = true;
        } else if seen_flock && start.is_none() {
            start = Some(k);
        }
    }
    if let Some(s) = start {
        let k = trace.events.len() - 1;
        out.push(Episode {
            phase: "Reformation".into(),
            start: trace.events[s].i,
            end: trace.events[k].i,
            rounds: rounds[k] - rounds[s] + 1,
            open: true,
        });
    }
    out
}

/// Phases whose episodes must finish within `c·n` rounds.
pub const BOUNDED_PHASES: [Phase; 3] = [Phase::Placement, Phase::CircularConfig, Phase::PatternFormation];

pub fn check_convergence(trace: &Trace, n: usize, c: f64) -> Verdict {
    const NAME: &str = "convergence";
    let limit = c * n as f64;
    let mut worst = 0u64;
    let mut fail = None;
    let bounded: Vec<&str> = BOUNDED_PHASES.iter().map(|p| p.label()).collect();
    let mut candidates: Vec<Episode> = episodes(trace)
        .into_iter()
        .filter(|e| bounded.contains(&e.phase.as_str()))
        .collect();
    candidates.extend(reformations(trace));
    for ep in &candidates {
        worst = worst.max(ep.rounds);
        if ep.rounds as f64 > limit && fail.is_none() {
            fail = Some(Witness {
                event: Some(ep.start),
                robots: vec![],
                points: vec![],
                note: format!(
                    "{} episode over events {}..{} took {} rounds (limit {limit})",
                    ep.phase, ep.start, ep.end, ep.rounds
                ),
            });
        }
    }
    match fail {
        None => Verdict::ok(NAME, limit - worst as f64),
        Some(w) => Verdict::fail(NAME, limit - worst as f64, w),
    }
}

// ---------------------------------------------------------------------------
// Pattern formation: deadlock and overtaking

/// Phases in which some robot must be able to move deterministically.
const DETERMINISTIC: [Phase; 7] = [
    Phase::Alignment,
    Phase::Placement,
    Phase::CircularConfig,
    Phase::Orientation,
    Phase::PatternFormation,
    Phase::ToCenter,
    Phase::Recovery,
];

/// Whether any robot would move, evaluated in frames centered at each robot.
pub fn some_robot_enabled(points: &[Point], params: &Params) -> bool {
    let mut rng = <RobotRng as rand::SeedableRng>::seed_from_u64(0);
    (0..points.len()).any(|i| {
        let local: Vec<Point> = points.iter().map(|&p| p - points[i]).collect();
        let view = LocalView::new(local);
        matches!(
            compute(&view.points, view.me, params, None, &mut rng),
            Ok(d) if d.action != Action::Stay
        )
    })
}

/// In every configuration of a deterministic phase, some robot is enabled.
pub fn check_no_deadlock(trace: &Trace, params: &Params) -> Verdict {
    const NAME: &str = "no_deadlock";
    let mut checked = 0u64;
    let mut fail = None;
    for_each_change(trace, |e, _, after| {
        if fail.is_some() || e.kind == EventKind::Place {
            return;
        }
        let (_, pts) = after.alive();
        let Ok(c) = classify(&pts, params) else {
            return;
        };
        if !DETERMINISTIC.contains(&c.phase) {
            return;
        }
        checked += 1;
        if !some_robot_enabled(&pts, params) {
            fail = Some(Witness {
                event: Some(e.i),
                robots: vec![],
                points: pts,
                note: format!("no robot enabled in {}", c.phase),
            });
        }
    });
    match fail {
        None => Verdict::ok(NAME, checked as f64),
        Some(w) => Verdict::fail(NAME, 0.0, w),
    }
}

fn order(points: &[Point], ids: &[usize], rest: &[usize], frame: &CommonFrame) -> Vec<usize> {
    let mut r: Vec<usize> = rest.to_vec();
    r.sort_by(|&a, &b| {
        let (pa, pb) = (frame.to_common(points[a]), frame.to_common(points[b]));
        pa.x.total_cmp(&pb.x).then(pa.y.total_cmp(&pb.y))
    });
    r.into_iter().map(|i| ids[i]).collect()
}

/// A move made during pattern formation never changes the Next order of
/// the non-reference robots. Only moves planned in pattern formation count,
/// and only when no other robot was finishing a move planned in an earlier
/// phase (or planned while such a move was under way), either at the
/// planning look or at the move.
pub fn check_no_overtaking(trace: &Trace, params: &Params) -> Verdict {
    const NAME: &str = "no_overtaking";
    let pf = Phase::PatternFormation.label();
    let mut checked = 0u64;
    let mut fail = None;
    let mut state = State::default();
    let mut flight = InFlight::default();
    // The robot looked while another robot was finishing an older move or a
    // move planned under the same condition.
    let mut tainted: Vec<bool> = Vec::new();
    for e in &trace.events {
        if fail.is_some() {
            break;
        }
        if tainted.len() <= e.robot {
            tainted.resize(e.robot + 1, false);
        }
        if e.kind == EventKind::Look {
            tainted[e.robot] = (0..tainted.len())
                .filter(|&r| r != e.robot)
                .any(|r| flight.seen(r).is_some_and(|l| l != pf || tainted[r]));
        }
        if !e.kind.is_motion() {
            flight.record(e);
            state.apply(e);
            continue;
        }
        let before = state.clone();
        let planned = flight.seen(e.robot).map(str::to_string);
        flight.record(e);
        state.apply(e);
        if planned.as_deref() != Some(pf) || tainted[e.robot] {
            continue;
        }
        let (ids, pts) = before.alive();
        let Ok(c) = classify(&pts, params) else {
            continue;
        };
        if c.phase != Phase::PatternFormation {
            continue;
        }
        let (Some(refs), Some(st)) = (c.refs.as_ref(), c.formation.as_ref()) else {
            continue;
        };
        if refs
            .rest
            .iter()
            .map(|&i| ids[i])
            .any(|r| r != e.robot && flight.seen(r).is_some_and(|l| l != pf || tainted[r]))
        {
            continue;
        }
        let (ids2, pts2) = state.alive();
        if ids2 != ids {
            continue;
        }
        checked += 1;
        let a = order(&pts, &ids, &refs.rest, &st.frame);
        let b = order(&pts2, &ids, &refs.rest, &st.frame);
        if a != b {
            fail = Some(Witness {
                event: Some(e.i),
                robots: vec![e.robot],
                points: vec![e.from, e.to],
                note: format!("order {a:?} became {b:?}"),
            });
        }
    }
    match fail {
        None => Verdict::ok(NAME, checked as f64),
        Some(w) => Verdict::fail(NAME, 0.0, w),
    }
}

/// Options for [`verify_all`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub r_min: Option<f64>,
    pub convergence_c: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            r_min: None,
            convergence_c: 4.0,
        }
    }
}

/// Every trace-level check.
pub fn verify_all(trace: &Trace, params: &Params, opts: VerifyOptions) -> Result<Vec<Verdict>, crate::trace::TraceError> {
    let r_min = opts.r_min.unwrap_or_else(|| default_r_min(trace, params.eps_rel));
    let n = trace.events.iter().filter(|e| e.kind == EventKind::Place).count();
    let mut out = vec![check_no_collision(trace, r_min)?];
    out.extend(check_placement_trace(trace, params));
    out.push(check_reference_stability(trace, params));
    out.push(check_convergence(trace, n, opts.convergence_c));
    out.push(check_no_deadlock(trace, params));
    out.push(check_no_overtaking(trace, params));
    Ok(out)
}
