//! Robots, local frames, snapshots and the look–compute–move scheduler.
//!
//! The world is the only place where robot identities exist. Algorithms only
//! ever receive a [`LocalView`]: the anonymous positions of the alive robots
//! expressed in the acting robot's own frame.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Point;
use crate::trace::{ArcStep, Event, EventKind, Trace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("empty world")]
    EmptyWorld,
    #[error("robot {0} is not alive")]
    NotAlive(usize),
    #[error("non-finite position")]
    NonFinite,
    #[error("program failed for robot {robot} at event {event}: {message}")]
    Program {
        robot: usize,
        event: u64,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Handedness {
    Right,
    Left,
}

/// A robot's private coordinate system: origin at the robot, arbitrary
/// rotation, unit and chirality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalFrame {
    pub origin: Point,
    pub rotation: f64,
    pub handedness: Handedness,
    pub unit_scale: f64,
}

impl LocalFrame {
    pub fn identity() -> Self {
        LocalFrame {
            origin: Point::ORIGIN,
            rotation: 0.0,
            handedness: Handedness::Right,
            unit_scale: 1.0,
        }
    }

    pub fn at(self, origin: Point) -> Self {
        LocalFrame { origin, ..self }
    }

    #[inline]
    fn reflects(&self) -> bool {
        self.handedness == Handedness::Left
    }

    /// Global point to local coordinates.
    pub fn to_local(&self, p: Point) -> Point {
        let d = (p - self.origin).rotate(-self.rotation) * (1.0 / self.unit_scale);
        if self.reflects() {
            Point::new(d.x, -d.y)
        } else {
            d
        }
    }

    /// Local coordinates back to the global frame.
    pub fn from_local(&self, q: Point) -> Point {
        let q = if self.reflects() { Point::new(q.x, -q.y) } else { q };
        self.origin + (q * self.unit_scale).rotate(self.rotation)
    }

    /// Global free vector to local (no translation).
    pub fn vec_to_local(&self, v: Point) -> Point {
        self.to_local(self.origin + v)
    }
}

/// Outcome of one compute phase, in the acting robot's local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    Stay,
    /// Straight-line move.
    Move(Point),
    /// Move along the circle around `center` until `target`, turning
    /// counter-clockwise (in the local frame) when `ccw` is set.
    Arc {
        center: Point,
        target: Point,
        ccw: bool,
    },
}

impl Action {
    pub fn target(&self) -> Option<Point> {
        match *self {
            Action::Stay => None,
            Action::Move(t) => Some(t),
            Action::Arc { target, .. } => Some(target),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub action: Action,
    pub label: String,
    /// The pending steer target was used to produce this action.
    pub consumed_steer: bool,
}

impl Decision {
    pub fn stay(label: impl Into<String>) -> Self {
        Decision {
            action: Action::Stay,
            label: label.into(),
            consumed_steer: false,
        }
    }
}

/// Anonymous observation handed to the algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalView {
    /// All alive robots, sorted lexicographically in the local frame.
    pub points: Vec<Point>,
    /// Index of the observing robot (the point at the local origin).
    pub me: usize,
}

impl LocalView {
    /// Builds a view from arbitrary local points; `me` is the point nearest
    /// the origin.
    pub fn new(mut points: Vec<Point>) -> Self {
        points.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        let me = points
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.norm_sq().total_cmp(&b.1.norm_sq()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        LocalView { points, me }
    }

    pub fn me_point(&self) -> Point {
        self.points[self.me]
    }
}

/// Per-robot random stream owned by the simulator. The algorithm may draw
/// from it but cannot persist anything else between activations.
pub type RobotRng = ChaCha8Rng;

/// The oblivious per-robot program.
pub trait Program {
    fn compute(
        &self,
        view: &LocalView,
        steer: Option<Point>,
        rng: &mut RobotRng,
    ) -> Result<Decision, String>;

    /// Phase label of a global configuration, used only to annotate traces.
    fn classify_label(&self, _positions: &[Point]) -> String {
        String::new()
    }
}

/// Supplies head waypoints (global frame). Consulted at every look while no
/// operator command is pending; returning `None` withdraws its own waypoint.
pub trait SteerDriver: Send {
    fn next_target(&mut self, positions: &[Point]) -> Option<Point>;
    fn consumed(&mut self) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerMode {
    Async,
    Ssync,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchedulerConfig {
    pub mode: SchedulerMode,
    pub min_progress: f64,
    /// Bound `k`: no robot is activated more than `k` times between two
    /// activations of any other robot. `None` disables fairness.
    pub fairness_bound: Option<u32>,
    pub seed: u64,
    /// All robots measure lengths in the global unit. Rotation and handedness
    /// stay private either way.
    pub shared_unit: bool,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            mode: SchedulerMode::Async,
            min_progress: 0.2,
            fairness_bound: Some(3),
            seed: 0,
            shared_unit: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Motion {
    pub start: Point,
    pub target: Point,
    /// Circle center and signed sweep (global frame) for arc motions.
    pub arc: Option<(Point, f64)>,
    /// Fraction of the commanded path already travelled.
    pub done: f64,
}

impl Motion {
    pub fn position_at(&self, s: f64) -> Point {
        if s >= 1.0 {
            return self.target;
        }
        match self.arc {
            None => self.start.lerp(self.target, s),
            Some((c, sweep)) => c + (self.start - c).rotate(sweep * s),
        }
    }

    pub fn current(&self) -> Point {
        self.position_at(self.done)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub view: LocalView,
    pub steer_local: Option<Point>,
    pub steer_id: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CyclePhase {
    Idle,
    Observed(Box<Observation>),
    Moving(Motion),
}

#[derive(Debug, Clone)]
pub struct RobotState {
    pub id: usize,
    pub position: Point,
    pub frame: LocalFrame,
    pub phase: CyclePhase,
    pub alive: bool,
    rng: RobotRng,
}

impl RobotState {
    /// The robot's random stream as it stands (read-only).
    pub fn rng(&self) -> &RobotRng {
        &self.rng
    }

    pub fn current_position(&self) -> Point {
        match &self.phase {
            CyclePhase::Moving(m) => m.current(),
            _ => self.position,
        }
    }
}

/// Immutable set of observed positions; carries no identities.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub positions: Vec<Point>,
    pub taken_at: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteerCommand {
    pub id: u64,
    pub target: Point,
    /// Issued by the scripted driver, which may refresh it at every look
    /// until it is consumed.
    pub from_driver: bool,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic sub-seed `index` of `seed`.
pub fn substream(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0xA5A5)))
}

pub struct World {
    robots: Vec<RobotState>,
    config: SchedulerConfig,
    sched_rng: ChaCha8Rng,
    /// `since[i][j]`: activations of `i` since `j` was last activated.
    since: Vec<Vec<u32>>,
    trace: Trace,
    next_event: u64,
    pending_steer: Option<SteerCommand>,
    next_steer_id: u64,
    driver: Option<Box<dyn SteerDriver>>,
    round_seen: Vec<bool>,
    rounds: u64,
    activations: u64,
}

impl World {
    /// Creates a world; each robot's frame (rotation, chirality, unit) is
    /// drawn once from the seed.
    pub fn new(positions: &[Point], config: SchedulerConfig) -> Result<Self, WorldError> {
        let mut frame_rng = ChaCha8Rng::seed_from_u64(substream(config.seed, 1));
        let frames = positions
            .iter()
            .map(|_| {
                let rotation = frame_rng.gen_range(0.0..std::f64::consts::TAU);
                let handedness = if frame_rng.gen_bool(0.5) {
                    Handedness::Right
                } else {
                    Handedness::Left
                };
                let scale = frame_rng.gen_range(0.25..4.0);
                LocalFrame {
                    origin: Point::ORIGIN,
                    rotation,
                    handedness,
                    unit_scale: if config.shared_unit { 1.0 } else { scale },
                }
            })
            .collect::<Vec<_>>();
        Self::with_frames(positions, &frames, config)
    }

    pub fn with_frames(
        positions: &[Point],
        frames: &[LocalFrame],
        config: SchedulerConfig,
    ) -> Result<Self, WorldError> {
        assert_eq!(positions.len(), frames.len());
        assert!(config.min_progress > 0.0 && config.min_progress <= 1.0);
        if positions.is_empty() {
            return Err(WorldError::EmptyWorld);
        }
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(WorldError::NonFinite);
        }
        let n = positions.len();
        let robots = positions
            .iter()
            .zip(frames)
            .enumerate()
            .map(|(id, (p, f))| RobotState {
                id,
                position: *p,
                frame: f.at(*p),
                phase: CyclePhase::Idle,
                alive: true,
                rng: ChaCha8Rng::seed_from_u64(substream(config.seed, 1000 + id as u64)),
            })
            .collect();
        let mut world = World {
            robots,
            config,
            sched_rng: ChaCha8Rng::seed_from_u64(substream(config.seed, 2)),
            since: vec![vec![0; n]; n],
            trace: Trace::default(),
            next_event: 0,
            pending_steer: None,
            next_steer_id: 1,
            driver: None,
            round_seen: vec![false; n],
            rounds: 0,
            activations: 0,
        };
        for (id, &p) in positions.iter().enumerate() {
            world.push(id, EventKind::Place, p, p, String::new(), None);
        }
        Ok(world)
    }

    pub fn set_driver(&mut self, driver: Box<dyn SteerDriver>) {
        self.driver = Some(driver);
    }

    pub fn config(&self) -> &SchedulerConfig {
        &self.config
    }

    pub fn robots(&self) -> &[RobotState] {
        &self.robots
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn activations(&self) -> u64 {
        self.activations
    }

    pub fn pending_steer(&self) -> Option<SteerCommand> {
        self.pending_steer
    }

    /// Queues a head waypoint (global frame); a newer one replaces an
    /// unconsumed older one.
    pub fn set_steer(&mut self, target: Point) -> u64 {
        let id = self.next_steer_id;
        self.next_steer_id += 1;
        self.pending_steer = Some(SteerCommand {
            id,
            target,
            from_driver: false,
        });
        id
    }

    pub fn clear_steer(&mut self) {
        self.pending_steer = None;
    }

    pub fn alive_ids(&self) -> Vec<usize> {
        self.robots.iter().filter(|r| r.alive).map(|r| r.id).collect()
    }

    /// Current (interpolated) positions of the alive robots, by id order.
    pub fn alive_positions(&self) -> Vec<(usize, Point)> {
        self.robots
            .iter()
            .filter(|r| r.alive)
            .map(|r| (r.id, r.current_position()))
            .collect()
    }

    pub fn take_snapshot(&self) -> Snapshot {
        Snapshot {
            positions: self.alive_positions().into_iter().map(|(_, p)| p).collect(),
            taken_at: self.next_event,
        }
    }

    /// Removes a robot from every future snapshot.
    pub fn crash(&mut self, id: usize) -> Result<(), WorldError> {
        let r = self.robots.get_mut(id).ok_or(WorldError::NotAlive(id))?;
        if !r.alive {
            return Err(WorldError::NotAlive(id));
        }
        let p = r.current_position();
        r.position = p;
        r.alive = false;
        r.phase = CyclePhase::Idle;
        self.round_seen[id] = false;
        self.push(id, EventKind::Crash, p, p, String::new(), None);
        self.check_round();
        Ok(())
    }

    fn push(
        &mut self,
        robot: usize,
        kind: EventKind,
        from: Point,
        to: Point,
        phase: String,
        arc: Option<ArcStep>,
    ) -> Event {
        let e = Event {
            i: self.next_event,
            robot,
            kind,
            from,
            to,
            phase,
            arc,
        };
        self.next_event += 1;
        self.trace.events.push(e.clone());
        e
    }

    fn pick_robot(&mut self) -> Result<usize, WorldError> {
        let alive = self.alive_ids();
        if alive.is_empty() {
            return Err(WorldError::EmptyWorld);
        }
        let eligible: Vec<usize> = match self.config.fairness_bound {
            None => alive.clone(),
            Some(k) => alive
                .iter()
                .copied()
                .filter(|&i| alive.iter().all(|&j| j == i || self.since[i][j] < k))
                .collect(),
        };
        debug_assert!(!eligible.is_empty());
        let i = eligible[self.sched_rng.gen_range(0..eligible.len())];
        for j in 0..self.since.len() {
            self.since[i][j] = self.since[i][j].saturating_add(1);
            self.since[j][i] = 0;
        }
        self.activations += 1;
        self.round_seen[i] = true;
        self.check_round();
        Ok(i)
    }

    fn check_round(&mut self) {
        let complete = self
            .robots
            .iter()
            .filter(|r| r.alive)
            .all(|r| self.round_seen[r.id]);
        if complete && self.robots.iter().any(|r| r.alive) {
            self.rounds += 1;
            self.round_seen.iter_mut().for_each(|s| *s = false);
        }
    }

    /// Label of the current global configuration.
    pub fn label(&self, program: &dyn Program) -> String {
        program.classify_label(&self.take_snapshot().positions)
    }

    fn local_view(&self, id: usize) -> LocalView {
        let frame = self.robots[id].frame.at(self.robots[id].current_position());
        let points = self
            .robots
            .iter()
            .filter(|r| r.alive)
            .map(|r| {
                if r.id == id {
                    Point::ORIGIN
                } else {
                    frame.to_local(r.current_position())
                }
            })
            .collect();
        LocalView::new(points)
    }

    fn observe(&mut self, id: usize) -> Observation {
        let me = self.robots[id].current_position();
        let frame = self.robots[id].frame.at(me);
        let driver_owned = self.pending_steer.is_none_or(|s| s.from_driver);
        if driver_owned {
            if let Some(driver) = self.driver.as_mut() {
                let positions: Vec<Point> = self
                    .robots
                    .iter()
                    .filter(|r| r.alive)
                    .map(|r| r.current_position())
                    .collect();
                match driver.next_target(&positions) {
                    Some(target) => {
                        let id = match self.pending_steer {
                            Some(s) => s.id,
                            None => {
                                self.next_steer_id += 1;
                                self.next_steer_id - 1
                            }
                        };
                        self.pending_steer = Some(SteerCommand {
                            id,
                            target,
                            from_driver: true,
                        });
                    }
                    None => self.pending_steer = None,
                }
            }
        }
        Observation {
            view: self.local_view(id),
            steer_local: self.pending_steer.map(|s| frame.to_local(s.target)),
            steer_id: self.pending_steer.map(|s| s.id),
        }
    }

    fn compute(
        &mut self,
        id: usize,
        obs: &Observation,
        program: &dyn Program,
    ) -> Result<(Decision, Option<Motion>), WorldError> {
        let me = self.robots[id].position;
        let frame = self.robots[id].frame.at(me);
        let event = self.next_event;
        let rng = &mut self.robots[id].rng;
        let decision = program
            .compute(&obs.view, obs.steer_local, rng)
            .map_err(|message| WorldError::Program {
                robot: id,
                event,
                message,
            })?;
        if decision.consumed_steer {
            if let (Some(p), Some(sid)) = (self.pending_steer, obs.steer_id) {
                if p.id == sid {
                    self.pending_steer = None;
                    if let (true, Some(d)) = (p.from_driver, self.driver.as_mut()) {
                        d.consumed();
                    }
                }
            }
        }
        let motion = match decision.action {
            Action::Stay => None,
            Action::Move(t) => {
                let target = frame.from_local(t);
                if !target.is_finite() {
                    return Err(WorldError::NonFinite);
                }
                Some(Motion {
                    start: me,
                    target,
                    arc: None,
                    done: 0.0,
                })
            }
            Action::Arc { center, target, ccw } => {
                let c = frame.from_local(center);
                let target = frame.from_local(target);
                if !target.is_finite() || !c.is_finite() {
                    return Err(WorldError::NonFinite);
                }
                let ccw_global = ccw ^ (frame.handedness == Handedness::Left);
                let a0 = (me - c).angle();
                let a1 = (target - c).angle();
                let mut sweep = crate::geom::wrap_angle(a1 - a0);
                if !ccw_global && sweep > 0.0 {
                    sweep -= std::f64::consts::TAU;
                }
                Some(Motion {
                    start: me,
                    target,
                    arc: Some((c, sweep)),
                    done: 0.0,
                })
            }
        };
        Ok((decision, motion.filter(|m| m.start != m.target)))
    }

    /// Activates one robot chosen by the adversary and returns the last event
    /// it produced.
    pub fn schedule_step(&mut self, program: &dyn Program) -> Result<Event, WorldError> {
        let id = self.pick_robot()?;
        match self.config.mode {
            SchedulerMode::Ssync => self.full_cycle(id, program),
            SchedulerMode::Async => self.sub_phase(id, program),
        }
    }

    fn full_cycle(&mut self, id: usize, program: &dyn Program) -> Result<Event, WorldError> {
        let here = self.robots[id].position;
        let obs = self.observe(id);
        let label = self.label(program);
        self.push(id, EventKind::Look, here, here, label.clone(), None);
        let (_, motion) = self.compute(id, &obs, program)?;
        let to = motion.as_ref().map(|m| m.target).unwrap_or(here);
        self.push(id, EventKind::Compute, here, to, label, None);
        let arc = motion.as_ref().and_then(arc_step(0.0, 1.0));
        self.robots[id].position = to;
        let label = self.label(program);
        Ok(self.push(id, EventKind::Arrive, here, to, label, arc))
    }

    fn sub_phase(&mut self, id: usize, program: &dyn Program) -> Result<Event, WorldError> {
        let phase = std::mem::replace(&mut self.robots[id].phase, CyclePhase::Idle);
        let here = self.robots[id].position;
        match phase {
            CyclePhase::Idle => {
                let obs = self.observe(id);
                self.robots[id].phase = CyclePhase::Observed(Box::new(obs));
                let label = self.label(program);
                Ok(self.push(id, EventKind::Look, here, here, label, None))
            }
            CyclePhase::Observed(obs) => {
                let (_, motion) = self.compute(id, &obs, program)?;
                let to = motion.as_ref().map(|m| m.target).unwrap_or(here);
                if let Some(m) = motion {
                    self.robots[id].phase = CyclePhase::Moving(m);
                }
                let label = self.label(program);
                Ok(self.push(id, EventKind::Compute, here, to, label, None))
            }
            CyclePhase::Moving(mut m) => {
                let frac = self.sched_rng.gen_range(self.config.min_progress..=1.0);
                let from_s = m.done;
                let from = m.current();
                m.done = (m.done + frac).min(1.0);
                let to = m.current();
                let arc = arc_step(from_s, m.done)(&m);
                self.robots[id].position = to;
                let kind = if m.done >= 1.0 {
                    EventKind::Arrive
                } else {
                    self.robots[id].phase = CyclePhase::Moving(m);
                    EventKind::MoveStep
                };
                let label = self.label(program);
                Ok(self.push(id, kind, from, to, label, arc))
            }
        }
    }

    /// Runs until `stop` returns true or `max_events` activations elapse.
    pub fn run_until(
        &mut self,
        program: &dyn Program,
        max_events: u64,
        mut stop: impl FnMut(&World) -> bool,
    ) -> Result<bool, WorldError> {
        for _ in 0..max_events {
            if stop(self) {
                return Ok(true);
            }
            self.schedule_step(program)?;
        }
        Ok(stop(self))
    }

    /// True when no robot is moving or about to move: every observed-but-not-
    /// computed robot would decide to stay (evaluated on a copy of its RNG).
    pub fn is_quiescent(&self, program: &dyn Program) -> bool {
        self.robots.iter().filter(|r| r.alive).all(|r| match &r.phase {
            CyclePhase::Idle => true,
            CyclePhase::Moving(_) => false,
            CyclePhase::Observed(obs) => {
                let mut rng = r.rng.clone();
                matches!(
                    program.compute(&obs.view, obs.steer_local, &mut rng),
                    Ok(Decision {
                        action: Action::Stay,
                        ..
                    })
                )
            }
        })
    }

    /// Quiescent, and every robot would also stay if it looked now without a
    /// waypoint.
    pub fn at_rest(&self, program: &dyn Program) -> bool {
        self.is_quiescent(program)
            && self.robots.iter().filter(|r| r.alive).all(|r| {
                let mut rng = r.rng.clone();
                matches!(
                    program.compute(&self.local_view(r.id), None, &mut rng),
                    Ok(Decision {
                        action: Action::Stay,
                        ..
                    })
                )
            })
    }

    /// True when no robot is mid-cycle.
    pub fn all_idle(&self) -> bool {
        self.robots
            .iter()
            .filter(|r| r.alive)
            .all(|r| matches!(r.phase, CyclePhase::Idle))
    }
}

fn arc_step(s0: f64, s1: f64) -> impl Fn(&Motion) -> Option<ArcStep> {
    move |m: &Motion| {
        m.arc.map(|(center, sweep)| ArcStep {
            center,
            sweep: sweep * (s1 - s0),
        })
    }
}
