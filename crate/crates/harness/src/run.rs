//! Running a scenario end to end.

use std::collections::BTreeMap;
use std::sync::atomic::Ordering;

use flock_core::coordsys::{extract_references, far_robots};
use flock_core::dispatch::{Dispatcher, Params, Phase};
use flock_core::verify::{self, Verdict, VerifyOptions};
use flock_core::world::{substream, CyclePhase, WorldError};
use flock_core::{EventKind, Point, SchedulerConfig, Trace, World};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::driver::ScriptedDriver;
use crate::random;
use crate::scenario::{FaultSpec, LoadedScenario, Robots, Role};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Trace(#[from] flock_core::trace::TraceError),
}

#[derive(Debug, Error, PartialEq)]
pub enum FaultError {
    #[error("{0} is not recognizable in the current configuration")]
    Unresolved(Role),
    #[error("robot {0} is not alive")]
    NotAlive(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppliedFault {
    pub role: String,
    pub robot: usize,
    pub event: u64,
    pub round: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub robots: usize,
    pub events: u64,
    pub rounds: u64,
    pub rounds_per_phase: BTreeMap<String, u64>,
    pub reformations: usize,
    pub max_far: usize,
    /// Degenerate random draws that were redrawn.
    pub rejections: u32,
    /// The run ended in a quiescent flocking formation.
    pub reached_flocking: bool,
    pub rounds_to_flocking: Option<u64>,
    /// Activations (look events) before the configuration first left
    /// Separation.
    pub separation_activations: Option<u64>,
    pub waypoints_consumed: usize,
    pub faults: Vec<AppliedFault>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

pub struct RunOutput {
    pub initial: Vec<Point>,
    pub trace: Trace,
    pub verdicts: Vec<Verdict>,
    pub metrics: Metrics,
}

impl RunOutput {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Initial positions of a scenario and the number of rejected draws.
pub fn initial_positions(l: &LoadedScenario) -> (Vec<Point>, u32) {
    match &l.scenario.robots {
        Robots::Explicit(v) => (v.clone(), 0),
        Robots::Random { random } => {
            let mut rng = ChaCha8Rng::seed_from_u64(substream(l.scenario.seed, 7));
            random::draw(random, &mut rng)
        }
    }
}

/// Robot id currently holding `role`.
pub fn resolve_role(world: &World, params: &Params, role: Role) -> Result<usize, FaultError> {
    if let Role::Index(i) = role {
        return match world.robots().get(i) {
            Some(r) if r.alive => Ok(i),
            _ => Err(FaultError::NotAlive(i)),
        };
    }
    let alive = world.alive_positions();
    let pts: Vec<Point> = alive.iter().map(|(_, p)| *p).collect();
    let refs = extract_references(&pts, params.tolerance(&pts)).ok_or(FaultError::Unresolved(role))?;
    let k = match role {
        Role::R1 => refs.r1,
        Role::R2 => refs.r2,
        _ => refs.leader,
    };
    Ok(alive[k].0)
}

/// Crashes the robot holding `role` now.
pub fn inject_fault(world: &mut World, params: &Params, role: Role) -> Result<usize, FaultError> {
    let id = resolve_role(world, params, role)?;
    world.crash(id).map_err(|_| FaultError::NotAlive(id))?;
    Ok(id)
}

fn fault_ready(world: &World, params: &Params, f: &FaultSpec, consumed: usize) -> Option<usize> {
    if f.at_round.is_some_and(|r| world.rounds() < r) || f.after_waypoints.is_some_and(|w| consumed < w) {
        return None;
    }
    let id = resolve_role(world, params, f.role).ok()?;
    if f.mid_move && !matches!(world.robots()[id].phase, CyclePhase::Moving(_)) {
        return None;
    }
    Some(id)
}

fn current_label(world: &World, program: &Dispatcher) -> String {
    match world.trace().events.last() {
        Some(e) if !matches!(e.kind, EventKind::Place | EventKind::Crash) => e.phase.clone(),
        _ => world.label(program),
    }
}

/// Runs a loaded scenario until the flock is at rest in its formation with
/// every waypoint taken, or `max_events` elapse. Faults whose trigger has not
/// come by then are skipped with a warning.
pub fn run_scenario(l: &LoadedScenario) -> Result<RunOutput, RunError> {
    let sc = &l.scenario;
    let (initial, rejections) = initial_positions(l);
    let config = SchedulerConfig {
        seed: sc.seed,
        ..sc.scheduler
    };
    let mut world = World::new(&initial, config)?;
    let program = Dispatcher::new(l.params.clone());
    let waypoints = sc.steering.as_ref().map_or(0, |s| s.waypoints.len());
    let counter = sc.steering.as_ref().map(|s| {
        let d = ScriptedDriver::new(s.waypoints.clone(), l.params.clone());
        let c = d.counter();
        world.set_driver(Box::new(d));
        c
    });
    let consumed = || counter.as_ref().map_or(0, |c| c.load(Ordering::Relaxed));
    let mut pending: Vec<&FaultSpec> = sc.faults.iter().collect();
    let mut metrics = Metrics {
        robots: initial.len(),
        rejections,
        ..Default::default()
    };
    let flock = Phase::FlockMotion.label();
    for _ in 0..sc.max_events {
        let mut k = 0;
        while k < pending.len() {
            if let Some(id) = fault_ready(&world, &l.params, pending[k], consumed()) {
                world.crash(id)?;
                metrics.faults.push(AppliedFault {
                    role: pending[k].role.to_string(),
                    robot: id,
                    event: world.trace().events.last().map_or(0, |e| e.i),
                    round: world.rounds(),
                });
                pending.remove(k);
            } else {
                k += 1;
            }
        }
        let label = current_label(&world, &program);
        if label == flock && world.at_rest(&program) {
            metrics.rounds_to_flocking.get_or_insert(world.rounds());
            if consumed() >= waypoints {
                // Natural end of the run; faults still pending never fire.
                break;
            }
        }
        if let Err(e) = world.schedule_step(&program) {
            metrics.error = Some(e.to_string());
            break;
        }
    }
    for f in &pending {
        metrics.warnings.push(format!("fault on {} never triggered", f.role));
    }
    metrics.reached_flocking = current_label(&world, &program) == flock && world.at_rest(&program);
    metrics.waypoints_consumed = consumed();
    metrics.rounds = world.rounds();
    let trace = world.into_trace();
    fill_trace_metrics(&trace, &l.params, &mut metrics);
    let verdicts = verify::verify_all(&trace, &l.params, VerifyOptions::default())?;
    Ok(RunOutput {
        initial,
        trace,
        verdicts,
        metrics,
    })
}

/// Metrics that only need the trace.
pub fn fill_trace_metrics(trace: &Trace, params: &Params, m: &mut Metrics) {
    m.events = trace.events.len() as u64;
    m.rounds_per_phase.clear();
    for ep in verify::episodes(trace) {
        *m.rounds_per_phase.entry(ep.phase).or_default() += ep.rounds;
    }
    m.reformations = verify::reformations(trace).iter().filter(|e| !e.open).count();
    let sep = Phase::Separation.label();
    let mut looks = 0;
    m.separation_activations = None;
    for e in trace.events.iter().filter(|e| !matches!(e.kind, EventKind::Place | EventKind::Crash)) {
        if e.phase != sep {
            m.separation_activations = Some(looks);
            break;
        }
        looks += u64::from(e.kind == EventKind::Look);
    }
    let mut max_far = 0;
    let mut measure = |s: &verify::State| {
        let (_, pts) = s.alive();
        if let Ok(f) = far_robots(&pts, params.tolerance(&pts)) {
            max_far = max_far.max(f.len());
        }
    };
    let mut placed = verify::State::default();
    let mut seen_motion = false;
    verify::for_each_change(trace, |e, before, after| {
        if e.kind == EventKind::Place {
            placed = after.clone();
            return;
        }
        if !seen_motion {
            seen_motion = true;
            measure(before);
        }
        measure(after);
    });
    if !seen_motion {
        measure(&placed);
    }
    m.max_far = max_far;
}
