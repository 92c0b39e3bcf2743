//! One live simulation and the commands that act on it.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use flock_core::coordsys::{extract_references, CommonFrame};
use flock_core::dispatch::{classify, flock_frame, steer_admissible, Dispatcher, Params, Phase};
use flock_core::motion::violated_m_borders;
use flock_core::verify::{verify_all, VerifyOptions};
use flock_core::world::SteerDriver;
use flock_core::{EventKind, Point, SchedulerConfig, World};
use flock_harness::driver::waypoint_target;
use flock_harness::run::{initial_positions, inject_fault, FaultError};
use flock_harness::LoadedScenario;
use serde_json::Value;

use crate::protocol::{Border, Command, Frame, PendingSteer, RefIds, Regions, Reply, Request, RobotView, StateMsg};

/// Upper limit for `set_speed`, in events per second.
pub const MAX_EPS: f64 = 100_000.0;

#[derive(Debug, Clone)]
struct Accepted {
    cmd_id: Value,
    /// Offset from the head in the unit common frame.
    offset: Point,
    /// Global target when accepted.
    target: Point,
}

struct Shared {
    params: Params,
    pending: Option<Accepted>,
}

/// Offers the operator's waypoint at every look, re-anchored at the head so
/// it keeps its place in M while the flock moves.
struct LiveDriver(Arc<Mutex<Shared>>);

impl SteerDriver for LiveDriver {
    fn next_target(&mut self, positions: &[Point]) -> Option<Point> {
        let s = self.0.lock().unwrap();
        let a = s.pending.as_ref()?;
        waypoint_target(positions, &s.params, a.offset)
    }

    fn consumed(&mut self) {
        self.0.lock().unwrap().pending = None;
    }
}

pub struct Session {
    world: World,
    program: Dispatcher,
    shared: Arc<Mutex<Shared>>,
    paused: bool,
    eps: f64,
    seq: u64,
    next_cmd: u64,
    /// Steer a robot saw at its look while it was the head.
    seen: HashMap<usize, Value>,
    steer_refusals: u64,
    margins: BTreeMap<String, f64>,
    verdicts_at: Option<u64>,
    last_phase: String,
    error: Option<String>,
}

impl Session {
    pub fn new(l: &LoadedScenario, eps: f64) -> Result<Session, flock_core::world::WorldError> {
        let (initial, _) = initial_positions(l);
        let config = SchedulerConfig {
            seed: l.scenario.seed,
            ..l.scenario.scheduler
        };
        let mut world = World::new(&initial, config)?;
        let shared = Arc::new(Mutex::new(Shared {
            params: l.params.clone(),
            pending: None,
        }));
        world.set_driver(Box::new(LiveDriver(shared.clone())));
        Ok(Session {
            world,
            program: Dispatcher::new(l.params.clone()),
            shared,
            paused: false,
            eps,
            seq: 0,
            next_cmd: 0,
            seen: HashMap::new(),
            steer_refusals: 0,
            margins: BTreeMap::new(),
            verdicts_at: None,
            last_phase: String::new(),
            error: None,
        })
    }

    pub fn params(&self) -> &Params {
        &self.program.params
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn paused(&self) -> bool {
        self.paused
    }

    pub fn set_paused(&mut self, paused: bool) {
        self.paused = paused;
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn steer_refusals(&self) -> u64 {
        self.steer_refusals
    }

    pub fn has_pending_steer(&self) -> bool {
        self.shared.lock().unwrap().pending.is_some()
    }

    fn alive(&self) -> (Vec<usize>, Vec<Point>) {
        self.world.alive_positions().into_iter().unzip()
    }

    /// Nothing left to do until a command arrives.
    pub fn idle(&self) -> bool {
        if self.error.is_some() {
            return true;
        }
        !self.has_pending_steer()
            && self.world.label(&self.program) == Phase::FlockMotion.label()
            && self.world.at_rest(&self.program)
    }

    pub fn handle(&mut self, req: Request) -> Reply {
        let cmd_id = req.cmd_id.unwrap_or_else(|| {
            self.next_cmd += 1;
            Value::from(self.next_cmd)
        });
        let cmd = match req.command {
            Ok(c) => c,
            Err(e) => {
                return Reply::Reject {
                    cmd_id,
                    reason: "parse".into(),
                    detail: Some(e),
                    borders: Vec::new(),
                }
            }
        };
        match cmd {
            Command::Steer { target, frame } => self.steer(cmd_id, target, frame),
            Command::InjectFault { role } => {
                let params = self.program.params.clone();
                match inject_fault(&mut self.world, &params, role) {
                    Ok(id) => {
                        tracing::info!(robot = id, %role, "fault injected");
                        self.shared.lock().unwrap().pending = None;
                        self.world.clear_steer();
                        self.seen.clear();
                        Reply::Ack { cmd_id }
                    }
                    Err(e @ FaultError::Unresolved(_)) => Reply::Reject {
                        cmd_id,
                        reason: "unresolved-role".into(),
                        detail: Some(e.to_string()),
                        borders: Vec::new(),
                    },
                    Err(e @ FaultError::NotAlive(_)) => Reply::Reject {
                        cmd_id,
                        reason: "not-alive".into(),
                        detail: Some(e.to_string()),
                        borders: Vec::new(),
                    },
                }
            }
            Command::Pause => {
                self.paused = true;
                self.refresh_verdicts();
                Reply::Ack { cmd_id }
            }
            Command::Resume => {
                self.paused = false;
                Reply::Ack { cmd_id }
            }
            Command::SetSpeed { eps } => {
                if eps.is_finite() && eps > 0.0 && eps <= MAX_EPS {
                    self.eps = eps;
                    Reply::Ack { cmd_id }
                } else {
                    Reply::reject(cmd_id, "invalid-speed")
                }
            }
            Command::LoadPattern { pattern } => {
                if let Err(e) = pattern.validate(&self.program.params.motion, 1e-9) {
                    return Reply::Reject {
                        cmd_id,
                        reason: "invalid-pattern".into(),
                        detail: Some(e.to_string()),
                        borders: Vec::new(),
                    };
                }
                let mut params = self.program.params.clone();
                params.patterns.retain(|p| p.len() != pattern.len());
                params.patterns.push(pattern);
                self.shared.lock().unwrap().params = params.clone();
                self.program = Dispatcher::new(params);
                Reply::Ack { cmd_id }
            }
        }
    }

    fn steer(&mut self, cmd_id: Value, target: Point, frame: Frame) -> Reply {
        let (_, pts) = self.alive();
        let params = &self.program.params;
        let Some((refs, cf)) = flock_frame(&pts, params) else {
            return Reply::reject(cmd_id, "not-in-flock-motion");
        };
        let r1 = pts[refs.r1];
        if r1.dist(pts[refs.r2]) >= params.motion.d_rmax {
            return Reply::reject(cmd_id, "span-exceeds-d_rmax");
        }
        let global = match frame {
            Frame::Common => cf.from_common(target),
            Frame::Screen => target,
        };
        let tol = params.tolerance(&pts);
        if !steer_admissible(&cf, r1, global, &params.motion, tol) {
            let c = cf.to_common(global);
            let borders = violated_m_borders(c, cf.to_common(r1).y, params.motion.k, tol.eps_len);
            let detail = if borders.is_empty() { Some("target is the head".into()) } else { None };
            return Reply::Reject {
                cmd_id,
                reason: "outside-M".into(),
                detail,
                borders: borders.into_iter().map(String::from).collect(),
            };
        }
        let offset = cf.to_unit(global) - cf.to_unit(r1);
        self.shared.lock().unwrap().pending = Some(Accepted {
            cmd_id: cmd_id.clone(),
            offset,
            target: global,
        });
        // A waypoint the head already looked at stays with that look; the
        // new one gets a fresh id.
        self.world.clear_steer();
        Reply::Ack { cmd_id }
    }

    /// Advances the simulation by one event unless paused or idle.
    pub fn step(&mut self) -> Option<u64> {
        if self.paused || self.idle() {
            return None;
        }
        let (ids, pts) = self.alive();
        let pending = self.shared.lock().unwrap().pending.as_ref().map(|a| a.cmd_id.clone());
        let head = pending
            .as_ref()
            .and_then(|_| flock_frame(&pts, &self.program.params))
            .map(|(r, _)| ids[r.r1]);
        let start = self.world.trace().events.len();
        if let Err(e) = self.world.schedule_step(&self.program) {
            tracing::error!(error = %e, "simulation stopped");
            self.error = Some(e.to_string());
            self.refresh_verdicts();
            return None;
        }
        let now = self.shared.lock().unwrap().pending.as_ref().map(|a| a.cmd_id.clone());
        for e in &self.world.trace().events[start..] {
            match e.kind {
                EventKind::Look => {
                    self.seen.remove(&e.robot);
                    if let (Some(h), Some(id)) = (head, &pending) {
                        if h == e.robot {
                            self.seen.insert(e.robot, id.clone());
                        }
                    }
                }
                EventKind::Compute => {
                    if let Some(id) = self.seen.remove(&e.robot) {
                        if now.as_ref() == Some(&id) {
                            tracing::warn!(robot = e.robot, "head refused an accepted steer");
                            self.steer_refusals += 1;
                        }
                    }
                }
                _ => {}
            }
        }
        let label = self.world.label(&self.program);
        if label != self.last_phase {
            self.last_phase = label;
            self.refresh_verdicts();
        }
        self.world.trace().events.last().map(|e| e.i)
    }

    pub fn refresh_verdicts(&mut self) {
        if let Ok(v) = verify_all(self.world.trace(), &self.program.params, VerifyOptions::default()) {
            self.margins = v.into_iter().map(|v| (v.check, v.margin)).collect();
            self.verdicts_at = self.world.trace().events.last().map(|e| e.i);
        }
    }

    pub fn state(&mut self, heartbeat: bool) -> StateMsg {
        self.seq += 1;
        let params = &self.program.params;
        let (ids, pts) = self.alive();
        let class = classify(&pts, params);
        let phase = match &class {
            Ok(c) => c.phase.label().to_string(),
            Err(_) => "Ambiguous".to_string(),
        };
        let refs = if pts.len() >= 3 {
            extract_references(&pts, params.tolerance(&pts))
        } else {
            None
        };
        let frame: Option<CommonFrame> = match (&class, &refs) {
            (Ok(c), _) if c.formation.is_some() => c.formation.as_ref().map(|f| f.frame),
            (_, Some(r)) => Some(CommonFrame::new(r, &pts, params.tolerance(&pts))),
            _ => None,
        };
        let map = |p: Point| frame.map_or(p, |f| f.to_common(p));
        let robots = self
            .world
            .robots()
            .iter()
            .map(|r| RobotView {
                id: r.id,
                pos: map(r.current_position()),
                alive: r.alive,
            })
            .collect();
        let regions = match (&refs, &frame) {
            (Some(r), Some(f)) => {
                let m = &params.motion;
                let y1 = f.to_common(pts[r.r1]).y;
                let y2 = f.to_common(pts[r.r2]).y;
                let b = |name: &str, slope: f64, intercept: f64, half: i8| Border {
                    name: name.into(),
                    slope,
                    intercept,
                    half,
                };
                Some(Regions {
                    m: vec![b("y=-kx+y_R1", -m.k, y1, -1), b("y=kx+y_R1", m.k, y1, 1)],
                    k: vec![
                        b("y=-h'|x|", m.h_prime, 0.0, -1),
                        b("y=-h'|x|", -m.h_prime, 0.0, 1),
                        b("y=h|x|+y_R2", -m.h, y2, -1),
                        b("y=h|x|+y_R2", m.h, y2, 1),
                    ],
                })
            }
            _ => None,
        };
        let pending_steer = self.shared.lock().unwrap().pending.as_ref().map(|a| PendingSteer {
            cmd_id: a.cmd_id.clone(),
            target: map(waypoint_target(&pts, params, a.offset).unwrap_or(a.target)),
        });
        StateMsg {
            kind: "state".into(),
            seq: self.seq,
            event: self.world.trace().events.last().map(|e| e.i),
            heartbeat,
            paused: self.paused,
            eps: self.eps,
            frame: if frame.is_some() { "common" } else { "global" }.into(),
            frame_origin: frame.map(|f| f.origin),
            frame_y_axis: frame.map(|f| f.y_axis),
            frame_x_axis: frame.map(|f| f.x_axis.unwrap_or(f.base_perp())),
            robots,
            phase,
            refs: refs.as_ref().map(|r| RefIds {
                r1: ids[r.r1],
                r2: ids[r.r2],
                leader: ids[r.leader],
            }),
            sec: refs.as_ref().map(|r| (map(r.sec.center), r.sec.radius)),
            regions,
            pending_steer,
            steer_refusals: self.steer_refusals,
            verdict_margins: self.margins.clone(),
            verdicts_at: self.verdicts_at,
            error: self.error.clone(),
        }
    }
}
