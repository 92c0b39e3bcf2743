//! Event traces and their JSONL encoding.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::geom::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Initial position of a robot; emitted once per robot before any cycle.
    Place,
    Look,
    Compute,
    MoveStep,
    Arrive,
    Crash,
}

impl EventKind {
    /// Events that change the acting robot's position.
    pub fn is_motion(self) -> bool {
        matches!(self, EventKind::MoveStep | EventKind::Arrive)
    }
}

/// Circular piece of a motion: the robot turned by `sweep` radians around
/// `center` to get from `from` to `to`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcStep {
    pub center: Point,
    pub sweep: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub i: u64,
    pub robot: usize,
    pub kind: EventKind,
    pub from: Point,
    pub to: Point,
    #[serde(default)]
    pub phase: String,
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    pub arc: Option<ArcStep>,
}

impl Event {
    /// Position of the moving robot at fraction `s` of this event's segment.
    pub fn position_at(&self, s: f64) -> Point {
        match self.arc {
            Some(a) if a.sweep != 0.0 => {
                if s >= 1.0 {
                    self.to
                } else {
                    a.center + (self.from - a.center).rotate(a.sweep * s)
                }
            }
            _ => self.from.lerp(self.to, s),
        }
    }

    /// Chords approximating the path of this event (one chord when straight).
    pub fn chords(&self) -> Vec<(Point, Point)> {
        let pieces = match self.arc {
            Some(a) if a.sweep != 0.0 => ((a.sweep.abs() / 0.05).ceil() as usize).clamp(1, 256),
            _ => 1,
        };
        (0..pieces)
            .map(|k| {
                (
                    self.position_at(k as f64 / pieces as f64),
                    self.position_at((k + 1) as f64 / pieces as f64),
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub events: Vec<Event>,
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error("malformed trace: {0}")]
    Malformed(String),
}

impl Trace {
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<(), TraceError> {
        for e in &self.events {
            serde_json::to_writer(&mut w, e).map_err(|source| TraceError::Parse { line: e.i as usize, source })?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf8")
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self, TraceError> {
        let mut events = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let e: Event = serde_json::from_str(&line).map_err(|source| TraceError::Parse { line: n + 1, source })?;
            events.push(e);
        }
        let t = Trace { events };
        t.validate()?;
        Ok(t)
    }

    /// Checks index monotonicity and per-robot motion continuity.
    pub fn validate(&self) -> Result<(), TraceError> {
        let mut last_pos: std::collections::HashMap<usize, Point> = Default::default();
        let mut prev: Option<u64> = None;
        for e in &self.events {
            if prev.is_some_and(|p| e.i <= p) {
                return Err(TraceError::Malformed(format!("event index {} not increasing", e.i)));
            }
            prev = Some(e.i);
            if !e.from.is_finite() || !e.to.is_finite() {
                return Err(TraceError::Malformed(format!("non-finite point at event {}", e.i)));
            }
            match e.kind {
                EventKind::Place => {
                    last_pos.insert(e.robot, e.to);
                }
                EventKind::MoveStep | EventKind::Arrive => {
                    if let Some(p) = last_pos.get(&e.robot) {
                        if p.dist(e.from) > 1e-9 * (1.0 + p.norm()) {
                            return Err(TraceError::Malformed(format!(
                                "robot {} jumps at event {}",
                                e.robot, e.i
                            )));
                        }
                    }
                    last_pos.insert(e.robot, e.to);
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Positions of every robot (by id) after replaying the whole trace.
    pub fn final_positions(&self) -> Vec<Point> {
        let mut out: Vec<Point> = Vec::new();
        for e in &self.events {
            if e.kind == EventKind::Place || e.kind.is_motion() {
                if out.len() <= e.robot {
                    out.resize(e.robot + 1, Point::ORIGIN);
                }
                out[e.robot] = e.to;
            }
        }
        out
    }
}
