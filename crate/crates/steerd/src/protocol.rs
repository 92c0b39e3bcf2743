//! Wire messages.

use std::collections::BTreeMap;

use flock_core::formation::FlockPattern;
use flock_core::Point;
use flock_harness::scenario::Role;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Coordinates of the state messages while references exist.
    #[default]
    Common,
    /// Global simulator coordinates.
    Screen,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Command {
    Steer {
        target: Point,
        #[serde(default)]
        frame: Frame,
    },
    InjectFault {
        role: Role,
    },
    Pause,
    Resume,
    SetSpeed {
        eps: f64,
    },
    LoadPattern {
        pattern: FlockPattern,
    },
}

/// A client message: the command, or why it could not be read, plus the
/// identifier its reply will carry.
#[derive(Debug, Clone)]
pub struct Request {
    pub cmd_id: Option<Value>,
    pub command: Result<Command, String>,
}

pub fn parse_request(text: &str) -> Request {
    let v: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            return Request {
                cmd_id: None,
                command: Err(e.to_string()),
            }
        }
    };
    let cmd_id = v.get("cmd_id").cloned();
    Request {
        cmd_id,
        command: serde_json::from_value(v).map_err(|e| e.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Reply {
    Ack {
        cmd_id: Value,
    },
    Reject {
        cmd_id: Value,
        reason: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        detail: Option<String>,
        /// Borders of M the steer target falls short of.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        borders: Vec<String>,
    },
}

impl Reply {
    pub fn reject(cmd_id: Value, reason: &str) -> Reply {
        Reply::Reject {
            cmd_id,
            reason: reason.to_string(),
            detail: None,
            borders: Vec::new(),
        }
    }

    pub fn is_ack(&self) -> bool {
        matches!(self, Reply::Ack { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotView {
    pub id: usize,
    pub pos: Point,
    pub alive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefIds {
    pub r1: usize,
    pub r2: usize,
    pub leader: usize,
}

/// The line y = slope·x + intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Border {
    pub name: String,
    pub slope: f64,
    pub intercept: f64,
    /// Only the part with x on this side of 0 bounds the region (sign), or
    /// the whole line (0).
    pub half: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regions {
    pub m: Vec<Border>,
    pub k: Vec<Border>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingSteer {
    pub cmd_id: Value,
    pub target: Point,
}

/// One snapshot of the session. Geometry is in the frame named by `frame`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMsg {
    #[serde(rename = "type")]
    pub kind: String,
    pub seq: u64,
    /// Index of the last trace event, `None` before the first.
    pub event: Option<u64>,
    pub heartbeat: bool,
    pub paused: bool,
    pub eps: f64,
    pub frame: String,
    /// Where the common frame sits in global coordinates, when it is used.
    pub frame_origin: Option<Point>,
    pub frame_y_axis: Option<Point>,
    pub frame_x_axis: Option<Point>,
    pub robots: Vec<RobotView>,
    pub phase: String,
    pub refs: Option<RefIds>,
    pub sec: Option<(Point, f64)>,
    pub regions: Option<Regions>,
    pub pending_steer: Option<PendingSteer>,
    /// Accepted steers the head later refused; stays 0 in a sound session.
    pub steer_refusals: u64,
    pub verdict_margins: BTreeMap<String, f64>,
    pub verdicts_at: Option<u64>,
    pub error: Option<String>,
}
