//! Scenario files: JSON descriptions of one simulation run.

use std::path::{Path, PathBuf};

use flock_core::dispatch::Params;
use flock_core::formation::{FlockPattern, PatternError};
use flock_core::motion::{validate_params, MotionParams};
use flock_core::{Point, SchedulerConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed scenario {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("unsafe parameters: alpha = {alpha:.4} rad, beta = {beta:.4} rad (both must be at least pi/2), d = {d}, d_rmax = {d_rmax}")]
    UnsafeParameters { alpha: f64, beta: f64, d: f64, d_rmax: f64 },
    #[error("invalid pattern {which}: {source}")]
    Pattern { which: String, source: PatternError },
    #[error("pattern size mismatch: {robots} robots need a pattern of {need} points, got {got}")]
    SizeMismatch { robots: usize, need: usize, got: usize },
    #[error("no pattern given")]
    NoPattern,
    #[error("robots: {0}")]
    Robots(String),
    #[error("waypoint {index} ({dx}, {dy}) lies outside M (needs dy >= k |dx| and a nonzero offset)")]
    Waypoint { index: usize, dx: f64, dy: f64 },
    #[error("fault {0}: needs at_round or after_waypoints")]
    FaultTrigger(usize),
    #[error("unknown role {0:?} (expected R1, R2, Leader or {{\"index\": i}})")]
    UnknownRole(String),
}

/// Initial robots: an explicit list or a random draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Robots {
    Explicit(Vec<Point>),
    Random { random: RandomSpec },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// Independent uniform points in the box.
    #[default]
    Uniform,
    /// About half the robots on a regular polygon, the rest inside it: many
    /// far robots at once.
    Polygon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub n: usize,
    /// `[xmin, ymin, xmax, ymax]`.
    #[serde(default = "default_bbox")]
    pub bbox: [f64; 4],
    #[serde(default)]
    pub shape: Shape,
}

fn default_bbox() -> [f64; 4] {
    [0.0, 0.0, 10.0, 10.0]
}

/// A pattern inline or as a path relative to the scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PatternSource {
    Inline(FlockPattern),
    File(PathBuf),
}

/// Head waypoints as offsets from R1 in the common frame, in units of the
/// SEC radius at the moment the waypoint is issued.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Steering {
    pub waypoints: Vec<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    R1,
    R2,
    Leader,
    Index(usize),
}

#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum RoleRepr {
    Name(String),
    Index { index: usize },
}

impl Role {
    pub fn parse(s: &str) -> Result<Role, ScenarioError> {
        match s {
            "R1" => Ok(Role::R1),
            "R2" => Ok(Role::R2),
            "Leader" => Ok(Role::Leader),
            _ => Err(ScenarioError::UnknownRole(s.to_string())),
        }
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Role::R1 => f.write_str("R1"),
            Role::R2 => f.write_str("R2"),
            Role::Leader => f.write_str("Leader"),
            Role::Index(i) => write!(f, "robot {i}"),
        }
    }
}

impl Serialize for Role {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Role::Index(i) => RoleRepr::Index { index: *i }.serialize(s),
            other => RoleRepr::Name(other.to_string()).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Role {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match RoleRepr::deserialize(d)? {
            RoleRepr::Index { index } => Ok(Role::Index(index)),
            RoleRepr::Name(n) => Role::parse(&n).map_err(serde::de::Error::custom),
        }
    }
}

/// Crash `role` once the trigger holds. With `mid_move` the crash also waits
/// until the robot is partway along a move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub role: Role,
    #[serde(default)]
    pub at_round: Option<u64>,
    #[serde(default)]
    pub after_waypoints: Option<usize>,
    #[serde(default)]
    pub mid_move: bool,
}

/// Algorithm knobs other than the pattern and the motion parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tuning {
    pub separation_p: f64,
    pub separation_cap: Option<f64>,
    pub quarter: f64,
    pub eps_rel: f64,
    pub eps_ang: f64,
    pub clamp_factor: f64,
    pub chirality_margin: f64,
}

impl Default for Tuning {
    fn default() -> Self {
        let p = Params::default();
        Tuning {
            separation_p: p.separation_p,
            separation_cap: p.separation_cap,
            quarter: p.quarter,
            eps_rel: p.eps_rel,
            eps_ang: p.eps_ang,
            clamp_factor: p.clamp_factor,
            chirality_margin: p.chirality_margin,
        }
    }
}

fn default_max_events() -> u64 {
    2_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    pub robots: Robots,
    #[serde(default)]
    pub pattern: Option<PatternSource>,
    /// Extra patterns, picked by size after a crash.
    #[serde(default)]
    pub fallback_patterns: Vec<PatternSource>,
    #[serde(default)]
    pub motion: MotionParams,
    /// The scheduler seed is replaced by `seed`.
    #[serde(default)]
    pub scheduler: SchedulerConfig,
    #[serde(default)]
    pub tuning: Tuning,
    #[serde(default)]
    pub steering: Option<Steering>,
    #[serde(default)]
    pub faults: Vec<FaultSpec>,
    #[serde(default = "default_max_events")]
    pub max_events: u64,
}

/// A scenario with its pattern files read and its parameters checked.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub params: Params,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<LoadedScenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let sc: Scenario = serde_json::from_str(&text).map_err(|source| ScenarioError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        sc.resolve(path.parent().unwrap_or(Path::new(".")))
    }

    /// Reads pattern files (relative to `base`) and validates everything that
    /// can be checked before the run.
    pub fn resolve(self, base: &Path) -> Result<LoadedScenario, ScenarioError> {
        let check = validate_params(&self.motion);
        if !check.valid {
            return Err(ScenarioError::UnsafeParameters {
                alpha: check.alpha,
                beta: check.beta,
                d: self.motion.d,
                d_rmax: self.motion.d_rmax,
            });
        }
        let main = self.pattern.as_ref().ok_or(ScenarioError::NoPattern)?;
        let mut patterns = vec![read_pattern(main, base)?];
        for p in &self.fallback_patterns {
            patterns.push(read_pattern(p, base)?);
        }
        for (i, p) in patterns.iter().enumerate() {
            p.validate(&self.motion, 1e-9).map_err(|source| ScenarioError::Pattern {
                which: if i == 0 { "pattern".into() } else { format!("fallback {}", i - 1) },
                source,
            })?;
        }
        let n = match &self.robots {
            Robots::Explicit(v) => {
                if v.iter().any(|p| !p.is_finite()) {
                    return Err(ScenarioError::Robots("non-finite position".into()));
                }
                v.len()
            }
            Robots::Random { random } => {
                let [x0, y0, x1, y1] = random.bbox;
                if !(x1 > x0 && y1 > y0) || random.bbox.iter().any(|v| !v.is_finite()) {
                    return Err(ScenarioError::Robots("empty bounding box".into()));
                }
                random.n
            }
        };
        if n < 4 {
            return Err(ScenarioError::Robots(format!("{n} robots; at least 4 are needed")));
        }
        if patterns[0].len() + 3 != n {
            return Err(ScenarioError::SizeMismatch {
                robots: n,
                need: n - 3,
                got: patterns[0].len(),
            });
        }
        if let Some(s) = &self.steering {
            for (index, w) in s.waypoints.iter().enumerate() {
                if !w.is_finite() || w.y < self.motion.k * w.x.abs() || w.norm() == 0.0 {
                    return Err(ScenarioError::Waypoint { index, dx: w.x, dy: w.y });
                }
            }
        }
        for (i, f) in self.faults.iter().enumerate() {
            if f.at_round.is_none() && f.after_waypoints.is_none() {
                return Err(ScenarioError::FaultTrigger(i));
            }
        }
        let t = self.tuning;
        let params = Params {
            patterns,
            motion: self.motion,
            separation_p: t.separation_p,
            separation_cap: t.separation_cap,
            quarter: t.quarter,
            eps_rel: t.eps_rel,
            eps_ang: t.eps_ang,
            clamp_factor: t.clamp_factor,
            chirality_margin: t.chirality_margin,
        };
        Ok(LoadedScenario { scenario: self, params })
    }
}

fn read_pattern(src: &PatternSource, base: &Path) -> Result<FlockPattern, ScenarioError> {
    match src {
        PatternSource::Inline(p) => Ok(p.clone()),
        PatternSource::File(rel) => {
            let path = base.join(rel);
            let text = std::fs::read_to_string(&path).map_err(|source| ScenarioError::Io {
                path: path.clone(),
                source,
            })?;
            serde_json::from_str(&text).map_err(|source| ScenarioError::Json { path, source })
        }
    }
}
