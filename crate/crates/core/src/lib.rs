//! Simulation and verification of oblivious asynchronous robot flocking.

pub mod coordsys;
pub mod dispatch;
pub mod formation;
pub mod geom;
pub mod motion;
pub mod trace;
pub mod verify;
pub mod world;

pub use geom::{Circle, Point, Tolerance, Vector};
pub use trace::{Event, EventKind, Trace};
pub use world::{Action, Decision, LocalFrame, LocalView, Program, SchedulerConfig, SchedulerMode, World};
