//! Scripted head waypoints.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use flock_core::dispatch::{flock_frame, Params};
use flock_core::world::SteerDriver;
use flock_core::Point;

/// Issues waypoints one at a time, each as an offset from the head in the
/// common frame scaled by the SEC radius. A waypoint is offered only while
/// the configuration is a flocking formation and is recomputed at every look
/// until the head takes it.
pub struct ScriptedDriver {
    waypoints: Vec<Point>,
    params: Params,
    consumed: Arc<AtomicUsize>,
}

impl ScriptedDriver {
    pub fn new(waypoints: Vec<Point>, params: Params) -> Self {
        ScriptedDriver {
            waypoints,
            params,
            consumed: Arc::new(AtomicUsize::new(0)),
        }
    }

    /// Shared count of waypoints taken so far.
    pub fn counter(&self) -> Arc<AtomicUsize> {
        self.consumed.clone()
    }
}

/// Global target for offset `w` from the head of a flocking formation.
pub fn waypoint_target(positions: &[Point], params: &Params, w: Point) -> Option<Point> {
    let (refs, frame) = flock_frame(positions, params)?;
    let r1 = frame.to_common(positions[refs.r1]);
    Some(frame.from_common(r1 + w * frame.radius))
}

impl SteerDriver for ScriptedDriver {
    fn next_target(&mut self, positions: &[Point]) -> Option<Point> {
        let w = *self.waypoints.get(self.consumed.load(Ordering::Relaxed))?;
        waypoint_target(positions, &self.params, w)
    }

    fn consumed(&mut self) {
        self.consumed.fetch_add(1, Ordering::Relaxed);
    }
}
