use flock_core::coordsys::extract_references;
use flock_core::dispatch::{classify, Params, Phase};
use flock_core::formation::FlockPattern;
use flock_core::verify::*;
use flock_core::{Event, EventKind, Point, Tolerance, Trace};

fn p(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

/// Builds a trace from placements and a list of (robot, kind, to, phase).
fn build(initial: &[Point], steps: &[(usize, EventKind, Point, &str)]) -> Trace {
    let mut events = Vec::new();
    let mut pos = initial.to_vec();
    for (r, &q) in initial.iter().enumerate() {
        events.push(Event {
            i: events.len() as u64,
            robot: r,
            kind: EventKind::Place,
            from: q,
            to: q,
            phase: String::new(),
            arc: None,
        });
    }
    for &(r, kind, to, phase) in steps {
        let from = pos[r];
        let to = if kind.is_motion() { to } else { from };
        pos[r] = to;
        events.push(Event {
            i: events.len() as u64,
            robot: r,
            kind,
            from,
            to,
            phase: phase.to_string(),
            arc: None,
        });
    }
    Trace { events }
}

fn pattern() -> FlockPattern {
    FlockPattern {
        points: vec![p(-0.3, -0.5), p(0.1, -0.4), p(0.4, -0.7)],
        anchor_o: p(0., 0.),
        anchor_r2: p(0., -1.),
    }
}

#[test]
fn placement_fitted_pattern_passes() {
    let mut pts = vec![p(0., 1.), p(0., -1.), p(0., 0.)];
    pts.extend(pattern().points);
    let refs = extract_references(&pts, Tolerance::default()).unwrap();
    let v = check_placement_conditions(&pts, &refs, Tolerance::default());
    assert!(v.iter().all(|v| v.pass), "{v:?}");
}

#[test]
fn placement_mirrored_robot_fails_condition_two() {
    let mut pts = vec![p(0., 1.), p(0., -1.), p(0., 0.)];
    pts.extend(pattern().points);
    let refs = extract_references(&pts, Tolerance::default()).unwrap();
    let mut bad = pts.clone();
    bad[4] = p(0.1, 0.4);
    let v = check_placement_conditions(&bad, &refs, Tolerance::default());
    assert!(v[0].pass && v[2].pass);
    assert!(!v[1].pass);
    assert_eq!(v[1].witness.as_ref().unwrap().points, vec![p(0.1, 0.4)]);
}

#[test]
fn placement_robot_inside_leader_circle_fails_condition_three() {
    let mut pts = vec![p(0., 1.), p(0., -1.), p(0.2, 0.)];
    pts.extend(pattern().points);
    let refs = extract_references(&pts, Tolerance::default()).unwrap();
    // 0.5 · dist(Leader, O) from O.
    let mut bad = pts.clone();
    bad[3] = p(0.0, -0.1);
    let v = check_placement_conditions(&bad, &refs, Tolerance::default());
    assert!(!v[2].pass);
    assert!((v[2].margin + 0.1).abs() < 1e-12);
}

#[test]
fn parallel_tracks_do_not_collide() {
    let tracks = [
        Track {
            robot: 0,
            t0: 0.0,
            t1: 1.0,
            from: p(0., 0.),
            to: p(5., 0.),
        },
        Track {
            robot: 1,
            t0: 0.0,
            t1: 1.0,
            from: p(0., 1.),
            to: p(5., 1.),
        },
    ];
    let v = check_tracks(&tracks, 0.1);
    assert!(v.pass);
    assert!((v.margin - 1.0).abs() < 1e-12);
}

#[test]
fn crossing_tracks_collide() {
    let tracks = [
        Track {
            robot: 0,
            t0: 0.0,
            t1: 1.0,
            from: p(-1., 0.),
            to: p(1., 0.),
        },
        Track {
            robot: 1,
            t0: 0.0,
            t1: 1.0,
            from: p(0., -1.),
            to: p(0., 1.),
        },
    ];
    let v = check_tracks(&tracks, 0.1);
    assert!(!v.pass);
    let w = v.witness.unwrap();
    assert!(w.points[0].dist(p(0., 0.)) < 1e-12 && w.points[1].dist(p(0., 0.)) < 1e-12);
}

#[test]
fn single_robot_never_collides() {
    let t = build(&[p(0., 0.)], &[(0, EventKind::Arrive, p(3., 0.), "")]);
    assert!(check_no_collision(&t, 0.1).unwrap().pass);
}

#[test]
fn trace_collision_is_found() {
    let t = build(
        &[p(0., 0.), p(1., 0.05), p(5., 5.)],
        &[(0, EventKind::Arrive, p(2., 0.), "")],
    );
    let v = check_no_collision(&t, 0.1).unwrap();
    assert!(!v.pass);
    assert_eq!(v.witness.unwrap().robots, vec![0, 1]);
    assert!(check_no_collision(&t, 0.01).unwrap().pass);
}

#[test]
fn malformed_trace_is_an_error() {
    let mut t = build(&[p(0., 0.), p(1., 0.)], &[(0, EventKind::Arrive, p(2., 0.), "")]);
    t.events[2].from = p(9., 9.);
    assert!(check_no_collision(&t, 0.1).is_err());
}

fn rounds_of(n: usize, rounds: usize, phase: &str) -> Vec<(usize, EventKind, Point, &str)> {
    let mut v = Vec::new();
    for _ in 0..rounds {
        for r in 0..n {
            v.push((r, EventKind::Look, Point::ORIGIN, phase));
        }
    }
    v
}

#[test]
fn convergence_counts_rounds() {
    let init: Vec<Point> = (0..8).map(|i| p(i as f64, 0.)).collect();
    let mut steps = rounds_of(8, 11, "PatternFormation");
    steps.extend(rounds_of(8, 2, "FlockMotion"));
    let t = build(&init, &steps);
    let eps = episodes(&t);
    assert_eq!(eps[0].phase, "PatternFormation");
    assert_eq!(eps[0].rounds, 11);
    assert!(check_convergence(&t, 8, 4.0).pass);
}

#[test]
fn stalled_run_fails_convergence() {
    let init: Vec<Point> = (0..8).map(|i| p(i as f64, 0.)).collect();
    let t = build(&init, &rounds_of(8, 40, "Placement"));
    let v = check_convergence(&t, 8, 4.0);
    assert!(!v.pass);
    assert!(v.witness.unwrap().note.contains("Placement"));
}

#[test]
fn reformation_episodes_are_measured() {
    let init: Vec<Point> = (0..4).map(|i| p(i as f64, 0.)).collect();
    let mut steps = rounds_of(4, 1, "FlockMotion");
    steps.extend(rounds_of(4, 3, "Recovery"));
    steps.extend(rounds_of(4, 2, "PatternFormation"));
    steps.extend(rounds_of(4, 1, "FlockMotion"));
    let t = build(&init, &steps);
    let r = reformations(&t);
    assert_eq!(r.len(), 1);
    assert!(r[0].rounds >= 5 && r[0].rounds <= 6);
}

#[test]
fn crash_shrinks_round_requirement() {
    let init: Vec<Point> = (0..3).map(|i| p(i as f64, 0.)).collect();
    let t = build(
        &init,
        &[
            (0, EventKind::Look, Point::ORIGIN, ""),
            (2, EventKind::Crash, Point::ORIGIN, ""),
            (1, EventKind::Look, Point::ORIGIN, ""),
            (0, EventKind::Look, Point::ORIGIN, ""),
        ],
    );
    assert_eq!(round_indices(&t), vec![0, 0, 0, 0, 0, 0, 1]);
}

/// A pattern-formation configuration: leader just off O, rest away from
/// their targets.
fn formation_config() -> (Vec<Point>, Params) {
    let mut pts = vec![p(0., 1.), p(0., -1.), p(0.05, 0.)];
    pts.extend([p(-0.3, -0.5), p(0.1, -0.4), p(0.4, -0.7)]);
    let params = Params::with_pattern(FlockPattern {
        points: vec![p(-0.2, -0.5), p(0.15, -0.45), p(0.35, -0.6)],
        anchor_o: p(0., 0.),
        anchor_r2: p(0., -1.),
    });
    (pts, params)
}

#[test]
fn overtaking_is_detected() {
    let (pts, params) = formation_config();
    assert_eq!(classify(&pts, &params).unwrap().phase, Phase::PatternFormation);
    let pf = "PatternFormation";
    let t = build(&pts, &[(3, EventKind::Look, p(0., 0.), pf), (3, EventKind::Arrive, p(0.2, -0.5), pf)]);
    let v = check_no_overtaking(&t, &params);
    assert!(!v.pass);
    assert_eq!(v.witness.unwrap().robots, vec![3]);
    let ok = build(&pts, &[(3, EventKind::Look, p(0., 0.), pf), (3, EventKind::Arrive, p(-0.2, -0.5), pf)]);
    assert!(check_no_overtaking(&ok, &params).pass);
}

#[test]
fn leftover_moves_from_earlier_phases_are_not_judged() {
    let (pts, params) = formation_config();
    let pf = "PatternFormation";
    // Robot 3 planned its move before pattern formation began.
    let t = build(
        &pts,
        &[(3, EventKind::Look, p(0., 0.), "CircularConfig"), (3, EventKind::Arrive, p(0.2, -0.5), pf)],
    );
    assert!(check_no_overtaking(&t, &params).pass);
    // Robot 4 moves while robot 3 still carries such a move.
    let t = build(
        &pts,
        &[
            (3, EventKind::Look, p(0., 0.), "CircularConfig"),
            (4, EventKind::Look, p(0., 0.), pf),
            (4, EventKind::Arrive, p(-0.35, -0.45), pf),
        ],
    );
    assert!(check_no_overtaking(&t, &params).pass);
}

#[test]
fn deadlock_is_detected_with_a_crippling_clamp() {
    // Two rest robots that must swap sides of their targets toward each
    // other; a huge neighbor gap forbids either move.
    let mut pts = vec![p(0., 1.), p(0., -1.), p(0.05, 0.)];
    pts.extend([p(-0.3, -0.5), p(0.3, -0.5)]);
    let mut params = Params::with_pattern(FlockPattern {
        points: vec![p(-0.1, -0.5), p(0.1, -0.5)],
        anchor_o: p(0., 0.),
        anchor_r2: p(0., -1.),
    });
    assert_eq!(classify(&pts, &params).unwrap().phase, Phase::PatternFormation);
    let t = build(&pts, &[(4, EventKind::Arrive, p(0.31, -0.5), "PatternFormation")]);
    assert!(check_no_deadlock(&t, &params).pass);
    params.clamp_factor = 1e12;
    let v = check_no_deadlock(&t, &params);
    assert!(!v.pass);
}

#[test]
fn reference_change_breaks_stability() {
    let (pts, params) = formation_config();
    // Swap the leader for another robot by moving it away and bringing a
    // rest robot next to O.
    let t = build(
        &pts,
        &[
            (2, EventKind::Arrive, p(0.2, -0.9), "Recovery"),
            (4, EventKind::Arrive, p(0.0, -0.05), "Recovery"),
        ],
    );
    let v = check_reference_stability(&t, &params);
    assert!(!v.pass, "{v:?}");
}

#[test]
fn verdicts_survive_serialization() {
    let (pts, params) = formation_config();
    let t = build(&pts, &[(3, EventKind::Arrive, p(-0.2, -0.5), "PatternFormation")]);
    let a = verify_all(&t, &params, VerifyOptions::default()).unwrap();
    let back = Trace::read_jsonl(t.to_jsonl().as_bytes()).unwrap();
    let b = verify_all(&back, &params, VerifyOptions::default()).unwrap();
    assert_eq!(a, b);
    let json = report_json(&a);
    assert!(json.as_array().unwrap().iter().all(|v| v.get("check").is_some()));
}

#[test]
fn plans_made_during_leftover_moves_are_not_judged() {
    let (pts, params) = formation_config();
    let pf = "PatternFormation";
    // Robot 4 looks while robot 3 carries a move from an earlier phase, so
    // its plan rests on a position that is about to change.
    let t = build(
        &pts,
        &[
            (3, EventKind::Look, p(0., 0.), "CircularConfig"),
            (4, EventKind::Look, p(0., 0.), pf),
            (3, EventKind::Arrive, p(-0.3, -0.5), pf),
            (4, EventKind::Arrive, p(-0.35, -0.45), pf),
        ],
    );
    assert!(check_no_overtaking(&t, &params).pass);
    // Once every leftover move is over, plans are judged again.
    let t = build(
        &pts,
        &[
            (3, EventKind::Look, p(0., 0.), "CircularConfig"),
            (3, EventKind::Arrive, p(-0.3, -0.5), pf),
            (4, EventKind::Look, p(0., 0.), pf),
            (4, EventKind::Arrive, p(-0.35, -0.45), pf),
        ],
    );
    assert!(!check_no_overtaking(&t, &params).pass);
}

#[test]
fn stability_window_waits_for_leftover_moves() {
    let (settled, params) = formation_config();
    // Robot 3 on R1's side: nothing is recognizable yet.
    let mut start = settled.clone();
    start[3] = p(-0.3, 0.5);
    assert!(extract_references(&start, Tolerance::default()).is_none());
    let steps = [
        (3, EventKind::MoveStep, settled[3], "PatternFormation"),
        (3, EventKind::Arrive, p(-0.3, 0.5), "Alignment"),
    ];
    // Passing through a settled configuration on a move planned before it
    // opens no window.
    let mut with_look = vec![(3, EventKind::Look, p(0., 0.), "Alignment")];
    with_look.extend(steps);
    assert!(check_reference_stability(&build(&start, &with_look), &params).pass);
    // Without the planning look the pass-through counts as emergence.
    assert!(!check_reference_stability(&build(&start, &steps), &params).pass);
}
