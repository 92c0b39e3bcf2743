use flock_core::coordsys::extract_references;
use flock_core::dispatch::{classify, compute, Dispatcher, Params, Phase};
use flock_core::formation::FlockPattern;
use flock_core::geom::{self, Circle};
use flock_core::world::{CyclePhase, Handedness, RobotRng};
use flock_core::{LocalFrame, Point, Program, SchedulerConfig, Tolerance, World};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn p(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

/// Smallest circle over every pair diameter and every triple circumcircle
/// that contains all points.
fn brute_sec(pts: &[Point]) -> Circle {
    let scale = geom::diameter(pts).max(1.0);
    let fits = |c: &Circle| pts.iter().all(|q| q.dist(c.center) <= c.radius + 1e-10 * scale);
    let mut best = Circle::new(pts[0], 0.0);
    if pts.len() == 1 {
        return best;
    }
    best.radius = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let c = Circle::from_diameter(pts[i], pts[j]);
            if c.radius < best.radius && fits(&c) {
                best = c;
            }
            for k in j + 1..pts.len() {
                if let Some(c) = Circle::circumcircle(pts[i], pts[j], pts[k]) {
                    if c.radius < best.radius && fits(&c) {
                        best = c;
                    }
                }
            }
        }
    }
    best
}

fn point() -> impl Strategy<Value = Point> {
    (-100.0..100.0f64, -100.0..100.0f64).prop_map(|(x, y)| p(x, y))
}

fn cloud(lo: usize, hi: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(point(), lo..=hi)
}

/// Rotation, reflection, positive scale and translation.
fn similarity() -> impl Strategy<Value = LocalFrame> {
    (0.0..std::f64::consts::TAU, any::<bool>(), 0.1..10.0f64, point()).prop_map(|(rotation, left, unit_scale, origin)| {
        LocalFrame {
            origin,
            rotation,
            handedness: if left { Handedness::Left } else { Handedness::Right },
            unit_scale,
        }
    })
}

fn pattern(m: usize) -> FlockPattern {
    let base = [
        p(-0.3, -0.45),
        p(-0.1, -0.3),
        p(0.05, -0.7),
        p(0.2, -0.5),
        p(0.12, -0.25),
        p(-0.2, -0.6),
        p(0.3, -0.4),
        p(-0.05, -0.85),
        p(-0.25, -0.35),
    ];
    FlockPattern {
        points: base[..m].to_vec(),
        anchor_o: p(0., 0.),
        anchor_r2: p(0., -1.),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sec_matches_brute_force(pts in cloud(1, 12)) {
        let a = geom::smallest_enclosing_circle(&pts).unwrap();
        let b = brute_sec(&pts);
        let scale = geom::diameter(&pts).max(1.0);
        prop_assert!(a.center.dist(b.center) <= 1e-9 * scale, "{a:?} vs {b:?}");
        prop_assert!((a.radius - b.radius).abs() <= 1e-9 * scale);
    }

    #[test]
    fn angle_is_invariant_under_similarities(v in point(), a in point(), b in point(), f in similarity()) {
        prop_assume!(v.dist(a) > 1e-3 && v.dist(b) > 1e-3);
        let x = geom::angle_at(v, a, b).unwrap();
        let y = geom::angle_at(f.to_local(v), f.to_local(a), f.to_local(b)).unwrap();
        prop_assert!((x - y).abs() < 1e-9);
    }

    #[test]
    fn collinearity_ignores_argument_order(a in point(), b in point(), t in -2.0..3.0f64, off in -1e-3..1e-3f64) {
        let c = a.lerp(b, t) + (b - a).perp() * off;
        let tol = Tolerance::default();
        let r = geom::collinear(a, b, c, tol);
        for (x, y, z) in [(a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
            prop_assert_eq!(geom::collinear(x, y, z, tol), r);
        }
    }

    #[test]
    fn frames_round_trip(q in point(), f in similarity()) {
        prop_assert!(f.from_local(f.to_local(q)).dist(q) < 1e-9 * (1.0 + q.norm()));
    }

    #[test]
    fn classification_agrees_across_frames(pts in cloud(4, 10), f in similarity()) {
        let params = Params { patterns: (1..=7).map(pattern).collect(), ..Default::default() };
        let local: Vec<Point> = pts.iter().map(|&q| f.to_local(q)).collect();
        let a = classify(&pts, &params).map(|c| c.phase);
        let b = classify(&local, &params).map(|c| c.phase);
        prop_assert_eq!(a.is_ok(), b.is_ok());
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn decisions_ignore_observation_order(pts in cloud(4, 9), seed in any::<u64>(), me in 0usize..4) {
        let params = Params { patterns: (1..=6).map(pattern).collect(), ..Default::default() };
        let mut shuffled: Vec<(usize, Point)> = pts.iter().copied().enumerate().collect();
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            let j = r.gen_range(0..=i);
            shuffled.swap(i, j);
        }
        let me2 = shuffled.iter().position(|&(i, _)| i == me).unwrap();
        let pts2: Vec<Point> = shuffled.iter().map(|&(_, q)| q).collect();
        let a = compute(&pts, me, &params, None, &mut RobotRng::seed_from_u64(seed));
        let b = compute(&pts2, me2, &params, None, &mut RobotRng::seed_from_u64(seed));
        let scale = geom::diameter(&pts);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(&a.label, &b.label);
                prop_assert_eq!(a.action.target().is_some(), b.action.target().is_some());
                if let (Some(x), Some(y)) = (a.action.target(), b.action.target()) {
                    prop_assert!(x.dist(y) <= 1e-9 * scale, "{a:?} vs {b:?}");
                }
            }
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }
}

fn random_world(seed: u64, n: usize) -> World {
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Point> = (0..n).map(|_| p(r.gen_range(0.0..10.0), r.gen_range(0.0..10.0))).collect();
    World::new(&pts, SchedulerConfig { seed, shared_unit: false, ..Default::default() }).unwrap()
}

fn program(n: usize) -> Dispatcher {
    let mut params = Params::with_pattern(pattern(n - 3));
    params.motion.d_rmax = 1e9;
    Dispatcher::new(params)
}

/// Along whole simulated runs, every robot's own frame yields the global
/// phase.
#[test]
fn classification_agrees_along_runs() {
    for seed in 0..6 {
        let n = 5 + seed as usize;
        let prog = program(n);
        let mut w = random_world(seed, n);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..6000 {
            if w.is_quiescent(&prog) && w.label(&prog) == "FlockMotion" {
                break;
            }
            w.schedule_step(&prog).unwrap();
            let global: Vec<Point> = w.robots().iter().map(|r| r.current_position()).collect();
            let label = classify(&global, &prog.params).unwrap().phase;
            seen.insert(label);
            for r in w.robots() {
                let f = r.frame.at(r.current_position());
                let local: Vec<Point> = global.iter().map(|&q| f.to_local(q)).collect();
                assert_eq!(classify(&local, &prog.params).unwrap().phase, label, "seed {seed}");
            }
        }
        assert!(seen.contains(&Phase::FlockMotion), "seed {seed} never flocked: {seen:?}");
    }
}

#[test]
fn same_seed_same_trace() {
    let run = || {
        let prog = program(7);
        let mut w = random_world(42, 7);
        w.run_until(&prog, 3000, |_| false).unwrap();
        w.into_trace().to_jsonl()
    };
    assert_eq!(run(), run());
}

/// A pending decision recomputed out of context, from the stored observation
/// and a copy of the robot's random stream, is the same every time.
#[test]
fn compute_is_a_function_of_the_observation() {
    let prog = program(8);
    let mut w = random_world(3, 8);
    let mut checked = 0;
    for _ in 0..2000 {
        w.schedule_step(&prog).unwrap();
        for r in w.robots() {
            if let CyclePhase::Observed(obs) = &r.phase {
                let a = prog.compute(&obs.view, obs.steer_local, &mut r.rng().clone());
                let b = Dispatcher::new(prog.params.clone()).compute(&obs.view, obs.steer_local, &mut r.rng().clone());
                assert_eq!(a, b);
                checked += 1;
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn references_are_frame_covariant() {
    let pts = [p(0., 1.), p(0., -1.), p(0.1, 0.), p(-0.3, -0.5), p(0.2, -0.4)];
    let refs = extract_references(&pts, Tolerance::default()).unwrap();
    let f = LocalFrame {
        origin: p(3., -2.),
        rotation: 1.1,
        handedness: Handedness::Left,
        unit_scale: 0.3,
    };
    let local: Vec<Point> = pts.iter().map(|&q| f.to_local(q)).collect();
    let r2 = extract_references(&local, Tolerance::relative_to(&local, 1e-9, 1e-9)).unwrap();
    assert_eq!((refs.leader, refs.r1, refs.r2), (r2.leader, r2.r1, r2.r2));
}
