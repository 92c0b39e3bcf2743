use flock_core::coordsys::extract_references;
use flock_core::verify::for_each_change;
use flock_core::{EventKind, SchedulerConfig, World};
use flock_harness::acceptance::{bootstrap_scenario, formed_flock, test_pattern};
use flock_harness::run::{inject_fault, resolve_role, FaultError};
use flock_harness::scenario::{FaultSpec, PatternSource, Role, Scenario};
use flock_harness::{run_scenario, LoadedScenario};

fn resolve(sc: Scenario) -> LoadedScenario {
    sc.resolve(std::path::Path::new(".")).unwrap()
}

#[test]
fn eight_robots_without_faults_pass_every_check() {
    let out = run_scenario(&bootstrap_scenario(11, 8)).unwrap();
    assert!(out.metrics.reached_flocking);
    for v in &out.verdicts {
        assert!(v.pass, "{v:?}");
    }
    assert!(out.metrics.max_far >= 2);
    assert!(out.metrics.rounds_per_phase.contains_key("FlockMotion"));
}

#[test]
fn head_crash_at_round_20_heals() {
    let mut sc = bootstrap_scenario(3, 8).scenario;
    sc.fallback_patterns = vec![PatternSource::Inline(test_pattern(4))];
    sc.faults = vec![FaultSpec {
        role: Role::R1,
        at_round: Some(20),
        after_waypoints: None,
        mid_move: false,
    }];
    let l = resolve(sc);
    let out = run_scenario(&l).unwrap();
    assert_eq!(out.metrics.faults.len(), 1, "{:?}", out.metrics.warnings);
    assert!(out.metrics.faults[0].round >= 20);
    let crash = out.metrics.faults[0].event;
    assert!(out.trace.events.iter().any(|e| e.kind == EventKind::Crash && e.i == crash));
    // New references emerge after the crash and the run ends flocking.
    let mut settled_after = false;
    for_each_change(&out.trace, |e, _, after| {
        if e.i > crash {
            let (_, pts) = after.alive();
            settled_after |= extract_references(&pts, l.params.tolerance(&pts)).is_some_and(|r| r.settled);
        }
    });
    assert!(settled_after);
    assert!(out.metrics.reached_flocking);
    let v = out.verdicts.iter().find(|v| v.check == "reference_stability").unwrap();
    assert!(v.pass, "{v:?}");
    assert!(v.margin >= 2.0, "expected a window on each side of the crash: {v:?}");
}

#[test]
fn crash_without_fallback_stops_with_size_mismatch() {
    let mut sc = bootstrap_scenario(5, 8).scenario;
    sc.faults = vec![FaultSpec {
        role: Role::Index(4),
        at_round: Some(5),
        after_waypoints: None,
        mid_move: false,
    }];
    let out = run_scenario(&resolve(sc)).unwrap();
    let err = out.metrics.error.expect("run must stop");
    assert!(err.contains("pattern size mismatch"), "{err}");
}

#[test]
fn fault_after_the_end_is_a_warning() {
    let mut sc = bootstrap_scenario(7, 5).scenario;
    sc.faults = vec![FaultSpec {
        role: Role::Leader,
        at_round: Some(1_000_000),
        after_waypoints: None,
        mid_move: false,
    }];
    let out = run_scenario(&resolve(sc)).unwrap();
    assert!(out.metrics.faults.is_empty());
    assert_eq!(out.metrics.warnings.len(), 1);
    assert!(out.metrics.reached_flocking);
    assert!(out.trace.events.iter().all(|e| e.kind != EventKind::Crash));
}

#[test]
fn inject_fault_resolves_roles() {
    let l = resolve({
        let mut sc = bootstrap_scenario(1, 6).scenario;
        sc.robots = flock_harness::scenario::Robots::Explicit(formed_flock(6, 1.0, 1));
        sc
    });
    let pts = formed_flock(6, 1.0, 1);
    let mut world = World::new(&pts, SchedulerConfig::default()).unwrap();
    assert_eq!(resolve_role(&world, &l.params, Role::R1), Ok(0));
    assert_eq!(resolve_role(&world, &l.params, Role::R2), Ok(1));
    assert_eq!(resolve_role(&world, &l.params, Role::Leader), Ok(2));
    assert_eq!(inject_fault(&mut world, &l.params, Role::R1), Ok(0));
    assert_eq!(world.alive_ids().len(), 5);
    assert_eq!(inject_fault(&mut world, &l.params, Role::Index(0)), Err(FaultError::NotAlive(0)));
    assert!(Role::parse("R7").is_err());
}

#[test]
fn same_scenario_gives_identical_traces() {
    let l = bootstrap_scenario(21, 8);
    let a = run_scenario(&l).unwrap().trace.to_jsonl();
    let b = run_scenario(&l).unwrap().trace.to_jsonl();
    assert_eq!(a, b);
}

#[test]
fn unsafe_parameters_are_refused_at_load() {
    let mut sc = bootstrap_scenario(2, 5).scenario;
    sc.motion.h = 0.5;
    sc.motion.k = 1.0;
    let e = sc.resolve(std::path::Path::new(".")).unwrap_err();
    assert!(e.to_string().contains("unsafe parameters"));
}
