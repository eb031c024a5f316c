mod common;

use common::{random_oracle_instance, EPOCH_S};
use fleetplan::simulator::{simulate, simulate_paths, SimConfig, SpeedConfig};
use fleetplan::solver::{solve_exact, ExactLimits};
use fleetplan::terrain::{synth_terrain, SynthKind};
use fleetplan::{plan_mission, EnergyProfile, MissionSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config() -> SimConfig {
    SimConfig {
        epoch_s: EPOCH_S,
        speed: SpeedConfig::default(),
    }
}

#[test]
fn replay_reproduces_solver_batteries() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut replayed = 0;
    for _ in 0..120 {
        let p = random_oracle_instance(&mut rng);
        let sol = solve_exact(&p, &ExactLimits::default());
        if !sol.status.has_plan() {
            continue;
        }
        let init: Vec<f64> = p.robots.iter().map(|r| r.battery_init_j).collect();
        let report = simulate_paths(&sol.paths, &init, p.coverage_target, &p.grid, &p.profile, &p.comm, &config()).unwrap();
        assert_eq!(report.epochs(), p.horizon);
        for r in 0..p.fleet() {
            let trace = report.battery_trace(r);
            for (t, (sim, plan)) in trace.iter().zip(&sol.battery[r]).enumerate() {
                assert!((sim - plan).abs() <= 1e-6, "robot {r} epoch {}: sim {sim} plan {plan}", t + 1);
            }
            let drawn = init[r] - trace.last().unwrap();
            assert!((drawn - report.totals.energy_j[r]).abs() <= 1e-6);
        }
        assert_eq!(report.totals.depleted_robots, 0);
        if p.coverage_target > 0 {
            assert_eq!(report.totals.completion_epoch, Some(sol.objective + 1));
        }
        replayed += 1;
    }
    assert!(replayed >= 40, "only {replayed} instances replayed");
}

#[test]
fn planned_mission_replays_without_underflow() {
    let grid = synth_terrain(SynthKind::Ramp { grade: 0.05 }, 3, 3, 10.0).unwrap();
    let profile = EnergyProfile::default_quadruped();
    let spec = MissionSpec::new(grid.clone(), profile.clone(), 1.0, 9.0 * EPOCH_S, 3, EPOCH_S);
    let plan = plan_mission(&spec).unwrap();
    assert!(plan.met_requirements);
    let report = simulate(&plan, &grid, &profile, &spec.comm, &config()).unwrap();
    assert_eq!(report.totals.depleted_robots, 0);
    assert_eq!(report.totals.completion_epoch, Some(plan.completion_epochs + 1));
    for r in 0..plan.fleet_size {
        let b = report.battery_trace(r);
        assert!(b.windows(2).all(|w| w[1] <= w[0]));
        let m: Vec<f64> = report.steps[r].iter().map(|s| s.motion_energy_j_cum).collect();
        assert!(m.windows(2).all(|w| w[1] >= w[0]));
    }
}
