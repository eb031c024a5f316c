#![allow(dead_code)]

use fleetplan::energy::{build_move_costs, CommModel, EnergyProfile};
use fleetplan::rp_model::{RobotSpec, RpProblem};
use fleetplan::solver::ORACLE_SPACE_LIMIT;
use fleetplan::terrain::{synth_terrain, Cell, CellGrid, SynthKind};
use rand::seq::SliceRandom;
use rand::Rng;

/// Epoch long enough for a diagonal 10 m cell move at 1 m/s.
pub const EPOCH_S: f64 = 15.0;

pub fn flat(a: usize, b: usize) -> CellGrid {
    synth_terrain(SynthKind::Flat, a, b, 10.0).unwrap()
}

pub fn problem(grid: CellGrid, profile: EnergyProfile, kappa: f64, horizon: usize, robots: Vec<RobotSpec>) -> RpProblem {
    let costs = build_move_costs(&grid, &profile, EPOCH_S).unwrap();
    let comm = CommModel::constant(profile.p_tx0_w);
    RpProblem::new(grid, profile, costs, comm, kappa, horizon, EPOCH_S, robots).unwrap()
}

pub fn default_problem(a: usize, b: usize, fleet: usize, kappa: f64, horizon: usize) -> RpProblem {
    let profile = EnergyProfile::default_wheeled(1.0);
    let grid = flat(a, b);
    let costs = build_move_costs(&grid, &profile, EPOCH_S).unwrap();
    let comm = CommModel::constant(profile.p_tx0_w);
    RpProblem::with_default_fleet(grid, profile, costs, comm, kappa, horizon, EPOCH_S, fleet).unwrap()
}

/// A random instance the brute-force oracle accepts: grid up to 3x3, up to
/// two robots, horizon up to 5, random terrain, coverage and batteries.
pub fn random_oracle_instance<R: Rng>(rng: &mut R) -> RpProblem {
    loop {
        let a = rng.gen_range(1..=3);
        let b = rng.gen_range(1..=3);
        let cells = a * b;
        let fleet = rng.gen_range(1..=2usize.min(cells));
        let horizon = rng.gen_range(1..=5);
        if 9f64.powi((fleet * (horizon - 1)) as i32) > ORACLE_SPACE_LIMIT {
            continue;
        }
        let kind = match rng.gen_range(0..4) {
            0 => SynthKind::Flat,
            1 => SynthKind::Ramp {
                grade: rng.gen_range(-0.15..0.15),
            },
            2 => SynthKind::RampNorth {
                grade: rng.gen_range(-0.15..0.15),
            },
            _ => SynthKind::Ridge {
                height: rng.gen_range(0.0..2.0),
            },
        };
        let grid = synth_terrain(kind, a, b, 10.0).unwrap();
        let profile = if rng.gen_bool(0.5) {
            EnergyProfile::default_wheeled(1.0)
        } else {
            EnergyProfile::default_quadruped()
        };
        let baseline = profile.baseline_power_w() * EPOCH_S;
        let sense = (profile.p_sen_w + profile.p_tx0_w) * EPOCH_S;
        let motion = profile.v_max.max(1.0) * 250.0;
        let full = horizon as f64 * (baseline + sense + motion);
        let mut cells_idx: Vec<usize> = (0..cells).collect();
        cells_idx.shuffle(rng);
        let robots = cells_idx[..fleet]
            .iter()
            .map(|&i| RobotSpec {
                start: Cell::new(i / b, i % b),
                battery_init_j: rng.gen_range(0.3..1.0) * full,
            })
            .collect();
        let kappa = rng.gen_range(0.0..=1.0);
        return problem(grid, profile, kappa, horizon, robots);
    }
}
