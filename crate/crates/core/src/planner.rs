//! Fleet sizing: the smallest fleet whose plan meets the mission requirements.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{build_move_costs_with, CommModel, EnergyError, EnergyProfile};
use crate::rp_model::{coverage_target, ModelError, RpProblem};
use crate::simulator::SpeedConfig;
use crate::solver::{solve_exact, solve_heuristic_with, ExactLimits, HeuristicOptions, PlanSolution, SolveStatus};
use crate::terrain::{Cell, CellGrid};

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("invalid mission: {0}")]
    InvalidMission(String),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    Exact,
    Heuristic,
    /// Exact search below a size threshold, the heuristic above it.
    #[default]
    ExactThenHeuristic,
}

/// Instance size, `fleet * horizon * cells`, above which the combined mode
/// switches to the heuristic.
pub const DEFAULT_EXACT_THRESHOLD: usize = 20_000;

#[derive(Debug, Clone)]
pub struct MissionSpec {
    pub grid: CellGrid,
    /// Required explored fraction in `[0, 1]`.
    pub err: f64,
    /// Required completion time in seconds.
    pub trt_s: f64,
    /// Largest fleet that may be deployed.
    pub tfs: usize,
    pub profile: EnergyProfile,
    pub epoch_s: f64,
    pub comm: CommModel,
    pub speed: SpeedConfig,
    pub solver_mode: SolverMode,
    pub exact_threshold: usize,
    pub limits: ExactLimits,
    pub heuristic: HeuristicOptions,
    pub seed: u64,
    /// Initial charge per robot; full capacity when absent.
    pub battery_init_j: Option<f64>,
}

impl MissionSpec {
    pub fn new(grid: CellGrid, profile: EnergyProfile, err: f64, trt_s: f64, tfs: usize, epoch_s: f64) -> Self {
        let comm = CommModel::constant(profile.p_tx0_w);
        Self {
            grid,
            err,
            trt_s,
            tfs,
            profile,
            epoch_s,
            comm,
            speed: SpeedConfig::default(),
            solver_mode: SolverMode::default(),
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
            limits: ExactLimits::default(),
            heuristic: HeuristicOptions::default(),
            seed: 0,
            battery_init_j: None,
        }
    }

    pub fn horizon(&self) -> usize {
        (self.trt_s / self.epoch_s + 1e-9).floor() as usize
    }

    fn check(&self) -> Result<(), PlanError> {
        let bad = |m: String| Err(PlanError::InvalidMission(m));
        if !(0.0..=1.0).contains(&self.err) {
            return bad(format!("explored-region requirement must lie in [0, 1], got {}", self.err));
        }
        if !(self.epoch_s > 0.0 && self.epoch_s.is_finite()) {
            return bad(format!("invalid epoch length {}", self.epoch_s));
        }
        if !(self.trt_s > 0.0 && self.trt_s.is_finite()) {
            return bad(format!("required time must be positive, got {}", self.trt_s));
        }
        if self.tfs == 0 {
            return bad("fleet size limit must be at least one".into());
        }
        if self.horizon() == 0 {
            return bad(format!(
                "required time {} s is shorter than one {} s epoch",
                self.trt_s, self.epoch_s
            ));
        }
        if let Some(b) = self.battery_init_j {
            if !(0.0..=self.profile.battery_capacity_j).contains(&b) {
                return bad(format!(
                    "initial battery {b} J outside [0, {}]",
                    self.profile.battery_capacity_j
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    pub fleet: usize,
    pub method: SolverMode,
    pub status: SolveStatus,
    pub objective: Option<usize>,
    pub met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionPlan {
    pub fleet_size: usize,
    /// Explored fraction at the end of the horizon, in `[0, 1]`.
    pub expected_explored_pct: f64,
    /// Epochs before the coverage requirement is met.
    pub completion_epochs: usize,
    pub completion_time_s: f64,
    pub epoch_s: f64,
    pub horizon: usize,
    pub coverage_target_cells: usize,
    pub paths: Vec<Vec<Cell>>,
    #[serde(rename = "battery_init_J")]
    pub battery_init_j: Vec<f64>,
    pub met_requirements: bool,
    pub solution: PlanSolution,
    pub iterations: Vec<Iteration>,
}

impl MissionPlan {
    pub fn status(&self) -> SolveStatus {
        self.solution.status
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

fn solve_for(spec: &MissionSpec, p: &RpProblem) -> (SolverMode, PlanSolution) {
    let size = p.fleet() * p.horizon * p.cells();
    let exact = match spec.solver_mode {
        SolverMode::Exact => true,
        SolverMode::Heuristic => false,
        SolverMode::ExactThenHeuristic => size <= spec.exact_threshold,
    };
    if exact {
        (SolverMode::Exact, solve_exact(p, &spec.limits))
    } else {
        (SolverMode::Heuristic, solve_heuristic_with(p, spec.seed, &spec.heuristic))
    }
}

/// Tries fleets `1..=tfs` in order and returns the first plan that meets the
/// coverage and time requirements; otherwise the largest fleet's result with
/// `met_requirements = false`.
pub fn plan_mission(spec: &MissionSpec) -> Result<MissionPlan, PlanError> {
    spec.check()?;
    let horizon = spec.horizon();
    let cells = spec.grid.len();
    let target = coverage_target(spec.err, cells);
    let traversable = (0..cells).filter(|&i| spec.grid.is_traversable(i)).count();

    let empty = |solution: PlanSolution, iterations: Vec<Iteration>, met: bool| MissionPlan {
        fleet_size: 0,
        expected_explored_pct: 0.0,
        completion_epochs: 0,
        completion_time_s: 0.0,
        epoch_s: spec.epoch_s,
        horizon,
        coverage_target_cells: target,
        paths: Vec::new(),
        battery_init_j: Vec::new(),
        met_requirements: met,
        solution,
        iterations,
    };

    if target == 0 {
        let mut sol = PlanSolution::infeasible("nothing to explore");
        sol.status = SolveStatus::Optimal;
        sol.reason = None;
        return Ok(empty(sol, Vec::new(), true));
    }
    if traversable == 0 {
        return Err(PlanError::InvalidMission("grid has no traversable cells".into()));
    }

    let costs = build_move_costs_with(&spec.grid, &spec.profile, spec.epoch_s, &spec.speed)?;
    let battery = spec.battery_init_j.unwrap_or(spec.profile.battery_capacity_j);
    let mut iterations = Vec::new();
    let mut last: Option<MissionPlan> = None;

    for fleet in 1..=spec.tfs.min(traversable) {
        let mut p = RpProblem::with_default_fleet(
            spec.grid.clone(),
            spec.profile.clone(),
            costs.clone(),
            spec.comm,
            spec.err,
            horizon,
            spec.epoch_s,
            fleet,
        )?;
        for r in p.robots.iter_mut() {
            r.battery_init_j = battery;
        }
        let (method, sol) = solve_for(spec, &p);
        let has_paths = !sol.paths.is_empty();
        let met = has_paths
            && sol.explored_count(horizon) >= target
            && sol.objective as f64 * spec.epoch_s <= spec.trt_s + 1e-9;
        iterations.push(Iteration {
            fleet,
            method,
            status: sol.status,
            objective: has_paths.then_some(sol.objective),
            met,
        });
        let plan = MissionPlan {
            fleet_size: fleet,
            expected_explored_pct: if has_paths {
                sol.explored_count(horizon) as f64 / cells as f64
            } else {
                0.0
            },
            completion_epochs: sol.objective,
            completion_time_s: sol.objective as f64 * spec.epoch_s,
            epoch_s: spec.epoch_s,
            horizon,
            coverage_target_cells: target,
            paths: sol.paths.clone(),
            battery_init_j: vec![battery; fleet],
            met_requirements: met,
            solution: sol,
            iterations: Vec::new(),
        };
        if met {
            return Ok(MissionPlan { iterations, ..plan });
        }
        last = Some(plan);
    }
    let plan = last.expect("at least one fleet size tried");
    Ok(MissionPlan { iterations, ..plan })
}

/// Plans the same mission once per profile.
pub fn compare_profiles(spec: &MissionSpec, profiles: &[EnergyProfile]) -> Result<Vec<MissionPlan>, PlanError> {
    profiles
        .iter()
        .map(|profile| {
            let mut s = spec.clone();
            s.profile = profile.clone();
            s.comm = CommModel {
                p_tx0_w: profile.p_tx0_w,
                ..spec.comm
            };
            plan_mission(&s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::{synth_terrain, SynthKind};

    fn spec(n: usize, err: f64, trt_s: f64, tfs: usize) -> MissionSpec {
        let grid = synth_terrain(SynthKind::Flat, n, n, 10.0).unwrap();
        MissionSpec::new(grid, EnergyProfile::default_wheeled(1.0), err, trt_s, tfs, 10.0)
    }

    #[test]
    fn nothing_required() {
        let plan = plan_mission(&spec(3, 0.0, 90.0, 4)).unwrap();
        assert_eq!(plan.fleet_size, 0);
        assert_eq!(plan.completion_epochs, 0);
        assert!(plan.met_requirements);
    }

    #[test]
    fn one_robot_sweeps_3x3() {
        let plan = plan_mission(&spec(3, 1.0, 90.0, 4)).unwrap();
        assert_eq!(plan.fleet_size, 1);
        assert_eq!(plan.completion_epochs, 8);
        assert!(plan.met_requirements);
        assert_eq!(plan.iterations.len(), 1);
    }

    #[test]
    fn fleet_grows_until_requirements_hold() {
        let plan = plan_mission(&spec(3, 1.0, 40.0, 4)).unwrap();
        assert!(plan.met_requirements);
        assert_eq!(plan.fleet_size, 3);
        let tried: Vec<usize> = plan.iterations.iter().map(|i| i.fleet).collect();
        assert_eq!(tried, vec![1, 2, 3]);
        assert!(plan.expected_explored_pct >= 1.0);
        assert!(plan.completion_time_s <= 40.0);
    }

    #[test]
    fn unmet_returns_largest_fleet() {
        let plan = plan_mission(&spec(3, 1.0, 20.0, 2)).unwrap();
        assert!(!plan.met_requirements);
        assert_eq!(plan.fleet_size, 2);
        assert_eq!(plan.iterations.len(), 2);
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(plan_mission(&spec(3, 1.5, 90.0, 2)).is_err());
        assert!(plan_mission(&spec(3, 0.5, 5.0, 2)).is_err());
        assert!(plan_mission(&spec(3, 0.5, 90.0, 0)).is_err());
    }

    #[test]
    fn identical_profiles_give_identical_plans() {
        let s = spec(3, 1.0, 60.0, 3);
        let p = EnergyProfile::default_wheeled(1.0);
        let plans = compare_profiles(&s, &[p.clone(), p]).unwrap();
        assert_eq!(plans[0], plans[1]);
    }
}
