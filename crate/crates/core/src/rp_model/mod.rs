//! The multi-robot coverage planning model.
//!
//! [`RpProblem`] carries the parameters every solver works from: grid, energy
//! profile, move costs, horizon and fleet. [`build_rp`] additionally expands it
//! into an explicit mixed-integer linear program ([`LinearModel`]) whose
//! battery recursion has its binary products linearized with auxiliary
//! binaries, ready for [`export_lp`].
//!
//! Epochs are numbered `1..=T`. Battery `b[r][t]` is the level at the end of
//! epoch `t`; epoch 1 charges the baseline drain plus sensing and transmission
//! at the start cell, and every later epoch charges the baseline, the motion
//! energy of the move taken, and sensing plus transmission if the cell entered
//! was unexplored at the end of the previous epoch.

mod linear;
mod lp;

pub use linear::{ConstraintFamily, LinearModel, Row, Sense, VarKind, Variable};
pub use lp::{export_lp, write_lp};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{CommModel, EnergyProfile, MoveCostTable};
use crate::terrain::{Cell, CellGrid};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid start cell for robot {robot}: {reason}")]
    InvalidStart { robot: usize, reason: String },
    #[error("provably infeasible: {0}")]
    ProvablyInfeasible(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub start: Cell,
    #[serde(rename = "battery_init_J")]
    pub battery_init_j: f64,
}

/// Number of cells that satisfies a required explored fraction, rounded up.
pub fn coverage_target(kappa: f64, cells: usize) -> usize {
    let exact = kappa * cells as f64;
    ((exact - 1e-9).ceil().max(0.0) as usize).min(cells)
}

/// Default start placement: traversable cells in index order
/// `(0,0), (0,1), ...`.
pub fn default_starts(grid: &CellGrid, fleet: usize) -> Result<Vec<Cell>, ModelError> {
    let starts: Vec<Cell> = (0..grid.len())
        .filter(|&i| grid.is_traversable(i))
        .take(fleet)
        .map(|i| grid.cell(i))
        .collect();
    if starts.len() < fleet {
        return Err(ModelError::InvalidParameter(format!(
            "grid has only {} traversable cells for {fleet} robots",
            starts.len()
        )));
    }
    Ok(starts)
}

/// Parameters of one coverage planning instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpProblem {
    pub grid: CellGrid,
    pub profile: EnergyProfile,
    pub move_costs: MoveCostTable,
    pub comm: CommModel,
    pub horizon: usize,
    pub epoch_s: f64,
    pub kappa: f64,
    pub coverage_target: usize,
    pub robots: Vec<RobotSpec>,
    sense_j: Vec<f64>,
    baseline_j: f64,
}

impl RpProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        grid: CellGrid,
        profile: EnergyProfile,
        move_costs: MoveCostTable,
        comm: CommModel,
        kappa: f64,
        horizon: usize,
        epoch_s: f64,
        robots: Vec<RobotSpec>,
    ) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&kappa) {
            return Err(ModelError::InvalidParameter(format!(
                "kappa must lie in [0, 1], got {kappa}"
            )));
        }
        if horizon == 0 {
            return Err(ModelError::InvalidParameter("horizon must be at least one epoch".into()));
        }
        if !(epoch_s > 0.0 && epoch_s.is_finite()) {
            return Err(ModelError::InvalidParameter(format!("invalid epoch length {epoch_s}")));
        }
        if robots.is_empty() {
            return Err(ModelError::InvalidParameter("fleet must have at least one robot".into()));
        }
        if move_costs.len() != grid.len() {
            return Err(ModelError::InvalidParameter(
                "move cost table does not match the grid".into(),
            ));
        }
        for (r, robot) in robots.iter().enumerate() {
            if !grid.contains(robot.start) {
                return Err(ModelError::InvalidStart {
                    robot: r,
                    reason: format!("{} is outside the grid", robot.start),
                });
            }
            if !grid.is_traversable(grid.index(robot.start)) {
                return Err(ModelError::InvalidStart {
                    robot: r,
                    reason: format!("{} is not traversable", robot.start),
                });
            }
            if robots[..r].iter().any(|o| o.start == robot.start) {
                return Err(ModelError::InvalidStart {
                    robot: r,
                    reason: format!("{} is shared with another robot", robot.start),
                });
            }
            if !(0.0..=profile.battery_capacity_j).contains(&robot.battery_init_j) {
                return Err(ModelError::InvalidStart {
                    robot: r,
                    reason: format!(
                        "initial battery {} J outside [0, {}]",
                        robot.battery_init_j, profile.battery_capacity_j
                    ),
                });
            }
        }
        let sense_j = (0..grid.len())
            .map(|i| (profile.p_sen_w + comm.p_tx(&grid, grid.cell(i))) * epoch_s)
            .collect();
        let baseline_j = profile.baseline_power_w() * epoch_s;
        let coverage_target = coverage_target(kappa, grid.len());
        Ok(Self {
            grid,
            profile,
            move_costs,
            comm,
            horizon,
            epoch_s,
            kappa,
            coverage_target,
            robots,
            sense_j,
            baseline_j,
        })
    }

    /// Same problem with full batteries and default starts for `fleet` robots.
    #[allow(clippy::too_many_arguments)]
    pub fn with_default_fleet(
        grid: CellGrid,
        profile: EnergyProfile,
        move_costs: MoveCostTable,
        comm: CommModel,
        kappa: f64,
        horizon: usize,
        epoch_s: f64,
        fleet: usize,
    ) -> Result<Self, ModelError> {
        let starts = default_starts(&grid, fleet)?;
        let robots = starts
            .into_iter()
            .map(|start| RobotSpec {
                start,
                battery_init_j: profile.battery_capacity_j,
            })
            .collect();
        Self::new(grid, profile, move_costs, comm, kappa, horizon, epoch_s, robots)
    }

    pub fn fleet(&self) -> usize {
        self.robots.len()
    }

    pub fn cells(&self) -> usize {
        self.grid.len()
    }

    pub fn battery_max_j(&self) -> f64 {
        self.profile.battery_capacity_j
    }

    /// Receive plus idle drain charged every epoch.
    pub fn baseline_j(&self) -> f64 {
        self.baseline_j
    }

    /// Sensing plus transmission charged on entering an unexplored cell.
    pub fn sense_j(&self, cell: usize) -> f64 {
        self.sense_j[cell]
    }

    pub fn start_index(&self, robot: usize) -> usize {
        self.grid.index(self.robots[robot].start)
    }

    /// Cheap necessary condition for reaching the coverage target, if violated.
    pub fn coverage_bound_violation(&self) -> Option<String> {
        let traversable = (0..self.cells()).filter(|&i| self.grid.is_traversable(i)).count();
        let reachable = (self.fleet() * self.horizon).min(traversable);
        (reachable < self.coverage_target).then(|| {
            format!(
                "coverage: at most {reachable} cells can be explored by {} robots in {} epochs, {} required",
                self.fleet(),
                self.horizon,
                self.coverage_target
            )
        })
    }

    /// Cheap necessary condition on batteries, if violated.
    pub fn battery_bound_violation(&self) -> Option<String> {
        self.robots.iter().enumerate().find_map(|(r, robot)| {
            let need = self.baseline_j * self.horizon as f64 + self.sense_j(self.start_index(r));
            (robot.battery_init_j < need).then(|| {
                format!(
                    "battery: robot {r} holds {:.3} J but idling for {} epochs needs {need:.3} J",
                    robot.battery_init_j, self.horizon
                )
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Add the valid inequality `d[t+1] <= d[t]`.
    pub canonicalize: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { canonicalize: true }
    }
}

/// A problem together with its explicit linear model.
#[derive(Debug, Clone)]
pub struct RpInstance {
    pub problem: RpProblem,
    pub model: LinearModel,
    pub vars: VarIndex,
}

/// Variable positions in [`LinearModel::vars`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarIndex {
    horizon: usize,
    cells: usize,
    fleet: usize,
    d0: usize,
    e0: usize,
    l0: usize,
    b0: usize,
    z0: usize,
    /// `(robot, epoch, from, to) -> var`, only for moves with positive energy.
    y: Vec<((usize, usize, usize, usize), usize)>,
}

impl VarIndex {
    pub fn d(&self, t: usize) -> usize {
        self.d0 + t - 1
    }
    pub fn e(&self, t: usize, c: usize) -> usize {
        self.e0 + (t - 1) * self.cells + c
    }
    pub fn l(&self, r: usize, t: usize, c: usize) -> usize {
        self.l0 + (r * self.horizon + t - 1) * self.cells + c
    }
    pub fn b(&self, r: usize, t: usize) -> usize {
        self.b0 + r * self.horizon + t - 1
    }
    /// Defined for `t >= 2`.
    pub fn z(&self, r: usize, t: usize, c: usize) -> usize {
        self.z0 + (r * (self.horizon - 1) + t - 2) * self.cells + c
    }
    pub fn y(&self, r: usize, t: usize, from: usize, to: usize) -> Option<usize> {
        self.y
            .binary_search_by(|(k, _)| k.cmp(&(r, t, from, to)))
            .ok()
            .map(|i| self.y[i].1)
    }
    pub fn y_entries(&self) -> impl Iterator<Item = ((usize, usize, usize, usize), usize)> + '_ {
        self.y.iter().copied()
    }
    pub fn fleet(&self) -> usize {
        self.fleet
    }
}

pub fn build_rp(problem: RpProblem) -> Result<RpInstance, ModelError> {
    build_rp_with(problem, BuildOptions::default())
}

pub fn build_rp_with(problem: RpProblem, opts: BuildOptions) -> Result<RpInstance, ModelError> {
    if let Some(why) = problem.coverage_bound_violation() {
        return Err(ModelError::ProvablyInfeasible(why));
    }
    let (model, vars) = linear::build(&problem, opts);
    Ok(RpInstance {
        problem,
        model,
        vars,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub horizon: usize,
    pub epoch_s: f64,
    pub fleet: usize,
    pub cells: usize,
    pub kappa: f64,
    pub coverage_target_cells: usize,
    pub binaries: usize,
    pub continuous: usize,
    pub rows: usize,
    pub rows_by_family: Vec<(ConstraintFamily, usize)>,
    pub l_vars: usize,
    pub e_vars: usize,
    pub d_vars: usize,
    pub y_vars: usize,
    pub z_vars: usize,
}

impl RpInstance {
    pub fn summary(&self) -> InstanceSummary {
        let p = &self.problem;
        let count = |prefix: char| {
            self.model
                .vars
                .iter()
                .filter(|v| v.name.starts_with(prefix) && v.name.as_bytes().get(1) == Some(&b'_'))
                .count()
        };
        let mut families: Vec<(ConstraintFamily, usize)> = Vec::new();
        for row in &self.model.rows {
            match families.iter_mut().find(|(f, _)| *f == row.family) {
                Some((_, n)) => *n += 1,
                None => families.push((row.family, 1)),
            }
        }
        InstanceSummary {
            horizon: p.horizon,
            epoch_s: p.epoch_s,
            fleet: p.fleet(),
            cells: p.cells(),
            kappa: p.kappa,
            coverage_target_cells: p.coverage_target,
            binaries: self.model.vars.iter().filter(|v| v.kind == VarKind::Binary).count(),
            continuous: self.model.vars.iter().filter(|v| v.kind == VarKind::Continuous).count(),
            rows: self.model.rows.len(),
            rows_by_family: families,
            l_vars: count('l'),
            e_vars: count('e'),
            d_vars: count('d'),
            y_vars: count('y'),
            z_vars: count('z'),
        }
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary()).expect("summary serializes")
    }

    /// Full variable assignment for integer paths and completion flags.
    ///
    /// `paths[r][t-1]` is robot `r`'s cell index at epoch `t`, `battery[r][t-1]`
    /// its level at the end of epoch `t`. Auxiliaries are set to the products
    /// they stand for.
    pub fn assignment(&self, paths: &[Vec<usize>], d: &[bool], battery: &[Vec<f64>]) -> Vec<f64> {
        let p = &self.problem;
        let v = &self.vars;
        let t_max = p.horizon;
        let mut x = vec![0.0; self.model.vars.len()];
        let mut explored = vec![vec![false; p.cells()]; t_max + 1];
        for t in 1..=t_max {
            explored[t] = explored[t - 1].clone();
            for path in paths {
                explored[t][path[t - 1]] = true;
            }
            for c in 0..p.cells() {
                x[v.e(t, c)] = explored[t][c] as u8 as f64;
            }
            x[v.d(t)] = d[t - 1] as u8 as f64;
        }
        for (r, path) in paths.iter().enumerate() {
            for t in 1..=t_max {
                x[v.l(r, t, path[t - 1])] = 1.0;
                x[v.b(r, t)] = battery[r][t - 1];
                if t >= 2 {
                    let here = path[t - 1];
                    x[v.z(r, t, here)] = (!explored[t - 1][here]) as u8 as f64;
                    if let Some(y) = v.y(r, t, path[t - 2], here) {
                        x[y] = 1.0;
                    }
                }
            }
        }
        x
    }
}
