//! Discrete-time replay of a mission plan.
//!
//! Each robot walks its planned cell sequence. A move takes as many epochs as
//! its slope-limited transit time needs; the motion energy and any
//! first-visit sensing are charged in the arrival epoch, and the baseline
//! receive plus idle drain is charged in every epoch the robot is active. A
//! robot whose battery cannot pay a charge is drained to zero and halts for
//! good; cells it explored earlier stay explored.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{move_energy, CommModel, EnergyError, EnergyProfile, RobotKind};
use crate::planner::MissionPlan;
use crate::terrain::{Cell, CellGrid};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("robot {robot}, epoch {epoch}: {message}")]
    PathMismatch {
        robot: usize,
        epoch: usize,
        message: String,
    },
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Slope-dependent speed limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedConfig {
    /// Downhill speed gain per unit `sin|theta|`; 0 disables overshoot.
    pub gamma: f64,
    /// Downhill speed ceiling as a multiple of `v_max`.
    pub overshoot_cap_factor: f64,
}

impl Default for SpeedConfig {
    fn default() -> Self {
        Self {
            gamma: 0.25,
            overshoot_cap_factor: 1.5,
        }
    }
}

/// Travel speed on an edge of the given slope.
///
/// Uphill wheeled robots are limited by the motor power cap against rolling
/// resistance plus gravity; downhill any robot may overshoot `v_max`.
pub fn effective_speed(profile: &EnergyProfile, slope_deg: f64, cfg: &SpeedConfig) -> Result<f64, EnergyError> {
    if !(slope_deg.abs() < 90.0) {
        return Err(EnergyError::SlopeOutOfRange(slope_deg));
    }
    let v_max = profile.v_max;
    if slope_deg > 0.0 {
        if profile.kind != RobotKind::Wheeled {
            return Ok(v_max);
        }
        let Some(cap) = profile.motor_power_cap_w else { return Ok(v_max) };
        let theta = slope_deg.to_radians();
        let mu = profile.mu.unwrap_or(0.0);
        let force = profile.mass_kg * profile.gravity * (mu * theta.cos() + theta.sin());
        if force <= 0.0 {
            return Ok(v_max);
        }
        Ok(v_max.min(cap / force))
    } else if slope_deg < 0.0 {
        let theta = slope_deg.abs().to_radians();
        let boosted = v_max * (1.0 + cfg.gamma * theta.sin());
        Ok(boosted.min(cfg.overshoot_cap_factor * v_max))
    } else {
        Ok(v_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub epoch_s: f64,
    pub speed: SpeedConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotStep {
    pub cell: Cell,
    pub speed_mps: f64,
    pub elevation_m: f64,
    #[serde(rename = "battery_J")]
    pub battery_j: f64,
    #[serde(rename = "motion_energy_J_cum")]
    pub motion_energy_j_cum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    #[serde(rename = "energy_J")]
    pub energy_j: Vec<f64>,
    #[serde(rename = "motion_energy_J")]
    pub motion_energy_j: Vec<f64>,
    pub completion_epoch: Option<usize>,
    pub depleted_robots: usize,
    pub depleted: Vec<bool>,
}

/// Simulation output. Index 0 of every per-epoch series is the initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionReport {
    pub epoch_s: f64,
    pub coverage_target_cells: usize,
    pub explored_pct: Vec<f64>,
    /// `steps[r][e]`: robot `r` at the end of epoch `e`.
    pub steps: Vec<Vec<RobotStep>>,
    pub totals: Totals,
}

impl MissionReport {
    pub fn epochs(&self) -> usize {
        self.explored_pct.len() - 1
    }

    pub fn total_energy_j(&self) -> f64 {
        self.totals.energy_j.iter().sum()
    }

    pub fn total_motion_energy_j(&self) -> f64 {
        self.totals.motion_energy_j.iter().sum()
    }

    pub fn battery_trace(&self, robot: usize) -> Vec<f64> {
        self.steps[robot].iter().skip(1).map(|s| s.battery_j).collect()
    }

    /// `epoch,explored_pct` then `rK_a,rK_b,rK_speed_mps,rK_elevation_m,rK_battery_J,rK_motion_J_cum`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["epoch".to_string(), "explored_pct".to_string()];
        for r in 0..self.steps.len() {
            for col in ["a", "b", "speed_mps", "elevation_m", "battery_J", "motion_J_cum"] {
                header.push(format!("r{r}_{col}"));
            }
        }
        w.write_record(&header)?;
        for e in 0..self.explored_pct.len() {
            let mut rec = vec![e.to_string(), self.explored_pct[e].to_string()];
            for robot in &self.steps {
                let s = &robot[e];
                rec.extend([
                    s.cell.a.to_string(),
                    s.cell.b.to_string(),
                    s.speed_mps.to_string(),
                    s.elevation_m.to_string(),
                    s.battery_j.to_string(),
                    s.motion_energy_j_cum.to_string(),
                ]);
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn summary_json(&self) -> String {
        #[derive(Serialize)]
        struct Summary<'a> {
            epochs: usize,
            epoch_s: f64,
            final_explored_pct: f64,
            #[serde(rename = "total_energy_J")]
            total_energy_j: f64,
            totals: &'a Totals,
        }
        serde_json::to_string_pretty(&Summary {
            epochs: self.epochs(),
            epoch_s: self.epoch_s,
            final_explored_pct: *self.explored_pct.last().unwrap_or(&0.0),
            total_energy_j: self.total_energy_j(),
            totals: &self.totals,
        })
        .expect("summary serializes")
    }
}

pub fn simulate(
    plan: &MissionPlan,
    grid: &CellGrid,
    profile: &EnergyProfile,
    comm: &CommModel,
    config: &SimConfig,
) -> Result<MissionReport, SimError> {
    simulate_paths(
        &plan.paths,
        &plan.battery_init_j,
        plan.coverage_target_cells,
        grid,
        profile,
        comm,
        config,
    )
}

enum Phase {
    Idle,
    Transit {
        to: usize,
        remaining: usize,
        speed: f64,
        energy: f64,
    },
    Finished,
    Depleted,
}

struct Robot {
    at: usize,
    next_waypoint: usize,
    phase: Phase,
    battery: f64,
    drawn: f64,
    motion: f64,
}

impl Robot {
    /// Draws `amount`; drains to zero and halts if it cannot be paid.
    fn charge(&mut self, amount: f64) -> bool {
        if amount > self.battery + 1e-9 {
            self.drawn += self.battery;
            self.battery = 0.0;
            self.phase = Phase::Depleted;
            false
        } else {
            self.battery -= amount;
            self.drawn += amount;
            true
        }
    }
}

/// Replays per-robot waypoint lists; `paths[r][0]` is the start cell.
pub fn simulate_paths(
    paths: &[Vec<Cell>],
    battery_init_j: &[f64],
    coverage_target_cells: usize,
    grid: &CellGrid,
    profile: &EnergyProfile,
    comm: &CommModel,
    config: &SimConfig,
) -> Result<MissionReport, SimError> {
    if !(config.epoch_s > 0.0 && config.epoch_s.is_finite()) {
        return Err(SimError::Config(format!("invalid epoch length {}", config.epoch_s)));
    }
    if battery_init_j.len() != paths.len() {
        return Err(SimError::Config(format!(
            "{} initial batteries for {} robots",
            battery_init_j.len(),
            paths.len()
        )));
    }
    let mut idx: Vec<Vec<usize>> = Vec::with_capacity(paths.len());
    for (r, path) in paths.iter().enumerate() {
        let mut row = Vec::with_capacity(path.len());
        for (k, &c) in path.iter().enumerate() {
            let mismatch = |message: String| SimError::PathMismatch {
                robot: r,
                epoch: k + 1,
                message,
            };
            if !grid.contains(c) || !grid.is_traversable(grid.index(c)) {
                return Err(mismatch(format!("{c} is not a traversable grid cell")));
            }
            let i = grid.index(c);
            if let Some(&prev) = row.last() {
                if !grid.adjacent_or_same(prev, i) {
                    return Err(mismatch(format!("{} and {c} are not neighbors", grid.cell(prev))));
                }
            }
            row.push(i);
        }
        idx.push(row);
    }

    let base = profile.baseline_power_w() * config.epoch_s;
    let sense: Vec<f64> = (0..grid.len())
        .map(|i| (profile.p_sen_w + comm.p_tx(grid, grid.cell(i))) * config.epoch_s)
        .collect();
    let n = grid.len();
    let mut explored = vec![false; n];
    let mut explored_count = 0usize;
    let mut robots: Vec<Robot> = idx
        .iter()
        .zip(battery_init_j)
        .map(|(path, &b)| Robot {
            at: path.first().copied().unwrap_or(0),
            next_waypoint: 0,
            phase: if path.is_empty() { Phase::Finished } else { Phase::Idle },
            battery: b,
            drawn: 0.0,
            motion: 0.0,
        })
        .collect();

    let snapshot = |r: &Robot, speed: f64| RobotStep {
        cell: grid.cell(r.at),
        speed_mps: speed,
        elevation_m: grid.height(r.at),
        battery_j: r.battery,
        motion_energy_j_cum: r.motion,
    };
    let mut steps: Vec<Vec<RobotStep>> = robots.iter().map(|r| vec![snapshot(r, 0.0)]).collect();
    let mut explored_pct = vec![0.0];
    let mut completion = None;

    let active = |robots: &[Robot]| {
        robots
            .iter()
            .any(|r| !matches!(r.phase, Phase::Finished | Phase::Depleted))
    };
    let mut epoch = 0;
    while active(&robots) {
        epoch += 1;
        let before = explored.clone();
        let mut arrivals = Vec::new();
        for (r, robot) in robots.iter_mut().enumerate() {
            let mut speed = 0.0;
            match robot.phase {
                Phase::Finished | Phase::Depleted => {}
                Phase::Transit { to, remaining, speed: v, energy } => {
                    speed = v;
                    if remaining > 1 {
                        robot.phase = Phase::Transit { to, remaining: remaining - 1, speed: v, energy };
                        robot.charge(base);
                    } else {
                        let fresh = if before[to] { 0.0 } else { sense[to] };
                        if robot.charge(base + energy + fresh) {
                            robot.at = to;
                            robot.motion += energy;
                            robot.phase = Phase::Idle;
                            arrivals.push(to);
                        }
                    }
                }
                Phase::Idle => {
                    let path = &idx[r];
                    let k = robot.next_waypoint;
                    if k >= path.len() {
                        robot.phase = Phase::Finished;
                    } else if k == 0 {
                        let here = path[0];
                        let fresh = if before[here] { 0.0 } else { sense[here] };
                        robot.next_waypoint = 1;
                        if robot.charge(base + fresh) {
                            arrivals.push(here);
                        }
                    } else if path[k] == robot.at {
                        robot.next_waypoint += 1;
                        robot.charge(base);
                    } else {
                        let to = path[k];
                        let edge = grid
                            .edge_between(robot.at, to)
                            .expect("adjacency checked above");
                        let v = effective_speed(profile, edge.slope_deg, &config.speed)?;
                        let energy = move_energy(profile, edge.slope_deg, edge.distance_m)?;
                        let transit = edge.distance_m / v;
                        let epochs = ((transit / config.epoch_s) - 1e-9).ceil().max(1.0) as usize;
                        robot.next_waypoint += 1;
                        speed = v;
                        if epochs == 1 {
                            let fresh = if before[to] { 0.0 } else { sense[to] };
                            if robot.charge(base + energy + fresh) {
                                robot.at = to;
                                robot.motion += energy;
                                arrivals.push(to);
                            }
                        } else {
                            robot.phase = Phase::Transit {
                                to,
                                remaining: epochs - 1,
                                speed: v,
                                energy,
                            };
                            robot.charge(base);
                        }
                    }
                }
            }
            if matches!(robot.phase, Phase::Idle) && robot.next_waypoint >= idx[r].len() {
                robot.phase = Phase::Finished;
            }
            if matches!(robot.phase, Phase::Depleted) {
                speed = 0.0;
            }
            steps[r].push(snapshot(robot, speed));
        }
        for c in arrivals {
            if !explored[c] {
                explored[c] = true;
                explored_count += 1;
            }
        }
        if completion.is_none() && coverage_target_cells > 0 && explored_count >= coverage_target_cells {
            completion = Some(epoch);
        }
        explored_pct.push(100.0 * explored_count as f64 / n as f64);
    }
    let depleted: Vec<bool> = robots.iter().map(|r| matches!(r.phase, Phase::Depleted)).collect();
    Ok(MissionReport {
        epoch_s: config.epoch_s,
        coverage_target_cells,
        explored_pct,
        steps,
        totals: Totals {
            energy_j: robots.iter().map(|r| r.drawn).collect(),
            motion_energy_j: robots.iter().map(|r| r.motion).collect(),
            completion_epoch: completion,
            depleted_robots: depleted.iter().filter(|&&d| d).count(),
            depleted,
        },
    })
}
