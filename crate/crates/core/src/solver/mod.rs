//! Solvers for [`RpProblem`] and an independent constraint validator.

mod exact;
mod heuristic;
mod oracle;
mod validate;

pub use exact::{solve_exact, ExactLimits};
pub use heuristic::{solve_heuristic, solve_heuristic_with, HeuristicOptions};
pub use oracle::{brute_force_oracle, OracleError, ORACLE_SPACE_LIMIT};
pub use validate::{validate, Validation, Violation};

use std::io::Write;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::rp_model::RpProblem;
use crate::terrain::Cell;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    Timeout,
}

impl SolveStatus {
    pub fn has_plan(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Feasible)
    }
}

/// Solver output. Epoch `t` (1-based) is stored at index `t - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSolution {
    pub status: SolveStatus,
    /// Number of epochs with incomplete coverage.
    pub objective: usize,
    /// Proven lower bound on the objective.
    pub lower_bound: usize,
    pub d: Vec<bool>,
    pub paths: Vec<Vec<Cell>>,
    pub explored: Vec<FixedBitSet>,
    #[serde(rename = "battery_J")]
    pub battery: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub nodes: u64,
}

impl PlanSolution {
    pub fn infeasible(reason: impl Into<String>) -> Self {
        Self {
            status: SolveStatus::Infeasible,
            objective: 0,
            lower_bound: 0,
            d: Vec::new(),
            paths: Vec::new(),
            explored: Vec::new(),
            battery: Vec::new(),
            reason: Some(reason.into()),
            nodes: 0,
        }
    }

    /// Builds the full solution record for cell-index paths covering every epoch.
    pub(crate) fn from_paths(p: &RpProblem, paths: &[Vec<usize>], status: SolveStatus) -> Self {
        let t_max = p.horizon;
        let mut explored = Vec::with_capacity(t_max);
        let mut covered = FixedBitSet::with_capacity(p.cells());
        let mut battery: Vec<Vec<f64>> = vec![Vec::with_capacity(t_max); paths.len()];
        let mut level: Vec<f64> = p.robots.iter().map(|r| r.battery_init_j).collect();
        for t in 0..t_max {
            let before = covered.clone();
            for (r, path) in paths.iter().enumerate() {
                let here = path[t];
                let mut cost = p.baseline_j();
                if t > 0 {
                    cost += p.move_costs.energy(path[t - 1], here).unwrap_or(f64::NAN);
                }
                if !before.contains(here) {
                    cost += p.sense_j(here);
                }
                level[r] -= cost;
                battery[r].push(level[r]);
                covered.insert(here);
            }
            explored.push(covered.clone());
        }
        let d: Vec<bool> = explored
            .iter()
            .map(|e| e.count_ones(..) < p.coverage_target)
            .collect();
        let objective = d.iter().filter(|&&x| x).count();
        Self {
            status,
            objective,
            lower_bound: objective,
            d,
            paths: paths
                .iter()
                .map(|path| path.iter().map(|&c| p.grid.cell(c)).collect())
                .collect(),
            explored,
            battery,
            reason: None,
            nodes: 0,
        }
    }

    pub fn explored_count(&self, t: usize) -> usize {
        self.explored[t - 1].count_ones(..)
    }

    /// Path cell indices for `problem`'s grid.
    pub fn path_indices(&self, p: &RpProblem) -> Vec<Vec<usize>> {
        self.paths
            .iter()
            .map(|path| path.iter().map(|&c| p.grid.index(c)).collect())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }

    /// Per-epoch trace: `epoch,d,explored` then `rK_a,rK_b,rK_battery_J` per robot.
    pub fn write_trace_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["epoch".to_string(), "d".into(), "explored".into()];
        for r in 0..self.paths.len() {
            header.push(format!("r{r}_a"));
            header.push(format!("r{r}_b"));
            header.push(format!("r{r}_battery_J"));
        }
        w.write_record(&header)?;
        for t in 0..self.d.len() {
            let mut rec = vec![
                (t + 1).to_string(),
                (self.d[t] as u8).to_string(),
                self.explored[t].count_ones(..).to_string(),
            ];
            for (path, bat) in self.paths.iter().zip(&self.battery) {
                rec.push(path[t].a.to_string());
                rec.push(path[t].b.to_string());
                rec.push(bat[t].to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rp_model::tests::flat_problem;
    use crate::rp_model::ConstraintFamily;

    #[test]
    fn single_cell_is_done_at_once() {
        let p = flat_problem(1, 1, 1, 1.0, 1);
        let exact = solve_exact(&p, &ExactLimits::default());
        assert_eq!(exact.status, SolveStatus::Optimal);
        assert_eq!(exact.objective, 0);
        assert_eq!(solve_heuristic(&p, 0).objective, 0);
        assert_eq!(brute_force_oracle(&p).unwrap().objective, 0);
    }

    #[test]
    fn hamiltonian_path_on_3x3() {
        let p = flat_problem(3, 3, 1, 1.0, 9);
        let sol = solve_exact(&p, &ExactLimits::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.objective, 8);
        assert!(validate(&p, &sol).is_ok());

        let greedy = solve_heuristic(&p, 7);
        assert!(greedy.objective >= 8);
        assert!(validate(&p, &greedy).is_ok(), "{:?}", validate(&p, &greedy));
    }

    #[test]
    fn four_move_battery_is_infeasible() {
        let mut p = flat_problem(3, 3, 1, 1.0, 9);
        let step = p.move_costs.energy(0, 1).unwrap();
        let budget = 9.0 * p.baseline_j() + 5.0 * p.sense_j(0) + 4.0 * step + 1.0;
        p.robots[0].battery_init_j = budget;
        let sol = solve_exact(&p, &ExactLimits::default());
        assert_eq!(sol.status, SolveStatus::Infeasible);
        assert!(sol.reason.is_some());
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(brute_force_oracle(&flat_problem(2, 2, 1, 1.0, 4)).unwrap().objective, 3);
        let two = flat_problem(2, 2, 2, 1.0, 2);
        assert_eq!(two.robots[1].start, Cell::new(0, 1));
        let sol = brute_force_oracle(&two).unwrap();
        assert_eq!(sol.objective, 1);
        assert_eq!(solve_exact(&two, &ExactLimits::default()).objective, 1);
    }

    #[test]
    fn oracle_refuses_large_spaces() {
        let p = flat_problem(3, 3, 1, 1.0, 9);
        assert!(matches!(brute_force_oracle(&p), Err(OracleError::TooLarge { exponent: 8, .. })));
    }

    #[test]
    fn coverage_bound_names_itself() {
        let p = flat_problem(5, 5, 1, 0.75, 9);
        let sol = solve_exact(&p, &ExactLimits::default());
        assert_eq!(sol.status, SolveStatus::Infeasible);
        assert!(sol.reason.unwrap().starts_with("coverage"));
    }

    #[test]
    fn heuristic_covers_most_of_5x5() {
        let p = flat_problem(5, 5, 3, 0.75, 9);
        let sol = solve_heuristic(&p, 1);
        assert_eq!(sol.status, SolveStatus::Feasible);
        assert!(sol.explored_count(9) >= 19);
        assert!(validate(&p, &sol).is_ok());
    }

    #[test]
    fn node_cap_reports_timeout_with_bound() {
        let p = flat_problem(3, 3, 1, 1.0, 9);
        let limits = ExactLimits {
            node_cap: 3,
            warm_start: false,
            ..ExactLimits::default()
        };
        let sol = solve_exact(&p, &limits);
        assert_eq!(sol.status, SolveStatus::Timeout);
        assert!(sol.lower_bound <= 8);
    }

    #[test]
    fn exact_is_deterministic() {
        let p = flat_problem(3, 3, 2, 1.0, 5);
        let a = solve_exact(&p, &ExactLimits::default());
        let b = solve_exact(&p, &ExactLimits::default());
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn mutations_are_caught() {
        let p = flat_problem(2, 2, 1, 1.0, 4);
        let good = solve_exact(&p, &ExactLimits::default());
        assert!(validate(&p, &good).is_ok());

        let mut off = good.clone();
        off.battery[0][2] -= 1.0;
        assert!(validate(&p, &off).cites(ConstraintFamily::BatteryUpdate));

        let p3 = flat_problem(3, 3, 1, 1.0, 9);
        let mut jump = solve_exact(&p3, &ExactLimits::default());
        jump.paths[0][1] = Cell::new(2, 0);
        assert!(validate(&p3, &jump).cites(ConstraintFamily::Neighborhood));
    }

    #[test]
    fn trace_csv_has_one_row_per_epoch() {
        let p = flat_problem(2, 2, 1, 1.0, 4);
        let sol = solve_exact(&p, &ExactLimits::default());
        let mut buf = Vec::new();
        sol.write_trace_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("epoch,d,explored,r0_a,r0_b,r0_battery_J"));
    }
}
