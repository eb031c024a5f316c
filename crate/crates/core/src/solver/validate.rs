//! Direct recomputation of every constraint family for a candidate solution.

use serde::{Deserialize, Serialize};

use super::PlanSolution;
use crate::rp_model::{ConstraintFamily, RpProblem};

const BATTERY_TOL_J: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub family: ConstraintFamily,
    pub robot: Option<usize>,
    pub epoch: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Validation {
    Ok,
    Violations(Vec<Violation>),
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        matches!(self, Validation::Ok)
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            Validation::Ok => &[],
            Validation::Violations(v) => v,
        }
    }

    pub fn cites(&self, family: ConstraintFamily) -> bool {
        self.violations().iter().any(|v| v.family == family)
    }
}

struct Report(Vec<Violation>);

impl Report {
    fn push(&mut self, family: ConstraintFamily, robot: Option<usize>, epoch: Option<usize>, message: String) {
        self.0.push(Violation {
            family,
            robot,
            epoch,
            message,
        });
    }
}

/// Checks `sol` against `p`. Violations are returned as data.
pub fn validate(p: &RpProblem, sol: &PlanSolution) -> Validation {
    use ConstraintFamily as F;
    let mut rep = Report(Vec::new());
    let t_max = p.horizon;
    let fleet = p.fleet();
    let n = p.cells();

    if sol.paths.len() != fleet
        || sol.battery.len() != fleet
        || sol.d.len() != t_max
        || sol.explored.len() != t_max
        || sol.paths.iter().any(|x| x.len() != t_max)
        || sol.battery.iter().any(|x| x.len() != t_max)
    {
        rep.push(
            F::Shape,
            None,
            None,
            format!("expected {fleet} robots over {t_max} epochs"),
        );
        return Validation::Violations(rep.0);
    }

    // One place: every entry names exactly one grid cell.
    let mut idx = vec![vec![usize::MAX; t_max]; fleet];
    for r in 0..fleet {
        for t in 0..t_max {
            let c = sol.paths[r][t];
            if !p.grid.contains(c) || !p.grid.is_traversable(p.grid.index(c)) {
                rep.push(F::OnePlace, Some(r), Some(t + 1), format!("{c} is not a traversable cell"));
            } else {
                idx[r][t] = p.grid.index(c);
            }
        }
    }
    if !rep.0.is_empty() {
        return Validation::Violations(rep.0);
    }

    for r in 0..fleet {
        if idx[r][0] != p.start_index(r) {
            rep.push(
                F::StartFix,
                Some(r),
                Some(1),
                format!("starts at {} instead of {}", sol.paths[r][0], p.robots[r].start),
            );
        }
        for t in 1..t_max {
            if !p.grid.adjacent_or_same(idx[r][t - 1], idx[r][t]) {
                rep.push(
                    F::Neighborhood,
                    Some(r),
                    Some(t + 1),
                    format!("jumps from {} to {}", sol.paths[r][t - 1], sol.paths[r][t]),
                );
            }
        }
    }

    // Exploration: explored(t) must equal the cells visited up to t.
    let mut seen = vec![false; n];
    let mut counts = Vec::with_capacity(t_max);
    let mut prev_seen = Vec::with_capacity(t_max);
    for t in 0..t_max {
        prev_seen.push(seen.clone());
        for r in 0..fleet {
            seen[idx[r][t]] = true;
        }
        let claimed = &sol.explored[t];
        for (c, &visited) in seen.iter().enumerate() {
            let flag = claimed.contains(c);
            if flag && !visited {
                rep.push(F::ExploreUpper, None, Some(t + 1), format!("{} marked explored but never visited", p.grid.cell(c)));
            } else if !flag && visited {
                let family = if t > 0 && sol.explored[t - 1].contains(c) {
                    F::ExploreMonotone
                } else {
                    F::ExploreVisited
                };
                rep.push(family, None, Some(t + 1), format!("{} visited but not marked explored", p.grid.cell(c)));
            }
        }
        counts.push(seen.iter().filter(|&&s| s).count());
    }

    for t in 0..t_max {
        if !sol.d[t] && counts[t] < p.coverage_target {
            rep.push(
                F::CompletionFlag,
                None,
                Some(t + 1),
                format!("flag cleared with {} of {} cells explored", counts[t], p.coverage_target),
            );
        }
    }
    let flagged = sol.d.iter().filter(|&&x| x).count();
    if flagged != sol.objective {
        rep.push(
            F::CompletionFlag,
            None,
            None,
            format!("objective {} but {flagged} flags set", sol.objective),
        );
    }
    if counts[t_max - 1] < p.coverage_target {
        rep.push(
            F::FinalCoverage,
            None,
            Some(t_max),
            format!("{} of {} required cells explored", counts[t_max - 1], p.coverage_target),
        );
    }

    for r in 0..fleet {
        let mut level = p.robots[r].battery_init_j;
        for t in 0..t_max {
            let here = idx[r][t];
            level -= p.baseline_j();
            if t > 0 {
                if let Some(e) = p.move_costs.energy(idx[r][t - 1], here) {
                    level -= e;
                }
            }
            if !prev_seen[t][here] {
                level -= p.sense_j(here);
            }
            let claimed = sol.battery[r][t];
            if (claimed - level).abs() > BATTERY_TOL_J {
                rep.push(
                    F::BatteryUpdate,
                    Some(r),
                    Some(t + 1),
                    format!("battery {claimed} J, recursion gives {level} J"),
                );
            }
            if claimed < -BATTERY_TOL_J || claimed > p.battery_max_j() + BATTERY_TOL_J {
                rep.push(
                    F::Bounds,
                    Some(r),
                    Some(t + 1),
                    format!("battery {claimed} J outside [0, {}]", p.battery_max_j()),
                );
            }
            // keep following the claimed trace so one error is reported once
            level = claimed;
        }
    }

    if rep.0.is_empty() {
        Validation::Ok
    } else {
        Validation::Violations(rep.0)
    }
}
