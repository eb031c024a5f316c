//! Depth-first branch and bound over joint robot moves, one epoch per level.
//!
//! The search minimizes the completion epoch: the first epoch whose explored
//! count reaches the target. After completion every robot stays put, which is
//! the cheapest continuation, so the objective equals `completion - 1`.
//!
//! Children are expanded robot by robot in the order stay, E, NE, N, NW, W,
//! SW, S, SE, robot 0 outermost. Pruning uses
//! * the coverage bound: each robot explores at most one new cell per epoch;
//! * the battery bound: every remaining epoch costs at least the baseline;
//! * dominance: a state with the same epoch, positions and explored set and
//!   no more battery for any robot than an earlier visited state is skipped.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;

use super::{solve_heuristic, PlanSolution, SolveStatus};
use crate::rp_model::RpProblem;
use crate::terrain::Direction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactLimits {
    pub time_s: f64,
    pub node_cap: u64,
    /// Maximum number of dominance entries kept.
    pub memo_cap: usize,
    /// Seed the incumbent with the greedy heuristic.
    pub warm_start: bool,
}

impl Default for ExactLimits {
    fn default() -> Self {
        Self {
            time_s: 600.0,
            node_cap: u64::MAX,
            memo_cap: 2_000_000,
            warm_start: true,
        }
    }
}

const EPS: f64 = 1e-9;

struct Search<'a> {
    p: &'a RpProblem,
    fleet: usize,
    target: usize,
    horizon: usize,
    base: f64,
    /// Best completion epoch found so far; `horizon + 1` when none.
    best: usize,
    best_paths: Option<Vec<Vec<usize>>>,
    stack: Vec<Vec<usize>>,
    memo: HashMap<Vec<u64>, Vec<Vec<f64>>>,
    memo_cap: usize,
    nodes: u64,
    node_cap: u64,
    deadline: Option<Instant>,
    aborted: bool,
}

#[derive(Clone, Copy)]
struct Choice {
    cell: usize,
    battery: f64,
}

impl<'a> Search<'a> {
    fn lower_bound(&self, t: usize, covered: usize) -> usize {
        if covered >= self.target {
            t
        } else {
            t + (self.target - covered).div_ceil(self.fleet)
        }
    }

    fn out_of_budget(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        self.nodes += 1;
        if self.nodes > self.node_cap {
            self.aborted = true;
        } else if self.nodes == 1 || self.nodes.is_multiple_of(1024) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.aborted = true;
                }
            }
        }
        self.aborted
    }

    fn dominated(&mut self, t: usize, positions: &[usize], covered: &FixedBitSet, battery: &[f64]) -> bool {
        let mut key = Vec::with_capacity(1 + positions.len() + covered.as_slice().len());
        key.push(t as u64);
        key.extend(positions.iter().map(|&c| c as u64));
        key.extend(covered.as_slice().iter().map(|&w| w as u64));
        if let Some(seen) = self.memo.get_mut(&key) {
            if seen
                .iter()
                .any(|s| s.iter().zip(battery).all(|(old, new)| old + EPS >= *new))
            {
                return true;
            }
            seen.retain(|s| !s.iter().zip(battery).all(|(old, new)| *new + EPS >= *old));
            seen.push(battery.to_vec());
        } else if self.memo.len() < self.memo_cap {
            self.memo.insert(key, vec![battery.to_vec()]);
        }
        false
    }

    /// Moves available to one robot entering epoch `t`.
    fn options(&self, t: usize, at: usize, battery: f64, covered: &FixedBitSet) -> Vec<Choice> {
        let reserve = (self.horizon - t) as f64 * self.base;
        let mut out = Vec::with_capacity(9);
        for dir in Direction::ALL {
            let to = match dir {
                Direction::Stay => at,
                _ => match self.p.grid.edge(at, dir) {
                    Some(e) => e.to,
                    None => continue,
                },
            };
            let Some(mv) = self.p.move_costs.get(at, dir) else { continue };
            let mut cost = self.base + mv.energy_j;
            if !covered.contains(to) {
                cost += self.p.sense_j(to);
            }
            let left = battery - cost;
            if left + EPS >= reserve {
                out.push(Choice { cell: to, battery: left });
            }
        }
        out
    }

    fn expand(&mut self, t: usize, positions: &[usize], covered: &FixedBitSet, count: usize, battery: &[f64]) {
        if self.out_of_budget() {
            return;
        }
        let next = t + 1;
        if next > self.horizon {
            return;
        }
        let options: Vec<Vec<Choice>> = (0..self.fleet)
            .map(|r| self.options(next, positions[r], battery[r], covered))
            .collect();
        if options.iter().any(|o| o.is_empty()) {
            return;
        }
        let mut picked: Vec<Choice> = Vec::with_capacity(self.fleet);
        let mut fresh = covered.clone();
        self.combine(next, &options, &mut picked, &mut fresh, count);
    }

    fn combine(
        &mut self,
        t: usize,
        options: &[Vec<Choice>],
        picked: &mut Vec<Choice>,
        fresh: &mut FixedBitSet,
        count: usize,
    ) {
        let r = picked.len();
        if r == self.fleet {
            self.child(t, picked, fresh, count);
            return;
        }
        for i in 0..options[r].len() {
            if self.aborted {
                return;
            }
            let choice = options[r][i];
            let new_cell = !fresh.contains(choice.cell);
            let added = count + new_cell as usize;
            let optimistic = added + (self.fleet - r - 1);
            if self.lower_bound(t, optimistic) >= self.best {
                continue;
            }
            if new_cell {
                fresh.insert(choice.cell);
            }
            picked.push(choice);
            self.combine(t, options, picked, fresh, added);
            picked.pop();
            if new_cell {
                fresh.set(choice.cell, false);
            }
        }
    }

    fn child(&mut self, t: usize, picked: &[Choice], covered: &FixedBitSet, count: usize) {
        let positions: Vec<usize> = picked.iter().map(|c| c.cell).collect();
        let battery: Vec<f64> = picked.iter().map(|c| c.battery).collect();
        if count >= self.target {
            if t < self.best {
                self.best = t;
                let mut paths = self.stack.clone();
                for (path, &cell) in paths.iter_mut().zip(&positions) {
                    path.push(cell);
                    path.resize(self.horizon, cell);
                }
                self.best_paths = Some(paths);
            }
            return;
        }
        if self.lower_bound(t, count) >= self.best {
            return;
        }
        if self.dominated(t, &positions, covered, &battery) {
            return;
        }
        for (path, &cell) in self.stack.iter_mut().zip(&positions) {
            path.push(cell);
        }
        self.expand(t, &positions, covered, count, &battery);
        for path in self.stack.iter_mut() {
            path.pop();
        }
    }
}

/// Exact minimum of the completion objective, or the best incumbent with a
/// valid lower bound when the limits stop the search.
pub fn solve_exact(p: &RpProblem, limits: &ExactLimits) -> PlanSolution {
    if let Some(why) = p.coverage_bound_violation() {
        return PlanSolution::infeasible(why);
    }
    if let Some(why) = p.battery_bound_violation() {
        return PlanSolution::infeasible(why);
    }
    let fleet = p.fleet();
    let horizon = p.horizon;
    let base = p.baseline_j();
    let starts: Vec<usize> = (0..fleet).map(|r| p.start_index(r)).collect();
    let mut covered = FixedBitSet::with_capacity(p.cells());
    let battery: Vec<f64> = (0..fleet)
        .map(|r| p.robots[r].battery_init_j - base - p.sense_j(starts[r]))
        .collect();
    for &s in &starts {
        covered.insert(s);
    }
    let count = covered.count_ones(..);

    let mut search = Search {
        p,
        fleet,
        target: p.coverage_target,
        horizon,
        base,
        best: horizon + 1,
        best_paths: None,
        stack: starts.iter().map(|&s| vec![s]).collect(),
        memo: HashMap::new(),
        memo_cap: limits.memo_cap,
        nodes: 0,
        node_cap: limits.node_cap,
        deadline: (limits.time_s.is_finite() && limits.time_s >= 0.0)
            .then(|| Instant::now() + Duration::from_secs_f64(limits.time_s)),
        aborted: false,
    };
    let root_bound = search.lower_bound(1, count);

    if count >= search.target {
        let paths: Vec<Vec<usize>> = starts.iter().map(|&s| vec![s; horizon]).collect();
        return PlanSolution::from_paths(p, &paths, SolveStatus::Optimal);
    }
    if limits.warm_start {
        let warm = solve_heuristic(p, 0);
        if warm.status.has_plan() && warm.objective + 1 < search.best {
            search.best = warm.objective + 1;
            search.best_paths = Some(warm.path_indices(p));
        }
    }
    if root_bound < search.best {
        search.expand(1, &starts, &covered, count, &battery);
    }

    let nodes = search.nodes;
    let aborted = search.aborted;
    match search.best_paths {
        Some(paths) => {
            let status = if aborted { SolveStatus::Timeout } else { SolveStatus::Optimal };
            let mut sol = PlanSolution::from_paths(p, &paths, status);
            sol.lower_bound = if aborted { root_bound - 1 } else { sol.objective };
            sol.nodes = nodes;
            sol
        }
        None if aborted => {
            let mut sol = PlanSolution::infeasible("search limit reached before any plan was found");
            sol.status = SolveStatus::Timeout;
            sol.lower_bound = root_bound - 1;
            sol.nodes = nodes;
            sol
        }
        None => {
            let mut sol = PlanSolution::infeasible(format!(
                "search exhausted: no joint paths reach {} explored cells within {} epochs on the available battery",
                p.coverage_target, horizon
            ));
            sol.nodes = nodes;
            sol
        }
    }
}
