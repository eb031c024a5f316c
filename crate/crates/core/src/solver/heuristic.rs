//! Greedy frontier heuristic.
//!
//! Each epoch, robots in turn take the adjacent unexplored, unclaimed cell
//! with the lowest move plus sensing energy (ties: direction order). A robot
//! with no such neighbor steps along a shortest path toward the nearest
//! unexplored cell. No move is taken that would leave less than the reserve
//! plus the baseline drain of the remaining epochs.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{PlanSolution, SolveStatus};
use crate::rp_model::RpProblem;
use crate::terrain::Direction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicOptions {
    /// Battery each robot keeps in hand at the end of the horizon.
    pub reserve_j: f64,
    /// Extra passes with seeded random robot orders; the best plan wins.
    pub restarts: usize,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        Self {
            reserve_j: 0.0,
            restarts: 0,
        }
    }
}

pub fn solve_heuristic(p: &RpProblem, seed: u64) -> PlanSolution {
    solve_heuristic_with(p, seed, &HeuristicOptions::default())
}

pub fn solve_heuristic_with(p: &RpProblem, seed: u64, opts: &HeuristicOptions) -> PlanSolution {
    if let Some(why) = p.coverage_bound_violation() {
        return PlanSolution::infeasible(why);
    }
    let mut order: Vec<usize> = (0..p.fleet()).collect();
    let mut best = greedy(p, &order, opts);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..opts.restarts {
        order.shuffle(&mut rng);
        let cand = greedy(p, &order, opts);
        let better = match (cand.status.has_plan(), best.status.has_plan()) {
            (true, false) => true,
            (true, true) => cand.objective < best.objective,
            _ => false,
        };
        if better {
            best = cand;
        }
    }
    best
}

fn greedy(p: &RpProblem, order: &[usize], opts: &HeuristicOptions) -> PlanSolution {
    let fleet = p.fleet();
    let horizon = p.horizon;
    let base = p.baseline_j();
    let mut paths: Vec<Vec<usize>> = (0..fleet).map(|r| vec![p.start_index(r)]).collect();
    let mut battery: Vec<f64> = (0..fleet)
        .map(|r| p.robots[r].battery_init_j - base - p.sense_j(p.start_index(r)))
        .collect();
    let reserve = |t: usize| opts.reserve_j + (horizon - t) as f64 * base;
    if (0..fleet).any(|r| battery[r] + 1e-9 < reserve(1)) {
        return PlanSolution::infeasible(format!(
            "battery: a robot cannot idle through {horizon} epochs with a {} J reserve",
            opts.reserve_j
        ));
    }
    let mut covered = FixedBitSet::with_capacity(p.cells());
    for path in &paths {
        covered.insert(path[0]);
    }

    for t in 2..=horizon {
        let done = covered.count_ones(..) >= p.coverage_target;
        let mut claimed = FixedBitSet::with_capacity(p.cells());
        let mut next = vec![0usize; fleet];
        for &r in order {
            let at = *paths[r].last().expect("path has a start");
            let afford = |to: usize, energy: f64| {
                let sense = if covered.contains(to) { 0.0 } else { p.sense_j(to) };
                let cost = base + energy + sense;
                (battery[r] - cost + 1e-9 >= reserve(t)).then_some(cost)
            };
            let mut pick: Option<(usize, f64)> = None;
            if !done {
                let mut best_score = f64::INFINITY;
                for (dir, edge) in p.grid.edges_from(at) {
                    if covered.contains(edge.to) || claimed.contains(edge.to) {
                        continue;
                    }
                    let energy = p.move_costs.get(at, dir).map_or(f64::NAN, |m| m.energy_j);
                    let score = energy + p.sense_j(edge.to);
                    if score < best_score {
                        if let Some(cost) = afford(edge.to, energy) {
                            best_score = score;
                            pick = Some((edge.to, cost));
                        }
                    }
                }
                if pick.is_none() {
                    if let Some(step) = frontier_step(p, at, &covered, &claimed) {
                        let energy = p.move_costs.energy(at, step).unwrap_or(f64::NAN);
                        pick = afford(step, energy).map(|c| (step, c));
                    }
                }
            }
            let (to, cost) = pick.unwrap_or((at, base));
            if !covered.contains(to) {
                claimed.insert(to);
            }
            battery[r] -= cost;
            next[r] = to;
        }
        for r in 0..fleet {
            paths[r].push(next[r]);
            covered.insert(next[r]);
        }
    }
    let reached = covered.count_ones(..) >= p.coverage_target;
    let status = if reached { SolveStatus::Feasible } else { SolveStatus::Infeasible };
    let mut sol = PlanSolution::from_paths(p, &paths, status);
    if !reached {
        sol.reason = Some(format!(
            "greedy plan explores {} of {} required cells",
            covered.count_ones(..),
            p.coverage_target
        ));
    }
    sol
}

/// First step of a shortest 8-connected path to the nearest unexplored,
/// unclaimed cell.
fn frontier_step(p: &RpProblem, from: usize, covered: &FixedBitSet, claimed: &FixedBitSet) -> Option<usize> {
    let n = p.cells();
    let mut first = vec![usize::MAX; n];
    let mut seen = FixedBitSet::with_capacity(n);
    let mut queue = VecDeque::new();
    seen.insert(from);
    for (_, edge) in p.grid.edges_from(from) {
        if !seen.contains(edge.to) {
            seen.insert(edge.to);
            first[edge.to] = edge.to;
            queue.push_back(edge.to);
        }
    }
    while let Some(c) = queue.pop_front() {
        if !covered.contains(c) && !claimed.contains(c) {
            return Some(first[c]);
        }
        for dir in Direction::MOVES {
            if let Some(edge) = p.grid.edge(c, dir) {
                if !seen.contains(edge.to) {
                    seen.insert(edge.to);
                    first[edge.to] = first[c];
                    queue.push_back(edge.to);
                }
            }
        }
    }
    None
}
