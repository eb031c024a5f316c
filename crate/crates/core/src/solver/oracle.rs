//! Exhaustive enumeration of joint move sequences, for cross-checking.

use thiserror::Error;

use super::{PlanSolution, SolveStatus};
use crate::rp_model::RpProblem;
use crate::terrain::Direction;

/// Largest joint path space the oracle will enumerate.
pub const ORACLE_SPACE_LIMIT: f64 = 1e7;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("joint path space 9^{exponent} = {size:.3e} exceeds the oracle limit")]
    TooLarge { exponent: usize, size: f64 },
}

struct Enum<'a> {
    p: &'a RpProblem,
    fleet: usize,
    /// `seq[k]` for step `k = (t - 2) * fleet + r`.
    seq: Vec<usize>,
    best: Option<(usize, Vec<usize>)>,
    leaves: u64,
}

impl Enum<'_> {
    fn cell_at(&self, r: usize, t: usize) -> usize {
        if t == 1 {
            self.p.start_index(r)
        } else {
            self.seq[(t - 2) * self.fleet + r]
        }
    }

    fn go(&mut self) {
        let steps = self.fleet * (self.p.horizon - 1);
        let k = self.seq.len();
        if k == steps {
            self.leaves += 1;
            self.score();
            return;
        }
        let r = k % self.fleet;
        let t = k / self.fleet + 2;
        let from = self.cell_at(r, t - 1);
        let here = self.p.grid.cell(from);
        for dir in Direction::ALL {
            let Some(to) = self.p.grid.step(here, dir) else { continue };
            let to = self.p.grid.index(to);
            if !self.p.grid.adjacent_or_same(from, to) {
                continue;
            }
            self.seq.push(to);
            self.go();
            self.seq.pop();
        }
    }

    /// Replays the complete sequence and records it if strictly better.
    fn score(&mut self) {
        let p = self.p;
        let mut seen = vec![false; p.cells()];
        let mut battery: Vec<f64> = p.robots.iter().map(|r| r.battery_init_j).collect();
        let mut completion = None;
        for t in 1..=p.horizon {
            let prev = seen.clone();
            for r in 0..self.fleet {
                let here = self.cell_at(r, t);
                let mut spend = p.baseline_j();
                if t > 1 {
                    let from = self.cell_at(r, t - 1);
                    spend += p.move_costs.energy(from, here).expect("adjacent move");
                }
                if !prev[here] {
                    spend += p.sense_j(here);
                }
                battery[r] -= spend;
                if battery[r] < -1e-9 {
                    return;
                }
                seen[here] = true;
            }
            let explored = seen.iter().filter(|&&s| s).count();
            if completion.is_none() && explored >= p.coverage_target {
                completion = Some(t);
            }
        }
        let Some(done) = completion else { return };
        let objective = done - 1;
        if self.best.as_ref().is_none_or(|(b, _)| objective < *b) {
            self.best = Some((objective, self.seq.clone()));
        }
    }
}

/// True optimum by enumerating every joint move sequence.
pub fn brute_force_oracle(p: &RpProblem) -> Result<PlanSolution, OracleError> {
    let exponent = p.fleet() * (p.horizon - 1);
    let size = 9f64.powi(exponent as i32);
    if size > ORACLE_SPACE_LIMIT {
        return Err(OracleError::TooLarge { exponent, size });
    }
    let mut e = Enum {
        p,
        fleet: p.fleet(),
        seq: Vec::with_capacity(exponent),
        best: None,
        leaves: 0,
    };
    e.go();
    let leaves = e.leaves;
    Ok(match e.best.take() {
        Some((_, seq)) => {
            e.seq = seq;
            let paths: Vec<Vec<usize>> = (0..e.fleet)
                .map(|r| (1..=p.horizon).map(|t| e.cell_at(r, t)).collect())
                .collect();
            let mut sol = PlanSolution::from_paths(p, &paths, SolveStatus::Optimal);
            sol.nodes = leaves;
            sol
        }
        None => {
            let mut sol = PlanSolution::infeasible("no enumerated joint path meets coverage and battery");
            sol.nodes = leaves;
            sol
        }
    })
}
