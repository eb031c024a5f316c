use serde::{Deserialize, Serialize};

use super::{BuildOptions, RpProblem, VarIndex};
use crate::terrain::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// Constraint families of the coverage model; the validator reports
/// violations with the same tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintFamily {
    /// Explored cells at the final epoch reach the coverage target.
    FinalCoverage,
    /// Each robot occupies exactly one cell per epoch.
    OnePlace,
    /// Robots move only to an 8-neighbor or stay.
    Neighborhood,
    /// A cell is explored only if visited now or explored before.
    ExploreUpper,
    /// Explored cells stay explored.
    ExploreMonotone,
    /// A visited cell is explored.
    ExploreVisited,
    /// The completion flag may drop to 0 only once coverage is reached.
    CompletionFlag,
    /// Battery recursion.
    BatteryUpdate,
    /// Move-product auxiliaries.
    MoveProduct,
    /// First-visit auxiliaries.
    SenseProduct,
    /// `d[t+1] <= d[t]`.
    Canonical,
    /// Robots begin at their start cells, which count as explored.
    StartFix,
    /// Variable bounds, including battery limits.
    Bounds,
    /// Solution shape does not match the instance.
    Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub family: ConstraintFamily,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * x[v]).sum()
    }

    pub fn is_satisfied(&self, x: &[f64], tol: f64) -> bool {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => lhs <= self.rhs + tol,
            Sense::Ge => lhs >= self.rhs - tol,
            Sense::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
    /// Minimized.
    pub objective: Vec<(usize, f64)>,
}

impl LinearModel {
    fn add_var(&mut self, name: String, kind: VarKind, lower: f64, upper: f64) -> usize {
        self.vars.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        self.vars.len() - 1
    }

    fn add_row(
        &mut self,
        name: String,
        family: ConstraintFamily,
        terms: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) {
        self.rows.push(Row {
            name,
            family,
            terms,
            sense,
            rhs,
        });
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * x[v]).sum()
    }

    /// Rows violated by `x`, plus a pseudo-row per out-of-bounds or fractional
    /// binary variable.
    pub fn violations(&self, x: &[f64], tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (var, &val) in self.vars.iter().zip(x) {
            if val < var.lower - tol || val > var.upper + tol {
                out.push(format!("{} = {val} outside [{}, {}]", var.name, var.lower, var.upper));
            }
            if var.kind == VarKind::Binary && val != 0.0 && val != 1.0 {
                out.push(format!("{} = {val} is not binary", var.name));
            }
        }
        for row in &self.rows {
            if !row.is_satisfied(x, tol) {
                out.push(format!(
                    "{} ({:?}): activity {} vs {:?} {}",
                    row.name,
                    row.family,
                    row.activity(x),
                    row.sense,
                    row.rhs
                ));
            }
        }
        out
    }
}

pub(super) fn build(p: &RpProblem, opts: BuildOptions) -> (LinearModel, VarIndex) {
    let t_max = p.horizon;
    let cells = p.cells();
    let fleet = p.fleet();
    let grid = &p.grid;
    let name = |c: usize| {
        let cell = grid.cell(c);
        format!("{}_{}", cell.a, cell.b)
    };
    let mut m = LinearModel::default();

    let d0 = m.vars.len();
    for t in 1..=t_max {
        m.add_var(format!("d_{t}"), VarKind::Binary, 0.0, 1.0);
    }
    let e0 = m.vars.len();
    for t in 1..=t_max {
        for c in 0..cells {
            m.add_var(format!("e_{t}_{}", name(c)), VarKind::Binary, 0.0, 1.0);
        }
    }
    let l0 = m.vars.len();
    for r in 0..fleet {
        for t in 1..=t_max {
            for c in 0..cells {
                let ub = if grid.is_traversable(c) { 1.0 } else { 0.0 };
                m.add_var(format!("l_{r}_{t}_{}", name(c)), VarKind::Binary, 0.0, ub);
            }
        }
    }
    let b0 = m.vars.len();
    for r in 0..fleet {
        for t in 1..=t_max {
            m.add_var(format!("b_{r}_{t}"), VarKind::Continuous, 0.0, p.battery_max_j());
        }
    }
    let z0 = m.vars.len();
    for r in 0..fleet {
        for t in 2..=t_max {
            for c in 0..cells {
                m.add_var(format!("z_{r}_{t}_{}", name(c)), VarKind::Binary, 0.0, 1.0);
            }
        }
    }
    let mut y = Vec::new();
    for r in 0..fleet {
        for t in 2..=t_max {
            for from in 0..cells {
                for (_, edge) in grid.edges_from(from) {
                    let energy = p.move_costs.energy(from, edge.to).unwrap_or(0.0);
                    if energy > 0.0 {
                        let v = m.add_var(
                            format!("y_{r}_{t}_{}_{}", name(from), name(edge.to)),
                            VarKind::Binary,
                            0.0,
                            1.0,
                        );
                        y.push(((r, t, from, edge.to), v));
                    }
                }
            }
        }
    }
    y.sort_unstable();
    let vars = VarIndex {
        horizon: t_max,
        cells,
        fleet,
        d0,
        e0,
        l0,
        b0,
        z0,
        y,
    };
    let v = &vars;

    m.objective = (1..=t_max).map(|t| (v.d(t), 1.0)).collect();

    use ConstraintFamily as F;
    let target = p.coverage_target as f64;

    m.add_row(
        "cover_final".into(),
        F::FinalCoverage,
        (0..cells).map(|c| (v.e(t_max, c), 1.0)).collect(),
        Sense::Ge,
        target,
    );
    for r in 0..fleet {
        for t in 1..=t_max {
            m.add_row(
                format!("one_place_{r}_{t}"),
                F::OnePlace,
                (0..cells).map(|c| (v.l(r, t, c), 1.0)).collect(),
                Sense::Eq,
                1.0,
            );
        }
    }
    for r in 0..fleet {
        for t in 1..t_max {
            for c in 0..cells {
                let here = grid.cell(c);
                let mut terms = vec![(v.l(r, t + 1, c), 1.0)];
                for dir in Direction::ALL {
                    if let Some(n) = grid.step(here, dir) {
                        terms.push((v.l(r, t, grid.index(n)), -1.0));
                    }
                }
                m.add_row(format!("nbr_{r}_{t}_{}", name(c)), F::Neighborhood, terms, Sense::Le, 0.0);
            }
        }
    }
    for t in 1..=t_max {
        for c in 0..cells {
            let mut terms = vec![(v.e(t, c), 1.0)];
            if t > 1 {
                terms.push((v.e(t - 1, c), -1.0));
            }
            terms.extend((0..fleet).map(|r| (v.l(r, t, c), -1.0)));
            m.add_row(format!("explore_up_{t}_{}", name(c)), F::ExploreUpper, terms, Sense::Le, 0.0);
        }
    }
    for t in 2..=t_max {
        for c in 0..cells {
            m.add_row(
                format!("explore_mono_{t}_{}", name(c)),
                F::ExploreMonotone,
                vec![(v.e(t, c), 1.0), (v.e(t - 1, c), -1.0)],
                Sense::Ge,
                0.0,
            );
        }
    }
    for t in 1..=t_max {
        for c in 0..cells {
            let mut terms = vec![(v.e(t, c), fleet as f64)];
            terms.extend((0..fleet).map(|r| (v.l(r, t, c), -1.0)));
            m.add_row(format!("explore_seen_{t}_{}", name(c)), F::ExploreVisited, terms, Sense::Ge, 0.0);
        }
    }
    for t in 1..=t_max {
        let mut terms: Vec<(usize, f64)> = (0..cells).map(|c| (v.e(t, c), 1.0)).collect();
        terms.push((v.d(t), target));
        m.add_row(format!("done_{t}"), F::CompletionFlag, terms, Sense::Ge, target);
    }

    let base = p.baseline_j();
    for (r, robot) in p.robots.iter().enumerate() {
        let mut terms = vec![(v.b(r, 1), 1.0)];
        terms.extend((0..cells).map(|c| (v.l(r, 1, c), p.sense_j(c))));
        m.add_row(
            format!("battery_{r}_1"),
            F::BatteryUpdate,
            terms,
            Sense::Eq,
            robot.battery_init_j - base,
        );
        for t in 2..=t_max {
            let mut terms = vec![(v.b(r, t), 1.0), (v.b(r, t - 1), -1.0)];
            for from in 0..cells {
                for (_, edge) in grid.edges_from(from) {
                    if let Some(yv) = v.y(r, t, from, edge.to) {
                        terms.push((yv, p.move_costs.energy(from, edge.to).unwrap_or(0.0)));
                    }
                }
            }
            terms.extend((0..cells).map(|c| (v.z(r, t, c), p.sense_j(c))));
            m.add_row(format!("battery_{r}_{t}"), F::BatteryUpdate, terms, Sense::Eq, -base);
        }
    }

    for ((r, t, from, to), yv) in v.y.iter().copied() {
        let tag = format!("{r}_{t}_{}_{}", name(from), name(to));
        let prev = v.l(r, t - 1, from);
        let next = v.l(r, t, to);
        m.add_row(format!("mc_y_a_{tag}"), F::MoveProduct, vec![(yv, 1.0), (prev, -1.0)], Sense::Le, 0.0);
        m.add_row(format!("mc_y_b_{tag}"), F::MoveProduct, vec![(yv, 1.0), (next, -1.0)], Sense::Le, 0.0);
        m.add_row(
            format!("mc_y_c_{tag}"),
            F::MoveProduct,
            vec![(yv, 1.0), (prev, -1.0), (next, -1.0)],
            Sense::Ge,
            -1.0,
        );
    }
    for r in 0..fleet {
        for t in 2..=t_max {
            for c in 0..cells {
                let tag = format!("{r}_{t}_{}", name(c));
                let zv = v.z(r, t, c);
                let here = v.l(r, t, c);
                let seen = v.e(t - 1, c);
                m.add_row(format!("mc_z_a_{tag}"), F::SenseProduct, vec![(zv, 1.0), (here, -1.0)], Sense::Le, 0.0);
                m.add_row(format!("mc_z_b_{tag}"), F::SenseProduct, vec![(zv, 1.0), (seen, 1.0)], Sense::Le, 1.0);
                m.add_row(
                    format!("mc_z_c_{tag}"),
                    F::SenseProduct,
                    vec![(zv, 1.0), (here, -1.0), (seen, 1.0)],
                    Sense::Ge,
                    0.0,
                );
            }
        }
    }

    if opts.canonicalize {
        for t in 1..t_max {
            m.add_row(
                format!("canon_{t}"),
                F::Canonical,
                vec![(v.d(t + 1), 1.0), (v.d(t), -1.0)],
                Sense::Le,
                0.0,
            );
        }
    }

    for r in 0..fleet {
        let s = p.start_index(r);
        m.add_row(format!("start_l_{r}"), F::StartFix, vec![(v.l(r, 1, s), 1.0)], Sense::Eq, 1.0);
    }
    let mut starts: Vec<usize> = (0..fleet).map(|r| p.start_index(r)).collect();
    starts.sort_unstable();
    for s in starts {
        m.add_row(format!("start_e_{}", name(s)), F::StartFix, vec![(v.e(1, s), 1.0)], Sense::Eq, 1.0);
    }

    (m, vars)
}
