//! CPLEX LP text export.
//!
//! Variable names: `d_t`, `e_t_a_b`, `l_r_t_a_b`, `b_r_t`, `z_r_t_a_b` and
//! `y_r_t_a_b_a2_b2`, with epochs `t` counted from 1 and robots and cells
//! from 0.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{LinearModel, ModelError, RpInstance, Sense, VarKind};

const TERMS_PER_LINE: usize = 8;

fn push_terms(out: &mut String, model: &LinearModel, terms: &[(usize, f64)]) {
    for (i, &(v, c)) in terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n  ");
        }
        let name = &model.vars[v].name;
        let sign = if c < 0.0 { '-' } else { '+' };
        let mag = c.abs();
        if i == 0 && sign == '+' {
            if mag == 1.0 {
                let _ = write!(out, " {name}");
            } else {
                let _ = write!(out, " {mag} {name}");
            }
        } else if mag == 1.0 {
            let _ = write!(out, " {sign} {name}");
        } else {
            let _ = write!(out, " {sign} {mag} {name}");
        }
    }
    if terms.is_empty() {
        out.push_str(" 0");
    }
}

/// Renders the model as LP text. Output depends only on the instance.
pub fn write_lp(instance: &RpInstance) -> String {
    let model = &instance.model;
    let mut out = String::new();
    out.push_str("Minimize\n obj:");
    push_terms(&mut out, model, &model.objective);
    out.push_str("\nSubject To\n");
    for row in &model.rows {
        let _ = write!(out, " {}:", row.name);
        push_terms(&mut out, model, &row.terms);
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", row.rhs);
    }
    out.push_str("Bounds\n");
    for var in &model.vars {
        match var.kind {
            VarKind::Continuous => {
                let _ = writeln!(out, " {} <= {} <= {}", var.lower, var.name, var.upper);
            }
            VarKind::Binary if var.upper == 0.0 => {
                let _ = writeln!(out, " {} = 0", var.name);
            }
            VarKind::Binary => {}
        }
    }
    out.push_str("Binary\n");
    for var in model.vars.iter().filter(|v| v.kind == VarKind::Binary) {
        let _ = writeln!(out, " {}", var.name);
    }
    out.push_str("End\n");
    out
}

pub fn export_lp(instance: &RpInstance, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let path = path.as_ref();
    fs::write(path, write_lp(instance)).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })
}
