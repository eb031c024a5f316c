//! Robot energy profiles and motion-energy models.
//!
//! Wheeled robots use the rolling-resistance plus gravity model integrated over
//! a straight edge at constant slope. Quadrupeds use power measured against
//! slope at a fixed walking speed, either as a fitted line or interpolated
//! directly from the measurements.

mod comm;
mod costs;
mod profile;

pub use comm::CommModel;
pub use costs::{build_move_costs, build_move_costs_with, MoveCost, MoveCostTable};
pub use profile::{
    EnergyProfile, QuadrupedMode, RobotKind, SlopePower, Transitions, STANDARD_GRAVITY,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("expected a {expected:?} profile, got {actual:?}")]
    KindMismatch {
        expected: RobotKind,
        actual: RobotKind,
    },
    #[error("slope {0} deg is outside (-90, 90)")]
    SlopeOutOfRange(f64),
    #[error("cannot fit a line: all {0} samples share the same slope")]
    SingularFit(usize),
    #[error("idle-up power {p_up} W does not exceed idle-down power {p_down} W, lying down never pays off")]
    NoBreakEven { p_up: f64, p_down: f64 },
    #[error("profile has no posture transition data")]
    MissingTransitions,
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("profile format: {0}")]
    ProfileFormat(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("epoch of {epoch_s} s cannot contain move {from} -> {to} taking {transit_s:.3} s")]
    EpochTooShort {
        from: crate::terrain::Cell,
        to: crate::terrain::Cell,
        transit_s: f64,
        epoch_s: f64,
    },
    #[error("invalid epoch length {0} s")]
    InvalidEpoch(f64),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn check_slope(slope_deg: f64) -> Result<(), EnergyError> {
    if slope_deg.abs() < 90.0 {
        Ok(())
    } else {
        Err(EnergyError::SlopeOutOfRange(slope_deg))
    }
}

/// `max(0, (mu m g cos(theta) + m g sin(theta)) * d)`; no regeneration downhill.
pub fn wheeled_move_energy(
    profile: &EnergyProfile,
    slope_deg: f64,
    distance_m: f64,
) -> Result<f64, EnergyError> {
    if profile.kind != RobotKind::Wheeled {
        return Err(EnergyError::KindMismatch {
            expected: RobotKind::Wheeled,
            actual: profile.kind,
        });
    }
    check_slope(slope_deg)?;
    let mu = profile.mu.unwrap_or(0.0);
    let weight = profile.mass_kg * profile.gravity;
    let theta = slope_deg.to_radians();
    let force = mu * weight * theta.cos() + weight * theta.sin();
    Ok((force * distance_m).max(0.0))
}

/// Walking power at `slope_deg` under the profile's quadruped mode, clamped
/// to the measured slope range.
pub fn quadruped_power(profile: &EnergyProfile, slope_deg: f64) -> Result<f64, EnergyError> {
    if profile.kind != RobotKind::Quadruped {
        return Err(EnergyError::KindMismatch {
            expected: RobotKind::Quadruped,
            actual: profile.kind,
        });
    }
    check_slope(slope_deg)?;
    let power = match profile.quadruped_mode {
        QuadrupedMode::Regression => profile
            .slope_power
            .ok_or_else(|| EnergyError::InvalidProfile("missing slope_power".into()))?
            .power_at(slope_deg),
        QuadrupedMode::MeasuredTable => interpolate(&profile.slope_table, slope_deg)
            .ok_or_else(|| EnergyError::InvalidProfile("empty slope_table".into()))?,
    };
    Ok(power.max(0.0))
}

fn interpolate(table: &[[f64; 2]], x: f64) -> Option<f64> {
    let first = table.first()?;
    let last = table.last()?;
    if x <= first[0] {
        return Some(first[1]);
    }
    if x >= last[0] {
        return Some(last[1]);
    }
    table.windows(2).find_map(|w| {
        let ([x0, y0], [x1, y1]) = (w[0], w[1]);
        (x >= x0 && x <= x1).then(|| {
            if x1 == x0 {
                y0
            } else {
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        })
    })
}

/// Walking power times travel time at the planning speed.
pub fn quadruped_move_energy(
    profile: &EnergyProfile,
    slope_deg: f64,
    distance_m: f64,
) -> Result<f64, EnergyError> {
    let power = quadruped_power(profile, slope_deg)?;
    Ok(power * distance_m / profile.v_plan)
}

/// Motion energy for either robot kind.
pub fn move_energy(profile: &EnergyProfile, slope_deg: f64, distance_m: f64) -> Result<f64, EnergyError> {
    match profile.kind {
        RobotKind::Wheeled => wheeled_move_energy(profile, slope_deg, distance_m),
        RobotKind::Quadruped => quadruped_move_energy(profile, slope_deg, distance_m),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub intercept_w: f64,
    pub slope_w_per_deg: f64,
    /// `observed - fitted` per input sample, in input order.
    pub residuals: Vec<f64>,
}

impl SlopeFit {
    pub fn power_at(&self, slope_deg: f64) -> f64 {
        self.intercept_w + self.slope_w_per_deg * slope_deg
    }
}

/// Ordinary least squares of power against slope.
pub fn fit_quadruped_slope_power(samples: &[(f64, f64)]) -> Result<SlopeFit, EnergyError> {
    let n = samples.len() as f64;
    if samples.len() < 2 {
        return Err(EnergyError::SingularFit(samples.len()));
    }
    let mean_x = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mean_y = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mean_x).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mean_x) * (s.1 - mean_y)).sum();
    if sxx <= f64::EPSILON * samples.iter().map(|s| s.0 * s.0).sum::<f64>().max(1.0) {
        return Err(EnergyError::SingularFit(samples.len()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residuals = samples
        .iter()
        .map(|&(x, y)| y - (intercept + slope * x))
        .collect();
    Ok(SlopeFit {
        intercept_w: intercept,
        slope_w_per_deg: slope,
        residuals,
    })
}

/// Shortest idle period for which lying down (two posture transitions plus
/// lying) costs no more than standing for the same time.
///
/// Solves `P_up t = (P_flex_down + P_flex_up) t_tr + P_down (t - 2 t_tr)`;
/// the result is never shorter than the two transitions themselves.
pub fn idle_break_even(profile: &EnergyProfile) -> Result<f64, EnergyError> {
    let tr = profile.transitions.ok_or(EnergyError::MissingTransitions)?;
    let p_up = profile.p_idle_w;
    let p_down = tr.p_idle_down_w;
    if p_up <= p_down {
        return Err(EnergyError::NoBreakEven { p_up, p_down });
    }
    let root =
        (tr.p_flex_down_w + tr.p_flex_up_w - 2.0 * p_down) * tr.t_transition_s / (p_up - p_down);
    Ok(root.max(2.0 * tr.t_transition_s))
}

/// Energy of standing for `idle_s` seconds.
pub fn stand_energy(profile: &EnergyProfile, idle_s: f64) -> f64 {
    profile.p_idle_w * idle_s
}

/// Energy of lying down, idling, and standing back up within `idle_s` seconds.
pub fn lay_energy(profile: &EnergyProfile, idle_s: f64) -> Result<f64, EnergyError> {
    let tr = profile.transitions.ok_or(EnergyError::MissingTransitions)?;
    Ok((tr.p_flex_down_w + tr.p_flex_up_w) * tr.t_transition_s
        + tr.p_idle_down_w * (idle_s - 2.0 * tr.t_transition_s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wheeled() -> EnergyProfile {
        EnergyProfile::default_wheeled(1.0)
    }

    fn quad() -> EnergyProfile {
        EnergyProfile::default_quadruped()
    }

    fn quad_table() -> EnergyProfile {
        EnergyProfile {
            quadruped_mode: QuadrupedMode::MeasuredTable,
            ..quad()
        }
    }

    #[test]
    fn wheeled_flat_per_meter() {
        let e = wheeled_move_energy(&wheeled(), 0.0, 1.0).unwrap();
        assert!((e - 7.36731).abs() < 1e-4, "{e}");
        assert_eq!(wheeled_move_energy(&wheeled(), 12.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn wheeled_ramp_ten_meters() {
        let slope = 0.1f64.atan().to_degrees();
        let e = wheeled_move_energy(&wheeled(), slope, 10.0).unwrap();
        assert!((e - 146.6).abs() < 0.05, "{e}");
    }

    #[test]
    fn wheeled_steep_descent_clamps() {
        assert_eq!(wheeled_move_energy(&wheeled(), -20.0, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn kind_mismatch() {
        assert!(matches!(
            wheeled_move_energy(&quad(), 0.0, 1.0),
            Err(EnergyError::KindMismatch { .. })
        ));
        assert!(matches!(
            quadruped_move_energy(&wheeled(), 0.0, 1.0),
            Err(EnergyError::KindMismatch { .. })
        ));
        assert!(matches!(
            wheeled_move_energy(&wheeled(), 90.0, 1.0),
            Err(EnergyError::SlopeOutOfRange(_))
        ));
    }

    #[test]
    fn table_fit_matches_closed_form() {
        let q = quad();
        let sp = q.slope_power.unwrap();
        assert!((sp.intercept_w - 144.112).abs() < 1e-9);
        assert!((sp.slope_w_per_deg - 4.811577).abs() < 1e-5);
        assert_eq!(sp.valid_range_deg, [-11.0, 11.0]);
    }

    #[test]
    fn two_point_fit() {
        let fit = fit_quadruped_slope_power(&[(0.0, 100.0), (10.0, 200.0)]).unwrap();
        assert!((fit.intercept_w - 100.0).abs() < 1e-12);
        assert!((fit.slope_w_per_deg - 10.0).abs() < 1e-12);
    }

    #[test]
    fn singular_fit() {
        assert!(matches!(
            fit_quadruped_slope_power(&[(3.0, 1.0), (3.0, 2.0)]),
            Err(EnergyError::SingularFit(2))
        ));
        assert!(fit_quadruped_slope_power(&[(3.0, 1.0)]).is_err());
    }

    #[test]
    fn quadruped_energies() {
        let flat = quadruped_move_energy(&quad_table(), 0.0, 10.0).unwrap();
        assert!((flat - 1429.5).abs() < 1e-9);
        assert_eq!(quadruped_move_energy(&quad(), 4.0, 0.0).unwrap(), 0.0);
        let up = quadruped_move_energy(&quad(), 11.0, 10.0).unwrap();
        assert!((up - 1970.4).abs() < 0.1, "{up}");
        let up_table = quadruped_move_energy(&quad_table(), 11.0, 10.0).unwrap();
        assert!((up_table - 2033.8).abs() < 1e-9);
        // clamped beyond the measured range
        let steep = quadruped_move_energy(&quad(), 30.0, 10.0).unwrap();
        assert_eq!(steep, up);
    }

    #[test]
    fn measured_table_interpolates() {
        let p = quadruped_power(&quad_table(), 2.65).unwrap();
        assert!((p - (142.95 + 160.35) / 2.0).abs() < 1e-9);
        assert_eq!(quadruped_power(&quad_table(), -40.0).unwrap(), 91.01);
    }

    #[test]
    fn break_even_table_two() {
        let t = idle_break_even(&quad()).unwrap();
        assert!((t - 2.14).abs() < 0.01, "{t}");
    }

    #[test]
    fn break_even_degenerate_transitions() {
        let mut q = quad();
        let tr = q.transitions.as_mut().unwrap();
        tr.p_flex_down_w = tr.p_idle_down_w;
        tr.p_flex_up_w = tr.p_idle_down_w;
        tr.t_transition_s = 1.7;
        assert!((idle_break_even(&q).unwrap() - 3.4).abs() < 1e-12);
    }

    #[test]
    fn break_even_doubled_transition_excess() {
        let mut q = quad();
        let tr = q.transitions.as_mut().unwrap();
        tr.p_flex_down_w = tr.p_idle_down_w + 2.0 * (tr.p_flex_down_w - tr.p_idle_down_w);
        tr.p_flex_up_w = tr.p_idle_down_w + 2.0 * (tr.p_flex_up_w - tr.p_idle_down_w);
        let t = idle_break_even(&q).unwrap();
        assert!((t - 4.28).abs() < 0.01, "{t}");
    }

    #[test]
    fn break_even_requires_cheaper_lying() {
        let mut q = quad();
        q.p_idle_w = 10.0;
        assert!(matches!(idle_break_even(&q), Err(EnergyError::NoBreakEven { .. })));
        assert!(matches!(
            idle_break_even(&wheeled()),
            Err(EnergyError::MissingTransitions)
        ));
    }

    proptest! {
        // mu*cos + sin peaks at 90 - atan(mu) degrees, ~84 for mu = 0.1
        #[test]
        fn wheeled_monotone_in_slope(a in -80.0f64..80.0, b in -80.0f64..80.0, d in 0.0f64..50.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let w = wheeled();
            prop_assert!(wheeled_move_energy(&w, lo, d).unwrap() <= wheeled_move_energy(&w, hi, d).unwrap() + 1e-12);
        }

        #[test]
        fn quadruped_monotone_in_slope(a in -11.0f64..11.0, b in -11.0f64..11.0, d in 0.0f64..50.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            for q in [quad(), quad_table()] {
                prop_assert!(quadruped_move_energy(&q, lo, d).unwrap() <= quadruped_move_energy(&q, hi, d).unwrap() + 1e-12);
            }
        }

        #[test]
        fn uphill_flat_downhill_order(theta in 0.0f64..89.0, d in 0.0f64..50.0) {
            for p in [wheeled(), quad(), quad_table()] {
                let up = move_energy(&p, theta, d).unwrap();
                let flat = move_energy(&p, 0.0, d).unwrap();
                let down = move_energy(&p, -theta, d).unwrap();
                prop_assert!(up + 1e-12 >= flat && flat + 1e-12 >= down);
            }
        }

        #[test]
        fn distance_linearity(theta in -89.0f64..89.0, d in 0.1f64..50.0) {
            for p in [wheeled(), quad()] {
                let one = move_energy(&p, theta, d).unwrap();
                let two = move_energy(&p, theta, 2.0 * d).unwrap();
                if one > 0.0 {
                    prop_assert!((two - 2.0 * one).abs() <= 1e-9 * two.max(1.0));
                }
            }
        }

        #[test]
        fn exact_lines_fit_exactly(c in -200.0f64..200.0, m in -20.0f64..20.0, xs in proptest::collection::btree_set(-40i32..40, 2..8)) {
            let samples: Vec<(f64, f64)> = xs.iter().map(|&x| (x as f64, c + m * x as f64)).collect();
            let fit = fit_quadruped_slope_power(&samples).unwrap();
            prop_assert!(fit.residuals.iter().all(|r| r.abs() < 1e-9));
        }

        #[test]
        fn break_even_separates_strategies(
            p_down in 1.0f64..50.0,
            gap in 1.0f64..100.0,
            extra_dn in 0.0f64..100.0,
            extra_up in 0.0f64..100.0,
            t_tr in 0.2f64..3.0,
            frac in 0.01f64..0.99,
        ) {
            let p_up = p_down + gap;
            // transition energy must at least match standing through the transitions
            let flex_down = p_up + extra_dn;
            let flex_up = p_up + extra_up;
            let mut q = quad();
            q.p_idle_w = p_up;
            q.transitions = Some(Transitions { p_flex_down_w: flex_down, p_flex_up_w: flex_up, p_idle_down_w: p_down, t_transition_s: t_tr });
            let t_star = idle_break_even(&q).unwrap();
            let longer = t_star * (1.0 + frac);
            prop_assert!(lay_energy(&q, longer).unwrap() < stand_energy(&q, longer));
            let shorter = 2.0 * t_tr + (t_star - 2.0 * t_tr) * (1.0 - frac);
            if shorter < t_star - 1e-9 {
                prop_assert!(lay_energy(&q, shorter).unwrap() > stand_energy(&q, shorter));
            }
        }
    }
}
