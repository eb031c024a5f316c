use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{fit_quadruped_slope_power, EnergyError};

pub const STANDARD_GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobotKind {
    Wheeled,
    Quadruped,
}

/// How quadruped motion power is derived from slope.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadrupedMode {
    /// Least-squares line over the measured slope table.
    #[default]
    Regression,
    /// Piecewise-linear interpolation of the measured slope table.
    MeasuredTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopePower {
    #[serde(rename = "intercept_W")]
    pub intercept_w: f64,
    #[serde(rename = "slope_W_per_deg")]
    pub slope_w_per_deg: f64,
    pub valid_range_deg: [f64; 2],
}

impl SlopePower {
    pub fn power_at(&self, slope_deg: f64) -> f64 {
        let [lo, hi] = self.valid_range_deg;
        self.intercept_w + self.slope_w_per_deg * slope_deg.clamp(lo, hi)
    }
}

/// Stand/lay posture transition powers for legged robots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transitions {
    #[serde(rename = "p_flex_down_W")]
    pub p_flex_down_w: f64,
    #[serde(rename = "p_flex_up_W")]
    pub p_flex_up_w: f64,
    #[serde(rename = "p_idle_down_W")]
    pub p_idle_down_w: f64,
    pub t_transition_s: f64,
}

/// One robot type's power and energy parameters.
///
/// Stored on disk as TOML key-value pairs whose keys match the serde names
/// below (`battery_capacity_J`, `p_rx_W`, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyProfile {
    #[serde(default)]
    pub name: String,
    pub kind: RobotKind,
    pub mass_kg: f64,
    #[serde(default = "default_gravity")]
    pub gravity: f64,
    pub v_max: f64,
    pub v_plan: f64,
    #[serde(rename = "battery_capacity_J")]
    pub battery_capacity_j: f64,
    #[serde(rename = "p_rx_W")]
    pub p_rx_w: f64,
    #[serde(rename = "p_tx0_W")]
    pub p_tx0_w: f64,
    #[serde(rename = "p_sen_W")]
    pub p_sen_w: f64,
    #[serde(rename = "p_idle_W")]
    pub p_idle_w: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_power: Option<SlopePower>,
    /// Measured `(slope_deg, power_W)` pairs, sorted by slope.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub slope_table: Vec<[f64; 2]>,
    #[serde(default)]
    pub quadruped_mode: QuadrupedMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitions: Option<Transitions>,
    #[serde(
        rename = "motor_power_cap_W",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub motor_power_cap_w: Option<f64>,
}

fn default_gravity() -> f64 {
    STANDARD_GRAVITY
}

impl EnergyProfile {
    pub fn from_toml_str(text: &str) -> Result<Self, EnergyError> {
        let profile: Self =
            toml::from_str(text).map_err(|e| EnergyError::ProfileFormat(e.to_string()))?;
        profile.finish()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, EnergyError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| EnergyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("profile serializes to TOML")
    }

    /// Fills the fitted slope line from the slope table when absent, then validates.
    pub fn finish(mut self) -> Result<Self, EnergyError> {
        self.slope_table
            .sort_by(|x, y| x[0].partial_cmp(&y[0]).unwrap_or(std::cmp::Ordering::Equal));
        if self.kind == RobotKind::Quadruped && self.slope_power.is_none() && !self.slope_table.is_empty() {
            let samples: Vec<(f64, f64)> = self.slope_table.iter().map(|p| (p[0], p[1])).collect();
            let fit = fit_quadruped_slope_power(&samples)?;
            let lo = self.slope_table.first().map(|p| p[0]).unwrap_or(0.0);
            let hi = self.slope_table.last().map(|p| p[0]).unwrap_or(0.0);
            self.slope_power = Some(SlopePower {
                intercept_w: fit.intercept_w,
                slope_w_per_deg: fit.slope_w_per_deg,
                valid_range_deg: [lo, hi],
            });
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), EnergyError> {
        let bad = |what: &str| Err(EnergyError::InvalidProfile(what.to_string()));
        let powers = [
            ("p_rx_W", self.p_rx_w),
            ("p_tx0_W", self.p_tx0_w),
            ("p_sen_W", self.p_sen_w),
            ("p_idle_W", self.p_idle_w),
        ];
        for (name, p) in powers {
            if !(p >= 0.0 && p.is_finite()) {
                return bad(&format!("{name} must be a finite nonnegative power, got {p}"));
            }
        }
        if !(self.battery_capacity_j > 0.0 && self.battery_capacity_j.is_finite()) {
            return bad("battery_capacity_J must be positive");
        }
        if !(self.v_plan > 0.0 && self.v_plan <= self.v_max && self.v_max.is_finite()) {
            return bad("speeds must satisfy 0 < v_plan <= v_max");
        }
        if !(self.mass_kg > 0.0 && self.gravity > 0.0) {
            return bad("mass_kg and gravity must be positive");
        }
        if let Some(cap) = self.motor_power_cap_w {
            if !(cap > 0.0) {
                return bad("motor_power_cap_W must be positive");
            }
        }
        match self.kind {
            RobotKind::Wheeled => match self.mu {
                Some(mu) if mu >= 0.0 && mu.is_finite() => {}
                Some(_) => return bad("mu must be nonnegative"),
                None => return bad("wheeled profiles need mu"),
            },
            RobotKind::Quadruped => {
                let Some(sp) = self.slope_power else {
                    return bad("quadruped profiles need slope_power or slope_table");
                };
                if !(sp.valid_range_deg[0] <= sp.valid_range_deg[1]) {
                    return bad("slope_power.valid_range_deg must be ordered");
                }
                if self.quadruped_mode == QuadrupedMode::MeasuredTable && self.slope_table.is_empty() {
                    return bad("measured-table mode needs slope_table");
                }
            }
        }
        Ok(())
    }

    /// Per-epoch drain that is charged whether or not the robot moves or senses.
    pub fn baseline_power_w(&self) -> f64 {
        self.p_rx_w + self.p_idle_w
    }

    /// Wheeled profile with the published rover values, `v_max` in m/s.
    pub fn default_wheeled(v_max: f64) -> Self {
        Self {
            name: "wheeled".into(),
            kind: RobotKind::Wheeled,
            mass_kg: 7.51,
            gravity: STANDARD_GRAVITY,
            v_max,
            v_plan: v_max,
            battery_capacity_j: 72_000.0,
            p_rx_w: 4.00,
            p_tx0_w: 4.95,
            p_sen_w: 12.00,
            p_idle_w: 0.29,
            mu: Some(0.1),
            slope_power: None,
            slope_table: Vec::new(),
            quadruped_mode: QuadrupedMode::Regression,
            transitions: None,
            motor_power_cap_w: None,
        }
    }

    /// Quadruped profile with the measured GO1 values at 1 m/s.
    pub fn default_quadruped() -> Self {
        Self {
            name: "quadruped".into(),
            kind: RobotKind::Quadruped,
            mass_kg: 13.0,
            gravity: STANDARD_GRAVITY,
            v_max: 1.0,
            v_plan: 1.0,
            battery_capacity_j: 350_000.0,
            p_rx_w: 15.77,
            p_tx0_w: 16.72,
            p_sen_w: 76.09,
            p_idle_w: 80.33,
            mu: None,
            slope_power: None,
            slope_table: vec![
                [-11.0, 91.01],
                [-5.3, 122.87],
                [0.0, 142.95],
                [5.3, 160.35],
                [11.0, 203.38],
            ],
            quadruped_mode: QuadrupedMode::Regression,
            transitions: Some(Transitions {
                p_flex_down_w: 75.79,
                p_flex_up_w: 93.14,
                p_idle_down_w: 21.62,
                t_transition_s: 1.0,
            }),
            motor_power_cap_w: None,
        }
        .finish()
        .expect("built-in quadruped profile is valid")
    }
}
