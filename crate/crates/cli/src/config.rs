//! Run configuration, read from TOML or JSON (chosen by file extension).
//!
//! Relative paths inside the file are resolved against the file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use fleetplan::energy::{CommModel, EnergyProfile};
use fleetplan::planner::{MissionSpec, SolverMode, DEFAULT_EXACT_THRESHOLD};
use fleetplan::simulator::SpeedConfig;
use fleetplan::terrain::{discretize, load_dem, synth_terrain, Cell, CellGrid, DemFormat, SynthKind};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub terrain: TerrainConfig,
    pub profile: ProfileConfig,
    pub mission: Option<MissionConfig>,
    pub comm: Option<CommConfig>,
    #[serde(default)]
    pub speed: SpeedConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub lp: LpConfig,
    #[serde(skip)]
    base_dir: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainConfig {
    pub cell_size_m: f64,
    /// Raster file; mutually exclusive with `synth`.
    pub dem: Option<PathBuf>,
    pub format: Option<DemFormat>,
    /// Sample spacing for CSV heightmaps.
    pub resolution_m: Option<f64>,
    pub synth: Option<SynthKind>,
    /// `[a_count, b_count]` for synthetic terrain.
    pub size: Option<[usize; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub path: Option<PathBuf>,
    /// `wheeled` or `quadruped`.
    pub builtin: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissionConfig {
    pub err: f64,
    pub trt_s: f64,
    pub tfs: usize,
    pub epoch_s: f64,
    #[serde(default)]
    pub solver_mode: SolverMode,
    #[serde(default = "default_threshold")]
    pub exact_threshold: usize,
    #[serde(default = "default_time_limit")]
    pub time_limit_s: f64,
    #[serde(rename = "battery_init_J")]
    pub battery_init_j: Option<f64>,
    #[serde(rename = "heuristic_reserve_J", default)]
    pub heuristic_reserve_j: f64,
    #[serde(default)]
    pub heuristic_restarts: usize,
}

fn default_threshold() -> usize {
    DEFAULT_EXACT_THRESHOLD
}

fn default_time_limit() -> f64 {
    600.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommConfig {
    pub base_station: [usize; 2],
    /// Defaults to the profile's transmit power.
    #[serde(rename = "p_tx0_W")]
    pub p_tx0_w: Option<f64>,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "one")]
    pub d_ref_m: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    /// Plan JSON to replay; defaults to `<out>/plan.json`.
    pub plan: Option<PathBuf>,
    /// Overrides every robot's starting charge in the replay.
    #[serde(rename = "battery_init_J")]
    pub battery_init_j: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpConfig {
    #[serde(default = "one_robot")]
    pub fleet: usize,
    #[serde(default = "yes")]
    pub canonicalize: bool,
}

impl Default for LpConfig {
    fn default() -> Self {
        Self {
            fleet: 1,
            canonicalize: true,
        }
    }
}

fn one_robot() -> usize {
    1
}

fn yes() -> bool {
    true
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: RunConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?
        } else {
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?
        };
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                self.schema_version
            );
        }
        let t = &self.terrain;
        match (&t.dem, &t.synth) {
            (Some(_), Some(_)) => bail!("terrain: give either `dem` or `synth`, not both"),
            (None, None) => bail!("terrain: one of `dem` or `synth` is required"),
            (None, Some(_)) if t.size.is_none() => bail!("terrain: synthetic terrain needs `size`"),
            _ => {}
        }
        if !(t.cell_size_m > 0.0) {
            bail!("terrain: cell_size_m must be positive");
        }
        if let Some(dem) = &t.dem {
            let p = self.resolve(dem);
            if !p.is_file() {
                bail!("terrain: DEM file {} does not exist", p.display());
            }
        }
        match (&self.profile.path, &self.profile.builtin) {
            (Some(_), Some(_)) => bail!("profile: give either `path` or `builtin`, not both"),
            (None, None) => bail!("profile: one of `path` or `builtin` is required"),
            (None, Some(b)) if b != "wheeled" && b != "quadruped" => {
                bail!("profile: unknown builtin `{b}` (expected wheeled or quadruped)")
            }
            (Some(p), None) if !self.resolve(p).is_file() => {
                bail!("profile: file {} does not exist", self.resolve(p).display())
            }
            _ => {}
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn grid(&self) -> Result<CellGrid> {
        let t = &self.terrain;
        if let Some(kind) = t.synth {
            let [a, b] = t.size.expect("checked on load");
            return Ok(synth_terrain(kind, a, b, t.cell_size_m)?);
        }
        let dem = self.resolve(t.dem.as_ref().expect("checked on load"));
        let format = t.format.unwrap_or(match dem.extension().and_then(|e| e.to_str()) {
            Some("csv") => DemFormat::CsvHeightmap,
            _ => DemFormat::AsciiGrid,
        });
        let mut heights = load_dem(&dem, format)?;
        if let Some(res) = t.resolution_m {
            heights = heights.with_resolution(res)?;
        }
        Ok(discretize(&heights, t.cell_size_m)?)
    }

    pub fn profile(&self) -> Result<EnergyProfile> {
        Ok(match (&self.profile.path, self.profile.builtin.as_deref()) {
            (Some(p), _) => EnergyProfile::from_file(self.resolve(p))?,
            (None, Some("quadruped")) => EnergyProfile::default_quadruped(),
            _ => EnergyProfile::default_wheeled(1.0),
        })
    }

    pub fn comm(&self, profile: &EnergyProfile) -> CommModel {
        match &self.comm {
            None => CommModel::constant(profile.p_tx0_w),
            Some(c) => CommModel {
                base_station_cell: Cell::new(c.base_station[0], c.base_station[1]),
                p_tx0_w: c.p_tx0_w.unwrap_or(profile.p_tx0_w),
                beta: c.beta,
                d_ref_m: c.d_ref_m,
            },
        }
    }

    pub fn mission(&self) -> Result<&MissionConfig> {
        self.mission.as_ref().context("config has no [mission] section")
    }

    pub fn mission_spec(&self) -> Result<MissionSpec> {
        let m = self.mission()?;
        let grid = self.grid()?;
        let profile = self.profile()?;
        let comm = self.comm(&profile);
        let mut spec = MissionSpec::new(grid, profile, m.err, m.trt_s, m.tfs, m.epoch_s);
        spec.comm = comm;
        spec.speed = self.speed;
        spec.solver_mode = m.solver_mode;
        spec.exact_threshold = m.exact_threshold;
        spec.limits.time_s = m.time_limit_s;
        spec.heuristic.reserve_j = m.heuristic_reserve_j;
        spec.heuristic.restarts = m.heuristic_restarts;
        spec.seed = self.seed;
        spec.battery_init_j = m.battery_init_j;
        Ok(spec)
    }
}
