use std::fs;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fleetplan::energy::build_move_costs_with;
use fleetplan::planner::{plan_mission, MissionPlan, SolverMode};
use fleetplan::rp_model::{build_rp_with, BuildOptions, ModelError, RpProblem};
use fleetplan::simulator::{simulate_paths, SimConfig};
use fleetplan::solver::SolveStatus;

mod config;
mod report;

use config::RunConfig;

/// Energy-aware fleet sizing and coverage planning for ground robots.
#[derive(Debug, Parser)]
#[command(name = "fleetplan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Discretize the configured terrain into a cell grid (grid.json).
    Ingest(Common),
    /// Write the per-edge move energy and transit table (move_costs.csv).
    Costs(Common),
    /// Size the fleet and plan paths (plan.json, plan_summary.txt, plan_trace.csv).
    Plan(Common),
    /// Write the coverage model for `[lp] fleet` robots as an LP file (model.lp).
    ExportLp(Common),
    /// Replay a plan with battery dynamics (report.csv, report.json).
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Plan to replay; overrides `[simulate] plan`.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Turn a simulation report into plot data and SVG charts.
    Report {
        #[command(flatten)]
        common: Common,
        /// Report CSV to read; defaults to `<out>/report.csv`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration (TOML, or JSON by extension).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Solver override.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Exact search time limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Heuristic,
}

/// Non-error outcomes with their own exit status.
enum Outcome {
    Done,
    Infeasible,
    Timeout,
}

impl Outcome {
    fn code(&self) -> u8 {
        match self {
            Outcome::Done => 0,
            Outcome::Infeasible => 2,
            Outcome::Timeout => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    mode: Option<Mode>,
    time_limit: Option<f64>,
}

impl Ctx {
    fn new(c: &Common) -> Result<Self> {
        let mut cfg = RunConfig::load(&c.config)?;
        if let Some(seed) = c.seed {
            cfg.seed = seed;
        }
        fs::create_dir_all(&c.out).with_context(|| format!("cannot create output directory {}", c.out.display()))?;
        Ok(Self {
            cfg,
            out: c.out.clone(),
            mode: c.mode,
            time_limit: c.time_limit,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, contents).with_context(|| format!("cannot write {}", p.display()))
    }

    fn create(&self, name: &str) -> Result<BufWriter<fs::File>> {
        let p = self.path(name);
        let f = fs::File::create(&p).with_context(|| format!("cannot write {}", p.display()))?;
        Ok(BufWriter::new(f))
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Ingest(c) => ingest(&Ctx::new(&c)?),
        Command::Costs(c) => costs(&Ctx::new(&c)?),
        Command::Plan(c) => plan(&Ctx::new(&c)?),
        Command::ExportLp(c) => export_lp(&Ctx::new(&c)?),
        Command::Simulate { common, plan } => simulate(&Ctx::new(&common)?, plan),
        Command::Report { common, input } => report(&Ctx::new(&common)?, input),
    }
}

fn ingest(ctx: &Ctx) -> Result<Outcome> {
    let grid = ctx.cfg.grid()?;
    let traversable = (0..grid.len()).filter(|&i| grid.is_traversable(i)).count();
    ctx.write("grid.json", &serde_json::to_string_pretty(&grid)?)?;
    println!(
        "grid {}x{} cells of {} m, {traversable} traversable -> {}",
        grid.a_count,
        grid.b_count,
        grid.cell_size_m,
        ctx.path("grid.json").display()
    );
    Ok(Outcome::Done)
}

fn costs(ctx: &Ctx) -> Result<Outcome> {
    let grid = ctx.cfg.grid()?;
    let profile = ctx.cfg.profile()?;
    let epoch_s = ctx.cfg.mission()?.epoch_s;
    let table = build_move_costs_with(&grid, &profile, epoch_s, &ctx.cfg.speed)?;
    table.write_csv(ctx.create("move_costs.csv")?)?;
    println!("{} move costs -> {}", profile.name, ctx.path("move_costs.csv").display());
    Ok(Outcome::Done)
}

fn summary(plan: &MissionPlan, err: f64, trt_s: f64) -> String {
    format!(
        "fleet {}: {:.1}% explored (required {:.1}%), completion {} epochs = {} s (TRT {} s), status {:?}, requirements {}",
        plan.fleet_size,
        plan.expected_explored_pct * 100.0,
        err * 100.0,
        plan.completion_epochs,
        plan.completion_time_s,
        trt_s,
        plan.status(),
        if plan.met_requirements { "met" } else { "not met" }
    )
}

fn plan(ctx: &Ctx) -> Result<Outcome> {
    let mut spec = ctx.cfg.mission_spec()?;
    match ctx.mode {
        Some(Mode::Exact) => spec.solver_mode = SolverMode::Exact,
        Some(Mode::Heuristic) => spec.solver_mode = SolverMode::Heuristic,
        None => {}
    }
    if let Some(t) = ctx.time_limit {
        spec.limits.time_s = t;
    }
    let plan = plan_mission(&spec)?;
    let line = summary(&plan, spec.err, spec.trt_s);
    ctx.write("plan.json", &plan.to_json())?;
    let mut text = format!("{line}\n");
    for it in &plan.iterations {
        text.push_str(&format!(
            "  fleet {}: {:?} via {:?}, objective {}\n",
            it.fleet,
            it.status,
            it.method,
            it.objective.map_or("-".to_string(), |o| o.to_string())
        ));
    }
    if let Some(why) = &plan.solution.reason {
        text.push_str(&format!("  reason: {why}\n"));
    }
    ctx.write("plan_summary.txt", &text)?;
    if !plan.solution.d.is_empty() {
        plan.solution.write_trace_csv(ctx.create("plan_trace.csv")?)?;
    }
    print!("{text}");
    Ok(if plan.status() == SolveStatus::Timeout {
        Outcome::Timeout
    } else if plan.met_requirements {
        Outcome::Done
    } else {
        Outcome::Infeasible
    })
}

fn export_lp(ctx: &Ctx) -> Result<Outcome> {
    let spec = ctx.cfg.mission_spec()?;
    let costs = build_move_costs_with(&spec.grid, &spec.profile, spec.epoch_s, &spec.speed)?;
    let mut problem = RpProblem::with_default_fleet(
        spec.grid.clone(),
        spec.profile.clone(),
        costs,
        spec.comm,
        spec.err,
        spec.horizon(),
        spec.epoch_s,
        ctx.cfg.lp.fleet,
    )?;
    if let Some(b) = spec.battery_init_j {
        for r in problem.robots.iter_mut() {
            r.battery_init_j = b;
        }
    }
    let opts = BuildOptions {
        canonicalize: ctx.cfg.lp.canonicalize,
    };
    let instance = match build_rp_with(problem, opts) {
        Ok(i) => i,
        Err(ModelError::ProvablyInfeasible(why)) => {
            eprintln!("not exported, instance is provably infeasible: {why}");
            return Ok(Outcome::Infeasible);
        }
        Err(e) => return Err(e.into()),
    };
    fleetplan::rp_model::export_lp(&instance, ctx.path("model.lp"))?;
    ctx.write("instance.json", &instance.summary_json())?;
    let s = instance.summary();
    println!(
        "{} variables, {} rows -> {}",
        s.binaries + s.continuous,
        s.rows,
        ctx.path("model.lp").display()
    );
    Ok(Outcome::Done)
}

fn simulate(ctx: &Ctx, plan_arg: Option<PathBuf>) -> Result<Outcome> {
    let plan_path = plan_arg
        .or_else(|| ctx.cfg.simulate.plan.as_ref().map(|p| ctx.cfg.resolve(p)))
        .unwrap_or_else(|| ctx.path("plan.json"));
    let text = fs::read_to_string(&plan_path)
        .with_context(|| format!("cannot read plan {} (run `plan` first)", plan_path.display()))?;
    let plan: MissionPlan =
        serde_json::from_str(&text).with_context(|| format!("invalid plan {}", plan_path.display()))?;
    let grid = ctx.cfg.grid()?;
    let profile = ctx.cfg.profile()?;
    let comm = ctx.cfg.comm(&profile);
    let config = SimConfig {
        epoch_s: ctx.cfg.mission()?.epoch_s,
        speed: ctx.cfg.speed,
    };
    let init = match ctx.cfg.simulate.battery_init_j {
        Some(b) => vec![b; plan.paths.len()],
        None => plan.battery_init_j.clone(),
    };
    let rep = simulate_paths(&plan.paths, &init, plan.coverage_target_cells, &grid, &profile, &comm, &config)?;
    rep.write_csv(ctx.create("report.csv")?)?;
    ctx.write("report.json", &rep.summary_json())?;
    println!(
        "{} epochs, {:.1}% explored, {:.1} J drawn, completion_epoch={}, depleted_robots={}",
        rep.epochs(),
        rep.explored_pct.last().copied().unwrap_or(0.0),
        rep.total_energy_j(),
        rep.totals
            .completion_epoch
            .map_or("none".to_string(), |e| e.to_string()),
        rep.totals.depleted_robots
    );
    Ok(Outcome::Done)
}

fn report(ctx: &Ctx, input: Option<PathBuf>) -> Result<Outcome> {
    let input = input.unwrap_or_else(|| ctx.path("report.csv"));
    let s = report::read_report(&input)?;
    let epoch_s = ctx.cfg.mission.as_ref().map_or(1.0, |m| m.epoch_s);

    let mut w = csv::Writer::from_writer(ctx.create("explored_vs_epoch.csv")?);
    w.write_record(["epoch", "time_s", "explored_pct"])?;
    for (e, pct) in s.epochs.iter().zip(&s.explored_pct) {
        w.write_record([e.to_string(), (*e as f64 * epoch_s).to_string(), pct.to_string()])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_writer(ctx.create("energy_vs_coverage.csv")?);
    w.write_record(["explored_pct", "energy_J"])?;
    for (pct, e) in s.explored_pct.iter().zip(&s.energy_j) {
        w.write_record([pct.to_string(), e.to_string()])?;
    }
    w.flush()?;

    let explored: Vec<(f64, f64)> = s.epochs.iter().map(|&e| e as f64).zip(s.explored_pct.iter().copied()).collect();
    let energy: Vec<(f64, f64)> = s.explored_pct.iter().copied().zip(s.energy_j.iter().copied()).collect();
    ctx.write(
        "explored_vs_epoch.svg",
        &report::line_chart("Explored area per epoch", "epoch", "explored (%)", &explored),
    )?;
    ctx.write(
        "energy_vs_coverage.svg",
        &report::line_chart("Fleet energy versus coverage", "explored (%)", "energy drawn (J)", &energy),
    )?;
    println!("plot data for {} epochs -> {}", s.epochs.len() - 1, ctx.out.display());
    Ok(Outcome::Done)
}
