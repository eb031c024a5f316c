use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fleetplan"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn plan_small_wheeled_reports_three_robots() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["plan"], &configs().join("small_wheeled.toml"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("fleet 3:"), "{}", stdout(&o));
    let plan: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("plan.json")).unwrap()).unwrap();
    assert_eq!(plan["fleet_size"], 3);
    assert_eq!(plan["met_requirements"], true);
}

#[test]
fn export_lp_one_cell() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["export-lp"], &configs().join("one_cell.toml"), dir.path());
    assert_eq!(o.status.code(), Some(0));
    let lp = fs::read_to_string(dir.path().join("model.lp")).unwrap();
    assert!(lp.starts_with("Minimize"));
    assert!(dir.path().join("instance.json").is_file());
}

#[test]
fn depleting_fixture_reports_one_depleted_robot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("depleting.toml");
    assert_eq!(run(&["plan"], &cfg, dir.path()).status.code(), Some(0));
    let o = run(&["simulate"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("depleted_robots=1"), "{}", stdout(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(summary["totals"]["depleted_robots"], 1);
}

#[test]
fn full_pipeline_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("hill_slow_wheeled.toml");
    for cmd in ["ingest", "costs", "plan", "export-lp", "simulate", "report"] {
        let o = run(&[cmd], &cfg, dir.path());
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    for f in [
        "grid.json",
        "move_costs.csv",
        "plan.json",
        "plan_summary.txt",
        "plan_trace.csv",
        "model.lp",
        "report.csv",
        "report.json",
        "explored_vs_epoch.csv",
        "energy_vs_coverage.csv",
        "explored_vs_epoch.svg",
        "energy_vs_coverage.svg",
    ] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let costs = fs::read_to_string(dir.path().join("move_costs.csv")).unwrap();
    assert!(costs.starts_with("a,b,a2,b2,energy_J,transit_time_s"));
    let svg = fs::read_to_string(dir.path().join("explored_vs_epoch.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let cfg = configs().join("small_quadruped.toml");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        for cmd in ["plan", "simulate", "report"] {
            assert_eq!(run(&[cmd], &cfg, dir).status.code(), Some(0));
        }
    }
    for f in ["plan.json", "plan_trace.csv", "report.csv", "report.json", "energy_vs_coverage.svg"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn unmet_requirements_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.toml");
    let text = fs::read_to_string(configs().join("small_wheeled.toml"))
        .unwrap()
        .replace("tfs = 10", "tfs = 2");
    fs::write(&cfg, text.replace("../profiles/", &format!("{}/", configs().join("../profiles").display()))).unwrap();
    let o = run(&["plan"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("not met"));
}

#[test]
fn search_limit_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["plan", "--mode", "exact", "--time-limit", "0"],
        &configs().join("small_wheeled.toml"),
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}

#[test]
fn usage_errors_exit_one() {
    let bin = env!("CARGO_BIN_EXE_fleetplan");
    let o = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    let o = Command::new(bin).args(["plan", "--nope"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    for sub in ["ingest", "costs", "plan", "export-lp", "simulate", "report"] {
        let o = Command::new(bin).args([sub, "--help"]).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{sub} --help");
    }
}

#[test]
fn bad_config_is_rejected_before_work() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "schema_version = 2\n[terrain]\ncell_size_m = 10.0\nsynth = { kind = \"flat\" }\nsize = [2, 2]\n[profile]\nbuiltin = \"wheeled\"\n").unwrap();
    let o = run(&["ingest"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema_version"));

    fs::write(&cfg, "schema_version = 1\ncolour = 3\n").unwrap();
    assert_eq!(run(&["ingest"], &cfg, dir.path()).status.code(), Some(1));
}

#[test]
fn json_configs_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"schema_version": 1, "terrain": {"synth": {"kind": "flat"}, "size": [2, 2], "cell_size_m": 10.0},
            "profile": {"builtin": "quadruped"},
            "mission": {"err": 1.0, "trt_s": 60.0, "tfs": 2, "epoch_s": 15.0}}"#,
    )
    .unwrap();
    let o = run(&["plan"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("fleet 1:"));
}
