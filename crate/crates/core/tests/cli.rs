use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::atomic::AtomicBool;

use bec2::cli::{self, parse_config, Context, RunConfig, RunSummary, TableFormat};
use bec2::{Error, MatterState};

const BASE: &str = r#"
[[species]]
mass = 1.0
detuning = 40.0
dipole_moment = 0.3
group_velocity = 1.0
peak_rabi = 6.0

[[species]]
mass = 1.7
detuning = -25.0
dipole_moment = 0.25
group_velocity = 1.4
peak_rabi = 5.0

[field]
envelope_width = 4.0
"#;

static NEVER: AtomicBool = AtomicBool::new(false);
static ALWAYS: AtomicBool = AtomicBool::new(true);

fn ctx(out: &Path) -> Context<'static> {
    Context {
        out: out.to_path_buf(),
        format: None,
        jobs: 1,
        cancel: &NEVER,
    }
}

fn config(extra: &str) -> RunConfig {
    parse_config(&format!("{BASE}\n{extra}")).unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn assert_manifest(summary: &RunSummary, root: &Path) {
    assert!(!summary.files.is_empty());
    assert!(summary.verify(root).is_empty(), "checksum mismatch");
    let on_disk: serde_json::Value = serde_json::from_str(&fs::read_to_string(root.join("summary.json")).unwrap()).unwrap();
    assert_eq!(on_disk["files"].as_array().unwrap().len(), summary.files.len());
}

#[test]
fn index_at_zero_density() {
    let dir = tempfile::tempdir().unwrap();
    let s = cli::cmd_index(&config(""), &ctx(dir.path())).unwrap();
    assert_manifest(&s, dir.path());
    let rows = read_csv(&dir.path().join("index.csv"));
    assert_eq!(rows, vec![vec!["0.0", "0.0", "0.0", "0.0", "1.0", "0.0", "ok"]]);
}

#[test]
fn index_sweep_flags_the_pole() {
    let dir = tempfile::tempdir().unwrap();
    // (4π/3)ε₂ runs from 0 to 2; the middle point sits on the pole
    let stop = 2.0 * 3.0 / (4.0 * std::f64::consts::PI);
    let cfg = config(&format!(
        "[[sweep]]\nparameter = \"mixture.epsilon.1\"\nstart = 0.0\nstop = {stop:?}\ncount = 11\n"
    ));
    let s = cli::cmd_index(&cfg, &ctx(dir.path())).unwrap();
    assert_manifest(&s, dir.path());
    let rows = read_csv(&dir.path().join("index.csv"));
    assert_eq!(rows.len(), 11);
    let flags: Vec<&str> = rows.iter().map(|r| r[6].as_str()).collect();
    assert_eq!(flags[5], "singular");
    assert_eq!(flags.iter().filter(|f| **f == "singular").count(), 1);
    for (i, r) in rows.iter().enumerate() {
        if i != 5 {
            assert!(r[3].parse::<f64>().unwrap().is_finite(), "row {i}: {r:?}");
        }
    }
    // past the pole n² < 0 until 1 + (8π/3)S crosses zero, never here
    assert!(flags[6..].iter().all(|f| *f == "ok" || *f == "evanescent"));
}

#[test]
fn chi_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("[mixture]\nepsilon = [-0.002, 0.01]\n");
    let mut c = ctx(dir.path());
    c.format = Some(TableFormat::Json);
    cli::cmd_chi(&cfg, &c).unwrap();
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("chi.json")).unwrap()).unwrap();
    let s = 0.008;
    let chi = v[0]["chi"].as_f64().unwrap();
    assert!((chi - s / (1.0 - 4.0 * std::f64::consts::PI / 3.0 * s)).abs() < 1e-15);
    assert_eq!(v[0]["flag"], "ok");
}

#[test]
fn diffract_without_light_stays_in_zeroth_order() {
    let dir = tempfile::tempdir().unwrap();
    let text = BASE.replace("peak_rabi = 6.0", "peak_rabi = 0.0").replace("peak_rabi = 5.0", "peak_rabi = 0.0");
    let cfg = parse_config(&text).unwrap();
    cli::cmd_diffract(&cfg, &ctx(dir.path())).unwrap();
    for row in read_csv(&dir.path().join("spectrum.csv")) {
        let p: f64 = row[2].parse().unwrap();
        assert_eq!(p, if row[1] == "0" { 1.0 } else { 0.0 }, "{row:?}");
    }
}

#[test]
fn diffract_reports_overlapping_angles() {
    let dir = tempfile::tempdir().unwrap();
    // m₁v₁ = m₂v₂ = 1.7
    let text = BASE
        .replacen("group_velocity = 1.0", "group_velocity = 1.7", 1)
        .replace("group_velocity = 1.4", "group_velocity = 1.0");
    let s = cli::cmd_diffract(&parse_config(&text).unwrap(), &ctx(dir.path())).unwrap();
    let d = s.derived.unwrap();
    assert!(d.angles_coincide);
    assert!(!d.separated);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["derived"]["angles_coincide"], true);
}

#[test]
fn diffract_is_deterministic() {
    let cfg = config("[mixture]\ndensities = [0.01, 0.02]\n");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let sa = cli::cmd_diffract(&cfg, &ctx(a.path())).unwrap();
    let sb = cli::cmd_diffract(&cfg, &ctx(b.path())).unwrap();
    assert_manifest(&sa, a.path());
    assert_eq!(sa.files, sb.files);
    assert_eq!(
        fs::read(a.path().join("summary.json")).unwrap(),
        fs::read(b.path().join("summary.json")).unwrap()
    );
    let names: Vec<&str> = sa.files.iter().map(|f| f.path.as_str()).collect();
    assert_eq!(names, ["config.resolved.toml", "plot.gp", "plot_data.csv", "spectrum.csv"]);
    // the echoed config re-parses to the same run
    let echo = fs::read_to_string(a.path().join("config.resolved.toml")).unwrap();
    assert_eq!(parse_config(&echo).unwrap(), cfg);
}

#[test]
fn simulate_matches_diffract() {
    let cfg = config("[mixture]\ndensities = [0.01, 0.02]\n\n[grid]\npoints = 512\nperiods = 16\n");
    let sim = tempfile::tempdir().unwrap();
    let dif = tempfile::tempdir().unwrap();
    let s = cli::cmd_simulate(&cfg, &ctx(sim.path())).unwrap();
    assert!(s.complete);
    assert_manifest(&s, sim.path());
    cli::cmd_diffract(&cfg, &ctx(dif.path())).unwrap();

    let analytic: Vec<(String, String, f64)> = read_csv(&dif.path().join("spectrum.csv"))
        .into_iter()
        .map(|r| (r[0].clone(), r[1].clone(), r[2].parse().unwrap()))
        .collect();
    let orders = read_csv(&sim.path().join("orders.csv"));
    assert!(orders.len() >= 2 * 11);
    let mut worst = 0.0f64;
    for r in &orders {
        let w: f64 = r[2].parse().unwrap();
        let p = analytic
            .iter()
            .find(|(sp, q, _)| *sp == r[0] && *q == r[1])
            .map(|a| a.2)
            .unwrap();
        worst = worst.max((w - p).abs());
    }
    assert!(worst <= 1e-6, "worst deviation {worst:e}");
    let ts = read_csv(&sim.path().join("timeseries.csv"));
    assert_eq!(ts.len(), 2000 / 100 + 1);
}

#[test]
fn simulate_zero_steps_writes_initial_snapshot_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("[mixture]\ndensities = [0.01, 0.02]\n\n[evolve]\nsteps = 0\nsnapshot_format = \"binary\"\n");
    let s = cli::cmd_simulate(&cfg, &ctx(dir.path())).unwrap();
    let names: Vec<&str> = s.files.iter().map(|f| f.path.as_str()).collect();
    assert_eq!(
        names,
        ["config.resolved.toml", "snapshots/step_000000.bin", "snapshots/step_000000.json"]
    );
    let state = cli::load_snapshot(&dir.path().join("snapshots/step_000000.bin")).unwrap();
    let grid = state.grid;
    let rho = s.parameters.unwrap().densities;
    assert_eq!(state, MatterState::uniform(grid, rho));
}

#[test]
fn simulate_restarts_from_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let cfg = config("[mixture]\ndensities = [0.01, 0.02]\n\n[grid]\npoints = 256\nperiods = 8\n\n[evolve]\nsteps = 200\nobserve_every = 200\nkinetic = \"on\"\n");
    cli::cmd_simulate(&cfg, &ctx(&first)).unwrap();
    let mut restart = cfg.clone();
    restart.grid.packet = cli::config::Packet::File;
    restart.grid.file = Some(first.join("snapshots/step_000200.csv"));
    restart.evolve.steps = 0;
    let second = dir.path().join("second");
    cli::cmd_simulate(&restart, &ctx(&second)).unwrap();
    assert_eq!(
        fs::read(first.join("snapshots/step_000200.csv")).unwrap(),
        fs::read(second.join("snapshots/step_000000.csv")).unwrap()
    );
}

#[test]
fn interrupted_simulation_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("[mixture]\ndensities = [0.01, 0.02]\n\n[grid]\npoints = 64\nperiods = 4\n");
    let c = Context {
        cancel: &ALWAYS,
        ..ctx(dir.path())
    };
    let s = cli::cmd_simulate(&cfg, &c).unwrap();
    assert!(!s.complete);
    assert_manifest(&s, dir.path());
    assert!(!dir.path().join("orders.csv").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["complete"], false);
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let cfg = config(
        "[mixture]\ndensities = [0.01, 0.02]\n\n\
         [[sweep]]\nparameter = \"species.0.peak_rabi\"\nstart = 2.0\nstop = 8.0\ncount = 4\n\n\
         [[sweep]]\nparameter = \"species.1.detuning\"\nstart = -30.0\nstop = -20.0\ncount = 3\n",
    );
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let sa = cli::cmd_sweep(&cfg, &ctx(a.path())).unwrap();
    let sb = cli::cmd_sweep(&cfg, &Context { jobs: 4, ..ctx(b.path()) }).unwrap();
    assert_manifest(&sa, a.path());
    assert_eq!(sa.files, sb.files);
    let rows = read_csv(&a.path().join("sweep.csv"));
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r[2] == "ok"));
    assert!(a.path().join("points/0011/spectrum.csv").exists());
}

#[test]
fn sweep_rows_failing_points() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("[[sweep]]\nparameter = \"species.0.detuning\"\nstart = -1.0\nstop = 1.0\ncount = 3\n");
    cli::cmd_sweep(&cfg, &ctx(dir.path())).unwrap();
    let rows = read_csv(&dir.path().join("sweep.csv"));
    let status: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(status, ["ok", "invalid", "ok"]);
}

#[test]
fn singular_config_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let eps = 3.0 / (4.0 * std::f64::consts::PI);
    let cfg = config(&format!("[mixture]\nepsilon = [0.0, {eps:?}]\n"));
    let err = cli::cmd_diffract(&cfg, &ctx(dir.path())).unwrap_err();
    assert!(matches!(err, Error::SingularMedium { .. }), "{err}");
    assert_eq!(cli::exit_code(&err), cli::EXIT_SINGULAR);
}

fn bec2() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bec2"))
}

#[test]
fn binary_exit_codes_and_env_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    fs::write(&good, BASE).unwrap();
    let out = dir.path().join("from-env");
    let status = bec2()
        .args(["diffract", "--config"])
        .arg(&good)
        .env("BEC2_OUT", &out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("spectrum.csv").exists());

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, BASE.replacen("mass = 1.0", "mass = -1.0", 1)).unwrap();
    let o = bec2()
        .args(["diffract", "--out"])
        .arg(dir.path().join("x"))
        .arg("--config")
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(cli::EXIT_INVALID));
    assert!(String::from_utf8_lossy(&o.stderr).contains("species[0].mass"));

    let pole = dir.path().join("pole.toml");
    let eps = 3.0 / (4.0 * std::f64::consts::PI);
    fs::write(&pole, format!("{BASE}\n[mixture]\nepsilon = [0.0, {eps:?}]\n")).unwrap();
    let status = bec2()
        .args(["diffract", "--seedless", "--config"])
        .arg(&pole)
        .arg("--out")
        .arg(dir.path().join("y"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(cli::EXIT_SINGULAR));

    let status = bec2()
        .args(["index", "--config"])
        .arg(dir.path().join("missing.toml"))
        .arg("--out")
        .arg(dir.path().join("z"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(cli::EXIT_IO));
}
