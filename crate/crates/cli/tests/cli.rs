use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_reachxfer");

/// The coarse scenario shrunk to a [9 7 7 7] grid so each solve takes about a second.
fn tiny_config(dir: &Path) -> PathBuf {
    let base = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/castalia_coarse.toml");
    let text = fs::read_to_string(base)
        .unwrap()
        .replace("points = 16 }", "points = 9 }")
        .replace("points = 12 }", "points = 7 }")
        .replace("max_normalized = 0.1533, points = 8 }", "max_normalized = 0.1533, points = 7 }")
        .replace("stamps = 41", "stamps = 21")
        .replace("tf_points = 81", "tf_points = 21");
    let path = dir.join("tiny.toml");
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Solves the tiny scenario into `dir/name`.
fn solve(dir: &Path, config: &Path, name: &str) -> PathBuf {
    let out = dir.join(name);
    let o = run(&["solve", "--config", s(config), "--out", s(&out)], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

struct Setup {
    dir: TempDir,
    config: PathBuf,
    field: PathBuf,
}

fn setup() -> Setup {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let field = solve(dir.path(), &config, "f.hjvf");
    Setup { dir, config, field }
}

#[test]
fn solve_is_reproducible_and_reports_cost() {
    let t = setup();
    let again = solve(t.dir.path(), &t.config, "g.hjvf");
    assert_eq!(fs::read(&t.field).unwrap(), fs::read(&again).unwrap());
    // Header plus 9*7*7*7 nodes by 21 stamps of single precision.
    assert!(fs::metadata(&t.field).unwrap().len() > 9 * 7 * 7 * 7 * 21 * 4);
    let manifest = fs::read_to_string(t.dir.path().join("f.hjvf.manifest.json")).unwrap();
    assert!(manifest.contains("scenario_hash") && manifest.contains("field_sha256"));
    let o = run(&["solve", "--config", s(&t.config), "--out", s(&t.dir.path().join("h.hjvf"))], &[("REACHXFER_THREADS", "1")]);
    let text = stdout(&o);
    assert!(text.contains("wall time") && text.contains("peak memory estimate"));
}

#[test]
fn info_prints_the_header() {
    let t = setup();
    let o = run(&["info", s(&t.field)], &[]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("dimensions: 4"));
    assert!(text.contains("with 9 points") && text.contains("stamps: 21"));
    assert!(text.contains("scenario: "));
}

#[test]
fn config_errors_exit_2_and_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let text = fs::read_to_string(&config).unwrap();
    let missing = dir.path().join("missing.toml");
    fs::write(&missing, text.replace("mass_kg = 1.4091e12\n", "")).unwrap();
    let o = run(&["solve", "--config", s(&missing), "--out", s(&dir.path().join("x"))], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mass_kg"), "{}", stderr(&o));

    let broken = dir.path().join("broken.toml");
    fs::write(&broken, text.replace("cfl = 0.5", "cfl = = 0.5")).unwrap();
    let o = run(&["solve", "--config", s(&broken), "--out", s(&dir.path().join("x"))], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 38"), "{}", stderr(&o));

    let o = run(&["info", "nowhere.hjvf"], &[("REACHXFER_THREADS", "zero")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn manifest_mismatch_is_a_config_error() {
    let t = setup();
    let other = t.dir.path().join("other.toml");
    let text = fs::read_to_string(&t.config).unwrap().replace("scan_points = 41", "scan_points = 21");
    fs::write(&other, text).unwrap();
    let front = t.dir.path().join("front.csv");
    let o = run(&["pareto", "--config", s(&other), "--field", s(&t.field), "--out", s(&front)], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("was solved for scenario"));
}

#[test]
fn trajectory_outputs_and_exit_codes() {
    let t = setup();
    let d = t.dir.path();
    // Zero transfer time from the target center: a single row.
    let out = d.join("t0.csv");
    let o = run(
        &["trajectory", "--config", s(&t.config), "--field", s(&t.field), "--tf", "0", "--start", "6117.5,0,-2.747,0.05", "--out", s(&out)],
        &[],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 2);
    assert!(stdout(&o).contains("|rho_final - rho_target|   = 0.000 m"));

    // Fast outward drift far from the target after 10 s: infeasible.
    let args = ["trajectory", "--config", s(&t.config), "--field", s(&t.field), "--tf", "10", "--start", "6117.5,2.7,-2.747,0.05"];
    let o = run(&[&args[..], &["--out", s(&d.join("bad.csv"))]].concat(), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let forced = d.join("forced.csv");
    let smooth = d.join("smooth.csv");
    let o = run(&[&args[..], &["--force", "--steps", "50", "--out", s(&forced), "--smoothed", s(&smooth)]].concat(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = fs::read_to_string(&forced).unwrap();
    assert_eq!(rows.lines().count(), 52);
    assert!(rows.starts_with("s,rho_m,theta_rad,vrho_mps,vt_mps,dm_kg,alpha_rad,thrust_N,omega_hat"));
    assert_eq!(fs::read_to_string(&smooth).unwrap().lines().count(), 52);

    // Same inputs, same bytes.
    let again = d.join("again.csv");
    run(&[&args[..], &["--force", "--steps", "50", "--out", s(&again)]].concat(), &[]);
    assert_eq!(fs::read(&forced).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn pareto_writes_front_and_plot_data() {
    let t = setup();
    let d = t.dir.path();
    let (front, plot, set) = (d.join("front.csv"), d.join("front.dat"), d.join("set.csv"));
    let args = [
        "pareto", "--config", s(&t.config), "--field", s(&t.field), "--out", s(&front), "--plot", s(&plot), "--set", s(&set),
    ];
    let o = run(&args, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<Vec<f64>> = fs::read_to_string(&front)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!(!rows.is_empty());
    // Propellant in kg, time in seconds, trading off along the front.
    for w in rows.windows(2) {
        assert!(w[0][0] <= w[1][0] && w[0][1] >= w[1][1]);
    }
    assert!(rows.iter().all(|r| (0.0..=0.1).contains(&r[0]) && (0.0..=4000.0 + 1e-6).contains(&r[1])));
    let plot_text = fs::read_to_string(&plot).unwrap();
    let first = plot_text.lines().nth(1).unwrap();
    let cols: Vec<f64> = first.split_whitespace().map(|v| v.parse().unwrap()).collect();
    assert_eq!(cols.len(), 2);
    assert!((cols[0] - rows[0][0] * 1e3).abs() < 1e-9);
    assert_eq!(fs::read_to_string(&set).unwrap().lines().count(), rows.len() + 1);

    let before = fs::read(&front).unwrap();
    run(&args, &[]);
    assert_eq!(before, fs::read(&front).unwrap());
}

#[test]
fn empty_front_exits_4_with_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("short.toml");
    let text = fs::read_to_string(tiny_config(dir.path()))
        .unwrap()
        .replace("horizon_s = 4000.0", "horizon_s = 300.0")
        .replace("tf_max_s = 4000.0", "tf_max_s = 300.0");
    fs::write(&config, text).unwrap();
    let field = solve(dir.path(), &config, "short.hjvf");
    let o = run(&["pareto", "--config", s(&config), "--field", s(&field), "--out", s(&dir.path().join("f.csv"))], &[]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("no feasible point for t_f in"), "{}", stderr(&o));
}
