//! `reachxfer`: solve value fields, reconstruct transfers and extract Pareto
//! fronts from a scenario file. All printed and written quantities are SI.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use reachxfer::io::{
    front_csv, front_plot_data, front_set_csv, read_field, read_header, trajectory_csv, write_field, write_text,
};
use reachxfer::pareto::{bolza_front, mayer_front};
use reachxfer::systems::{solve_bolza_value_function, solve_value_function};
use reachxfer::trajectory::smooth_controls;
use reachxfer::{BolzaSpec, Error, Reconstructor, RunManifest, Scenario, ValueField};

/// Worker threads cap; unset uses every core.
const THREADS_ENV: &str = "REACHXFER_THREADS";

#[derive(Parser)]
#[command(name = "reachxfer", version, about = "Reachability-based low-thrust transfer design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the planar value function and write it with a manifest.
    Solve(SolveArgs),
    /// Solve the cost-augmented value function of the `[bolza]` section.
    BolzaSolve(SolveArgs),
    /// Reconstruct a transfer from a stored field.
    Trajectory(TrajectoryArgs),
    /// Extract the propellant/time Pareto front from a stored field.
    Pareto(ParetoArgs),
    /// Print the header of a field file.
    Info { field: PathBuf },
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    field: PathBuf,
    /// Transfer time in seconds.
    #[arg(long, allow_negative_numbers = true)]
    tf: f64,
    /// Start on the configured initial orbit with this propellant (kg).
    #[arg(long, conflicts_with = "start")]
    propellant: Option<f64>,
    /// Start state `rho_m,vrho_mps,vt_mps,dm_kg`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    start: Option<Vec<f64>>,
    /// Cost bound in kg (Bolza fields).
    #[arg(long, allow_negative_numbers = true)]
    z: Option<f64>,
    /// Integration steps; defaults to the scenario value.
    #[arg(long)]
    steps: Option<usize>,
    /// Reconstruct even when the start is infeasible.
    #[arg(long)]
    force: bool,
    #[arg(long)]
    out: PathBuf,
    /// Also write the controls smoothed over the configured window.
    #[arg(long)]
    smoothed: Option<PathBuf>,
}

#[derive(Args)]
struct ParetoArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    field: PathBuf,
    /// Front CSV.
    #[arg(long)]
    out: PathBuf,
    /// Two-column plot data (grams, seconds).
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Start states of the front members.
    #[arg(long)]
    set: Option<PathBuf>,
}

/// An error with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_) | Error::Grid(_) | Error::Domain(_) => 2,
            Error::Infeasible { .. } => 3,
            Error::EmptyFront(_) => 4,
            Error::NonFinite { .. } | Error::Cfl { .. } | Error::Integration(_) => 5,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn load_scenario(path: &Path) -> Outcome<Scenario> {
    Scenario::from_file(path).map_err(|e| Failure::config(e.to_string()))
}

fn manifest_path(field: &Path) -> PathBuf {
    let mut name = field.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Loads a field and checks that its manifest, when present, names this scenario.
fn load_field(path: &Path, s: &Scenario) -> Outcome<ValueField> {
    let manifest = manifest_path(path);
    if manifest.exists() {
        let m = RunManifest::read(&manifest)?;
        if m.scenario_hash != s.hash {
            return Err(Failure::config(format!(
                "{} was solved for scenario {}, the config hashes to {}",
                path.display(),
                m.scenario_hash,
                s.hash
            )));
        }
    }
    Ok(read_field(path)?)
}

fn megabytes(bytes: usize) -> f64 {
    bytes as f64 / (1024.0 * 1024.0)
}

fn solve(args: &SolveArgs, bolza: bool) -> Outcome {
    let s = load_scenario(&args.config)?;
    if bolza && s.bolza.is_none() {
        return Err(Failure::config(format!("{}: missing [bolza] section", args.config.display())));
    }
    let start = Instant::now();
    let total = s.stamp_count;
    let progress = |k: usize, t: f64| eprintln!("stamp {k}/{} at t = {:.1} s", total - 1, s.normalization.time_to_si(t));
    let field = if bolza {
        solve_bolza_value_function(&s, progress)?
    } else {
        solve_value_function(&s, progress)?
    };
    let solve_secs = start.elapsed().as_secs_f64();
    write_field(&field, &args.out)?;
    let command = if bolza { "bolza-solve" } else { "solve" };
    let horizon_s = s.normalization.time_to_si(s.horizon);
    let mut manifest = RunManifest::new(command, &s.hash, &field, s.solver, horizon_s);
    manifest.timings.insert("solve_s".into(), solve_secs);
    manifest.timings.insert("total_s".into(), start.elapsed().as_secs_f64());
    manifest.write(&manifest_path(&args.out))?;
    // Stored slices plus the solver's working copies (value, stages, derivatives).
    let working = 8 * std::mem::size_of::<f64>() * field.grid().len();
    println!("wrote {} ({} stamps)", args.out.display(), field.stamps().len());
    println!("wall time: {solve_secs:.2} s");
    println!(
        "peak memory estimate: {:.1} MiB (field {:.1} MiB + working set {:.1} MiB)",
        megabytes(field.storage_bytes() + working),
        megabytes(field.storage_bytes()),
        megabytes(working)
    );
    Ok(())
}

fn trajectory(args: &TrajectoryArgs) -> Outcome {
    let s = load_scenario(&args.config)?;
    let field = load_field(&args.field, &s)?;
    let n = &s.normalization;
    let x0 = match (&args.start, args.propellant) {
        (Some(v), _) if v.len() == 4 => n.coords_from_si([v[0], v[1], v[2], v[3]]),
        (Some(v), _) => return Err(Failure::config(format!("--start needs 4 values, got {}", v.len()))),
        (None, Some(kg)) => s.initial_coords(kg),
        (None, None) => return Err(Failure::config("give --start or --propellant")),
    };
    let model = s.model();
    let (k, c) = (s.constraints(), s.target_set());
    let spec = s.bolza.as_ref().map(|b| BolzaSpec::from_objective(b.objective, &model));
    let z0: Vec<f64> = match (field.grid().dim(), args.z, &spec) {
        (4, None, _) => Vec::new(),
        (5, Some(z), Some(_)) => vec![n.mass_from_si(z)],
        (5, None, _) => return Err(Failure::config("a cost-augmented field needs --z")),
        (4, Some(_), _) => return Err(Failure::config("--z needs a cost-augmented field")),
        (d, ..) => return Err(Failure::config(format!("cannot reconstruct on a {d}-dimensional field"))),
    };
    let r = Reconstructor {
        bolza: if z0.is_empty() { None } else { spec.as_ref() },
        ..Reconstructor::mayer(&field, &model, &k, &c)
    };
    let mut opts = s.reconstruct_options();
    opts.steps = args.steps.unwrap_or(opts.steps);
    opts.force = args.force;
    let start = Instant::now();
    let traj = match r.reconstruct(x0, &z0, n.time_from_si(args.tf), &opts) {
        Ok(t) => t,
        Err(Error::LeftGrid { step, steps, partial }) => {
            write_text(&args.out, &trajectory_csv(&partial, n, s.spacecraft.max_thrust)?)?;
            return Err(Failure {
                code: 1,
                message: format!("trajectory left the grid at step {step} of {steps}; partial path written"),
            });
        }
        Err(e) => return Err(e.into()),
    };
    write_text(&args.out, &trajectory_csv(&traj, n, s.spacecraft.max_thrust)?)?;
    if let Some(path) = &args.smoothed {
        let smooth = smooth_controls(&traj, s.trajectory.smoothing_window)?;
        write_text(path, &trajectory_csv(&smooth, n, s.spacecraft.max_thrust)?)?;
    }
    let misses = [
        n.length_to_si(traj.misses[0]),
        n.velocity_to_si(traj.misses[1]),
        n.velocity_to_si(traj.misses[2]),
    ];
    println!("wrote {} ({} samples)", args.out.display(), traj.samples.len());
    println!("|rho_final - rho_target|   = {:.3} m", misses[0]);
    println!("|vrho_final - vrho_target| = {:.3e} m/s", misses[1]);
    println!("|vt_final - vt_target|     = {:.3e} m/s", misses[2]);
    println!("propellant used            = {:.4} g", n.mass_to_si(traj.propellant_used()) * 1e3);
    println!("thrust duty cycle          = {:.3}", traj.duty_cycle());
    println!("initial value              = {:.3e}", traj.samples[0].value);
    println!("wall time                  = {:.2} s", start.elapsed().as_secs_f64());
    Ok(())
}

fn pareto(args: &ParetoArgs) -> Outcome {
    let s = load_scenario(&args.config)?;
    let field = load_field(&args.field, &s)?;
    let n = &s.normalization;
    let start = Instant::now();
    let res = match field.grid().dim() {
        4 => mayer_front(&field, s.initial_orbit(), s.mayer_scan())?,
        5 => {
            let (Some(start), Some(scan)) = (s.bolza_start(), s.bolza_scan()) else {
                return Err(Failure::config("a cost-augmented field needs the [bolza] section"));
            };
            bolza_front(&field, start, scan)?
        }
        d => return Err(Failure::config(format!("cannot scan a {d}-dimensional field"))),
    };
    write_text(&args.out, &front_csv(&res, n)?)?;
    if let Some(path) = &args.plot {
        write_text(path, &front_plot_data(&res, n))?;
    }
    if let Some(path) = &args.set {
        write_text(path, &front_set_csv(&res, n)?)?;
    }
    let (fast, cheap) = (res.min_time().unwrap(), res.min_cost().unwrap());
    println!("wrote {} ({} front points of {} candidates)", args.out.display(), res.front.len(), res.candidates.len());
    println!("min t_f: {:.0} s at J1 = {:.3} g", n.time_to_si(fast.tf), n.mass_to_si(fast.objectives[0]) * 1e3);
    println!("min J1: {:.3} g at t_f = {:.0} s", n.mass_to_si(cheap.objectives[0]) * 1e3, n.time_to_si(cheap.tf));
    println!("wall time: {:.2} s", start.elapsed().as_secs_f64());
    Ok(())
}

fn info(path: &Path) -> Outcome {
    let (grid, stamps, bytes) = read_header(path)?;
    println!("file: {} ({bytes} bytes)", path.display());
    println!("dimensions: {}", grid.dim());
    for (k, a) in grid.axes().iter().enumerate() {
        let wrap = if a.periodic { " periodic" } else { "" };
        println!("  axis {k}: [{}, {}] with {} points{wrap}", a.min, a.max, a.count);
    }
    match (stamps.first(), stamps.last()) {
        (Some(first), Some(last)) => println!("stamps: {} from {first} to {last} (normalized)", stamps.len()),
        _ => println!("stamps: 0"),
    }
    let manifest = manifest_path(path);
    if manifest.exists() {
        let m = RunManifest::read(&manifest)?;
        println!("scenario: {}", m.scenario_hash);
        println!("command: {}, horizon {} s", m.command, m.horizon_s);
    }
    Ok(())
}

fn configure_threads() -> Outcome {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::config(e.to_string()))
}

fn run(cli: &Cli) -> Outcome {
    configure_threads()?;
    match &cli.command {
        Command::Solve(a) => solve(a, false),
        Command::BolzaSolve(a) => solve(a, true),
        Command::Trajectory(a) => trajectory(a),
        Command::Pareto(a) => pareto(a),
        Command::Info { field } => info(field),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
