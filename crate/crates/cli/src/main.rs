use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use scope_dlo::bench::{self, BenchTask};
use scope_dlo::geometry::max_length_error;
use scope_dlo::scope::WarmStart;
use scope_dlo::{PlanOutcome, PlanStatus, PlannerRegistry, PlannerSettings, RenderStyle, Scene, Trajectory};

/// Worker threads for `bench`; defaults to 1 so timings are not contended.
const THREADS_ENV: &str = "SCOPE_DLO_THREADS";

#[derive(Parser)]
#[command(name = "scope-dlo", version, about = "Plan, benchmark and draw cable shape trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one scene and write the trajectory as JSON.
    Plan(PlanArgs),
    /// Compare both planners and emit a CSV table.
    Bench(BenchArgs),
    /// Draw one or two trajectory files as SVG.
    Render(RenderArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Scope,
    Energy,
    Both,
}

#[derive(clap::Args)]
struct PlanArgs {
    /// Scene JSON file.
    scene: PathBuf,
    #[arg(long, value_enum, default_value = "scope")]
    method: MethodArg,
    /// Output file. With `--method both`, `.scope.json` and `.energy.json`
    /// replace the extension.
    #[arg(long)]
    out: PathBuf,
    /// ADMM penalty parameter.
    #[arg(long)]
    rho: Option<f64>,
    /// ADMM primal and dual residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// ADMM iteration cap.
    #[arg(long)]
    max_iters: Option<usize>,
    /// ADMM starting point.
    #[arg(long, value_enum)]
    warm_start: Option<WarmStartArg>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WarmStartArg {
    Guide,
    Zero,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Standard,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long, value_enum, conflicts_with = "scene", required_unless_present = "scene")]
    suite: Option<Suite>,
    /// Benchmark a single scene file instead of a suite.
    #[arg(long)]
    scene: Option<PathBuf>,
    #[arg(long, default_value_t = bench::DEFAULT_REPEATS)]
    repeats: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also dump full results, trajectories included, to this JSON file.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(clap::Args)]
struct RenderArgs {
    /// Trajectory files; the second one is drawn dashed.
    #[arg(required = true, num_args = 1..=2)]
    files: Vec<PathBuf>,
    /// JSON style file; unspecified fields keep their defaults.
    #[arg(long)]
    style: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_scene(path: &Path) -> Result<Scene> {
    Scene::from_json(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn suffixed(out: &Path, suffix: &str) -> PathBuf {
    out.with_extension(format!("{suffix}.json"))
}

fn plan(args: PlanArgs) -> Result<ExitCode> {
    let scene = load_scene(&args.scene)?;
    let mut settings = PlannerSettings::default();
    if let Some(rho) = args.rho {
        settings.scope.penalty_rho = rho;
    }
    if let Some(tol) = args.tol {
        settings.scope.primal_tolerance = tol;
        settings.scope.dual_tolerance = tol;
    }
    if let Some(n) = args.max_iters {
        settings.scope.max_iterations = n;
    }
    if let Some(w) = args.warm_start {
        settings.scope.warm_start = match w {
            WarmStartArg::Guide => WarmStart::Guide,
            WarmStartArg::Zero => WarmStart::Zero,
        };
    }
    settings.scope.validate()?;

    let registry = PlannerRegistry::builtin();
    let jobs: Vec<(&str, PathBuf)> = match args.method {
        MethodArg::Scope => vec![("scope", args.out.clone())],
        MethodArg::Energy => vec![("energy", args.out.clone())],
        MethodArg::Both => vec![
            ("scope", suffixed(&args.out, "scope")),
            ("energy", suffixed(&args.out, "energy")),
        ],
    };
    let mut all_converged = true;
    for (name, path) in jobs {
        let outcome: PlanOutcome = registry.get(name)?.plan(&scene, &settings)?;
        write(&path, &serde_json::to_string_pretty(&outcome)?)?;
        let err = max_length_error(&outcome.trajectory, &scene.params)?;
        println!(
            "{}: status={:?} objective={:.6e} max_length_error={:.4e} m ({:.3} cm) time={:.3e} s -> {}",
            outcome.method,
            outcome.status,
            outcome.objective,
            err,
            err * 100.0,
            outcome.assembly_time_s + outcome.solve_time_s,
            path.display()
        );
        all_converged &= outcome.status == PlanStatus::Converged;
    }
    Ok(if all_converged { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn threads() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .with_context(|| format!("{THREADS_ENV} must be a positive integer, got {v:?}")),
        Err(_) => Ok(1),
    }
}

fn run_bench(args: BenchArgs) -> Result<ExitCode> {
    if args.repeats == 0 {
        bail!("--repeats must be at least 1");
    }
    let mut tasks = match (&args.suite, &args.scene) {
        (Some(Suite::Standard), _) => bench::standard_suite(),
        (None, Some(path)) => {
            let scene = load_scene(path)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "scene".into());
            vec![BenchTask::from_scene(name, &scene)]
        }
        (None, None) => bail!("one of --suite or --scene is required"),
    };
    for t in &mut tasks {
        t.repeats = args.repeats;
    }
    let results = bench::run_suite(&tasks, threads()?);

    let csv = bench::emit_table(&results);
    match &args.out {
        Some(path) => {
            write(path, &csv)?;
            print!("{}", bench::format_report(&results));
        }
        None => print!("{csv}"),
    }
    if let Some(path) = &args.json {
        let flat: Vec<_> = results.iter().flat_map(|(s, e)| [s, e]).collect();
        write(path, &serde_json::to_string_pretty(&flat)?)?;
    }

    let mut failed = false;
    for r in results.iter().flat_map(|(s, e)| [s, e]) {
        if let Some(msg) = &r.error {
            eprintln!("error: {} {}: {msg}", r.task, r.method);
            failed = true;
        }
    }
    Ok(if failed { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

/// Accepts a planner output file or a bare `[T][N][2]` array.
fn load_trajectory(path: &Path) -> Result<Trajectory> {
    let text = read(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{}", path.display()))?;
    let traj = match value {
        serde_json::Value::Object(mut map) => match map.remove("trajectory") {
            Some(t) => serde_json::from_value(t),
            None => bail!("{}: no \"trajectory\" field", path.display()),
        },
        other => serde_json::from_value(other),
    };
    traj.with_context(|| format!("{}: invalid trajectory", path.display()))
}

fn render(args: RenderArgs) -> Result<ExitCode> {
    let style = match &args.style {
        Some(p) => serde_json::from_str::<RenderStyle>(&read(p)?)
            .with_context(|| format!("{}", p.display()))?,
        None => RenderStyle::default(),
    };
    let trajs = args
        .files
        .iter()
        .map(|p| load_trajectory(p))
        .collect::<Result<Vec<_>>>()?;
    let svg = scope_dlo::render_svg(&trajs, &style)?;
    write(&args.out, &svg)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let msg = e.to_string();
            let text: Vec<&str> = msg
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("error: {}", text.join(" ").trim_start_matches("error: "));
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let result = match cli.command {
        Command::Plan(a) => plan(a),
        Command::Bench(a) => run_bench(a),
        Command::Render(a) => render(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            // One line: the context chain joined.
            let msg: Vec<String> = e.chain().map(|c| c.to_string()).collect();
            eprintln!("error: {}", msg.join(": "));
            ExitCode::from(1)
        }
    }
}
