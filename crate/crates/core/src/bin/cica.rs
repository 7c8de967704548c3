use cica::cdf_engine::{mixture_pushforward_cdf, MixingMatrix2, QuadConfig};
use cica::config::{format_matrix, parse_list, parse_matrix, Config, DEFAULT_SEED};
use cica::distributions::ComponentLaw;
use cica::empirical::{EvalGridSpec, GridMode};
use cica::limitfield::{simulate_limit_sup, LimitConfig, DEFAULT_N0};
use cica::montecarlo::{run_sweep, write_csv, Preset, Scale};
use cica::signed_measure::{gamma_k_at, EvalGrid, NuMeasure};
use cica::svg::{parse_sweep_csv, render_svg, XAxis};
use cica::verify::{run_checks, write_reports, CheckContext, CheckId};
use cica::{Error, Result};
use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cica", version, about = "Identifiability experiments for ICA with contaminated Gaussian errors")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Monte Carlo sweep of the exceedance probability over (rho, n)
    Experiment(ExperimentArgs),
    /// Draws of the sup of the limiting Gaussian field
    Limit(LimitArgs),
    /// Numerical checks of the expansion, bounds and decay results
    Verify(VerifyArgs),
    /// Evaluate F^A_beta at one point
    Cdf(CdfArgs),
    /// Tabulate an expansion coefficient Gamma_k(A) on a grid
    Gamma(GammaArgs),
    /// Render a sweep CSV as an SVG line chart
    Plot(PlotArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, default_value = "desk")]
    scale: String,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    /// comma-separated
    #[arg(long)]
    rho: Option<String>,
    /// comma-separated
    #[arg(long)]
    n_list: Option<String>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    grid_mode: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// thread count; results do not depend on it
    #[arg(long)]
    workers: Option<usize>,
    /// record wall-clock times in the CSV
    #[arg(long)]
    timing: bool,
    /// use Exp(1) instead of Exp(1) - 1 as the contaminating law
    #[arg(long)]
    uncentered_xi: bool,
}

#[derive(Args)]
struct LimitArgs {
    /// a11,a12,a21,a22; defaults to the lower matrix of the pair at alpha = 0.4
    #[arg(long)]
    matrix: Option<String>,
    #[arg(long, default_value_t = DEFAULT_N0)]
    n0: usize,
    #[arg(long, default_value_t = 500)]
    reps: usize,
    #[arg(long, default_value = "1")]
    c_list: String,
    #[arg(long, default_value_t = 500)]
    grid_points: usize,
    #[arg(long, default_value = "corner-subsample")]
    grid_mode: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    check: String,
    #[arg(long, default_value_t = 0.4)]
    alpha: f64,
    #[arg(long)]
    uncentered_xi: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct CdfArgs {
    #[arg(long)]
    matrix: String,
    #[arg(long)]
    beta: f64,
    /// x1,x2
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    #[arg(long)]
    uncentered_xi: bool,
}

#[derive(Args)]
struct GammaArgs {
    #[arg(long)]
    matrix: String,
    #[arg(long)]
    order: usize,
    /// lo,hi,points per axis
    #[arg(long, default_value = "-6,6,101", allow_hyphen_values = true)]
    grid: String,
    #[arg(long)]
    uncentered_xi: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "n")]
    x: String,
    #[arg(long)]
    out: PathBuf,
}

enum Outcome {
    Ok,
    ChecksFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.cmd {
        Cmd::Experiment(a) => with_workers(a.workers, || experiment(a)),
        Cmd::Limit(a) => with_workers(a.workers, || limit(a)),
        Cmd::Verify(a) => with_workers(a.workers, || verify(a)),
        Cmd::Cdf(a) => cdf(a),
        Cmd::Gamma(a) => gamma(a),
        Cmd::Plot(a) => plot(a),
    }
}

fn with_workers<F>(workers: Option<usize>, f: F) -> Result<Outcome>
where
    F: FnOnce() -> Result<Outcome> + Send,
{
    match workers {
        None => f(),
        Some(0) => Err(Error::Invalid("--workers must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Invalid(e.to_string()))?
            .install(f),
    }
}

fn xi(uncentered: bool) -> ComponentLaw {
    if uncentered {
        ComponentLaw::StandardExponential
    } else {
        ComponentLaw::CenteredExponential
    }
}

fn writer(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn experiment(a: ExperimentArgs) -> Result<Outcome> {
    let mut cfg = match &a.config {
        Some(p) => Config::parse(&std::fs::read_to_string(p)?)?,
        None => Config::default(),
    };
    if let Some(v) = a.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if a.uncentered_xi {
        cfg.center_xi = false;
    }
    let label = match &a.preset {
        Some(p) => {
            let preset = Preset::parse(p)?;
            let scale = match a.scale.as_str() {
                "desk" => Scale::Desk,
                "full" => Scale::Full,
                s => return Err(Error::Invalid(format!("scale must be desk or full, got {s:?}"))),
            };
            cfg.validate()?;
            cfg.apply_preset(preset, scale)?;
            format!("{}:{}", preset.name(), a.scale)
        }
        None => "custom".to_string(),
    };
    if let Some(v) = &a.rho {
        cfg.rho_list = parse_list(v, "rho")?;
    }
    if let Some(v) = &a.n_list {
        cfg.n_list = parse_list(v, "n")?;
    }
    if let Some(v) = a.c {
        cfg.c = v;
    }
    if let Some(v) = a.reps {
        cfg.reps = v;
    }
    if let Some(v) = a.grid_points {
        cfg.grid_points = v;
    }
    if let Some(v) = &a.grid_mode {
        cfg.grid_mode = GridMode::parse(v)?;
    }
    if let Some(p) = &a.out {
        cfg.out = Some(p.display().to_string());
    }
    let sweep = cfg.sweep(&label)?;
    let results = run_sweep(&sweep)?;
    let mut meta = vec![("run".to_string(), label)];
    meta.extend(cfg.entries());
    meta.push(("matrix_a_resolved".into(), format_matrix(&sweep.a)));
    meta.push(("matrix_b_resolved".into(), format_matrix(&sweep.b)));
    meta.push(("xi".into(), sweep.xi.name().into()));
    let mut w = writer(cfg.out.as_deref().map(Path::new))?;
    write_csv(&mut w, &meta, &results, a.timing)?;
    w.flush()?;
    Ok(Outcome::Ok)
}

fn limit(a: LimitArgs) -> Result<Outcome> {
    let matrix = match &a.matrix {
        Some(m) => parse_matrix(m)?,
        None => MixingMatrix2::lower_pair(0.4)?,
    };
    let cs: Vec<f64> = parse_list(&a.c_list, "c")?;
    let cfg = LimitConfig {
        a: matrix,
        zeta: ComponentLaw::StandardNormal,
        n0: a.n0,
        reps: a.reps,
        grid: EvalGridSpec {
            mode: GridMode::parse(&a.grid_mode)?,
            points: a.grid_points,
        },
        seed: a.seed,
        quad: QuadConfig::default(),
    };
    let sample = simulate_limit_sup(&cfg)?;
    let mut w = writer(a.out.as_deref())?;
    writeln!(w, "# matrix={}", format_matrix(&matrix))?;
    writeln!(w, "# n0={}", a.n0)?;
    writeln!(w, "# N={}", a.reps)?;
    writeln!(w, "# grid_mode={}", cfg.grid.mode.name())?;
    writeln!(w, "# grid_points={}", a.grid_points)?;
    writeln!(w, "# seed={}", a.seed)?;
    writeln!(w, "# method={}", sample.method)?;
    writeln!(w, "c,survival,stderr")?;
    for c in cs {
        writeln!(w, "{c},{},{}", sample.survival(c), sample.stderr(c))?;
    }
    w.flush()?;
    Ok(Outcome::Ok)
}

fn verify(a: VerifyArgs) -> Result<Outcome> {
    let ids = CheckId::parse(&a.check)?;
    let ctx = CheckContext::pair_defaults(a.alpha, xi(a.uncentered_xi))?;
    let reports = run_checks(&ctx, &ids)?;
    let mut w = writer(a.out.as_deref())?;
    writeln!(w, "# alpha={}", a.alpha)?;
    writeln!(w, "# xi={}", ctx.nu.xi().name())?;
    writeln!(w, "# seed={}", ctx.seed)?;
    writeln!(w, "# grid_points={}", ctx.grid.len())?;
    write_reports(&mut w, &reports)?;
    w.flush()?;
    for r in &reports {
        eprintln!("{} {}", if r.pass() { "PASS" } else { "FAIL" }, r.id);
    }
    Ok(if reports.iter().all(|r| r.pass()) {
        Outcome::Ok
    } else {
        Outcome::ChecksFailed
    })
}

fn cdf(a: CdfArgs) -> Result<Outcome> {
    let m = parse_matrix(&a.matrix)?;
    let x: Vec<f64> = parse_list(&a.x, "x")?;
    if x.len() != 2 {
        return Err(Error::Invalid("x needs two coordinates".into()));
    }
    let law = NuMeasure::new(xi(a.uncentered_xi), ComponentLaw::StandardNormal)?.contaminated(a.beta)?;
    let v = mixture_pushforward_cdf(&m, &law, [x[0], x[1]], &QuadConfig::default())?;
    println!("{v}");
    Ok(Outcome::Ok)
}

fn gamma(a: GammaArgs) -> Result<Outcome> {
    let m = parse_matrix(&a.matrix)?;
    let g: Vec<f64> = parse_list(&a.grid, "grid")?;
    if g.len() != 3 || g[2] < 1.0 || g[2].fract() != 0.0 {
        return Err(Error::Invalid("grid must be lo,hi,points".into()));
    }
    let grid = EvalGrid::square(g[0], g[1], g[2] as usize)?;
    let nu = NuMeasure::new(xi(a.uncentered_xi), ComponentLaw::StandardNormal)?;
    let quad = QuadConfig::default();
    let values = grid.map(|x| gamma_k_at(&m, &nu, a.order, x, &quad))?;
    let mut w = writer(a.out.as_deref())?;
    writeln!(w, "# matrix={}", format_matrix(&m))?;
    writeln!(w, "# order={}", a.order)?;
    writeln!(w, "# xi={}", nu.xi().name())?;
    writeln!(w, "x1,x2,value")?;
    for (p, v) in grid.points().iter().zip(values) {
        writeln!(w, "{},{},{}", p[0], p[1], v)?;
    }
    w.flush()?;
    Ok(Outcome::Ok)
}

fn plot(a: PlotArgs) -> Result<Outcome> {
    let rows = parse_sweep_csv(&std::fs::read_to_string(&a.input)?)?;
    let svg = render_svg(&rows, XAxis::parse(&a.x)?)?;
    std::fs::write(&a.out, svg)?;
    Ok(Outcome::Ok)
}
