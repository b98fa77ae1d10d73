mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use optolaser::dynamics::integrate;
use optolaser::oracle::{compare_with_analytic, solve_stationary};
use optolaser::output;
use optolaser::stability::assess;
use optolaser::steady_state::{
    delta2_locked, delta_omega_locked, excitation_class, jump_magnitude, laser_curve_analytic,
    max_jump, nonzero_branch, omega_ex, omega_th, zero_branch, Sign,
};
use optolaser::stochastic::{ensemble_curve, integrate_sde};
use optolaser::sweep::{hysteresis_scan, laser_curve_dynamic, map2d, Jump};
use serde::Serialize;

use config::{ConfigError, RunConfig};

const THREADS_VAR: &str = "OPTOLASER_THREADS";
const PLOT_TEMPLATE: &str = include_str!("plot.py");

const CONFIG_HELP: &str = "\
CONFIG FILE (TOML, unknown keys rejected)
  output = \"out/run\"        output prefix (default: optolaser; --out overrides)
  seed = 0                   RNG seed for noise and oracle starts (default: noise.base_seed)

  [params]                   required: delta_omega1 delta_omega2 omega_b gamma1 gamma2 gamma_b g
                             optional: omega_drive_amp (default 0)
  [integrator]               dt = 0.01, t_end = 2e4, seed_amplitude = 1e-6, tail_fraction = 0.25,
                             stationarity_tol = 1e-6, save_stride = 100
  [noise]                    n1 = n2 = nb = 1e-3, dt = 0.005, t_end = 2e4, n_realizations = 16,
                             base_seed = 0, transient_fraction = 0.5, save_stride = 100
  [sweep]                    omega_min, omega_max, steps; mode = fresh | continue_forward | continue_backward
  [map2d]                    omega_min, omega_max, omega_steps, delta_omega1_min, delta_omega1_max,
                             delta_omega1_steps, offset = 2e-3 (delta_omega2 = delta_omega1 + offset)

EXIT CODES
  0 success, 1 output error, 2 configuration error, 3 partial numerical failure

ENVIRONMENT
  OPTOLASER_THREADS          worker thread count (default: all cores)";

#[derive(Parser)]
#[command(name = "optolaser", version, about = "Three-mode optomechanical laser: thresholds, sweeps and stability", after_long_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form thresholds, excitation class and jump size.
    Thresholds { config: PathBuf },
    /// Laser curve over the [sweep] range.
    Curve {
        config: PathBuf,
        /// Closed-form branches.
        #[arg(long)]
        analytic: bool,
        /// Deterministic time integration.
        #[arg(long)]
        dynamic: bool,
        /// Ensemble average with noise.
        #[arg(long)]
        noisy: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Settled |a2|^2 over the [map2d] grid.
    Map2d {
        config: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Forward and backward continuation sweeps over the [sweep] range.
    Hysteresis {
        config: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Time trace at one drive amplitude.
    Trajectory {
        config: PathBuf,
        /// Drive amplitude (default: params.omega_drive_amp).
        #[arg(long)]
        omega: Option<f64>,
        /// Use the [noise] settings instead of the deterministic integrator.
        #[arg(long)]
        noisy: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Linear stability of one stationary branch.
    Stability {
        config: PathBuf,
        #[arg(long, value_enum)]
        branch: BranchArg,
        #[arg(long)]
        omega: f64,
    },
    /// Multi-start Newton solve of the stationary equations.
    Oracle {
        config: PathBuf,
        #[arg(long)]
        omega: f64,
        #[arg(long, default_value_t = 200)]
        starts: usize,
    },
}

#[derive(Args)]
struct OutArgs {
    /// Output path prefix.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a matplotlib script for the emitted CSV files.
    #[arg(long)]
    emit_plot_script: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Zero,
    Plus,
    Minus,
}

enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<optolaser::Error> for Failure {
    fn from(e: optolaser::Error) -> Self {
        use optolaser::Error::*;
        match e {
            InvalidParam { .. } | Range(_) => Failure::Config(e.to_string()),
            Output(_) => Failure::Io(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Config(msg) | Failure::Numerical(msg) | Failure::Io(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}

fn configure_threads() -> Outcome {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Config(format!(
            "{THREADS_VAR} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Thresholds { config } => thresholds(&RunConfig::load(&config)?),
        Command::Curve {
            config,
            analytic,
            dynamic,
            noisy,
            out,
        } => curve(&RunConfig::load(&config)?, analytic, dynamic, noisy, &out),
        Command::Map2d { config, out } => map(&RunConfig::load(&config)?, &out),
        Command::Hysteresis { config, out } => hysteresis(&RunConfig::load(&config)?, &out),
        Command::Trajectory {
            config,
            omega,
            noisy,
            out,
        } => trajectory(&RunConfig::load(&config)?, omega, noisy, &out),
        Command::Stability {
            config,
            branch,
            omega,
        } => stability(&RunConfig::load(&config)?, branch, omega),
        Command::Oracle {
            config,
            omega,
            starts,
        } => oracle(&RunConfig::load(&config)?, omega, starts),
    }
}

fn print_toml<T: Serialize>(value: &T) -> Outcome {
    let text = toml::to_string(value).map_err(|e| Failure::Io(e.to_string()))?;
    print!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct ThresholdReport {
    omega_ex: f64,
    omega_th: f64,
    class: String,
    jump: f64,
    max_jump: f64,
    delta2: f64,
    delta_omega: f64,
}

fn thresholds(cfg: &RunConfig) -> Outcome {
    let p = &cfg.params;
    print_toml(&ThresholdReport {
        omega_ex: omega_ex(p),
        omega_th: omega_th(p),
        class: excitation_class(p).to_string(),
        jump: jump_magnitude(p),
        max_jump: max_jump(p),
        delta2: delta2_locked(p),
        delta_omega: delta_omega_locked(p),
    })
}

/// Collects written files for the optional plot script.
struct Sink {
    prefix: PathBuf,
    written: Vec<PathBuf>,
    plot: bool,
}

impl Sink {
    fn new(cfg: &RunConfig, args: &OutArgs) -> Self {
        Self {
            prefix: args
                .out
                .clone()
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("optolaser")),
            written: Vec::new(),
            plot: args.emit_plot_script,
        }
    }

    fn path(&self, suffix: &str) -> PathBuf {
        let mut name = self
            .prefix
            .file_name()
            .map(|s| s.to_os_string())
            .unwrap_or_default();
        name.push(suffix);
        self.prefix.with_file_name(name)
    }

    fn write(
        &mut self,
        suffix: &str,
        emit: impl FnOnce(&mut BufWriter<File>) -> optolaser::Result<()>,
    ) -> Outcome {
        let path = self.path(suffix);
        let mut w = create(&path)?;
        emit(&mut w)?;
        w.flush().map_err(|e| io_failure(&path, e))?;
        println!("wrote {}", path.display());
        self.written.push(path);
        Ok(())
    }

    fn finish(self) -> Outcome {
        if !self.plot || self.written.is_empty() {
            return Ok(());
        }
        let files: Vec<String> = self
            .written
            .iter()
            .map(|p| p.display().to_string())
            .collect();
        let script = PLOT_TEMPLATE.replace("__FILES__", &format!("{files:?}"));
        let path = self.path("_plot.py");
        let mut w = create(&path)?;
        w.write_all(script.as_bytes())
            .and_then(|()| w.flush())
            .map_err(|e| io_failure(&path, e))?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_failure(path, e))
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn partial(failed: usize, total: usize, what: &str) -> Outcome {
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Numerical(format!(
            "{failed} of {total} {what} failed; see the error column"
        )))
    }
}

fn curve(cfg: &RunConfig, analytic: bool, dynamic: bool, noisy: bool, out: &OutArgs) -> Outcome {
    if !(analytic || dynamic || noisy) {
        return Err(Failure::Config(
            "choose at least one of --analytic, --dynamic, --noisy".into(),
        ));
    }
    let spec = cfg.sweep_spec()?;
    let mut sink = Sink::new(cfg, out);
    let mut failed = 0;
    let mut total = 0;
    if analytic {
        let c = laser_curve_analytic(&cfg.params, spec.omega_min, spec.omega_max, spec.steps)?;
        sink.write("_curve_analytic.csv", |w| output::write_analytic(w, &c))?;
    }
    if dynamic {
        let c = laser_curve_dynamic(&cfg.params, &spec)?;
        failed += c.failures();
        total += c.points.len();
        sink.write("_curve_dynamic.csv", |w| output::write_curve(w, &c))?;
    }
    if noisy {
        let c = ensemble_curve(&cfg.params, &spec.grid(&cfg.params), &cfg.noise())?;
        failed += c.rows.iter().filter(|r| r.failed > 0).count();
        total += c.rows.len();
        sink.write("_curve_noisy.csv", |w| output::write_noisy(w, &c))?;
    }
    sink.finish()?;
    partial(failed, total, "points")
}

fn map(cfg: &RunConfig, out: &OutArgs) -> Outcome {
    let spec = cfg.map_spec()?;
    let m = map2d(&cfg.params, &spec)?;
    let mut sink = Sink::new(cfg, out);
    sink.write("_map2d.csv", |w| output::write_map(w, &m))?;
    sink.finish()?;
    partial(m.failures(), m.omega.len() * m.delta_omega1.len(), "cells")
}

#[derive(Serialize)]
struct HysteresisSummary {
    omega_th: f64,
    omega_ex: f64,
    forward_jump: Option<Jump>,
    backward_jump: Option<Jump>,
}

fn hysteresis(cfg: &RunConfig, out: &OutArgs) -> Outcome {
    let spec = cfg.sweep_spec()?;
    let r = hysteresis_scan(&cfg.params, &spec)?;
    let mut sink = Sink::new(cfg, out);
    sink.write("_hysteresis_forward.csv", |w| {
        output::write_curve(w, &r.forward)
    })?;
    sink.write("_hysteresis_backward.csv", |w| {
        output::write_curve(w, &r.backward)
    })?;
    sink.finish()?;
    print_toml(&HysteresisSummary {
        omega_th: r.omega_th,
        omega_ex: r.omega_ex,
        forward_jump: r.forward_jump,
        backward_jump: r.backward_jump,
    })?;
    let failed = r.forward.failures() + r.backward.failures();
    partial(
        failed,
        r.forward.points.len() + r.backward.points.len(),
        "points",
    )
}

fn trajectory(cfg: &RunConfig, omega: Option<f64>, noisy: bool, out: &OutArgs) -> Outcome {
    let p = cfg
        .params
        .with_drive(omega.unwrap_or(cfg.params.omega_drive_amp));
    p.validate()?;
    let traj = if noisy {
        integrate_sde(&p, zero_branch(&p).state(), &cfg.noise(), 0)?
    } else {
        integrate(&p, cfg.integrator.seeded_start(&p), &cfg.integrator)?
    };
    let mut sink = Sink::new(cfg, out);
    sink.write("_trajectory.csv", |w| output::write_trajectory(w, &traj))?;
    sink.finish()
}

#[derive(Serialize)]
struct StabilitySummary {
    branch: String,
    omega: f64,
    verdict: String,
    max_re_effective: f64,
    intensity_a2: f64,
    /// `[re, im]` pairs.
    eigenvalues: Vec<[f64; 2]>,
}

fn stability(cfg: &RunConfig, branch: BranchArg, omega: f64) -> Outcome {
    let p = cfg.params.with_drive(omega);
    p.validate()?;
    let bp = match branch {
        BranchArg::Zero => Some(zero_branch(&p)),
        BranchArg::Plus => nonzero_branch(&p, Sign::Plus),
        BranchArg::Minus => nonzero_branch(&p, Sign::Minus),
    }
    .ok_or_else(|| {
        Failure::Config(format!(
            "branch does not exist at omega = {omega:e} (omega_ex = {:e})",
            omega_ex(&p)
        ))
    })?;
    let report = assess(&p, &bp)?;
    print_toml(&StabilitySummary {
        branch: bp.branch.to_string(),
        omega,
        verdict: report.verdict.to_string(),
        max_re_effective: report.max_re_effective,
        intensity_a2: bp.intensity_a2,
        eigenvalues: report.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
    })
}

fn oracle(cfg: &RunConfig, omega: f64, starts: usize) -> Outcome {
    if starts == 0 {
        return Err(Failure::Config("--starts must be at least 1".into()));
    }
    let p = cfg.params.with_drive(omega);
    p.validate()?;
    const TOL: f64 = 1e-8;
    let roots = solve_stationary(&p, starts, cfg.seed.unwrap_or(0));
    let cmp = compare_with_analytic(&p, &roots, TOL);
    println!(
        "{} root classes, max deviation {:.1e}",
        cmp.classes(),
        cmp.max_deviation
    );
    for (r, b) in roots.iter().zip(&cmp.root_branches) {
        let name = b.map_or("unmatched".to_string(), |b| b.to_string());
        println!(
            "  {name:<9} |a1| = {:.9e}  |a2|^2 = {:.9e}  b = {:.9e}  delta_omega = {:.6e}  residual = {:.1e}",
            r.a1.norm(),
            r.a2.norm_sqr(),
            r.b_real,
            r.delta_omega,
            r.residual_norm
        );
    }
    for b in &cmp.missing {
        println!("  missing   {b}");
    }
    if cmp.all_matched(TOL) {
        Ok(())
    } else {
        Err(Failure::Numerical(
            "oracle roots disagree with the closed-form branches".into(),
        ))
    }
}
