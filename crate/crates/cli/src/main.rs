use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use spinphase::harness::config::{
    ExperimentConfig, ExperimentKind, Grid, Initial, Integrator, LoopSection,
    LoopShape, Output, Probe, RangeSpec, SchemeSection, SweepSection, SweepSourceKind,
    VerifySection, DEFAULT_T_RELAX,
};
use spinphase::harness::run::{EXIT_CONFIG, EXIT_IO};
use spinphase::harness::{parse_config_with_warnings, resolve_out_dir, run_with_warnings};
use spinphase::Polarization;

#[derive(Parser)]
#[command(name = "spinphase", version, about = "Geometric-phase spin simulator")]
struct Cli {
    /// Output directory (overrides SPINPHASE_OUT and the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Exit with status 1 on any per-point error or FAIL feasibility verdict.
    #[arg(long, global = true)]
    strict: bool,
    /// Integrator steps per pulse and per loop.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Seed for randomized utilities; physics results never depend on it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config file.
    Run { config: PathBuf },
    /// Compare 4*atan(bx/bz) with the simulated two-pulse protocol.
    VerifyAa(VerifyArgs),
    /// Interference pattern over a gamma or field-ratio grid.
    Sweep(SweepArgs),
    /// ac Stark shifts, splitting and effective field.
    Stark(StarkArgs),
    /// Berry phase of an adiabatic cone loop.
    Berry(LoopArgs),
    /// Spin echo around a cone loop.
    Echo(EchoArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0.864)]
    g: f64,
    #[arg(long, default_value_t = DEFAULT_T_RELAX)]
    t_relax: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Explicit comma-separated ratios bx/bz.
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    /// Otherwise, this many ratios evenly spaced on [0, max-ratio].
    #[arg(long, default_value_t = 50)]
    points: usize,
    #[arg(long, default_value_t = 5.0)]
    max_ratio: f64,
    /// Fixed probe angle for the observable comparison (default: 64-point grid).
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Gamma,
    FieldRatio,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = SourceArg::Gamma)]
    source: SourceArg,
    /// Explicit comma-separated grid.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0)]
    start: f64,
    #[arg(long, default_value_t = std::f64::consts::PI)]
    end: f64,
    #[arg(long, default_value_t = 64)]
    points: usize,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 0.0)]
    w0: f64,
    #[arg(long, default_value_t = 1.0)]
    w1: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolarizationArg {
    SigmaPlus,
    SigmaMinus,
}

#[derive(Args)]
struct StarkArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1.0)]
    v1: f64,
    #[arg(long, default_value_t = 0.0)]
    v2: f64,
    #[arg(long, default_value_t = 1.0)]
    delta1: f64,
    #[arg(long, default_value_t = 1.0)]
    delta2: f64,
    #[arg(long, value_enum, default_value_t = PolarizationArg::SigmaPlus)]
    polarization: PolarizationArg,
    /// Pulse length in ps (default: a pi rotation).
    #[arg(long)]
    duration: Option<f64>,
}

#[derive(Args)]
struct LoopArgs {
    #[arg(long, default_value_t = 2.0)]
    g: f64,
    #[arg(long, default_value_t = DEFAULT_T_RELAX)]
    t_relax: f64,
    /// Cone half-angle in radians.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_3)]
    theta: f64,
    /// Field magnitude in tesla.
    #[arg(long, default_value_t = 1.0)]
    magnitude: f64,
    /// Loop duration in ps.
    #[arg(long, default_value_t = 1.6e5)]
    total_time: f64,
}

#[derive(Args)]
struct EchoArgs {
    #[command(flatten)]
    lp: LoopArgs,
    /// Second-pass duration over first-pass duration.
    #[arg(long, default_value_t = 1.0)]
    dwell_ratio: f64,
}

fn base(kind: ExperimentKind, g_factor: f64, t_relax: f64) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        g_factor,
        t_relax,
        initial: Initial::default(),
        probe: Probe::default(),
        integrator: Integrator::default(),
        field: None,
        loop_: None,
        scheme: None,
        verify: None,
        sweep: None,
        output: Output::default(),
    }
}

fn cone(kind: ExperimentKind, a: &LoopArgs, dwell_ratio: f64) -> ExperimentConfig {
    ExperimentConfig {
        loop_: Some(LoopSection {
            shape: LoopShape::Cone,
            polar_angle: a.theta,
            swing: None,
            magnitude: a.magnitude,
            total_time: a.total_time,
            dwell_ratio,
        }),
        ..base(kind, a.g, a.t_relax)
    }
}

fn grid(values: Option<Vec<f64>>, start: f64, end: f64, points: usize) -> Grid {
    match values {
        Some(v) => Grid::Values(v),
        None => Grid::Range(RangeSpec { start, end, points }),
    }
}

fn build(command: Command) -> Result<(ExperimentConfig, Vec<String>), (i32, String)> {
    let cfg = match command {
        Command::Run { config } => {
            let text = fs::read_to_string(&config)
                .map_err(|e| (EXIT_IO, format!("cannot read {}: {e}", config.display())))?;
            return parse_config_with_warnings(&text)
                .map_err(|e| (EXIT_CONFIG, format!("{}: {e}", config.display())));
        }
        Command::VerifyAa(a) => {
            let mut c = base(ExperimentKind::VerifyAa, a.common.g, a.common.t_relax);
            c.verify = Some(VerifySection {
                ratios: grid(a.ratios, 0.0, a.max_ratio, a.points),
            });
            c.probe.alpha = a.alpha;
            c
        }
        Command::Sweep(a) => {
            let mut c = base(ExperimentKind::Sweep, a.common.g, a.common.t_relax);
            let g = grid(a.values, a.start, a.end, a.points);
            let (source, gammas, ratios) = match a.source {
                SourceArg::Gamma => (SweepSourceKind::Gamma, Some(g), None),
                SourceArg::FieldRatio => (SweepSourceKind::FieldRatio, None, Some(g)),
            };
            c.sweep = Some(SweepSection { source, gammas, ratios });
            c.initial = Initial { w0: a.w0, w1: a.w1 };
            c.probe.alpha = Some(a.alpha);
            c.probe.kappa = a.kappa;
            c
        }
        Command::Stark(a) => {
            let mut c = base(ExperimentKind::StarkPipeline, a.common.g, a.common.t_relax);
            c.scheme = Some(SchemeSection {
                v1: a.v1,
                v2: a.v2,
                delta1: a.delta1,
                delta2: a.delta2,
                polarization: match a.polarization {
                    PolarizationArg::SigmaPlus => Polarization::SigmaPlus,
                    PolarizationArg::SigmaMinus => Polarization::SigmaMinus,
                },
                direction: [0.0, 0.0, 1.0],
                duration: a.duration,
            });
            c
        }
        Command::Berry(a) => cone(ExperimentKind::BerryLoop, &a, 1.0),
        Command::Echo(a) => cone(ExperimentKind::SpinEcho, &a.lp, a.dwell_ratio),
    };
    let mut cfg = cfg;
    let warnings = cfg.normalize().map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    Ok((cfg, warnings))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(seed) = cli.seed {
        info!("seed {seed} accepted; no physics result depends on it");
    }

    let (mut cfg, warnings) = match build(cli.command) {
        Ok(x) => x,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(code as u8);
        }
    };
    if let Some(n) = cli.steps {
        cfg.integrator = Integrator {
            steps_per_pulse: n,
            steps_per_loop: n,
        };
        if let Err(e) = cfg.normalize() {
            eprintln!("error: --steps: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    for w in &warnings {
        warn!("{w}");
    }

    let out_dir = resolve_out_dir(cli.out.as_deref(), &cfg);
    let report = match run_with_warnings(&cfg, &warnings, &out_dir) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_IO as u8);
        }
    };

    println!("experiment: {}", report.kind);
    println!("config_hash: sha256:{}", report.config_hash);
    if let Some(f) = &report.feasibility {
        println!("feasibility: {f}");
    }
    print!("{}", report.summary);
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    eprintln!("wall time: {:.3} s", report.wall_time.as_secs_f64());
    ExitCode::from(report.exit_code(cli.strict) as u8)
}
