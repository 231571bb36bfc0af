use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::error;

use hopdist::analytic::{GridKind, NetworkConfig};
use hopdist::cli::{
    self, files, CompareOptions, ExperimentConfig, FitCommandOptions, OutputFormat, Source,
};
use hopdist::Result;

#[derive(Parser)]
#[command(name = "hopdist", version, about = "Hop distance vs Euclidean distance in random geometric graphs")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Load the experiment configuration from a file (a previous output or a
    /// bare config JSON). Flags given explicitly override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Number of nodes.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Mean degree in units of pi.
    #[arg(long, global = true)]
    z_pi: Option<f64>,
    /// Communication radius; overrides --z-pi.
    #[arg(long, global = true)]
    radius: Option<f64>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    bins_width: Option<f64>,
    #[arg(long, global = true)]
    d_max: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    n_prime: Option<u32>,
    /// Use the full-scale trial counts.
    #[arg(long, global = true)]
    paper_scale: bool,
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Prob,
    Density,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Analytic,
    Simulated,
}

impl From<SourceArg> for Source {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Analytic => Source::Analytic,
            SourceArg::Simulated => Source::Simulated,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Analytic P_delta(d) and p_d(delta) for d = 1, 2, 3.
    Analytic {
        /// Calibration file providing n' (default: <out>/calibration.json).
        #[arg(long)]
        calibration: Option<PathBuf>,
    },
    /// Monte Carlo estimates for d up to --d-max.
    Simulate,
    /// Estimate n' from simulated Q at one distance.
    Calibrate {
        /// Distance at which to calibrate (default 2R).
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Gaussian fits to simulated densities.
    Fit {
        /// Directory holding `hopdist simulate` output.
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "d", value_delimiter = ',', default_values_t = [4u32, 5, 6, 7, 8, 9])]
        d: Vec<u32>,
        #[arg(long)]
        exclude_border: bool,
        #[arg(long)]
        least_squares: bool,
        #[arg(long)]
        force: bool,
    },
    /// Deviation between two sets of grids.
    Compare {
        #[arg(long)]
        analytic: PathBuf,
        #[arg(long)]
        simulated: PathBuf,
        #[arg(long, value_enum, default_value = "analytic")]
        left_source: SourceArg,
        #[arg(long, value_enum, default_value = "simulated")]
        right_source: SourceArg,
        #[arg(long, value_enum, default_value = "prob")]
        kind: KindArg,
        #[arg(long, default_value_t = 500)]
        min_count: u64,
        #[arg(long, default_value_t = 0.03)]
        gate: f64,
    },
}

fn build_config(g: &GlobalArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &g.config {
        Some(path) => files::read_config(path)?,
        None => ExperimentConfig::new(NetworkConfig::with_connectivity(1000, 3.0 * std::f64::consts::PI, 1)?),
    };
    let n = g.n.unwrap_or(cfg.network.n);
    let seed = g.seed.unwrap_or(cfg.network.seed);
    if g.n.is_some() || g.seed.is_some() || g.z_pi.is_some() || g.radius.is_some() {
        cfg.network = match (g.radius, g.z_pi) {
            (Some(r), _) => NetworkConfig::with_radius(n, r, seed)?,
            (None, Some(z)) => NetworkConfig::with_connectivity(n, z * std::f64::consts::PI, seed)?,
            (None, None) => NetworkConfig::with_connectivity(n, cfg.network.z, seed)?,
        };
        if g.d_max.is_none() {
            cfg.d_max = cfg.d_max.min(n - 1);
        }
    }
    if g.trials.is_some() {
        cfg.trials = g.trials;
    }
    if let Some(w) = g.bins_width {
        cfg.bin_width = w;
    }
    if let Some(d) = g.d_max {
        cfg.d_max = d;
    }
    if let Some(out) = &g.out {
        cfg.output_dir = out.clone();
    } else if g.config.is_some() {
        cfg.output_dir = PathBuf::from("out");
    }
    if let Some(f) = g.format {
        cfg.format = match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        };
    }
    if let Some(w) = g.workers {
        cfg.workers = w.max(1);
    }
    if g.n_prime.is_some() {
        cfg.n_prime = g.n_prime;
    }
    if g.paper_scale {
        cfg.paper_scale = true;
    }
    if let Some(t) = g.rel_tol {
        cfg.quadrature.rel_tol = t;
    }
    if let Some(t) = g.abs_tol {
        cfg.quadrature.abs_tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = build_config(&cli.global)?;
    match cli.command {
        Command::Analytic { calibration } => {
            let report = cli::cmd_analytic(&cfg, calibration.as_deref())?;
            println!("n' = {}", report.n_prime.unwrap_or_default());
            for f in &report.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Simulate => {
            let report = cli::cmd_simulate(&cfg)?;
            let s = &report.summary;
            println!(
                "{} trials, seed {}, unreachable fraction {:.3e}, max hops {}, {:.1}s",
                s.trials, s.seed, s.unreachable_fraction, s.max_observed_hops, report.wall_time_secs
            );
            for f in &report.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Calibrate { delta } => {
            let c = cli::cmd_calibrate(&cfg, delta)?;
            let r = &c.result;
            println!(
                "delta = {:.6}: Q = {:.6} +- {:.6}, P' = {:.6e}, n' = {} ({}-SE range {}..={}){}",
                r.delta,
                r.q_hat,
                c.q_std_error,
                r.p_prime_analytic,
                r.n_prime,
                c.z_score,
                c.n_prime_interval.0,
                c.n_prime_interval.1,
                c.reference_n_prime.map(|m| format!(", reference {m}")).unwrap_or_default()
            );
            if r.saturated {
                println!("warning: n' saturated at its bound");
            }
            println!("wrote {}", cli::calibration_path(&cfg.output_dir).display());
        }
        Command::Fit { input, d, exclude_border, least_squares, force } => {
            let opts = FitCommandOptions { exclude_border, least_squares, force };
            for f in cli::cmd_fit(&cfg, &input, &d, opts)? {
                println!(
                    "d = {}: mu = {:.6}, sigma = {:.6}, r^2 = {:.4}",
                    f.d, f.mu, f.sigma, f.r_squared
                );
            }
        }
        Command::Compare { analytic, simulated, left_source, right_source, kind, min_count, gate } => {
            let opts = CompareOptions {
                kind: match kind {
                    KindArg::Prob => GridKind::Prob,
                    KindArg::Density => GridKind::Density,
                },
                min_count,
                gate,
            };
            let report = cli::cmd_compare(
                &cfg,
                &analytic,
                left_source.into(),
                &simulated,
                right_source.into(),
                opts,
            )?;
            for d in &report.deviations {
                println!(
                    "d = {}: max |dev| = {:.5}, mean |dev| = {:.5} over {} bins",
                    d.d, d.max_abs, d.mean_abs, d.bins_used
                );
            }
            println!("{}", if report.passed { "PASS" } else { "FAIL" });
            return Ok(report.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            error!("{e}");
            ExitCode::from(2)
        }
    }
}
