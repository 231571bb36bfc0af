//! Experiment commands behind the `hopdist` binary. Each command takes an
//! [`ExperimentConfig`], writes its files into the output directory and
//! returns a summary.

pub mod files;

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use crate::analytic::{AnalyticModel, BinGrid, ConditionalGrid, GridKind, NetworkConfig};
use crate::error::{domain, Error, Result};
use crate::fitting::{fit_gaussian, FitOptions, GaussianFit};
use crate::mcsim::{self, CalibrationResult, Estimate};
use crate::quadrature::QuadratureSpec;

pub use files::Source;

/// Desk-scale and paper-scale trial counts.
pub const DESK_SIMULATE_TRIALS: u64 = 10_000;
pub const PAPER_SIMULATE_TRIALS: u64 = 1_000_000;
pub const DESK_CALIBRATE_TRIALS: u64 = 1_000_000;
pub const PAPER_CALIBRATE_TRIALS: u64 = 1_000_000_000;

/// Published `n'` at `delta = 2R`, `n = 1000`, keyed by `z / pi`. Reported
/// alongside calibrations for comparison only.
pub const REFERENCE_N_PRIME: [(f64, u32); 2] = [(3.0, 779), (5.0, 780)];

/// Standard errors of `Q` spanned by the reported `n'` interval.
pub const N_PRIME_INTERVAL_Z: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub network: NetworkConfig,
    /// `None` selects the command's default trial count.
    pub trials: Option<u64>,
    pub d_max: usize,
    pub bin_width: f64,
    pub format: OutputFormat,
    pub quadrature: QuadratureSpec,
    pub n_prime: Option<u32>,
    pub paper_scale: bool,
    /// Not part of the recorded experiment: results do not depend on it.
    #[serde(skip)]
    pub output_dir: PathBuf,
    #[serde(skip, default = "default_workers")]
    pub workers: usize,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl ExperimentConfig {
    pub fn new(network: NetworkConfig) -> Self {
        Self {
            network,
            trials: None,
            d_max: 20.min(network.n - 1),
            bin_width: 0.001,
            format: OutputFormat::Csv,
            quadrature: QuadratureSpec::default(),
            n_prime: None,
            paper_scale: false,
            output_dir: PathBuf::from("out"),
            workers: default_workers(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.quadrature.validate()?;
        if self.trials == Some(0) {
            return Err(domain("trials must be at least 1"));
        }
        if self.d_max < 1 || self.d_max > self.network.n - 1 {
            return Err(domain(format!("d_max = {} outside [1, n - 1]", self.d_max)));
        }
        if !(self.bin_width > 0.0) {
            return Err(domain(format!("bin width must be positive, got {}", self.bin_width)));
        }
        Ok(())
    }

    pub fn bins(&self) -> Result<BinGrid> {
        BinGrid::covering(self.network.region_radius, self.bin_width)
    }

    pub fn simulate_trials(&self) -> u64 {
        self.trials.unwrap_or(if self.paper_scale {
            PAPER_SIMULATE_TRIALS
        } else {
            DESK_SIMULATE_TRIALS
        })
    }

    pub fn calibrate_trials(&self) -> u64 {
        self.trials.unwrap_or(if self.paper_scale {
            PAPER_CALIBRATE_TRIALS
        } else {
            DESK_CALIBRATE_TRIALS
        })
    }

    pub fn reference_n_prime(&self) -> Option<u32> {
        if self.network.n != 1000 {
            return None;
        }
        let z_pi = self.network.z / std::f64::consts::PI;
        REFERENCE_N_PRIME
            .iter()
            .find(|(z, _)| (z - z_pi).abs() < 1e-9)
            .map(|(_, m)| *m)
    }
}

#[derive(Debug, Clone)]
pub struct AnalyticReport {
    pub files: Vec<PathBuf>,
    pub n_prime: Option<u32>,
    pub grids: Vec<ConditionalGrid>,
}

/// Default location of the calibration artifact.
pub fn calibration_path(dir: &Path) -> PathBuf {
    dir.join("calibration.json")
}

/// `P_delta(d)` and `p_d(delta)` for `d = 1, 2, 3` on the bin grid.
///
/// `n'` comes from the configuration or, failing that, from a calibration
/// file; without either the command refuses to run.
pub fn cmd_analytic(cfg: &ExperimentConfig, calibration: Option<&Path>) -> Result<AnalyticReport> {
    cfg.validate()?;
    let n_prime = match cfg.n_prime {
        Some(m) => m,
        None => {
            let default = calibration_path(&cfg.output_dir);
            let path = calibration.unwrap_or(&default);
            if !path.exists() {
                return Err(Error::MissingNPrime);
            }
            read_calibration(path)?.result.n_prime
        }
    };
    let mut recorded = cfg.clone();
    recorded.n_prime = Some(n_prime);

    let bins = cfg.bins()?;
    let model = AnalyticModel::new(cfg.network, cfg.quadrature, Some(n_prime))?;
    let started = Instant::now();
    let mut grids = Vec::new();
    for d in 1..=3 {
        for kind in [GridKind::Prob, GridKind::Density] {
            grids.push(model.grid(d, kind, &bins)?);
        }
    }
    info!("analytic grids computed in {:.1?}", started.elapsed());
    let extra = vec![("n_prime".to_string(), n_prime.to_string())];
    let files = files::write_grids(&cfg.output_dir, "analytic", Source::Analytic, &recorded, &extra, &grids)?;
    Ok(AnalyticReport { files, n_prime: Some(n_prime), grids })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub trials: u64,
    pub seed: u64,
    pub unreachable_fraction: f64,
    pub max_observed_hops: usize,
    /// `P(d)` for `d = 1..=d_max`.
    pub hop_marginal: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SimulateReport {
    pub files: Vec<PathBuf>,
    pub summary: SimulateSummary,
    pub wall_time_secs: f64,
    pub estimate: mcsim::DistributionEstimate,
}

/// Monte Carlo estimates of `P_delta(d)` and `p_d(delta)` for `d` up to
/// `d_max`. Data files are byte-identical for a given configuration; the wall
/// time goes to a separate `simulate_run.json`.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<SimulateReport> {
    cfg.validate()?;
    let bins = cfg.bins()?;
    let trials = cfg.simulate_trials();
    let started = Instant::now();
    let estimate = mcsim::estimate_distributions(&cfg.network, trials, &bins, cfg.d_max, cfg.workers)?;
    let wall_time_secs = started.elapsed().as_secs_f64();
    let matrix = &estimate.matrix;
    let marginal = matrix.hop_marginal();
    let summary = SimulateSummary {
        trials,
        seed: cfg.network.seed,
        unreachable_fraction: matrix.unreachable_fraction(),
        max_observed_hops: matrix.max_observed_hops(),
        hop_marginal: marginal[..cfg.d_max].to_vec(),
    };
    let extra = vec![
        ("trials".to_string(), trials.to_string()),
        ("unreachable_fraction".to_string(), summary.unreachable_fraction.to_string()),
        ("hop_marginal".to_string(), serde_json::to_string(&summary.hop_marginal)?),
    ];
    let grids: Vec<ConditionalGrid> = estimate
        .prob
        .iter()
        .chain(&estimate.density)
        .cloned()
        .collect();
    let mut files =
        files::write_grids(&cfg.output_dir, "simulate", Source::Simulated, cfg, &extra, &grids)?;
    let run_path = cfg.output_dir.join("simulate_run.json");
    files::write_json(
        &run_path,
        &serde_json::json!({
            "seed": cfg.network.seed,
            "trials": trials,
            "workers": cfg.workers,
            "wall_time_secs": wall_time_secs,
        }),
    )?;
    files.push(run_path);
    info!(
        "simulated {trials} trials in {wall_time_secs:.1}s, unreachable fraction {:.2e}",
        summary.unreachable_fraction
    );
    Ok(SimulateReport { files, summary, wall_time_secs, estimate })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub config: ExperimentConfig,
    pub result: CalibrationResult,
    pub q_std_error: f64,
    /// `n'` range for `Q` within `z_score` standard errors.
    pub n_prime_interval: (u32, u32),
    pub z_score: f64,
    #[serde(default)]
    pub reference_n_prime: Option<u32>,
}

pub fn read_calibration(path: &Path) -> Result<CalibrationFile> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Estimate `Q` at `delta` (default `2R`), evaluate `P'` analytically and
/// choose `n'`. Writes `calibration.json`.
pub fn cmd_calibrate(cfg: &ExperimentConfig, delta: Option<f64>) -> Result<CalibrationFile> {
    cfg.validate()?;
    let net = &cfg.network;
    let delta = delta.unwrap_or(2.0 * net.radius);
    let trials = cfg.calibrate_trials();
    let started = Instant::now();
    let q: Estimate = mcsim::estimate_q(delta, net, trials, cfg.workers)?;
    let p_prime = crate::analytic::prob_prime_d3(delta, net, &cfg.quadrature)?;
    let result = mcsim::calibrate_n_prime(delta, net, q.value, p_prime, trials)?;
    let interval = mcsim::n_prime_interval(delta, net, &q, p_prime, N_PRIME_INTERVAL_Z)?;
    info!(
        "calibrated n' = {} (interval {:?}) from {trials} trials in {:.1?}",
        result.n_prime,
        interval,
        started.elapsed()
    );
    let file = CalibrationFile {
        config: cfg.clone(),
        result,
        q_std_error: q.std_error,
        n_prime_interval: interval,
        z_score: N_PRIME_INTERVAL_Z,
        reference_n_prime: cfg.reference_n_prime(),
    };
    files::write_json(&calibration_path(&cfg.output_dir), &file)?;
    Ok(file)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FitCommandOptions {
    /// Exclude bins within `R` of the region border.
    pub exclude_border: bool,
    pub least_squares: bool,
    /// Allow fitting `d <= 3`, which have analytic forms.
    pub force: bool,
}

/// Fit Gaussians to simulated `p_d` grids read from `input`; writes `fits.csv`
/// or `fits.json`.
pub fn cmd_fit(
    cfg: &ExperimentConfig,
    input: &Path,
    d_list: &[u32],
    opts: FitCommandOptions,
) -> Result<Vec<GaussianFit>> {
    if let Some(&d) = d_list.iter().find(|&&d| d <= 3) {
        if !opts.force {
            return Err(domain(format!(
                "d = {d} has an analytic form; pass --force to fit it anyway"
            )));
        }
    }
    let grids = files::load_grids(input, Source::Simulated, GridKind::Density)?;
    let fit_opts = FitOptions {
        max_delta: opts
            .exclude_border
            .then_some(cfg.network.region_radius - cfg.network.radius),
        least_squares: opts.least_squares,
    };
    let mut fits = Vec::new();
    for &d in d_list {
        let grid = grids
            .iter()
            .find(|g| g.d == d)
            .ok_or_else(|| Error::InsufficientData(format!("no simulated density file for d = {d}")))?;
        fits.push(fit_gaussian(grid, &fit_opts)?);
    }
    std::fs::create_dir_all(&cfg.output_dir)?;
    match cfg.format {
        OutputFormat::Json => files::write_json(
            &cfg.output_dir.join("fits.json"),
            &serde_json::json!({ "config": cfg, "fits": fits }),
        )?,
        OutputFormat::Csv => {
            let mut text = format!("# hopdist fit\n# config: {}\n", serde_json::to_string(cfg)?);
            text.push_str("d,mu,sigma,r_squared,method\n");
            for f in &fits {
                let method = serde_json::to_value(f.method)?;
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    f.d,
                    f.mu,
                    f.sigma,
                    f.r_squared,
                    method.as_str().unwrap_or_default()
                ));
            }
            std::fs::write(cfg.output_dir.join("fits.csv"), text)?;
        }
    }
    Ok(fits)
}

#[derive(Debug, Clone, Copy)]
pub struct CompareOptions {
    pub kind: GridKind,
    /// Bins with fewer samples than this are skipped.
    pub min_count: u64,
    /// Largest tolerated absolute deviation.
    pub gate: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self { kind: GridKind::Prob, min_count: 500, gate: 0.03 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub d: u32,
    pub bins_used: usize,
    /// Bins left out because they straddle a discontinuity.
    pub bins_straddling: usize,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub worst_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub kind: GridKind,
    pub min_count: u64,
    pub gate: f64,
    pub deviations: Vec<Deviation>,
    pub passed: bool,
}

/// Per-`d` deviation between two grids of the same shape, over bins whose
/// sample count (taken from whichever grid carries counts) reaches `min_count`.
///
/// A bin containing `jump` is skipped: `P_delta(1)` and `P_delta(2)` step at
/// `delta = R`, so a bin average and a midpoint value cannot agree there.
pub fn grid_deviation(
    a: &ConditionalGrid,
    b: &ConditionalGrid,
    min_count: u64,
    jump: Option<f64>,
) -> Result<Deviation> {
    if a.delta_bins.len() != b.delta_bins.len()
        || a.bin_width().zip(b.bin_width()).is_some_and(|(x, y)| (x - y).abs() > 1e-9)
    {
        let width = |g: &ConditionalGrid| {
            g.bin_width()
                .map_or("?".to_string(), |w| ((w * 1e9).round() / 1e9).to_string())
        };
        return Err(Error::GridMismatch(format!(
            "d = {}: bin width {} x {} bins vs {} x {} bins",
            a.d,
            width(a),
            a.delta_bins.len(),
            width(b),
            b.delta_bins.len()
        )));
    }
    let counts = a.counts.as_ref().or(b.counts.as_ref());
    let half = a.bin_width().unwrap_or(0.0) / 2.0;
    let mut used = 0;
    let mut straddling = 0;
    let mut max_abs: f64 = 0.0;
    let mut sum = 0.0;
    let mut worst_delta = None;
    for i in 0..a.values.len() {
        if counts.is_some_and(|c| c[i] < min_count) {
            continue;
        }
        let mid = a.delta_bins[i];
        if jump.is_some_and(|r| mid - half < r && r < mid + half) {
            straddling += 1;
            continue;
        }
        let dev = (a.values[i] - b.values[i]).abs();
        used += 1;
        sum += dev;
        if dev > max_abs || worst_delta.is_none() {
            max_abs = max_abs.max(dev);
            worst_delta = Some(a.delta_bins[i]);
        }
    }
    Ok(Deviation {
        d: a.d,
        bins_used: used,
        bins_straddling: straddling,
        max_abs,
        mean_abs: if used > 0 { sum / used as f64 } else { 0.0 },
        worst_delta,
    })
}

/// Compare analytic and simulated grids for every `d` present in both inputs.
pub fn cmd_compare(
    cfg: &ExperimentConfig,
    analytic: &Path,
    analytic_source: Source,
    simulated: &Path,
    simulated_source: Source,
    opts: CompareOptions,
) -> Result<CompareReport> {
    let left = files::load_grids(analytic, analytic_source, opts.kind)?;
    let right = files::load_grids(simulated, simulated_source, opts.kind)?;
    let radius = files::dir_config(analytic, analytic_source)
        .map_or(cfg.network.radius, |c| c.network.radius);
    let mut deviations = Vec::new();
    for a in &left {
        if let Some(b) = right.iter().find(|b| b.d == a.d) {
            deviations.push(grid_deviation(a, b, opts.min_count, Some(radius))?);
        }
    }
    if deviations.is_empty() {
        return Err(Error::InsufficientData("no hop distance present in both inputs".into()));
    }
    let passed = deviations.iter().all(|d| d.max_abs <= opts.gate);
    let report = CompareReport {
        kind: opts.kind,
        min_count: opts.min_count,
        gate: opts.gate,
        deviations,
        passed,
    };
    files::write_json(
        &cfg.output_dir.join("compare.json"),
        &serde_json::json!({ "config": cfg, "report": report }),
    )?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn config(dir: &Path) -> ExperimentConfig {
        let net = NetworkConfig::with_connectivity(200, 5.0 * PI, 9).unwrap();
        let mut cfg = ExperimentConfig::new(net);
        cfg.output_dir = dir.to_path_buf();
        cfg.trials = Some(20);
        cfg.d_max = 8;
        cfg.bin_width = 0.01;
        cfg
    }

    #[test]
    fn analytic_requires_n_prime() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(dir.path());
        assert!(matches!(cmd_analytic(&cfg, None), Err(Error::MissingNPrime)));
    }

    #[test]
    fn fit_refuses_analytic_hops() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(dir.path());
        let err = cmd_fit(&cfg, dir.path(), &[1, 4], FitCommandOptions::default()).unwrap_err();
        assert!(err.to_string().contains("--force"));
    }

    #[test]
    fn csv_and_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for format in [OutputFormat::Csv, OutputFormat::Json] {
            let mut cfg = config(&dir.path().join(format!("{format:?}")));
            cfg.format = format;
            let report = cmd_simulate(&cfg).unwrap();
            let loaded = files::load_grids(&cfg.output_dir, Source::Simulated, GridKind::Density).unwrap();
            assert_eq!(loaded.len(), cfg.d_max);
            for (g, orig) in loaded.iter().zip(&report.estimate.density) {
                assert_eq!(g.values, orig.values);
                assert_eq!(g.counts, orig.counts);
            }
            let first = &report.files[0];
            let mut read = files::read_config(first).unwrap();
            read.output_dir = cfg.output_dir.clone();
            read.workers = cfg.workers;
            assert_eq!(read, cfg);
        }
    }

    #[test]
    fn grid_mismatch_names_widths() {
        let a = ConditionalGrid {
            d: 2,
            kind: GridKind::Prob,
            delta_bins: vec![0.0005, 0.0015],
            values: vec![0.0, 0.0],
            counts: None,
        };
        let b = ConditionalGrid { delta_bins: vec![0.001, 0.003], ..a.clone() };
        let err = grid_deviation(&a, &b, 0, None).unwrap_err();
        assert!(matches!(err, Error::GridMismatch(_)));
        assert!(err.to_string().contains("bin width"));
        let same = grid_deviation(&a, &a, 0, None).unwrap();
        assert_eq!(same.max_abs, 0.0);
        assert_eq!(same.bins_used, 2);
        let skipped = grid_deviation(&a, &a, 0, Some(0.0012)).unwrap();
        assert_eq!((skipped.bins_used, skipped.bins_straddling), (1, 1));
    }

    #[test]
    fn reference_values_only_for_published_configs() {
        let net = NetworkConfig::with_connectivity(1000, 3.0 * PI, 0).unwrap();
        assert_eq!(ExperimentConfig::new(net).reference_n_prime(), Some(779));
        let net = NetworkConfig::with_connectivity(1000, 5.0 * PI, 0).unwrap();
        assert_eq!(ExperimentConfig::new(net).reference_n_prime(), Some(780));
        let net = NetworkConfig::with_connectivity(500, 5.0 * PI, 0).unwrap();
        assert_eq!(ExperimentConfig::new(net).reference_n_prime(), None);
    }
}
