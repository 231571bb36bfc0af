//! Monte Carlo estimators over random deployments in the region disk.
//!
//! Every trial draws from its own ChaCha8 stream selected by
//! `(seed, purpose, trial index)`, so results do not depend on how trials are
//! spread over workers. Per-worker tallies are integers merged by addition.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{BinGrid, ConditionalGrid, GridKind, NetworkConfig};
use crate::error::{domain, Result};
use crate::geometry::Point2D;

const STREAM_DISTRIBUTIONS: u64 = 0x6469_7374;
const STREAM_PPRIME: u64 = 0x7072_696d;
const STREAM_Q: u64 = 0x515f_6576;

/// Random stream for one trial of one estimator.
pub fn trial_rng(seed: u64, purpose: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ purpose.rotate_left(17));
    rng.set_stream(trial_index);
    rng
}

/// Uniform point in the disk of `radius` centered at the origin.
pub fn sample_unit_disk<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Point2D {
    loop {
        let x: f64 = rng.gen_range(-1.0..1.0);
        let y: f64 = rng.gen_range(-1.0..1.0);
        if x * x + y * y <= 1.0 {
            return Point2D::new(radius * x, radius * y);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeOutcome {
    /// Hop distance to the center node, `None` when disconnected from it.
    pub hops: Option<u32>,
    pub euclid: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub positions: Vec<Point2D>,
    pub nodes: Vec<NodeOutcome>,
}

/// Buckets of side `cell` over the square `[-half, half]^2`.
struct CellGrid {
    cell: f64,
    half: f64,
    dim: usize,
    start: Vec<u32>,
    items: Vec<u32>,
}

impl CellGrid {
    fn new(half: f64, cell: f64) -> Self {
        let dim = ((2.0 * half / cell).ceil() as usize).max(1);
        Self { cell, half, dim, start: vec![0; dim * dim + 1], items: Vec::new() }
    }

    fn coord(&self, v: f64) -> usize {
        (((v + self.half) / self.cell).floor().max(0.0) as usize).min(self.dim - 1)
    }

    fn cell_of(&self, p: &Point2D) -> (usize, usize) {
        (self.coord(p.x), self.coord(p.y))
    }

    fn rebuild(&mut self, points: &[Point2D]) {
        self.start.iter_mut().for_each(|s| *s = 0);
        for p in points {
            let (cx, cy) = self.cell_of(p);
            self.start[cy * self.dim + cx + 1] += 1;
        }
        for i in 1..self.start.len() {
            self.start[i] += self.start[i - 1];
        }
        self.items.resize(points.len(), 0);
        let mut fill = self.start.clone();
        for (i, p) in points.iter().enumerate() {
            let (cx, cy) = self.cell_of(p);
            let slot = &mut fill[cy * self.dim + cx];
            self.items[*slot as usize] = i as u32;
            *slot += 1;
        }
    }

    fn for_each_candidate(&self, p: &Point2D, mut visit: impl FnMut(usize)) {
        let (cx, cy) = self.cell_of(p);
        for y in cy.saturating_sub(1)..=(cy + 1).min(self.dim - 1) {
            for x in cx.saturating_sub(1)..=(cx + 1).min(self.dim - 1) {
                let c = y * self.dim + x;
                for &i in &self.items[self.start[c] as usize..self.start[c + 1] as usize] {
                    visit(i as usize);
                }
            }
        }
    }
}

/// Scratch buffers reused across trials.
struct TrialWorkspace {
    positions: Vec<Point2D>,
    hops: Vec<u32>,
    queue: VecDeque<usize>,
    grid: CellGrid,
}

const UNREACHED: u32 = u32::MAX;

impl TrialWorkspace {
    fn new(cfg: &NetworkConfig) -> Self {
        Self {
            positions: Vec::with_capacity(cfg.n),
            hops: Vec::with_capacity(cfg.n),
            queue: VecDeque::with_capacity(cfg.n),
            grid: CellGrid::new(cfg.region_radius, cfg.radius),
        }
    }

    /// Place the nodes and fill `hops` with BFS distances from node 0.
    fn run(&mut self, cfg: &NetworkConfig, trial_index: u64) {
        let mut rng = trial_rng(cfg.seed, STREAM_DISTRIBUTIONS, trial_index);
        self.positions.clear();
        self.positions.push(Point2D::ORIGIN);
        for _ in 1..cfg.n {
            self.positions.push(sample_unit_disk(&mut rng, cfg.region_radius));
        }
        self.grid.rebuild(&self.positions);

        let r2 = cfg.radius * cfg.radius;
        self.hops.clear();
        self.hops.resize(cfg.n, UNREACHED);
        self.hops[0] = 0;
        self.queue.clear();
        self.queue.push_back(0);
        while let Some(u) = self.queue.pop_front() {
            let pu = self.positions[u];
            let next = self.hops[u] + 1;
            let (positions, hops, queue) = (&self.positions, &mut self.hops, &mut self.queue);
            self.grid.for_each_candidate(&pu, |v| {
                if hops[v] == UNREACHED {
                    let pv = positions[v];
                    let (dx, dy) = (pv.x - pu.x, pv.y - pu.y);
                    if dx * dx + dy * dy <= r2 {
                        hops[v] = next;
                        queue.push_back(v);
                    }
                }
            });
        }
    }
}

/// One deployment: the center node plus `n - 1` uniform nodes, with hop
/// distances from the center over the unit disk graph.
pub fn run_trial(cfg: &NetworkConfig, trial_index: u64) -> TrialOutcome {
    let mut ws = TrialWorkspace::new(cfg);
    ws.run(cfg, trial_index);
    let nodes = ws.positions[1..]
        .iter()
        .zip(&ws.hops[1..])
        .map(|(p, &h)| NodeOutcome {
            hops: (h != UNREACHED).then_some(h),
            euclid: p.norm(),
        })
        .collect();
    TrialOutcome { positions: ws.positions, nodes }
}

/// Hop distances from node 0 by BFS over an explicit all-pairs adjacency
/// scan. Reference path for the cell-grid search.
pub fn hop_distances_all_pairs(positions: &[Point2D], radius: f64) -> Vec<Option<u32>> {
    let n = positions.len();
    let mut hops = vec![None; n];
    if n == 0 {
        return hops;
    }
    hops[0] = Some(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        let h = hops[u].unwrap();
        for v in 0..n {
            if hops[v].is_none() && positions[u].distance(&positions[v]) <= radius {
                hops[v] = Some(h + 1);
                queue.push_back(v);
            }
        }
    }
    hops
}

/// Counts of sampled nodes by (hop distance, distance bin).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccumulatorMatrix {
    /// Rows are hop distances `1..=max_hops`.
    pub max_hops: usize,
    pub n_bins: usize,
    pub counts: Vec<u64>,
    pub unreachable: u64,
    pub trials: u64,
}

impl AccumulatorMatrix {
    pub fn new(max_hops: usize, n_bins: usize) -> Self {
        Self {
            max_hops,
            n_bins,
            counts: vec![0; max_hops * n_bins],
            unreachable: 0,
            trials: 0,
        }
    }

    pub fn get(&self, d: usize, bin: usize) -> u64 {
        self.counts[(d - 1) * self.n_bins + bin]
    }

    pub fn record(&mut self, hops: Option<u32>, bin: usize) {
        match hops {
            Some(h) if h >= 1 => self.counts[(h as usize - 1) * self.n_bins + bin] += 1,
            _ => self.unreachable += 1,
        }
    }

    pub fn merge(&mut self, other: &AccumulatorMatrix) {
        assert_eq!(
            (self.max_hops, self.n_bins),
            (other.max_hops, other.n_bins),
            "accumulator shapes differ"
        );
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.unreachable += other.unreachable;
        self.trials += other.trials;
    }

    pub fn row(&self, d: usize) -> &[u64] {
        &self.counts[(d - 1) * self.n_bins..d * self.n_bins]
    }

    pub fn row_total(&self, d: usize) -> u64 {
        self.row(d).iter().sum()
    }

    pub fn column_totals(&self) -> Vec<u64> {
        let mut totals = vec![0u64; self.n_bins];
        for d in 1..=self.max_hops {
            for (t, c) in totals.iter_mut().zip(self.row(d)) {
                *t += c;
            }
        }
        totals
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Largest hop distance with a nonzero count.
    pub fn max_observed_hops(&self) -> usize {
        (1..=self.max_hops).rev().find(|&d| self.row_total(d) > 0).unwrap_or(0)
    }

    /// Empirical marginal `P(d)` over reachable nodes, indexed by `d - 1`.
    pub fn hop_marginal(&self) -> Vec<f64> {
        let total = self.total() as f64;
        (1..=self.max_hops)
            .map(|d| if total > 0.0 { self.row_total(d) as f64 / total } else { 0.0 })
            .collect()
    }

    pub fn unreachable_fraction(&self) -> f64 {
        let all = self.total() + self.unreachable;
        if all == 0 {
            0.0
        } else {
            self.unreachable as f64 / all as f64
        }
    }

    /// `M(d, delta) / sum_d' M(d', delta)`, with the column totals as counts.
    pub fn prob_grid(&self, d: usize, bins: &BinGrid) -> ConditionalGrid {
        let totals = self.column_totals();
        let values = self
            .row(d)
            .iter()
            .zip(&totals)
            .map(|(&m, &t)| if t > 0 { m as f64 / t as f64 } else { 0.0 })
            .collect();
        ConditionalGrid {
            d: d as u32,
            kind: GridKind::Prob,
            delta_bins: bins.midpoints(),
            values,
            counts: Some(totals),
        }
    }

    /// `M(d, delta) / (w sum_delta' M(d, delta'))`, with the row counts as counts.
    pub fn density_grid(&self, d: usize, bins: &BinGrid) -> ConditionalGrid {
        let row = self.row(d);
        let total = self.row_total(d);
        let values = row
            .iter()
            .map(|&m| if total > 0 { m as f64 / (bins.width * total as f64) } else { 0.0 })
            .collect();
        ConditionalGrid {
            d: d as u32,
            kind: GridKind::Density,
            delta_bins: bins.midpoints(),
            values,
            counts: Some(row.to_vec()),
        }
    }
}

/// Run `trials` independent trials on `workers` threads, folding each into
/// a per-worker state and merging the states.
fn run_trials<S, I, F, M>(trials: u64, workers: usize, init: I, fold: F, merge: M) -> S
where
    S: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64) + Sync + Send,
    M: Fn(S, S) -> S + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if workers > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        return pool.install(|| {
            (0..trials)
                .into_par_iter()
                .fold(&init, |mut s, t| {
                    fold(&mut s, t);
                    s
                })
                .reduce(&init, &merge)
        });
    }
    let _ = (workers, &merge);
    let mut state = init();
    for t in 0..trials {
        fold(&mut state, t);
    }
    state
}

/// Accumulate `trials` deployments into a counting matrix over `bins`.
pub fn simulate(cfg: &NetworkConfig, trials: u64, bins: &BinGrid, workers: usize) -> Result<AccumulatorMatrix> {
    cfg.validate()?;
    if trials == 0 {
        return Err(domain("trials must be at least 1"));
    }
    let max_hops = cfg.n - 1;
    let (matrix, _) = run_trials(
        trials,
        workers,
        || (AccumulatorMatrix::new(max_hops, bins.n_bins), TrialWorkspace::new(cfg)),
        |(m, ws), t| {
            ws.run(cfg, t);
            for (p, &h) in ws.positions[1..].iter().zip(&ws.hops[1..]) {
                let hops = (h != UNREACHED).then_some(h);
                m.record(hops, bins.index_of(p.norm()));
            }
            m.trials += 1;
        },
        |(mut a, ws), (b, _)| {
            a.merge(&b);
            (a, ws)
        },
    );
    Ok(matrix)
}

/// Empirical `P_delta(d)` and `p_d(delta)` grids for `d = 1..=d_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionEstimate {
    pub bins: BinGrid,
    pub matrix: AccumulatorMatrix,
    pub prob: Vec<ConditionalGrid>,
    pub density: Vec<ConditionalGrid>,
}

pub fn estimate_distributions(
    cfg: &NetworkConfig,
    trials: u64,
    bins: &BinGrid,
    d_max: usize,
    workers: usize,
) -> Result<DistributionEstimate> {
    if d_max == 0 || d_max > cfg.n - 1 {
        return Err(domain(format!("d_max = {d_max} outside [1, n - 1]")));
    }
    let matrix = simulate(cfg, trials, bins, workers)?;
    let prob = (1..=d_max).map(|d| matrix.prob_grid(d, bins)).collect();
    let density = (1..=d_max).map(|d| matrix.density_grid(d, bins)).collect();
    Ok(DistributionEstimate { bins: *bins, matrix, prob, density })
}

/// A Bernoulli success fraction with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub successes: u64,
    pub trials: u64,
}

impl Estimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        let p = successes as f64 / trials as f64;
        Self {
            value: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            successes,
            trials,
        }
    }
}

fn check_relay_delta(delta: f64, cfg: &NetworkConfig) -> Result<()> {
    cfg.validate()?;
    if !(delta > cfg.radius && delta.is_finite()) {
        return Err(domain(format!("delta = {delta} must exceed R = {}", cfg.radius)));
    }
    Ok(())
}

/// Fraction of trials in which a uniformly drawn node `k` is the first relay
/// of a three-hop shortest path from `a = (0, 0)` to `b = (delta, 0)`: `k` is
/// in range of `a` but not `b`, and one of `n - 3` further uniform nodes is in
/// range of `k` and `b` but not `a`.
pub fn estimate_pprime3(delta: f64, cfg: &NetworkConfig, trials: u64, workers: usize) -> Result<Estimate> {
    check_relay_delta(delta, cfg)?;
    if trials == 0 {
        return Err(domain("trials must be at least 1"));
    }
    let r2 = cfg.radius * cfg.radius;
    let others = cfg.n.saturating_sub(3);
    let successes = run_trials(
        trials,
        workers,
        || 0u64,
        |hits, t| {
            let mut rng = trial_rng(cfg.seed, STREAM_PPRIME, t);
            let k = sample_unit_disk(&mut rng, cfg.region_radius);
            let bk2 = (k.x - delta).powi(2) + k.y * k.y;
            if k.x * k.x + k.y * k.y > r2 || bk2 <= r2 {
                return;
            }
            for _ in 0..others {
                let l = sample_unit_disk(&mut rng, cfg.region_radius);
                let kl2 = (k.x - l.x).powi(2) + (k.y - l.y).powi(2);
                let bl2 = (l.x - delta).powi(2) + l.y * l.y;
                let al2 = l.x * l.x + l.y * l.y;
                if kl2 <= r2 && bl2 <= r2 && al2 > r2 {
                    *hits += 1;
                    return;
                }
            }
        },
        |a, b| a + b,
    );
    Ok(Estimate::from_counts(successes, trials))
}

/// Fraction of trials with `b` at `(delta, 0)` and `n - 2` uniform nodes in
/// which no node qualifies as the first relay `k` of a three-hop shortest path.
pub fn estimate_q(delta: f64, cfg: &NetworkConfig, trials: u64, workers: usize) -> Result<Estimate> {
    check_relay_delta(delta, cfg)?;
    if trials == 0 {
        return Err(domain("trials must be at least 1"));
    }
    let r2 = cfg.radius * cfg.radius;
    let placed = cfg.n.saturating_sub(2);
    let successes = run_trials(
        trials,
        workers,
        || (0u64, Vec::<Point2D>::new(), Vec::<Point2D>::new()),
        |(none, firsts, seconds), t| {
            let mut rng = trial_rng(cfg.seed, STREAM_Q, t);
            firsts.clear();
            seconds.clear();
            for _ in 0..placed {
                let p = sample_unit_disk(&mut rng, cfg.region_radius);
                let a2 = p.x * p.x + p.y * p.y;
                let b2 = (p.x - delta).powi(2) + p.y * p.y;
                if a2 <= r2 && b2 > r2 {
                    firsts.push(p);
                } else if b2 <= r2 && a2 > r2 {
                    seconds.push(p);
                }
            }
            let qualified = firsts.iter().any(|k| {
                seconds
                    .iter()
                    .any(|l| (k.x - l.x).powi(2) + (k.y - l.y).powi(2) <= r2)
            });
            if !qualified {
                *none += 1;
            }
        },
        |(a, f, s), (b, _, _)| (a + b, f, s),
    );
    Ok(Estimate::from_counts(successes.0, trials))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub delta: f64,
    pub n_prime: u32,
    pub q_hat: f64,
    pub p_prime_analytic: f64,
    /// `|Q - (1 - P')^n'|`
    pub residual: f64,
    pub trials: u64,
    /// Set when `Q = 0` forced `n' = n - 2`.
    pub saturated: bool,
}

fn residual(q_hat: f64, p_prime: f64, m: u32) -> f64 {
    (q_hat - (m as f64 * (-p_prime).ln_1p()).exp()).abs()
}

/// Integer `m` in `[1, n - 2]` minimizing `|Q - (1 - P')^m|`.
pub fn calibrate_n_prime(
    delta: f64,
    cfg: &NetworkConfig,
    q_hat: f64,
    p_prime: f64,
    trials: u64,
) -> Result<CalibrationResult> {
    if !(p_prime > 0.0 && p_prime < 1.0) {
        return Err(domain(format!("P' = {p_prime} must lie in (0, 1)")));
    }
    if !(0.0..=1.0).contains(&q_hat) {
        return Err(domain(format!("Q = {q_hat} must lie in [0, 1]")));
    }
    let upper = cfg.n.saturating_sub(2).max(1) as u32;
    if q_hat == 0.0 {
        return Ok(CalibrationResult {
            delta,
            n_prime: upper,
            q_hat,
            p_prime_analytic: p_prime,
            residual: residual(q_hat, p_prime, upper),
            trials,
            saturated: true,
        });
    }
    let continuous = q_hat.ln() / (-p_prime).ln_1p();
    let clamp = |m: f64| m.clamp(1.0, upper as f64) as u32;
    let n_prime = [clamp(continuous.floor()), clamp(continuous.ceil())]
        .into_iter()
        .min_by(|&a, &b| residual(q_hat, p_prime, a).total_cmp(&residual(q_hat, p_prime, b)).then(a.cmp(&b)))
        .unwrap();
    Ok(CalibrationResult {
        delta,
        n_prime,
        q_hat,
        p_prime_analytic: p_prime,
        residual: residual(q_hat, p_prime, n_prime),
        trials,
        saturated: false,
    })
}

/// Range of `n'` consistent with `Q` within `z_score` standard errors.
pub fn n_prime_interval(
    delta: f64,
    cfg: &NetworkConfig,
    q: &Estimate,
    p_prime: f64,
    z_score: f64,
) -> Result<(u32, u32)> {
    let hi_q = (q.value + z_score * q.std_error).min(1.0);
    let lo_q = (q.value - z_score * q.std_error).max(0.0);
    let low = calibrate_n_prime(delta, cfg, hi_q, p_prime, q.trials)?.n_prime;
    let high = calibrate_n_prime(delta, cfg, lo_q, p_prime, q.trials)?.n_prime;
    Ok((low, high))
}
