//! Closed-form and quadrature-based conditional distributions for hop
//! distances 1, 2 and 3, and the Bayes conversions between `P_delta(d)` (the
//! probability of `d` hops given Euclidean distance `delta`) and `p_d(delta)`
//! (the density of `delta` given `d` hops).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{lens_area_unchecked, region_slices, sigma_k_unchecked, Regime};
use crate::quadrature::{integrate_1d, integrate_region, QuadratureSpec};

/// Connectivity below which a giant component is not expected.
pub const GIANT_COMPONENT_Z: f64 = 4.52;

/// Radius of the unit-area disk nodes are deployed in.
pub fn unit_area_radius() -> f64 {
    (1.0 / PI).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Number of nodes, including the reference node at the center.
    pub n: usize,
    /// Expected number of neighbours per node, `pi R^2 n / region area`.
    pub z: f64,
    /// Communication radius.
    pub radius: f64,
    pub region_radius: f64,
    pub seed: u64,
}

impl NetworkConfig {
    pub fn with_connectivity(n: usize, z: f64, seed: u64) -> Result<Self> {
        let region_radius = unit_area_radius();
        let area = PI * region_radius * region_radius;
        let cfg = Self {
            n,
            z,
            radius: (z * area / (PI * n as f64)).sqrt(),
            region_radius,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_radius(n: usize, radius: f64, seed: u64) -> Result<Self> {
        let region_radius = unit_area_radius();
        let area = PI * region_radius * region_radius;
        let cfg = Self {
            n,
            z: PI * radius * radius * n as f64 / area,
            radius,
            region_radius,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(domain(format!("need at least 2 nodes, got {}", self.n)));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(domain(format!("radius must be positive, got {}", self.radius)));
        }
        if !(self.region_radius > 0.0 && self.region_radius.is_finite()) {
            return Err(domain(format!(
                "region radius must be positive, got {}",
                self.region_radius
            )));
        }
        let expected_z = PI * self.radius * self.radius * self.n as f64 / self.region_area();
        if (expected_z - self.z).abs() > 1e-9 * self.z.abs().max(1.0) {
            return Err(domain(format!(
                "z = {} inconsistent with n = {} and R = {} (expected {expected_z})",
                self.z, self.n, self.radius
            )));
        }
        if self.z <= GIANT_COMPONENT_Z {
            warn!(
                "z = {:.3} is at or below the giant-component transition ({GIANT_COMPONENT_Z}); \
                 many nodes will be unreachable",
                self.z
            );
        }
        Ok(())
    }

    pub fn region_area(&self) -> f64 {
        PI * self.region_radius * self.region_radius
    }

    /// Probability that a uniformly placed node lands in a sub-region of the given area.
    pub fn area_probability(&self, area: f64) -> f64 {
        (area / self.region_area()).clamp(0.0, 1.0)
    }
}

/// Equal-width distance bins starting at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinGrid {
    pub width: f64,
    pub n_bins: usize,
}

impl BinGrid {
    /// Bins of `width` covering `[0, max]`; the last bin may extend past `max`.
    pub fn covering(max: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && max > 0.0) {
            return Err(domain(format!("invalid bin grid: width {width}, max {max}")));
        }
        let n_bins = ((max / width) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Ok(Self { width, n_bins })
    }

    pub fn midpoint(&self, bin: usize) -> f64 {
        (bin as f64 + 0.5) * self.width
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.n_bins).map(|i| self.midpoint(i)).collect()
    }

    /// `floor(delta / width)`, clamped into the grid.
    pub fn index_of(&self, delta: f64) -> usize {
        ((delta / self.width).floor().max(0.0) as usize).min(self.n_bins - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// `P_delta(d)`, a probability per bin.
    Prob,
    /// `p_d(delta)`, a density per unit length.
    Density,
}

/// A conditional distribution sampled on the bin grid for one hop distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalGrid {
    pub d: u32,
    pub kind: GridKind,
    pub delta_bins: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<u64>>,
}

impl ConditionalGrid {
    pub fn bin_width(&self) -> Option<f64> {
        match self.delta_bins.as_slice() {
            [a, b, ..] => Some(b - a),
            _ => None,
        }
    }

    /// Riemann sum of the values, the integral of a density grid.
    pub fn integral(&self) -> f64 {
        self.bin_width().unwrap_or(0.0) * self.values.iter().sum::<f64>()
    }
}

/// `P_delta(1)`: one hop iff within range.
pub fn prob_d1(delta: f64, cfg: &NetworkConfig) -> f64 {
    if (0.0..=cfg.radius).contains(&delta) {
        1.0
    } else {
        0.0
    }
}

/// `p_1(delta) = 2 delta / R^2` on `[0, R]`.
pub fn pdf_d1(delta: f64, cfg: &NetworkConfig) -> f64 {
    if (0.0..=cfg.radius).contains(&delta) {
        2.0 * delta / (cfg.radius * cfg.radius)
    } else {
        0.0
    }
}

/// `1 - (1 - x)^m` without cancellation for small `x`.
fn at_least_one(x: f64, m: f64) -> f64 {
    if x <= 0.0 || m <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    -(m * (-x).ln_1p()).exp_m1()
}

/// `(1 - x)^m`
fn none_of(x: f64, m: f64) -> f64 {
    if x >= 1.0 {
        return if m > 0.0 { 0.0 } else { 1.0 };
    }
    (m * (-x).ln_1p()).exp()
}

/// Probability that a uniformly placed node falls in the lens of `a` and `b`.
pub fn lens_probability(delta: f64, cfg: &NetworkConfig) -> f64 {
    cfg.area_probability(lens_area_unchecked(delta.max(0.0), cfg.radius))
}

/// `P_delta(2)`: out of range, and at least one of the other `n - 2` nodes
/// lies in the lens.
pub fn prob_d2(delta: f64, cfg: &NetworkConfig) -> f64 {
    if delta <= cfg.radius {
        return 0.0;
    }
    at_least_one(lens_probability(delta, cfg), (cfg.n as f64 - 2.0).max(0.0))
}

/// Probability that a single uniformly placed node qualifies as the first
/// relay `k` of a three-hop shortest path, i.e. some other node can serve as
/// the second relay.
pub fn prob_prime_d3(delta: f64, cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<f64> {
    let regime = Regime::of(delta, cfg.radius)?;
    let slices = region_slices(delta, cfg.radius)?;
    let others = (cfg.n as f64 - 3.0).max(0.0);
    let integral = integrate_region(
        |k| at_least_one(cfg.area_probability(sigma_k_unchecked(delta, k, cfg.radius, regime)), others),
        &slices,
        spec,
    )?;
    Ok((2.0 * integral.value / cfg.region_area()).clamp(0.0, 1.0))
}

/// `P_delta(3)` given a precomputed `P'_delta(3)`.
pub fn prob_d3_from_prime(p_prime: f64, delta: f64, cfg: &NetworkConfig, n_prime: u32) -> f64 {
    if delta <= cfg.radius || delta > 3.0 * cfg.radius {
        return 0.0;
    }
    let relay = at_least_one(p_prime, n_prime as f64);
    relay * none_of(lens_probability(delta, cfg), cfg.n as f64 - 2.0)
}

fn check_n_prime(cfg: &NetworkConfig, n_prime: u32) -> Result<()> {
    if n_prime < 1 || n_prime as usize > cfg.n.saturating_sub(2) {
        return Err(domain(format!(
            "n' = {n_prime} outside [1, n - 2 = {}]",
            cfg.n.saturating_sub(2)
        )));
    }
    Ok(())
}

/// `P_delta(3)` with `n'` effective independent relay candidates.
pub fn prob_d3(delta: f64, cfg: &NetworkConfig, n_prime: u32, spec: &QuadratureSpec) -> Result<f64> {
    check_n_prime(cfg, n_prime)?;
    if delta <= cfg.radius || delta > 3.0 * cfg.radius {
        return Ok(0.0);
    }
    let p_prime = prob_prime_d3(delta, cfg, spec)?;
    Ok(prob_d3_from_prime(p_prime, delta, cfg, n_prime))
}

/// Memoized `P'_delta(3)` keyed by the exact `delta` bits.
#[derive(Debug)]
pub struct PPrimeCache {
    cfg: NetworkConfig,
    spec: QuadratureSpec,
    values: RwLock<HashMap<u64, f64>>,
}

impl PPrimeCache {
    pub fn new(cfg: NetworkConfig, spec: QuadratureSpec) -> Self {
        Self { cfg, spec, values: RwLock::new(HashMap::new()) }
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    /// `P'` at `delta`, or zero outside `(R, 3R]`.
    pub fn get(&self, delta: f64) -> Result<f64> {
        if delta <= self.cfg.radius || delta > 3.0 * self.cfg.radius {
            return Ok(0.0);
        }
        if let Some(v) = self.values.read().unwrap().get(&delta.to_bits()) {
            return Ok(*v);
        }
        let v = prob_prime_d3(delta, &self.cfg, &self.spec)?;
        self.values.write().unwrap().insert(delta.to_bits(), v);
        Ok(v)
    }

    /// Fill the cache for every `delta` in `(R, 3R]`, in parallel when enabled.
    pub fn warm(&self, deltas: &[f64]) -> Result<()> {
        let todo: Vec<f64> = {
            let values = self.values.read().unwrap();
            deltas
                .iter()
                .copied()
                .filter(|&d| d > self.cfg.radius && d <= 3.0 * self.cfg.radius)
                .filter(|d| !values.contains_key(&d.to_bits()))
                .collect()
        };
        #[cfg(feature = "parallel")]
        let computed: Result<Vec<(f64, f64)>> = {
            use rayon::prelude::*;
            todo.par_iter()
                .map(|&d| prob_prime_d3(d, &self.cfg, &self.spec).map(|v| (d, v)))
                .collect()
        };
        #[cfg(not(feature = "parallel"))]
        let computed: Result<Vec<(f64, f64)>> = todo
            .iter()
            .map(|&d| prob_prime_d3(d, &self.cfg, &self.spec).map(|v| (d, v)))
            .collect();
        let mut values = self.values.write().unwrap();
        for (d, v) in computed? {
            values.insert(d.to_bits(), v);
        }
        Ok(())
    }

    pub fn prob_d3(&self, delta: f64, n_prime: u32) -> Result<f64> {
        check_n_prime(&self.cfg, n_prime)?;
        Ok(prob_d3_from_prime(self.get(delta)?, delta, &self.cfg, n_prime))
    }
}

/// `p_d(delta) = P_delta(d) delta / int_0^{dR} P_r(d) r dr`.
#[derive(Debug, Clone)]
pub struct ConditionalDensity<P> {
    prob: P,
    d: u32,
    support: f64,
    normalizer: f64,
}

impl<P: Fn(f64) -> Result<f64>> ConditionalDensity<P> {
    pub fn eval(&self, delta: f64) -> Result<f64> {
        if !(0.0..=self.support).contains(&delta) {
            return Ok(0.0);
        }
        Ok((self.prob)(delta)? * delta / self.normalizer)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// Upper end of the support, `d R`.
    pub fn support(&self) -> f64 {
        self.support
    }
}

/// Build `p_d` from a `P_delta(d)` supported on `[0, dR]`.
///
/// The normalizing integral is split at every multiple of `R` and at
/// `R sqrt(3)`, where the hop probabilities change form.
pub fn density_from_prob<P>(
    prob: P,
    d: u32,
    cfg: &NetworkConfig,
    spec: &QuadratureSpec,
) -> Result<ConditionalDensity<P>>
where
    P: Fn(f64) -> Result<f64>,
{
    if d == 0 {
        return Err(domain("hop distance must be positive"));
    }
    let r = cfg.radius;
    let support = d as f64 * r;
    let mut breaks: Vec<f64> = (0..=d).map(|j| j as f64 * r).collect();
    if d >= 2 {
        breaks.push(3f64.sqrt() * r);
    }
    breaks.sort_by(f64::total_cmp);

    let mut normalizer = 0.0;
    for w in breaks.windows(2) {
        let failure = std::cell::Cell::new(None::<Error>);
        let piece = integrate_1d(
            |x| match prob(x) {
                Ok(p) => p * x,
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            },
            w[0],
            w[1],
            spec,
        )?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        normalizer += piece.value;
    }
    if !(normalizer > 0.0) {
        return Err(Error::Degenerate(format!(
            "P_delta({d}) vanishes on [0, {support}]"
        )));
    }
    Ok(ConditionalDensity { prob, d, support, normalizer })
}

/// Invert densities back to `P_delta(d)` with a marginal `P(d)`:
/// `P_delta(d) = p_d(delta) P(d) / sum_s p_s(delta) P(s)`.
///
/// Returns `Ok(None)` where every density vanishes at `delta`.
pub fn prob_from_density(
    densities: &[(u32, &dyn Fn(f64) -> f64)],
    marginal: &[f64],
    delta: f64,
) -> Result<Option<Vec<(u32, f64)>>> {
    if densities.len() != marginal.len() {
        return Err(domain(format!(
            "{} densities but {} marginal probabilities",
            densities.len(),
            marginal.len()
        )));
    }
    let total: f64 = marginal.iter().sum();
    if marginal.iter().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > 1e-6 {
        return Err(domain(format!(
            "marginal must be a probability vector (sum = {total})"
        )));
    }
    let joint: Vec<f64> = densities
        .iter()
        .zip(marginal)
        .map(|((_, p), &pd)| p(delta).max(0.0) * pd)
        .collect();
    let denom: f64 = joint.iter().sum();
    if !(denom > 0.0) {
        return Ok(None);
    }
    Ok(Some(
        densities
            .iter()
            .zip(&joint)
            .map(|((d, _), j)| (*d, j / denom))
            .collect(),
    ))
}

/// The analytic model for `d = 1, 2, 3` on one configuration, with `P'`
/// memoized.
#[derive(Debug)]
pub struct AnalyticModel {
    cfg: NetworkConfig,
    spec: QuadratureSpec,
    n_prime: Option<u32>,
    pprime: PPrimeCache,
}

impl AnalyticModel {
    pub fn new(cfg: NetworkConfig, spec: QuadratureSpec, n_prime: Option<u32>) -> Result<Self> {
        cfg.validate()?;
        spec.validate()?;
        if let Some(m) = n_prime {
            check_n_prime(&cfg, m)?;
        }
        Ok(Self { cfg, spec, n_prime, pprime: PPrimeCache::new(cfg, spec) })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    pub fn n_prime(&self) -> Option<u32> {
        self.n_prime
    }

    pub fn pprime(&self) -> &PPrimeCache {
        &self.pprime
    }

    pub fn prob(&self, d: u32, delta: f64) -> Result<f64> {
        match d {
            1 => Ok(prob_d1(delta, &self.cfg)),
            2 => Ok(prob_d2(delta, &self.cfg)),
            3 => self.pprime.prob_d3(delta, self.n_prime.ok_or(Error::MissingNPrime)?),
            _ => Err(domain(format!("no analytic form for d = {d}"))),
        }
    }

    pub fn density(&self, d: u32) -> Result<ConditionalDensity<impl Fn(f64) -> Result<f64> + '_>> {
        if d == 3 && self.n_prime.is_none() {
            return Err(Error::MissingNPrime);
        }
        density_from_prob(move |x| self.prob(d, x), d, &self.cfg, &self.spec)
    }

    /// `P_delta(d)` or `p_d(delta)` at the midpoints of `bins`.
    pub fn grid(&self, d: u32, kind: GridKind, bins: &BinGrid) -> Result<ConditionalGrid> {
        let deltas = bins.midpoints();
        if d == 3 {
            self.pprime.warm(&deltas)?;
        }
        let values = match kind {
            GridKind::Prob => deltas.iter().map(|&x| self.prob(d, x)).collect::<Result<Vec<_>>>()?,
            GridKind::Density => {
                let density = self.density(d)?;
                deltas.iter().map(|&x| density.eval(x)).collect::<Result<Vec<_>>>()?
            }
        };
        Ok(ConditionalGrid { d, kind, delta_bins: deltas, values, counts: None })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg3() -> NetworkConfig {
        NetworkConfig::with_connectivity(1000, 3.0 * PI, 7).unwrap()
    }

    #[test]
    fn config_derives_radius_from_z() {
        let c = cfg3();
        assert!((c.radius - 0.003f64.sqrt()).abs() < 1e-12);
        assert!((c.radius - 0.055).abs() < 0.001);
        assert!((c.region_area() - 1.0).abs() < 1e-12);
        let c5 = NetworkConfig::with_connectivity(1000, 5.0 * PI, 7).unwrap();
        assert!((c5.radius - 0.071).abs() < 0.001);
        let back = NetworkConfig::with_radius(1000, c.radius, 7).unwrap();
        assert!((back.z - 3.0 * PI).abs() < 1e-9);
        let mut bad = c;
        bad.z = 3.0;
        assert!(bad.validate().is_err());
        assert!(NetworkConfig::with_connectivity(1, 3.0, 0).is_err());
    }

    #[test]
    fn bin_grid_shape() {
        let g = BinGrid::covering(unit_area_radius(), 0.001).unwrap();
        assert_eq!(g.n_bins, 565);
        assert_eq!(g.index_of(0.0), 0);
        assert_eq!(g.index_of(0.001), 1);
        assert_eq!(g.index_of(0.0015), 1);
        assert_eq!(g.index_of(10.0), 564);
        assert!((g.midpoint(3) - 0.0035).abs() < 1e-15);
        assert_eq!(BinGrid::covering(1.0, 0.25).unwrap().n_bins, 4);
    }

    #[test]
    fn one_hop_closed_forms() {
        let c = cfg3();
        let r = c.radius;
        assert_eq!(prob_d1(r / 2.0, &c), 1.0);
        assert_eq!(prob_d1(r, &c), 1.0);
        assert_eq!(prob_d1(1.01 * r, &c), 0.0);
        assert!((pdf_d1(r, &c) - 2.0 / r).abs() < 1e-12);
        assert_eq!(pdf_d1(0.0, &c), 0.0);
        assert_eq!(pdf_d1(1.01 * r, &c), 0.0);
    }

    #[test]
    fn two_hop_closed_form() {
        let c = cfg3();
        let r = c.radius;
        assert_eq!(prob_d2(r, &c), 0.0);
        assert_eq!(prob_d2(0.5 * r, &c), 0.0);
        assert_eq!(prob_d2(2.0 * r, &c), 0.0);
        assert_eq!(prob_d2(2.3 * r, &c), 0.0);
        let rho = crate::geometry::lens_area(1.5 * r, r).unwrap();
        let direct = 1.0 - (1.0 - rho).powi(998);
        assert!((prob_d2(1.5 * r, &c) - direct).abs() < 1e-12);
    }

    #[test]
    fn two_hop_increases_with_density() {
        let r = 0.05;
        let sparse = NetworkConfig::with_radius(500, r, 0).unwrap();
        let dense = NetworkConfig::with_radius(1500, r, 0).unwrap();
        for i in 1..50 {
            let delta = r * (1.0 + i as f64 / 50.0);
            assert!(prob_d2(delta, &dense) > prob_d2(delta, &sparse));
        }
    }

    #[test]
    fn prime_probability_vanishes_at_three_radii() {
        let c = cfg3();
        let spec = QuadratureSpec::default();
        let v = prob_prime_d3(2.999 * c.radius, &c, &spec).unwrap();
        assert!(v < 1e-3 && v >= 0.0, "{v}");
        assert!(prob_prime_d3(c.radius, &c, &spec).is_err());
    }

    #[test]
    fn three_hop_structure() {
        let c = cfg3();
        let spec = QuadratureSpec::default();
        let r = c.radius;
        assert_eq!(prob_d3(0.9 * r, &c, 779, &spec).unwrap(), 0.0);
        assert_eq!(prob_d3(3.2 * r, &c, 779, &spec).unwrap(), 0.0);
        assert!(prob_d3(1.5 * r, &c, 0, &spec).is_err());
        assert!(prob_d3(1.5 * r, &c, 999, &spec).is_err());
        let p = prob_prime_d3(2.0 * r, &c, &spec).unwrap();
        let at_2r = prob_d3(2.0 * r, &c, 779, &spec).unwrap();
        assert!((at_2r - (1.0 - (1.0 - p).powi(779))).abs() < 1e-12);
        for x in [1.1, 1.5, 1.8] {
            let delta = x * r;
            let bound = (1.0 - lens_probability(delta, &c)).powi(998);
            assert!(prob_d3(delta, &c, 779, &spec).unwrap() <= bound + 1e-15);
        }
    }

    #[test]
    fn pprime_cache_matches_direct() {
        let c = cfg3();
        let spec = QuadratureSpec::default();
        let cache = PPrimeCache::new(c, spec);
        let deltas = [1.3 * c.radius, 2.2 * c.radius, 0.5 * c.radius];
        cache.warm(&deltas).unwrap();
        for &d in &deltas {
            let direct = if d > c.radius { prob_prime_d3(d, &c, &spec).unwrap() } else { 0.0 };
            assert_eq!(cache.get(d).unwrap(), direct);
        }
    }

    #[test]
    fn density_from_step_recovers_linear_ramp() {
        let c = cfg3();
        let spec = QuadratureSpec::default();
        let r = c.radius;
        let p1 = density_from_prob(|x| Ok(prob_d1(x, &c)), 1, &c, &spec).unwrap();
        assert!((p1.normalizer() - r * r / 2.0).abs() < 1e-15);
        for x in [0.0, 0.3 * r, r, 1.2 * r] {
            assert!((p1.eval(x).unwrap() - pdf_d1(x, &c)).abs() < 1e-9);
        }
        let tri = density_from_prob(|_| Ok(1.0), 2, &c, &spec).unwrap();
        let x = 1.3 * r;
        assert!((tri.eval(x).unwrap() - 2.0 * x / (2.0 * r).powi(2)).abs() < 1e-9);
        assert!(density_from_prob(|_| Ok(0.0), 2, &c, &spec).is_err());
    }

    #[test]
    fn two_hop_density_is_normalized() {
        let c = NetworkConfig::with_connectivity(1000, 5.0 * PI, 0).unwrap();
        let spec = QuadratureSpec::default();
        let r = c.radius;
        let p2 = density_from_prob(|x| Ok(prob_d2(x, &c)), 2, &c, &spec).unwrap();
        assert_eq!(p2.eval(0.8 * r).unwrap(), 0.0);
        assert_eq!(p2.eval(2.1 * r).unwrap(), 0.0);
        let total = integrate_1d(|x| p2.eval(x).unwrap(), r, 2.0 * r, &spec).unwrap().value;
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bayes_inversion_cases() {
        let c = cfg3();
        let r = c.radius;
        let p1 = |x: f64| pdf_d1(x, &c);
        let single = prob_from_density(&[(1, &p1)], &[1.0], 0.5 * r).unwrap().unwrap();
        assert_eq!(single, vec![(1, 1.0)]);
        assert!(prob_from_density(&[(1, &p1)], &[1.0], 2.0 * r).unwrap().is_none());
        let flat = |x: f64| if x > r && x <= 2.0 * r { 1.0 / r } else { 0.0 };
        let out = prob_from_density(&[(1, &p1), (2, &flat)], &[0.3, 0.7], 0.5 * r)
            .unwrap()
            .unwrap();
        assert_eq!(out, vec![(1, 1.0), (2, 0.0)]);
        assert!(prob_from_density(&[(1, &p1)], &[0.5], r).is_err());
        assert!(prob_from_density(&[(1, &p1)], &[0.5, 0.5], r).is_err());
    }

    #[test]
    fn model_requires_n_prime_for_three_hops() {
        let m = AnalyticModel::new(cfg3(), QuadratureSpec::default(), None).unwrap();
        assert!(matches!(m.prob(3, 0.1), Err(Error::MissingNPrime)));
        assert!(m.prob(4, 0.1).is_err());
        assert!(AnalyticModel::new(cfg3(), QuadratureSpec::default(), Some(999)).is_err());
    }
}
