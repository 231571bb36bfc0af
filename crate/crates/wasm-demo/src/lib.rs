//! Browser bindings for the `www/` demo page.
//!
//! Each exported function has a plain Rust counterpart that the native tests
//! exercise; the exports only convert errors.

use std::f64::consts::PI;

use wasm_bindgen::prelude::*;

use hopdist::analytic::{AnalyticModel, BinGrid, NetworkConfig};
use hopdist::geometry;
use hopdist::mcsim;
use hopdist::quadrature::{integrate_region, QuadratureSpec};

fn js(e: hopdist::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Outline of the upper half of the three-hop relay region for `b` at
/// `delta_over_r` (radius 1): the upper boundary left to right, then the lower
/// boundary right to left, as flat `x, y` pairs.
pub fn region_outline(delta_over_r: f64, samples: usize) -> hopdist::Result<Vec<f64>> {
    let slices = geometry::region_slices(delta_over_r, 1.0)?;
    let samples = samples.max(2);
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for s in &slices {
        for i in 0..samples {
            let x = s.x_lo + (s.x_hi - s.x_lo) * i as f64 / (samples - 1) as f64;
            upper.push((x, s.y_hi.eval(x)));
            lower.push((x, s.y_lo.eval(x)));
        }
    }
    Ok(upper
        .into_iter()
        .chain(lower.into_iter().rev())
        .flat_map(|(x, y)| [x, y])
        .collect())
}

/// Area of the full relay region (both halves) at radius 1.
pub fn region_area(delta_over_r: f64) -> hopdist::Result<f64> {
    let slices = geometry::region_slices(delta_over_r, 1.0)?;
    Ok(2.0 * integrate_region(|_| 1.0, &slices, &QuadratureSpec::default())?.value)
}

/// Rows `delta / R, P_delta(1), P_delta(2), P_delta(3)` for `points` distances
/// spread over `(0, 3R]`.
pub fn probability_curves(n: usize, z_pi: f64, n_prime: u32, points: usize) -> hopdist::Result<Vec<f64>> {
    let cfg = NetworkConfig::with_connectivity(n, z_pi * PI, 0)?;
    // plotting accuracy is enough here
    let spec = QuadratureSpec { rel_tol: 1e-6, abs_tol: 1e-10, ..QuadratureSpec::default() };
    let model = AnalyticModel::new(cfg, spec, Some(n_prime))?;
    let mut out = Vec::with_capacity(points * 4);
    for i in 1..=points {
        let t = 3.0 * i as f64 / points as f64;
        let delta = t * cfg.radius;
        out.push(t);
        for d in 1..=3 {
            out.push(model.prob(d, delta)?);
        }
    }
    Ok(out)
}

/// Simulated hop marginal: the unreachable fraction followed by `P(d)` for
/// `d = 1..` up to the largest observed hop count.
pub fn hop_marginal(n: usize, z_pi: f64, seed: u64, trials: u64) -> hopdist::Result<Vec<f64>> {
    let cfg = NetworkConfig::with_connectivity(n, z_pi * PI, seed)?;
    let bins = BinGrid::covering(cfg.region_radius, 0.01)?;
    let m = mcsim::simulate(&cfg, trials, &bins, 1)?;
    let marginal = m.hop_marginal();
    let mut out = vec![m.unreachable_fraction()];
    out.extend_from_slice(&marginal[..m.max_observed_hops()]);
    Ok(out)
}

#[wasm_bindgen(js_name = regionOutline)]
pub fn region_outline_js(delta_over_r: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    region_outline(delta_over_r, samples).map_err(js)
}

#[wasm_bindgen(js_name = regionArea)]
pub fn region_area_js(delta_over_r: f64) -> Result<f64, JsError> {
    region_area(delta_over_r).map_err(js)
}

#[wasm_bindgen(js_name = lensArea)]
pub fn lens_area_js(delta_over_r: f64) -> Result<f64, JsError> {
    geometry::lens_area(delta_over_r, 1.0).map_err(js)
}

#[wasm_bindgen(js_name = probabilityCurves)]
pub fn probability_curves_js(n: usize, z_pi: f64, n_prime: u32, points: usize) -> Result<Vec<f64>, JsError> {
    probability_curves(n, z_pi, n_prime, points).map_err(js)
}

#[wasm_bindgen(js_name = hopMarginal)]
pub fn hop_marginal_js(n: usize, z_pi: f64, seed: u64, trials: u64) -> Result<Vec<f64>, JsError> {
    hop_marginal(n, z_pi, seed, trials).map_err(js)
}
