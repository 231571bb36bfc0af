//! Gaussian approximations of empirical `p_d(delta)` for larger hop counts.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::{ConditionalGrid, GridKind};
use crate::error::{Error, Result};

/// Nonzero bins required before a fit is attempted.
pub const MIN_NONZERO_BINS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    Moments,
    LeastSquares,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub d: u32,
    pub mu: f64,
    pub sigma: f64,
    pub r_squared: f64,
    pub method: FitMethod,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Drop bins whose midpoint exceeds this distance (region radius minus R
    /// keeps border-distorted bins out).
    pub max_delta: Option<f64>,
    /// Refine the moment estimate by least squares.
    pub least_squares: bool,
}

pub fn gaussian_density(fit: &GaussianFit, delta: f64) -> f64 {
    normal_pdf(delta, fit.mu, fit.sigma)
}

fn normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let u = (x - mu) / sigma;
    (-0.5 * u * u).exp() / (sigma * (2.0 * PI).sqrt())
}

/// Weighted mean and (population) standard deviation.
pub fn weighted_moments(xs: &[f64], weights: &[f64]) -> Option<(f64, f64)> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mean = xs.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() / total;
    let var = xs
        .iter()
        .zip(weights)
        .map(|(x, w)| w * (x - mean).powi(2))
        .sum::<f64>()
        / total;
    Some((mean, var.sqrt()))
}

struct Samples {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

fn samples(grid: &ConditionalGrid, opts: &FitOptions) -> Result<Samples> {
    if grid.kind != GridKind::Density {
        return Err(Error::Domain(format!(
            "d = {}: Gaussian fits need a density grid",
            grid.d
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = grid
        .delta_bins
        .iter()
        .zip(&grid.values)
        .filter(|(x, y)| **y > 0.0 && opts.max_delta.is_none_or(|m| **x <= m))
        .map(|(x, y)| (*x, *y))
        .unzip();
    if xs.len() < MIN_NONZERO_BINS {
        return Err(Error::InsufficientData(format!(
            "d = {}: {} nonzero bins, need at least {MIN_NONZERO_BINS}",
            grid.d,
            xs.len()
        )));
    }
    // renormalize over the retained bins
    let width = grid.bin_width().unwrap_or(1.0);
    let mass: f64 = ys.iter().sum::<f64>() * width;
    let ys = ys.iter().map(|y| y / mass).collect();
    Ok(Samples { xs, ys })
}

fn r_squared(s: &Samples, mu: f64, sigma: f64) -> f64 {
    let mean = s.ys.iter().sum::<f64>() / s.ys.len() as f64;
    let ss_tot: f64 = s.ys.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = s
        .xs
        .iter()
        .zip(&s.ys)
        .map(|(x, y)| (y - normal_pdf(*x, mu, sigma)).powi(2))
        .sum();
    if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Fit a normal density to a `p_d` grid by the method of moments, optionally
/// refined by least squares.
pub fn fit_gaussian(grid: &ConditionalGrid, opts: &FitOptions) -> Result<GaussianFit> {
    let s = samples(grid, opts)?;
    let (mu, sigma) = weighted_moments(&s.xs, &s.ys).expect("normalized weights");
    if !(sigma > 0.0) {
        return Err(Error::Degenerate(format!("d = {}: zero variance", grid.d)));
    }
    let moments = GaussianFit {
        d: grid.d,
        mu,
        sigma,
        r_squared: r_squared(&s, mu, sigma),
        method: FitMethod::Moments,
    };
    if !opts.least_squares {
        return Ok(moments);
    }
    let (mu, sigma) = least_squares(&s, mu, sigma);
    Ok(GaussianFit {
        mu,
        sigma,
        r_squared: r_squared(&s, mu, sigma),
        method: FitMethod::LeastSquares,
        ..moments
    })
}

/// Levenberg-Marquardt on `(mu, sigma)` for the sum of squared density
/// residuals, starting from the moment estimate.
fn least_squares(s: &Samples, mu0: f64, sigma0: f64) -> (f64, f64) {
    let cost = |mu: f64, sigma: f64| -> f64 {
        s.xs.iter()
            .zip(&s.ys)
            .map(|(x, y)| (y - normal_pdf(*x, mu, sigma)).powi(2))
            .sum()
    };
    let (mut mu, mut sigma) = (mu0, sigma0);
    let mut current = cost(mu, sigma);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        // J^T J and J^T r for residual r = y - g
        let (mut a11, mut a12, mut a22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (x, y) in s.xs.iter().zip(&s.ys) {
            let u = (x - mu) / sigma;
            let g = normal_pdf(*x, mu, sigma);
            let d_mu = g * u / sigma;
            let d_sigma = g * (u * u - 1.0) / sigma;
            let r = y - g;
            a11 += d_mu * d_mu;
            a12 += d_mu * d_sigma;
            a22 += d_sigma * d_sigma;
            g1 += d_mu * r;
            g2 += d_sigma * r;
        }
        let mut improved = false;
        for _ in 0..20 {
            let (b11, b22) = (a11 * (1.0 + lambda), a22 * (1.0 + lambda));
            let det = b11 * b22 - a12 * a12;
            if det.abs() < f64::MIN_POSITIVE {
                break;
            }
            let step_mu = (b22 * g1 - a12 * g2) / det;
            let step_sigma = (b11 * g2 - a12 * g1) / det;
            let (cand_mu, cand_sigma) = (mu + step_mu, sigma + step_sigma);
            if cand_sigma > 0.0 {
                let c = cost(cand_mu, cand_sigma);
                if c < current {
                    let converged = (current - c) <= 1e-15 * current;
                    mu = cand_mu;
                    sigma = cand_sigma;
                    current = c;
                    lambda = (lambda * 0.3).max(1e-12);
                    improved = !converged;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (mu, sigma)
}
