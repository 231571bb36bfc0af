//! Globally adaptive Gauss-Kronrod (7/15) integration, in one dimension and
//! iterated over [`RegionSlice`] lists.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{Point2D, RegionSlice};

// Kronrod abscissae on [0, 1]; odd indices are the Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) || self.max_subdivisions < 1 {
            return Err(domain(format!("invalid quadrature spec {self:?}")));
        }
        Ok(())
    }

    /// The spec used for the inner integral of an iterated integration.
    pub fn inner(&self) -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: self.rel_tol / 10.0,
            abs_tol: self.abs_tol / 10.0,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Interval {}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let sum = f(center - dx) + f(center + dx);
        kronrod += w * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error)
}

/// Integrate `f` over `[a, b]` until the summed error estimate falls below
/// `max(rel_tol * |I|, abs_tol)`.
pub fn integrate_1d<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    spec.validate()?;
    if !(a <= b) {
        return Err(domain(format!("integration bounds out of order: [{a}, {b}]")));
    }
    if a == b {
        return Ok(Integral { value: 0.0, error_estimate: 0.0, evaluations: 0 });
    }

    let (value, error) = kronrod15(&mut f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Interval { a, b, value, error });
    let mut total = value;
    let mut total_err = error;

    let mut subdivisions = 1;
    loop {
        let tol = (spec.rel_tol * total.abs()).max(spec.abs_tol);
        if total_err <= tol {
            break;
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Convergence {
                estimate: total,
                error_estimate: total_err,
                slice: None,
            });
        }
        let worst = heap.pop().expect("heap holds every interval");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval too small to split in floating point
            return Err(Error::Convergence {
                estimate: total,
                error_estimate: total_err,
                slice: None,
            });
        }
        let (v1, e1) = kronrod15(&mut f, worst.a, mid);
        let (v2, e2) = kronrod15(&mut f, mid, worst.b);
        evaluations += 30;
        subdivisions += 1;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Interval { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Interval { a: mid, b: worst.b, value: v2, error: e2 });
    }

    // re-sum to shed accumulated update round-off
    let value = heap.iter().map(|i| i.value).sum();
    let error_estimate = heap.iter().map(|i| i.error).sum();
    Ok(Integral { value, error_estimate, evaluations })
}

/// Sum over slices of the iterated integral of `f`, with `y` running from
/// `y_lo(x)` to `y_hi(x)` inside. No symmetry factor is applied.
pub fn integrate_region<F>(f: F, slices: &[RegionSlice], spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(Point2D) -> f64,
{
    spec.validate()?;
    let inner_spec = spec.inner();
    let mut out = Integral { value: 0.0, error_estimate: 0.0, evaluations: 0 };
    for (index, slice) in slices.iter().enumerate() {
        let inner_failure = Cell::new(None::<Error>);
        let mut inner_evals = 0;
        let outer = integrate_1d(
            |x| {
                let lo = slice.y_lo.eval(x);
                let hi = slice.y_hi.eval(x);
                if hi <= lo {
                    return 0.0;
                }
                match integrate_1d(|y| f(Point2D::new(x, y)), lo, hi, &inner_spec) {
                    Ok(r) => {
                        inner_evals += r.evaluations;
                        r.value
                    }
                    Err(e) => {
                        let best = match &e {
                            Error::Convergence { estimate, .. } => *estimate,
                            _ => f64::NAN,
                        };
                        inner_failure.set(Some(e));
                        best
                    }
                }
            },
            slice.x_lo,
            slice.x_hi,
            spec,
        );
        let with_slice = |e: Error| match e {
            Error::Convergence { estimate, error_estimate, .. } => Error::Convergence {
                estimate: out.value + estimate,
                error_estimate: out.error_estimate + error_estimate,
                slice: Some(index),
            },
            other => other,
        };
        let outer = outer.map_err(with_slice)?;
        if let Some(e) = inner_failure.into_inner() {
            return Err(with_slice(e));
        }
        out.value += outer.value;
        out.error_estimate += outer.error_estimate;
        out.evaluations += inner_evals;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{lens_area, region_slices};
    use proptest::prelude::*;

    fn midpoint_rule(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn basic_integrals() {
        let spec = QuadratureSpec::default();
        let v = integrate_1d(|x| 2.0 * x, 0.0, 1.0, &spec).unwrap().value;
        assert!((v - 1.0).abs() < 1e-14);

        let r = 0.055;
        let v = integrate_1d(|d| 2.0 * d / (r * r), 0.0, r, &spec).unwrap().value;
        assert!((v - 1.0).abs() < 1e-12);

        assert_eq!(integrate_1d(|x| x, 2.0, 2.0, &spec).unwrap().value, 0.0);
        assert!(integrate_1d(|x| x, 1.0, 0.0, &spec).is_err());
    }

    #[test]
    fn lens_moment_matches_midpoint_oracle() {
        let f = |r: f64| lens_area(r, 1.0).unwrap() * r;
        let got = integrate_1d(f, 0.0, 2.0, &QuadratureSpec::default()).unwrap().value;
        let oracle = midpoint_rule(f, 0.0, 2.0, 1_000_000);
        assert!((got - oracle).abs() < 1e-9 * oracle, "{got} vs {oracle}");
    }

    #[test]
    fn non_convergence_reports_best_estimate() {
        let spec = QuadratureSpec { max_subdivisions: 2, ..Default::default() };
        match integrate_1d(|x: f64| x.sqrt().recip(), 0.0, 1.0, &spec) {
            Err(Error::Convergence { estimate, .. }) => assert!(estimate.is_finite()),
            other => panic!("expected convergence error, got {other:?}"),
        }
        let bad = QuadratureSpec { rel_tol: 0.0, ..Default::default() };
        assert!(integrate_1d(|x| x, 0.0, 1.0, &bad).is_err());
    }

    #[test]
    fn endpoint_sqrt_singularity_converges() {
        // quarter disk
        let v = integrate_1d(|x| (1.0 - x * x).max(0.0).sqrt(), 0.0, 1.0, &QuadratureSpec::default())
            .unwrap()
            .value;
        assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-8);
    }

    #[test]
    fn region_integral_of_zero_and_one() {
        let spec = QuadratureSpec::default();
        let slices = region_slices(2.5, 1.0).unwrap();
        assert_eq!(integrate_region(|_| 0.0, &slices, &spec).unwrap().value, 0.0);
        let area = integrate_region(|_| 1.0, &slices, &spec).unwrap().value;
        // stratified membership oracle on the upper half-plane
        let n = 2000;
        let (x0, x1, y1) = (0.5, 1.0, 1.0);
        let mut hits = 0usize;
        for i in 0..n {
            for j in 0..n {
                let x = x0 + (x1 - x0) * (i as f64 + 0.5) / n as f64;
                let y = y1 * (j as f64 + 0.5) / n as f64;
                let k = Point2D::new(x, y);
                if k.norm() <= 1.0 && k.distance(&Point2D::new(2.5, 0.0)) <= 2.0 {
                    hits += 1;
                }
            }
        }
        let oracle = hits as f64 / (n * n) as f64 * (x1 - x0) * y1;
        assert!((area - oracle).abs() < 1e-3 * oracle, "{area} vs {oracle}");
    }

    #[test]
    fn halving_tolerance_does_not_worsen_accuracy() {
        let f = |x: f64| (3.0 * x).sin() * (-x).exp() + x.powi(3);
        let oracle = midpoint_rule(f, 0.0, 2.0, 2_000_000);
        let mut last = f64::INFINITY;
        for rel_tol in [1e-3, 5e-4, 2.5e-4, 1.25e-4, 1e-6] {
            let spec = QuadratureSpec { rel_tol, ..Default::default() };
            let v = integrate_1d(f, 0.0, 2.0, &spec).unwrap().value;
            let err = (v - oracle).abs();
            assert!(err <= last.max(1e-11), "rel_tol {rel_tol}: {err} > {last}");
            last = err;
        }
    }

    proptest! {
        #[test]
        fn integral_is_linear(
            p in prop::collection::vec(-5.0f64..5.0, 6),
            q in prop::collection::vec(-5.0f64..5.0, 6),
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
        ) {
            let spec = QuadratureSpec::default();
            let poly = |c: &[f64], x: f64| c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci);
            let ip = integrate_1d(|x| poly(&p, x), -1.0, 2.0, &spec).unwrap().value;
            let iq = integrate_1d(|x| poly(&q, x), -1.0, 2.0, &spec).unwrap().value;
            let combined = integrate_1d(|x| alpha * poly(&p, x) + beta * poly(&q, x), -1.0, 2.0, &spec)
                .unwrap()
                .value;
            let expect = alpha * ip + beta * iq;
            let tol = 10.0 * (spec.rel_tol * expect.abs()).max(spec.abs_tol) + 1e-12;
            prop_assert!((combined - expect).abs() <= tol);
        }
    }
}
