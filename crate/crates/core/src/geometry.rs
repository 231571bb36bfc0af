//! Planar geometry of equal-radius disks.
//!
//! Node `a` sits at the origin and node `b` at `(delta, 0)`. Everything is in
//! absolute length units, the same units as the communication radius.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Absolute tolerance on distances used by the degenerate-configuration tests.
pub const DISTANCE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Which of the three shapes the relay region takes for a given `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// `R < delta <= R*sqrt(3)`
    Narrow,
    /// `R*sqrt(3) < delta <= 2R`
    Mid,
    /// `2R < delta <= 3R`
    Far,
}

impl Regime {
    pub fn of(delta: f64, radius: f64) -> Result<Regime> {
        check_three_hop_range(delta, radius)?;
        Ok(if delta <= radius * 3f64.sqrt() {
            Regime::Narrow
        } else if delta <= 2.0 * radius {
            Regime::Mid
        } else {
            Regime::Far
        })
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(domain(format!("radius must be positive and finite, got {radius}")));
    }
    Ok(())
}

fn check_three_hop_range(delta: f64, radius: f64) -> Result<()> {
    check_radius(radius)?;
    if !(delta > radius && delta <= 3.0 * radius) {
        return Err(domain(format!(
            "delta = {delta} outside (R, 3R] for R = {radius}"
        )));
    }
    Ok(())
}

/// Intersection area of two radius-`radius` disks whose centers are `delta` apart.
pub fn lens_area(delta: f64, radius: f64) -> Result<f64> {
    check_radius(radius)?;
    if !(delta >= 0.0) {
        return Err(domain(format!("delta must be non-negative, got {delta}")));
    }
    Ok(lens_area_unchecked(delta, radius))
}

pub(crate) fn lens_area_unchecked(delta: f64, radius: f64) -> f64 {
    if delta >= 2.0 * radius {
        return 0.0;
    }
    let half = 0.5 * delta;
    let area = 2.0 * radius * radius * (half / radius).acos()
        - delta * (radius * radius - half * half).max(0.0).sqrt();
    area.clamp(0.0, PI * radius * radius)
}

/// Area common to the three radius-`radius` disks centered at `c1`, `c2`, `c3`.
///
/// The region is convex and bounded by circular arcs. Each arc of circle `i`
/// that lies inside every other disk contributes `(x dy - y dx) / 2` to the
/// boundary integral, which is the chord triangle plus the circular segment.
pub fn tri_circle_area(c1: Point2D, c2: Point2D, c3: Point2D, radius: f64) -> Result<f64> {
    check_radius(radius)?;
    Ok(disk_intersection_area(&[c1, c2, c3], radius))
}

pub(crate) fn disk_intersection_area(centers: &[Point2D], radius: f64) -> f64 {
    let mut unique: Vec<Point2D> = Vec::with_capacity(centers.len());
    for c in centers {
        if !unique.iter().any(|u| u.distance(c) < DISTANCE_EPS) {
            unique.push(*c);
        }
    }
    for (i, ci) in unique.iter().enumerate() {
        for cj in &unique[i + 1..] {
            if ci.distance(cj) >= 2.0 * radius - DISTANCE_EPS {
                return 0.0;
            }
        }
    }
    match unique.len() {
        0 => return 0.0,
        1 => return PI * radius * radius,
        2 => return lens_area_unchecked(unique[0].distance(&unique[1]), radius),
        _ => {}
    }

    let r2 = radius * radius;
    let mut total = 0.0;
    let mut angles: Vec<f64> = Vec::with_capacity(2 * unique.len());
    for (i, ci) in unique.iter().enumerate() {
        angles.clear();
        for (j, cj) in unique.iter().enumerate() {
            if i == j {
                continue;
            }
            let dx = cj.x - ci.x;
            let dy = cj.y - ci.y;
            let d = dx.hypot(dy);
            let base = dy.atan2(dx);
            let half = (0.5 * d / radius).clamp(-1.0, 1.0).acos();
            angles.push((base - half).rem_euclid(TAU));
            angles.push((base + half).rem_euclid(TAU));
        }
        angles.sort_by(f64::total_cmp);
        for k in 0..angles.len() {
            let start = angles[k];
            let end = if k + 1 < angles.len() {
                angles[k + 1]
            } else {
                angles[0] + TAU
            };
            if end - start <= 0.0 {
                continue;
            }
            let mid = 0.5 * (start + end);
            let probe = Point2D::new(ci.x + radius * mid.cos(), ci.y + radius * mid.sin());
            let inside = unique
                .iter()
                .enumerate()
                .all(|(j, cj)| j == i || probe.distance(cj) <= radius + DISTANCE_EPS);
            if inside {
                total += 0.5
                    * (r2 * (end - start)
                        + radius * ci.x * (end.sin() - start.sin())
                        - radius * ci.y * (end.cos() - start.cos()));
            }
        }
    }
    total.clamp(0.0, PI * r2)
}

/// Area where the second relay `l` of a three-hop path `a, k, l, b` may lie:
/// inside the disks of `b` and `k` but outside the disk of `a`.
pub fn sigma_k(delta: f64, k: Point2D, radius: f64) -> Result<f64> {
    let regime = Regime::of(delta, radius)?;
    Ok(sigma_k_unchecked(delta, k, radius, regime))
}

pub(crate) fn sigma_k_unchecked(delta: f64, k: Point2D, radius: f64, regime: Regime) -> f64 {
    let b = Point2D::new(delta, 0.0);
    let dbk = b.distance(&k);
    let lens = lens_area_unchecked(dbk, radius);
    if lens == 0.0 {
        return 0.0;
    }
    match regime {
        Regime::Far => lens,
        Regime::Narrow | Regime::Mid => {
            let triple = disk_intersection_area(&[Point2D::ORIGIN, b, k], radius);
            (lens - triple).max(0.0)
        }
    }
}

/// Abscissae of the points used to describe the relay region, plus the
/// ordinate of `D`, the upper intersection of the circles around `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Landmarks {
    pub x_a: f64,
    pub x_b: f64,
    pub x_c: Option<f64>,
    pub x_d: Option<f64>,
    pub y_d: Option<f64>,
    pub regime: Regime,
}

pub fn landmarks(delta: f64, radius: f64) -> Result<Landmarks> {
    let regime = Regime::of(delta, radius)?;
    let r = radius;
    let r2 = r * r;
    let near_points = || {
        (
            Some(delta - r),
            Some(0.5 * delta),
            Some(0.5 * (4.0 * r2 - delta * delta).max(0.0).sqrt()),
        )
    };
    let lm = match regime {
        Regime::Narrow => {
            let (x_c, x_d, y_d) = near_points();
            Landmarks {
                x_a: 0.5 * delta - r,
                x_b: (delta - (3.0 * (4.0 * r2 - delta * delta)).max(0.0).sqrt()) / 4.0,
                x_c,
                x_d,
                y_d,
                regime,
            }
        }
        Regime::Mid => {
            let (x_c, x_d, y_d) = near_points();
            Landmarks {
                x_a: 0.5 * delta - r,
                x_b: (delta * delta - 3.0 * r2) / (2.0 * delta),
                x_c,
                x_d,
                y_d,
                regime,
            }
        }
        Regime::Far => Landmarks {
            x_a: delta - 2.0 * r,
            x_b: (delta * delta - 3.0 * r2) / (2.0 * delta),
            x_c: None,
            x_d: None,
            y_d: None,
            regime,
        },
    };
    Ok(lm)
}

/// A boundary curve `y(x)` of a region slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    /// The abscissa axis.
    Axis,
    /// Upper arc `cy + sqrt(r^2 - (x - cx)^2)`.
    UpperArc { cx: f64, cy: f64, r: f64 },
    /// Lower arc `cy - sqrt(r^2 - (x - cx)^2)`.
    LowerArc { cx: f64, cy: f64, r: f64 },
}

impl Boundary {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Boundary::Axis => 0.0,
            Boundary::UpperArc { cx, cy, r } => cy + (r * r - (x - cx).powi(2)).max(0.0).sqrt(),
            Boundary::LowerArc { cx, cy, r } => cy - (r * r - (x - cx).powi(2)).max(0.0).sqrt(),
        }
    }
}

/// One vertical strip of the upper half of the relay region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSlice {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: Boundary,
    pub y_hi: Boundary,
}

/// Vertical strips covering the upper half of the region where the first relay
/// `k` of a three-hop shortest path from `a` to `b` can lie. The region is
/// symmetric about the abscissa; the lower half is not represented.
pub fn region_slices(delta: f64, radius: f64) -> Result<Vec<RegionSlice>> {
    let lm = landmarks(delta, radius)?;
    let r = radius;
    let circle_a = Boundary::UpperArc { cx: 0.0, cy: 0.0, r };
    let circle_b = Boundary::UpperArc { cx: delta, cy: 0.0, r };
    let circle_b2 = Boundary::UpperArc { cx: delta, cy: 0.0, r: 2.0 * r };
    let slice = |x_lo, x_hi, y_lo, y_hi| RegionSlice { x_lo, x_hi, y_lo, y_hi };

    let slices = match lm.regime {
        Regime::Far => vec![
            slice(lm.x_a, lm.x_b, Boundary::Axis, circle_b2),
            slice(lm.x_b, r, Boundary::Axis, circle_a),
        ],
        Regime::Narrow | Regime::Mid => {
            // present in both near regimes
            let (x_c, x_d, y_d) = (lm.x_c.unwrap(), lm.x_d.unwrap(), lm.y_d.unwrap());
            let d_upper = Boundary::UpperArc { cx: x_d, cy: y_d, r };
            let d_lower = Boundary::LowerArc { cx: x_d, cy: y_d, r };
            if lm.regime == Regime::Narrow {
                vec![
                    slice(lm.x_a, lm.x_b, d_lower, d_upper),
                    slice(lm.x_b, 0.0, d_lower, circle_a),
                    slice(0.0, x_c, Boundary::Axis, circle_a),
                    slice(x_c, x_d, circle_b, circle_a),
                ]
            } else {
                vec![
                    slice(lm.x_a, 0.0, d_lower, d_upper),
                    slice(0.0, lm.x_b, Boundary::Axis, circle_b2),
                    slice(lm.x_b, x_c, Boundary::Axis, circle_a),
                    slice(x_c, x_d, circle_b, circle_a),
                ]
            }
        }
    };
    // zero-width strips appear at the regime ends (e.g. delta = 3R, where
    // the region shrinks to a point)
    Ok(slices
        .into_iter()
        .filter(|s| s.x_hi - s.x_lo > DISTANCE_EPS)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const R: f64 = 1.0;

    #[test]
    fn lens_area_reference_values() {
        assert!((lens_area(0.0, R).unwrap() - PI).abs() < 1e-15);
        assert_eq!(lens_area(2.0, R).unwrap(), 0.0);
        assert_eq!(lens_area(3.7, R).unwrap(), 0.0);
        let expected = 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0;
        assert!((lens_area(1.0, R).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 1.228_369_698).abs() < 1e-8);
    }

    #[test]
    fn lens_area_rejects_bad_input() {
        assert!(lens_area(-0.1, R).is_err());
        assert!(lens_area(0.5, 0.0).is_err());
        assert!(lens_area(f64::NAN, R).is_err());
    }

    #[test]
    fn lens_area_scales_with_radius_squared() {
        let r = 0.055;
        let scaled = lens_area(1.3 * r, r).unwrap();
        assert!((scaled - r * r * lens_area(1.3, 1.0).unwrap()).abs() < 1e-16);
    }

    #[test]
    fn triple_area_degenerate_cases() {
        let o = Point2D::ORIGIN;
        assert!((tri_circle_area(o, o, o, R).unwrap() - PI).abs() < 1e-15);
        let far = Point2D::new(2.5, 0.0);
        assert_eq!(tri_circle_area(o, Point2D::new(0.5, 0.0), far, R).unwrap(), 0.0);
        // two coincident, third offset: reduces to a lens
        let p = Point2D::new(1.0, 0.0);
        let got = tri_circle_area(o, o, p, R).unwrap();
        assert!((got - lens_area(1.0, R).unwrap()).abs() < 1e-14);
        // three disks whose pairwise lenses miss each other
        let t = tri_circle_area(
            Point2D::new(0.0, 0.0),
            Point2D::new(1.9, 0.0),
            Point2D::new(0.95, 1.9 * 3f64.sqrt() / 2.0),
            R,
        )
        .unwrap();
        assert_eq!(t, 0.0);
        assert!(tri_circle_area(o, o, o, -1.0).is_err());
    }

    #[test]
    fn triple_area_collinear_centers_is_outer_lens() {
        let a = Point2D::new(0.0, 0.0);
        let m = Point2D::new(0.6, 0.0);
        let b = Point2D::new(1.2, 0.0);
        let got = tri_circle_area(a, m, b, R).unwrap();
        assert!((got - lens_area(1.2, R).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn triple_area_symmetric_under_permutation() {
        let p = [
            Point2D::new(0.0, 0.0),
            Point2D::new(1.0, 0.0),
            Point2D::new(0.5, 0.5),
        ];
        let base = tri_circle_area(p[0], p[1], p[2], R).unwrap();
        for (i, j, k) in [(1, 2, 0), (2, 0, 1), (0, 2, 1), (2, 1, 0), (1, 0, 2)] {
            let v = tri_circle_area(p[i], p[j], p[k], R).unwrap();
            assert!((v - base).abs() < 1e-13);
        }
    }

    #[test]
    fn sigma_k_examples() {
        // |bk| > 2R
        assert_eq!(sigma_k(1.5, Point2D::new(-0.6, 0.0), R).unwrap(), 0.0);
        // far regime: plain lens
        let got = sigma_k(2.5, Point2D::new(1.3, 0.0), R).unwrap();
        assert!((got - lens_area(1.2, R).unwrap()).abs() < 1e-14);
        // near regime: the disk of a removes part of the lens
        let k = Point2D::new(0.6, 0.2);
        let s = sigma_k(1.5, k, R).unwrap();
        let lens = lens_area(Point2D::new(1.5, 0.0).distance(&k), R).unwrap();
        assert!(s > 0.0 && s < lens);
        assert!(sigma_k(1.0, k, R).is_err());
        assert!(sigma_k(3.01, k, R).is_err());
    }

    #[test]
    fn landmarks_per_regime() {
        let lm = landmarks(1.2, R).unwrap();
        assert_eq!(lm.regime, Regime::Narrow);
        assert!((lm.x_a + 0.4).abs() < 1e-15);
        assert!((lm.x_c.unwrap() - 0.2).abs() < 1e-15);
        assert!((lm.x_d.unwrap() - 0.6).abs() < 1e-15);
        assert!((lm.y_d.unwrap() - (4.0f64 - 1.44).sqrt() / 2.0).abs() < 1e-15);

        let lm = landmarks(2.5, R).unwrap();
        assert_eq!(lm.regime, Regime::Far);
        assert!((lm.x_a - 0.5).abs() < 1e-15);
        assert!((lm.x_b - 0.65).abs() < 1e-15);
        assert!(lm.x_c.is_none() && lm.y_d.is_none());

        assert!(landmarks(1.0, R).is_err());
        assert!(landmarks(3.0 + 1e-9, R).is_err());
        assert_eq!(landmarks(3.0, R).unwrap().regime, Regime::Far);
        assert_eq!(landmarks(2.0, R).unwrap().regime, Regime::Mid);
    }

    #[test]
    fn landmark_formulas_agree_at_sqrt3() {
        let delta = 3f64.sqrt() * R;
        let narrow = (delta - (3.0 * (4.0 * R * R - delta * delta)).sqrt()) / 4.0;
        let mid = (delta * delta - 3.0 * R * R) / (2.0 * delta);
        assert!((narrow - mid).abs() < 1e-12);
        assert_eq!(landmarks(delta, R).unwrap().regime, Regime::Narrow);
    }

    #[test]
    fn landmark_ordering() {
        for i in 1..300 {
            let delta = 1.0 + 2.0 * i as f64 / 300.0;
            let lm = landmarks(delta, R).unwrap();
            assert!(lm.x_a < lm.x_b, "delta {delta}");
            if let (Some(c), Some(d), Some(yd)) = (lm.x_c, lm.x_d, lm.y_d) {
                assert!(lm.x_b < c, "delta {delta}");
                // C and D merge on the axis at delta = 2R
                if delta < 2.0 * R {
                    assert!(c < d && yd > 0.0, "delta {delta}");
                } else {
                    assert!(c <= d && yd >= 0.0, "delta {delta}");
                }
            }
        }
    }

    #[test]
    fn slice_counts_and_far_shape() {
        let far = region_slices(2.5, R).unwrap();
        assert_eq!(far.len(), 2);
        assert_eq!(far[0].y_hi, Boundary::UpperArc { cx: 2.5, cy: 0.0, r: 2.0 });
        assert_eq!(far[1].y_hi, Boundary::UpperArc { cx: 0.0, cy: 0.0, r: 1.0 });
        assert_eq!(far[1].x_hi, 1.0);
        assert!(far.iter().all(|s| s.y_lo == Boundary::Axis));

        let narrow = region_slices(1.2, R).unwrap();
        assert_eq!(narrow.len(), 4);
        assert!((narrow[0].x_lo + 0.4).abs() < 1e-15);
        assert!(matches!(narrow[0].y_lo, Boundary::LowerArc { .. }));
        assert!(matches!(narrow[0].y_hi, Boundary::UpperArc { cx, .. } if cx == 0.6));
        assert_eq!(region_slices(1.9, R).unwrap().len(), 4);
    }

    #[test]
    fn slices_are_contiguous_and_ordered() {
        for i in 1..=200 {
            let delta = 1.0 + 2.0 * i as f64 / 200.0;
            let slices = region_slices(delta, R).unwrap();
            for w in slices.windows(2) {
                assert_eq!(w[0].x_hi, w[1].x_lo);
                let x = w[0].x_hi;
                assert!((w[0].y_hi.eval(x) - w[1].y_hi.eval(x)).abs() < 1e-9, "delta {delta}");
            }
            for s in &slices {
                assert!(s.x_lo <= s.x_hi);
                for j in 0..=20 {
                    let x = s.x_lo + (s.x_hi - s.x_lo) * j as f64 / 20.0;
                    assert!(s.y_lo.eval(x) <= s.y_hi.eval(x) + 1e-9, "delta {delta} x {x}");
                }
            }
        }
    }
}
