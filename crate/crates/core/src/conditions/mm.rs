//! The interior-sign condition: `grad f . (x + (0, kappa)) + (3 + d2 kappa) f >= 0`.

use serde::{Deserialize, Serialize};

use crate::domain::{AdPaymentSchedule, DensityKind, DensityModel, Point, TypeSpace};
use crate::error::Result;

pub const MM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmResult {
    pub min: f64,
    pub argmin: Point,
    pub pass: bool,
    pub method: String,
}

/// The quantity whose nonnegativity is required; equals minus the interior density.
pub fn mm_value(d: &DensityModel, kappa: &AdPaymentSchedule, x: Point) -> Result<f64> {
    let f = d.value(x);
    let g = d.gradient(x);
    let k = kappa.value(x);
    let dk = kappa.d2(x)?;
    Ok(g[0] * x[0] + g[1] * (x[1] + k) + (3.0 + dk) * f)
}

pub fn check_mm(d: &DensityModel, kappa: &AdPaymentSchedule) -> Result<MmResult> {
    let s = *d.space();
    let (min, argmin, method) = match (d.kind(), kappa.as_constant()) {
        (DensityKind::Uniform, Some(_)) => (3.0 * d.value(s.corner()), s.corner(), "closed_form"),
        (DensityKind::LogLinear { a, b }, Some(k)) => {
            let (v, x) = log_linear_min(&s, d.norm_const(), *a, *b, k);
            (v, x, "closed_form")
        }
        _ => {
            let (v, x) = mm_grid_min(d, kappa)?;
            (v, x, "grid_search")
        }
    };
    Ok(MmResult {
        min,
        argmin,
        pass: min >= -MM_TOL,
        method: method.into(),
    })
}

/// For `f = C exp(t)` with `t = -a x1 + b x2` the quantity is
/// `C (t + 3 + k b) exp(t)`, minimized over the range of `t` on the box.
fn log_linear_min(s: &TypeSpace, c: f64, a: f64, b: f64, k: f64) -> (f64, Point) {
    let t_of = |x: Point| -a * x[0] + b * x[1];
    let corners = [
        [s.x1_lo, s.x2_lo],
        [s.x1_lo, s.x2_hi],
        [s.x1_hi, s.x2_lo],
        [s.x1_hi, s.x2_hi],
    ];
    let h = |t: f64| c * (t + 3.0 + k * b) * t.exp();
    let mut best = (f64::INFINITY, corners[0]);
    for x in corners {
        let v = h(t_of(x));
        if v < best.0 {
            best = (v, x);
        }
    }
    let tmin = corners.iter().map(|&x| t_of(x)).fold(f64::INFINITY, f64::min);
    let tmax = corners.iter().map(|&x| t_of(x)).fold(f64::NEG_INFINITY, f64::max);
    let tstar = -(3.0 + k * b) - 1.0;
    if tstar > tmin && tstar < tmax {
        let v = h(tstar);
        if v < best.0 {
            best = (v, level_point(s, a, b, tstar).unwrap_or(best.1));
        }
    }
    best
}

/// A point of the box on the line `-a x1 + b x2 = t`.
fn level_point(s: &TypeSpace, a: f64, b: f64, t: f64) -> Option<Point> {
    if a != 0.0 {
        for x2 in [s.x2_lo, s.x2_hi] {
            let x1 = (b * x2 - t) / a;
            if x1 >= s.x1_lo && x1 <= s.x1_hi {
                return Some([x1, x2]);
            }
        }
    }
    if b != 0.0 {
        for x1 in [s.x1_lo, s.x1_hi] {
            let x2 = (t + a * x1) / b;
            if x2 >= s.x2_lo && x2 <= s.x2_hi {
                return Some([x1, x2]);
            }
        }
    }
    None
}

/// 65x65 lattice followed by a compass search from the best lattice point.
pub fn mm_grid_min(d: &DensityModel, kappa: &AdPaymentSchedule) -> Result<(f64, Point)> {
    let s = *d.space();
    let mut best = (f64::INFINITY, s.corner());
    for x in s.lattice(65, 65) {
        let v = mm_value(d, kappa, x)?;
        if v < best.0 {
            best = (v, x);
        }
    }
    let clamp = |x: Point| {
        [
            x[0].clamp(s.x1_lo, s.x1_hi),
            x[1].clamp(s.x2_lo, s.x2_hi),
        ]
    };
    let mut h = [s.width() / 64.0, s.height() / 64.0];
    let dirs = [
        [1.0, 0.0],
        [-1.0, 0.0],
        [0.0, 1.0],
        [0.0, -1.0],
        [1.0, 1.0],
        [1.0, -1.0],
        [-1.0, 1.0],
        [-1.0, -1.0],
    ];
    while h[0] > 1e-13 * s.width().max(1.0) {
        let mut moved = false;
        for dir in dirs {
            let y = clamp([best.1[0] + dir[0] * h[0], best.1[1] + dir[1] * h[1]]);
            let v = mm_value(d, kappa, y)?;
            if v < best.0 {
                best = (v, y);
                moved = true;
            }
        }
        if !moved {
            h = [0.5 * h[0], 0.5 * h[1]];
        }
    }
    Ok(best)
}
