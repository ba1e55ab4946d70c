//! Minimum measure of coordinate orthants anchored over the type space.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Axis, HalfPlane, Point, Region, TypeSpace};
use crate::error::{Error, Result};
use crate::measure::{mu_of_region, MeasureDecomposition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `[x1, x1_hi] x [x2_lo, x2]`.
    LowerRight,
    /// `[x1, x1_hi] x [x2, x2_hi]`.
    UpperRight,
}

pub fn orthant(s: &TypeSpace, x: Point, o: Orientation) -> Region {
    let r = Region::full(*s).with(HalfPlane::ge(Axis::X1, x[0]));
    match o {
        Orientation::LowerRight => r.with(HalfPlane::le(Axis::X2, x[1])),
        Orientation::UpperRight => r.with(HalfPlane::ge(Axis::X2, x[1])),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthantMin {
    pub min: f64,
    pub argmin: Point,
    pub evaluations: usize,
}

fn scan(m: &MeasureDecomposition, clip: &Region, o: Orientation, anchors: &[Point]) -> Result<(f64, Point)> {
    let s = m.space();
    let vals: Vec<f64> = anchors
        .par_iter()
        .map(|&x| Ok(mu_of_region(m, &orthant(s, x, o).intersect(clip))?.total()))
        .collect::<Result<_>>()?;
    let mut best = (f64::INFINITY, anchors[0]);
    for (v, x) in vals.into_iter().zip(anchors) {
        if v < best.0 {
            best = (v, *x);
        }
    }
    Ok(best)
}

/// Minimum of `μ(orthant(x) ∩ clip)` over an `n1 x n2` anchor lattice, then
/// over a `refine`-times finer lattice spanning one coarse cell around the minimizer.
pub fn orthant_min(
    m: &MeasureDecomposition,
    clip: &Region,
    o: Orientation,
    grid: (usize, usize),
    refine: usize,
) -> Result<OrthantMin> {
    if clip.is_empty() {
        return Err(Error::domain("orthant check needs a nonempty clip region"));
    }
    let s = *m.space();
    let (n1, n2) = (grid.0.max(2), grid.1.max(2));
    let coarse = s.lattice(n1, n2);
    let mut best = scan(m, clip, o, &coarse)?;
    let mut evaluations = coarse.len();
    if refine > 0 {
        let h1 = s.width() / (n1 - 1) as f64;
        let h2 = s.height() / (n2 - 1) as f64;
        let lo1 = (best.1[0] - h1).max(s.x1_lo);
        let hi1 = (best.1[0] + h1).min(s.x1_hi);
        let lo2 = (best.1[1] - h2).max(s.x2_lo);
        let hi2 = (best.1[1] + h2).min(s.x2_hi);
        let n = 2 * refine + 1;
        let local = TypeSpace { x1_lo: lo1, x1_hi: hi1, x2_lo: lo2, x2_hi: hi2 }.lattice(n, n);
        let fine = scan(m, clip, o, &local)?;
        evaluations += local.len();
        if fine.0 < best.0 {
            best = fine;
        }
    }
    Ok(OrthantMin {
        min: best.0,
        argmin: best.1,
        evaluations,
    })
}
