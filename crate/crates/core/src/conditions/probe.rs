//! Search for a refuting test function among the families used in the
//! necessity arguments: edge, strip and corner exponentials, hinges, and
//! constants. A mechanism is refuted on a cell when some convex function
//! with the cell's monotonicity signature integrates to a positive value
//! against the measure restricted to that cell.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{Axis, CanonicalMechanism, Cell, HalfPlane, MonotonicitySignature, Point, Region, RegionLabel, Edge};
use crate::error::Result;
use crate::measure::MeasureDecomposition;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeWitness {
    pub region: String,
    pub family: String,
    pub params: BTreeMap<String, f64>,
    /// Integral of the normalized test function (sup over the cell is 1).
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub deltas: Vec<f64>,
    pub hinge_points: usize,
    pub threshold: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            deltas: vec![0.1, 0.01, 0.001],
            hinge_points: 16,
            threshold: 1e-6,
        }
    }
}

/// Directions of the exponential families, single-axis first.
const DIRECTIONS: [(i8, i8); 8] = [
    (0, -1),
    (0, 1),
    (-1, 0),
    (1, 0),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

fn admissible(v: MonotonicitySignature, s: (i8, i8)) -> bool {
    s.0 * v.0 >= 0 && s.1 * v.1 >= 0
}

/// Corner points of the cell's closure, enough to bound linear functionals.
fn vertices(r: &Region) -> Vec<Point> {
    let s = r.base();
    let mut out = Vec::new();
    for t in r.trapezoids() {
        for x1 in [t.a, t.b] {
            out.push([x1, t.lower.eval(x1)]);
            out.push([x1, t.upper.eval(x1)]);
        }
    }
    for e in Edge::ALL {
        if let Some((lo, hi)) = r.edge_segment(e) {
            out.push(e.point(s, lo));
            out.push(e.point(s, hi));
        }
    }
    if out.is_empty() {
        out.extend(r.feasible_point());
    }
    out
}

fn family_name(r: &Region, s: (i8, i8), anchor: f64) -> String {
    let b = r.base();
    let on = |a: f64, e: f64| (a - e).abs() <= 1e-12 * (1.0 + e.abs());
    match s {
        (0, -1) if on(-anchor, b.x2_lo) => "edge_bottom".into(),
        (0, 1) if on(anchor, b.x2_hi) => "edge_top".into(),
        (-1, 0) if on(-anchor, b.x1_lo) => "edge_left".into(),
        (1, 0) if on(anchor, b.x1_hi) => "edge_right".into(),
        (0, _) => "strip_x2".into(),
        (_, 0) => "strip_x1".into(),
        _ => format!("corner({}, {})", s.0, s.1),
    }
}

struct Target {
    label: RegionLabel,
    region: Region,
    signature: MonotonicitySignature,
    vertices: Vec<Point>,
}

pub fn adversarial_probe(m: &MeasureDecomposition, mech: &CanonicalMechanism) -> Result<Option<ProbeWitness>> {
    adversarial_probe_with(m, mech, &ProbeOptions::default())
}

pub fn adversarial_probe_with(
    m: &MeasureDecomposition,
    mech: &CanonicalMechanism,
    opts: &ProbeOptions,
) -> Result<Option<ProbeWitness>> {
    mech.validate(m.space())?;
    let targets: Vec<Target> = mech
        .regions(m.space())
        .into_iter()
        .filter(|c: &Cell| !c.region.is_empty())
        .map(|c| Target {
            label: c.label,
            signature: MonotonicitySignature::of(c.item.q1, c.item.q2),
            vertices: vertices(&c.region),
            region: c.region,
        })
        .collect();

    let hit = |t: &Target, family: String, params: BTreeMap<String, f64>, value: f64| {
        (value > opts.threshold).then(|| ProbeWitness {
            region: t.label.name().into(),
            family,
            params,
            value,
        })
    };

    for s in DIRECTIONS {
        for t in &targets {
            if !admissible(t.signature, s) {
                continue;
            }
            let lin = |x: Point| s.0 as f64 * x[0] + s.1 as f64 * x[1];
            let anchor = t.vertices.iter().map(|&x| lin(x)).fold(f64::NEG_INFINITY, f64::max);
            for &delta in &opts.deltas {
                let v = m
                    .integrate(&t.region, |x| ((lin(x) - anchor) / delta).min(0.0).exp())?
                    .total();
                let params = BTreeMap::from([("delta".to_string(), delta), ("anchor".to_string(), anchor)]);
                if let Some(w) = hit(t, family_name(&t.region, s, anchor), params, v) {
                    return Ok(Some(w));
                }
            }
        }
    }

    for t in &targets {
        for (axis, idx, sign) in [(Axis::X1, 0usize, 1i8), (Axis::X1, 0, -1), (Axis::X2, 1, 1), (Axis::X2, 1, -1)] {
            let v_i = if idx == 0 { t.signature.0 } else { t.signature.1 };
            if sign * v_i < 0 {
                continue;
            }
            let lo = t.vertices.iter().map(|x| x[idx]).fold(f64::INFINITY, f64::min);
            let hi = t.vertices.iter().map(|x| x[idx]).fold(f64::NEG_INFINITY, f64::max);
            if !(hi > lo) {
                continue;
            }
            let n = opts.hinge_points.max(2);
            for j in 0..n - 1 {
                let knot = lo + (hi - lo) * j as f64 / (n - 1) as f64;
                let (piece, scale) = if sign > 0 {
                    (t.region.clone().with(HalfPlane::ge(axis, knot)), hi - knot)
                } else {
                    (t.region.clone().with(HalfPlane::le(axis, lo + hi - knot)), hi - knot)
                };
                let pivot = if sign > 0 { knot } else { lo + hi - knot };
                let v = m
                    .integrate(&piece, |x| (sign as f64 * (x[idx] - pivot)).max(0.0))?
                    .total()
                    / scale;
                let name = format!(
                    "hinge_{}{}",
                    if sign > 0 { "up_" } else { "down_" },
                    if idx == 0 { "x1" } else { "x2" }
                );
                if let Some(w) = hit(t, name, BTreeMap::from([("knot".to_string(), pivot)]), v) {
                    return Ok(Some(w));
                }
            }
        }
    }

    for t in &targets {
        let mass = m.integrate(&t.region, |_| 1.0)?.total();
        for sign in [1.0, -1.0] {
            if let Some(w) = hit(t, "constant".into(), BTreeMap::from([("sign".to_string(), sign)]), sign * mass) {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissibility_follows_signature() {
        let z = MonotonicitySignature(1, 1);
        let y = MonotonicitySignature(-1, -1);
        let w = MonotonicitySignature(-1, 1);
        assert!(admissible(z, (0, 1)) && !admissible(z, (0, -1)));
        assert!(admissible(y, (0, -1)) && !admissible(y, (1, 0)));
        assert!(admissible(w, (-1, 1)) && !admissible(w, (1, 1)));
    }
}
