//! Prices from the zero-mass equations of the canonical partitions.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Axis, CanonicalMechanism, HalfPlane, MechanismFamily, Region, RegionLabel, TypeSpace};
use crate::error::{Error, Result};
use crate::measure::{mu_of_region, MeasureDecomposition};

pub const RESIDUAL_TOL: f64 = 1e-8;
pub const MAX_BISECTIONS: usize = 200;
const FD_STEP: f64 = 1e-6;
const MAX_NEWTON: usize = 100;
const DEDUP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub family: MechanismFamily,
    pub p_g: Option<f64>,
    pub p_sb: Option<f64>,
    /// `|μ|` of every region of the calibrated partition.
    pub residuals: BTreeMap<String, f64>,
    pub iterations: usize,
    /// Bisection brackets, or the Newton path, of the returned solve.
    pub trace: Vec<[f64; 2]>,
    /// Every distinct feasible root found (two-price solves only).
    pub roots: Vec<[f64; 2]>,
    pub notes: Vec<String>,
}

impl CalibrationResult {
    pub fn mechanism(&self) -> Result<CanonicalMechanism> {
        match (self.family, self.p_g, self.p_sb) {
            (MechanismFamily::GoodOnly, Some(p_g), _) => Ok(CanonicalMechanism::GoodOnly { p_g }),
            (MechanismFamily::SingleBundle, _, Some(p_sb)) => Ok(CanonicalMechanism::SingleBundle { p_sb }),
            (MechanismFamily::AdTiered, Some(p_g), Some(p_sb)) => Ok(CanonicalMechanism::AdTiered { p_g, p_sb }),
            _ => Err(Error::numeric("calibration result is missing a price")),
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.values().cloned().fold(0.0, f64::max)
    }
}

pub fn calibrate(m: &MeasureDecomposition, family: MechanismFamily) -> Result<CalibrationResult> {
    match family {
        MechanismFamily::GoodOnly => solve_good_only_price(m),
        MechanismFamily::SingleBundle => solve_single_bundle_price(m),
        MechanismFamily::AdTiered => solve_ad_tiered_prices(m),
    }
}

fn mass(m: &MeasureDecomposition, r: &Region) -> Result<f64> {
    Ok(mu_of_region(m, r)?.total())
}

struct Bisection {
    root: f64,
    value: f64,
    iterations: usize,
    trace: Vec<[f64; 2]>,
}

/// Bisection on a sign change; `g_hi` is supplied separately so the caller
/// can pass a one-sided limit at the upper end.
fn bisect<G: Fn(f64) -> Result<f64>>(g: G, lo: f64, hi: f64, g_lo: f64, g_hi: f64) -> Result<Bisection> {
    if g_lo == 0.0 {
        return Ok(Bisection { root: lo, value: 0.0, iterations: 0, trace: vec![[lo, hi]] });
    }
    if g_hi == 0.0 {
        return Ok(Bisection { root: hi, value: 0.0, iterations: 0, trace: vec![[lo, hi]] });
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::NoRoot { lo, hi, g_lo, g_hi });
    }
    let (mut a, mut b, mut ga) = (lo, hi, g_lo);
    let mut trace = vec![[a, b]];
    let mut best = if g_lo.abs() < g_hi.abs() { (lo, g_lo) } else { (hi, g_hi) };
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS && b - a > 4.0 * f64::EPSILON * (1.0 + a.abs().max(b.abs())) {
        iterations += 1;
        let c = 0.5 * (a + b);
        let gc = g(c)?;
        if gc.abs() < best.1.abs() {
            best = (c, gc);
        }
        if gc == 0.0 {
            a = c;
            b = c;
        } else if gc.signum() == ga.signum() {
            a = c;
            ga = gc;
        } else {
            b = c;
        }
        let w_prev = trace.last().map(|t| t[1] - t[0]).unwrap_or(f64::INFINITY);
        assert!(b - a <= w_prev, "bisection bracket grew");
        trace.push([a, b]);
    }
    assert!(iterations <= MAX_BISECTIONS);
    Ok(Bisection { root: best.0, value: best.1, iterations, trace })
}

fn good_only_cells(s: &TypeSpace, p: f64) -> (Region, Region) {
    let full = Region::full(*s);
    (
        full.clone().with(HalfPlane::le(Axis::X1, p)),
        full.with(HalfPlane::gt(Axis::X1, p)),
    )
}

/// Root of `p ↦ μ({x1 ≤ p})` on `[x1_lo, x1_hi]`. The value at the upper
/// end is the left limit, which excludes the right edge.
pub fn solve_good_only_price(m: &MeasureDecomposition) -> Result<CalibrationResult> {
    let s = *m.space();
    let g = |p: f64| mass(m, &good_only_cells(&s, p).0);
    let g_lo = g(s.x1_lo)?;
    let g_hi = mass(m, &Region::full(s).with(HalfPlane::lt(Axis::X1, s.x1_hi)))?;
    let b = bisect(g, s.x1_lo, s.x1_hi, g_lo, g_hi)?;
    let (z, w) = good_only_cells(&s, b.root);
    let (mz, mw) = (mass(m, &z)?, mass(m, &w)?);
    consistency(mz + mw, "good-only")?;
    let mut notes = Vec::new();
    if b.value.abs() >= RESIDUAL_TOL {
        notes.push(format!("bisection stalled with |μ(Z)| = {:e}", b.value.abs()));
    }
    Ok(CalibrationResult {
        family: MechanismFamily::GoodOnly,
        p_g: Some(b.root),
        p_sb: None,
        residuals: BTreeMap::from([("Z".into(), mz.abs()), ("W".into(), mw.abs())]),
        iterations: b.iterations,
        trace: b.trace,
        roots: vec![],
        notes,
    })
}

fn single_bundle_cells(s: &TypeSpace, p: f64) -> (Region, Region) {
    let full = Region::full(*s);
    (
        full.clone().with(HalfPlane::le(Axis::Sum, p)),
        full.with(HalfPlane::gt(Axis::Sum, p)),
    )
}

/// Root of `p ↦ μ({x1 + x2 ≤ p})` below the single-bundle price bound.
pub fn solve_single_bundle_price(m: &MeasureDecomposition) -> Result<CalibrationResult> {
    let s = *m.space();
    let lo = s.x1_lo + s.x2_lo;
    let hi = (s.x1_hi + s.x2_lo).min(s.x1_lo + s.x2_hi);
    let h = |p: f64| mass(m, &single_bundle_cells(&s, p).0);
    let b = bisect(h, lo, hi, h(lo)?, h(hi)?)?;
    let (z, y) = single_bundle_cells(&s, b.root);
    let (mz, my) = (mass(m, &z)?, mass(m, &y)?);
    consistency(mz + my, "single-bundle")?;
    let mut notes = Vec::new();
    if b.value.abs() >= RESIDUAL_TOL {
        notes.push(format!("bisection stalled with |μ(Z)| = {:e}", b.value.abs()));
    }
    if (b.root - hi).abs() <= 1e-9 {
        notes.push("price sits on the single-bundle price bound".into());
    }
    Ok(CalibrationResult {
        family: MechanismFamily::SingleBundle,
        p_g: None,
        p_sb: Some(b.root),
        residuals: BTreeMap::from([("Z".into(), mz.abs()), ("Y".into(), my.abs())]),
        iterations: b.iterations,
        trace: b.trace,
        roots: vec![],
        notes,
    })
}

fn consistency(total: f64, what: &str) -> Result<()> {
    if total.abs() > 1e-7 {
        return Err(Error::numeric(format!(
            "{what} cells carry total mass {total:e}; quadrature is inconsistent"
        )));
    }
    Ok(())
}

/// Feasible set of the two-price menu: `p_g ∈ [x1_lo, x1_hi]` and
/// `x1_lo + x2_lo ≤ p_sb ≤ min(p_g, x1_lo + x2_hi)`.
fn project(s: &TypeSpace, p: [f64; 2]) -> [f64; 2] {
    let pg = p[0].clamp(s.x1_lo, s.x1_hi);
    let cap = pg.min(s.x1_lo + s.x2_hi);
    let floor = (s.x1_lo + s.x2_lo).min(cap);
    [pg, p[1].clamp(floor, cap)]
}

fn feasible(s: &TypeSpace, p: [f64; 2]) -> bool {
    let q = project(s, p);
    (q[0] - p[0]).abs() <= 1e-12 && (q[1] - p[1]).abs() <= 1e-12
}

fn ad_tiered_masses(m: &MeasureDecomposition, p: [f64; 2]) -> Result<BTreeMap<RegionLabel, f64>> {
    let mech = CanonicalMechanism::AdTiered { p_g: p[0], p_sb: p[1] };
    let mut out = BTreeMap::new();
    for c in mech.regions(m.space()) {
        out.insert(c.label, mass(m, &c.region)?);
    }
    Ok(out)
}

fn residual_map(m: &MeasureDecomposition, p: [f64; 2]) -> Result<[f64; 2]> {
    let r = ad_tiered_masses(m, p)?;
    Ok([r[&RegionLabel::W], r[&RegionLabel::Y]])
}

fn norm_inf(v: [f64; 2]) -> f64 {
    v[0].abs().max(v[1].abs())
}

struct NewtonRun {
    point: [f64; 2],
    residual: f64,
    iterations: usize,
    path: Vec<[f64; 2]>,
}

fn newton(m: &MeasureDecomposition, start: [f64; 2]) -> Result<NewtonRun> {
    let s = *m.space();
    let mut p = start;
    let mut f = residual_map(m, p)?;
    let mut path = vec![p];
    let mut iterations = 0;
    while norm_inf(f) >= RESIDUAL_TOL && iterations < MAX_NEWTON {
        iterations += 1;
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let mut q = p;
            let mut h = FD_STEP;
            q[j] += h;
            if !feasible(&s, q) {
                h = -FD_STEP;
                q[j] = p[j] + h;
            }
            let fq = residual_map(m, q)?;
            for i in 0..2 {
                jac[i][j] = (fq[i] - f[i]) / h;
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-14 {
            break;
        }
        let step = [
            -(jac[1][1] * f[0] - jac[0][1] * f[1]) / det,
            -(-jac[1][0] * f[0] + jac[0][0] * f[1]) / det,
        ];
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let q = project(&s, [p[0] + lambda * step[0], p[1] + lambda * step[1]]);
            let fq = residual_map(m, q)?;
            if norm_inf(fq) < norm_inf(f) {
                p = q;
                f = fq;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        path.push(p);
        if !accepted {
            break;
        }
    }
    Ok(NewtonRun { point: p, residual: norm_inf(f), iterations, path })
}

fn finish_ad_tiered(m: &MeasureDecomposition, run: NewtonRun, roots: Vec<[f64; 2]>, mut notes: Vec<String>) -> Result<CalibrationResult> {
    let masses = ad_tiered_masses(m, run.point)?;
    let mz = masses[&RegionLabel::Z];
    if mz.abs() > 1e-7 {
        return Err(Error::numeric(format!(
            "μ(Z) = {mz:e} at a root of μ(W) = μ(Y) = 0; quadrature is inconsistent"
        )));
    }
    if roots.len() > 1 {
        notes.push(format!("{} distinct feasible roots", roots.len()));
    }
    Ok(CalibrationResult {
        family: MechanismFamily::AdTiered,
        p_g: Some(run.point[0]),
        p_sb: Some(run.point[1]),
        residuals: masses.iter().map(|(k, v)| (k.name().to_string(), v.abs())).collect(),
        iterations: run.iterations,
        trace: run.path,
        roots,
        notes,
    })
}

fn is_degenerate(s: &TypeSpace, p: [f64; 2]) -> bool {
    let mech = CanonicalMechanism::AdTiered { p_g: p[0], p_sb: p[1] };
    mech.regions(s).iter().any(|c| c.region.area() <= 1e-12 * s.area())
}

/// Damped Newton on `(μ(W), μ(Y)) = 0` from a 5x5 grid of feasible starts.
/// Prefers a root whose three cells all have positive area.
pub fn solve_ad_tiered_prices(m: &MeasureDecomposition) -> Result<CalibrationResult> {
    let s = *m.space();
    let mut starts = Vec::new();
    for i in 0..5 {
        let pg = s.x1_lo + (i as f64 + 0.5) / 5.0 * s.width();
        let cap = pg.min(s.x1_lo + s.x2_hi);
        let floor = s.x1_lo + s.x2_lo;
        for j in 0..5 {
            starts.push([pg, floor + (j as f64 + 0.5) / 5.0 * (cap - floor)]);
        }
    }
    let runs: Vec<NewtonRun> = starts.par_iter().map(|&p| newton(m, p)).collect::<Result<_>>()?;
    let mut converged: Vec<NewtonRun> = Vec::new();
    let mut best = f64::INFINITY;
    for r in runs {
        best = best.min(r.residual);
        if r.residual < RESIDUAL_TOL && converged.iter().all(|c| norm_inf([c.point[0] - r.point[0], c.point[1] - r.point[1]]) > DEDUP_TOL) {
            converged.push(r);
        }
    }
    if converged.is_empty() {
        return Err(Error::numeric(format!(
            "no start converged for the two-price system; best residual {best:e}"
        )));
    }
    converged.sort_by(|a, b| a.point[0].total_cmp(&b.point[0]).then(a.point[1].total_cmp(&b.point[1])));
    let roots: Vec<[f64; 2]> = converged.iter().map(|r| r.point).collect();
    let mut notes = Vec::new();
    let degenerate: Vec<bool> = roots.iter().map(|&p| is_degenerate(&s, p)).collect();
    for (p, _) in roots.iter().zip(&degenerate).filter(|(_, d)| **d) {
        notes.push(format!("root ({}, {}) leaves a cell with zero area", p[0], p[1]));
    }
    let pick = degenerate.iter().position(|d| !d).unwrap_or(0);
    let first = converged.swap_remove(pick);
    finish_ad_tiered(m, first, roots, notes)
}

/// Single Newton solve from a caller-supplied feasible guess.
pub fn solve_ad_tiered_from(m: &MeasureDecomposition, guess: [f64; 2]) -> Result<CalibrationResult> {
    let s = *m.space();
    if !feasible(&s, guess) {
        return Err(Error::domain(format!(
            "starting prices ({}, {}) violate x1_lo <= p_g <= x1_hi, p_sb <= min(p_g, x1_lo + x2_hi)",
            guess[0], guess[1]
        )));
    }
    let run = newton(m, guess)?;
    if run.residual >= RESIDUAL_TOL {
        return Err(Error::numeric(format!("Newton did not converge; residual {:e}", run.residual)));
    }
    let p = run.point;
    finish_ad_tiered(m, run, vec![p], vec![])
}
