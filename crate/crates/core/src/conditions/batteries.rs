//! Necessary and sufficient condition batteries for the three canonical mechanisms.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mm::check_mm;
use super::orthant::{orthant_min, Orientation};
use super::report::{ConditionItem, ConditionReport, Status, Witness};
use crate::domain::{lerp, AdPaymentSchedule, CanonicalMechanism, DensityModel, Region, RegionLabel};
use crate::error::{Error, Result};
use crate::measure::{build_measure, hinge_tail_integral, mu_of_region, MeasureDecomposition};
use crate::quadrature::QuadratureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatteryOptions {
    /// Absolute tolerance for "mass equals zero" and "minimum is nonnegative".
    pub zero_tol: f64,
    /// Band within which a parameter inequality is reported as `boundary`.
    pub boundary_tol: f64,
    pub orthant_grid: (usize, usize),
    pub orthant_refine: usize,
    pub hinge_points: usize,
    pub quadrature: QuadratureSpec,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        BatteryOptions {
            zero_tol: 1e-6,
            boundary_tol: 1e-9,
            orthant_grid: (48, 48),
            orthant_refine: 8,
            hinge_points: 64,
            quadrature: QuadratureSpec::default(),
        }
    }
}

fn require_constant(kappa: &AdPaymentSchedule) -> Result<f64> {
    kappa.as_constant().ok_or_else(|| {
        Error::domain("the canonical batteries need a constant advertiser payment")
    })
}

/// `margin >= 0` with a boundary band.
fn inequality_item(id: &str, margin: f64, witness: f64, tol: f64, detail: String) -> ConditionItem {
    let status = if margin.abs() <= tol {
        Status::Boundary
    } else if margin > 0.0 {
        Status::Pass
    } else {
        Status::Fail
    };
    ConditionItem {
        id: id.into(),
        necessary: true,
        status,
        value: margin,
        witness: Some(Witness::Scalar(witness)),
        detail,
    }
}

fn zero_mass_item(m: &MeasureDecomposition, mech: &CanonicalMechanism, tol: f64) -> Result<ConditionItem> {
    let mut masses = BTreeMap::new();
    let mut worst: f64 = 0.0;
    for cell in mech.regions(m.space()) {
        let v = mu_of_region(m, &cell.region)?.total();
        worst = worst.max(v.abs());
        masses.insert(cell.label.name().to_string(), v);
    }
    let labels: Vec<&str> = masses.keys().map(String::as_str).collect();
    Ok(ConditionItem {
        id: "zero_mass".into(),
        necessary: true,
        status: if worst <= tol { Status::Pass } else { Status::Fail },
        value: worst,
        detail: format!("largest |mu| over regions {}", labels.join(", ")),
        witness: Some(Witness::Masses(masses)),
    })
}

/// Minimum over `t in [x1_lo, p]` of `∫_t^p M`, on a lattice refined by golden section.
pub fn hinge_tail_min(m: &MeasureDecomposition, clip: &Region, p: f64, points: usize) -> Result<(f64, f64)> {
    let lo = m.space().x1_lo;
    if p <= lo {
        return Ok((0.0, lo));
    }
    let n = points.max(3);
    let ts: Vec<f64> = (0..n).map(|i| lerp(lo, p, i, n)).collect();
    let vals: Vec<f64> = ts
        .par_iter()
        .map(|&t| hinge_tail_integral(m, clip, t, p))
        .collect::<Result<_>>()?;
    let mut i = 0;
    for j in 1..n {
        if vals[j] < vals[i] {
            i = j;
        }
    }
    let mut best = (vals[i], ts[i]);
    let (mut a, mut b) = (ts[i.saturating_sub(1)], ts[(i + 1).min(n - 1)]);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = hinge_tail_integral(m, clip, c, p)?;
    let mut fd = hinge_tail_integral(m, clip, d, p)?;
    for _ in 0..40 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = hinge_tail_integral(m, clip, c, p)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = hinge_tail_integral(m, clip, d, p)?;
        }
    }
    for (v, t) in [(fc, c), (fd, d)] {
        if v < best.0 {
            best = (v, t);
        }
    }
    Ok(best)
}

fn hinge_item(m: &MeasureDecomposition, clip: &Region, p: f64, opts: &BatteryOptions, clipped: bool) -> Result<ConditionItem> {
    let (v, t) = hinge_tail_min(m, clip, p, opts.hinge_points)?;
    Ok(ConditionItem {
        id: "hinge_tail".into(),
        necessary: true,
        status: if v >= -opts.zero_tol { Status::Pass } else { Status::Fail },
        value: v,
        witness: Some(Witness::Scalar(t)),
        detail: format!(
            "min over t in [x1_lo, {p}] of the integral of M{} from t to the price; witness is the minimizing t",
            if clipped { " (clipped to Z)" } else { "" }
        ),
    })
}

fn mm_item(d: &DensityModel, kappa: &AdPaymentSchedule) -> Result<ConditionItem> {
    let r = check_mm(d, kappa)?;
    Ok(ConditionItem {
        id: "mm".into(),
        necessary: false,
        status: if r.pass { Status::Pass } else { Status::Fail },
        value: r.min,
        witness: Some(Witness::Point(r.argmin)),
        detail: format!("min of grad f . (x + v_k) + 3f over X ({})", r.method),
    })
}

fn orthant_item(
    m: &MeasureDecomposition,
    clip: &Region,
    label: RegionLabel,
    o: Orientation,
    opts: &BatteryOptions,
) -> Result<ConditionItem> {
    let id = match o {
        Orientation::LowerRight => format!("orthant_{}_lower_right", label.name().to_lowercase()),
        Orientation::UpperRight => format!("orthant_{}_upper_right", label.name().to_lowercase()),
    };
    if clip.is_empty() {
        return Ok(ConditionItem {
            id,
            necessary: false,
            status: Status::Pass,
            value: 0.0,
            witness: None,
            detail: format!("region {} is empty", label.name()),
        });
    }
    let r = orthant_min(m, clip, o, opts.orthant_grid, opts.orthant_refine)?;
    Ok(ConditionItem {
        id,
        necessary: false,
        status: if r.min >= -opts.zero_tol { Status::Pass } else { Status::Fail },
        value: r.min,
        witness: Some(Witness::Point(r.argmin)),
        detail: format!(
            "min of mu(orthant(x) ∩ {}) over {} anchors",
            label.name(),
            r.evaluations
        ),
    })
}

fn region_of(mech: &CanonicalMechanism, m: &MeasureDecomposition, label: RegionLabel) -> Region {
    mech.region(m.space(), label)
        .expect("canonical partition contains the requested cell")
}

fn total_residual(m: &MeasureDecomposition) -> Result<f64> {
    Ok(mu_of_region(m, &Region::full(*m.space()))?.total().abs())
}

pub fn check_good_only(d: &DensityModel, kappa: &AdPaymentSchedule, p_g: f64, opts: &BatteryOptions) -> Result<ConditionReport> {
    let k = require_constant(kappa)?;
    let mech = CanonicalMechanism::GoodOnly { p_g };
    let s = *d.space();
    mech.validate(&s)?;
    let m = build_measure(d, kappa, &opts.quadrature)?;
    let z = region_of(&mech, &m, RegionLabel::Z);
    let w = region_of(&mech, &m, RegionLabel::W);
    let items = vec![
        zero_mass_item(&m, &mech, opts.zero_tol)?,
        inequality_item(
            "k_upper_bound",
            s.x2_hi.abs() - k,
            k,
            opts.boundary_tol,
            format!("k <= |x2_hi| = {}", s.x2_hi.abs()),
        ),
        hinge_item(&m, &z, p_g, opts, false)?,
        mm_item(d, kappa)?,
        orthant_item(&m, &w, RegionLabel::W, Orientation::LowerRight, opts)?,
    ];
    Ok(ConditionReport::new(mech, items, total_residual(&m)?))
}

pub fn check_single_bundle(d: &DensityModel, kappa: &AdPaymentSchedule, p_sb: f64, opts: &BatteryOptions) -> Result<ConditionReport> {
    let k = require_constant(kappa)?;
    let mech = CanonicalMechanism::SingleBundle { p_sb };
    let s = *d.space();
    mech.validate(&s)?;
    let m = build_measure(d, kappa, &opts.quadrature)?;
    let y = region_of(&mech, &m, RegionLabel::Y);
    let cap = (s.x1_hi + s.x2_lo).min(s.x1_lo + s.x2_hi);
    let items = vec![
        zero_mass_item(&m, &mech, opts.zero_tol)?,
        inequality_item(
            "k_lower_bound",
            k - s.x2_lo.abs(),
            k,
            opts.boundary_tol,
            format!("k >= |x2_lo| = {}", s.x2_lo.abs()),
        ),
        inequality_item(
            "price_bound",
            cap - p_sb,
            p_sb,
            opts.boundary_tol,
            format!("p_sb <= min(x1_hi + x2_lo, x1_lo + x2_hi) = {cap}"),
        ),
        mm_item(d, kappa)?,
        orthant_item(&m, &y, RegionLabel::Y, Orientation::UpperRight, opts)?,
    ];
    Ok(ConditionReport::new(mech, items, total_residual(&m)?))
}

pub fn check_ad_tiered(
    d: &DensityModel,
    kappa: &AdPaymentSchedule,
    p_g: f64,
    p_sb: f64,
    opts: &BatteryOptions,
) -> Result<ConditionReport> {
    require_constant(kappa)?;
    let mech = CanonicalMechanism::AdTiered { p_g, p_sb };
    mech.validate(d.space())?;
    let m = build_measure(d, kappa, &opts.quadrature)?;
    let z = region_of(&mech, &m, RegionLabel::Z);
    let w = region_of(&mech, &m, RegionLabel::W);
    let y = region_of(&mech, &m, RegionLabel::Y);
    let p_hinge = p_g.min(d.space().x1_hi);
    let items = vec![
        zero_mass_item(&m, &mech, opts.zero_tol)?,
        hinge_item(&m, &z, p_hinge, opts, true)?,
        mm_item(d, kappa)?,
        orthant_item(&m, &w, RegionLabel::W, Orientation::LowerRight, opts)?,
        orthant_item(&m, &y, RegionLabel::Y, Orientation::UpperRight, opts)?,
    ];
    Ok(ConditionReport::new(mech, items, total_residual(&m)?))
}

pub fn check_mechanism(
    d: &DensityModel,
    kappa: &AdPaymentSchedule,
    mech: &CanonicalMechanism,
    opts: &BatteryOptions,
) -> Result<ConditionReport> {
    match *mech {
        CanonicalMechanism::GoodOnly { p_g } => check_good_only(d, kappa, p_g, opts),
        CanonicalMechanism::SingleBundle { p_sb } => check_single_bundle(d, kappa, p_sb, opts),
        CanonicalMechanism::AdTiered { p_g, p_sb } => check_ad_tiered(d, kappa, p_g, p_sb, opts),
    }
}
