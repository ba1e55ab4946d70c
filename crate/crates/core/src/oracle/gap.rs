use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lp::{build_lp, lp_solve};
use super::simplex::LpStatus;
use crate::domain::{discretize, AdPaymentSchedule, CanonicalMechanism, DensityModel, DiscreteInstance, MechanismFamily};
use crate::error::{Error, Result};
use crate::mechanisms::revenue_discrete;
use crate::quadrature::QuadratureSpec;

const IMPROVE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub mechanism: CanonicalMechanism,
    pub revenue: f64,
}

fn candidates(family: MechanismFamily, grid: &[f64]) -> Vec<CanonicalMechanism> {
    match family {
        MechanismFamily::GoodOnly => grid.iter().map(|&p_g| CanonicalMechanism::GoodOnly { p_g }).collect(),
        MechanismFamily::SingleBundle => grid.iter().map(|&p_sb| CanonicalMechanism::SingleBundle { p_sb }).collect(),
        MechanismFamily::AdTiered => {
            let mut out = Vec::new();
            for &p_g in grid {
                for &p_sb in grid {
                    if p_sb <= p_g {
                        out.push(CanonicalMechanism::AdTiered { p_g, p_sb });
                    }
                }
            }
            out
        }
    }
}

fn price_key(m: &CanonicalMechanism) -> (f64, f64) {
    match *m {
        CanonicalMechanism::GoodOnly { p_g } => (p_g, 0.0),
        CanonicalMechanism::SingleBundle { p_sb } => (p_sb, 0.0),
        CanonicalMechanism::AdTiered { p_g, p_sb } => (p_g, p_sb),
    }
}

fn best_of(mut cands: Vec<CanonicalMechanism>, inst: &DiscreteInstance, kappa: &AdPaymentSchedule) -> Result<GridSearchResult> {
    if cands.is_empty() {
        return Err(Error::domain("price grid is empty"));
    }
    cands.sort_by(|a, b| {
        let (a, b) = (price_key(a), price_key(b));
        a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
    });
    let revenues: Vec<f64> = cands.par_iter().map(|m| revenue_discrete(&m.menu(), inst, kappa)).collect();
    let mut best = 0;
    for (i, &r) in revenues.iter().enumerate() {
        if r > revenues[best] + IMPROVE_TOL {
            best = i;
        }
    }
    Ok(GridSearchResult { mechanism: cands[best], revenue: revenues[best] })
}

/// Best menu of one canonical family over a price grid; ties go to the lowest price.
pub fn menu_grid_search(
    inst: &DiscreteInstance,
    kappa: &AdPaymentSchedule,
    family: MechanismFamily,
    price_grid: &[f64],
) -> Result<GridSearchResult> {
    best_of(candidates(family, price_grid), inst, kappa)
}

/// Exact best prices of a family on a discrete instance. Seller-favorable
/// ties make revenue upper semicontinuous in prices, so the optimum sits at
/// a price where some type is indifferent between two items.
pub fn best_family_prices(inst: &DiscreteInstance, kappa: &AdPaymentSchedule, family: MechanismFamily) -> Result<GridSearchResult> {
    let mut goods: Vec<f64> = inst.points().iter().map(|w| w.x[0]).collect();
    let bundles: Vec<f64> = inst.points().iter().map(|w| w.x[0] + w.x[1]).collect();
    let cands = match family {
        MechanismFamily::GoodOnly => goods.into_iter().map(|p_g| CanonicalMechanism::GoodOnly { p_g }).collect(),
        MechanismFamily::SingleBundle => bundles.into_iter().map(|p_sb| CanonicalMechanism::SingleBundle { p_sb }).collect(),
        MechanismFamily::AdTiered => {
            let mut out = Vec::new();
            for &p_sb in &bundles {
                goods.extend(inst.points().iter().map(|w| p_sb - w.x[1]));
            }
            goods.sort_by(f64::total_cmp);
            goods.dedup();
            for &p_sb in &bundles {
                for &p_g in &goods {
                    if p_sb <= p_g {
                        out.push(CanonicalMechanism::AdTiered { p_g, p_sb });
                    }
                }
            }
            out
        }
    };
    best_of(cands, inst, kappa)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub n1: usize,
    pub n2: usize,
    pub lp_value: f64,
    pub lp_certificate: f64,
    pub mechanism_revenue: f64,
    pub gap: f64,
    pub relative_gap: f64,
    /// Same family with prices re-optimized on the discrete instance.
    pub refit: GridSearchResult,
    pub refit_gap: f64,
    pub refit_relative_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapTable {
    pub mechanism: CanonicalMechanism,
    pub rows: Vec<GapRow>,
    /// Fixed-price gaps never increase from one grid to the next.
    pub weakly_decreasing: bool,
    pub refit_weakly_decreasing: bool,
}

pub fn weakly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] + 1e-9)
}

pub fn optimality_gap(
    mech: &CanonicalMechanism,
    d: &DensityModel,
    kappa: &AdPaymentSchedule,
    grids: &[(usize, usize)],
    q: &QuadratureSpec,
) -> Result<GapTable> {
    let rows: Vec<GapRow> = grids
        .par_iter()
        .map(|&(n1, n2)| {
            let inst = discretize(d, n1, n2, q)?;
            let sol = lp_solve(&build_lp(&inst, kappa)?)?;
            if sol.status != LpStatus::Optimal {
                return Err(Error::numeric(format!("LP on {n1}x{n2} grid is {:?}", sol.status)));
            }
            let rev = revenue_discrete(&mech.menu(), &inst, kappa);
            let refit = best_family_prices(&inst, kappa, mech.family())?;
            let rel = |g: f64| if sol.value.abs() > 0.0 { g / sol.value } else { 0.0 };
            Ok(GapRow {
                n1,
                n2,
                lp_value: sol.value,
                lp_certificate: sol.certificate,
                mechanism_revenue: rev,
                gap: sol.value - rev,
                relative_gap: rel(sol.value - rev),
                refit,
                refit_gap: sol.value - refit.revenue,
                refit_relative_gap: rel(sol.value - refit.revenue),
            })
        })
        .collect::<Result<_>>()?;
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    let refit: Vec<f64> = rows.iter().map(|r| r.refit_gap).collect();
    Ok(GapTable {
        mechanism: *mech,
        weakly_decreasing: weakly_decreasing(&gaps),
        refit_weakly_decreasing: weakly_decreasing(&refit),
        rows,
    })
}
