//! Buyer choice, incentive checks and seller revenue.

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{AdPaymentSchedule, CanonicalMechanism, DensityModel, DiscreteInstance, Mechanism, Point};
use crate::error::{Error, Result};
use crate::measure::MeasureDecomposition;
use crate::quadrature::{Integrator, QuadratureSpec};

/// Utilities closer than this are treated as ties.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChoiceOutcome {
    pub item_index: usize,
    pub utility: f64,
    pub payment: f64,
    pub good_allocated: f64,
    pub ad_allocated: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Lowest menu index among the utility maximizers.
    LowestIndex,
    /// Highest seller revenue `price + kappa q2` among the maximizers, then lowest index.
    SellerFavorable,
}

pub fn best_response(menu: &Mechanism, x: Point) -> ChoiceOutcome {
    best_response_with(menu, x, TieBreak::LowestIndex, 0.0)
}

/// Best response under `tie`; `kappa` is the advertiser payment at `x`.
pub fn best_response_with(menu: &Mechanism, x: Point, tie: TieBreak, kappa: f64) -> ChoiceOutcome {
    let items = menu.items();
    let best = items
        .iter()
        .map(|it| it.utility(x))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut pick = None;
    for (i, it) in items.iter().enumerate() {
        if it.utility(x) < best - TIE_TOL {
            continue;
        }
        pick = match (pick, tie) {
            (None, _) => Some(i),
            (Some(j), TieBreak::LowestIndex) => Some(j),
            (Some(j), TieBreak::SellerFavorable) => {
                let rev = |k: usize| items[k].price + kappa * items[k].q2;
                if rev(i) > rev(j) + TIE_TOL {
                    Some(i)
                } else {
                    Some(j)
                }
            }
        };
    }
    let i = pick.expect("menu is never empty");
    let it = items[i];
    ChoiceOutcome {
        item_index: i,
        utility: it.utility(x),
        payment: it.price,
        good_allocated: it.q1,
        ad_allocated: it.q2,
    }
}

pub fn indirect_utility(menu: &Mechanism, x: Point) -> f64 {
    best_response(menu, x).utility
}

/// `∫ (price + kappa q2) f` over each cell of the canonical partition.
pub fn revenue_continuous(
    mech: &CanonicalMechanism,
    d: &DensityModel,
    kappa: &AdPaymentSchedule,
    q: &QuadratureSpec,
) -> Result<f64> {
    let s = d.space();
    mech.validate(s)?;
    let integ = Integrator::new(*q)?;
    let mut total = 0.0;
    for cell in mech.regions(s) {
        if cell.item.is_default() {
            continue;
        }
        for t in cell.region.trapezoids() {
            total += integ.integrate_2d(
                t.a,
                t.b,
                |x1| t.lower.eval(x1),
                |x1| t.upper.eval(x1),
                |x1, x2| {
                    let x = [x1, x2];
                    (cell.item.price + kappa.value(x) * cell.item.q2) * d.value(x)
                },
            )?;
        }
    }
    Ok(total)
}

/// `∫ u dμ` for the indirect utility of a canonical mechanism, cell by cell.
pub fn revenue_via_measure(mech: &CanonicalMechanism, m: &MeasureDecomposition) -> Result<f64> {
    let s = m.space();
    mech.validate(s)?;
    let mut total = 0.0;
    for cell in mech.regions(s) {
        if cell.item.is_default() {
            continue;
        }
        let item = cell.item;
        total += m.integrate(&cell.region, |x| item.utility(x))?.total();
    }
    Ok(total)
}

/// Expected revenue on a discrete instance; indifferent buyers take the
/// option that pays the seller most.
pub fn revenue_discrete(menu: &Mechanism, inst: &DiscreteInstance, kappa: &AdPaymentSchedule) -> f64 {
    revenue_discrete_with(menu, inst, kappa, TieBreak::SellerFavorable)
}

pub fn revenue_discrete_with(
    menu: &Mechanism,
    inst: &DiscreteInstance,
    kappa: &AdPaymentSchedule,
    tie: TieBreak,
) -> f64 {
    inst.points()
        .iter()
        .map(|p| {
            let k = kappa.value(p.x);
            let c = best_response_with(menu, p.x, tie, k);
            p.prob * (c.payment + k * c.ad_allocated)
        })
        .sum()
}

/// An IC or IR failure: `other` is `None` for IR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub x: Point,
    pub other: Option<Point>,
    pub gain: f64,
}

/// IC/IR audit of best responses over `sample`.
pub fn check_ic_ir(menu: &Mechanism, sample: &[Point]) -> Vec<Violation> {
    let assigned: Vec<usize> = sample.iter().map(|&x| best_response(menu, x).item_index).collect();
    check_ic_ir_assigned(menu, sample, &assigned).expect("assignment has one entry per type")
}

/// IC/IR audit of an arbitrary assignment of menu items to sampled types.
pub fn check_ic_ir_assigned(menu: &Mechanism, sample: &[Point], assigned: &[usize]) -> Result<Vec<Violation>> {
    if assigned.len() != sample.len() {
        return Err(Error::domain("assignment length differs from sample length"));
    }
    let items = menu.items();
    if let Some(&bad) = assigned.iter().find(|&&i| i >= items.len()) {
        return Err(Error::domain(format!("menu has no item {bad}")));
    }
    let out = sample
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, &x)| {
            let own = items[assigned[i]].utility(x);
            let mut v = Vec::new();
            if own < -TIE_TOL {
                v.push(Violation { x, other: None, gain: -own });
            }
            for (j, &y) in sample.iter().enumerate() {
                if j == i {
                    continue;
                }
                let gain = items[assigned[j]].utility(x) - own;
                if gain > TIE_TOL {
                    v.push(Violation { x, other: Some(y), gain });
                }
            }
            v
        })
        .collect();
    Ok(out)
}

/// Root of `f(k) - g(k)` on `[lo, hi]` by bisection.
pub fn revenue_crossing<F, G>(f: F, g: G, lo: f64, hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let h = |k: f64| f(k) - g(k);
    let (mut a, mut b) = (lo, hi);
    let (ha, hb) = (h(a), h(b));
    if ha == 0.0 {
        return Ok(a);
    }
    if hb == 0.0 {
        return Ok(b);
    }
    if ha.signum() == hb.signum() {
        return Err(Error::NoRoot { lo, hi, g_lo: ha, g_hi: hb });
    }
    let mut sa = ha.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let hm = h(m);
        if hm == 0.0 || (b - a) < 1e-15 {
            return Ok(m);
        }
        if hm.signum() == sa {
            a = m;
            sa = hm.signum();
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}
