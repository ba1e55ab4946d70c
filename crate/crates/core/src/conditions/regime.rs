use serde::{Deserialize, Serialize};

use crate::domain::{lerp, AdPaymentSchedule, DensityModel, Edge, MechanismFamily, TypeSpace};
use crate::error::{Error, Result};

pub const REGIME_BOUNDARY_TOL: f64 = 1e-9;

/// Mechanism family that can be optimal at a given payment level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub primary: MechanismFamily,
    /// Second admissible family at the exact upper threshold.
    pub also: Option<MechanismFamily>,
}

impl RegimeLabel {
    pub fn name(&self) -> String {
        match self.also {
            Some(a) => format!("{}|{}", self.primary.name(), a.name()),
            None => self.primary.name().to_string(),
        }
    }
}

/// Payment thresholds for densities uniform in the bad dimension: good-only
/// up to `|x2_hi|`, ad-tiered strictly above it up to `|x2_lo|`, and
/// single-bundle from `|x2_lo|` on. At `k = |x2_lo|` both ad-tiered and
/// single-bundle are admissible.
pub fn classify_regime_uniform(s: &TypeSpace, k: f64) -> RegimeLabel {
    let lo_t = s.x2_hi.abs();
    let hi_t = s.x2_lo.abs();
    let tol = REGIME_BOUNDARY_TOL;
    if k <= lo_t + tol {
        RegimeLabel { primary: MechanismFamily::GoodOnly, also: None }
    } else if (k - hi_t).abs() <= tol {
        RegimeLabel {
            primary: MechanismFamily::AdTiered,
            also: Some(MechanismFamily::SingleBundle),
        }
    } else if k < hi_t {
        RegimeLabel { primary: MechanismFamily::AdTiered, also: None }
    } else {
        RegimeLabel { primary: MechanismFamily::SingleBundle, also: None }
    }
}

pub fn classify_regime(d: &DensityModel, k: f64) -> Result<RegimeLabel> {
    if !d.is_uniform_in_x2() {
        return Err(Error::domain(
            "regime classification needs a density uniform in the bad dimension",
        ));
    }
    Ok(classify_regime_uniform(d.space(), k))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSign {
    pub edge: String,
    /// Required sign of the edge density: `nonpositive`, `nonnegative` or `positive`.
    pub required: String,
    /// Smallest signed margin along the edge (nonnegative when the sign holds).
    pub min_margin: f64,
    pub argmin_x1: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSignReport {
    pub family: MechanismFamily,
    pub edges: Vec<EdgeSign>,
    pub pass: bool,
}

const EDGE_SAMPLES: usize = 201;
const EDGE_TOL: f64 = 1e-12;

/// Sign requirements on the measure's horizontal edge densities for a
/// non-constant payment: good-only needs a nonpositive top and nonnegative
/// bottom, single-bundle a nonpositive bottom, and ad-tiered a positive top
/// with nonnegative bottom.
pub fn check_general_kappa_edges(d: &DensityModel, kappa: &AdPaymentSchedule, family: MechanismFamily) -> Result<EdgeSignReport> {
    if !kappa.has_d2() {
        return Err(Error::domain("edge sign check needs an analytic x2-derivative of the payment"));
    }
    let s = *d.space();
    let density = |e: Edge, x1: f64| {
        let x = e.point(&s, x1);
        let f = d.value(x);
        match e {
            Edge::Top => (s.x2_hi + kappa.value(x)) * f,
            _ => -(s.x2_lo + kappa.value(x)) * f,
        }
    };
    let reqs: Vec<(Edge, &str)> = match family {
        MechanismFamily::GoodOnly => vec![(Edge::Top, "nonpositive"), (Edge::Bottom, "nonnegative")],
        MechanismFamily::SingleBundle => vec![(Edge::Bottom, "nonpositive")],
        MechanismFamily::AdTiered => vec![(Edge::Top, "positive"), (Edge::Bottom, "nonnegative")],
    };
    let mut edges = Vec::new();
    for (e, req) in reqs {
        let mut worst = (f64::INFINITY, s.x1_lo);
        for i in 0..EDGE_SAMPLES {
            let x1 = lerp(s.x1_lo, s.x1_hi, i, EDGE_SAMPLES);
            let v = density(e, x1);
            let margin = if req == "nonpositive" { -v } else { v };
            if margin < worst.0 {
                worst = (margin, x1);
            }
        }
        let pass = if req == "positive" { worst.0 > EDGE_TOL } else { worst.0 >= -EDGE_TOL };
        edges.push(EdgeSign {
            edge: e.name().into(),
            required: req.into(),
            min_margin: worst.0,
            argmin_x1: worst.1,
            pass,
        });
    }
    let pass = edges.iter().all(|e| e.pass);
    Ok(EdgeSignReport { family, edges, pass })
}
