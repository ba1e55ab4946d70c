use std::fmt;
use std::sync::Arc;

use super::space::{Point, TypeSpace};
use crate::error::{Error, Result};

pub type PointFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// Non-constant advertiser payment `kappa(x)` with an optional analytic `d kappa / d x2`.
#[derive(Clone)]
pub struct GeneralPayment {
    value: PointFn,
    d2: Option<PointFn>,
    label: String,
}

impl fmt::Debug for GeneralPayment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralPayment")
            .field("label", &self.label)
            .field("has_d2", &self.d2.is_some())
            .finish()
    }
}

/// Payment the seller receives from the advertiser whenever ads are shown.
#[derive(Debug, Clone)]
pub enum AdPaymentSchedule {
    Constant(f64),
    General(GeneralPayment),
}

impl AdPaymentSchedule {
    pub fn constant(k: f64) -> Result<Self> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::domain(format!("payment k must be finite and >= 0, got {k}")));
        }
        Ok(AdPaymentSchedule::Constant(k))
    }

    pub fn general(label: impl Into<String>, value: PointFn, d2: Option<PointFn>) -> Self {
        AdPaymentSchedule::General(GeneralPayment {
            value,
            d2,
            label: label.into(),
        })
    }

    /// `kappa(x) = c0 + c1 x1 + c2 x2`.
    pub fn affine(c0: f64, c1: f64, c2: f64) -> Self {
        Self::general(
            format!("{c0} + {c1} x1 + {c2} x2"),
            Arc::new(move |x: Point| c0 + c1 * x[0] + c2 * x[1]),
            Some(Arc::new(move |_: Point| c2)),
        )
    }

    pub fn value(&self, x: Point) -> f64 {
        match self {
            AdPaymentSchedule::Constant(k) => *k,
            AdPaymentSchedule::General(g) => (g.value)(x),
        }
    }

    /// `d kappa / d x2`; an error when a general schedule lacks it.
    pub fn d2(&self, x: Point) -> Result<f64> {
        match self {
            AdPaymentSchedule::Constant(_) => Ok(0.0),
            AdPaymentSchedule::General(g) => match &g.d2 {
                Some(d) => Ok(d(x)),
                None => Err(Error::domain(format!(
                    "payment schedule `{}` has no analytic x2-derivative",
                    g.label
                ))),
            },
        }
    }

    pub fn has_d2(&self) -> bool {
        match self {
            AdPaymentSchedule::Constant(_) => true,
            AdPaymentSchedule::General(g) => g.d2.is_some(),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            AdPaymentSchedule::Constant(k) => Some(*k),
            AdPaymentSchedule::General(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            AdPaymentSchedule::Constant(k) => format!("{k}"),
            AdPaymentSchedule::General(g) => g.label.clone(),
        }
    }

    /// Checks finiteness and nonnegativity on a 65x65 lattice; returns the maximum seen.
    pub fn check_bounded(&self, space: &TypeSpace) -> Result<f64> {
        let mut max = f64::NEG_INFINITY;
        for p in space.lattice(65, 65) {
            let v = self.value(p);
            if !v.is_finite() {
                return Err(Error::domain(format!(
                    "payment is not finite at ({}, {})",
                    p[0], p[1]
                )));
            }
            if v < 0.0 {
                return Err(Error::domain(format!(
                    "payment is negative at ({}, {}): {v}",
                    p[0], p[1]
                )));
            }
            max = max.max(v);
        }
        Ok(max)
    }
}
