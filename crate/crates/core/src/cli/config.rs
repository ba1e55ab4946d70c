//! JSON configuration for the command-line front end.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conditions::BatteryOptions;
use crate::domain::{
    AdPaymentSchedule, CanonicalMechanism, DensityKind, DensityModel, DiscreteInstance, MechanismFamily, TypeSpace,
    WeightedType,
};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub x1: [f64; 2],
    pub x2: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityName {
    Uniform,
    LogLinear,
    ProductPolynomial,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub kind: DensityName,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub coeffs1: Option<Vec<f64>>,
    pub coeffs2: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaymentName {
    Constant,
    Affine,
}

/// `constant` uses `k`; `affine` is `c0 + c1 x1 + c2 x2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaymentConfig {
    pub kind: PaymentName,
    pub k: Option<f64>,
    pub c0: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismConfig {
    pub kind: MechanismFamily,
    pub p_g: Option<f64>,
    pub p_sb: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub gauss_order: Option<usize>,
    pub max_subdivisions: Option<usize>,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedMenu {
    pub label: String,
    pub mechanism: MechanismConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub k_min: f64,
    pub k_max: f64,
    /// Number of k values, endpoints included.
    pub steps: usize,
    /// Fixed menus whose revenue is tabulated against k (discrete instances).
    #[serde(default)]
    pub menus: Vec<NamedMenu>,
    /// Add an LP column using the first oracle grid.
    #[serde(default)]
    pub lp: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_grids")]
    pub grids: Vec<[usize; 2]>,
    pub price_grid: Option<Vec<f64>>,
}

fn default_grids() -> Vec<[usize; 2]> {
    vec![[8, 8]]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteConfig {
    pub types: Vec<[f64; 2]>,
    /// Equal weights when omitted.
    pub probs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub type_space: SpaceConfig,
    pub density: Option<DensityConfig>,
    pub payment: PaymentConfig,
    pub mechanism: Option<MechanismConfig>,
    pub quadrature: Option<QuadratureConfig>,
    pub conditions: Option<BatteryOptions>,
    pub sweep: Option<SweepConfig>,
    pub oracle: Option<OracleConfig>,
    pub discrete: Option<DiscreteConfig>,
}

pub fn parse_config(text: &str) -> Result<AnalysisConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path.is_empty() { ".".into() } else { path }, e.into_inner().to_string())
    })
}

pub fn load_config(path: &Path) -> Result<AnalysisConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn need(v: Option<f64>, path: &str, what: &str) -> Result<f64> {
    v.ok_or_else(|| Error::config(path, format!("missing {what}")))
}

impl AnalysisConfig {
    pub fn space(&self) -> Result<TypeSpace> {
        let s = &self.type_space;
        TypeSpace::new(s.x1[0], s.x1[1], s.x2[0], s.x2[1]).map_err(|e| Error::config("type_space", e.to_string()))
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec> {
        let mut q = QuadratureSpec::default();
        if let Some(o) = &self.quadrature {
            q.gauss_order = o.gauss_order.unwrap_or(q.gauss_order);
            q.max_subdivisions = o.max_subdivisions.unwrap_or(q.max_subdivisions);
            q.abs_tol = o.abs_tol.unwrap_or(q.abs_tol);
            q.rel_tol = o.rel_tol.unwrap_or(q.rel_tol);
        }
        q.validate().map_err(|e| Error::config("quadrature", e.to_string()))?;
        Ok(q)
    }

    pub fn battery_options(&self) -> Result<BatteryOptions> {
        let mut o = self.conditions.unwrap_or_default();
        o.quadrature = self.quadrature()?;
        Ok(o)
    }

    pub fn density_kind(&self) -> Result<DensityKind> {
        let d = self
            .density
            .as_ref()
            .ok_or_else(|| Error::config("density", "this command needs a density"))?;
        Ok(match d.kind {
            DensityName::Uniform => DensityKind::Uniform,
            DensityName::LogLinear => DensityKind::LogLinear {
                a: need(d.a, "density.a", "log-linear coefficient a")?,
                b: need(d.b, "density.b", "log-linear coefficient b")?,
            },
            DensityName::ProductPolynomial => DensityKind::ProductPolynomial {
                coeffs1: d
                    .coeffs1
                    .clone()
                    .ok_or_else(|| Error::config("density.coeffs1", "missing x1 polynomial coefficients"))?,
                coeffs2: d
                    .coeffs2
                    .clone()
                    .ok_or_else(|| Error::config("density.coeffs2", "missing x2 polynomial coefficients"))?,
            },
        })
    }

    pub fn density(&self) -> Result<DensityModel> {
        let kind = self.density_kind()?;
        DensityModel::with_quadrature(kind, self.space()?, &self.quadrature()?).map_err(|e| match e {
            Error::Domain(m) => Error::config("density", m),
            other => other,
        })
    }

    pub fn payment(&self) -> Result<AdPaymentSchedule> {
        let p = &self.payment;
        match p.kind {
            PaymentName::Constant => AdPaymentSchedule::constant(need(p.k, "payment.k", "constant payment k")?)
                .map_err(|e| Error::config("payment.k", e.to_string())),
            PaymentName::Affine => Ok(AdPaymentSchedule::affine(
                need(p.c0, "payment.c0", "affine intercept c0")?,
                p.c1.unwrap_or(0.0),
                p.c2.unwrap_or(0.0),
            )),
        }
    }

    pub fn family(&self) -> Result<MechanismFamily> {
        self.mechanism
            .as_ref()
            .map(|m| m.kind)
            .ok_or_else(|| Error::config("mechanism", "this command needs a mechanism"))
    }

    /// The configured mechanism with all of its prices.
    pub fn mechanism(&self) -> Result<CanonicalMechanism> {
        let m = self
            .mechanism
            .as_ref()
            .ok_or_else(|| Error::config("mechanism", "this command needs a mechanism"))?;
        mechanism_of(m, "mechanism")
    }

    pub fn discrete(&self) -> Result<Option<DiscreteInstance>> {
        let Some(d) = &self.discrete else { return Ok(None) };
        let space = self.space()?;
        let n = d.types.len();
        let probs = match &d.probs {
            Some(p) if p.len() != n => {
                return Err(Error::config("discrete.probs", format!("expected {n} weights, got {}", p.len())))
            }
            Some(p) => p.clone(),
            None => vec![1.0 / n.max(1) as f64; n],
        };
        let points = d.types.iter().zip(probs).map(|(&x, prob)| WeightedType { x, prob }).collect();
        DiscreteInstance::new(points, Some(&space))
            .map(Some)
            .map_err(|e| Error::config("discrete", e.to_string()))
    }
}

pub fn mechanism_of(m: &MechanismConfig, path: &str) -> Result<CanonicalMechanism> {
    let pg = || need(m.p_g, &format!("{path}.p_g"), "good price p_g");
    let psb = || need(m.p_sb, &format!("{path}.p_sb"), "bundle price p_sb");
    Ok(match m.kind {
        MechanismFamily::GoodOnly => CanonicalMechanism::GoodOnly { p_g: pg()? },
        MechanismFamily::SingleBundle => CanonicalMechanism::SingleBundle { p_sb: psb()? },
        MechanismFamily::AdTiered => CanonicalMechanism::AdTiered { p_g: pg()?, p_sb: psb()? },
    })
}
