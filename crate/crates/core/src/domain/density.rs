//! Density families with analytic gradients.
//!
//! The stored constant always comes from quadrature over the type space, so
//! `f = norm_const * raw(x)` integrates to one regardless of what the caller
//! believes the constant to be.

use serde::{Deserialize, Serialize};

use super::space::{DiscreteInstance, Point, TypeSpace, WeightedType};
use crate::error::{Error, Result};
use crate::quadrature::{Integrator, QuadratureSpec};

/// Grid resolution for the positivity check.
const POSITIVITY_GRID: usize = 101;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityKind {
    Uniform,
    /// `C exp(-a x1 + b x2)`.
    LogLinear { a: f64, b: f64 },
    /// `C p1(x1) p2(x2)` with ascending coefficient lists.
    ProductPolynomial { coeffs1: Vec<f64>, coeffs2: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityModel {
    kind: DensityKind,
    norm_const: f64,
    space: TypeSpace,
}

impl DensityModel {
    pub fn new(kind: DensityKind, space: TypeSpace) -> Result<Self> {
        Self::with_quadrature(kind, space, &QuadratureSpec::default())
    }

    pub fn uniform(space: TypeSpace) -> Result<Self> {
        Self::new(DensityKind::Uniform, space)
    }

    pub fn with_quadrature(kind: DensityKind, space: TypeSpace, q: &QuadratureSpec) -> Result<Self> {
        space.validate()?;
        match &kind {
            DensityKind::Uniform => {}
            DensityKind::LogLinear { a, b } => {
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::domain("log-linear parameters must be finite"));
                }
            }
            DensityKind::ProductPolynomial { coeffs1, coeffs2 } => {
                if coeffs1.is_empty() || coeffs2.is_empty() {
                    return Err(Error::domain("polynomial coefficient lists must be nonempty"));
                }
                if coeffs1.iter().chain(coeffs2).any(|c| !c.is_finite()) {
                    return Err(Error::domain("polynomial coefficients must be finite"));
                }
            }
        }
        let mut model = DensityModel {
            kind,
            norm_const: 1.0,
            space,
        };
        for p in space.lattice(POSITIVITY_GRID, POSITIVITY_GRID) {
            let r = model.raw(p);
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::domain(format!(
                    "density is not positive at ({}, {}): {r}",
                    p[0], p[1]
                )));
            }
        }
        if model.kind == DensityKind::Uniform {
            model.norm_const = 1.0 / space.area();
            return Ok(model);
        }
        let integrator = Integrator::new(*q)?;
        let mass = integrator.integrate_2d(
            space.x1_lo,
            space.x1_hi,
            |_| space.x2_lo,
            |_| space.x2_hi,
            |x1, x2| model.raw([x1, x2]),
        )?;
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::numeric(format!("density mass {mass} is not positive")));
        }
        model.norm_const = 1.0 / mass;
        Ok(model)
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    pub fn space(&self) -> &TypeSpace {
        &self.space
    }

    fn raw(&self, x: Point) -> f64 {
        match &self.kind {
            DensityKind::Uniform => 1.0,
            DensityKind::LogLinear { a, b } => (-a * x[0] + b * x[1]).exp(),
            DensityKind::ProductPolynomial { coeffs1, coeffs2 } => {
                horner(coeffs1, x[0]) * horner(coeffs2, x[1])
            }
        }
    }

    /// Density value without a domain check.
    pub fn value(&self, x: Point) -> f64 {
        self.norm_const * self.raw(x)
    }

    /// Analytic gradient without a domain check.
    pub fn gradient(&self, x: Point) -> [f64; 2] {
        match &self.kind {
            DensityKind::Uniform => [0.0, 0.0],
            DensityKind::LogLinear { a, b } => {
                let f = self.value(x);
                [-a * f, b * f]
            }
            DensityKind::ProductPolynomial { coeffs1, coeffs2 } => {
                let (p1, d1) = horner_with_derivative(coeffs1, x[0]);
                let (p2, d2) = horner_with_derivative(coeffs2, x[1]);
                [self.norm_const * d1 * p2, self.norm_const * p1 * d2]
            }
        }
    }

    /// True when `f` does not depend on `x2`.
    pub fn is_uniform_in_x2(&self) -> bool {
        match &self.kind {
            DensityKind::Uniform => true,
            DensityKind::LogLinear { b, .. } => *b == 0.0,
            DensityKind::ProductPolynomial { coeffs2, .. } => coeffs2.iter().skip(1).all(|c| *c == 0.0),
        }
    }

    pub fn is_uniform(&self) -> bool {
        match &self.kind {
            DensityKind::Uniform => true,
            DensityKind::LogLinear { a, b } => *a == 0.0 && *b == 0.0,
            DensityKind::ProductPolynomial { coeffs1, coeffs2 } => coeffs1
                .iter()
                .chain(coeffs2)
                .enumerate()
                .all(|(i, c)| i == 0 || i == coeffs1.len() || *c == 0.0),
        }
    }
}

/// `(f(x), grad f(x))` at a point of the closed type space.
pub fn density_eval(d: &DensityModel, x: Point) -> Result<(f64, [f64; 2])> {
    if !d.space.contains(x) {
        return Err(Error::domain(format!(
            "point ({}, {}) lies outside the type space",
            x[0], x[1]
        )));
    }
    Ok((d.value(x), d.gradient(x)))
}

/// Cell-centre grid whose weights are the density mass of each cell.
pub fn discretize(d: &DensityModel, n1: usize, n2: usize, q: &QuadratureSpec) -> Result<DiscreteInstance> {
    if n1 < 2 || n2 < 2 {
        return Err(Error::domain(format!("grid must be at least 2x2, got {n1}x{n2}")));
    }
    let s = d.space;
    let integrator = Integrator::new(*q)?;
    let h1 = s.width() / n1 as f64;
    let h2 = s.height() / n2 as f64;
    let mut points = Vec::with_capacity(n1 * n2);
    let mut total = 0.0;
    for i in 0..n1 {
        let a = s.x1_lo + h1 * i as f64;
        let b = if i + 1 == n1 { s.x1_hi } else { a + h1 };
        for j in 0..n2 {
            let lo = s.x2_lo + h2 * j as f64;
            let hi = if j + 1 == n2 { s.x2_hi } else { lo + h2 };
            let mass = integrator
                .integrate_2d(a, b, |_| lo, |_| hi, |x1, x2| d.value([x1, x2]))
                .map_err(|e| match e {
                    Error::Quadrature { cell, estimate } => Error::Quadrature {
                        cell: format!("grid cell ({i}, {j}) {cell}"),
                        estimate,
                    },
                    other => other,
                })?;
            total += mass;
            points.push(WeightedType {
                x: [0.5 * (a + b), 0.5 * (lo + hi)],
                prob: mass,
            });
        }
    }
    for p in &mut points {
        p.prob /= total;
    }
    // Renormalization leaves a rounding residue of a few ulps; fold it into the largest cell.
    let sum: f64 = points.iter().map(|p| p.prob).sum();
    if let Some(big) = points
        .iter_mut()
        .max_by(|x, y| x.prob.partial_cmp(&y.prob).unwrap())
    {
        big.prob += 1.0 - sum;
    }
    DiscreteInstance::new(points, Some(&s))
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

fn horner_with_derivative(c: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &ci in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + ci;
    }
    (p, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> TypeSpace {
        TypeSpace::new(0.0, 1.0, -1.0, 0.0).unwrap()
    }

    #[test]
    fn uniform_values() {
        let s = TypeSpace::new(1.0, 2.0, -1.0, 0.0).unwrap();
        let d = DensityModel::uniform(s).unwrap();
        let (f, g) = density_eval(&d, [1.5, -0.5]).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        assert_eq!(g, [0.0, 0.0]);
        let d = DensityModel::uniform(unit()).unwrap();
        let (f, _) = density_eval(&d, [0.3, -0.7]).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_linear_constant_and_gradient() {
        let d = DensityModel::new(DensityKind::LogLinear { a: 1.0, b: 1.0 }, unit()).unwrap();
        // int_0^1 e^{-x} dx * int_{-1}^0 e^{y} dy = (1 - e^{-1})^2
        let c = 1.0 / (1.0 - (-1.0f64).exp()).powi(2);
        assert!((d.norm_const() - c).abs() < 1e-10);
        let (f, g) = density_eval(&d, [0.4, -0.3]).unwrap();
        assert!((f - c * (-0.7f64).exp()).abs() < 1e-10);
        assert!((g[0] + f).abs() < 1e-12 && (g[1] - f).abs() < 1e-12);
    }

    #[test]
    fn polynomial_gradient_matches_finite_difference() {
        let d = DensityModel::new(
            DensityKind::ProductPolynomial {
                coeffs1: vec![1.0, 0.5, 0.25],
                coeffs2: vec![2.0, 0.3],
            },
            unit(),
        )
        .unwrap();
        let x = [0.37, -0.61];
        let h = 1e-6;
        let g = d.gradient(x);
        let fd1 = (d.value([x[0] + h, x[1]]) - d.value([x[0] - h, x[1]])) / (2.0 * h);
        let fd2 = (d.value([x[0], x[1] + h]) - d.value([x[0], x[1] - h])) / (2.0 * h);
        assert!((g[0] - fd1).abs() < 1e-7 && (g[1] - fd2).abs() < 1e-7);
    }

    #[test]
    fn rejects_nonpositive_density() {
        let k = DensityKind::ProductPolynomial {
            coeffs1: vec![-0.1, 1.0],
            coeffs2: vec![1.0],
        };
        assert!(DensityModel::new(k, unit()).is_err());
    }

    #[test]
    fn outside_point_is_domain_error() {
        let d = DensityModel::uniform(unit()).unwrap();
        assert!(matches!(density_eval(&d, [1.5, -0.5]), Err(Error::Domain(_))));
    }

    #[test]
    fn discretize_uniform() {
        let d = DensityModel::uniform(unit()).unwrap();
        let inst = discretize(&d, 2, 2, &QuadratureSpec::default()).unwrap();
        assert_eq!(inst.len(), 4);
        for p in inst.points() {
            assert!((p.prob - 0.25).abs() < 1e-14);
        }
        let s = TypeSpace::new(1.0, 2.0, -1.0, 0.0).unwrap();
        let d = DensityModel::uniform(s).unwrap();
        let inst = discretize(&d, 4, 4, &QuadratureSpec::default()).unwrap();
        assert_eq!(inst.len(), 16);
        for p in inst.points() {
            assert!((p.prob - 1.0 / 16.0).abs() < 1e-14);
        }
    }

    #[test]
    fn discretize_log_linear_ordering() {
        let d = DensityModel::new(DensityKind::LogLinear { a: 1.0, b: 1.0 }, unit()).unwrap();
        let inst = discretize(&d, 3, 3, &QuadratureSpec::default()).unwrap();
        let w = |i: usize, j: usize| inst.points()[i * 3 + j].prob;
        for j in 0..3 {
            assert!(w(0, j) > w(1, j) && w(1, j) > w(2, j));
        }
        for i in 0..3 {
            assert!(w(i, 0) < w(i, 1) && w(i, 1) < w(i, 2));
        }
    }

    #[test]
    fn discretize_rejects_tiny_grid() {
        let d = DensityModel::uniform(unit()).unwrap();
        assert!(discretize(&d, 1, 4, &QuadratureSpec::default()).is_err());
    }
}
