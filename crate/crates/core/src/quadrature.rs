//! Adaptive Gauss-Legendre quadrature on intervals and on generalized
//! trapezoids `{x1 in [a, b], l(x1) <= x2 <= u(x1)}`.
//!
//! Each panel is accepted when the single-panel rule and the two half-panel
//! rules agree within tolerance; otherwise the panel is bisected, up to
//! `max_subdivisions` levels. Two-dimensional integrals nest an inner
//! adaptive rule in `x2` inside an outer adaptive rule in `x1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quadrature budget shared by every integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub gauss_order: usize,
    pub max_subdivisions: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            gauss_order: 16,
            max_subdivisions: 12,
            abs_tol: 1e-10,
            rel_tol: 1e-12,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.gauss_order < 4 {
            return Err(Error::domain(format!(
                "gauss_order must be at least 4, got {}",
                self.gauss_order
            )));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::domain(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(Error::domain(format!(
                "rel_tol must be nonnegative, got {}",
                self.rel_tol
            )));
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n` from the Chebyshev-like initial guess.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Single-panel rule on `[a, b]`.
    pub fn apply<F>(&self, f: &mut F, a: f64, b: f64) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (z, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * z)?;
        }
        Ok(acc * half)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Adaptive integrator bound to a [`QuadratureSpec`].
#[derive(Debug, Clone)]
pub struct Integrator {
    rule: GaussLegendre,
    spec: QuadratureSpec,
}

impl Integrator {
    pub fn new(spec: QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Integrator {
            rule: GaussLegendre::new(spec.gauss_order),
            spec,
        })
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    /// Adaptive integral of a fallible integrand over `[a, b]`.
    pub fn integrate<F>(&self, mut f: F, a: f64, b: f64) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        self.integrate_with_tol(&mut f, a, b, self.spec.abs_tol, "")
    }

    fn integrate_with_tol<F>(&self, f: &mut F, a: f64, b: f64, tol: f64, tag: &str) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        if !(b > a) {
            return Ok(0.0);
        }
        let whole = self.rule.apply(f, a, b)?;
        self.refine(f, a, b, whole, tol, 0, tag)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine<F>(
        &self,
        f: &mut F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
        tag: &str,
    ) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let m = 0.5 * (a + b);
        let left = self.rule.apply(f, a, m)?;
        let right = self.rule.apply(f, m, b)?;
        let both = left + right;
        let err = (both - whole).abs();
        // roundoff floor keeps deep panels from chasing machine epsilon
        let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
        let accept = tol.max(self.spec.rel_tol * both.abs()).max(floor);
        if err <= accept {
            return Ok(both);
        }
        if depth >= self.spec.max_subdivisions {
            return Err(Error::Quadrature {
                cell: format!("{tag}[{a:.9}, {b:.9}]"),
                estimate: err,
            });
        }
        let l = self.refine(f, a, m, left, 0.5 * tol, depth + 1, tag)?;
        let r = self.refine(f, m, b, right, 0.5 * tol, depth + 1, tag)?;
        Ok(l + r)
    }

    /// Integral over `{x1 in [a, b], lower(x1) <= x2 <= upper(x1)}`.
    pub fn integrate_2d<L, U, G>(&self, a: f64, b: f64, lower: L, upper: U, g: G) -> Result<f64>
    where
        L: Fn(f64) -> f64,
        U: Fn(f64) -> f64,
        G: Fn(f64, f64) -> f64,
    {
        if !(b > a) {
            return Ok(0.0);
        }
        let inner_tol = 0.1 * self.spec.abs_tol;
        let mut outer = |x1: f64| -> Result<f64> {
            let lo = lower(x1);
            let hi = upper(x1);
            if !(hi > lo) {
                return Ok(0.0);
            }
            let mut inner = |x2: f64| -> Result<f64> { Ok(g(x1, x2)) };
            let tag = format!("x1={x1:.9} x2=");
            self.integrate_with_tol(&mut inner, lo, hi, inner_tol, &tag)
        };
        self.integrate_with_tol(&mut outer, a, b, self.spec.abs_tol, "x1=")
    }
}
