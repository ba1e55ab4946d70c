//! The transformed measure of a density and an advertiser payment.
//!
//! The measure has four parts:
//! - a unit atom at the lowest type `(x1_lo, x2_lo)`;
//! - line densities on the four edges. Each is the density times the
//!   outward-normal component of `x + (0, kappa)`, taken per unit arclength;
//! - the interior density `-(grad f . (x + (0, kappa)) + (3 + d2 kappa) f)`.
//!
//! Revenue of any mechanism with `u(lowest type) = 0` equals `∫ u dμ`. The
//! total mass is zero.

use serde::Serialize;

use crate::domain::{AdPaymentSchedule, DensityModel, Edge, HalfPlane, Axis, Point, Region, TypeSpace};
use crate::error::{Error, Result};
use crate::quadrature::{Integrator, QuadratureSpec};
use crate::test_functions::TestFunction;

/// Constant edge and interior densities, available for uniform `f` and constant `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm {
    pub bottom: f64,
    pub top: f64,
    pub left: f64,
    pub right: f64,
    pub interior: f64,
}

impl ClosedForm {
    pub fn edge(&self, e: Edge) -> f64 {
        match e {
            Edge::Bottom => self.bottom,
            Edge::Top => self.top,
            Edge::Left => self.left,
            Edge::Right => self.right,
        }
    }
}

/// Signed mass split by component.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MassBreakdown {
    pub atom: f64,
    pub bottom: f64,
    pub top: f64,
    pub left: f64,
    pub right: f64,
    pub interior: f64,
}

impl MassBreakdown {
    pub fn total(&self) -> f64 {
        self.atom + self.bottom + self.top + self.left + self.right + self.interior
    }

    fn edge_mut(&mut self, e: Edge) -> &mut f64 {
        match e {
            Edge::Bottom => &mut self.bottom,
            Edge::Top => &mut self.top,
            Edge::Left => &mut self.left,
            Edge::Right => &mut self.right,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MeasureDecomposition {
    density: DensityModel,
    payment: AdPaymentSchedule,
    integrator: Integrator,
    closed_form: Option<ClosedForm>,
}

/// Builds the measure for density `d` and payment `kappa`.
pub fn build_measure(d: &DensityModel, kappa: &AdPaymentSchedule, q: &QuadratureSpec) -> Result<MeasureDecomposition> {
    if !kappa.has_d2() {
        return Err(Error::domain(format!(
            "cannot build the measure: payment `{}` lacks an analytic x2-derivative",
            kappa.label()
        )));
    }
    let s = d.space();
    kappa.check_bounded(s)?;
    let closed_form = match (d.is_uniform(), kappa.as_constant()) {
        (true, Some(k)) => {
            let f = 1.0 / s.area();
            Some(ClosedForm {
                bottom: -(s.x2_lo + k) * f,
                top: (s.x2_hi + k) * f,
                left: -s.x1_lo * f,
                right: s.x1_hi * f,
                interior: -3.0 * f,
            })
        }
        _ => None,
    };
    Ok(MeasureDecomposition {
        density: d.clone(),
        payment: kappa.clone(),
        integrator: Integrator::new(*q)?,
        closed_form,
    })
}

impl MeasureDecomposition {
    pub fn space(&self) -> &TypeSpace {
        self.density.space()
    }

    pub fn density(&self) -> &DensityModel {
        &self.density
    }

    pub fn payment(&self) -> &AdPaymentSchedule {
        &self.payment
    }

    pub fn integrator(&self) -> &Integrator {
        &self.integrator
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        self.integrator.spec()
    }

    pub fn closed_form(&self) -> Option<&ClosedForm> {
        self.closed_form.as_ref()
    }

    pub fn atom_weight(&self) -> f64 {
        1.0
    }

    /// Line density of `edge` at a point on it.
    pub fn edge_density(&self, edge: Edge, x: Point) -> f64 {
        let s = self.space();
        let f = self.density.value(x);
        match edge {
            Edge::Bottom => -(s.x2_lo + self.payment.value(x)) * f,
            Edge::Top => (s.x2_hi + self.payment.value(x)) * f,
            Edge::Left => -s.x1_lo * f,
            Edge::Right => s.x1_hi * f,
        }
    }

    pub fn interior_density(&self, x: Point) -> f64 {
        let f = self.density.value(x);
        let g = self.density.gradient(x);
        let k = self.payment.value(x);
        // d2 presence is checked at construction
        let dk = self.payment.d2(x).unwrap_or(0.0);
        -(g[0] * x[0] + g[1] * (x[1] + k) + (3.0 + dk) * f)
    }

    fn check_base(&self, r: &Region) -> Result<()> {
        if r.base() != self.space() {
            return Err(Error::domain("region is not a subset of the measure's type space"));
        }
        Ok(())
    }

    /// `∫_R g dμ` by component.
    pub fn integrate<G>(&self, r: &Region, g: G) -> Result<MassBreakdown>
    where
        G: Fn(Point) -> f64,
    {
        self.check_base(r)?;
        let s = *self.space();
        let mut out = MassBreakdown::default();
        let corner = s.corner();
        if r.contains(corner) {
            out.atom = self.atom_weight() * g(corner);
        }
        for e in Edge::ALL {
            if let Some((lo, hi)) = r.edge_segment(e) {
                let v = self
                    .integrator
                    .integrate(
                        |t| {
                            let x = e.point(&s, t);
                            Ok(g(x) * self.edge_density(e, x))
                        },
                        lo,
                        hi,
                    )
                    .map_err(|err| tag_cell(err, e.name()))?;
                *out.edge_mut(e) = v;
            }
        }
        for (i, t) in r.trapezoids().iter().enumerate() {
            out.interior += self
                .integrator
                .integrate_2d(
                    t.a,
                    t.b,
                    |x1| t.lower.eval(x1),
                    |x1| t.upper.eval(x1),
                    |x1, x2| {
                        let x = [x1, x2];
                        g(x) * self.interior_density(x)
                    },
                )
                .map_err(|err| tag_cell(err, &format!("interior piece {i}")))?;
        }
        Ok(out)
    }

    /// Closed-form component masses for uniform densities with constant payment.
    pub fn mu_closed_form(&self, r: &Region) -> Option<MassBreakdown> {
        let c = self.closed_form?;
        let s = *self.space();
        let mut out = MassBreakdown::default();
        if r.contains(s.corner()) {
            out.atom = self.atom_weight();
        }
        for e in Edge::ALL {
            if let Some((lo, hi)) = r.edge_segment(e) {
                *out.edge_mut(e) = c.edge(e) * (hi - lo);
            }
        }
        out.interior = c.interior * r.area();
        Some(out)
    }
}

fn tag_cell(err: Error, what: &str) -> Error {
    match err {
        Error::Quadrature { cell, estimate } => Error::Quadrature {
            cell: format!("{what} {cell}"),
            estimate,
        },
        other => other,
    }
}

/// `μ(R)` with its component breakdown.
pub fn mu_of_region(m: &MeasureDecomposition, r: &Region) -> Result<MassBreakdown> {
    m.integrate(r, |_| 1.0)
}

/// `μ(R)` for a list of regions, in parallel.
pub fn mu_of_regions(m: &MeasureDecomposition, rs: &[Region]) -> Result<Vec<MassBreakdown>> {
    use rayon::prelude::*;
    rs.par_iter().map(|r| mu_of_region(m, r)).collect()
}

/// `M(x1) = μ([x1_lo, x1] x [x2_lo, x2_hi] ∩ clip)`.
pub fn marginal_m(m: &MeasureDecomposition, clip: &Region, x1: f64) -> Result<f64> {
    let s = m.space();
    if x1 < s.x1_lo || x1 > s.x1_hi {
        return Err(Error::domain(format!(
            "x1 = {x1} outside [{}, {}]",
            s.x1_lo, s.x1_hi
        )));
    }
    let slab = clip.clone().with(HalfPlane::le(Axis::X1, x1));
    Ok(mu_of_region(m, &slab)?.total())
}

/// `∫_t^p M(z) dz`, integrated piecewise between the kinks of `M`.
pub fn hinge_tail_integral(m: &MeasureDecomposition, clip: &Region, t: f64, p: f64) -> Result<f64> {
    let s = m.space();
    if !(s.x1_lo <= t && t <= p && p <= s.x1_hi) {
        return Err(Error::domain(format!(
            "need x1_lo <= t <= p <= x1_hi, got t = {t}, p = {p}"
        )));
    }
    let mut cuts = vec![t, p];
    for tr in clip.trapezoids() {
        cuts.extend([tr.a, tr.b]);
    }
    for e in [Edge::Bottom, Edge::Top] {
        if let Some((lo, hi)) = clip.edge_segment(e) {
            cuts.extend([lo, hi]);
        }
    }
    cuts.retain(|c| *c >= t && *c <= p);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += m
            .integrator()
            .integrate(|z| marginal_m(m, clip, z), w[0], w[1])?;
    }
    Ok(total)
}

/// `(p - t) M(p) - ∫_{clip, x1 <= p} (x1 - t)_+ dμ`, which equals the hinge
/// tail integral by Fubini. With `M(p) = 0` it reduces to the hinge integral alone.
pub fn hinge_tail_by_fubini(m: &MeasureDecomposition, clip: &Region, t: f64, p: f64) -> Result<f64> {
    let m_p = marginal_m(m, clip, p)?;
    let piece = clip
        .clone()
        .with(HalfPlane::le(Axis::X1, p))
        .with(HalfPlane::ge(Axis::X1, t));
    let hinge = m.integrate(&piece, |x| (x[0] - t).max(0.0))?.total();
    Ok((p - t) * m_p - hinge)
}

/// `|∫ u dμ - ∫ [(x + v_kappa) . grad u - (u - u(lowest type))] f dx|`.
pub fn ibp_residual(
    d: &DensityModel,
    kappa: &AdPaymentSchedule,
    u: &dyn TestFunction,
    q: &QuadratureSpec,
) -> Result<f64> {
    if !u.differentiable() {
        return Err(Error::domain(format!(
            "test function `{}` is not differentiable; smooth it first",
            u.name()
        )));
    }
    let m = build_measure(d, kappa, q)?;
    let s = *d.space();
    let lhs = m.integrate(&Region::full(s), |x| u.value(x))?.total();
    let u0 = u.value(s.corner());
    let rhs = m.integrator().integrate_2d(
        s.x1_lo,
        s.x1_hi,
        |_| s.x2_lo,
        |_| s.x2_hi,
        |x1, x2| {
            let x = [x1, x2];
            let g = u.gradient(x);
            let k = kappa.value(x);
            (x1 * g[0] + (x2 + k) * g[1] - (u.value(x) - u0)) * d.value(x)
        },
    )?;
    Ok((lhs - rhs).abs())
}
