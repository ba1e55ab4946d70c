//! Subsets of the type space cut out by axis-aligned and diagonal half-planes.
//!
//! A region is closed or half-open depending on each constraint's
//! `inclusive` flag. Two-dimensional integrals see only the trapezoid
//! decomposition, where the flags are irrelevant; atoms and edge segments
//! honour them exactly.

use serde::Serialize;

use super::space::{Point, TypeSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X1,
    X2,
    /// The diagonal functional `x1 + x2`.
    Sum,
}

impl Axis {
    pub fn eval(self, x: Point) -> f64 {
        match self {
            Axis::X1 => x[0],
            Axis::X2 => x[1],
            Axis::Sum => x[0] + x[1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Le,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfPlane {
    pub axis: Axis,
    pub sense: Sense,
    pub bound: f64,
    pub inclusive: bool,
}

impl HalfPlane {
    pub fn le(axis: Axis, bound: f64) -> Self {
        HalfPlane { axis, sense: Sense::Le, bound, inclusive: true }
    }

    pub fn lt(axis: Axis, bound: f64) -> Self {
        HalfPlane { axis, sense: Sense::Le, bound, inclusive: false }
    }

    pub fn ge(axis: Axis, bound: f64) -> Self {
        HalfPlane { axis, sense: Sense::Ge, bound, inclusive: true }
    }

    pub fn gt(axis: Axis, bound: f64) -> Self {
        HalfPlane { axis, sense: Sense::Ge, bound, inclusive: false }
    }

    pub fn holds(&self, x: Point) -> bool {
        self.holds_value(self.axis.eval(x))
    }

    fn holds_value(&self, v: f64) -> bool {
        match (self.sense, self.inclusive) {
            (Sense::Le, true) => v <= self.bound,
            (Sense::Le, false) => v < self.bound,
            (Sense::Ge, true) => v >= self.bound,
            (Sense::Ge, false) => v > self.bound,
        }
    }

    /// Whether `self` is at least as restrictive as `other` (same axis and sense).
    fn tighter_than(&self, other: &HalfPlane) -> bool {
        match self.sense {
            Sense::Le => self.bound < other.bound,
            Sense::Ge => self.bound > other.bound,
        }
    }
}

/// `x2 = c0 + c1 x1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Affine {
    pub c0: f64,
    pub c1: f64,
}

impl Affine {
    pub fn constant(c: f64) -> Self {
        Affine { c0: c, c1: 0.0 }
    }

    pub fn eval(&self, x1: f64) -> f64 {
        self.c0 + self.c1 * x1
    }
}

/// `{x1 in [a, b], lower(x1) <= x2 <= upper(x1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Trapezoid {
    pub a: f64,
    pub b: f64,
    pub lower: Affine,
    pub upper: Affine,
}

impl Trapezoid {
    pub fn area(&self) -> f64 {
        let w = |x: f64| self.upper.eval(x) - self.lower.eval(x);
        0.5 * (self.b - self.a) * (w(self.a) + w(self.b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    Bottom,
    Top,
    Left,
    Right,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Bottom, Edge::Top, Edge::Left, Edge::Right];

    /// Point on the edge at free coordinate `t` (x1 for horizontal edges, x2 for vertical).
    pub fn point(self, s: &TypeSpace, t: f64) -> Point {
        match self {
            Edge::Bottom => [t, s.x2_lo],
            Edge::Top => [t, s.x2_hi],
            Edge::Left => [s.x1_lo, t],
            Edge::Right => [s.x1_hi, t],
        }
    }

    pub fn param_range(self, s: &TypeSpace) -> (f64, f64) {
        match self {
            Edge::Bottom | Edge::Top => (s.x1_lo, s.x1_hi),
            Edge::Left | Edge::Right => (s.x2_lo, s.x2_hi),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Edge::Bottom => "bottom",
            Edge::Top => "top",
            Edge::Left => "left",
            Edge::Right => "right",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region {
    base: TypeSpace,
    constraints: Vec<HalfPlane>,
}

impl Region {
    pub fn full(base: TypeSpace) -> Self {
        Region { base, constraints: Vec::new() }
    }

    /// Adds a half-plane, keeping only the tightest bound per axis and sense.
    pub fn with(mut self, h: HalfPlane) -> Self {
        match self
            .constraints
            .iter_mut()
            .find(|c| c.axis == h.axis && c.sense == h.sense)
        {
            Some(c) => {
                if h.tighter_than(c) {
                    *c = h;
                } else if h.bound == c.bound {
                    c.inclusive &= h.inclusive;
                }
            }
            None => self.constraints.push(h),
        }
        self
    }

    pub fn intersect(self, other: &Region) -> Self {
        other.constraints.iter().fold(self, |r, h| r.with(*h))
    }

    pub fn base(&self) -> &TypeSpace {
        &self.base
    }

    pub fn constraints(&self) -> &[HalfPlane] {
        &self.constraints
    }

    fn bound(&self, axis: Axis, sense: Sense) -> Option<f64> {
        self.constraints
            .iter()
            .find(|c| c.axis == axis && c.sense == sense)
            .map(|c| c.bound)
    }

    pub fn contains(&self, x: Point) -> bool {
        self.base.contains(x) && self.constraints.iter().all(|c| c.holds(x))
    }

    /// Exact cover of the region's two-dimensional part by trapezoids with
    /// affine sides, ordered by `x1`.
    pub fn trapezoids(&self) -> Vec<Trapezoid> {
        let s = &self.base;
        let a = self.bound(Axis::X1, Sense::Ge).map_or(s.x1_lo, |v| v.max(s.x1_lo));
        let b = self.bound(Axis::X1, Sense::Le).map_or(s.x1_hi, |v| v.min(s.x1_hi));
        if !(b > a) {
            return Vec::new();
        }
        let lc = self.bound(Axis::X2, Sense::Ge).map_or(s.x2_lo, |v| v.max(s.x2_lo));
        let uc = self.bound(Axis::X2, Sense::Le).map_or(s.x2_hi, |v| v.min(s.x2_hi));
        if !(uc > lc) {
            return Vec::new();
        }
        let sg = self.bound(Axis::Sum, Sense::Ge);
        let sl = self.bound(Axis::Sum, Sense::Le);

        let mut cuts = vec![a, b];
        for sum in [sg, sl].into_iter().flatten() {
            for c in [sum - lc, sum - uc] {
                if c > a && c < b {
                    cuts.push(c);
                }
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup();

        let lower_at = |m: f64| match sg {
            Some(g) if g - m > lc => Affine { c0: g, c1: -1.0 },
            _ => Affine::constant(lc),
        };
        let upper_at = |m: f64| match sl {
            Some(l) if l - m < uc => Affine { c0: l, c1: -1.0 },
            _ => Affine::constant(uc),
        };

        let mut out: Vec<Trapezoid> = Vec::new();
        for w in cuts.windows(2) {
            let (p, q) = (w[0], w[1]);
            let m = 0.5 * (p + q);
            let lower = lower_at(m);
            let upper = upper_at(m);
            if !(upper.eval(m) > lower.eval(m)) {
                continue;
            }
            match out.last_mut() {
                Some(t) if t.b == p && t.lower == lower && t.upper == upper => t.b = q,
                _ => out.push(Trapezoid { a: p, b: q, lower, upper }),
            }
        }
        out
    }

    /// Parameter interval of `edge` lying in the region, or `None` when the
    /// intersection has no length.
    pub fn edge_segment(&self, edge: Edge) -> Option<(f64, f64)> {
        let s = &self.base;
        let (mut lo, mut hi) = edge.param_range(s);
        let horizontal = matches!(edge, Edge::Bottom | Edge::Top);
        let fixed = match edge {
            Edge::Bottom => s.x2_lo,
            Edge::Top => s.x2_hi,
            Edge::Left => s.x1_lo,
            Edge::Right => s.x1_hi,
        };
        for c in &self.constraints {
            // value of the constraint functional is `shift + t` along the edge,
            // or the constant `fixed` when it does not vary
            let shift = match (c.axis, horizontal) {
                (Axis::X1, true) | (Axis::X2, false) => Some(0.0),
                (Axis::Sum, _) => Some(fixed),
                (Axis::X1, false) | (Axis::X2, true) => None,
            };
            match shift {
                None => {
                    if !c.holds_value(fixed) {
                        return None;
                    }
                }
                Some(sh) => match c.sense {
                    Sense::Le => hi = hi.min(c.bound - sh),
                    Sense::Ge => lo = lo.max(c.bound - sh),
                },
            }
        }
        if hi > lo {
            Some((lo, hi))
        } else {
            None
        }
    }

    /// Some point of the region, used to certify nonemptiness.
    pub fn feasible_point(&self) -> Option<Point> {
        if let Some(t) = self.trapezoids().first() {
            let m = 0.5 * (t.a + t.b);
            let x = [m, 0.5 * (t.lower.eval(m) + t.upper.eval(m))];
            if self.contains(x) {
                return Some(x);
            }
        }
        for e in Edge::ALL {
            if let Some((lo, hi)) = self.edge_segment(e) {
                let x = e.point(&self.base, 0.5 * (lo + hi));
                if self.contains(x) {
                    return Some(x);
                }
            }
        }
        let s = &self.base;
        let corners = [
            [s.x1_lo, s.x2_lo],
            [s.x1_lo, s.x2_hi],
            [s.x1_hi, s.x2_lo],
            [s.x1_hi, s.x2_hi],
        ];
        corners
            .into_iter()
            .chain(s.lattice(41, 41))
            .find(|&x| self.contains(x))
    }

    pub fn is_empty(&self) -> bool {
        self.feasible_point().is_none()
    }

    /// Total area of the trapezoid decomposition.
    pub fn area(&self) -> f64 {
        self.trapezoids().iter().map(Trapezoid::area).sum()
    }
}
