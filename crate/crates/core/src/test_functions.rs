//! Test functions `u: X -> R` with analytic gradients.

use crate::domain::Point;

pub trait TestFunction: Send + Sync {
    fn value(&self, x: Point) -> f64;
    fn gradient(&self, x: Point) -> [f64; 2];
    /// False for functions with kinks; such inputs must be smoothed first.
    fn differentiable(&self) -> bool {
        true
    }
    fn name(&self) -> String;
}

#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

impl TestFunction for Constant {
    fn value(&self, _: Point) -> f64 {
        self.0
    }
    fn gradient(&self, _: Point) -> [f64; 2] {
        [0.0, 0.0]
    }
    fn name(&self) -> String {
        format!("constant({})", self.0)
    }
}

/// `c0 + c1 x1 + c2 x2`.
#[derive(Debug, Clone, Copy)]
pub struct Linear {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl TestFunction for Linear {
    fn value(&self, x: Point) -> f64 {
        self.c0 + self.c1 * x[0] + self.c2 * x[1]
    }
    fn gradient(&self, _: Point) -> [f64; 2] {
        [self.c1, self.c2]
    }
    fn name(&self) -> String {
        format!("linear({}, {}, {})", self.c0, self.c1, self.c2)
    }
}

/// `a11 x1^2 + a12 x1 x2 + a22 x2^2 + b1 x1 + b2 x2 + c`.
#[derive(Debug, Clone, Copy)]
pub struct Quadratic {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    pub b1: f64,
    pub b2: f64,
    pub c: f64,
}

impl TestFunction for Quadratic {
    fn value(&self, x: Point) -> f64 {
        let [x1, x2] = x;
        self.a11 * x1 * x1 + self.a12 * x1 * x2 + self.a22 * x2 * x2 + self.b1 * x1 + self.b2 * x2 + self.c
    }
    fn gradient(&self, x: Point) -> [f64; 2] {
        let [x1, x2] = x;
        [
            2.0 * self.a11 * x1 + self.a12 * x2 + self.b1,
            self.a12 * x1 + 2.0 * self.a22 * x2 + self.b2,
        ]
    }
    fn name(&self) -> String {
        "quadratic".into()
    }
}

/// `scale * exp(w1 x1 + w2 x2 + shift)`.
#[derive(Debug, Clone, Copy)]
pub struct ExpAffine {
    pub scale: f64,
    pub w1: f64,
    pub w2: f64,
    pub shift: f64,
}

impl TestFunction for ExpAffine {
    fn value(&self, x: Point) -> f64 {
        self.scale * (self.w1 * x[0] + self.w2 * x[1] + self.shift).exp()
    }
    fn gradient(&self, x: Point) -> [f64; 2] {
        let v = self.value(x);
        [self.w1 * v, self.w2 * v]
    }
    fn name(&self) -> String {
        format!("exp({} x1 + {} x2 + {})", self.w1, self.w2, self.shift)
    }
}

/// `(w1 x1 + w2 x2 - t)_+`; kinked, so rejected where a gradient is needed.
#[derive(Debug, Clone, Copy)]
pub struct Hinge {
    pub w1: f64,
    pub w2: f64,
    pub t: f64,
}

impl TestFunction for Hinge {
    fn value(&self, x: Point) -> f64 {
        (self.w1 * x[0] + self.w2 * x[1] - self.t).max(0.0)
    }
    fn gradient(&self, x: Point) -> [f64; 2] {
        if self.w1 * x[0] + self.w2 * x[1] > self.t {
            [self.w1, self.w2]
        } else {
            [0.0, 0.0]
        }
    }
    fn differentiable(&self) -> bool {
        false
    }
    fn name(&self) -> String {
        format!("hinge({} x1 + {} x2 - {})", self.w1, self.w2, self.t)
    }
}

/// Softplus smoothing of [`Hinge`]: `width * log(1 + exp(z / width))`.
#[derive(Debug, Clone, Copy)]
pub struct SmoothedHinge {
    pub w1: f64,
    pub w2: f64,
    pub t: f64,
    pub width: f64,
}

impl SmoothedHinge {
    pub fn of(h: Hinge, width: f64) -> Self {
        SmoothedHinge { w1: h.w1, w2: h.w2, t: h.t, width }
    }

    fn z(&self, x: Point) -> f64 {
        (self.w1 * x[0] + self.w2 * x[1] - self.t) / self.width
    }
}

impl TestFunction for SmoothedHinge {
    fn value(&self, x: Point) -> f64 {
        let z = self.z(x);
        self.width * (z.max(0.0) + (-z.abs()).exp().ln_1p())
    }
    fn gradient(&self, x: Point) -> [f64; 2] {
        let z = self.z(x);
        let s = if z >= 0.0 {
            1.0 / (1.0 + (-z).exp())
        } else {
            let e = z.exp();
            e / (1.0 + e)
        };
        [s * self.w1, s * self.w2]
    }
    fn name(&self) -> String {
        format!(
            "smoothed_hinge({} x1 + {} x2 - {}, width {})",
            self.w1, self.w2, self.t, self.width
        )
    }
}
