use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A buyer type `(x1, x2)`: value for the good and (nonpositive) value for the bad.
pub type Point = [f64; 2];

/// Slack used when testing closed-set membership of a point in the box.
pub const CONTAINS_SLACK: f64 = 1e-12;

/// Rectangular type space `[x1_lo, x1_hi] x [x2_lo, x2_hi]` with `x2 <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeSpace {
    pub x1_lo: f64,
    pub x1_hi: f64,
    pub x2_lo: f64,
    pub x2_hi: f64,
}

impl TypeSpace {
    pub fn new(x1_lo: f64, x1_hi: f64, x2_lo: f64, x2_hi: f64) -> Result<Self> {
        let s = TypeSpace {
            x1_lo,
            x1_hi,
            x2_lo,
            x2_hi,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.x1_lo, self.x1_hi, self.x2_lo, self.x2_hi];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("type space bounds must be finite"));
        }
        if !(0.0 <= self.x1_lo && self.x1_lo < self.x1_hi) {
            return Err(Error::domain(format!(
                "need 0 <= x1_lo < x1_hi, got [{}, {}]",
                self.x1_lo, self.x1_hi
            )));
        }
        if !(self.x2_lo < self.x2_hi && self.x2_hi <= 0.0) {
            return Err(Error::domain(format!(
                "need x2_lo < x2_hi <= 0, got [{}, {}]",
                self.x2_lo, self.x2_hi
            )));
        }
        Ok(())
    }

    /// The lowest type, which carries the unit atom of the measure.
    pub fn corner(&self) -> Point {
        [self.x1_lo, self.x2_lo]
    }

    pub fn width(&self) -> f64 {
        self.x1_hi - self.x1_lo
    }

    pub fn height(&self) -> f64 {
        self.x2_hi - self.x2_lo
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, x: Point) -> bool {
        x[0] >= self.x1_lo - CONTAINS_SLACK
            && x[0] <= self.x1_hi + CONTAINS_SLACK
            && x[1] >= self.x2_lo - CONTAINS_SLACK
            && x[1] <= self.x2_hi + CONTAINS_SLACK
    }

    /// `n1 x n2` lattice including the boundary, in x1-major order.
    pub fn lattice(&self, n1: usize, n2: usize) -> Vec<Point> {
        let mut out = Vec::with_capacity(n1 * n2);
        for i in 0..n1 {
            let x1 = lerp(self.x1_lo, self.x1_hi, i, n1);
            for j in 0..n2 {
                out.push([x1, lerp(self.x2_lo, self.x2_hi, j, n2)]);
            }
        }
        out
    }
}

/// `i`-th of `n` equally spaced points on `[lo, hi]`, endpoints exact.
pub fn lerp(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if n <= 1 {
        return lo;
    }
    if i + 1 == n {
        return hi;
    }
    lo + (hi - lo) * (i as f64) / ((n - 1) as f64)
}

/// One support point of a discrete type distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedType {
    pub x: Point,
    pub prob: f64,
}

/// Finite type distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteInstance {
    points: Vec<WeightedType>,
}

impl DiscreteInstance {
    pub fn new(points: Vec<WeightedType>, space: Option<&TypeSpace>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("discrete instance needs at least one type"));
        }
        let mut total = 0.0;
        for (i, p) in points.iter().enumerate() {
            if !(p.prob > 0.0) || !p.prob.is_finite() {
                return Err(Error::domain(format!(
                    "type {i} has nonpositive probability {}",
                    p.prob
                )));
            }
            if !p.x[0].is_finite() || !p.x[1].is_finite() {
                return Err(Error::domain(format!("type {i} is not finite")));
            }
            if p.x[1] > 0.0 {
                return Err(Error::domain(format!(
                    "type {i} has positive bad value {}",
                    p.x[1]
                )));
            }
            if let Some(s) = space {
                if !s.contains(p.x) {
                    return Err(Error::domain(format!(
                        "type {i} at ({}, {}) lies outside the type space",
                        p.x[0], p.x[1]
                    )));
                }
            }
            total += p.prob;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(DiscreteInstance { points })
    }

    /// Equally likely types.
    pub fn equally_likely(xs: &[Point]) -> Result<Self> {
        let w = 1.0 / xs.len().max(1) as f64;
        let pts = xs.iter().map(|&x| WeightedType { x, prob: w }).collect();
        DiscreteInstance::new(pts, None)
    }

    pub fn points(&self) -> &[WeightedType] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_boxes() {
        assert!(TypeSpace::new(1.0, 1.0, -1.0, 0.0).is_err());
        assert!(TypeSpace::new(-0.1, 1.0, -1.0, 0.0).is_err());
        assert!(TypeSpace::new(0.0, 1.0, -1.0, 0.1).is_err());
        assert!(TypeSpace::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(TypeSpace::new(0.0, 1.0, -1.0, 0.0).is_ok());
    }

    #[test]
    fn corner_is_lowest_type() {
        let s = TypeSpace::new(1.0, 2.0, -1.0, 0.0).unwrap();
        assert_eq!(s.corner(), [1.0, -1.0]);
    }

    #[test]
    fn instance_validation() {
        let ok = DiscreteInstance::equally_likely(&[[0.5, -0.2], [1.0, -0.6]]).unwrap();
        assert_eq!(ok.len(), 2);
        let bad = vec![
            WeightedType { x: [0.5, -0.2], prob: 0.5 },
            WeightedType { x: [1.0, -0.6], prob: 0.4 },
        ];
        assert!(DiscreteInstance::new(bad, None).is_err());
        let pos = vec![WeightedType { x: [0.5, 0.2], prob: 1.0 }];
        assert!(DiscreteInstance::new(pos, None).is_err());
        let s = TypeSpace::new(0.0, 1.0, -1.0, 0.0).unwrap();
        let out = vec![WeightedType { x: [1.5, -0.2], prob: 1.0 }];
        assert!(DiscreteInstance::new(out, Some(&s)).is_err());
    }

    #[test]
    fn lattice_hits_endpoints() {
        let s = TypeSpace::new(0.5, 1.5, -0.8, -0.2).unwrap();
        let l = s.lattice(3, 4);
        assert_eq!(l.len(), 12);
        assert_eq!(l[0], [0.5, -0.8]);
        assert_eq!(l[11], [1.5, -0.2]);
    }
}
