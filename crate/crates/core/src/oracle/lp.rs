//! Revenue-maximizing incentive-compatible mechanism on a discrete instance.
//!
//! Variables per type `i` are `(q1_i, q2_i, t_i)` at indices `3i, 3i+1, 3i+2`.
//! The primal has one row per ordered pair of types, so it is solved through
//! its dual, which has one row per variable; the mechanism is then read off
//! the dual's row multipliers.

use serde::{Deserialize, Serialize};

use super::simplex::{self, LinearProgram, LpStatus, RowSense};
use crate::domain::{AdPaymentSchedule, DiscreteInstance, Point};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintKind {
    /// Type `i` does not prefer type `j`'s allocation.
    Ic { i: usize, j: usize },
    Ir { i: usize },
    /// `q_axis(i) <= 1`.
    Box { i: usize, axis: usize },
}

/// `Σ coeffs · v <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LPProblem {
    pub types: Vec<Point>,
    pub weights: Vec<f64>,
    pub kappa: Vec<f64>,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LPProblem {
    pub fn n_types(&self) -> usize {
        self.types.len()
    }

    pub fn n_variables(&self) -> usize {
        self.objective.len()
    }

    fn count(&self, pred: impl Fn(&ConstraintKind) -> bool) -> usize {
        self.constraints.iter().filter(|c| pred(&c.kind)).count()
    }

    pub fn n_ic(&self) -> usize {
        self.count(|k| matches!(k, ConstraintKind::Ic { .. }))
    }

    pub fn n_ir(&self) -> usize {
        self.count(|k| matches!(k, ConstraintKind::Ir { .. }))
    }

    pub fn n_box(&self) -> usize {
        self.count(|k| matches!(k, ConstraintKind::Box { .. }))
    }

    /// Largest violation of any row or of `q >= 0` at the point `v`.
    pub fn max_violation(&self, v: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.coeffs.iter().map(|&(j, a)| a * v[j]).sum::<f64>() - c.rhs)
            .fold(0.0, f64::max);
        let sign = (0..self.n_types())
            .flat_map(|i| [-v[3 * i], -v[3 * i + 1]])
            .fold(0.0, f64::max);
        rows.max(sign)
    }
}

pub fn build_lp(inst: &DiscreteInstance, kappa: &AdPaymentSchedule) -> Result<LPProblem> {
    let n = inst.len();
    if n == 0 {
        return Err(Error::domain("LP needs at least one type"));
    }
    let types: Vec<Point> = inst.points().iter().map(|w| w.x).collect();
    let weights: Vec<f64> = inst.points().iter().map(|w| w.prob).collect();
    let kap: Vec<f64> = types.iter().map(|&x| kappa.value(x)).collect();
    let mut objective = vec![0.0; 3 * n];
    for i in 0..n {
        objective[3 * i + 1] = weights[i] * kap[i];
        objective[3 * i + 2] = weights[i];
    }
    let mut constraints = Vec::with_capacity(n * (n - 1) + 3 * n);
    // x_i·(q_j - q_i) + t_i - t_j <= 0
    for i in 0..n {
        let x = types[i];
        for j in 0..n {
            if i == j {
                continue;
            }
            constraints.push(Constraint {
                kind: ConstraintKind::Ic { i, j },
                coeffs: vec![
                    (3 * j, x[0]),
                    (3 * j + 1, x[1]),
                    (3 * j + 2, -1.0),
                    (3 * i, -x[0]),
                    (3 * i + 1, -x[1]),
                    (3 * i + 2, 1.0),
                ],
                rhs: 0.0,
            });
        }
    }
    for i in 0..n {
        let x = types[i];
        constraints.push(Constraint {
            kind: ConstraintKind::Ir { i },
            coeffs: vec![(3 * i, -x[0]), (3 * i + 1, -x[1]), (3 * i + 2, 1.0)],
            rhs: 0.0,
        });
    }
    for i in 0..n {
        for axis in 0..2 {
            constraints.push(Constraint {
                kind: ConstraintKind::Box { i, axis },
                coeffs: vec![(3 * i + axis, 1.0)],
                rhs: 1.0,
            });
        }
    }
    Ok(LPProblem {
        types,
        weights,
        kappa: kap,
        objective,
        constraints,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub x: Point,
    pub q1: f64,
    pub q2: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LPSolution {
    pub value: f64,
    pub assignment: Vec<Assignment>,
    pub status: LpStatus,
    /// Largest constraint violation of the returned assignment.
    pub certificate: f64,
    /// Primal value minus the dual objective.
    pub duality_gap: f64,
    pub pivots: usize,
}

pub fn lp_solve(p: &LPProblem) -> Result<LPSolution> {
    let nv = p.n_variables();
    let nr = p.constraints.len();
    // Dual: min b·y, y >= 0, (A^T y)_j >= c_j for q, = c_j for t.
    let mut rows = vec![vec![0.0; nr]; nv];
    for (r, c) in p.constraints.iter().enumerate() {
        for &(j, a) in &c.coeffs {
            rows[j][r] += a;
        }
    }
    let senses = (0..nv)
        .map(|j| if j % 3 == 2 { RowSense::Eq } else { RowSense::Ge })
        .collect();
    let dual = LinearProgram {
        objective: p.constraints.iter().map(|c| -c.rhs).collect(),
        rows,
        senses,
        rhs: p.objective.clone(),
    };
    let s = simplex::solve(&dual)?;
    let status = match s.status {
        LpStatus::Optimal => LpStatus::Optimal,
        LpStatus::Infeasible => LpStatus::Unbounded,
        LpStatus::Unbounded => LpStatus::Infeasible,
    };
    if status != LpStatus::Optimal {
        return Ok(LPSolution {
            value: if status == LpStatus::Unbounded { f64::INFINITY } else { f64::NAN },
            assignment: vec![],
            status,
            certificate: f64::NAN,
            duality_gap: f64::NAN,
            pivots: s.pivots,
        });
    }
    let v: Vec<f64> = s.duals.iter().map(|y| -y).collect();
    let value: f64 = p.objective.iter().zip(&v).map(|(c, x)| c * x).sum();
    let dual_value = -s.value;
    let assignment = (0..p.n_types())
        .map(|i| Assignment {
            x: p.types[i],
            q1: v[3 * i],
            q2: v[3 * i + 1],
            t: v[3 * i + 2],
        })
        .collect();
    let t_cap = p
        .types
        .iter()
        .zip(&p.kappa)
        .map(|(x, k)| x[0].max(x[0] + x[1]) + k.abs())
        .fold(0.0, f64::max);
    debug_assert!(v.iter().skip(2).step_by(3).all(|&t| t <= t_cap + 1e-9));
    Ok(LPSolution {
        value,
        assignment,
        status,
        certificate: p.max_violation(&v),
        duality_gap: value - dual_value,
        pivots: s.pivots,
    })
}
