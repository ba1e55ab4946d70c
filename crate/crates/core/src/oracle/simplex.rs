//! Dense two-phase tableau simplex, Bland's rule on degenerate stretches.
//!
//! Solves `max c·x` subject to `a_i·x (<=|>=|=) b_i` and `x >= 0`. After the
//! tableau reaches an optimal basis, primal values and row duals are
//! recomputed from the original data by factoring the basis matrix, so the
//! reported solution does not carry the tableau's accumulated rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub senses: Vec<RowSense>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub value: f64,
    /// One multiplier per row, signed so that `value = Σ b_i y_i`: nonnegative
    /// on `<=` rows, nonpositive on `>=` rows.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-10;
const FEAS_EPS: f64 = 1e-9;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

#[derive(Clone, Copy, PartialEq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    m: usize,
    width: usize,
    cells: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    pivots: usize,
    max_pivots: usize,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * (self.width + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.cells[r * (self.width + 1) + self.width]
    }

    fn pivot(&mut self, r: usize, c: usize, d: &mut [f64], z: &mut f64) -> Result<()> {
        self.pivots += 1;
        if self.pivots > self.max_pivots {
            return Err(Error::numeric(format!(
                "simplex stalled after {} pivots",
                self.pivots
            )));
        }
        let w = self.width + 1;
        let p = self.at(r, c);
        let (before, rest) = self.cells.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for v in prow.iter_mut() {
            *v /= p;
        }
        prow[c] = 1.0;
        let eliminate = |row: &mut [f64]| {
            let f = row[c];
            if f != 0.0 {
                for (a, b) in row.iter_mut().zip(prow.iter()) {
                    *a -= f * b;
                }
                row[c] = 0.0;
            }
        };
        before.chunks_mut(w).for_each(eliminate);
        after.chunks_mut(w).for_each(eliminate);
        let f = d[c];
        if f != 0.0 {
            for j in 0..self.width {
                d[j] -= f * prow[j];
            }
            d[c] = 0.0;
            *z += f * prow[self.width];
        }
        self.basis[r] = c;
        Ok(())
    }

    /// Largest-coefficient pricing that falls back to Bland's rule after a
    /// run of degenerate pivots; returns false if unbounded.
    fn run(&mut self, d: &mut [f64], z: &mut f64, allow: &dyn Fn(usize) -> bool) -> Result<bool> {
        let mut degenerate_run = 0usize;
        loop {
            let bland = degenerate_run >= DEGENERATE_LIMIT;
            let entering = if bland {
                (0..self.width).find(|&j| allow(j) && d[j] > COST_EPS)
            } else {
                (0..self.width)
                    .filter(|&j| allow(j) && d[j] > COST_EPS)
                    .fold(None, |best: Option<usize>, j| match best {
                        Some(b) if d[b] >= d[j] => Some(b),
                        _ => Some(j),
                    })
            };
            let Some(c) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.at(r, c);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r).max(0.0) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-12 * (1.0 + lratio)
                                || (ratio <= lratio + 1e-12 * (1.0 + lratio) && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Ok(false),
                Some((r, ratio)) => {
                    if ratio <= 1e-12 {
                        degenerate_run += 1;
                    } else {
                        degenerate_run = 0;
                    }
                    self.pivot(r, c, d, z)?
                }
            }
        }
    }
}

/// Gaussian elimination with partial pivoting; `a` is row-major `n x n`.
fn dense_solve(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
            .unwrap();
        if a[p * n + k].abs() < 1e-13 {
            return Err(Error::numeric("singular basis matrix"));
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            b.swap(k, p);
        }
        for i in k + 1..n {
            let f = a[i * n + k] / a[k * n + k];
            if f != 0.0 {
                for j in k..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k * n + j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k * n + k];
    }
    Ok(x)
}

pub fn solve(lp: &LinearProgram) -> Result<SimplexSolution> {
    let n = lp.objective.len();
    let m = lp.rows.len();
    if lp.senses.len() != m || lp.rhs.len() != m || lp.rows.iter().any(|r| r.len() != n) {
        return Err(Error::numeric("inconsistent linear program dimensions"));
    }

    // Normalize to b >= 0; `>= 0` rows become `<= 0` so they start with a slack.
    let mut flip = vec![false; m];
    let mut sense = lp.senses.clone();
    for i in 0..m {
        let b = lp.rhs[i];
        let s = sense[i];
        if b < 0.0 || (b == 0.0 && s == RowSense::Ge) {
            flip[i] = true;
            sense[i] = match s {
                RowSense::Le => RowSense::Ge,
                RowSense::Ge => RowSense::Le,
                RowSense::Eq => RowSense::Eq,
            };
        }
    }
    let mut kinds = vec![ColKind::Structural; n];
    let mut unit_col = vec![0usize; m];
    let mut extra: Vec<(usize, f64)> = Vec::new();
    for i in 0..m {
        match sense[i] {
            RowSense::Le => {
                unit_col[i] = n + extra.len();
                extra.push((i, 1.0));
                kinds.push(ColKind::Slack);
            }
            RowSense::Ge => {
                extra.push((i, -1.0));
                kinds.push(ColKind::Slack);
            }
            RowSense::Eq => {}
        }
    }
    for i in 0..m {
        if sense[i] != RowSense::Le {
            unit_col[i] = n + extra.len();
            extra.push((i, 1.0));
            kinds.push(ColKind::Artificial);
        }
    }
    let width = n + extra.len();
    let mut cells = vec![0.0; m * (width + 1)];
    for i in 0..m {
        let sgn = if flip[i] { -1.0 } else { 1.0 };
        let row = &mut cells[i * (width + 1)..(i + 1) * (width + 1)];
        for j in 0..n {
            row[j] = sgn * lp.rows[i][j];
        }
        row[width] = sgn * lp.rhs[i];
    }
    for (k, &(i, v)) in extra.iter().enumerate() {
        cells[i * (width + 1) + n + k] = v;
    }
    let mut t = Tableau {
        m,
        width,
        cells,
        basis: unit_col.clone(),
        kinds: kinds.clone(),
        pivots: 0,
        max_pivots: 50 * (m + width).max(1000),
    };

    // Phase 1: maximize minus the sum of artificials.
    let artificial_rows: Vec<usize> = (0..m).filter(|&i| kinds[unit_col[i]] == ColKind::Artificial).collect();
    if !artificial_rows.is_empty() {
        let mut d = vec![0.0; width];
        let mut z = 0.0;
        for &r in &artificial_rows {
            for j in 0..width {
                if kinds[j] != ColKind::Artificial {
                    d[j] += t.at(r, j);
                }
            }
            z -= t.rhs(r);
        }
        t.run(&mut d, &mut z, &|_| true)?;
        if z < -FEAS_EPS * (1.0 + lp.rhs.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
            return Ok(SimplexSolution {
                status: LpStatus::Infeasible,
                x: vec![],
                value: f64::NAN,
                duals: vec![],
                pivots: t.pivots,
            });
        }
        // Drive artificials at zero out of the basis where possible.
        for r in 0..m {
            if t.kinds[t.basis[r]] == ColKind::Artificial {
                if let Some(c) = (0..width).find(|&j| t.kinds[j] != ColKind::Artificial && t.at(r, j).abs() > 1e-9) {
                    let mut dd = vec![0.0; width];
                    let mut zz = 0.0;
                    t.pivot(r, c, &mut dd, &mut zz)?;
                }
            }
        }
    }

    // Phase 2.
    let cost = |j: usize| if j < n { lp.objective[j] } else { 0.0 };
    let mut d: Vec<f64> = (0..width).map(cost).collect();
    let mut z = 0.0;
    for r in 0..m {
        let cb = cost(t.basis[r]);
        if cb != 0.0 {
            for j in 0..width {
                d[j] -= cb * t.at(r, j);
            }
            z += cb * t.rhs(r);
        }
    }
    let kinds_ref = t.kinds.clone();
    let bounded = t.run(&mut d, &mut z, &|j| kinds_ref[j] != ColKind::Artificial)?;
    if !bounded {
        return Ok(SimplexSolution {
            status: LpStatus::Unbounded,
            x: vec![],
            value: f64::INFINITY,
            duals: vec![],
            pivots: t.pivots,
        });
    }

    // Recompute x_B = B^-1 b and y = c_B B^-1 from the original columns.
    let column = |j: usize, i: usize| -> f64 {
        if j < n {
            if flip[i] { -lp.rows[i][j] } else { lp.rows[i][j] }
        } else {
            let (row, v) = extra[j - n];
            if row == i { v } else { 0.0 }
        }
    };
    let mut bmat = vec![0.0; m * m];
    let mut bt = vec![0.0; m * m];
    for i in 0..m {
        for (k, &j) in t.basis.iter().enumerate() {
            let v = column(j, i);
            bmat[i * m + k] = v;
            bt[k * m + i] = v;
        }
    }
    let b: Vec<f64> = (0..m).map(|i| if flip[i] { -lp.rhs[i] } else { lp.rhs[i] }).collect();
    let xb = dense_solve(bmat, b, m)?;
    let cb: Vec<f64> = t.basis.iter().map(|&j| cost(j)).collect();
    let y = dense_solve(bt, cb, m)?;
    let mut x = vec![0.0; n];
    for (k, &j) in t.basis.iter().enumerate() {
        if j < n {
            x[j] = xb[k].max(0.0);
        }
    }
    let duals: Vec<f64> = (0..m).map(|i| if flip[i] { -y[i] } else { y[i] }).collect();
    let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(SimplexSolution {
        status: LpStatus::Optimal,
        x,
        value,
        duals,
        pivots: t.pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(c: &[f64], rows: &[(&[f64], RowSense, f64)]) -> LinearProgram {
        LinearProgram {
            objective: c.to_vec(),
            rows: rows.iter().map(|r| r.0.to_vec()).collect(),
            senses: rows.iter().map(|r| r.1).collect(),
            rhs: rows.iter().map(|r| r.2).collect(),
        }
    }

    #[test]
    fn textbook_max() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let p = lp(
            &[3.0, 5.0],
            &[
                (&[1.0, 0.0], RowSense::Le, 4.0),
                (&[0.0, 2.0], RowSense::Le, 12.0),
                (&[3.0, 2.0], RowSense::Le, 18.0),
            ],
        );
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
        let dual_value: f64 = s.duals.iter().zip(&p.rhs).map(|(y, b)| y * b).sum();
        assert!((dual_value - 36.0).abs() < 1e-12);
        assert!(s.duals.iter().all(|&y| y >= -1e-12));
    }

    #[test]
    fn phase_one_with_equalities() {
        // max -x - y, x + y = 2, x >= 0.5 -> value -2
        let p = lp(
            &[-1.0, -1.0],
            &[(&[1.0, 1.0], RowSense::Eq, 2.0), (&[1.0, 0.0], RowSense::Ge, 0.5)],
        );
        let s = solve(&p).unwrap();
        assert!((s.value + 2.0).abs() < 1e-12);
        assert!(s.x[0] >= 0.5 - 1e-12);
        let dual_value: f64 = s.duals.iter().zip(&p.rhs).map(|(y, b)| y * b).sum();
        assert!((dual_value + 2.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let p = lp(&[1.0], &[(&[1.0], RowSense::Le, 1.0), (&[1.0], RowSense::Ge, 2.0)]);
        assert_eq!(solve(&p).unwrap().status, LpStatus::Infeasible);
        let p = lp(&[1.0, 0.0], &[(&[0.0, 1.0], RowSense::Le, 1.0)]);
        assert_eq!(solve(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the largest-coefficient rule.
        let p = lp(
            &[0.75, -150.0, 0.02, -6.0],
            &[
                (&[0.25, -60.0, -0.04, 9.0], RowSense::Le, 0.0),
                (&[0.5, -90.0, -0.02, 3.0], RowSense::Le, 0.0),
                (&[0.0, 0.0, 1.0, 0.0], RowSense::Le, 1.0),
            ],
        );
        let s = solve(&p).unwrap();
        assert!((s.value - 0.05).abs() < 1e-12);
    }
}
