//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's LP, calibration or measure code.
#![allow(dead_code)]

use adscreen::domain::{AdPaymentSchedule, DensityModel, TypeSpace};
use adscreen::measure::{build_measure, MeasureDecomposition};
use adscreen::quadrature::QuadratureSpec;

pub fn unit_space() -> TypeSpace {
    TypeSpace::new(0.0, 1.0, -1.0, 0.0).unwrap()
}

pub fn shifted_space() -> TypeSpace {
    TypeSpace::new(1.0, 2.0, -1.0, 0.0).unwrap()
}

pub fn uniform_measure(s: TypeSpace, k: f64) -> MeasureDecomposition {
    let d = DensityModel::uniform(s).unwrap();
    build_measure(&d, &AdPaymentSchedule::constant(k).unwrap(), &QuadratureSpec::default()).unwrap()
}

pub fn example4_price() -> f64 {
    (-3.0 + 33f64.sqrt()) / 6.0
}

/// Root of the two-price polynomial system by Newton on the polynomials
/// themselves (no quadrature involved).
pub fn example5_root() -> (f64, f64) {
    let f = |p1: f64, p2: f64| {
        (
            1.5 * p1 * p1 - 4.0 * p1 + 2.0 * p2 + 1.0,
            -3.0 * p1 * p1 + 3.0 * p1 * p2 + 6.5 * p1 - 4.0 * p2 - 3.0,
        )
    };
    let (mut p1, mut p2) = (1.1, 0.8);
    for _ in 0..100 {
        let (a, b) = f(p1, p2);
        let j11 = 3.0 * p1 - 4.0;
        let j12 = 2.0;
        let j21 = -6.0 * p1 + 3.0 * p2 + 6.5;
        let j22 = 3.0 * p1 - 4.0;
        let det = j11 * j22 - j12 * j21;
        p1 -= (j22 * a - j12 * b) / det;
        p2 -= (-j21 * a + j11 * b) / det;
    }
    (p1, p2)
}

// ---- hand-derived measure formulas for uniform densities ----

/// Unit square, k = 0: mass of `[x1, 1] x [-1, x2]`.
pub fn ex3_lower_right(x1: f64, x2: f64) -> f64 {
    let atom = if x1 == 0.0 { 1.0 } else { 0.0 };
    2.0 * x1 - 2.0 * x2 + 3.0 * x1 * x2 - 1.0 + atom
}

/// `[1,2] x [-1,0]`, k = 1.5: mass of the full rectangle `[x1, 2] x [x2, 0]`.
pub fn ex4_rectangle(x1: f64, x2: f64) -> f64 {
    -3.0 * x1 * x2 - 1.5 * x1 + 4.0 * x2 + 3.0
}

/// Left-edge anchors `(1, x2)` for the single-bundle cell, above and below
/// the line `x1 + x2 = p`.
pub fn ex4_left_edge(x2: f64, p: f64) -> f64 {
    if x2 >= p - 1.0 {
        2.0 * x2 + 1.5
    } else {
        let d = p - 1.0 - x2;
        2.0 * x2 + 1.5 + 1.5 * d * d + d
    }
}

/// `[1,2] x [-1,0]`, k = 0.5, two-price menu: upper-right orthant masses on
/// the bundle cell in its four anchor cases.
pub fn ex5_y_orthant(x1: f64, x2: f64, pg: f64, psb: f64) -> Option<f64> {
    let c1 = 0.5 * (2.0 - x1) - 2.0 * x2 + 3.0 * (2.0 - x1) * x2;
    if x1 > 1.0 && x1 + x2 > psb && x2 > psb - pg {
        Some(c1)
    } else if x1 > 1.0 && x1 <= pg && x2 >= psb - pg && x2 <= psb - x1 {
        Some(c1 + 1.5 * (psb - x1 - x2).powi(2))
    } else if x1 == 1.0 && x2 >= psb - pg && x2 <= psb - 1.0 {
        Some(0.5 + x2 + 1.5 * (psb - 1.0 - x2).powi(2) + psb - 1.0)
    } else if x1 == 1.0 && x2 >= psb - 1.0 {
        Some(0.5 + 2.0 * x2)
    } else {
        None
    }
}

pub fn ex5_w_orthant(x1: f64, x2: f64) -> f64 {
    0.5 * (2.0 - x1) + 2.0 * (x2 + 1.0) - 3.0 * (2.0 - x1) * (x2 + 1.0)
}

/// Cumulative x1-marginal on the no-purchase cell of the two-price menu.
pub fn ex5_marginal(x1: f64, psb: f64) -> f64 {
    1.5 * x1 * x1 - (2.5 + 3.0 * psb) * x1 + (2.0 + 2.0 * psb)
}

/// `∫_t^pg` of [`ex5_marginal`].
pub fn ex5_tail(t: f64, pg: f64, psb: f64) -> f64 {
    let g = |x: f64| 0.5 * x.powi(3) - 0.5 * (2.5 + 3.0 * psb) * x * x + (2.0 + 2.0 * psb) * x;
    g(pg) - g(t)
}

pub fn ex5_masses(p1: f64, p2: f64) -> [f64; 3] {
    let y = 1.5 * p1 * p1 - 4.0 * p1 + 2.0 * p2 + 1.0;
    let z = 1.5 * p1 * p1 - 3.0 * p1 * p2 - 2.5 * p1 + 2.0 * p2 + 2.0;
    let w = -3.0 * p1 * p1 + 3.0 * p1 * p2 + 6.5 * p1 - 4.0 * p2 - 3.0;
    [z, w, y]
}

// ---- brute-force mechanism oracles for tiny discrete instances ----

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-10 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in 0..n {
            if i != k {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(m: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, f);
            cur.pop();
        }
    }
    rec(0, m, k, &mut Vec::new(), f);
}

/// Optimal revenue over all IC/IR mechanisms (lotteries allowed) by
/// enumerating every vertex of the feasible polytope.
pub fn lp_by_vertex_enumeration(types: &[[f64; 2]], weights: &[f64], kappa: &[f64]) -> f64 {
    let n = types.len();
    let nv = 3 * n;
    // rows a·v <= b with v = (q1, q2, t) per type
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut a = vec![0.0; nv];
                a[3 * j] += types[i][0];
                a[3 * j + 1] += types[i][1];
                a[3 * j + 2] -= 1.0;
                a[3 * i] -= types[i][0];
                a[3 * i + 1] -= types[i][1];
                a[3 * i + 2] += 1.0;
                rows.push((a, 0.0));
            }
        }
        let mut ir = vec![0.0; nv];
        ir[3 * i] = -types[i][0];
        ir[3 * i + 1] = -types[i][1];
        ir[3 * i + 2] = 1.0;
        rows.push((ir, 0.0));
        for axis in 0..2 {
            let mut up = vec![0.0; nv];
            up[3 * i + axis] = 1.0;
            rows.push((up, 1.0));
            let mut lo = vec![0.0; nv];
            lo[3 * i + axis] = -1.0;
            rows.push((lo, 0.0));
        }
    }
    let objective: Vec<f64> = (0..n)
        .flat_map(|i| [0.0, weights[i] * kappa[i], weights[i]])
        .collect();
    let mut best = f64::NEG_INFINITY;
    combinations(rows.len(), nv, &mut |idx| {
        let a: Vec<Vec<f64>> = idx.iter().map(|&r| rows[r].0.clone()).collect();
        let b: Vec<f64> = idx.iter().map(|&r| rows[r].1).collect();
        if let Some(v) = solve_dense(a, b) {
            let feasible = rows
                .iter()
                .all(|(a, b)| a.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>() <= b + 1e-9);
            if feasible {
                let val: f64 = objective.iter().zip(&v).map(|(c, x)| c * x).sum();
                best = best.max(val);
            }
        }
    });
    best
}

/// Best deterministic mechanism: every assignment of `{0,1}^2` bundles to
/// types, with the largest IC/IR payments found by Bellman-Ford on the
/// difference constraints `t_i - t_j <= x_i·(q_i - q_j)`, `t_i <= x_i·q_i`.
/// Lotteries can do strictly better, so this is a lower bound on the LP.
pub fn best_deterministic(types: &[[f64; 2]], weights: &[f64], kappa: &[f64]) -> f64 {
    let n = types.len();
    let bundles = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
    let mut best = f64::NEG_INFINITY;
    for code in 0..4usize.pow(n as u32) {
        let q: Vec<[f64; 2]> = (0..n).map(|i| bundles[(code / 4usize.pow(i as u32)) % 4]).collect();
        let val = |i: usize, b: [f64; 2]| types[i][0] * b[0] + types[i][1] * b[1];
        let mut t: Vec<f64> = (0..n).map(|i| val(i, q[i])).collect();
        let mut stable = false;
        for _ in 0..=n {
            stable = true;
            for i in 0..n {
                for j in 0..n {
                    let cap = t[j] + val(i, q[i]) - val(i, q[j]);
                    if cap < t[i] - 1e-15 {
                        t[i] = cap;
                        stable = false;
                    }
                }
            }
            if stable {
                break;
            }
        }
        if !stable {
            continue;
        }
        let rev: f64 = (0..n).map(|i| weights[i] * (t[i] + kappa[i] * q[i][1])).sum();
        best = best.max(rev);
    }
    best
}
