//! Independent feasibility oracle for small strict/non-strict systems.
//!
//! Decides `∃x: a_i·x + b_i > 0 (strict rows), a_i·x + b_i ≥ 0 (others)` by
//! maximizing `t` subject to `a_i·x + b_i ≥ t` on strict rows, the plain
//! rows, and `0 ≤ t ≤ 1`. The optimum is attained at a point fixed by
//! `n + 1` tight hyperplanes drawn from the rows, `t = 0`, `t = 1` and
//! `x_j = 0` (the last family pins down any lineality). Every such point is
//! enumerated.

#![allow(dead_code)]

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

pub type Q = Ratio<i128>;

#[derive(Clone, Debug)]
pub struct Row {
    pub a: Vec<i64>,
    pub b: i64,
    pub strict: bool,
}

pub fn q(x: i64) -> Q {
    Q::from_integer(x as i128)
}

/// Solve the square system `m · y = rhs` by Gauss–Jordan elimination.
fn solve(mut m: Vec<Vec<Q>>, mut rhs: Vec<Q>) -> Option<Vec<Q>> {
    let n = rhs.len();
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, p);
        rhs.swap(col, p);
        let d = m[col][col];
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col] / d;
                for c in col..n {
                    let v = m[col][c];
                    m[r][c] -= f * v;
                }
                let v = rhs[col];
                rhs[r] -= f * v;
            }
        }
    }
    Some((0..n).map(|i| rhs[i] / m[i][i]).collect())
}

fn value(r: &Row, x: &[Q]) -> Q {
    r.a.iter().zip(x).fold(q(r.b), |acc, (&a, &xi)| acc + q(a) * xi)
}

fn combinations(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    go(0, n, k, &mut Vec::new(), f);
}

/// A satisfying point, or `None` when the system is infeasible.
pub fn oracle(nvars: usize, rows: &[Row]) -> Option<Vec<Q>> {
    let dim = nvars + 1;
    // Hyperplanes as (coefficients over (x, t), rhs).
    let mut planes: Vec<(Vec<Q>, Q)> = Vec::new();
    for r in rows {
        let mut c: Vec<Q> = r.a.iter().map(|&a| q(a)).collect();
        c.push(if r.strict { q(-1) } else { q(0) });
        planes.push((c, q(-r.b)));
    }
    for rhs in [0, 1] {
        let mut c = vec![q(0); dim];
        c[nvars] = q(1);
        planes.push((c, q(rhs)));
    }
    for j in 0..nvars {
        let mut c = vec![q(0); dim];
        c[j] = q(1);
        planes.push((c, q(0)));
    }
    let any_strict = rows.iter().any(|r| r.strict);
    let mut best: Option<(Q, Vec<Q>)> = None;
    combinations(planes.len(), dim, &mut |idx| {
        let m: Vec<Vec<Q>> = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let rhs: Vec<Q> = idx.iter().map(|&i| planes[i].1).collect();
        let Some(y) = solve(m, rhs) else { return };
        let t = y[nvars];
        if t < q(0) || t > q(1) {
            return;
        }
        let x = &y[..nvars];
        let ok = rows.iter().all(|r| {
            let v = value(r, x);
            if r.strict {
                v >= t
            } else {
                v >= q(0)
            }
        });
        if ok && best.as_ref().map_or(true, |(bt, _)| t > *bt) {
            best = Some((t, x.to_vec()));
        }
    });
    match best {
        Some((t, x)) if !any_strict || t > q(0) => Some(x),
        _ => None,
    }
}

pub fn satisfies(rows: &[Row], x: &[Q]) -> bool {
    rows.iter().all(|r| {
        let v = value(r, x);
        if r.strict {
            v > q(0)
        } else {
            v >= q(0)
        }
    })
}

/// Convert an exact library rational; panics when it does not fit.
pub fn to_q(r: &fsi_decay::Rational) -> Q {
    Q::new(r.numer().to_i128().expect("fits i128"), r.denom().to_i128().expect("fits i128"))
}
