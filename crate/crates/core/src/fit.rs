//! Least-squares fit of `y = c1 + c2 * exp(-x / tau)`.
//!
//! A geometric grid over `tau` solves the two linear parameters exactly at
//! each node; the best node seeds a damped Gauss-Newton (Levenberg-Marquardt)
//! refinement of all three parameters. Uncertainties come from the linearized
//! covariance `s^2 (J^T J)^-1` with `s^2 = SSE / (n - 3)`.

// Negated comparisons below are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const GRID_NODES: usize = 400;
const MAX_ITERATIONS: usize = 500;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentialFit<T> {
    pub c1: T,
    pub c2: T,
    pub tau: T,
    /// Parameter covariance in `(c1, c2, tau)` order. Non-finite entries mean
    /// the corresponding direction is not constrained by the data.
    pub covariance: [[T; 3]; 3],
    pub stderr: [T; 3],
    pub fit_range: (T, T),
    pub n_points: usize,
    pub sse: T,
    pub residuals: Vec<T>,
    pub iterations: usize,
    /// False when the decay amplitude is not resolved from zero, in which
    /// case `tau` carries no information.
    pub tau_identifiable: bool,
}

impl<T: Scalar> ExponentialFit<T> {
    pub fn eval(&self, x: T) -> T {
        model(self.c1, self.c2, self.tau, x)
    }
}

fn model<T: Scalar>(c1: T, c2: T, tau: T, x: T) -> T {
    c1 + c2 * (-x / tau).exp()
}

fn sse<T: Scalar>(xs: &[T], ys: &[T], p: [T; 3]) -> T {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - model(p[0], p[1], p[2], x);
            r * r
        })
        .sum()
}

/// Linear least squares for `(c1, c2)` at fixed `tau`.
fn linear_at<T: Scalar>(xs: &[T], ys: &[T], tau: T) -> Option<[T; 3]> {
    let n = T::from_count(xs.len());
    let e: Vec<T> = xs.iter().map(|&x| (-x / tau).exp()).collect();
    let se: T = e.iter().copied().sum();
    let see: T = e.iter().map(|&v| v * v).sum();
    let sy: T = ys.iter().copied().sum();
    let sey: T = e.iter().zip(ys).map(|(&a, &b)| a * b).sum();
    let det = n * see - se * se;
    if !(det.abs() > T::epsilon() * n * see) {
        return None;
    }
    let c2 = (n * sey - se * sy) / det;
    let c1 = (sy - c2 * se) / n;
    Some([c1, c2, tau])
}

/// Solves a symmetric 3x3 system by Gaussian elimination with partial pivoting.
fn solve3<T: Scalar>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    let scale = a.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()));
    if !(scale > T::zero()) {
        return None;
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if !(a[pivot][col].abs() > scale * T::epsilon() * T::lit(16.0)) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (x, &p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *x = *x - f * p;
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in row + 1..3 {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

fn invert3<T: Scalar>(a: [[T; 3]; 3]) -> Option<[[T; 3]; 3]> {
    let mut inv = [[T::zero(); 3]; 3];
    for col in 0..3 {
        let mut e = [T::zero(); 3];
        e[col] = T::one();
        let x = solve3(a, e)?;
        for row in 0..3 {
            inv[row][col] = x[row];
        }
    }
    Some(inv)
}

fn normal_equations<T: Scalar>(xs: &[T], ys: &[T], p: [T; 3]) -> ([[T; 3]; 3], [T; 3]) {
    let mut jtj = [[T::zero(); 3]; 3];
    let mut jtr = [T::zero(); 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let e = (-x / p[2]).exp();
        let j = [T::one(), e, p[1] * e * x / (p[2] * p[2])];
        let r = y - (p[0] + p[1] * e);
        for a in 0..3 {
            jtr[a] = jtr[a] + j[a] * r;
            for b in 0..3 {
                jtj[a][b] = jtj[a][b] + j[a] * j[b];
            }
        }
    }
    (jtj, jtr)
}

/// Fits the decaying exponential to `(xs, ys)`; needs at least 4 points with
/// abscissae spanning more than one value.
pub fn fit_exponential<T: Scalar>(xs: &[T], ys: &[T]) -> Result<ExponentialFit<T>> {
    assert_eq!(xs.len(), ys.len(), "paired samples");
    let n = xs.len();
    if n < 4 {
        return Err(Error::InsufficientData(format!(
            "exponential fit needs at least 4 points, got {n}"
        )));
    }
    let lo = xs.iter().copied().fold(T::infinity(), T::min);
    let hi = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if !(hi > lo) {
        return Err(Error::Degenerate("all lags are equal".into()));
    }

    let tau_min = T::lit(0.5);
    let tau_max = hi.max(tau_min * T::lit(2.0));
    let ratio = (tau_max / tau_min).ln() / T::from_count(GRID_NODES - 1);
    let mut best: Option<([T; 3], T)> = None;
    for k in 0..GRID_NODES {
        let tau = tau_min * (ratio * T::from_count(k)).exp();
        if let Some(p) = linear_at(xs, ys, tau) {
            let s = sse(xs, ys, p);
            if best.as_ref().is_none_or(|(_, b)| s < *b) {
                best = Some((p, s));
            }
        }
    }
    let (mut p, mut cur) = best.ok_or_else(|| Error::Degenerate("no usable grid node".into()))?;

    // Beyond these the exponential is a spike at the first point (successive
    // points differ by e^5) or a straight line.
    let tau_floor = (hi - lo) / T::from_count(5 * (n - 1));
    let tau_ceiling = hi * T::lit(1000.0);
    let mut at_bound = false;
    let tol = T::epsilon().sqrt();
    let mut lambda = T::lit(1e-3);
    let mut converged = cur == T::zero();
    let mut iterations = 0;
    while !converged && iterations < MAX_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = normal_equations(xs, ys, p);
        let dmax = (0..3).fold(T::zero(), |m, i| m.max(jtj[i][i]));
        let mut a = jtj;
        for i in 0..3 {
            a[i][i] = a[i][i] + lambda * jtj[i][i].max(dmax * T::epsilon());
        }
        let trial = solve3(a, jtr).map(|d| [p[0] + d[0], p[1] + d[1], (p[2] + d[2]).max(tau_floor).min(tau_ceiling)]);
        match trial {
            Some(q) if q.iter().all(|v| v.is_finite()) => {
                let s = sse(xs, ys, q);
                if s <= cur {
                    let small = (0..3).all(|i| (q[i] - p[i]).abs() <= tol * (p[i].abs() + tol));
                    let flat = cur - s <= tol * tol * cur;
                    at_bound = q[2] == tau_floor || q[2] == tau_ceiling;
                    p = q;
                    cur = s;
                    lambda = (lambda / T::lit(10.0)).max(T::lit(1e-12));
                    // a decay time pinned at a bound means the data carry no decay
                    converged = small || flat || at_bound || cur == T::zero();
                } else {
                    lambda = lambda * T::lit(10.0);
                }
            }
            _ => lambda = lambda * T::lit(10.0),
        }
        // no descent direction left at any damping: a numerical minimum
        if lambda > T::lit(1e16) {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            best_sse: cur.to_f64_lossy(),
        });
    }

    let (jtj, _) = normal_equations(xs, ys, p);
    let s2 = if n > 3 { cur / T::from_count(n - 3) } else { T::nan() };
    let covariance = invert3(jtj)
        .filter(|inv| (0..3).all(|i| inv[i][i].is_finite() && inv[i][i] >= T::zero()))
        .map(|inv| inv.map(|row| row.map(|v| v * s2)))
        .unwrap_or([[T::infinity(); 3]; 3]);
    let stderr = [0, 1, 2].map(|i| covariance[i][i].sqrt());
    let scale = ys.iter().fold(T::zero(), |m, v| m.max(v.abs())).max(T::one());
    let tau_identifiable =
        !at_bound && stderr[2].is_finite() && p[1].abs() > tol * scale && p[1].abs() > T::lit(2.0) * stderr[1];
    let residuals = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| y - model(p[0], p[1], p[2], x))
        .collect();
    Ok(ExponentialFit {
        c1: p[0],
        c2: p[1],
        tau: p[2],
        covariance,
        stderr,
        fit_range: (lo, hi),
        n_points: n,
        sse: cur,
        residuals,
        iterations,
        tau_identifiable,
    })
}
