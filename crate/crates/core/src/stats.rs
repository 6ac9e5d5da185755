//! Small descriptive and regression helpers used across the analyses.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn mean<T: Scalar>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    Some(xs.iter().copied().sum::<T>() / T::from_count(xs.len()))
}

/// Population variance (divisor `n`).
pub fn population_variance<T: Scalar>(xs: &[T]) -> Option<T> {
    let m = mean(xs)?;
    Some(xs.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / T::from_count(xs.len()))
}

/// Sample variance (divisor `n - 1`).
pub fn sample_variance<T: Scalar>(xs: &[T]) -> Option<T> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs)?;
    Some(xs.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / T::from_count(xs.len() - 1))
}

/// Standard error of the mean, from the sample standard deviation.
pub fn standard_error<T: Scalar>(xs: &[T]) -> Option<T> {
    sample_variance(xs).map(|v| (v / T::from_count(xs.len())).sqrt())
}

/// Pearson correlation. `None` when either side has zero spread.
pub fn pearson<T: Scalar>(xs: &[T], ys: &[T]) -> Option<T> {
    assert_eq!(xs.len(), ys.len(), "paired samples");
    let mx = mean(xs)?;
    let my = mean(ys)?;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    let mut syy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxy = sxy + (x - mx) * (y - my);
        sxx = sxx + (x - mx) * (x - mx);
        syy = syy + (y - my) * (y - my);
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).max(-T::one()).min(T::one()))
}

/// Result of an ordinary least-squares straight-line fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r2: T,
    pub slope_stderr: T,
    pub intercept_stderr: T,
    pub n: usize,
}

impl<T: Scalar> LineFit<T> {
    pub fn predict(&self, x: T) -> T {
        self.intercept + self.slope * x
    }
}

/// Weighted least squares line; pass `None` for unit weights.
pub fn fit_line<T: Scalar>(xs: &[T], ys: &[T], weights: Option<&[T]>) -> Result<LineFit<T>> {
    assert_eq!(xs.len(), ys.len(), "paired samples");
    let n = xs.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "line fit needs at least 2 points, got {n}"
        )));
    }
    let w = |i: usize| weights.map_or(T::one(), |w| w[i]);
    let sw: T = (0..n).map(w).sum();
    let mx = (0..n).map(|i| w(i) * xs[i]).sum::<T>() / sw;
    let my = (0..n).map(|i| w(i) * ys[i]).sum::<T>() / sw;
    let sxx: T = (0..n).map(|i| w(i) * (xs[i] - mx) * (xs[i] - mx)).sum();
    let sxy: T = (0..n).map(|i| w(i) * (xs[i] - mx) * (ys[i] - my)).sum();
    let syy: T = (0..n).map(|i| w(i) * (ys[i] - my) * (ys[i] - my)).sum();
    if sxx <= T::zero() {
        return Err(Error::Degenerate("all x values are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: T = (0..n)
        .map(|i| {
            let r = ys[i] - intercept - slope * xs[i];
            w(i) * r * r
        })
        .sum();
    let r2 = if syy > T::zero() {
        T::one() - sse / syy
    } else {
        T::one()
    };
    let (slope_stderr, intercept_stderr) = if n > 2 {
        let s2 = sse / T::from_count(n - 2);
        let se_slope = (s2 / sxx).sqrt();
        let se_int = (s2 * (T::one() / sw + mx * mx / sxx)).sqrt();
        (se_slope, se_int)
    } else {
        (T::nan(), T::nan())
    };
    Ok(LineFit {
        slope,
        intercept,
        r2,
        slope_stderr,
        intercept_stderr,
        n,
    })
}
