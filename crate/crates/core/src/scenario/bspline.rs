//! Cross-covariances of integer-shifted B-splines.

use crate::error::{Error, Result};
use crate::sequence::Sequence;
use num_complex::Complex;

pub const MAX_ORDER: usize = 10;

/// Cardinal B-spline of order `n` supported on `[0, n+1]` (Cox–de Boor recursion).
pub fn bspline(order: usize, x: f64) -> f64 {
    if order == 0 {
        return if (0.0..1.0).contains(&x) { 1.0 } else { 0.0 };
    }
    let n = order as f64;
    (x * bspline(order - 1, x) + (n + 1.0 - x) * bspline(order - 1, x - 1.0)) / n
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(points: usize) -> Vec<(f64, f64)> {
    let n = points;
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    (p0, p1) = (p1, ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k);
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `R(k) = ∫ B_{order1}(x - k) B_{order2}(x) dx` over its whole support
/// `k ∈ [-order1, order2]`.
///
/// The integrand is a polynomial of degree `order1 + order2` between
/// consecutive integers, so Gauss–Legendre with `⌈(order1+order2)/2⌉ + 1`
/// nodes per unit interval is exact up to rounding.
pub fn bspline_crosscov(order1: usize, order2: usize) -> Result<Sequence<f64>> {
    if order1 > MAX_ORDER || order2 > MAX_ORDER {
        return Err(Error::InvalidScheme(format!("B-spline orders are limited to {MAX_ORDER}")));
    }
    let rule = gauss_legendre((order1 + order2).div_ceil(2) + 1);
    let lo = -(order1 as i64);
    let values = (lo..=order2 as i64)
        .map(|k| {
            let first = k.max(0);
            let last = (k + order1 as i64 + 1).min(order2 as i64 + 1);
            let total: f64 = (first..last)
                .map(|cell| {
                    rule.iter()
                        .map(|(t, w)| {
                            let x = cell as f64 + 0.5 * (t + 1.0);
                            0.5 * w * bspline(order1, x - k as f64) * bspline(order2, x)
                        })
                        .sum::<f64>()
                })
                .sum();
            Complex::new(total, 0.0)
        })
        .collect();
    Ok(Sequence::new(lo, values))
}
