//! Scalar special functions, log-space helpers and small dense solves.

use alloc::vec::Vec;

use crate::error::{MarError, Result};

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Standard Normal density.
#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * exp(-0.5 * z * z)
}

/// Standard Normal distribution function.
#[inline]
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

/// Log density of `N(mean, sd^2)` at `x`.
#[inline]
pub fn normal_ln_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -LN_SQRT_2PI - ln(sd) - 0.5 * z * z
}

/// Log density of a Gamma distribution in the shape/rate parameterisation.
pub fn gamma_ln_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    shape * ln(rate) - ln_gamma(shape) + (shape - 1.0) * ln(x) - rate * x
}

/// Log density of a Dirichlet distribution at `x` (which must lie on the simplex).
///
/// The one-dimensional Dirichlet is a point mass at 1 and contributes 0.
pub fn dirichlet_ln_pdf(x: &[f64], alpha: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), alpha.len());
    if x.len() <= 1 {
        return 0.0;
    }
    let total: f64 = alpha.iter().sum();
    let mut out = ln_gamma(total);
    for (&xi, &ai) in x.iter().zip(alpha) {
        if xi <= 0.0 {
            return f64::NEG_INFINITY;
        }
        out += (ai - 1.0) * ln(xi) - ln_gamma(ai);
    }
    out
}

/// `ln(sum(exp(v)))` without overflow. Returns `-inf` for an empty or all `-inf` slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = values.iter().map(|v| exp(v - max)).sum();
    max + ln(s)
}

/// `ln(mean(exp(v)))`.
pub fn log_mean_exp(values: &[f64]) -> f64 {
    log_sum_exp(values) - ln(values.len() as f64)
}

/// Solves `a x = rhs` (row-major `n x n`) by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<f64>, mut rhs: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(rhs.len(), n);
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for col in 0..n {
        let (pivot, best) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= 1e-13 * scale {
            return Err(MarError::Singular("pivot vanished in linear solve"));
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            rhs.swap(col, pivot);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let factor = a[r * n + col] / d;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[r * n + j] -= factor * a[col * n + j];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    let mut x = alloc::vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for j in r + 1..n {
            acc -= a[r * n + j] * x[j];
        }
        x[r] = acc / a[r * n + r];
    }
    Ok(x)
}

/// Sample mean and (unbiased) variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Linear-interpolation quantile of an ascending slice (type 7).
pub fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * prob;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
