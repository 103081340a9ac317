//! Independent oracles shared by the unit tests.

use alloc::vec::Vec;

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// One-sample Kolmogorov-Smirnov statistic against `cdf`.
pub fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at level 0.001.
pub fn ks_critical_001(n: usize) -> f64 {
    1.949 / libm::sqrt(n as f64)
}

/// Table of a CDF obtained by integrating a density with the trapezoid rule
/// on a fine grid over `[lo, hi]`, evaluated by linear interpolation.
pub struct NumericCdf {
    lo: f64,
    step: f64,
    values: Vec<f64>,
}

impl NumericCdf {
    pub fn new(pdf: impl Fn(f64) -> f64, lo: f64, hi: f64, cells: usize) -> Self {
        let step = (hi - lo) / cells as f64;
        let mut values = Vec::with_capacity(cells + 1);
        let mut acc = 0.0;
        let mut prev = pdf(lo);
        values.push(0.0);
        for i in 1..=cells {
            let cur = pdf(lo + i as f64 * step);
            acc += 0.5 * (prev + cur) * step;
            values.push(acc);
            prev = cur;
        }
        let total = acc;
        for v in values.iter_mut() {
            *v /= total;
        }
        NumericCdf { lo, step, values }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let pos = (x - self.lo) / self.step;
        if pos <= 0.0 {
            return 0.0;
        }
        let i = libm::floor(pos) as usize;
        if i + 1 >= self.values.len() {
            return 1.0;
        }
        let frac = pos - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }
}
