//! The Gaussian mixture autoregressive model: parameters, conditional
//! distributions, likelihoods, autocorrelations and a path simulator.
//!
//! Time indices are 0-based. With `p` the largest component order, the
//! conditional distribution of `y[t]` is defined for `p <= t < n`; the first
//! `p` observations are conditioned on and never modelled.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{MarError, Result};
use crate::math::{self, ln, log_sum_exp, LN_SQRT_2PI};
use crate::rng::rng_from_seed;
use crate::stability;

/// Burn-in used by [`simulate_path`] callers that have no better choice.
pub const DEFAULT_SIMULATION_BURN_IN: usize = 500;

/// Full parameterisation of a MAR(g; p_1, ..., p_g) model with Gaussian components.
///
/// Shifts `phi_k0` are the canonical storage; component means are derived
/// (see [`MarSpec::mean`]). `ar[k]` holds exactly `p_k` coefficients and the
/// zero-padding convention for lags beyond `p_k` is applied by the accessors.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarSpec {
    weights: Vec<f64>,
    shifts: Vec<f64>,
    ar: Vec<Vec<f64>>,
    scales: Vec<f64>,
}

impl MarSpec {
    pub fn new(weights: Vec<f64>, shifts: Vec<f64>, ar: Vec<Vec<f64>>, scales: Vec<f64>) -> Result<Self> {
        let spec = MarSpec { weights, shifts, ar, scales };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let g = self.weights.len();
        if g == 0 {
            return Err(MarError::InvalidSpec("at least one component is required".into()));
        }
        if self.shifts.len() != g || self.ar.len() != g || self.scales.len() != g {
            return Err(MarError::InvalidSpec(format!(
                "component vectors disagree on g: weights {}, shifts {}, ar {}, scales {}",
                g,
                self.shifts.len(),
                self.ar.len(),
                self.scales.len()
            )));
        }
        if self.weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(MarError::InvalidSpec("mixing weights must be positive".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(MarError::InvalidSpec(format!("mixing weights sum to {total}, not 1")));
        }
        if self.scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(MarError::InvalidSpec("scales must be finite and positive".into()));
        }
        if self.ar.iter().any(|c| c.is_empty()) {
            return Err(MarError::InvalidSpec("every component needs order >= 1".into()));
        }
        if self.shifts.iter().chain(self.ar.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(MarError::InvalidSpec("shifts and AR coefficients must be finite".into()));
        }
        Ok(())
    }

    pub fn g(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// AR coefficients `phi_k1..phi_kp_k` of component `k`.
    pub fn ar(&self, k: usize) -> &[f64] {
        &self.ar[k]
    }

    pub fn ar_all(&self) -> &[Vec<f64>] {
        &self.ar
    }

    pub fn order(&self, k: usize) -> usize {
        self.ar[k].len()
    }

    pub fn orders(&self) -> Vec<usize> {
        self.ar.iter().map(Vec::len).collect()
    }

    /// `p = max(p_k)`.
    pub fn max_order(&self) -> usize {
        self.ar.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `phi_kj` for lag `j >= 1`, zero beyond the component's order.
    pub fn ar_padded(&self, k: usize, lag: usize) -> f64 {
        debug_assert!(lag >= 1);
        self.ar[k].get(lag - 1).copied().unwrap_or(0.0)
    }

    pub fn precision(&self, k: usize) -> f64 {
        1.0 / (self.scales[k] * self.scales[k])
    }

    /// `1 - sum_i phi_ki`.
    pub fn mean_factor(&self, k: usize) -> f64 {
        1.0 - self.ar[k].iter().sum::<f64>()
    }

    /// Component mean `mu_k = phi_k0 / (1 - sum_i phi_ki)`; `None` for a unit-root component.
    pub fn mean(&self, k: usize) -> Option<f64> {
        let b = self.mean_factor(k);
        if b == 0.0 {
            None
        } else {
            Some(self.shifts[k] / b)
        }
    }

    pub(crate) fn set_weights(&mut self, w: Vec<f64>) {
        self.weights = w;
    }

    pub(crate) fn set_shift(&mut self, k: usize, v: f64) {
        self.shifts[k] = v;
    }

    pub(crate) fn set_scale(&mut self, k: usize, v: f64) {
        self.scales[k] = v;
    }

    pub(crate) fn set_ar(&mut self, k: usize, coeffs: Vec<f64>) {
        self.ar[k] = coeffs;
    }

    /// Relabels components: component `j` of the result is component `perm[j]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> MarSpec {
        MarSpec {
            weights: perm.iter().map(|&i| self.weights[i]).collect(),
            shifts: perm.iter().map(|&i| self.shifts[i]).collect(),
            ar: perm.iter().map(|&i| self.ar[i].clone()).collect(),
            scales: perm.iter().map(|&i| self.scales[i]).collect(),
        }
    }

    /// Conditional location `nu_k = phi_k0 + sum_i phi_ki * y_{t-i}` where
    /// `history` ends with `y_{t-1}`.
    pub fn location(&self, k: usize, history: &[f64]) -> f64 {
        let n = history.len();
        let mut nu = self.shifts[k];
        for (i, phi) in self.ar[k].iter().enumerate() {
            nu += phi * history[n - 1 - i];
        }
        nu
    }

    /// The one-step conditional mixture given a history ending at `y_{t-1}`.
    pub fn mixture_after(&self, history: &[f64]) -> ConditionalMixture {
        debug_assert!(history.len() >= self.max_order());
        ConditionalMixture {
            weights: self.weights.clone(),
            means: (0..self.g()).map(|k| self.location(k, history)).collect(),
            sds: self.scales.clone(),
        }
    }

    /// The conditional distribution of `y[t]` given `y[..t]`.
    pub fn conditional_at(&self, series: &TimeSeries, t: usize) -> Result<ConditionalMixture> {
        check_time(self, series, t)?;
        Ok(self.mixture_after(&series.values[..t]))
    }
}

/// Shift implied by a component mean: `phi_k0 = mu_k (1 - sum_i phi_ki)`.
pub fn shift_from_mean(mean: f64, ar: &[f64]) -> f64 {
    mean * (1.0 - ar.iter().sum::<f64>())
}

/// Observed series `y_1..y_n` (stored 0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(MarError::InvalidSeries(format!("value at index {i} is not finite")));
        }
        Ok(TimeSeries { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// First differences `y_t - y_{t-1}`.
    pub fn differenced(&self) -> Result<TimeSeries> {
        TimeSeries::new(self.values.windows(2).map(|w| w[1] - w[0]).collect())
    }
}

/// Component labels `z_t` for `t = offset..n` (0-based labels) and the per-component counts.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatentAllocation {
    offset: usize,
    labels: Vec<usize>,
    counts: Vec<usize>,
}

impl LatentAllocation {
    /// `labels[i]` is the component of `y[offset + i]`.
    pub fn new(labels: Vec<usize>, g: usize, offset: usize) -> Result<Self> {
        let mut counts = vec![0; g];
        for &l in &labels {
            if l >= g {
                return Err(MarError::Index { what: "component", index: l, bound: g });
            }
            counts[l] += 1;
        }
        Ok(LatentAllocation { offset, labels, counts })
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Label of time index `t` (0-based, `t >= offset`).
    pub fn label(&self, t: usize) -> usize {
        self.labels[t - self.offset]
    }

    /// Time indices allocated to component `k`.
    pub fn times_of(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(move |(_, &l)| l == k)
            .map(move |(i, _)| i + self.offset)
    }
}

/// A finite Gaussian mixture `sum_k w_k N(mean_k, sd_k^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalMixture {
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl ConditionalMixture {
    pub fn ln_pdf(&self, y: f64) -> f64 {
        let terms: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.means)
            .zip(&self.sds)
            .map(|((w, m), s)| {
                let z = (y - m) / s;
                ln(*w) - ln(*s) - LN_SQRT_2PI - 0.5 * z * z
            })
            .collect();
        log_sum_exp(&terms)
    }

    pub fn pdf(&self, y: f64) -> f64 {
        math::exp(self.ln_pdf(y))
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.means)
            .zip(&self.sds)
            .map(|((w, m), s)| w * math::std_normal_cdf((y - m) / s))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.weights.iter().zip(&self.means).map(|(w, m)| w * m).sum()
    }

    /// Variance of the mixture: `sum w s^2 + sum w m^2 - (sum w m)^2`.
    pub fn variance(&self) -> f64 {
        let within: f64 = self.weights.iter().zip(&self.sds).map(|(w, s)| w * s * s).sum();
        let second: f64 = self.weights.iter().zip(&self.means).map(|(w, m)| w * m * m).sum();
        let mean = self.mean();
        within + second - mean * mean
    }
}

fn check_time(spec: &MarSpec, series: &TimeSeries, t: usize) -> Result<()> {
    let p = spec.max_order();
    if t < p || t >= series.len() {
        return Err(MarError::Index { what: "time", index: t, bound: series.len() });
    }
    Ok(())
}

fn check_component(spec: &MarSpec, k: usize) -> Result<()> {
    if k >= spec.g() {
        return Err(MarError::Index { what: "component", index: k, bound: spec.g() });
    }
    Ok(())
}

/// `e_tk = y_t - phi_k0 - sum_i phi_ki y_{t-i}`.
pub fn component_residual(spec: &MarSpec, series: &TimeSeries, k: usize, t: usize) -> Result<f64> {
    check_component(spec, k)?;
    check_time(spec, series, t)?;
    Ok(series.values[t] - spec.location(k, &series.values[..t]))
}

pub fn conditional_pdf(spec: &MarSpec, series: &TimeSeries, t: usize) -> Result<f64> {
    Ok(spec.conditional_at(series, t)?.pdf(series.values[t]))
}

pub fn conditional_ln_pdf(spec: &MarSpec, series: &TimeSeries, t: usize) -> Result<f64> {
    Ok(spec.conditional_at(series, t)?.ln_pdf(series.values[t]))
}

pub fn conditional_cdf(spec: &MarSpec, series: &TimeSeries, t: usize) -> Result<f64> {
    Ok(spec.conditional_at(series, t)?.cdf(series.values[t]))
}

/// Conditional mean and variance of `y[t]` given the past.
pub fn conditional_moments(spec: &MarSpec, series: &TimeSeries, t: usize) -> Result<(f64, f64)> {
    let mix = spec.conditional_at(series, t)?;
    Ok((mix.mean(), mix.variance()))
}

/// Sum over `t = p..n` of the log conditional density.
pub fn log_likelihood(spec: &MarSpec, series: &TimeSeries) -> Result<f64> {
    log_likelihood_from(spec, series, spec.max_order())
}

/// Sum over `t = start..n` of the log conditional density (`start >= p`).
///
/// Conditioning on a common `start` keeps likelihoods of models with
/// different orders comparable on the same observations.
pub fn log_likelihood_from(spec: &MarSpec, series: &TimeSeries, start: usize) -> Result<f64> {
    let p = spec.max_order();
    if start < p {
        return Err(MarError::Index { what: "start", index: start, bound: p });
    }
    if series.len() <= start {
        return Err(MarError::InvalidSeries(format!(
            "series of length {} is too short to condition on {start} observations",
            series.len()
        )));
    }
    let mut total = 0.0;
    for t in start..series.len() {
        total += spec.mixture_after(&series.values[..t]).ln_pdf(series.values[t]);
    }
    if !total.is_finite() {
        return Err(MarError::NonFinite("log-likelihood".into()));
    }
    Ok(total)
}

/// Log-likelihood with the allocations known: `sum_t ln[(pi_z / sigma_z) phi(e_tz / sigma_z)]`.
pub fn complete_data_log_likelihood(
    spec: &MarSpec,
    series: &TimeSeries,
    alloc: &LatentAllocation,
) -> Result<f64> {
    let start = alloc.offset();
    if start < spec.max_order() || alloc.labels().len() + start != series.len() || alloc.counts().len() != spec.g()
    {
        return Err(MarError::InvalidSpec("allocation does not match the series and model".into()));
    }
    let mut total = 0.0;
    for t in start..series.len() {
        let k = alloc.label(t);
        let e = series.values[t] - spec.location(k, &series.values[..t]);
        let s = spec.scales[k];
        total += ln(spec.weights[k]) + math::normal_ln_pdf(e, 0.0, s);
    }
    if !total.is_finite() {
        return Err(MarError::NonFinite("complete-data log-likelihood".into()));
    }
    Ok(total)
}

/// Autocorrelations `rho_0..rho_hmax` from `rho_h = sum_k pi_k sum_i phi_ki rho_|h-i|`.
///
/// The first `p` lags solve a linear system; later lags follow by recursion.
pub fn theoretical_acf(spec: &MarSpec, h_max: usize) -> Result<Vec<f64>> {
    let p = spec.max_order();
    let a: Vec<f64> = (1..=p)
        .map(|i| (0..spec.g()).map(|k| spec.weights[k] * spec.ar_padded(k, i)).sum())
        .collect();
    // unknowns rho_1..rho_p; equation h: rho_h - sum_{i != h} a_i rho_|h-i| = a_h (rho_0 = 1)
    let mut m = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    for h in 1..=p {
        m[(h - 1) * p + (h - 1)] += 1.0;
        for i in 1..=p {
            let lag = h.abs_diff(i);
            if lag == 0 {
                rhs[h - 1] += a[i - 1];
            } else {
                m[(h - 1) * p + (lag - 1)] -= a[i - 1];
            }
        }
    }
    let head = math::solve(m, rhs, p)?;
    let mut rho = Vec::with_capacity(h_max + 1);
    rho.push(1.0);
    for h in 1..=h_max {
        if h <= p {
            rho.push(head[h - 1]);
        } else {
            let v = (1..=p).map(|i| a[i - 1] * rho[h - i]).sum();
            rho.push(v);
        }
    }
    Ok(rho)
}

/// Simulates `n` points after discarding `burn` points started from zeros.
pub fn simulate_path<R: Rng + ?Sized>(spec: &MarSpec, n: usize, burn: usize, rng: &mut R) -> Result<TimeSeries> {
    if n == 0 {
        return Err(MarError::InvalidSeries("cannot simulate an empty path".into()));
    }
    let report = stability::is_stable(spec)?;
    if !report.stable {
        return Err(MarError::Unstable { spectral_radius: report.spectral_radius });
    }
    let p = spec.max_order();
    let total = p + burn + n;
    let mut y = vec![0.0; p];
    y.reserve(total - p);
    let cumulative: Vec<f64> = spec
        .weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    for _ in p..total {
        let u: f64 = rng.random();
        let k = cumulative.iter().position(|&c| u < c).unwrap_or(spec.g() - 1);
        let eps: f64 = StandardNormal.sample(rng);
        let v = spec.location(k, &y) + spec.scales[k] * eps;
        y.push(v);
    }
    TimeSeries::new(y.split_off(p + burn))
}

pub fn simulate_path_seeded(spec: &MarSpec, n: usize, burn: usize, seed: u64) -> Result<TimeSeries> {
    simulate_path(spec, n, burn, &mut rng_from_seed(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn series(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    fn single(shift: f64, phi: f64, sigma: f64) -> MarSpec {
        MarSpec::new(vec![1.0], vec![shift], vec![vec![phi]], vec![sigma]).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(MarSpec::new(vec![0.5, 0.6], vec![0.0; 2], vec![vec![0.1]; 2], vec![1.0; 2]).is_err());
        assert!(MarSpec::new(vec![1.0], vec![0.0], vec![vec![]], vec![1.0]).is_err());
        assert!(MarSpec::new(vec![1.0], vec![0.0], vec![vec![0.1]], vec![0.0]).is_err());
        assert!(MarSpec::new(vec![], vec![], vec![], vec![]).is_err());
        assert!(MarSpec::new(vec![0.0, 1.0], vec![0.0; 2], vec![vec![0.1]; 2], vec![1.0; 2]).is_err());
    }

    #[test]
    fn residual_examples() {
        let s = series(&[3.0, 2.0, 1.0]);
        assert_eq!(component_residual(&single(0.0, 0.0, 1.0), &s, 0, 1).unwrap(), 2.0);
        let a = presets::model_a();
        assert_eq!(component_residual(&a, &s, 0, 2).unwrap(), 2.0);
        let flat = series(&[2.0, 2.0]);
        assert_eq!(component_residual(&a, &flat, 1, 1).unwrap(), 0.0);
        assert!(matches!(component_residual(&a, &s, 2, 2), Err(MarError::Index { .. })));
        assert!(matches!(component_residual(&a, &s, 0, 0), Err(MarError::Index { .. })));
        assert!(matches!(component_residual(&a, &s, 0, 3), Err(MarError::Index { .. })));
    }

    #[test]
    fn pdf_examples() {
        let s = series(&[0.0, 0.0]);
        let v = conditional_pdf(&single(0.0, 0.0, 1.0), &s, 1).unwrap();
        assert!((v - 0.398_942_280_401_432_7).abs() < 1e-15);
        let v = conditional_pdf(&presets::model_a(), &s, 1).unwrap();
        assert!((v - 0.299_206_710_301_074_5).abs() < 1e-12, "{v}");
    }

    #[test]
    fn cdf_examples() {
        let a = presets::model_a();
        assert!((conditional_cdf(&a, &series(&[0.0, 0.0]), 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((conditional_cdf(&a, &series(&[0.0, 1e6]), 1).unwrap() - 1.0).abs() < 1e-15);
        // equal component means at y_{t-1}=0 with different shifts zero: symmetric
        let two = MarSpec::new(vec![0.3, 0.7], vec![1.0, 1.0], vec![vec![0.2], vec![-0.4]], vec![1.0, 3.0]).unwrap();
        assert!((conditional_cdf(&two, &series(&[0.0, 1.0]), 1).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn moment_examples() {
        let a = presets::model_a();
        let (m, _) = conditional_moments(&a, &series(&[1.0, 0.0]), 1).unwrap();
        assert!((m - 0.25).abs() < 1e-15);
        let (m, v) = conditional_moments(&a, &series(&[0.0, 0.0]), 1).unwrap();
        assert_eq!(m, 0.0);
        assert!((v - 2.5).abs() < 1e-15);
        let (_, v) = conditional_moments(&single(0.3, 0.4, 1.7), &series(&[2.0, 0.0]), 1).unwrap();
        assert!((v - 1.7 * 1.7).abs() < 1e-12);
    }

    #[test]
    fn log_likelihood_of_zeros() {
        let s = series(&[0.0; 8]);
        let ll = log_likelihood(&single(0.0, 0.0, 1.0), &s).unwrap();
        assert!((ll - 7.0 * ln(0.398_942_280_401_432_7)).abs() < 1e-12);
        assert!(log_likelihood(&single(0.0, 0.0, 1.0), &series(&[1.0])).is_err());
    }

    #[test]
    fn complete_data_likelihood_factor_separation() {
        let a = presets::model_a();
        let s = series(&[0.4, -1.0, 0.3, 2.2, 1.5]);
        let all0 = LatentAllocation::new(vec![0; 4], 2, 1).unwrap();
        let with = complete_data_log_likelihood(&a, &s, &all0).unwrap();
        let unit = MarSpec::new(vec![0.5, 0.5], vec![0.0; 2], a.ar_all().to_vec(), a.scales().to_vec()).unwrap();
        let mut b = unit.clone();
        b.set_weights(vec![1.0, 1e-300]);
        let without = complete_data_log_likelihood(&b, &s, &all0).unwrap();
        assert!((with - without - 4.0 * ln(0.5)).abs() < 1e-12);
        let g1 = single(0.1, 0.3, 1.2);
        let z = LatentAllocation::new(vec![0; 4], 1, 1).unwrap();
        assert_eq!(
            complete_data_log_likelihood(&g1, &s, &z).unwrap(),
            log_likelihood(&g1, &s).unwrap()
        );
        let bad = LatentAllocation::new(vec![0; 3], 2, 1).unwrap();
        assert!(complete_data_log_likelihood(&a, &s, &bad).is_err());
    }

    #[test]
    fn mean_accessor_and_unit_root() {
        let a = presets::model_a();
        assert_eq!(a.mean(0), Some(0.0));
        assert_eq!(a.mean(1), None);
        let s = single(0.6, 0.4, 1.0);
        assert!((s.mean(0).unwrap() - 1.0).abs() < 1e-15);
        assert!((shift_from_mean(s.mean(0).unwrap(), s.ar(0)) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn acf_examples() {
        let rho = theoretical_acf(&single(0.0, 0.5, 1.0), 6).unwrap();
        for (h, r) in rho.iter().enumerate() {
            assert!((r - libm::pow(0.5, h as f64)).abs() < 1e-14);
        }
        let rho = theoretical_acf(&presets::model_a(), 3).unwrap();
        assert!((rho[1] - 0.25).abs() < 1e-15);
        assert!((rho[2] - 0.0625).abs() < 1e-15);
        let zero = MarSpec::new(vec![0.5, 0.5], vec![0.0; 2], vec![vec![0.0, 0.0], vec![0.0]], vec![1.0; 2]).unwrap();
        assert!(theoretical_acf(&zero, 4).unwrap()[1..].iter().all(|r| *r == 0.0));
    }

    #[test]
    fn acf_singular_system_is_reported() {
        // phi = (0, 1): the lag-1 equation degenerates to 0 * rho_1 = 0
        let s = MarSpec::new(vec![1.0], vec![0.0], vec![vec![0.0, 1.0]], vec![1.0]).unwrap();
        assert!(matches!(theoretical_acf(&s, 3), Err(MarError::Singular(_))));
    }

    #[test]
    fn simulation_is_deterministic_and_refuses_unstable() {
        let a = presets::model_a();
        let x = simulate_path_seeded(&a, 50, 100, 9).unwrap();
        let y = simulate_path_seeded(&a, 50, 100, 9).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.len(), 50);
        let unstable = single(0.0, 1.0, 1.0);
        assert!(matches!(simulate_path_seeded(&unstable, 10, 0, 1), Err(MarError::Unstable { .. })));
        let c = MarSpec::new(vec![1.0], vec![2.5], vec![vec![0.0]], vec![1e-300]).unwrap();
        let flat = simulate_path_seeded(&c, 20, 5, 3).unwrap();
        assert!(flat.values().iter().all(|v| *v == 2.5));
    }

    #[test]
    fn differencing() {
        let d = series(&[1.0, 4.0, 2.0]).differenced().unwrap();
        assert_eq!(d.values(), &[3.0, -2.0]);
        assert!(TimeSeries::new(vec![1.0, f64::NAN]).is_err());
    }
}
