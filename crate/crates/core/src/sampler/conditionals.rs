use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::{ChainState, Hyperparams};
use crate::error::{MarError, Result};
use crate::math::{exp, ln, log_sum_exp, sqrt};
use crate::model::{shift_from_mean, LatentAllocation, MarSpec, TimeSeries};

#[inline]
fn ar_part(coeffs: &[f64], y: &[f64], t: usize) -> f64 {
    coeffs.iter().enumerate().map(|(i, phi)| phi * y[t - 1 - i]).sum()
}

/// Mean and standard deviation of a Normal full conditional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalParams {
    pub mean: f64,
    pub sd: f64,
}

/// `P(z_t = k | ...)`, proportional to `(pi_k / sigma_k) phi(e_tk / sigma_k)`.
pub fn allocation_probabilities(spec: &MarSpec, series: &TimeSeries, t: usize) -> Result<Vec<f64>> {
    let y = series.values();
    let logw: Vec<f64> = (0..spec.g())
        .map(|k| {
            let s = spec.scales()[k];
            let e = (y[t] - spec.location(k, &y[..t])) / s;
            ln(spec.weights()[k]) - ln(s) - 0.5 * e * e
        })
        .collect();
    let norm = log_sum_exp(&logw);
    if !norm.is_finite() {
        return Err(MarError::DegenerateAllocation { t });
    }
    Ok(logw.iter().map(|l| exp(l - norm)).collect())
}

pub fn sample_allocations<R: Rng + ?Sized>(
    state: &ChainState,
    series: &TimeSeries,
    rng: &mut R,
) -> Result<LatentAllocation> {
    let start = state.start();
    let g = state.spec.g();
    let mut labels = Vec::with_capacity(series.len() - start);
    for t in start..series.len() {
        let probs = allocation_probabilities(&state.spec, series, t)?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut label = g - 1;
        for (k, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                label = k;
                break;
            }
        }
        labels.push(label);
    }
    LatentAllocation::new(labels, g, start)
}

/// Dirichlet parameters `w_k + n_k` of the weight full conditional.
pub fn weight_full_conditional(alloc: &LatentAllocation, hyper: &Hyperparams) -> Vec<f64> {
    alloc.counts().iter().enumerate().map(|(k, &n)| hyper.dirichlet_for(k) + n as f64).collect()
}

pub fn sample_weights<R: Rng + ?Sized>(alloc: &LatentAllocation, hyper: &Hyperparams, rng: &mut R) -> Vec<f64> {
    let alpha = weight_full_conditional(alloc, hyper);
    if alpha.len() == 1 {
        return vec![1.0];
    }
    loop {
        let draws: Vec<f64> = alpha
            .iter()
            .map(|&a| Gamma::new(a, 1.0).expect("positive shape").sample(rng))
            .collect();
        let total: f64 = draws.iter().sum();
        let w: Vec<f64> = draws.iter().map(|d| d / total).collect();
        // a weight can underflow to zero only for absurd counts; redraw
        if w.iter().all(|x| *x > 0.0) {
            return w;
        }
    }
}

/// Full conditional of `mu_k`: with `b_k = 1 - sum phi_ki` and shift-free
/// residuals `r_t = y_t - sum phi_ki y_{t-i}` over the `n_k` points allocated
/// to `k`, it is `N((tau n b rbar + kappa zeta) / (tau n b^2 + kappa), 1 / (tau n b^2 + kappa))`.
pub fn mean_full_conditional(
    spec: &MarSpec,
    series: &TimeSeries,
    alloc: &LatentAllocation,
    hyper: &Hyperparams,
    k: usize,
) -> NormalParams {
    let y = series.values();
    let coeffs = spec.ar(k);
    let (mut n, mut sum_r) = (0.0, 0.0);
    for t in alloc.times_of(k) {
        n += 1.0;
        sum_r += y[t] - ar_part(coeffs, y, t);
    }
    let b = spec.mean_factor(k);
    let tau = spec.precision(k);
    let precision = tau * n * b * b + hyper.kappa;
    NormalParams { mean: (tau * b * sum_r + hyper.kappa * hyper.zeta) / precision, sd: 1.0 / sqrt(precision) }
}

pub fn sample_means<R: Rng + ?Sized>(
    state: &ChainState,
    series: &TimeSeries,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Vec<f64> {
    let g = state.spec.g();
    if hyper.fixed_shift {
        return vec![0.0; g];
    }
    (0..g)
        .map(|k| {
            let p = mean_full_conditional(&state.spec, series, &state.alloc, hyper, k);
            let z: f64 = StandardNormal.sample(rng);
            p.mean + p.sd * z
        })
        .collect()
}

/// `lambda | ... ~ Ga(a + g c, b + sum tau_k)` (shape, rate).
pub fn sample_lambda<R: Rng + ?Sized>(spec: &MarSpec, hyper: &Hyperparams, rng: &mut R) -> f64 {
    let g = spec.g() as f64;
    let shape = hyper.a + g * hyper.c;
    let rate = hyper.b + (0..spec.g()).map(|k| spec.precision(k)).sum::<f64>();
    draw_gamma(shape, rate, rng)
}

/// Shape and rate of `tau_k | ... ~ Ga(c + n_k/2, lambda + sum e_tk^2 / 2)`.
pub fn precision_full_conditional(
    spec: &MarSpec,
    series: &TimeSeries,
    alloc: &LatentAllocation,
    lambda: f64,
    hyper: &Hyperparams,
    k: usize,
) -> (f64, f64) {
    let sse = component_sse(series, alloc, k, spec.shifts()[k], spec.ar(k));
    (hyper.c + alloc.counts()[k] as f64 / 2.0, lambda + 0.5 * sse)
}

pub fn sample_precisions<R: Rng + ?Sized>(
    state: &ChainState,
    series: &TimeSeries,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Vec<f64> {
    (0..state.spec.g())
        .map(|k| {
            let (shape, rate) = precision_full_conditional(&state.spec, series, &state.alloc, state.lambda, hyper, k);
            draw_gamma(shape, rate, rng)
        })
        .collect()
}

fn draw_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    let gamma = Gamma::new(shape, 1.0 / rate).expect("positive gamma parameters");
    loop {
        let v = gamma.sample(rng);
        if v > 0.0 && v.is_finite() {
            return v;
        }
    }
}

fn component_sse(series: &TimeSeries, alloc: &LatentAllocation, k: usize, shift: f64, coeffs: &[f64]) -> f64 {
    let y = series.values();
    alloc
        .times_of(k)
        .map(|t| {
            let e = y[t] - shift - ar_part(coeffs, y, t);
            e * e
        })
        .sum()
}

/// Shift that accompanies AR coefficients `coeffs` for component `k` with its mean held fixed.
pub fn proposal_shift(state: &ChainState, hyper: &Hyperparams, k: usize, coeffs: &[f64]) -> f64 {
    if hyper.fixed_shift {
        0.0
    } else {
        shift_from_mean(state.means[k], coeffs)
    }
}

/// Log of the component-restricted likelihood ratio for replacing component
/// `k`'s AR coefficients (and shift) by the proposal. Only the points
/// allocated to `k` enter, so the other components do not matter.
pub fn ar_log_acceptance(
    state: &ChainState,
    series: &TimeSeries,
    k: usize,
    proposal: &[f64],
    proposal_shift: f64,
) -> f64 {
    let tau = state.spec.precision(k);
    let current = component_sse(series, &state.alloc, k, state.spec.shifts()[k], state.spec.ar(k));
    let proposed = component_sse(series, &state.alloc, k, proposal_shift, proposal);
    -0.5 * tau * (proposed - current)
}

pub fn ar_acceptance_probability(
    state: &ChainState,
    series: &TimeSeries,
    k: usize,
    proposal: &[f64],
    proposal_shift: f64,
) -> f64 {
    let l = ar_log_acceptance(state, series, k, proposal, proposal_shift);
    if l >= 0.0 {
        1.0
    } else {
        exp(l)
    }
}

/// Proposes `phi*_k ~ N(phi_k, I / gamma_k)` and accepts with the restricted
/// likelihood ratio. Returns the acceptance flag and the resulting coefficients.
pub fn rwm_update_ar<R: Rng + ?Sized>(
    state: &ChainState,
    series: &TimeSeries,
    hyper: &Hyperparams,
    k: usize,
    rng: &mut R,
) -> (bool, Vec<f64>) {
    let step = 1.0 / sqrt(hyper.gamma_for(k));
    let proposal: Vec<f64> = state
        .spec
        .ar(k)
        .iter()
        .map(|phi| {
            let z: f64 = StandardNormal.sample(rng);
            phi + step * z
        })
        .collect();
    let shift = proposal_shift(state, hyper, k, &proposal);
    let log_alpha = ar_log_acceptance(state, series, k, &proposal, shift);
    let u: f64 = rng.random();
    if log_alpha >= 0.0 || ln(u) < log_alpha {
        (true, proposal)
    } else {
        (false, state.spec.ar(k).to_vec())
    }
}
