use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::math::exp;
use crate::model::{simulate_path_seeded, LatentAllocation};
use crate::presets;
use crate::sampler::default_hyperparams;
use crate::testutil::simpson;

/// Single-component AR(1) toy: `y_t = μ(1-φ) + φ y_{t-1} + ε_t`.
fn toy_series(seed: u64) -> TimeSeries {
    let spec = MarSpec::new(vec![1.0], vec![0.5], vec![vec![0.5]], vec![1.0]).unwrap();
    simulate_path_seeded(&spec, 100, 200, seed).unwrap()
}

fn toy_hyper(s: &TimeSeries) -> Hyperparams {
    let mut h = default_hyperparams(s).unwrap();
    h.n_iter = 6000;
    h.burn_in = 1000;
    h.tune_pilot = 1000;
    h.p_max = 1;
    h.start = Some(1);
    h
}

/// Independent closed forms for the toy, conditioning on `y_0`.
struct Toy<'a> {
    y: &'a [f64],
    h: &'a Hyperparams,
}

impl Toy<'_> {
    fn residuals(&self, phi: f64) -> Vec<f64> {
        self.y.windows(2).map(|w| w[1] - phi * w[0]).collect()
    }

    /// `ln ∫ f(y|φ,μ,τ) N(μ; ζ, 1/κ) dμ`: the residuals `r_t - ζ b` are jointly
    /// Normal with covariance `I/τ + (b²/κ) 11'`.
    fn ln_mean_marginal(&self, phi: f64, tau: f64) -> f64 {
        let b = 1.0 - phi;
        let e: Vec<f64> = self.residuals(phi).iter().map(|r| r - self.h.zeta * b).collect();
        let m = e.len() as f64;
        let s2 = 1.0 / tau;
        let s = b * b / self.h.kappa;
        let sum: f64 = e.iter().sum();
        let ss: f64 = e.iter().map(|v| v * v).sum();
        let logdet = m * ln(s2) + ln(1.0 + m * s / s2);
        let quad = (ss - s * sum * sum / (s2 + m * s)) / s2;
        -0.5 * (m * ln(2.0 * core::f64::consts::PI) + logdet + quad)
    }

    fn ln_likelihood(&self, phi: f64, mu: f64, tau: f64) -> f64 {
        let sd = 1.0 / sqrt(tau);
        self.residuals(phi).iter().map(|r| normal_ln_pdf(*r, mu * (1.0 - phi), sd)).sum()
    }

    fn ln_tau_prior(&self, tau: f64) -> f64 {
        ln_precision_prior(&[tau], self.h)
    }

    /// `ln ∫ exp(f(u)) du` over `u = ln τ`, a Simpson rule in log space.
    fn ln_integrate_tau(&self, f: impl Fn(f64) -> f64) -> f64 {
        log_simpson(|u| f(exp(u)) + u, -6.0, 4.0, 2000)
    }

    /// `ln p(y)` with `φ` uniform of density 1 on `(-1, 1)`.
    fn ln_evidence(&self) -> f64 {
        log_simpson(
            |phi| self.ln_integrate_tau(|tau| self.ln_mean_marginal(phi, tau) + self.ln_tau_prior(tau)),
            -1.0,
            1.0,
            800,
        )
    }
}

fn log_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let values: Vec<f64> = (0..=n).map(|i| f(a + i as f64 * h)).collect();
    let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scaled = |x: f64| {
        let i = libm::round((x - a) / h) as usize;
        exp(values[i] - top)
    };
    top + ln(simpson(scaled, a, b, n))
}

fn toy_theta(s: &TimeSeries, h: &Hyperparams, seed: u64) -> Draw {
    let out = run_chain(s, 1, &[1], h, seed).unwrap();
    select_theta_star(&out, s, h).unwrap()
}

#[test]
fn precision_prior_is_the_lambda_mixture() {
    let h = toy_hyper(&toy_series(1));
    // integrates to one
    let total = exp(log_simpson(|u| ln_precision_prior(&[exp(u)], &h) + u, -60.0, 400.0, 200_000));
    assert!((total - 1.0).abs() < 1e-6);
    // agrees with integrating lambda numerically at a point
    let tau = 0.7;
    let direct = log_simpson(
        |v| {
            let lambda = exp(v);
            gamma_ln_pdf(tau, h.c, lambda) + gamma_ln_pdf(lambda, h.a, h.b) + v
        },
        -40.0,
        20.0,
        20_000,
    );
    assert!((direct - ln_precision_prior(&[tau], &h)).abs() < 1e-6);
}

#[test]
fn log_prior_decomposes() {
    let s = toy_series(2);
    let mut h = toy_hyper(&s);
    let spec = MarSpec::new(vec![0.4, 0.6], vec![0.0; 2], vec![vec![0.1], vec![0.2]], vec![1.0, 2.0]).unwrap();
    let d = Draw { spec, means: vec![0.3, -0.2], lambda: 1.0 };
    let expect = ln_gamma(2.0)
        + normal_ln_pdf(0.3, h.zeta, 1.0 / sqrt(h.kappa))
        + normal_ln_pdf(-0.2, h.zeta, 1.0 / sqrt(h.kappa))
        + ln_precision_prior(&[1.0, 0.25], &h);
    assert!((log_prior(&d, &h) - expect).abs() < 1e-12);
    h.fixed_shift = true;
    assert!((log_prior(&d, &h) - (ln_gamma(2.0) + ln_precision_prior(&[1.0, 0.25], &h))).abs() < 1e-12);
}

#[test]
fn parts_recompose() {
    let est = |v| OrdinateEstimate { log_value: v, log_se: 0.1 };
    let parts = EvidenceParts {
        log_likelihood: -100.0,
        log_prior: -5.0,
        ordinates: Ordinates { phi: est(2.0), mu: est(0.5), tau: est(1.0), pi: est(3.0) },
        log_order_prior: -2.0 * ln(5.0),
        log_order_posterior: ln(0.7),
        log_g_prior: -ln(3.0),
    };
    let expect = -100.0 - 5.0 - 2.0 * ln(5.0) - 6.5 - ln(0.7);
    assert!((parts.log_marginal() - expect).abs() < 1e-12);
    assert!((parts.ordinates.log_se() - 0.2).abs() < 1e-12);
}

#[test]
fn theta_star_selection() {
    let a = presets::model_a();
    let s = simulate_path_seeded(&a, 300, 500, 3).unwrap();
    let mut h = default_hyperparams(&s).unwrap();
    h.start = Some(1);
    let truth = Draw { spec: a.clone(), means: vec![0.0; 2], lambda: 1.0 };
    let far = |w: f64| {
        let spec = MarSpec::new(vec![w, 1.0 - w], vec![3.0, -3.0], vec![vec![0.1], vec![-0.2]], vec![5.0, 0.2]).unwrap();
        Draw { spec, means: vec![3.0 / 0.9, -3.0 / 1.2], lambda: 1.0 }
    };
    let chain = |draws: Vec<Draw>| ChainOutput {
        draws,
        acceptance: vec![],
        stability_rejections: 0,
        seed: 0,
        gamma: vec![],
        warnings: vec![],
    };
    assert!(select_theta_star(&chain(vec![]), &s, &h).is_err());
    assert_eq!(select_theta_star(&chain(vec![far(0.3)]), &s, &h).unwrap(), far(0.3));
    let draws = vec![far(0.2), truth.clone(), far(0.5), far(0.8)];
    assert_eq!(select_theta_star(&chain(draws.clone()), &s, &h).unwrap(), truth);
    let mut more = draws.clone();
    more.push(far(0.6));
    assert_eq!(select_theta_star(&chain(more), &s, &h).unwrap(), truth);
    // ties go to the earliest draw
    let twin = Draw { lambda: 2.0, ..truth.clone() };
    assert_eq!(select_theta_star(&chain(vec![truth.clone(), twin]), &s, &h).unwrap(), truth);
}

fn fixed_state(spec: MarSpec, means: Vec<f64>, labels: Vec<usize>, start: usize, lambda: f64) -> ChainState {
    let g = spec.g();
    ChainState { spec, means, alloc: LatentAllocation::new(labels, g, start).unwrap(), lambda, iteration: 0 }
}

#[test]
fn rao_blackwell_terms_match_closed_forms() {
    let y: Vec<f64> = (0..9).map(|i| libm::sin(i as f64)).collect();
    let s = TimeSeries::new(y.clone()).unwrap();
    let h = default_hyperparams(&s).unwrap();
    let spec = MarSpec::new(vec![0.5, 0.5], vec![0.0; 2], vec![vec![0.3], vec![-0.2]], vec![1.0, 2.0]).unwrap();
    let labels = vec![0, 1, 0, 1, 0, 1, 0, 1];
    let state = fixed_state(spec.clone(), vec![0.0; 2], labels.clone(), 1, 0.8);
    let theta = Draw { spec: spec.clone(), means: vec![0.1, -0.1], lambda: 0.8 };

    // π: n1 = n2 = 4 and π* = (1/2, 1/2) gives the Dirichlet(5, 5) density at 1/2
    let expect = ln_gamma(10.0) - 2.0 * ln_gamma(5.0) + 8.0 * ln(0.5);
    assert!((pi_term(&state, &theta, &h) - expect).abs() < 1e-12);

    // μ: Normal full conditionals, computed by hand
    let mut mu_expect = 0.0;
    for (k, phi) in [(0usize, 0.3), (1, -0.2)] {
        let tau = spec.precision(k);
        let b = 1.0 - phi;
        let r: Vec<f64> = (1..9).filter(|t| labels[t - 1] == k).map(|t| y[t] - phi * y[t - 1]).collect();
        let prec = tau * r.len() as f64 * b * b + h.kappa;
        let mean = (tau * b * r.iter().sum::<f64>() + h.kappa * h.zeta) / prec;
        mu_expect += normal_ln_pdf(theta.means[k], mean, 1.0 / sqrt(prec));
    }
    assert!((mu_term(&state, &theta, &s, &h) - mu_expect).abs() < 1e-12);

    // τ: Gamma full conditionals at the starred precisions
    let mut tau_expect = 0.0;
    for (k, phi) in [(0usize, 0.3), (1, -0.2)] {
        let sse: f64 = (1..9).filter(|t| labels[t - 1] == k).map(|t| (y[t] - phi * y[t - 1]).powi(2)).sum();
        tau_expect += gamma_ln_pdf(spec.precision(k), h.c + 2.0, 0.8 + sse / 2.0);
    }
    assert!((tau_term(&state, &theta, &s, &h) - tau_expect).abs() < 1e-12);
}

#[test]
fn precision_term_is_label_symmetric() {
    let y: Vec<f64> = (0..9).map(|i| libm::cos(i as f64)).collect();
    let s = TimeSeries::new(y).unwrap();
    let h = default_hyperparams(&s).unwrap();
    let spec = MarSpec::new(vec![0.5, 0.5], vec![0.0; 2], vec![vec![0.3], vec![0.3]], vec![1.5, 1.5]).unwrap();
    let theta = Draw { spec: spec.clone(), means: vec![0.0; 2], lambda: 1.0 };
    let a = fixed_state(spec.clone(), vec![0.0; 2], vec![0, 0, 1, 0, 1, 1, 1, 0], 1, 0.9);
    let b = fixed_state(spec, vec![0.0; 2], vec![1, 1, 0, 1, 0, 0, 0, 1], 1, 0.9);
    assert!((tau_term(&a, &theta, &s, &h) - tau_term(&b, &theta, &s, &h)).abs() < 1e-12);
}

#[test]
fn log_mean_and_standard_error() {
    let terms = vec![ln(2.0); 100];
    let e = log_mean_with_se(&terms);
    assert!((e.log_value - ln(2.0)).abs() < 1e-14);
    assert!(e.log_se.abs() < 1e-14);
    assert!(log_mean_with_se(&[0.0; 3]).log_se.is_nan());
}

#[test]
fn phi_terms_at_the_star() {
    let s = toy_series(4);
    let h = toy_hyper(&s);
    let spec = MarSpec::new(vec![1.0], vec![0.25], vec![vec![0.5]], vec![1.0]).unwrap();
    let state = fixed_state(spec.clone(), vec![0.5], vec![0; s.len() - 1], 1, 1.0);
    let theta = Draw { spec, means: vec![0.5], lambda: 1.0 };
    // moving to where we already are: α = 1, q = N(0; 0, 1/γ)
    let term = phi_numerator_term(&state, &theta, &s, &h, 0).unwrap();
    assert!((term - normal_ln_pdf(0.0, 0.0, 1.0 / sqrt(h.gamma_for(0)))).abs() < 1e-12);
    // a target outside the stable region is never accepted
    let far = Draw { spec: MarSpec::new(vec![1.0], vec![0.0], vec![vec![1.5]], vec![1.0]).unwrap(), ..theta };
    assert_eq!(phi_numerator_term(&state, &far, &s, &h, 0).unwrap(), f64::NEG_INFINITY);
}

/// Each stage of the toy against its own quadrature, then the assembled
/// marginal likelihood.
#[test]
fn toy_ordinates_and_evidence_match_quadrature() {
    let s = toy_series(5);
    let mut h = toy_hyper(&s);
    let toy = Toy { y: s.values(), h: &h };
    let reference = toy.ln_evidence();

    let config = EvidenceConfig::new(1);
    let result = evidence_at_orders(&s, &[1], &h, &config, 0.0, 11).unwrap();
    let theta = &result.theta_star;
    let (phi, mu, tau) = (theta.spec.ar(0)[0], theta.means[0], theta.spec.precision(0));
    h.gamma = result.gamma.clone();
    let toy = Toy { y: s.values(), h: &h };

    // p(φ*|y)
    let phi_exact =
        toy.ln_integrate_tau(|t| toy.ln_mean_marginal(phi, t) + toy.ln_tau_prior(t)) - reference;
    // p(μ*|φ*,y)
    let joint_phi = toy.ln_integrate_tau(|t| toy.ln_mean_marginal(phi, t) + toy.ln_tau_prior(t));
    let mu_exact = toy.ln_integrate_tau(|t| toy.ln_likelihood(phi, mu, t) + toy.ln_tau_prior(t))
        + normal_ln_pdf(mu, h.zeta, 1.0 / sqrt(h.kappa))
        - joint_phi;
    // p(τ*|μ*,φ*,y)
    let tau_exact = toy.ln_likelihood(phi, mu, tau) + toy.ln_tau_prior(tau)
        - toy.ln_integrate_tau(|t| toy.ln_likelihood(phi, mu, t) + toy.ln_tau_prior(t));

    let o = result.parts.ordinates;
    for (name, est, exact) in [("phi", o.phi, phi_exact), ("mu", o.mu, mu_exact), ("tau", o.tau, tau_exact)] {
        assert!(
            (est.log_value - exact).abs() < 3.0 * est.log_se + 0.02,
            "{name}: {} vs {exact} (se {})",
            est.log_value,
            est.log_se
        );
    }
    assert_eq!(o.pi, OrdinateEstimate::EXACT);
    assert!((result.log_marginal - reference).abs() < 0.1, "{} vs {reference}", result.log_marginal);
    assert!((result.parts.log_marginal() - result.log_marginal).abs() < 1e-10);
    assert_eq!(result.parts.log_order_prior, 0.0);
}

#[test]
fn longer_reduced_runs_shrink_the_error() {
    let s = toy_series(6);
    let mut h = toy_hyper(&s);
    let theta = toy_theta(&s, &h, 3);
    h.gamma = vec![20.0];
    let se = |n: usize| {
        let config = OrdinateConfig { n_j: n, n_i: n, burn_in: 200 };
        let ctx = OrdinateContext { series: &s, theta: &theta, hyper: &h, config: &config, seed: 8 };
        estimate_ordinates(ctx).unwrap().log_se()
    };
    let ratio = se(16_000) / se(4_000);
    // a fourfold increase should halve the error
    assert!((0.3..0.8).contains(&ratio), "ratio {ratio}");
}

#[test]
fn fixed_shift_skips_the_mean_ordinate() {
    let s = toy_series(7);
    let mut h = toy_hyper(&s);
    h.fixed_shift = true;
    let theta = toy_theta(&s, &h, 4);
    let config = OrdinateConfig { n_j: 500, n_i: 500, burn_in: 50 };
    let ctx = OrdinateContext { series: &s, theta: &theta, hyper: &h, config: &config, seed: 1 };
    let o = estimate_ordinates(ctx).unwrap();
    assert_eq!(o.mu, OrdinateEstimate::EXACT);
    assert!(o.phi.log_value.is_finite() && o.tau.log_value.is_finite());
}

#[test]
fn single_candidate_selection() {
    let s = simulate_path_seeded(&presets::model_a(), 150, 200, 8).unwrap();
    let mut h = default_hyperparams(&s).unwrap();
    h.n_iter = 1200;
    h.burn_in = 200;
    h.tune_pilot = 500;
    let mut config = EvidenceConfig::new(2);
    config.ordinates = OrdinateConfig { n_j: 300, n_i: 300, burn_in: 50 };
    config.relabel.m = 100;
    let (best, table) = select_g(&s, &[2], &h, &config, 1).unwrap();
    assert_eq!(best, 2);
    assert_eq!(table.len(), 1);
    let r = &table[0];
    assert_eq!(r.parts.log_g_prior, 0.0);
    assert!((r.parts.log_order_prior + 2.0 * ln(2.0)).abs() < 1e-12);
    assert!(r.parts.log_order_posterior <= 0.0);
    assert!(r.log_marginal.is_finite());
    assert!(select_g(&s, &[], &h, &config, 1).is_err());
}
