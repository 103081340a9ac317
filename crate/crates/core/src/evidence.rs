//! Marginal likelihood of a MAR model with `g` components by the
//! marginal-likelihood identity
//!
//! `ln f(y|g) = ln f(y|θ*) + ln p(θ*) + ln p(p*|g) - ln p̂(θ*|y) - ln p̂(p*|y,g)`.
//!
//! The posterior ordinate is decomposed as
//! `p(φ*|y) p(μ*|φ*,y) p(τ*|μ*,φ*,y) p(π*|τ*,μ*,φ*,y)` and each factor is
//! estimated from reduced runs of the sampler that pin the blocks earlier in
//! that order. The `φ` blocks, updated by random-walk Metropolis, use the
//! Metropolis-Hastings ordinate estimator (the ratio of the averaged
//! `α(φ, φ*) q(φ, φ*)` to the averaged `α(φ*, φ̃)`); the Gibbs blocks use
//! Rao-Blackwell averages of their full conditional densities. The stages
//! are typed so they can only be run in that order.
//!
//! Conventions:
//! - every likelihood conditions on the first `p_max` observations;
//! - the AR coefficients have a flat prior of density 1 on the stable region;
//! - `τ` has the prior obtained by integrating `λ` out of `Ga(c, λ) Ga(a, b)`;
//! - `p(p*|g)` is uniform over the `p_max^g` order configurations and
//!   `p(p*|y,g)` is the reversible-jump preference of the modal orders;
//! - `p(g)` is uniform over the candidates; it is recorded but not added,
//!   since it is common to all candidates.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{MarError, Result};
use crate::math::{dirichlet_ln_pdf, gamma_ln_pdf, ln, ln_gamma, log_mean_exp, normal_ln_pdf, sqrt};
use crate::model::{log_likelihood_from, MarSpec, TimeSeries};
use crate::relabel::{relabel_chain, RelabelConfig};
use crate::rjmcmc::{rjmcmc_run, OrderMoveConfig};
use crate::rng::{derive_seed, rng_from_seed, ChainRng};
use crate::sampler::{
    ar_log_acceptance, mean_full_conditional, precision_full_conditional, proposal_shift, run_chain,
    sample_allocations, sweep_pinned, weight_full_conditional, ChainOutput, ChainState, Draw, Hyperparams, SweepPins,
};
use crate::stability::is_stable;

pub const DEFAULT_REDUCED_ITERATIONS: usize = 10_000;
pub const DEFAULT_REDUCED_BURN_IN: usize = 500;
const BATCHES: usize = 20;

/// Lengths of the reduced runs.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrdinateConfig {
    /// Length of the runs feeding the numerators of the `φ` ordinates.
    pub n_j: usize,
    /// Length of the runs feeding denominators and Rao-Blackwell averages.
    pub n_i: usize,
    /// Sweeps discarded at the start of every reduced run.
    pub burn_in: usize,
}

impl Default for OrdinateConfig {
    fn default() -> Self {
        OrdinateConfig { n_j: DEFAULT_REDUCED_ITERATIONS, n_i: DEFAULT_REDUCED_ITERATIONS, burn_in: DEFAULT_REDUCED_BURN_IN }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvidenceConfig {
    pub ordinates: OrdinateConfig,
    pub relabel: RelabelConfig,
    pub order_moves: OrderMoveConfig,
    /// Number of candidate values of `g`, for the uniform `p(g)`.
    pub g_candidates: usize,
}

impl EvidenceConfig {
    pub fn new(p_max: usize) -> Self {
        EvidenceConfig {
            ordinates: OrdinateConfig::default(),
            relabel: RelabelConfig::default(),
            order_moves: OrderMoveConfig::new(p_max),
            g_candidates: 1,
        }
    }
}

/// A log posterior ordinate with an estimate of its Monte Carlo standard
/// error (batch means, delta method).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrdinateEstimate {
    pub log_value: f64,
    pub log_se: f64,
}

impl OrdinateEstimate {
    pub const EXACT: OrdinateEstimate = OrdinateEstimate { log_value: 0.0, log_se: 0.0 };

    fn combine(self, other: OrdinateEstimate) -> OrdinateEstimate {
        OrdinateEstimate {
            log_value: self.log_value + other.log_value,
            log_se: sqrt(self.log_se * self.log_se + other.log_se * other.log_se),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ordinates {
    pub phi: OrdinateEstimate,
    pub mu: OrdinateEstimate,
    pub tau: OrdinateEstimate,
    pub pi: OrdinateEstimate,
}

impl Ordinates {
    pub fn log_total(&self) -> f64 {
        self.phi.log_value + self.mu.log_value + self.tau.log_value + self.pi.log_value
    }

    pub fn log_se(&self) -> f64 {
        self.phi.combine(self.mu).combine(self.tau).combine(self.pi).log_se
    }
}

/// The terms of the marginal-likelihood identity.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvidenceParts {
    pub log_likelihood: f64,
    pub log_prior: f64,
    pub ordinates: Ordinates,
    /// `ln p(p*|g)`.
    pub log_order_prior: f64,
    /// `ln p̂(p*|y,g)`.
    pub log_order_posterior: f64,
    /// `ln p(g)`; recorded only.
    pub log_g_prior: f64,
}

impl EvidenceParts {
    pub fn log_marginal(&self) -> f64 {
        self.log_likelihood + self.log_prior + self.log_order_prior
            - self.ordinates.log_total()
            - self.log_order_posterior
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvidenceResult {
    pub g: usize,
    pub orders: Vec<usize>,
    pub log_marginal: f64,
    /// Monte Carlo standard error of `log_marginal` from the ordinates alone.
    pub log_marginal_se: f64,
    pub parts: EvidenceParts,
    pub theta_star: Draw,
    /// RWM precisions used by the main and reduced runs.
    pub gamma: Vec<f64>,
    pub warnings: Vec<String>,
}

/// `ln p(τ)` with `λ ~ Ga(a, b)` integrated out of `τ_k | λ ~ Ga(c, λ)`.
pub fn ln_precision_prior(taus: &[f64], hyper: &Hyperparams) -> f64 {
    let (a, b, c) = (hyper.a, hyper.b, hyper.c);
    let g = taus.len() as f64;
    let sum: f64 = taus.iter().sum();
    a * ln(b) + ln_gamma(a + g * c) - ln_gamma(a) - g * ln_gamma(c) + taus.iter().map(|t| (c - 1.0) * ln(*t)).sum::<f64>()
        - (a + g * c) * ln(b + sum)
}

/// Joint log prior of `(φ, μ, τ, π)` at a draw.
pub fn log_prior(draw: &Draw, hyper: &Hyperparams) -> f64 {
    let spec = &draw.spec;
    let g = spec.g();
    let weights = dirichlet_ln_pdf(spec.weights(), &hyper.dirichlet_vector(g));
    let means: f64 = if hyper.fixed_shift {
        0.0
    } else {
        let sd = 1.0 / sqrt(hyper.kappa);
        draw.means.iter().map(|m| normal_ln_pdf(*m, hyper.zeta, sd)).sum()
    };
    let taus: Vec<f64> = (0..g).map(|k| spec.precision(k)).collect();
    weights + means + ln_precision_prior(&taus, hyper)
}

fn conditioning_start(spec: &MarSpec, hyper: &Hyperparams) -> usize {
    hyper.start.unwrap_or(spec.max_order()).max(spec.max_order())
}

/// Log likelihood plus log prior of a draw.
pub fn log_posterior_kernel(draw: &Draw, series: &TimeSeries, hyper: &Hyperparams) -> Result<f64> {
    let ll = log_likelihood_from(&draw.spec, series, conditioning_start(&draw.spec, hyper))?;
    Ok(ll + log_prior(draw, hyper))
}

/// The retained draw with the largest log posterior kernel; ties go to the
/// earliest draw.
pub fn select_theta_star(output: &ChainOutput, series: &TimeSeries, hyper: &Hyperparams) -> Result<Draw> {
    let mut best: Option<(f64, &Draw)> = None;
    for d in &output.draws {
        let v = log_posterior_kernel(d, series, hyper)?;
        if best.map_or(true, |(b, _)| v > b) {
            best = Some((v, d));
        }
    }
    best.map(|(_, d)| d.clone()).ok_or(MarError::InsufficientDraws { needed: 1, got: 0 })
}

fn normal_proposal_ln_density(from: &[f64], to: &[f64], gamma: f64) -> f64 {
    let sd = 1.0 / sqrt(gamma);
    from.iter().zip(to).map(|(f, t)| normal_ln_pdf(*t, *f, sd)).sum()
}

/// `ln α` of moving component `k`'s coefficients from the state's values to
/// `target` (with the shift following), including the stability veto.
fn ln_move_acceptance(state: &ChainState, series: &TimeSeries, hyper: &Hyperparams, k: usize, target: &[f64]) -> Result<f64> {
    let shift = proposal_shift(state, hyper, k, target);
    let mut spec = state.spec.clone();
    spec.set_ar(k, target.to_vec());
    spec.set_shift(k, shift);
    if !is_stable(&spec)?.stable {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ar_log_acceptance(state, series, k, target, shift).min(0.0))
}

/// Numerator term `ln[α(φ_k, φ*_k) q(φ_k, φ*_k)]` at a reduced-run state.
pub fn phi_numerator_term(
    state: &ChainState,
    theta: &Draw,
    series: &TimeSeries,
    hyper: &Hyperparams,
    k: usize,
) -> Result<f64> {
    let target = theta.spec.ar(k);
    let alpha = ln_move_acceptance(state, series, hyper, k, target)?;
    Ok(alpha + normal_proposal_ln_density(state.spec.ar(k), target, hyper.gamma_for(k)))
}

/// Denominator term `ln α(φ*_k, φ̃_k)` with `φ̃_k ~ q(φ*_k, ·)`, at a state
/// whose component `k` sits at `φ*_k`.
pub fn phi_denominator_term<R: Rng + ?Sized>(
    state: &ChainState,
    series: &TimeSeries,
    hyper: &Hyperparams,
    k: usize,
    rng: &mut R,
) -> Result<f64> {
    let sd = 1.0 / sqrt(hyper.gamma_for(k));
    let proposal: Vec<f64> = state
        .spec
        .ar(k)
        .iter()
        .map(|c| {
            let z: f64 = StandardNormal.sample(rng);
            c + sd * z
        })
        .collect();
    ln_move_acceptance(state, series, hyper, k, &proposal)
}

/// `Σ_k ln p(μ*_k | φ*, τ, z, y)` at a reduced-run state.
pub fn mu_term(state: &ChainState, theta: &Draw, series: &TimeSeries, hyper: &Hyperparams) -> f64 {
    (0..state.spec.g())
        .map(|k| {
            let p = mean_full_conditional(&state.spec, series, &state.alloc, hyper, k);
            normal_ln_pdf(theta.means[k], p.mean, p.sd)
        })
        .sum()
}

/// `Σ_k ln p(τ*_k | μ*, φ*, λ, z, y)` at a reduced-run state.
pub fn tau_term(state: &ChainState, theta: &Draw, series: &TimeSeries, hyper: &Hyperparams) -> f64 {
    (0..state.spec.g())
        .map(|k| {
            let (shape, rate) = precision_full_conditional(&state.spec, series, &state.alloc, state.lambda, hyper, k);
            gamma_ln_pdf(theta.spec.precision(k), shape, rate)
        })
        .sum()
}

/// `ln p(π* | τ*, μ*, φ*, z, y)` at a reduced-run state.
pub fn pi_term(state: &ChainState, theta: &Draw, hyper: &Hyperparams) -> f64 {
    dirichlet_ln_pdf(theta.spec.weights(), &weight_full_conditional(&state.alloc, hyper))
}

/// Log of a mean of `exp(terms)` with a batch-means standard error of that log.
pub fn log_mean_with_se(terms: &[f64]) -> OrdinateEstimate {
    let log_value = log_mean_exp(terms);
    if !log_value.is_finite() || terms.len() < 2 * BATCHES {
        return OrdinateEstimate { log_value, log_se: f64::NAN };
    }
    let size = terms.len() / BATCHES;
    let batch: Vec<f64> = (0..BATCHES)
        .map(|b| crate::math::exp(log_mean_exp(&terms[b * size..(b + 1) * size]) - log_value))
        .collect();
    let m = batch.iter().sum::<f64>() / BATCHES as f64;
    let var = batch.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (BATCHES - 1) as f64;
    OrdinateEstimate { log_value, log_se: sqrt(var / BATCHES as f64) / m }
}

/// Starting state of a reduced run: the starred parameters with allocations
/// drawn given them.
fn starred_state(theta: &Draw, series: &TimeSeries, hyper: &Hyperparams, rng: &mut ChainRng) -> Result<ChainState> {
    let start = conditioning_start(&theta.spec, hyper);
    let g = theta.spec.g();
    let placeholder = crate::model::LatentAllocation::new(vec![0; series.len() - start], g, start)?;
    let mut state =
        ChainState { spec: theta.spec.clone(), means: theta.means.clone(), alloc: placeholder, lambda: theta.lambda, iteration: 0 };
    state.alloc = sample_allocations(&state, series, rng)?;
    Ok(state)
}

/// Shared inputs of the ordinate stages.
#[derive(Debug, Clone, Copy)]
pub struct OrdinateContext<'a> {
    pub series: &'a TimeSeries,
    pub theta: &'a Draw,
    /// Hyperparameters with the RWM precisions of the main run.
    pub hyper: &'a Hyperparams,
    pub config: &'a OrdinateConfig,
    pub seed: u64,
}

impl<'a> OrdinateContext<'a> {
    /// Runs a reduced chain and calls `visit` on every retained state.
    fn reduced_run(
        &self,
        pins: &SweepPins,
        iterations: usize,
        stream: u64,
        mut visit: impl FnMut(&ChainState, &mut ChainRng) -> Result<()>,
    ) -> Result<()> {
        let mut rng = rng_from_seed(derive_seed(self.seed, stream));
        let mut state = starred_state(self.theta, self.series, self.hyper, &mut rng)?;
        for it in 0..self.config.burn_in + iterations {
            state = sweep_pinned(&state, self.series, self.hyper, pins, &mut rng)?.state;
            if it >= self.config.burn_in {
                visit(&state, &mut rng)?;
            }
        }
        Ok(())
    }

    fn pins(&self, ar_pinned: usize, means: bool, precisions: bool) -> SweepPins {
        let g = self.theta.spec.g();
        SweepPins { ar: (0..g).map(|k| k < ar_pinned).collect(), means, precisions, weights: false }
    }

    /// Begins the estimation; the stages must be consumed in order.
    pub fn begin(self) -> PhiStage<'a> {
        PhiStage { ctx: self }
    }
}

pub struct PhiStage<'a> {
    ctx: OrdinateContext<'a>,
}

pub struct MuStage<'a> {
    ctx: OrdinateContext<'a>,
    phi: OrdinateEstimate,
}

pub struct TauStage<'a> {
    ctx: OrdinateContext<'a>,
    phi: OrdinateEstimate,
    mu: OrdinateEstimate,
}

pub struct PiStage<'a> {
    ctx: OrdinateContext<'a>,
    phi: OrdinateEstimate,
    mu: OrdinateEstimate,
    tau: OrdinateEstimate,
}

fn require_positive(est: OrdinateEstimate, what: &str, n: usize) -> Result<OrdinateEstimate> {
    if est.log_value.is_finite() {
        Ok(est)
    } else {
        Err(MarError::Estimation(format!(
            "{what} average is zero after {n} reduced iterations; lengthen the reduced runs"
        )))
    }
}

impl<'a> PhiStage<'a> {
    /// `ln p̂(φ*|y)`, as a sum over components of the conditional ordinates
    /// given the starred coefficients of the earlier components. Run `j`
    /// pins components `0..j`; it provides the denominator for component
    /// `j - 1` and the numerator for component `j`.
    pub fn estimate(self) -> Result<MuStage<'a>> {
        let ctx = self.ctx;
        let g = ctx.theta.spec.g();
        let mut numerators: Vec<Vec<f64>> = vec![Vec::new(); g];
        let mut denominators: Vec<Vec<f64>> = vec![Vec::new(); g];
        for j in 0..=g {
            let iterations = match (j < g, j > 0) {
                (true, true) => ctx.config.n_j.max(ctx.config.n_i),
                (true, false) => ctx.config.n_j,
                _ => ctx.config.n_i,
            };
            ctx.reduced_run(&ctx.pins(j, false, false), iterations, 100 + j as u64, |state, rng| {
                if j < g && numerators[j].len() < ctx.config.n_j {
                    numerators[j].push(phi_numerator_term(state, ctx.theta, ctx.series, ctx.hyper, j)?);
                }
                if j > 0 && denominators[j - 1].len() < ctx.config.n_i {
                    denominators[j - 1].push(phi_denominator_term(state, ctx.series, ctx.hyper, j - 1, rng)?);
                }
                Ok(())
            })?;
        }
        let mut phi = OrdinateEstimate::EXACT;
        for k in 0..g {
            let num = require_positive(log_mean_with_se(&numerators[k]), "numerator", ctx.config.n_j)?;
            let den = require_positive(log_mean_with_se(&denominators[k]), "acceptance", ctx.config.n_i)?;
            phi = phi.combine(OrdinateEstimate { log_value: num.log_value - den.log_value, log_se: num.combine(den).log_se });
        }
        Ok(MuStage { ctx, phi })
    }
}

impl<'a> MuStage<'a> {
    /// `ln p̂(μ*|φ*,y)`; exactly zero when the shifts are fixed at zero.
    pub fn estimate(self) -> Result<TauStage<'a>> {
        let ctx = self.ctx;
        if ctx.hyper.fixed_shift {
            return Ok(TauStage { ctx, phi: self.phi, mu: OrdinateEstimate::EXACT });
        }
        let g = ctx.theta.spec.g();
        let mut terms = Vec::with_capacity(ctx.config.n_i);
        ctx.reduced_run(&ctx.pins(g, false, false), ctx.config.n_i, 200, |state, _| {
            terms.push(mu_term(state, ctx.theta, ctx.series, ctx.hyper));
            Ok(())
        })?;
        let mu = require_positive(log_mean_with_se(&terms), "mean ordinate", ctx.config.n_i)?;
        Ok(TauStage { ctx, phi: self.phi, mu })
    }
}

impl<'a> TauStage<'a> {
    /// `ln p̂(τ*|μ*,φ*,y)`, averaging over `z` and `λ`.
    pub fn estimate(self) -> Result<PiStage<'a>> {
        let ctx = self.ctx;
        let g = ctx.theta.spec.g();
        let mut terms = Vec::with_capacity(ctx.config.n_i);
        ctx.reduced_run(&ctx.pins(g, true, false), ctx.config.n_i, 300, |state, _| {
            terms.push(tau_term(state, ctx.theta, ctx.series, ctx.hyper));
            Ok(())
        })?;
        let tau = require_positive(log_mean_with_se(&terms), "precision ordinate", ctx.config.n_i)?;
        Ok(PiStage { ctx, phi: self.phi, mu: self.mu, tau })
    }
}

impl<'a> PiStage<'a> {
    /// `ln p̂(π*|τ*,μ*,φ*,y)`; exactly zero for a single component.
    pub fn estimate(self) -> Result<Ordinates> {
        let ctx = self.ctx;
        let g = ctx.theta.spec.g();
        let pi = if g == 1 {
            OrdinateEstimate::EXACT
        } else {
            let mut terms = Vec::with_capacity(ctx.config.n_i);
            ctx.reduced_run(&ctx.pins(g, true, true), ctx.config.n_i, 400, |state, _| {
                terms.push(pi_term(state, ctx.theta, ctx.hyper));
                Ok(())
            })?;
            require_positive(log_mean_with_se(&terms), "weight ordinate", ctx.config.n_i)?
        };
        Ok(Ordinates { phi: self.phi, mu: self.mu, tau: self.tau, pi })
    }
}

/// Runs all four stages in order.
pub fn estimate_ordinates(ctx: OrdinateContext<'_>) -> Result<Ordinates> {
    ctx.begin().estimate()?.estimate()?.estimate()?.estimate()
}

/// Marginal likelihood with the orders fixed at `orders`, given
/// `ln p̂(p*|y,g)`. Conditions on the first `config.order_moves.p_max`
/// observations.
pub fn evidence_at_orders(
    series: &TimeSeries,
    orders: &[usize],
    hyper: &Hyperparams,
    config: &EvidenceConfig,
    log_order_posterior: f64,
    seed: u64,
) -> Result<EvidenceResult> {
    let g = orders.len();
    let p_max = config.order_moves.p_max;
    let mut hyper = hyper.clone();
    hyper.p_max = p_max;
    hyper.start = Some(p_max);
    let chain = run_chain(series, g, orders, &hyper, derive_seed(seed, 1))?;
    let chain = if g > 1 { relabel_chain(&chain, &config.relabel)? } else { chain };
    hyper.gamma = chain.gamma.clone();
    let theta = select_theta_star(&chain, series, &hyper)?;
    let ordinates = estimate_ordinates(OrdinateContext {
        series,
        theta: &theta,
        hyper: &hyper,
        config: &config.ordinates,
        seed: derive_seed(seed, 2),
    })?;
    let parts = EvidenceParts {
        log_likelihood: log_likelihood_from(&theta.spec, series, p_max)?,
        log_prior: log_prior(&theta, &hyper),
        ordinates,
        log_order_prior: -(g as f64) * ln(p_max as f64),
        log_order_posterior,
        log_g_prior: -ln(config.g_candidates.max(1) as f64),
    };
    Ok(EvidenceResult {
        g,
        orders: orders.to_vec(),
        log_marginal: parts.log_marginal(),
        log_marginal_se: ordinates.log_se(),
        parts,
        theta_star: theta,
        gamma: chain.gamma,
        warnings: chain.warnings,
    })
}

/// Marginal likelihood for `g` components: reversible jump fixes the modal
/// orders and their posterior probability, then the fixed-order identity
/// is evaluated there.
pub fn marginal_log_likelihood(
    series: &TimeSeries,
    g: usize,
    hyper: &Hyperparams,
    config: &EvidenceConfig,
    seed: u64,
) -> Result<EvidenceResult> {
    let rj = rjmcmc_run(series, g, hyper, &config.order_moves, derive_seed(seed, 0))?;
    let mut result = evidence_at_orders(series, &rj.modal_orders, hyper, config, ln(rj.preference), seed)?;
    let mut warnings = rj.chain.warnings;
    warnings.append(&mut result.warnings);
    result.warnings = warnings;
    Ok(result)
}

/// Marginal likelihood of a named order configuration. The posterior order
/// probability is the share of reversible-jump iterations spent in that
/// configuration (up to relabelling), floored at one visit so an unvisited
/// configuration still yields a finite, heavily penalised value.
pub fn marginal_log_likelihood_at(
    series: &TimeSeries,
    orders: &[usize],
    hyper: &Hyperparams,
    config: &EvidenceConfig,
    seed: u64,
) -> Result<EvidenceResult> {
    let g = orders.len();
    if orders.iter().any(|&p| p == 0 || p > config.order_moves.p_max) {
        return Err(MarError::InvalidSpec(format!(
            "orders {orders:?} must lie in 1..={}",
            config.order_moves.p_max
        )));
    }
    let rj = rjmcmc_run(series, g, hyper, &config.order_moves, derive_seed(seed, 0))?;
    let floor = 1.0 / rj.trace.len().max(1) as f64;
    let share = rj.trace.proportion(orders).max(floor);
    let mut result = evidence_at_orders(series, orders, hyper, config, ln(share), seed)?;
    let mut warnings = rj.chain.warnings;
    warnings.append(&mut result.warnings);
    result.warnings = warnings;
    Ok(result)
}

/// Evaluates every candidate `g` and returns the index of the largest
/// marginal likelihood together with the table.
pub fn select_g(
    series: &TimeSeries,
    candidates: &[usize],
    hyper: &Hyperparams,
    config: &EvidenceConfig,
    seed: u64,
) -> Result<(usize, Vec<EvidenceResult>)> {
    if candidates.is_empty() {
        return Err(MarError::InvalidSpec("no candidate numbers of components".into()));
    }
    let mut config = config.clone();
    config.g_candidates = candidates.len();
    let table = candidates
        .iter()
        .map(|&g| marginal_log_likelihood(series, g, hyper, &config, derive_seed(seed, g as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok((best_g(&table), table))
}

/// The `g` with the largest log marginal likelihood (first on ties).
pub fn best_g(table: &[EvidenceResult]) -> usize {
    let mut best = &table[0];
    for r in &table[1..] {
        if r.log_marginal > best.log_marginal {
            best = r;
        }
    }
    best.g
}

#[cfg(test)]
mod tests;
