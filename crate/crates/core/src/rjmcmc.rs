//! Reversible-jump moves on the autoregressive orders of the components.
//!
//! After every parameter sweep one component is chosen uniformly and its
//! order is proposed to grow or shrink by one. A birth appends a coefficient
//! drawn from `U(-h, h)`; a death drops the last coefficient. Retained
//! coefficients are not transformed, so the Jacobian is 1. The likelihood
//! ratio is the one restricted to the observations allocated to the
//! component, with its mean held fixed (the shift follows the coefficients).
//! Candidates that fail the whole-model stability test are rejected.
//!
//! All chains condition on the first `p_max` observations so that
//! likelihoods at different orders are comparable.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{MarError, Result};
use crate::math::{exp, ln, sqrt, FRAC_1_SQRT_2PI};
use crate::model::TimeSeries;
use crate::rng::rng_from_seed;
use crate::sampler::{
    ar_log_acceptance, gibbs_sweep, initial_state, proposal_shift, tune_gamma, ChainOutput, ChainState, Hyperparams,
};
use crate::stability::is_stable;

pub const DEFAULT_BIRTH_PROB: f64 = 0.5;
pub const DEFAULT_HALF_WIDTH: f64 = 1.5;

/// How the death move accounts for the coefficient it drops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DeathDensity {
    /// The uniform birth-proposal density `1/(2h)`, making death the exact
    /// reverse of birth.
    #[default]
    Mirror,
    /// A Normal density with standard deviation `1/sqrt(gamma_k)` evaluated at
    /// zero distance, `sqrt(gamma_k) / sqrt(2 pi)`. Kept for comparison only:
    /// it does not reverse the birth move.
    PaperLiteral,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrderMoveConfig {
    pub p_max: usize,
    /// Birth probability at interior orders `1 < p < p_max`.
    pub birth_prob: f64,
    /// Half-width `h` of the uniform birth proposal.
    pub half_width: f64,
    pub death_density: DeathDensity,
}

impl OrderMoveConfig {
    pub fn new(p_max: usize) -> Self {
        OrderMoveConfig {
            p_max,
            birth_prob: DEFAULT_BIRTH_PROB,
            half_width: DEFAULT_HALF_WIDTH,
            death_density: DeathDensity::Mirror,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_max == 0 {
            return Err(MarError::InvalidSpec("p_max must be at least 1".into()));
        }
        if !(self.birth_prob > 0.0 && self.birth_prob < 1.0) {
            return Err(MarError::InvalidSpec(format!("birth probability {} not in (0, 1)", self.birth_prob)));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(MarError::InvalidSpec(format!("half-width {} must be positive", self.half_width)));
        }
        Ok(())
    }

    /// `b(p)`, with `b(p_max) = 0` and `b(1) = 1` when `p_max > 1`.
    pub fn birth(&self, p: usize) -> f64 {
        if p >= self.p_max {
            0.0
        } else if p <= 1 {
            1.0
        } else {
            self.birth_prob
        }
    }

    /// `d(p)`, with `d(1) = 0` and `d(p_max) = 1` when `p_max > 1`.
    pub fn death(&self, p: usize) -> f64 {
        if p <= 1 {
            0.0
        } else if p >= self.p_max {
            1.0
        } else {
            1.0 - self.birth_prob
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Birth,
    Death,
}

/// Chooses birth with probability `b(p_k)` and death with `d(p_k)`; `None`
/// when neither is possible (`p_max = 1`).
pub fn propose_order_move<R: Rng + ?Sized>(
    state: &ChainState,
    config: &OrderMoveConfig,
    k: usize,
    rng: &mut R,
) -> Option<MoveKind> {
    let p = state.spec.order(k);
    let (b, d) = (config.birth(p), config.death(p));
    if b + d == 0.0 {
        return None;
    }
    let u: f64 = rng.random();
    Some(if u < b { MoveKind::Birth } else { MoveKind::Death })
}

/// Everything in the acceptance ratio except the likelihood ratio, for a move
/// from order `p` of a component with RWM precision `gamma`.
pub fn proposal_ratio(config: &OrderMoveConfig, p: usize, kind: MoveKind, gamma: f64) -> f64 {
    match kind {
        MoveKind::Birth => config.death(p + 1) / config.birth(p) * 2.0 * config.half_width,
        MoveKind::Death => {
            let density = match config.death_density {
                DeathDensity::Mirror => 1.0 / (2.0 * config.half_width),
                DeathDensity::PaperLiteral => FRAC_1_SQRT_2PI * sqrt(gamma),
            };
            config.birth(p - 1) / config.death(p) * density
        }
    }
}

fn with_coefficients(state: &ChainState, hyper: &Hyperparams, k: usize, coeffs: Vec<f64>) -> ChainState {
    let mut next = state.clone();
    let shift = proposal_shift(state, hyper, k, &coeffs);
    next.spec.set_ar(k, coeffs);
    next.spec.set_shift(k, shift);
    next
}

/// Acceptance probability and candidate state for replacing component `k`'s
/// coefficients; zero when the candidate is unstable.
fn acceptance(
    state: &ChainState,
    series: &TimeSeries,
    hyper: &Hyperparams,
    k: usize,
    coeffs: Vec<f64>,
    ratio: f64,
) -> Result<(f64, ChainState)> {
    let candidate = with_coefficients(state, hyper, k, coeffs);
    if !is_stable(&candidate.spec)?.stable {
        return Ok((0.0, candidate));
    }
    let log_lr = ar_log_acceptance(state, series, k, candidate.spec.ar(k), candidate.spec.shifts()[k]);
    let log_alpha = log_lr + ln(ratio);
    Ok((if log_alpha >= 0.0 { 1.0 } else { exp(log_alpha) }, candidate))
}

/// Acceptance probability of dropping the last coefficient of component `k`.
pub fn death_acceptance(
    state: &ChainState,
    series: &TimeSeries,
    hyper: &Hyperparams,
    config: &OrderMoveConfig,
    k: usize,
) -> Result<f64> {
    Ok(death_candidate(state, series, hyper, config, k)?.0)
}

fn death_candidate(
    state: &ChainState,
    series: &TimeSeries,
    hyper: &Hyperparams,
    config: &OrderMoveConfig,
    k: usize,
) -> Result<(f64, ChainState)> {
    let p = state.spec.order(k);
    if p < 2 {
        return Err(MarError::InvalidSpec(format!("component {} has order 1 and cannot shrink", k + 1)));
    }
    let coeffs = state.spec.ar(k)[..p - 1].to_vec();
    acceptance(state, series, hyper, k, coeffs, proposal_ratio(config, p, MoveKind::Death, hyper.gamma_for(k)))
}

/// Acceptance probability of appending `coefficient` to component `k`.
pub fn birth_acceptance_with(
    state: &ChainState,
    series: &TimeSeries,
    hyper: &Hyperparams,
    config: &OrderMoveConfig,
    k: usize,
    coefficient: f64,
) -> Result<f64> {
    Ok(birth_candidate(state, series, hyper, config, k, coefficient)?.0)
}

fn birth_candidate(
    state: &ChainState,
    series: &TimeSeries,
    hyper: &Hyperparams,
    config: &OrderMoveConfig,
    k: usize,
    coefficient: f64,
) -> Result<(f64, ChainState)> {
    let p = state.spec.order(k);
    if p >= config.p_max {
        return Err(MarError::InvalidSpec(format!("component {} is already at p_max = {}", k + 1, config.p_max)));
    }
    if p + 1 > state.start() {
        return Err(MarError::InvalidSpec(format!(
            "order {} needs at least as many conditioning observations, chain conditions on {}",
            p + 1,
            state.start()
        )));
    }
    let mut coeffs = state.spec.ar(k).to_vec();
    coeffs.push(coefficient);
    acceptance(state, series, hyper, k, coeffs, proposal_ratio(config, p, MoveKind::Birth, hyper.gamma_for(k)))
}

/// Draws the new coefficient from `U(-h, h)` and returns it with the
/// acceptance probability.
pub fn birth_acceptance<R: Rng + ?Sized>(
    state: &ChainState,
    series: &TimeSeries,
    hyper: &Hyperparams,
    config: &OrderMoveConfig,
    k: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let coefficient = draw_birth_coefficient(config, rng);
    Ok((birth_acceptance_with(state, series, hyper, config, k, coefficient)?, coefficient))
}

pub fn draw_birth_coefficient<R: Rng + ?Sized>(config: &OrderMoveConfig, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    config.half_width * (2.0 * u - 1.0)
}

#[derive(Debug, Clone)]
pub struct OrderStep {
    pub state: ChainState,
    pub component: usize,
    pub kind: Option<MoveKind>,
    pub accepted: bool,
}

/// One order move on a uniformly chosen component.
pub fn order_step<R: Rng + ?Sized>(
    state: &ChainState,
    series: &TimeSeries,
    hyper: &Hyperparams,
    config: &OrderMoveConfig,
    rng: &mut R,
) -> Result<OrderStep> {
    let k = rng.random_range(0..state.spec.g());
    let Some(kind) = propose_order_move(state, config, k, rng) else {
        return Ok(OrderStep { state: state.clone(), component: k, kind: None, accepted: false });
    };
    let (alpha, candidate) = match kind {
        MoveKind::Birth => {
            let coefficient = draw_birth_coefficient(config, rng);
            birth_candidate(state, series, hyper, config, k, coefficient)?
        }
        MoveKind::Death => death_candidate(state, series, hyper, config, k)?,
    };
    let u: f64 = rng.random();
    if u < alpha {
        Ok(OrderStep { state: candidate, component: k, kind: Some(kind), accepted: true })
    } else {
        Ok(OrderStep { state: state.clone(), component: k, kind: Some(kind), accepted: false })
    }
}

/// Visited order configurations.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrderTrace {
    /// Orders `(p_1, .., p_g)` after each retained iteration.
    pub orders: Vec<Vec<usize>>,
    pub counts: BTreeMap<Vec<usize>, usize>,
}

impl OrderTrace {
    pub fn push(&mut self, orders: Vec<usize>) {
        *self.counts.entry(orders.clone()).or_insert(0) += 1;
        self.orders.push(orders);
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// Proportion of iterations whose orders match `orders` up to a
    /// relabelling of the components.
    pub fn proportion(&self, orders: &[usize]) -> f64 {
        if self.orders.is_empty() {
            return 0.0;
        }
        let mut target = orders.to_vec();
        target.sort_unstable();
        let hits: usize = self
            .counts
            .iter()
            .filter(|(o, _)| {
                let mut o = (*o).clone();
                o.sort_unstable();
                o == target
            })
            .map(|(_, &c)| c)
            .sum();
        hits as f64 / self.orders.len() as f64
    }

    /// Most visited configuration (ties to the lexicographically smallest)
    /// and the proportion of iterations spent there.
    pub fn modal(&self) -> Option<(Vec<usize>, f64)> {
        let mut best: Option<(&Vec<usize>, usize)> = None;
        for (orders, &count) in &self.counts {
            if best.map_or(true, |(_, c)| count > c) {
                best = Some((orders, count));
            }
        }
        best.map(|(o, c)| (o.clone(), c as f64 / self.orders.len() as f64))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RjOutput {
    pub trace: OrderTrace,
    pub chain: ChainOutput,
    /// Acceptance rate of the order moves over retained iterations.
    pub order_acceptance: f64,
    pub modal_orders: Vec<usize>,
    pub preference: f64,
}

/// Runs the sampler with one order move after each sweep, starting from
/// order 1 in every component and conditioning on the first `p_max`
/// observations. `hyper.p_max` is overridden by `config.p_max`.
pub fn rjmcmc_run(
    series: &TimeSeries,
    g: usize,
    hyper: &Hyperparams,
    config: &OrderMoveConfig,
    seed: u64,
) -> Result<RjOutput> {
    config.validate()?;
    let mut hyper = hyper.clone();
    hyper.p_max = config.p_max;
    hyper.start = Some(config.p_max);
    hyper.validate(g)?;
    let mut rng = rng_from_seed(seed);
    let mut warnings = Vec::new();
    let mut state = initial_state(series, g, &vec![1; g], &hyper)?;
    if hyper.tune_pilot > 0 {
        let tuned = tune_gamma(&state, series, &hyper, hyper.tune_pilot, &mut rng)?;
        hyper.gamma = tuned.gamma;
        warnings.extend(tuned.warnings);
        state = tuned.state;
    }
    let kept = hyper.n_iter - hyper.burn_in;
    let mut trace = OrderTrace::default();
    let mut draws = Vec::with_capacity(kept);
    let mut accepted = vec![0usize; g];
    let (mut rejections, mut order_accepts) = (0, 0);
    for it in 0..hyper.n_iter {
        let out = gibbs_sweep(&state, series, &hyper, &mut rng)?;
        let step = order_step(&out.state, series, &hyper, config, &mut rng)?;
        state = step.state;
        if it >= hyper.burn_in {
            for (a, ok) in accepted.iter_mut().zip(&out.accepted) {
                *a += *ok as usize;
            }
            rejections += out.stability_rejected as usize;
            order_accepts += step.accepted as usize;
            trace.push(state.spec.orders());
            draws.push(state.draw());
        }
    }
    let (modal_orders, preference) = trace.modal().expect("at least one retained iteration");
    Ok(RjOutput {
        trace,
        chain: ChainOutput {
            draws,
            acceptance: accepted.iter().map(|&a| a as f64 / kept as f64).collect(),
            stability_rejections: rejections,
            seed,
            gamma: (0..g).map(|k| hyper.gamma_for(k)).collect(),
            warnings,
        },
        order_acceptance: order_accepts as f64 / kept as f64,
        modal_orders,
        preference,
    })
}
