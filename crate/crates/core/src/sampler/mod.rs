//! Posterior sampling for a MAR model with fixed component orders.
//!
//! One sweep updates, in order: allocations, mixing weights, component
//! means, the precision hyperparameter `lambda`, component precisions, and
//! finally each component's AR coefficients by random-walk Metropolis. The
//! whole candidate is then tested for stability; an unstable candidate is
//! discarded and the chain stays where it was.
//!
//! Component means `mu_k` are the sampled location parameters. The shift is
//! always `phi_k0 = mu_k (1 - sum_i phi_ki)`, so an AR move with `mu_k` held
//! fixed also moves the shift.

mod conditionals;
mod init;
mod tune;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{MarError, Result};
use crate::model::{LatentAllocation, MarSpec, TimeSeries};
use crate::rng::rng_from_seed;
use crate::stability::is_stable;

pub use conditionals::{
    allocation_probabilities, ar_acceptance_probability, ar_log_acceptance, mean_full_conditional,
    precision_full_conditional, proposal_shift, rwm_update_ar, sample_allocations, sample_lambda, sample_means,
    sample_precisions, sample_weights, weight_full_conditional, NormalParams,
};
pub use init::initial_state;
pub use tune::{tune_gamma, TuneOutcome, TUNING_TARGET};

/// Default RWM precision `gamma_k` before tuning.
pub const DEFAULT_GAMMA: f64 = 100.0;

/// Prior constants and sampler settings.
///
/// `dirichlet_weights` and `gamma` hold either one value shared by every
/// component or one value per component.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Hyperparams {
    /// Shape of the Gamma prior on `lambda`.
    pub a: f64,
    /// Rate of the Gamma prior on `lambda`.
    pub b: f64,
    /// Shape of the Gamma prior on each precision.
    pub c: f64,
    /// Prior mean of the component means.
    pub zeta: f64,
    /// Prior precision of the component means.
    pub kappa: f64,
    pub dirichlet_weights: Vec<f64>,
    /// RWM proposal precision: proposals are `N(phi_k, I / gamma_k)`.
    pub gamma: Vec<f64>,
    /// Pin every shift at zero.
    pub fixed_shift: bool,
    pub p_max: usize,
    pub burn_in: usize,
    /// Total sweeps including burn-in.
    pub n_iter: usize,
    /// Pilot sweeps for RWM tuning; 0 disables tuning.
    pub tune_pilot: usize,
    /// Leading observations conditioned on. `None` means the model's largest order.
    pub start: Option<usize>,
}

impl Hyperparams {
    pub fn validate(&self, g: usize) -> Result<()> {
        let bad = |m: String| Err(MarError::InvalidSpec(m));
        if !(self.a > 0.0 && self.b > 0.0 && self.c > 0.0 && self.kappa > 0.0) {
            return bad(format!(
                "a, b, c and kappa must be positive (a={}, b={}, c={}, kappa={})",
                self.a, self.b, self.c, self.kappa
            ));
        }
        if !self.zeta.is_finite() {
            return bad("zeta must be finite".into());
        }
        for (name, v) in [("gamma", &self.gamma), ("dirichlet_weights", &self.dirichlet_weights)] {
            if !(v.len() == 1 || v.len() == g) {
                return bad(format!("{name} needs 1 or {g} entries, got {}", v.len()));
            }
            if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return bad(format!("{name} entries must be positive"));
            }
        }
        if self.burn_in >= self.n_iter {
            return bad(format!("burn_in ({}) must be below n_iter ({})", self.burn_in, self.n_iter));
        }
        if self.p_max < 1 {
            return bad("p_max must be at least 1".into());
        }
        Ok(())
    }

    pub fn gamma_for(&self, k: usize) -> f64 {
        per_component(&self.gamma, k)
    }

    pub fn dirichlet_for(&self, k: usize) -> f64 {
        per_component(&self.dirichlet_weights, k)
    }

    pub fn dirichlet_vector(&self, g: usize) -> Vec<f64> {
        (0..g).map(|k| self.dirichlet_for(k)).collect()
    }
}

fn per_component(v: &[f64], k: usize) -> f64 {
    if v.len() == 1 {
        v[0]
    } else {
        v[k]
    }
}

/// Data-driven defaults: with `R = max(y) - min(y)`, `zeta = min(y) + R/2`,
/// `kappa = 1/R`, `b = 10/R^2`, and fixed `a = 0.2`, `c = 2`.
pub fn default_hyperparams(series: &TimeSeries) -> Result<Hyperparams> {
    if series.is_empty() {
        return Err(MarError::InvalidSeries("empty series".into()));
    }
    let (lo, hi) = (series.min(), series.max());
    let range = hi - lo;
    if range <= 0.0 {
        return Err(MarError::InvalidSeries("series is constant (zero range)".into()));
    }
    Ok(Hyperparams {
        a: 0.2,
        b: 10.0 / (range * range),
        c: 2.0,
        zeta: lo + range / 2.0,
        kappa: 1.0 / range,
        dirichlet_weights: vec![1.0],
        gamma: vec![DEFAULT_GAMMA],
        fixed_shift: false,
        p_max: 5,
        burn_in: 10_000,
        n_iter: 20_000,
        tune_pilot: 2_000,
        start: None,
    })
}

/// Current state of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub spec: MarSpec,
    /// Component means `mu_k`; the shifts in `spec` are derived from them.
    pub means: Vec<f64>,
    pub alloc: LatentAllocation,
    pub lambda: f64,
    pub iteration: usize,
}

impl ChainState {
    pub fn start(&self) -> usize {
        self.alloc.offset()
    }

    pub fn draw(&self) -> Draw {
        Draw { spec: self.spec.clone(), means: self.means.clone(), lambda: self.lambda }
    }
}

/// Parameters of one retained iteration.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Draw {
    pub spec: MarSpec,
    pub means: Vec<f64>,
    pub lambda: f64,
}

impl Draw {
    pub fn permuted(&self, perm: &[usize]) -> Draw {
        Draw {
            spec: self.spec.permuted(perm),
            means: perm.iter().map(|&i| self.means[i]).collect(),
            lambda: self.lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainOutput {
    pub draws: Vec<Draw>,
    /// Per-component RWM acceptance rate over the retained sweeps.
    pub acceptance: Vec<f64>,
    pub stability_rejections: usize,
    pub seed: u64,
    /// The (possibly tuned) RWM precisions used by the retained sweeps.
    pub gamma: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Which parameter blocks a sweep leaves untouched. Allocations and `lambda`
/// are always redrawn.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepPins {
    pub ar: Vec<bool>,
    pub means: bool,
    pub precisions: bool,
    pub weights: bool,
}

impl SweepPins {
    pub fn none(g: usize) -> Self {
        SweepPins { ar: vec![false; g], ..Default::default() }
    }

    fn ar_pinned(&self, k: usize) -> bool {
        self.ar.get(k).copied().unwrap_or(false)
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub state: ChainState,
    /// RWM acceptance per component (false for pinned components).
    pub accepted: Vec<bool>,
    /// The candidate failed the stability test and `state` is the previous state.
    pub stability_rejected: bool,
}

/// One full sweep; see the module documentation for the update order.
pub fn gibbs_sweep<R: Rng + ?Sized>(
    state: &ChainState,
    series: &TimeSeries,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<SweepOutcome> {
    sweep_pinned(state, series, hyper, &SweepPins::none(state.spec.g()), rng)
}

/// A sweep that leaves the blocks named in `pins` at their current values.
pub fn sweep_pinned<R: Rng + ?Sized>(
    state: &ChainState,
    series: &TimeSeries,
    hyper: &Hyperparams,
    pins: &SweepPins,
    rng: &mut R,
) -> Result<SweepOutcome> {
    let g = state.spec.g();
    let mut cand = state.clone();
    cand.alloc = sample_allocations(&cand, series, rng)?;
    if !pins.weights {
        cand.spec.set_weights(sample_weights(&cand.alloc, hyper, rng));
    }
    if !pins.means {
        cand.means = sample_means(&cand, series, hyper, rng);
        for k in 0..g {
            let shift = proposal_shift(&cand, hyper, k, cand.spec.ar(k));
            cand.spec.set_shift(k, shift);
        }
    }
    cand.lambda = sample_lambda(&cand.spec, hyper, rng);
    if !pins.precisions {
        let tau = sample_precisions(&cand, series, hyper, rng);
        for (k, t) in tau.into_iter().enumerate() {
            cand.spec.set_scale(k, 1.0 / crate::math::sqrt(t));
        }
    }
    let mut accepted = vec![false; g];
    for (k, acc) in accepted.iter_mut().enumerate() {
        if pins.ar_pinned(k) {
            continue;
        }
        let (ok, coeffs) = rwm_update_ar(&cand, series, hyper, k, rng);
        if ok {
            let shift = proposal_shift(&cand, hyper, k, &coeffs);
            cand.spec.set_ar(k, coeffs);
            cand.spec.set_shift(k, shift);
        }
        *acc = ok;
    }
    let report = is_stable(&cand.spec)?;
    if report.stable {
        cand.iteration = state.iteration + 1;
        Ok(SweepOutcome { state: cand, accepted, stability_rejected: false })
    } else {
        let mut same = state.clone();
        same.iteration = state.iteration + 1;
        Ok(SweepOutcome { state: same, accepted, stability_rejected: true })
    }
}

/// Initialises, optionally tunes the RWM precisions, then runs `n_iter`
/// sweeps and keeps the last `n_iter - burn_in`.
pub fn run_chain(
    series: &TimeSeries,
    g: usize,
    orders: &[usize],
    hyper: &Hyperparams,
    seed: u64,
) -> Result<ChainOutput> {
    hyper.validate(g)?;
    let mut rng = rng_from_seed(seed);
    let mut hyper = hyper.clone();
    let mut warnings = Vec::new();
    let mut state = initial_state(series, g, orders, &hyper)?;
    if hyper.tune_pilot > 0 {
        let tuned = tune_gamma(&state, series, &hyper, hyper.tune_pilot, &mut rng)?;
        hyper.gamma = tuned.gamma;
        warnings.extend(tuned.warnings);
        state = tuned.state;
    }
    let mut draws = Vec::with_capacity(hyper.n_iter - hyper.burn_in);
    let mut accepted = vec![0usize; g];
    let mut rejections = 0;
    for it in 0..hyper.n_iter {
        let out = gibbs_sweep(&state, series, &hyper, &mut rng)?;
        state = out.state;
        if it >= hyper.burn_in {
            for (a, ok) in accepted.iter_mut().zip(&out.accepted) {
                *a += *ok as usize;
            }
            rejections += out.stability_rejected as usize;
            draws.push(state.draw());
        }
    }
    let kept = (hyper.n_iter - hyper.burn_in) as f64;
    Ok(ChainOutput {
        draws,
        acceptance: accepted.iter().map(|&a| a as f64 / kept).collect(),
        stability_rejections: rejections,
        seed,
        gamma: (0..g).map(|k| hyper.gamma_for(k)).collect(),
        warnings,
    })
}
