use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{gibbs_sweep, ChainState, Hyperparams};
use crate::error::{MarError, Result};
use crate::math::{exp, ln};
use crate::model::TimeSeries;

/// Target RWM acceptance rate, the middle of the 20-25% band.
pub const TUNING_TARGET: f64 = 0.225;

pub const MIN_PILOT: usize = 500;

const LOG_GAMMA_MIN: f64 = -9.210_340_371_976_182; // ln 1e-4
const LOG_GAMMA_MAX: f64 = 18.420_680_743_952_367; // ln 1e8

#[derive(Debug, Clone)]
pub struct TuneOutcome {
    pub gamma: Vec<f64>,
    /// Acceptance over the second half of the pilot.
    pub acceptance: Vec<f64>,
    /// Chain state at the end of the pilot.
    pub state: ChainState,
    pub warnings: Vec<String>,
}

/// Robbins-Monro adaptation of `ln gamma_k` towards [`TUNING_TARGET`]
/// during a pilot run. The returned precisions are frozen afterwards so the
/// main chain is time-homogeneous.
pub fn tune_gamma<R: Rng + ?Sized>(
    state: &ChainState,
    series: &TimeSeries,
    hyper: &Hyperparams,
    pilot_iters: usize,
    rng: &mut R,
) -> Result<TuneOutcome> {
    if pilot_iters < MIN_PILOT {
        return Err(MarError::InvalidSpec(format!("pilot needs at least {MIN_PILOT} sweeps, got {pilot_iters}")));
    }
    let g = state.spec.g();
    let mut log_gamma: Vec<f64> = (0..g).map(|k| ln(hyper.gamma_for(k))).collect();
    let mut h = hyper.clone();
    let mut current = state.clone();
    let mut late_accepts = vec![0usize; g];
    let half = pilot_iters / 2;
    for r in 0..pilot_iters {
        h.gamma = log_gamma.iter().map(|l| exp(*l)).collect();
        let out = gibbs_sweep(&current, series, &h, rng)?;
        current = out.state;
        let step = 1.0 / libm::pow(1.0 + r as f64 / 20.0, 0.6);
        for k in 0..g {
            let acc = out.accepted[k] as u8 as f64;
            // too many acceptances: widen the proposal, i.e. lower gamma
            log_gamma[k] = (log_gamma[k] - step * (acc - TUNING_TARGET)).clamp(LOG_GAMMA_MIN, LOG_GAMMA_MAX);
            if r >= half {
                late_accepts[k] += out.accepted[k] as usize;
            }
        }
    }
    let acceptance: Vec<f64> = late_accepts.iter().map(|&a| a as f64 / (pilot_iters - half) as f64).collect();
    let mut warnings = Vec::new();
    for (k, &a) in acceptance.iter().enumerate() {
        if a <= 0.01 || a >= 0.99 {
            warnings.push(format!("RWM acceptance for component {} stuck at {a:.3} after tuning", k + 1));
        }
    }
    Ok(TuneOutcome { gamma: log_gamma.iter().map(|l| exp(*l)).collect(), acceptance, state: current, warnings })
}
