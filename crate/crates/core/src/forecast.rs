//! Multi-step predictive densities.
//!
//! Given the history up to an origin, the `h`-step predictive distribution of
//! a MAR model with fixed parameters is a mixture of `g^h` Gaussians, one per
//! sequence of components generating the intermediate values; every future
//! value is an affine function of the independent innovations along a path.
//! The exact expansion enumerates those paths, pruning negligible ones; the
//! Monte Carlo alternative simulates the first `h - 1` steps and averages the
//! closed-form one-step mixture at the last step. Posterior-averaged forecasts
//! average per-draw densities pointwise and add pointwise 90% bands.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{MarError, Result};
use crate::math::{quantile_sorted, sqrt};
use crate::model::{ConditionalMixture, MarSpec, TimeSeries};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sampler::ChainOutput;
use crate::summary::DensityGrid;

/// Largest number of component paths the exact expansion will enumerate.
pub const MAX_EXACT_PATHS: usize = 1_000_000;
/// Paths whose probability falls below this are dropped from the expansion.
pub const PATH_PRUNE_WEIGHT: f64 = 1e-12;
/// Default number of simulated continuations in Monte Carlo mode.
pub const DEFAULT_MC_PATHS: usize = 10_000;
/// Default thinning of retained draws for posterior averaging.
pub const DEFAULT_THIN: usize = 10;
/// Half-width of the default grid in predictive standard deviations.
pub const GRID_HALF_WIDTH_SDS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForecastMode {
    Exact,
    MonteCarlo { paths: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRequest {
    /// Steps ahead, at least one.
    pub horizon: usize,
    /// Number of observations known: the forecast conditions on `y[..origin]`.
    pub origin: usize,
    /// Evaluation abscissae; `None` builds the default grid.
    pub grid: Option<Vec<f64>>,
    pub mode: ForecastMode,
    /// Every `thin`-th retained draw is used (1 uses all of them).
    pub thin: usize,
    /// Seeds the Monte Carlo mode; each draw gets its own derived stream.
    pub seed: u64,
    pub keep_per_draw: bool,
}

impl ForecastRequest {
    pub fn new(origin: usize, horizon: usize) -> Self {
        ForecastRequest {
            horizon,
            origin,
            grid: None,
            mode: ForecastMode::Exact,
            thin: DEFAULT_THIN,
            seed: 0,
            keep_per_draw: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastResult {
    pub mean_density: DensityGrid,
    pub lower_90: DensityGrid,
    pub upper_90: DensityGrid,
    /// Ordinates of each averaged draw when requested.
    pub per_draw: Option<Vec<Vec<f64>>>,
}

/// A future value `mean + sum_i coef[i] * eps_i` with independent standard
/// normal innovations `eps_i`.
#[derive(Debug, Clone)]
struct Affine {
    mean: f64,
    coef: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Path {
    weight: f64,
    values: Vec<Affine>,
}

fn check_origin(spec: &MarSpec, series: &TimeSeries, origin: usize, horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Err(MarError::InvalidSpec("forecast horizon must be at least 1".into()));
    }
    let p = spec.max_order();
    if origin < p || origin > series.len() {
        return Err(MarError::InvalidSpec(format!(
            "forecast origin {origin} must lie in {p}..={} for a model of order {p}",
            series.len()
        )));
    }
    Ok(())
}

/// Number of component paths of an `h`-step expansion, as a float so that
/// huge counts do not overflow.
pub fn path_count(g: usize, h: usize) -> f64 {
    libm::pow(g as f64, (h - 1) as f64) * g as f64
}

/// The exact `h`-step predictive mixture given `y[..origin]`.
pub fn exact_predictive(spec: &MarSpec, series: &TimeSeries, origin: usize, h: usize) -> Result<ConditionalMixture> {
    check_origin(spec, series, origin, h)?;
    let g = spec.g();
    let paths = path_count(g, h);
    if paths > MAX_EXACT_PATHS as f64 {
        return Err(MarError::TooManyPaths { paths, limit: MAX_EXACT_PATHS });
    }
    let history = &series.values()[..origin];
    let value_at = |path: &Path, lag: usize| -> Affine {
        // `lag` steps before the value being generated, which is the
        // `path.values.len()`-th future value.
        let step = path.values.len();
        if lag <= step {
            path.values[step - lag].clone()
        } else {
            Affine { mean: history[origin + step - lag], coef: Vec::new() }
        }
    };
    let mut paths = vec![Path { weight: 1.0, values: Vec::with_capacity(h) }];
    for step in 0..h {
        let mut next = Vec::with_capacity(paths.len() * g);
        for path in &paths {
            for k in 0..g {
                let weight = path.weight * spec.weights()[k];
                if weight < PATH_PRUNE_WEIGHT {
                    continue;
                }
                let mut value = Affine { mean: spec.shifts()[k], coef: vec![0.0; step + 1] };
                for (i, &phi) in spec.ar(k).iter().enumerate() {
                    let past = value_at(path, i + 1);
                    value.mean += phi * past.mean;
                    for (c, pc) in value.coef.iter_mut().zip(&past.coef) {
                        *c += phi * pc;
                    }
                }
                value.coef[step] = spec.scales()[k];
                let mut values = path.values.clone();
                values.push(value);
                next.push(Path { weight, values });
            }
        }
        paths = next;
    }
    let mut mixture = ConditionalMixture { weights: Vec::new(), means: Vec::new(), sds: Vec::new() };
    for path in paths {
        let last = &path.values[h - 1];
        mixture.weights.push(path.weight);
        mixture.means.push(last.mean);
        mixture.sds.push(sqrt(last.coef.iter().map(|c| c * c).sum()));
    }
    Ok(mixture)
}

/// Monte Carlo `h`-step predictive: `paths` simulated continuations of the
/// first `h - 1` steps, each contributing the exact one-step mixture of the
/// last step with weight `1 / paths`.
pub fn monte_carlo_predictive<R: Rng + ?Sized>(
    spec: &MarSpec,
    series: &TimeSeries,
    origin: usize,
    h: usize,
    paths: usize,
    rng: &mut R,
) -> Result<ConditionalMixture> {
    check_origin(spec, series, origin, h)?;
    if paths == 0 {
        return Err(MarError::InvalidSpec("Monte Carlo forecast needs at least one path".into()));
    }
    let g = spec.g();
    let p = spec.max_order();
    let innovations: Vec<Normal<f64>> = spec
        .scales()
        .iter()
        .map(|&s| Normal::new(0.0, s).map_err(|_| MarError::InvalidSpec("bad scale".into())))
        .collect::<Result<_>>()?;
    let tail = &series.values()[origin - p..origin];
    let share = 1.0 / paths as f64;
    let mut mixture = ConditionalMixture {
        weights: Vec::with_capacity(paths * g),
        means: Vec::with_capacity(paths * g),
        sds: Vec::with_capacity(paths * g),
    };
    let mut buffer = Vec::with_capacity(p + h);
    for _ in 0..paths {
        buffer.clear();
        buffer.extend_from_slice(tail);
        for _ in 1..h {
            let k = pick_component(spec.weights(), rng.random::<f64>());
            let y = spec.location(k, &buffer) + innovations[k].sample(rng);
            buffer.push(y);
        }
        for k in 0..g {
            mixture.weights.push(share * spec.weights()[k]);
            mixture.means.push(spec.location(k, &buffer));
            mixture.sds.push(spec.scales()[k]);
        }
    }
    Ok(mixture)
}

/// Samples of `y[origin + h - 1]` by direct simulation of the model.
pub fn simulate_ahead<R: Rng + ?Sized>(
    spec: &MarSpec,
    series: &TimeSeries,
    origin: usize,
    h: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_origin(spec, series, origin, h)?;
    let p = spec.max_order();
    let tail = &series.values()[origin - p..origin];
    let mut out = Vec::with_capacity(n);
    let mut buffer = Vec::with_capacity(p + h);
    for _ in 0..n {
        buffer.clear();
        buffer.extend_from_slice(tail);
        for _ in 0..h {
            let k = pick_component(spec.weights(), rng.random::<f64>());
            let z: f64 = rand_distr::StandardNormal.sample(rng);
            let y = spec.location(k, &buffer) + spec.scales()[k] * z;
            buffer.push(y);
        }
        out.push(buffer[buffer.len() - 1]);
    }
    Ok(out)
}

fn pick_component(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    weights.len() - 1
}

/// The predictive mixture of one parameter value in the requested mode.
pub fn predictive_mixture(
    spec: &MarSpec,
    series: &TimeSeries,
    origin: usize,
    h: usize,
    mode: ForecastMode,
    seed: u64,
) -> Result<ConditionalMixture> {
    match mode {
        ForecastMode::Exact => exact_predictive(spec, series, origin, h),
        ForecastMode::MonteCarlo { paths } => {
            monte_carlo_predictive(spec, series, origin, h, paths, &mut rng_from_seed(seed))
        }
    }
}

/// Predictive density of fixed parameters on the given abscissae.
pub fn predictive_density_fixed(
    spec: &MarSpec,
    series: &TimeSeries,
    origin: usize,
    h: usize,
    grid: &[f64],
    mode: ForecastMode,
    seed: u64,
) -> Result<DensityGrid> {
    let mixture = predictive_mixture(spec, series, origin, h, mode, seed)?;
    Ok(DensityGrid { abscissae: grid.to_vec(), ordinates: grid.iter().map(|&y| mixture.pdf(y)).collect() })
}

/// `GRID_POINTS` abscissae spanning every mixture's mean plus or minus six
/// of its standard deviations.
pub fn covering_grid(mixtures: &[ConditionalMixture]) -> Result<Vec<f64>> {
    if mixtures.is_empty() {
        return Err(MarError::InsufficientDraws { needed: 1, got: 0 });
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for m in mixtures {
        let (mean, sd) = (m.mean(), sqrt(m.variance()));
        lo = lo.min(mean - GRID_HALF_WIDTH_SDS * sd);
        hi = hi.max(mean + GRID_HALF_WIDTH_SDS * sd);
    }
    crate::summary::grid_abscissae(lo, hi)
}

/// Indices of the draws used for averaging: `0, thin, 2 thin, ..`.
pub fn thinned_indices(n: usize, thin: usize) -> Vec<usize> {
    (0..n).step_by(thin.max(1)).collect()
}

/// Averages per-draw ordinates pointwise and forms pointwise 5% / 95% bands,
/// clamped so that `lower <= mean <= upper` everywhere.
pub fn average_forecast(abscissae: Vec<f64>, per_draw: Vec<Vec<f64>>, keep_per_draw: bool) -> Result<ForecastResult> {
    if per_draw.is_empty() {
        return Err(MarError::InsufficientDraws { needed: 1, got: 0 });
    }
    if per_draw.iter().any(|d| d.len() != abscissae.len()) {
        return Err(MarError::InvalidSpec("per-draw ordinates must match the grid".into()));
    }
    let m = per_draw.len() as f64;
    let points = abscissae.len();
    let mut mean = Vec::with_capacity(points);
    let mut lower = Vec::with_capacity(points);
    let mut upper = Vec::with_capacity(points);
    let mut column = Vec::with_capacity(per_draw.len());
    for i in 0..points {
        column.clear();
        column.extend(per_draw.iter().map(|d| d[i]));
        let avg = column.iter().sum::<f64>() / m;
        column.sort_by(f64::total_cmp);
        mean.push(avg);
        lower.push(quantile_sorted(&column, 0.05).min(avg));
        upper.push(quantile_sorted(&column, 0.95).max(avg));
    }
    let grid = |ordinates| DensityGrid { abscissae: abscissae.clone(), ordinates };
    Ok(ForecastResult {
        mean_density: grid(mean),
        lower_90: grid(lower),
        upper_90: grid(upper),
        per_draw: keep_per_draw.then_some(per_draw),
    })
}

/// Posterior-averaged `h`-step density forecast over the thinned draws of a
/// chain, with pointwise 90% bands.
pub fn posterior_averaged_forecast(
    output: &ChainOutput,
    series: &TimeSeries,
    request: &ForecastRequest,
) -> Result<ForecastResult> {
    let used = thinned_indices(output.draws.len(), request.thin);
    if used.is_empty() {
        return Err(MarError::InsufficientDraws { needed: 1, got: 0 });
    }
    let mixtures = used
        .iter()
        .map(|&i| {
            predictive_mixture(
                &output.draws[i].spec,
                series,
                request.origin,
                request.horizon,
                request.mode,
                derive_seed(request.seed, i as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let abscissae = match &request.grid {
        Some(g) => g.clone(),
        None => covering_grid(&mixtures)?,
    };
    let per_draw = mixtures.iter().map(|m| abscissae.iter().map(|&y| m.pdf(y)).collect()).collect();
    average_forecast(abscissae, per_draw, request.keep_per_draw)
}
