use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{ChainState, Hyperparams};
use crate::error::{MarError, Result};
use crate::math::{mean_var, solve};
use crate::model::{shift_from_mean, LatentAllocation, MarSpec, TimeSeries};
use crate::stability::is_stable;

const RIDGE: f64 = 1e-3;
const SHRINK: f64 = 0.9;
const MAX_SHRINK_STEPS: usize = 400;

/// Ridge least squares of `targets` on `rows` (each row `dim` long).
fn ridge_fit(rows: &[Vec<f64>], targets: &[f64], dim: usize, ridge: f64) -> Result<Vec<f64>> {
    let mut xtx = vec![0.0; dim * dim];
    let mut xty = vec![0.0; dim];
    for (row, &y) in rows.iter().zip(targets) {
        for i in 0..dim {
            xty[i] += row[i] * y;
            for j in 0..dim {
                xtx[i * dim + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..dim {
        xtx[i * dim + i] += ridge;
    }
    solve(xtx, xty, dim)
}

/// Starting point of a chain: equal weights, allocations by quantile bins of
/// the absolute residuals of a global AR(p) fit, common mean and precision
/// from the sample moments, and per-component ridge AR fits shrunk towards
/// zero until the model is stable.
pub fn initial_state(series: &TimeSeries, g: usize, orders: &[usize], hyper: &Hyperparams) -> Result<ChainState> {
    if g == 0 || orders.len() != g {
        return Err(MarError::InvalidSpec(format!("need {g} orders, got {}", orders.len())));
    }
    if orders.iter().any(|&o| o == 0 || o > hyper.p_max) {
        return Err(MarError::InvalidSpec(format!("orders must lie in 1..={}", hyper.p_max)));
    }
    let p = *orders.iter().max().unwrap_or(&1);
    let start = hyper.start.unwrap_or(p);
    if start < p {
        return Err(MarError::InvalidSpec(format!("cannot condition on {start} < p = {p} observations")));
    }
    let y = series.values();
    if y.len() <= start {
        return Err(MarError::InvalidSeries(format!(
            "series of length {} leaves nothing to model after conditioning on {start}",
            y.len()
        )));
    }
    let (ybar, yvar) = mean_var(y);
    if yvar <= 0.0 {
        return Err(MarError::InvalidSeries("series is constant".into()));
    }
    let centre = if hyper.fixed_shift { 0.0 } else { ybar };

    // global AR(p) on the centred series
    let times: Vec<usize> = (start..y.len()).collect();
    let lag_rows = |t: usize, order: usize| -> Vec<f64> { (1..=order).map(|i| y[t - i] - centre).collect() };
    let rows: Vec<Vec<f64>> = times.iter().map(|&t| lag_rows(t, p)).collect();
    let targets: Vec<f64> = times.iter().map(|&t| y[t] - centre).collect();
    let global = ridge_fit(&rows, &targets, p, RIDGE * times.len() as f64)?;
    let residuals: Vec<f64> = rows
        .iter()
        .zip(&targets)
        .map(|(r, yt)| yt - r.iter().zip(&global).map(|(a, b)| a * b).sum::<f64>())
        .collect();

    let mut order_idx: Vec<usize> = (0..times.len()).collect();
    order_idx.sort_by(|&a, &b| residuals[a].abs().total_cmp(&residuals[b].abs()));
    let mut labels = vec![0; times.len()];
    for (rank, &i) in order_idx.iter().enumerate() {
        labels[i] = (rank * g / times.len()).min(g - 1);
    }
    let alloc = LatentAllocation::new(labels, g, start)?;

    let mut ar = Vec::with_capacity(g);
    for (k, &order) in orders.iter().enumerate() {
        let idx: Vec<usize> = (0..times.len()).filter(|&i| alloc.labels()[i] == k).collect();
        let rows: Vec<Vec<f64>> = idx.iter().map(|&i| lag_rows(times[i], order)).collect();
        let targets: Vec<f64> = idx.iter().map(|&i| targets[i]).collect();
        let fit = ridge_fit(&rows, &targets, order, RIDGE * (idx.len().max(1)) as f64)
            .unwrap_or_else(|_| vec![0.0; order]);
        ar.push(fit);
    }

    let means = vec![centre; g];
    let scale = crate::math::sqrt(yvar);
    let build = |ar: &[Vec<f64>]| -> Result<MarSpec> {
        let shifts = ar.iter().map(|c| shift_from_mean(centre, c)).collect();
        MarSpec::new(vec![1.0 / g as f64; g], shifts, ar.to_vec(), vec![scale; g])
    };
    let mut spec = build(&ar)?;
    let mut steps = 0;
    while !is_stable(&spec)?.stable {
        steps += 1;
        if steps > MAX_SHRINK_STEPS {
            ar = orders.iter().map(|&o| vec![0.0; o]).collect();
        } else {
            for c in ar.iter_mut() {
                for v in c.iter_mut() {
                    *v *= SHRINK;
                }
            }
        }
        spec = build(&ar)?;
    }
    let tau: f64 = 1.0 / yvar;
    let lambda = (hyper.a + g as f64 * hyper.c) / (hyper.b + g as f64 * tau);
    Ok(ChainState { spec, means, alloc, lambda, iteration: 0 })
}
