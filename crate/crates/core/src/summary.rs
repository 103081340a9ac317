//! Posterior summaries of scalar parameter traces: means, standard errors,
//! shortest-interval highest posterior density regions, Gaussian kernel
//! density grids and pointwise averages of such grids.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{MarError, Result};
use crate::math::{self, mean_var, quantile_sorted, sqrt};
use crate::sampler::Draw;

/// Fewest draws [`summarize`] accepts.
pub const MIN_SUMMARY_DRAWS: usize = 100;
/// Number of abscissae on every density grid.
pub const GRID_POINTS: usize = 512;
/// Probability mass of the reported HPD region.
pub const HPD_MASS: f64 = 0.90;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParameterSummary {
    pub name: String,
    pub posterior_mean: f64,
    /// Standard deviation of the draws.
    pub standard_error: f64,
    pub hpdr_90: (f64, f64),
    /// Location of the maximum of the kernel density estimate.
    pub hd_value: f64,
}

/// Ordinates of a density on equally spaced abscissae.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DensityGrid {
    pub abscissae: Vec<f64>,
    pub ordinates: Vec<f64>,
}

impl DensityGrid {
    /// `GRID_POINTS` equally spaced abscissae spanning `[l, u]`, zero ordinates.
    pub fn zeros(l: f64, u: f64) -> Result<Self> {
        let abscissae = grid_abscissae(l, u)?;
        let ordinates = alloc::vec![0.0; abscissae.len()];
        Ok(DensityGrid { abscissae, ordinates })
    }

    /// Trapezoid-rule integral of the ordinates.
    pub fn integral(&self) -> f64 {
        self.abscissae
            .windows(2)
            .zip(self.ordinates.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }

    /// Abscissa of the largest ordinate (first on ties).
    pub fn argmax(&self) -> f64 {
        let mut best = 0;
        for (i, &v) in self.ordinates.iter().enumerate() {
            if v > self.ordinates[best] {
                best = i;
            }
        }
        self.abscissae[best]
    }

    /// Indices of strict interior local maxima.
    pub fn local_maxima(&self) -> Vec<usize> {
        let y = &self.ordinates;
        (1..y.len().saturating_sub(1)).filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1]).collect()
    }

    pub fn step(&self) -> f64 {
        self.abscissae[1] - self.abscissae[0]
    }
}

/// The `GRID_POINTS` equally spaced points of `[l, u]`.
pub fn grid_abscissae(l: f64, u: f64) -> Result<Vec<f64>> {
    if !(l.is_finite() && u.is_finite() && u > l) {
        return Err(MarError::InvalidSpec(format!("density grid needs l < u, got [{l}, {u}]")));
    }
    let step = (u - l) / (GRID_POINTS - 1) as f64;
    Ok((0..GRID_POINTS).map(|i| if i == GRID_POINTS - 1 { u } else { l + step * i as f64 }).collect())
}

/// Mean, standard deviation, 90% HPD region and density mode of one trace.
pub fn summarize(name: &str, draws: &[f64]) -> Result<ParameterSummary> {
    if draws.len() < MIN_SUMMARY_DRAWS {
        return Err(MarError::InsufficientDraws { needed: MIN_SUMMARY_DRAWS, got: draws.len() });
    }
    if draws.iter().any(|x| !x.is_finite()) {
        return Err(MarError::NonFinite(format!("draws of {name}")));
    }
    let (mean, var) = mean_var(draws);
    let hpdr_90 = hpd_interval(draws, HPD_MASS)?;
    let (lo, hi) = extent(draws);
    let hd_value = if hi > lo { density_grid(draws, lo, hi)?.argmax() } else { lo };
    Ok(ParameterSummary { name: name.into(), posterior_mean: mean, standard_error: sqrt(var), hpdr_90, hd_value })
}

/// Shortest interval between two order statistics that contains at least
/// `ceil(mass * n)` draws; the leftmost such interval on ties.
pub fn hpd_interval(draws: &[f64], mass: f64) -> Result<(f64, f64)> {
    if draws.is_empty() {
        return Err(MarError::InsufficientDraws { needed: 1, got: 0 });
    }
    if !(mass > 0.0 && mass <= 1.0) {
        return Err(MarError::InvalidSpec(format!("HPD mass must lie in (0, 1], got {mass}")));
    }
    let sorted = sorted(draws);
    let n = sorted.len();
    let k = (libm::ceil(mass * n as f64) as usize).clamp(1, n);
    let mut best = 0;
    for i in 1..=n - k {
        if sorted[i + k - 1] - sorted[i] < sorted[best + k - 1] - sorted[best] {
            best = i;
        }
    }
    Ok((sorted[best], sorted[best + k - 1]))
}

/// Silverman's rule of thumb `0.9 min(sd, IQR / 1.34) n^(-1/5)`, falling
/// back to the standard deviation when the interquartile range is zero.
pub fn silverman_bandwidth(draws: &[f64]) -> f64 {
    let (_, var) = mean_var(draws);
    let sd = sqrt(var);
    let sorted = sorted(draws);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * libm::pow(draws.len() as f64, -0.2)
}

/// Gaussian kernel density estimate with Silverman's bandwidth on the
/// 512-point grid over `[l, u]`.
pub fn density_grid(draws: &[f64], l: f64, u: f64) -> Result<DensityGrid> {
    if draws.len() < 2 {
        return Err(MarError::InsufficientDraws { needed: 2, got: draws.len() });
    }
    let mut grid = DensityGrid::zeros(l, u)?;
    let h = silverman_bandwidth(draws);
    if !(h > 0.0 && h.is_finite()) {
        return Err(MarError::Estimation("kernel bandwidth is zero: the draws are constant".into()));
    }
    let norm = 1.0 / (draws.len() as f64 * h);
    for (x, y) in grid.abscissae.iter().zip(grid.ordinates.iter_mut()) {
        *y = norm * draws.iter().map(|d| math::std_normal_pdf((x - d) / h)).sum::<f64>();
    }
    Ok(grid)
}

/// Pointwise mean of grids sharing the same abscissae.
pub fn average_density(grids: &[DensityGrid]) -> Result<DensityGrid> {
    let first = grids.first().ok_or(MarError::InsufficientDraws { needed: 1, got: 0 })?;
    if grids.iter().any(|g| g.abscissae != first.abscissae || g.ordinates.len() != first.ordinates.len()) {
        return Err(MarError::InvalidSpec("averaged density grids must share their abscissae".into()));
    }
    let m = grids.len() as f64;
    let ordinates = (0..first.ordinates.len())
        .map(|i| grids.iter().map(|g| g.ordinates[i]).sum::<f64>() / m)
        .collect();
    Ok(DensityGrid { abscissae: first.abscissae.clone(), ordinates })
}

/// Named scalar traces of a fixed-order chain: for each component `k`
/// (1-based in the names) `pi_k`, `mu_k`, `phi_k_0`, `phi_k_i`, `sigma_k`.
pub fn parameter_traces(draws: &[Draw]) -> Result<Vec<(String, Vec<f64>)>> {
    let first = draws.first().ok_or(MarError::InsufficientDraws { needed: 1, got: 0 })?;
    let orders = first.spec.orders();
    if draws.iter().any(|d| d.spec.orders() != orders) {
        return Err(MarError::InvalidSpec("parameter traces need a fixed-order chain".into()));
    }
    let mut traces: Vec<(String, Vec<f64>)> = Vec::new();
    for (k, &p) in orders.iter().enumerate() {
        let c = k + 1;
        traces.push((format!("pi_{c}"), draws.iter().map(|d| d.spec.weights()[k]).collect()));
        traces.push((format!("mu_{c}"), draws.iter().map(|d| d.means[k]).collect()));
        traces.push((format!("phi_{c}_0"), draws.iter().map(|d| d.spec.shifts()[k]).collect()));
        for i in 0..p {
            traces.push((format!("phi_{c}_{}", i + 1), draws.iter().map(|d| d.spec.ar(k)[i]).collect()));
        }
        traces.push((format!("sigma_{c}"), draws.iter().map(|d| d.spec.scales()[k]).collect()));
    }
    Ok(traces)
}

/// [`summarize`] applied to every trace of [`parameter_traces`].
pub fn summarize_draws(draws: &[Draw]) -> Result<Vec<ParameterSummary>> {
    parameter_traces(draws)?.iter().map(|(name, trace)| summarize(name, trace)).collect()
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn extent(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MarSpec;
    use crate::rng::rng_from_seed;
    use alloc::vec;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn constant_draws_give_degenerate_summary() {
        let s = summarize("c", &[2.5; 150]).unwrap();
        assert_eq!(s.posterior_mean, 2.5);
        assert_eq!(s.standard_error, 0.0);
        assert_eq!(s.hpdr_90, (2.5, 2.5));
        assert_eq!(s.hd_value, 2.5);
    }

    #[test]
    fn too_few_draws_is_an_error() {
        assert_eq!(
            summarize("x", &[0.0; 99]),
            Err(MarError::InsufficientDraws { needed: 100, got: 99 })
        );
    }

    #[test]
    fn normal_hpd_matches_quantiles() {
        let xs = normals(1_000_000, 3);
        let (lo, hi) = hpd_interval(&xs, 0.9).unwrap();
        // Standard normal 5% / 95% quantiles.
        assert!((lo + 1.644_853_626_951_472).abs() < 0.02, "{lo}");
        assert!((hi - 1.644_853_626_951_472).abs() < 0.02, "{hi}");
    }

    #[test]
    fn hpd_is_the_shortest_covering_interval() {
        let mut rng = rng_from_seed(11);
        let xs: Vec<f64> = (0..400).map(|_| libm::exp(rng.random::<f64>() * 3.0)).collect();
        let (lo, hi) = hpd_interval(&xs, 0.9).unwrap();
        let mut s = xs.clone();
        s.sort_by(f64::total_cmp);
        let inside = xs.iter().filter(|&&x| x >= lo && x <= hi).count();
        assert!(inside as f64 >= 0.9 * xs.len() as f64);
        // Brute force over all intervals between order statistics.
        let k = 360;
        let shortest = (0..=s.len() - k).map(|i| s[i + k - 1] - s[i]).fold(f64::INFINITY, f64::min);
        assert_eq!(hi - lo, shortest);
        let median = quantile_sorted(&s, 0.5);
        assert!(lo <= median && median <= hi);
    }

    #[test]
    fn uniform_kde_is_flat_in_the_interior() {
        let mut rng = rng_from_seed(5);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let grid = density_grid(&xs, 0.0, 1.0).unwrap();
        assert_eq!(grid.abscissae.len(), GRID_POINTS);
        for (x, y) in grid.abscissae.iter().zip(&grid.ordinates) {
            if (0.1..=0.9).contains(x) {
                assert!((y - 1.0).abs() < 0.1, "{x} {y}");
            }
        }
    }

    #[test]
    fn normal_kde_peaks_at_zero_and_integrates_to_one() {
        // Symmetrised sample: the estimate is then exactly even.
        let mut xs = normals(10_000, 9);
        xs.extend(xs.clone().iter().map(|x| -x));
        let grid = density_grid(&xs, -6.0, 6.0).unwrap();
        assert!(grid.argmax().abs() <= grid.step(), "{}", grid.argmax());
        assert!((grid.integral() - 1.0).abs() < 0.02);
    }

    #[test]
    fn separated_clusters_are_bimodal_like_the_histogram() {
        let mut xs = normals(5_000, 1);
        xs.extend(normals(5_000, 2).iter().map(|x| x + 8.0));
        let grid = density_grid(&xs, -5.0, 13.0).unwrap();
        let maxima = grid.local_maxima();
        assert_eq!(maxima.len(), 2, "{maxima:?}");
        // Histogram oracle: the fullest unit bins sit at the cluster centres.
        let mut bins = [0usize; 18];
        for x in &xs {
            let b = libm::floor(x + 5.0) as isize;
            if (0..18).contains(&b) {
                bins[b as usize] += 1;
            }
        }
        let mode_bin = |range: core::ops::Range<usize>| range.max_by_key(|&i| bins[i]).unwrap() as f64 - 5.0 + 0.5;
        for (&i, centre) in maxima.iter().zip([mode_bin(0..9), mode_bin(9..18)]) {
            assert!((grid.abscissae[i] - centre).abs() <= 1.0);
        }
    }

    #[test]
    fn bad_range_is_rejected() {
        assert!(density_grid(&[0.0, 1.0], 1.0, 1.0).is_err());
        assert!(density_grid(&[0.0, 1.0], 2.0, 1.0).is_err());
    }

    #[test]
    fn averaging_is_pointwise() {
        let a = density_grid(&normals(500, 1), -4.0, 4.0).unwrap();
        let b = density_grid(&normals(500, 2), -4.0, 4.0).unwrap();
        assert_eq!(average_density(&[a.clone(), a.clone()]).unwrap(), a);
        let mid = average_density(&[a.clone(), b.clone()]).unwrap();
        for i in 0..GRID_POINTS {
            assert!((mid.ordinates[i] - 0.5 * (a.ordinates[i] + b.ordinates[i])).abs() < 1e-15);
        }
        assert!((mid.integral() - 0.5 * (a.integral() + b.integral())).abs() < 1e-12);
        let c = density_grid(&normals(500, 2), -3.0, 4.0).unwrap();
        assert!(average_density(&[a, c]).is_err());
    }

    #[test]
    fn traces_follow_component_layout() {
        let spec = MarSpec::new(vec![0.3, 0.7], vec![0.1, 0.2], vec![vec![0.5], vec![0.1, -0.2]], vec![1.0, 2.0]).unwrap();
        let draw = Draw { spec, means: vec![0.2, 0.2 / 1.1], lambda: 1.0 };
        let traces = parameter_traces(&[draw.clone(), draw]).unwrap();
        let names: Vec<&str> = traces.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(
            names,
            ["pi_1", "mu_1", "phi_1_0", "phi_1_1", "sigma_1", "pi_2", "mu_2", "phi_2_0", "phi_2_1", "phi_2_2", "sigma_2"]
        );
        assert_eq!(traces[9].1, vec![-0.2, -0.2]);
    }
}
