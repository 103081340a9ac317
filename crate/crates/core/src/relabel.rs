//! Post-hoc correction of label switching.
//!
//! Cluster centres and variances of a parameter subset are initialised from
//! the first `m` draws. Every later draw is relabelled by the permutation of
//! its components that minimises the variance-normalised squared distance to
//! the current centres, and the centres are then updated recursively with the
//! relabelled draw. The winning permutation is applied to every parameter
//! block of the draw.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{MarError, Result};
use crate::sampler::{ChainOutput, Draw};

pub const DEFAULT_WARM_START: usize = 200;

/// A warm-start coordinate whose variance exceeds this multiple of the
/// full relabelled chain's variance suggests a switch inside the warm start.
pub const WARM_START_VARIANCE_RATIO: f64 = 2.0;

/// Per-component parameters that make up the clustering vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParameterSubset {
    pub weights: bool,
    pub scales: bool,
    pub means: bool,
}

impl ParameterSubset {
    pub fn per_component(&self) -> usize {
        self.weights as usize + self.scales as usize + self.means as usize
    }
}

impl Default for ParameterSubset {
    fn default() -> Self {
        ParameterSubset { weights: true, scales: true, means: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RelabelConfig {
    /// Number of leading draws used to initialise the centres.
    pub m: usize,
    pub subset: ParameterSubset,
}

impl Default for RelabelConfig {
    fn default() -> Self {
        RelabelConfig { m: DEFAULT_WARM_START, subset: ParameterSubset::default() }
    }
}

impl RelabelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(MarError::InvalidSpec(format!("warm start needs m >= 2, got {}", self.m)));
        }
        if self.subset.per_component() == 0 {
            return Err(MarError::InvalidSpec("relabelling subset is empty".into()));
        }
        Ok(())
    }

    /// Coordinate count `q` for `g` components.
    pub fn q(&self, g: usize) -> usize {
        self.subset.per_component() * g
    }
}

/// Running centres and (biased) variances of the clustering coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterCentres {
    pub centre: Vec<f64>,
    pub variance: Vec<f64>,
    /// Number of draws absorbed so far.
    pub count: usize,
}

/// Clustering coordinates of `draw` after relabelling by `perm`, component-major.
pub fn coordinates(draw: &Draw, subset: &ParameterSubset, perm: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(subset.per_component() * perm.len());
    for &k in perm {
        if subset.weights {
            out.push(draw.spec.weights()[k]);
        }
        if subset.scales {
            out.push(draw.spec.scales()[k]);
        }
        if subset.means {
            out.push(draw.means[k]);
        }
    }
    out
}

fn identity(g: usize) -> Vec<usize> {
    (0..g).collect()
}

/// All permutations of `0..g` in lexicographic order.
pub fn permutations(g: usize) -> Vec<Vec<usize>> {
    let mut current = identity(g);
    let mut all = vec![current.clone()];
    loop {
        // next lexicographic permutation
        let Some(i) = (1..g).rev().find(|&i| current[i - 1] < current[i]) else {
            return all;
        };
        let j = (i..g).rev().find(|&j| current[j] > current[i - 1]).expect("a larger element exists");
        current.swap(i - 1, j);
        current[i..].reverse();
        all.push(current.clone());
    }
}

/// Coordinate-wise mean and `1/m` variance of the warm-start draws.
pub fn init_centres(draws: &[Draw], config: &RelabelConfig) -> Result<ClusterCentres> {
    config.validate()?;
    if draws.len() < config.m {
        return Err(MarError::InsufficientDraws { needed: config.m, got: draws.len() });
    }
    let g = draws[0].spec.g();
    let id = identity(g);
    let warm: Vec<Vec<f64>> = draws[..config.m].iter().map(|d| coordinates(d, &config.subset, &id)).collect();
    let q = config.q(g);
    let m = config.m as f64;
    let centre: Vec<f64> = (0..q).map(|i| warm.iter().map(|v| v[i]).sum::<f64>() / m).collect();
    let variance: Vec<f64> =
        (0..q).map(|i| warm.iter().map(|v| (v[i] - centre[i]) * (v[i] - centre[i])).sum::<f64>() / m).collect();
    if let Some(i) = variance.iter().position(|v| !(*v > 0.0)) {
        return Err(MarError::Estimation(format!(
            "clustering coordinate {i} has zero variance over the first {} draws; \
             use a larger warm start or a different parameter subset",
            config.m
        )));
    }
    Ok(ClusterCentres { centre, variance, count: config.m })
}

/// Normalised squared distance of `coords` to the centres.
pub fn normalised_distance(coords: &[f64], centres: &ClusterCentres) -> f64 {
    coords
        .iter()
        .zip(centres.centre.iter().zip(&centres.variance))
        .map(|(x, (c, v))| (x - c) * (x - c) / v)
        .sum()
}

/// Permutations under which the posterior sampled by `draws` is invariant.
/// When every draw has the same orders the model is fixed-order and only
/// permutations keeping each component's order in place qualify; when the
/// orders vary (reversible-jump output) orders travel with their components
/// and every permutation qualifies.
pub fn admissible_permutations(draws: &[Draw]) -> Vec<Vec<usize>> {
    let g = draws.first().map_or(1, |d| d.spec.g());
    let orders = draws.first().map(|d| d.spec.orders()).unwrap_or_default();
    let fixed = draws.iter().all(|d| d.spec.orders() == orders);
    permutations(g)
        .into_iter()
        .filter(|perm| !fixed || perm.iter().enumerate().all(|(j, &k)| orders[k] == orders[j]))
        .collect()
}

/// The candidate permutation minimising the normalised distance; ties go to
/// the earliest candidate.
pub fn assign_permutation(
    draw: &Draw,
    centres: &ClusterCentres,
    subset: &ParameterSubset,
    candidates: &[Vec<usize>],
) -> Vec<usize> {
    let mut best = (f64::INFINITY, identity(draw.spec.g()));
    for perm in candidates {
        let d = normalised_distance(&coordinates(draw, subset, perm), centres);
        if d < best.0 {
            best = (d, perm.clone());
        }
    }
    best.1
}

/// Absorbs one relabelled draw (given by its coordinates) into the centres.
pub fn update_centres(centres: &ClusterCentres, coords: &[f64]) -> ClusterCentres {
    let n = (centres.count + 1) as f64;
    let keep = (n - 1.0) / n;
    let mut centre = Vec::with_capacity(coords.len());
    let mut variance = Vec::with_capacity(coords.len());
    for ((x, old), s2) in coords.iter().zip(&centres.centre).zip(&centres.variance) {
        let new = keep * old + x / n;
        variance.push(keep * s2 + keep * (old - new) * (old - new) + (x - new) * (x - new) / n);
        centre.push(new);
    }
    ClusterCentres { centre, variance, count: centres.count + 1 }
}

/// Relabelled draws together with the permutation applied to each.
#[derive(Debug, Clone, PartialEq)]
pub struct Relabelling {
    pub draws: Vec<Draw>,
    pub permutations: Vec<Vec<usize>>,
    pub centres: ClusterCentres,
    pub warnings: Vec<String>,
}

pub fn relabel_draws(draws: &[Draw], config: &RelabelConfig) -> Result<Relabelling> {
    let mut centres = init_centres(draws, config)?;
    let g = draws[0].spec.g();
    let warm_variance = centres.variance.clone();
    let mut out = Vec::with_capacity(draws.len());
    let mut perms = Vec::with_capacity(draws.len());
    let candidates = admissible_permutations(draws);
    for d in &draws[..config.m] {
        out.push(d.clone());
        perms.push(identity(g));
    }
    for d in &draws[config.m..] {
        let perm = assign_permutation(d, &centres, &config.subset, &candidates);
        let relabelled = d.permuted(&perm);
        centres = update_centres(&centres, &coordinates(&relabelled, &config.subset, &identity(g)));
        out.push(relabelled);
        perms.push(perm);
    }
    let mut warnings = Vec::new();
    for (i, (w, f)) in warm_variance.iter().zip(&centres.variance).enumerate() {
        if *w > WARM_START_VARIANCE_RATIO * f {
            warnings.push(format!(
                "warm-start variance of clustering coordinate {i} is {:.2}x the full-chain variance; \
                 labels may have switched within the first {} draws",
                w / f,
                config.m
            ));
        }
    }
    Ok(Relabelling { draws: out, permutations: perms, centres, warnings })
}

/// Relabels a chain; diagnostics are appended to its warnings. Per-component
/// acceptance rates and proposal precisions keep their sampler labels.
pub fn relabel_chain(output: &ChainOutput, config: &RelabelConfig) -> Result<ChainOutput> {
    let r = relabel_draws(&output.draws, config)?;
    let mut relabelled = output.clone();
    relabelled.draws = r.draws;
    relabelled.warnings.extend(r.warnings);
    Ok(relabelled)
}
