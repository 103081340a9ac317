//! Consistency study: simulate many Model A datasets, fit each, and average
//! the per-replica posterior densities of every parameter on a common grid.

use std::collections::BTreeMap;

use anyhow::{anyhow, Result};
use mar_core::model::simulate_path_seeded;
use mar_core::presets;
use mar_core::relabel::relabel_chain;
use mar_core::sampler::{run_chain, ChainOutput};
use mar_core::summary::{average_density, density_grid, parameter_traces, DensityGrid};
use mar_core::{derive_seed, MarSpec};
use rayon::prelude::*;

use crate::config::RunConfig;

/// Seed of replica `r`'s simulated dataset.
pub fn data_seed(master: u64, r: usize) -> u64 {
    derive_seed(master, 2 * r as u64)
}

/// Seed of replica `r`'s chain.
pub fn chain_seed(master: u64, r: usize) -> u64 {
    derive_seed(master, 2 * r as u64 + 1)
}

#[derive(Debug, Clone)]
pub struct ReplicaFit {
    pub chain: ChainOutput,
    pub traces: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone)]
pub struct ReplicateOutput {
    pub replicas: Vec<ReplicaFit>,
    /// Averaged density per parameter, in trace order.
    pub averaged: Vec<(String, DensityGrid)>,
}

impl ReplicateOutput {
    /// Abscissa of each averaged density's maximum.
    pub fn modes(&self) -> BTreeMap<String, f64> {
        self.averaged.iter().map(|(n, g)| (n.clone(), g.argmax())).collect()
    }
}

/// Generating values of Model A's parameters by trace name; the unit-root
/// component has no finite mean, so `mu_2` is absent.
pub fn model_a_truth() -> BTreeMap<String, f64> {
    [
        ("pi_1", 0.5),
        ("mu_1", 0.0),
        ("phi_1_0", 0.0),
        ("phi_1_1", -0.5),
        ("sigma_1", 1.0),
        ("pi_2", 0.5),
        ("phi_2_0", 0.0),
        ("phi_2_1", 1.0),
        ("sigma_2", 2.0),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Puts components in ascending order of posterior mean scale so that
/// labels agree across independently fitted replicas.
fn order_by_scale(chain: ChainOutput) -> ChainOutput {
    let g = chain.draws[0].spec.g();
    let mean_scale = |k: usize| chain.draws.iter().map(|d| d.spec.scales()[k]).sum::<f64>();
    let mut perm: Vec<usize> = (0..g).collect();
    perm.sort_by(|&i, &j| mean_scale(i).total_cmp(&mean_scale(j)));
    if perm.iter().enumerate().all(|(j, &k)| j == k) {
        return chain;
    }
    let mut out = chain.clone();
    out.draws = chain.draws.iter().map(|d| d.permuted(&perm)).collect();
    out.acceptance = perm.iter().map(|&k| chain.acceptance[k]).collect();
    if chain.gamma.len() == g {
        out.gamma = perm.iter().map(|&k| chain.gamma[k]).collect();
    }
    out
}

fn fit_replica(config: &RunConfig, spec: &MarSpec, r: usize) -> Result<ReplicaFit> {
    let series = simulate_path_seeded(spec, config.replica_n, config.sim_burn_in, data_seed(config.seed, r))
        .map_err(|e| anyhow!("replica {r}: {e}"))?;
    let hyper = config.hyperparams(&series)?;
    let orders = spec.orders();
    let chain = run_chain(&series, spec.g(), &orders, &hyper, chain_seed(config.seed, r))
        .map_err(|e| anyhow!("replica {r}: {e}"))?;
    let chain = relabel_chain(&chain, &config.relabel()).map_err(|e| anyhow!("replica {r}: {e}"))?;
    let chain = order_by_scale(chain);
    let traces = parameter_traces(&chain.draws).map_err(|e| anyhow!("{e}"))?;
    Ok(ReplicaFit { chain, traces })
}

/// Runs the study on Model A. Replicas run in parallel on the current rayon
/// pool; results do not depend on the number of workers.
pub fn replicate_study(config: &RunConfig) -> Result<ReplicateOutput> {
    let spec = presets::model_a();
    let replicas: Vec<ReplicaFit> =
        (0..config.replicas).into_par_iter().map(|r| fit_replica(config, &spec, r)).collect::<Result<_>>()?;
    let names: Vec<String> = replicas[0].traces.iter().map(|(n, _)| n.clone()).collect();
    let averaged = names
        .par_iter()
        .enumerate()
        .map(|(i, name)| {
            let (lo, hi) = replicas.iter().flat_map(|r| r.traces[i].1.iter()).fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(lo, hi), &x| (lo.min(x), hi.max(x)),
            );
            let grids = replicas
                .iter()
                .map(|r| density_grid(&r.traces[i].1, lo, hi))
                .collect::<mar_core::Result<Vec<_>>>()
                .map_err(|e| anyhow!("{name}: {e}"))?;
            let avg = average_density(&grids).map_err(|e| anyhow!("{name}: {e}"))?;
            Ok((name.clone(), avg))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReplicateOutput { replicas, averaged })
}
