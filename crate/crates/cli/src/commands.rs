//! The five commands. Each validates its configuration, runs, writes its
//! outputs plus `manifest.json` into the output directory, and returns the
//! manifest.

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use mar_core::evidence::{best_g, marginal_log_likelihood, EvidenceResult};
use mar_core::forecast::{average_forecast, covering_grid, predictive_mixture, thinned_indices};
use mar_core::model::simulate_path_seeded;
use mar_core::relabel::relabel_chain;
use mar_core::sampler::run_chain;
use mar_core::summary::summarize_draws;
use mar_core::{derive_seed, is_stable, presets, TimeSeries};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, SimModel};
use crate::data::{read_draws_file, read_series, write_columns, write_draws, write_json, write_series};
use crate::manifest::RunManifest;
use crate::replicate::{model_a_truth, replicate_study};

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "MAR_WORKERS";

/// Tolerance on the integral of a written forecast grid.
pub const GRID_INTEGRAL_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Fit,
    Select,
    Forecast,
    Replicate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Fit => "fit",
            Command::Select => "select",
            Command::Forecast => "forecast",
            Command::Replicate => "replicate",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "simulate" => Command::Simulate,
            "fit" => Command::Fit,
            "select" => Command::Select,
            "forecast" => Command::Forecast,
            "replicate" => Command::Replicate,
            _ => bail!("unknown command {name:?}"),
        })
    }
}

/// Worker count from `MAR_WORKERS`, defaulting to the available cores.
pub fn worker_count() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => {
            let n: usize = v.trim().parse().with_context(|| format!("{WORKERS_ENV}={v:?}"))?;
            if n == 0 {
                bail!("{WORKERS_ENV} must be positive");
            }
            Ok(n)
        }
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Validates, runs `command` on a dedicated pool and writes the manifest.
pub fn run(command: Command, mut config: RunConfig) -> Result<RunManifest> {
    config.resolve_recipe();
    config.validate()?;
    let workers = worker_count()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    fs::create_dir_all(&config.output).with_context(|| format!("creating {}", config.output.display()))?;
    let started = Instant::now();
    let mut manifest = RunManifest::new(command.name(), &config, workers);
    pool.install(|| match command {
        Command::Simulate => simulate(&config, &mut manifest),
        Command::Fit => fit(&config, &mut manifest),
        Command::Select => select(&config, &mut manifest),
        Command::Forecast => forecast(&config, &mut manifest),
        Command::Replicate => replicate(&config, &mut manifest),
    })?;
    manifest.finish(started);
    manifest.outputs.push("manifest.json".into());
    manifest.write(&config.output.join("manifest.json"))?;
    Ok(manifest)
}

fn out(config: &RunConfig, name: &str, manifest: &mut RunManifest) -> std::path::PathBuf {
    manifest.outputs.push(name.into());
    config.output.join(name)
}

fn load_input(config: &RunConfig, manifest: &mut RunManifest) -> Result<TimeSeries> {
    let path = config.input.as_deref().ok_or_else(|| anyhow!("`input` is required for this command"))?;
    let (series, raw_len) = read_series(path, config.log, config.difference)?;
    if let Some(w) = config.recipe.and_then(|r| r.length_warning(raw_len)) {
        manifest.warnings.push(w);
    }
    Ok(series)
}

fn core<T>(r: mar_core::Result<T>) -> Result<T> {
    r.map_err(|e| anyhow!("{e}"))
}

fn simulate(config: &RunConfig, manifest: &mut RunManifest) -> Result<()> {
    let (spec, default_n) = match config.model {
        SimModel::A => (presets::model_a(), presets::MODEL_A_LEN),
        SimModel::B => (presets::model_b(), presets::MODEL_B_LEN),
        SimModel::User => (config.user_spec()?, presets::MODEL_A_LEN),
    };
    let report = core(is_stable(&spec))?;
    if !report.stable {
        bail!("refusing to simulate a model that is not stable: spectral radius {}", report.spectral_radius);
    }
    let n = config.n.unwrap_or(default_n);
    manifest.seeds.insert("path".into(), config.seed);
    let series = core(simulate_path_seeded(&spec, n, config.sim_burn_in, config.seed))?;
    write_series(&out(config, "series.csv", manifest), &series)?;
    manifest.checks.insert("spectral_radius".into(), report.spectral_radius);
    Ok(())
}

fn fit(config: &RunConfig, manifest: &mut RunManifest) -> Result<()> {
    let series = load_input(config, manifest)?;
    let hyper = config.hyperparams(&series)?;
    manifest.seeds.insert("chain".into(), config.seed);
    let chain = core(run_chain(&series, config.g, &config.fit_orders(), &hyper, config.seed))?;
    let chain = if config.g > 1 { core(relabel_chain(&chain, &config.relabel()))? } else { chain };
    let file = fs::File::create(out(config, "draws.csv", manifest))?;
    write_draws(std::io::BufWriter::new(file), &chain.draws)?;
    let summaries = core(summarize_draws(&chain.draws))?;
    write_json(&out(config, "summaries.json", manifest), &summaries)?;
    manifest.stability_rejections.push(chain.stability_rejections);
    manifest.acceptance_rates.push(chain.acceptance.clone());
    manifest.warnings.extend(chain.warnings);
    Ok(())
}

/// One row of the model-selection report.
#[derive(Debug, Clone, Serialize)]
pub struct SelectRow {
    pub g: usize,
    pub orders: Vec<usize>,
    pub preference: f64,
    pub log_marginal: f64,
    pub log_marginal_se: f64,
}

fn select(config: &RunConfig, manifest: &mut RunManifest) -> Result<()> {
    let series = load_input(config, manifest)?;
    let hyper = config.hyperparams(&series)?;
    let evidence = config.evidence();
    let candidates: Vec<usize> = (config.g_min..=config.g_max).collect();
    for &g in &candidates {
        manifest.seeds.insert(format!("g{g}"), derive_seed(config.seed, g as u64));
    }
    let table: Vec<EvidenceResult> = candidates
        .par_iter()
        .map(|&g| core(marginal_log_likelihood(&series, g, &hyper, &evidence, derive_seed(config.seed, g as u64))))
        .collect::<Result<_>>()?;
    let rows: Vec<SelectRow> = table
        .iter()
        .map(|r| SelectRow {
            g: r.g,
            orders: r.orders.clone(),
            preference: r.parts.log_order_posterior.exp(),
            log_marginal: r.log_marginal,
            log_marginal_se: r.log_marginal_se,
        })
        .collect();
    let best = best_g(&table);
    manifest.checks.insert("best_g".into(), best as f64);
    write_json(&out(config, "select.json", manifest), &rows)?;
    write_json(&out(config, "evidence.json", manifest), &table)?;
    let path = out(config, "select.csv", manifest);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["g", "orders", "preference", "log_marginal", "log_marginal_se"])?;
    for r in &rows {
        let orders = r.orders.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
        w.write_record([
            r.g.to_string(),
            orders,
            crate::data::fmt_f64(r.preference),
            crate::data::fmt_f64(r.log_marginal),
            crate::data::fmt_f64(r.log_marginal_se),
        ])?;
    }
    w.flush()?;
    for r in table {
        manifest.warnings.extend(r.warnings);
    }
    Ok(())
}

fn forecast(config: &RunConfig, manifest: &mut RunManifest) -> Result<()> {
    let series = load_input(config, manifest)?;
    let draws_path = config.draws.as_deref().ok_or_else(|| anyhow!("`draws` is required for forecast"))?;
    let draws = read_draws_file(draws_path)?;
    let origin = config.origin.unwrap_or(series.len());
    let mode = config.forecast_mode();
    manifest.seeds.insert("monte_carlo".into(), config.seed);
    let used = thinned_indices(draws.len(), config.thin);
    if used.is_empty() {
        bail!("the draws file is empty");
    }
    let mixtures = used
        .par_iter()
        .map(|&i| core(predictive_mixture(&draws[i].spec, &series, origin, config.horizon, mode, derive_seed(config.seed, i as u64))))
        .collect::<Result<Vec<_>>>()?;
    let grid = core(covering_grid(&mixtures))?;
    let per_draw: Vec<Vec<f64>> = mixtures.par_iter().map(|m| grid.iter().map(|&y| m.pdf(y)).collect()).collect();
    let result = core(average_forecast(grid, per_draw, false))?;
    let integral = result.mean_density.integral();
    manifest.checks.insert("integral".into(), integral);
    manifest.checks.insert("draws_used".into(), used.len() as f64);
    if (integral - 1.0).abs() > GRID_INTEGRAL_TOLERANCE {
        manifest.warnings.push(format!("forecast grid integrates to {integral}, not 1 within {GRID_INTEGRAL_TOLERANCE}"));
    }
    write_columns(
        &out(config, "forecast.csv", manifest),
        &["y", "mean", "lo90", "hi90"],
        &[&result.mean_density.abscissae, &result.mean_density.ordinates, &result.lower_90.ordinates, &result.upper_90.ordinates],
    )?;
    Ok(())
}

fn replicate(config: &RunConfig, manifest: &mut RunManifest) -> Result<()> {
    manifest.seeds.insert("master".into(), config.seed);
    let study = replicate_study(config)?;
    for r in &study.replicas {
        manifest.stability_rejections.push(r.chain.stability_rejections);
        manifest.acceptance_rates.push(r.chain.acceptance.clone());
    }
    let path = out(config, "replicate_density.csv", manifest);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["parameter", "x", "density"])?;
    for (name, grid) in &study.averaged {
        for (x, d) in grid.abscissae.iter().zip(&grid.ordinates) {
            w.write_record([name.clone(), crate::data::fmt_f64(*x), crate::data::fmt_f64(*d)])?;
        }
    }
    w.flush()?;
    #[derive(Serialize)]
    struct ModeRow {
        parameter: String,
        mode: f64,
        truth: Option<f64>,
        integral: f64,
    }
    let truth = model_a_truth();
    let rows: Vec<ModeRow> = study
        .averaged
        .iter()
        .map(|(n, g)| ModeRow { parameter: n.clone(), mode: g.argmax(), truth: truth.get(n).copied(), integral: g.integral() })
        .collect();
    write_json(&out(config, "replicate_modes.json", manifest), &rows)?;
    Ok(())
}

/// Reads back a manifest and reruns its command into `output`.
pub fn rerun(manifest_path: &Path, output: &Path) -> Result<RunManifest> {
    let manifest = RunManifest::read(manifest_path)?;
    let mut config = manifest.config()?;
    config.output = output.to_path_buf();
    run(Command::from_name(&manifest.command)?, config)
}
