//! Run configuration: a plain-text `key = value` file plus command-line
//! overrides. Unknown keys are rejected and every value is validated before
//! any chain starts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use mar_core::evidence::{EvidenceConfig, OrdinateConfig};
use mar_core::forecast::{ForecastMode, DEFAULT_MC_PATHS, DEFAULT_THIN};
use mar_core::relabel::{ParameterSubset, RelabelConfig, DEFAULT_WARM_START};
use mar_core::rjmcmc::{DeathDensity, OrderMoveConfig, DEFAULT_BIRTH_PROB, DEFAULT_HALF_WIDTH};
use mar_core::sampler::{default_hyperparams, Hyperparams};
use mar_core::{MarSpec, TimeSeries};

use crate::recipes::Recipe;

/// Built-in or user-supplied generating model for `simulate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimModel {
    A,
    B,
    User,
}

impl FromStr for SimModel {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(SimModel::A),
            "b" => Ok(SimModel::B),
            "user" => Ok(SimModel::User),
            _ => bail!("model must be a, b or user, got {s:?}"),
        }
    }
}

impl Display for SimModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SimModel::A => "a",
            SimModel::B => "b",
            SimModel::User => "user",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub output: PathBuf,
    pub difference: bool,
    pub log: bool,
    pub recipe: Option<Recipe>,

    pub model: SimModel,
    pub n: Option<usize>,
    pub sim_burn_in: usize,
    pub weights: Option<Vec<f64>>,
    pub shifts: Option<Vec<f64>>,
    pub ar: Option<Vec<Vec<f64>>>,
    pub scales: Option<Vec<f64>>,

    pub g: usize,
    pub orders: Option<Vec<usize>>,
    pub n_iter: usize,
    pub burn_in: usize,
    pub tune_pilot: usize,
    pub gamma: Option<Vec<f64>>,
    pub fixed_shift: bool,
    pub a: f64,
    pub b: Option<f64>,
    pub c: f64,
    pub zeta: Option<f64>,
    pub kappa: Option<f64>,
    pub dirichlet: Vec<f64>,

    pub p_max: usize,
    pub birth_prob: f64,
    pub half_width: f64,
    pub death_density: DeathDensity,

    pub relabel_m: usize,
    pub relabel_subset: ParameterSubset,

    pub n_j: usize,
    pub n_i: usize,
    pub reduced_burn_in: usize,
    pub g_min: usize,
    pub g_max: usize,

    pub draws: Option<PathBuf>,
    pub origin: Option<usize>,
    pub horizon: usize,
    pub thin: usize,
    pub forecast_mode: String,
    pub mc_paths: usize,

    pub replicas: usize,
    pub replica_n: usize,

    /// Keys given explicitly, in the file or on the command line.
    explicit: BTreeSet<String>,
}

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("seed", "master seed; every stream derives from it"),
    ("input", "one-column CSV series (headerless or one header line)"),
    ("output", "directory for all outputs"),
    ("difference", "take first differences of the input"),
    ("log", "take natural logs of the input (applied before differencing)"),
    ("recipe", "model_a | model_b | ibm | lynx: dataset defaults"),
    ("model", "simulate: a | b | user"),
    ("n", "simulate: series length (default 300 for a, 600 for b)"),
    ("sim_burn_in", "simulate: discarded warm-up steps"),
    ("weights", "user model: mixing weights, comma separated"),
    ("shifts", "user model: shifts phi_k0, comma separated"),
    ("ar", "user model: coefficients, components separated by ';'"),
    ("scales", "user model: component standard deviations"),
    ("g", "number of components"),
    ("orders", "component orders, comma separated (default all 1)"),
    ("n_iter", "sweeps including burn-in"),
    ("burn_in", "discarded sweeps"),
    ("tune_pilot", "pilot sweeps for RWM tuning (0 disables tuning)"),
    ("gamma", "RWM proposal precision, one value or one per component"),
    ("fixed_shift", "pin every shift phi_k0 at zero"),
    ("a", "Gamma shape of the lambda prior"),
    ("b", "Gamma rate of the lambda prior (default 10 / range^2)"),
    ("c", "Gamma shape of the precision priors"),
    ("zeta", "prior mean of the component means (default mid-range)"),
    ("kappa", "prior precision of the component means (default 1 / range)"),
    ("dirichlet", "Dirichlet weights, one value or one per component"),
    ("p_max", "largest component order"),
    ("birth_prob", "birth probability at interior orders"),
    ("half_width", "half-width of the uniform birth proposal"),
    ("death_density", "mirror | paper"),
    ("relabel_m", "warm-start draws of the relabelling"),
    ("relabel_subset", "relabelling coordinates: any of weights,scales,means"),
    ("n_j", "reduced-run length for ordinate numerators"),
    ("n_i", "reduced-run length for denominators and averages"),
    ("reduced_burn_in", "discarded sweeps of every reduced run"),
    ("g_min", "select: smallest number of components"),
    ("g_max", "select: largest number of components"),
    ("draws", "forecast: draws CSV written by fit"),
    ("origin", "forecast: number of observations conditioned on (default all)"),
    ("horizon", "forecast: steps ahead"),
    ("thin", "forecast: use every thin-th draw"),
    ("forecast_mode", "exact | mc"),
    ("mc_paths", "Monte Carlo forecast paths per draw"),
    ("replicas", "replicate: number of simulated datasets"),
    ("replica_n", "replicate: length of each simulated dataset"),
];

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            input: None,
            output: PathBuf::from("mar-out"),
            difference: false,
            log: false,
            recipe: None,
            model: SimModel::A,
            n: None,
            sim_burn_in: mar_core::model::DEFAULT_SIMULATION_BURN_IN,
            weights: None,
            shifts: None,
            ar: None,
            scales: None,
            g: 2,
            orders: None,
            n_iter: 20_000,
            burn_in: 10_000,
            tune_pilot: 2_000,
            gamma: None,
            fixed_shift: false,
            a: 0.2,
            b: None,
            c: 2.0,
            zeta: None,
            kappa: None,
            dirichlet: vec![1.0],
            p_max: 5,
            birth_prob: DEFAULT_BIRTH_PROB,
            half_width: DEFAULT_HALF_WIDTH,
            death_density: DeathDensity::Mirror,
            relabel_m: DEFAULT_WARM_START,
            relabel_subset: ParameterSubset::default(),
            n_j: OrdinateConfig::default().n_j,
            n_i: OrdinateConfig::default().n_i,
            reduced_burn_in: OrdinateConfig::default().burn_in,
            g_min: 2,
            g_max: 4,
            draws: None,
            origin: None,
            horizon: 1,
            thin: DEFAULT_THIN,
            forecast_mode: "exact".into(),
            mc_paths: DEFAULT_MC_PATHS,
            replicas: 20,
            replica_n: mar_core::presets::MODEL_A_LEN,
            explicit: BTreeSet::new(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: Display,
{
    value.trim().parse().map_err(|e| anyhow!("{key}: cannot parse {value:?}: {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => bail!("{key}: expected true or false, got {value:?}"),
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: Display,
{
    value.split(',').map(|v| parse(key, v)).collect()
}

fn parse_ar(value: &str) -> Result<Vec<Vec<f64>>> {
    value.split(';').map(|c| parse_list("ar", c)).collect()
}

fn join<T: Display>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Parses `key = value` lines; blank lines and `#` comments are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut config = RunConfig::default();
        config.apply_text(text)?;
        Ok(config)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.apply_assignment(line).with_context(|| format!("line {}", lineno + 1))?;
        }
        Ok(())
    }

    /// Applies one `key=value` assignment.
    pub fn apply_assignment(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| anyhow!("expected key=value, got {assignment:?}"))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.seed = parse(key, value)?,
            "input" => self.input = Some(PathBuf::from(value)),
            "output" => self.output = PathBuf::from(value),
            "difference" => self.difference = parse_bool(key, value)?,
            "log" => self.log = parse_bool(key, value)?,
            "recipe" => self.recipe = Some(value.parse()?),
            "model" => self.model = value.parse()?,
            "n" => self.n = Some(parse(key, value)?),
            "sim_burn_in" => self.sim_burn_in = parse(key, value)?,
            "weights" => self.weights = Some(parse_list(key, value)?),
            "shifts" => self.shifts = Some(parse_list(key, value)?),
            "ar" => self.ar = Some(parse_ar(value)?),
            "scales" => self.scales = Some(parse_list(key, value)?),
            "g" => self.g = parse(key, value)?,
            "orders" => self.orders = Some(parse_list(key, value)?),
            "n_iter" => self.n_iter = parse(key, value)?,
            "burn_in" => self.burn_in = parse(key, value)?,
            "tune_pilot" => self.tune_pilot = parse(key, value)?,
            "gamma" => self.gamma = Some(parse_list(key, value)?),
            "fixed_shift" => self.fixed_shift = parse_bool(key, value)?,
            "a" => self.a = parse(key, value)?,
            "b" => self.b = Some(parse(key, value)?),
            "c" => self.c = parse(key, value)?,
            "zeta" => self.zeta = Some(parse(key, value)?),
            "kappa" => self.kappa = Some(parse(key, value)?),
            "dirichlet" => self.dirichlet = parse_list(key, value)?,
            "p_max" => self.p_max = parse(key, value)?,
            "birth_prob" => self.birth_prob = parse(key, value)?,
            "half_width" => self.half_width = parse(key, value)?,
            "death_density" => {
                self.death_density = match value.to_ascii_lowercase().as_str() {
                    "mirror" => DeathDensity::Mirror,
                    "paper" => DeathDensity::PaperLiteral,
                    _ => bail!("death_density must be mirror or paper, got {value:?}"),
                }
            }
            "relabel_m" => self.relabel_m = parse(key, value)?,
            "relabel_subset" => {
                let mut subset = ParameterSubset { weights: false, scales: false, means: false };
                for part in value.split(',').map(str::trim) {
                    match part {
                        "weights" => subset.weights = true,
                        "scales" => subset.scales = true,
                        "means" => subset.means = true,
                        _ => bail!("relabel_subset: unknown block {part:?}"),
                    }
                }
                self.relabel_subset = subset;
            }
            "n_j" => self.n_j = parse(key, value)?,
            "n_i" => self.n_i = parse(key, value)?,
            "reduced_burn_in" => self.reduced_burn_in = parse(key, value)?,
            "g_min" => self.g_min = parse(key, value)?,
            "g_max" => self.g_max = parse(key, value)?,
            "draws" => self.draws = Some(PathBuf::from(value)),
            "origin" => self.origin = Some(parse(key, value)?),
            "horizon" => self.horizon = parse(key, value)?,
            "thin" => self.thin = parse(key, value)?,
            "forecast_mode" => {
                if !matches!(value, "exact" | "mc") {
                    bail!("forecast_mode must be exact or mc, got {value:?}");
                }
                self.forecast_mode = value.into();
            }
            "mc_paths" => self.mc_paths = parse(key, value)?,
            "replicas" => self.replicas = parse(key, value)?,
            "replica_n" => self.replica_n = parse(key, value)?,
            _ => bail!("unknown configuration key {key:?} (see `mar keys`)"),
        }
        self.explicit.insert(key.to_string());
        Ok(())
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    /// Fills keys the user left unset from the recipe, if any.
    pub fn resolve_recipe(&mut self) {
        let Some(recipe) = self.recipe else { return };
        let d = recipe.defaults();
        if !self.is_explicit("difference") {
            self.difference = d.difference;
        }
        if !self.is_explicit("log") {
            self.log = d.log;
        }
        if !self.is_explicit("fixed_shift") {
            self.fixed_shift = d.fixed_shift;
        }
        if !self.is_explicit("g") {
            self.g = d.orders.len();
        }
        if !self.is_explicit("orders") {
            self.orders = Some(d.orders.clone());
        }
        if !self.is_explicit("model") {
            if let Some(m) = d.model {
                self.model = m;
            }
        }
    }

    /// Orders of the fixed-order fit: explicit, or all ones.
    pub fn fit_orders(&self) -> Vec<usize> {
        self.orders.clone().unwrap_or_else(|| vec![1; self.g])
    }

    /// Checks every value; called before any chain starts.
    pub fn validate(&self) -> Result<()> {
        if self.g < 1 {
            bail!("g must be at least 1");
        }
        if self.p_max < 1 {
            bail!("p_max must be at least 1");
        }
        if self.burn_in >= self.n_iter {
            bail!("burn_in ({}) must be below n_iter ({})", self.burn_in, self.n_iter);
        }
        if let Some(gamma) = &self.gamma {
            if gamma.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                bail!("gamma must be positive");
            }
        }
        let orders = self.fit_orders();
        if orders.len() != self.g {
            bail!("orders lists {} components but g = {}", orders.len(), self.g);
        }
        if orders.iter().any(|&p| p == 0) {
            bail!("every order must be at least 1");
        }
        if self.g_min < 1 || self.g_min > self.g_max {
            bail!("need 1 <= g_min <= g_max, got {}..{}", self.g_min, self.g_max);
        }
        if self.horizon < 1 {
            bail!("horizon must be at least 1");
        }
        if self.thin < 1 {
            bail!("thin must be at least 1");
        }
        if self.replicas < 1 {
            bail!("replicas must be at least 1");
        }
        if self.n_j < 1 || self.n_i < 1 {
            bail!("n_j and n_i must be positive");
        }
        self.hyper_template().validate(self.g).map_err(|e| anyhow!("{e}"))?;
        self.order_moves().validate().map_err(|e| anyhow!("{e}"))?;
        self.relabel().validate().map_err(|e| anyhow!("{e}"))?;
        Ok(())
    }

    /// Hyperparameters with placeholder data-driven values, for validation.
    fn hyper_template(&self) -> Hyperparams {
        let series = TimeSeries::new(vec![0.0, 1.0]).expect("two points");
        let mut h = default_hyperparams(&series).expect("non-constant");
        self.override_hyper(&mut h);
        h
    }

    fn override_hyper(&self, h: &mut Hyperparams) {
        h.a = self.a;
        h.c = self.c;
        if let Some(b) = self.b {
            h.b = b;
        }
        if let Some(z) = self.zeta {
            h.zeta = z;
        }
        if let Some(k) = self.kappa {
            h.kappa = k;
        }
        h.dirichlet_weights = self.dirichlet.clone();
        if let Some(gamma) = &self.gamma {
            h.gamma = gamma.clone();
        }
        h.fixed_shift = self.fixed_shift;
        h.p_max = self.p_max;
        h.burn_in = self.burn_in;
        h.n_iter = self.n_iter;
        h.tune_pilot = self.tune_pilot;
    }

    /// Data-driven hyperparameters with the configured overrides.
    pub fn hyperparams(&self, series: &TimeSeries) -> Result<Hyperparams> {
        let mut h = default_hyperparams(series).map_err(|e| anyhow!("{e}"))?;
        self.override_hyper(&mut h);
        Ok(h)
    }

    pub fn order_moves(&self) -> OrderMoveConfig {
        OrderMoveConfig {
            p_max: self.p_max,
            birth_prob: self.birth_prob,
            half_width: self.half_width,
            death_density: self.death_density,
        }
    }

    pub fn relabel(&self) -> RelabelConfig {
        RelabelConfig { m: self.relabel_m, subset: self.relabel_subset }
    }

    pub fn evidence(&self) -> EvidenceConfig {
        let mut e = EvidenceConfig::new(self.p_max);
        e.ordinates = OrdinateConfig { n_j: self.n_j, n_i: self.n_i, burn_in: self.reduced_burn_in };
        e.relabel = self.relabel();
        e.order_moves = self.order_moves();
        e.g_candidates = self.g_max - self.g_min + 1;
        e
    }

    pub fn forecast_mode(&self) -> ForecastMode {
        if self.forecast_mode == "mc" {
            ForecastMode::MonteCarlo { paths: self.mc_paths }
        } else {
            ForecastMode::Exact
        }
    }

    /// The user-specified simulation model.
    pub fn user_spec(&self) -> Result<MarSpec> {
        let need = |name: &str| anyhow!("model=user needs `{name}`");
        let weights = self.weights.clone().ok_or_else(|| need("weights"))?;
        let ar = self.ar.clone().ok_or_else(|| need("ar"))?;
        let scales = self.scales.clone().ok_or_else(|| need("scales"))?;
        let shifts = self.shifts.clone().unwrap_or_else(|| vec![0.0; weights.len()]);
        MarSpec::new(weights, shifts, ar, scales).map_err(|e| anyhow!("{e}"))
    }

    /// Every key with its effective value, for the manifest.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let opt = |v: &Option<String>| v.clone().unwrap_or_else(|| "auto".into());
        let path = |p: &Option<PathBuf>| opt(&p.as_ref().map(|p| p.display().to_string()));
        let subset = {
            let s = self.relabel_subset;
            let parts: Vec<&str> = [("weights", s.weights), ("scales", s.scales), ("means", s.means)]
                .into_iter()
                .filter(|(_, on)| *on)
                .map(|(n, _)| n)
                .collect();
            parts.join(",")
        };
        let pairs: Vec<(&str, String)> = vec![
            ("seed", self.seed.to_string()),
            ("input", path(&self.input)),
            ("output", self.output.display().to_string()),
            ("difference", self.difference.to_string()),
            ("log", self.log.to_string()),
            ("recipe", opt(&self.recipe.map(|r| r.to_string()))),
            ("model", self.model.to_string()),
            ("n", opt(&self.n.map(|v| v.to_string()))),
            ("sim_burn_in", self.sim_burn_in.to_string()),
            ("weights", opt(&self.weights.as_deref().map(join))),
            ("shifts", opt(&self.shifts.as_deref().map(join))),
            ("ar", opt(&self.ar.as_ref().map(|a| a.iter().map(|c| join(c)).collect::<Vec<_>>().join(";")))),
            ("scales", opt(&self.scales.as_deref().map(join))),
            ("g", self.g.to_string()),
            ("orders", join(&self.fit_orders())),
            ("n_iter", self.n_iter.to_string()),
            ("burn_in", self.burn_in.to_string()),
            ("tune_pilot", self.tune_pilot.to_string()),
            ("gamma", opt(&self.gamma.as_deref().map(join))),
            ("fixed_shift", self.fixed_shift.to_string()),
            ("a", self.a.to_string()),
            ("b", opt(&self.b.map(|v| v.to_string()))),
            ("c", self.c.to_string()),
            ("zeta", opt(&self.zeta.map(|v| v.to_string()))),
            ("kappa", opt(&self.kappa.map(|v| v.to_string()))),
            ("dirichlet", join(&self.dirichlet)),
            ("p_max", self.p_max.to_string()),
            ("birth_prob", self.birth_prob.to_string()),
            ("half_width", self.half_width.to_string()),
            (
                "death_density",
                match self.death_density {
                    DeathDensity::Mirror => "mirror".into(),
                    DeathDensity::PaperLiteral => "paper".into(),
                },
            ),
            ("relabel_m", self.relabel_m.to_string()),
            ("relabel_subset", subset),
            ("n_j", self.n_j.to_string()),
            ("n_i", self.n_i.to_string()),
            ("reduced_burn_in", self.reduced_burn_in.to_string()),
            ("g_min", self.g_min.to_string()),
            ("g_max", self.g_max.to_string()),
            ("draws", path(&self.draws)),
            ("origin", opt(&self.origin.map(|v| v.to_string()))),
            ("horizon", self.horizon.to_string()),
            ("thin", self.thin.to_string()),
            ("forecast_mode", self.forecast_mode.clone()),
            ("mc_paths", self.mc_paths.to_string()),
            ("replicas", self.replicas.to_string()),
            ("replica_n", self.replica_n.to_string()),
        ];
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// Reconstructs a configuration from a manifest echo. `auto` values are
    /// left at their defaults.
    pub fn from_echo(echo: &BTreeMap<String, String>) -> Result<Self> {
        let mut config = RunConfig::default();
        for (k, v) in echo {
            if v != "auto" {
                config.set(k, v)?;
            }
        }
        Ok(config)
    }
}
