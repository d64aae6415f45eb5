//! Run configuration as flat `key = value` text.

use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::cycle::CycleBudget;
use crate::nest::{NestBudgets, NestConfig};
use crate::param::{ParamBudgets, WindowConfig};
use crate::stats::{CeConfig, ClassifierConfig, ProfileConfig};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("unknown configuration key {0:?}")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}")]
    BadValue { key: String, value: String },
    #[error("line {0}: expected key = value")]
    Syntax(usize),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub precision_start: u32,
    pub precision_max: u32,
    pub max_level: usize,
    pub orbit_steps: usize,
    pub query_steps: usize,
    pub niceness_factor: usize,
    pub central_run: usize,
    pub cycle_iterations: usize,
    pub cycle_max_period: usize,
    pub bisection_probes: usize,
    pub window_precision: u32,
    pub window_grid: usize,
    pub sweep_count: usize,
    pub ce_steps: usize,
    pub recurrence_steps: usize,
    /// Strata for branch discovery and return-time distributions.
    pub samples: usize,
    pub epsilon: f64,
    pub n0: usize,
    pub sparsity: f64,
    pub seed: u64,
    /// Sweep workers; 0 uses every core.
    pub threads: usize,
    pub output_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let nest = NestBudgets::default();
        let classifier = ClassifierConfig::default();
        let window = WindowConfig::default();
        let param = ParamBudgets::default();
        RunConfig {
            precision_start: nest.precision_start,
            precision_max: nest.precision_max,
            max_level: NestConfig::default().max_level,
            orbit_steps: nest.orbit_steps,
            query_steps: nest.query_steps,
            niceness_factor: nest.niceness_factor,
            central_run: nest.central_run,
            cycle_iterations: nest.cycle.iterations,
            cycle_max_period: nest.cycle.max_period,
            bisection_probes: window.max_probes,
            window_precision: window.precision,
            window_grid: 400,
            sweep_count: 200,
            ce_steps: param.ce_steps,
            recurrence_steps: param.recurrence_steps,
            samples: 1000,
            epsilon: classifier.epsilon,
            n0: classifier.n0,
            sparsity: classifier.sparsity,
            seed: 0,
            threads: 0,
            output_dir: PathBuf::from("quadnest-out"),
            cache_dir: None,
        }
    }
}

pub const KEYS: [&str; 23] = [
    "precision_start",
    "precision_max",
    "max_level",
    "orbit_steps",
    "query_steps",
    "niceness_factor",
    "central_run",
    "cycle_iterations",
    "cycle_max_period",
    "bisection_probes",
    "window_precision",
    "window_grid",
    "sweep_count",
    "ce_steps",
    "recurrence_steps",
    "samples",
    "epsilon",
    "n0",
    "sparsity",
    "seed",
    "threads",
    "output_dir",
    "cache_dir",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: value.into() })
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key.trim() {
            "precision_start" => self.precision_start = parse(key, v)?,
            "precision_max" => self.precision_max = parse(key, v)?,
            "max_level" => self.max_level = parse(key, v)?,
            "orbit_steps" => self.orbit_steps = parse(key, v)?,
            "query_steps" => self.query_steps = parse(key, v)?,
            "niceness_factor" => self.niceness_factor = parse(key, v)?,
            "central_run" => self.central_run = parse(key, v)?,
            "cycle_iterations" => self.cycle_iterations = parse(key, v)?,
            "cycle_max_period" => self.cycle_max_period = parse(key, v)?,
            "bisection_probes" => self.bisection_probes = parse(key, v)?,
            "window_precision" => self.window_precision = parse(key, v)?,
            "window_grid" => self.window_grid = parse(key, v)?,
            "sweep_count" => self.sweep_count = parse(key, v)?,
            "ce_steps" => self.ce_steps = parse(key, v)?,
            "recurrence_steps" => self.recurrence_steps = parse(key, v)?,
            "samples" => self.samples = parse(key, v)?,
            "epsilon" => self.epsilon = parse(key, v)?,
            "n0" => self.n0 = parse(key, v)?,
            "sparsity" => self.sparsity = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "threads" => self.threads = parse(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "cache_dir" => self.cache_dir = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
            k => return Err(ConfigError::UnknownKey(k.into())),
        }
        Ok(())
    }

    /// Apply `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax(i + 1))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
        line("precision_start", self.precision_start.to_string());
        line("precision_max", self.precision_max.to_string());
        line("max_level", self.max_level.to_string());
        line("orbit_steps", self.orbit_steps.to_string());
        line("query_steps", self.query_steps.to_string());
        line("niceness_factor", self.niceness_factor.to_string());
        line("central_run", self.central_run.to_string());
        line("cycle_iterations", self.cycle_iterations.to_string());
        line("cycle_max_period", self.cycle_max_period.to_string());
        line("bisection_probes", self.bisection_probes.to_string());
        line("window_precision", self.window_precision.to_string());
        line("window_grid", self.window_grid.to_string());
        line("sweep_count", self.sweep_count.to_string());
        line("ce_steps", self.ce_steps.to_string());
        line("recurrence_steps", self.recurrence_steps.to_string());
        line("samples", self.samples.to_string());
        line("epsilon", self.epsilon.to_string());
        line("n0", self.n0.to_string());
        line("sparsity", self.sparsity.to_string());
        line("seed", self.seed.to_string());
        line("threads", self.threads.to_string());
        line("output_dir", self.output_dir.display().to_string());
        line("cache_dir", self.cache_dir.as_ref().map_or(String::new(), |p| p.display().to_string()));
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.into()));
        if self.precision_start < 64 || self.precision_start > self.precision_max {
            return bad("need 64 <= precision_start <= precision_max");
        }
        let budgets = [
            self.orbit_steps,
            self.query_steps,
            self.niceness_factor,
            self.central_run,
            self.cycle_iterations,
            self.cycle_max_period,
            self.bisection_probes,
            self.window_grid,
            self.sweep_count,
            self.ce_steps,
            self.recurrence_steps,
            self.samples,
        ];
        if budgets.contains(&0) || self.window_precision == 0 {
            return bad("budgets must be positive");
        }
        self.classifier().validate().map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn nest_config(&self) -> NestConfig {
        NestConfig {
            max_level: self.max_level,
            budgets: NestBudgets {
                orbit_steps: self.orbit_steps,
                query_steps: self.query_steps,
                niceness_factor: self.niceness_factor,
                precision_start: self.precision_start,
                precision_max: self.precision_max,
                central_run: self.central_run,
                cycle: self.cycle_budget(),
            },
            skip_regular_check: false,
        }
    }

    pub fn cycle_budget(&self) -> CycleBudget {
        CycleBudget { iterations: self.cycle_iterations, max_period: self.cycle_max_period }
    }

    pub fn ce_config(&self) -> CeConfig {
        CeConfig { cycle: self.cycle_budget(), ..CeConfig::default() }
    }

    pub fn param_budgets(&self) -> ParamBudgets {
        ParamBudgets {
            nest: self.nest_config(),
            ce_steps: self.ce_steps,
            recurrence_steps: self.recurrence_steps,
            ce: self.ce_config(),
            ..ParamBudgets::default()
        }
    }

    pub fn window_config(&self) -> WindowConfig {
        WindowConfig {
            precision: self.window_precision,
            max_probes: self.bisection_probes,
            nest: NestConfig { skip_regular_check: true, ..self.nest_config() },
            ..WindowConfig::default()
        }
    }

    pub fn classifier(&self) -> ClassifierConfig {
        ClassifierConfig { epsilon: self.epsilon, n0: self.n0, sparsity: self.sparsity }
    }

    pub fn profile(&self) -> ProfileConfig {
        ProfileConfig { seed: self.seed, discovery: self.samples, ..ProfileConfig::default() }
    }
}
