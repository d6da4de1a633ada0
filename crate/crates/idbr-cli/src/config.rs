//! The run configuration: a TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use idbr::sampler::SamplerConfig;
use idbr::scale::ScaleSpec;

/// Scale block: the original support of the response.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleConfig {
    /// Scale minimum (`a`).
    pub min: f64,
    /// Scale maximum (`b`).
    pub max: f64,
    /// Spacing between adjacent levels (`h*`).
    pub step: f64,
    /// Inflated level on the original scale, if any.
    #[serde(default)]
    pub inflated: Option<f64>,
    /// Optional level labels, in scale order.
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

impl ScaleConfig {
    pub fn build(&self) -> Result<ScaleSpec> {
        let mut scale = ScaleSpec::new(self.min, self.max, self.step)
            .map_err(|e| anyhow::anyhow!("scale: {e}"))?;
        if let Some(labels) = &self.labels {
            scale = scale
                .with_labels(labels.clone())
                .map_err(|e| anyhow::anyhow!("scale labels: {e}"))?;
        }
        if let Some(level) = self.inflated {
            scale = scale
                .with_inflated_level(level)
                .map_err(|e| anyhow::anyhow!("inflated level: {e}"))?;
        }
        Ok(scale)
    }
}

/// Model block: column names per submodel.
///
/// Omitting `inflation` altogether fits the plain (uninflated) model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(default)]
    pub inflation: Option<Vec<String>>,
    pub location: Vec<String>,
    pub dispersion: Vec<String>,
    #[serde(default = "default_true")]
    pub inflation_intercept: bool,
    #[serde(default = "default_true")]
    pub location_intercept: bool,
    #[serde(default = "default_true")]
    pub dispersion_intercept: bool,
    /// Columns declared as 0/1 dummies (validated at ingestion).
    #[serde(default)]
    pub dummies: Vec<String>,
}

fn default_true() -> bool {
    true
}

/// Sampler block; defaults mirror the estimation protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerBlock {
    pub seed: u64,
    pub burn_in: usize,
    pub keep: usize,
    pub chains: usize,
    pub hpd_level: f64,
    pub adapt_window: usize,
    pub target_accept: f64,
}

impl Default for SamplerBlock {
    fn default() -> Self {
        let base = SamplerConfig::default();
        SamplerBlock {
            seed: base.seed,
            burn_in: base.burn_in,
            keep: base.keep,
            chains: base.n_chains,
            hpd_level: base.hpd_level,
            adapt_window: base.adapt_window,
            target_accept: base.target_accept,
        }
    }
}

impl SamplerBlock {
    pub fn build(&self) -> SamplerConfig {
        SamplerConfig {
            burn_in: self.burn_in,
            keep: self.keep,
            n_chains: self.chains,
            target_accept: self.target_accept,
            seed: self.seed,
            adapt_window: self.adapt_window,
            hpd_level: self.hpd_level,
        }
    }
}

/// Simulation block for the `simulate` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub levels: usize,
    pub n: usize,
    pub replications: usize,
    /// `"idbr"` or `"rounded-linear"`.
    #[serde(default = "default_generator")]
    pub generator: String,
    #[serde(default = "default_design_seed")]
    pub design_seed: u64,
    /// Optional explicit truth (defaults to the built-in benchmark truth).
    #[serde(default)]
    pub inflation: Option<Vec<f64>>,
    #[serde(default)]
    pub location: Option<Vec<f64>>,
    #[serde(default)]
    pub dispersion: Option<Vec<f64>>,
    /// Inflated grid index (1-based); defaults to the top level.
    #[serde(default)]
    pub inflated_index: Option<usize>,
    /// Rounded-linear generator settings.
    #[serde(default)]
    pub linear_coefficients: Option<Vec<f64>>,
    #[serde(default)]
    pub noise_sd: Option<f64>,
}

fn default_generator() -> String {
    "idbr".to_string()
}

fn default_design_seed() -> u64 {
    2024
}

/// The whole configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    /// Training (fit) or prediction (predict) CSV path.
    #[serde(default)]
    pub data: Option<PathBuf>,
    /// Response column name.
    #[serde(default)]
    pub response: Option<String>,
    /// Fitted-model artifact consumed by `predict`.
    #[serde(default)]
    pub model_path: Option<PathBuf>,
    /// Output document path.
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Standardize covariates before fitting (stored in the artifact).
    #[serde(default)]
    pub standardize: bool,
    /// Seed for prediction draws; defaults to the sampler seed.
    #[serde(default)]
    pub prediction_seed: Option<u64>,
    #[serde(default)]
    pub scale: Option<ScaleConfig>,
    #[serde(default)]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub sampler: SamplerBlock,
    #[serde(default)]
    pub simulate: Option<SimulateConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn require_scale(&self) -> Result<&ScaleConfig> {
        match &self.scale {
            Some(s) => Ok(s),
            None => bail!("config is missing the [scale] block"),
        }
    }

    pub fn require_model(&self) -> Result<&ModelConfig> {
        match &self.model {
            Some(m) => Ok(m),
            None => bail!("config is missing the [model] block"),
        }
    }

    pub fn require_data(&self) -> Result<&Path> {
        match &self.data {
            Some(p) => Ok(p.as_path()),
            None => bail!("no data path given (config `data` or --data)"),
        }
    }

    pub fn require_response(&self) -> Result<&str> {
        match &self.response {
            Some(r) => Ok(r.as_str()),
            None => bail!("no response column given (config `response`)"),
        }
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub data: Option<PathBuf>,
    pub model_path: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub chains: Option<usize>,
    pub burn_in: Option<usize>,
    pub keep: Option<usize>,
    pub hpd_level: Option<f64>,
    pub replications: Option<usize>,
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = &o.data {
            self.data = Some(p.clone());
        }
        if let Some(p) = &o.model_path {
            self.model_path = Some(p.clone());
        }
        if let Some(p) = &o.out {
            self.out = Some(p.clone());
        }
        if let Some(seed) = o.seed {
            self.sampler.seed = seed;
        }
        if let Some(chains) = o.chains {
            self.sampler.chains = chains;
        }
        if let Some(burn_in) = o.burn_in {
            self.sampler.burn_in = burn_in;
        }
        if let Some(keep) = o.keep {
            self.sampler.keep = keep;
        }
        if let Some(level) = o.hpd_level {
            self.sampler.hpd_level = level;
        }
        if let Some(reps) = o.replications {
            if let Some(sim) = &mut self.simulate {
                sim.replications = reps;
            }
        }
    }
}
