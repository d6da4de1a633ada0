//! The self-contained fitted-model document: configuration echo,
//! standardization parameters, per-parameter summaries, and all retained
//! draws, so prediction never re-reads the training data.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use idbr::model::{ModelSpec, Submodel};
use idbr::sampler::PosteriorSample;
use idbr::scale::ScaleSpec;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleDoc {
    pub min: f64,
    pub max: f64,
    pub step: f64,
    pub levels: usize,
    pub inflated_level: Option<f64>,
    pub labels: Option<Vec<String>>,
}

impl ScaleDoc {
    pub fn from_scale(scale: &ScaleSpec) -> Self {
        ScaleDoc {
            min: scale.min(),
            max: scale.max(),
            step: scale.spacing(),
            levels: scale.levels(),
            inflated_level: scale.inflated().map(|k| scale.original_level(k)),
            labels: (1..=scale.levels())
                .map(|k| scale.label(k).map(str::to_string))
                .collect::<Option<Vec<_>>>(),
        }
    }

    pub fn build(&self) -> Result<ScaleSpec> {
        let mut scale = ScaleSpec::new(self.min, self.max, self.step)
            .map_err(|e| anyhow::anyhow!("artifact scale: {e}"))?;
        if let Some(labels) = &self.labels {
            scale = scale
                .with_labels(labels.clone())
                .map_err(|e| anyhow::anyhow!("artifact labels: {e}"))?;
        }
        if let Some(level) = self.inflated_level {
            scale = scale
                .with_inflated_level(level)
                .map_err(|e| anyhow::anyhow!("artifact inflated level: {e}"))?;
        }
        Ok(scale)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubmodelDoc {
    pub columns: Vec<String>,
    pub intercept: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDoc {
    pub inflation: Option<SubmodelDoc>,
    pub location: SubmodelDoc,
    pub dispersion: SubmodelDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StandardizationDoc {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParameterDoc {
    pub name: String,
    pub estimate: f64,
    pub hpd_low: f64,
    pub hpd_up: f64,
    /// Share of draws whose sign opposes the posterior median's.
    pub p: f64,
    pub rhat: f64,
    pub acceptance: f64,
    pub ess: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DrawsDoc {
    pub chains: usize,
    pub keep: usize,
    pub dim: usize,
    /// One flat `keep × dim` row-major matrix per chain.
    pub values: Vec<Vec<f64>>,
    /// Post-burn-in acceptance rate per coordinate (pooled over chains).
    pub acceptance: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetaDoc {
    pub seed: u64,
    pub burn_in: usize,
    pub keep: usize,
    pub chains: usize,
    pub hpd_level: f64,
    pub adapt_window: usize,
    pub target_accept: f64,
    pub n: usize,
    pub dropped_rows: usize,
    pub standardize: bool,
    pub warnings: Vec<String>,
}

/// The complete fit artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitArtifact {
    pub kind: String,
    pub version: u32,
    pub meta: MetaDoc,
    pub scale: ScaleDoc,
    /// Dataset column names in fit order; submodels reference these.
    pub columns: Vec<String>,
    pub dummies: Vec<String>,
    pub model: ModelDoc,
    pub standardization: Option<StandardizationDoc>,
    pub inflated_label: Option<String>,
    pub parameters: Vec<ParameterDoc>,
    pub draws: DrawsDoc,
}

pub const FIT_KIND: &str = "idbr-fit";
pub const FIT_VERSION: u32 = 1;

impl FitArtifact {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read model artifact {}", path.display()))?;
        let artifact: FitArtifact = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse model artifact {}", path.display()))?;
        if artifact.kind != FIT_KIND {
            bail!("{}: not a fit artifact (kind = {})", path.display(), artifact.kind);
        }
        if artifact.version != FIT_VERSION {
            bail!("{}: unsupported artifact version {}", path.display(), artifact.version);
        }
        Ok(artifact)
    }

    /// Rebuild the model spec against the artifact's own column order.
    pub fn model_spec(&self) -> Result<ModelSpec> {
        let scale = self.scale.build()?;
        let resolve = |doc: &SubmodelDoc| -> Result<Submodel> {
            let cols = doc
                .columns
                .iter()
                .map(|name| {
                    self.columns.iter().position(|c| c == name).ok_or_else(|| {
                        anyhow::anyhow!("artifact submodel column {name:?} missing from column list")
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Submodel { cols, intercept: doc.intercept })
        };
        let location = resolve(&self.model.location)?;
        let dispersion = resolve(&self.model.dispersion)?;
        let spec = match &self.model.inflation {
            Some(infl) => ModelSpec::idbr(scale, resolve(infl)?, location, dispersion),
            None => ModelSpec::dbr(scale, location, dispersion),
        };
        Ok(spec)
    }

    /// Revive the posterior sample (summaries recomputed from the draws).
    pub fn posterior(&self) -> Result<PosteriorSample> {
        let names: Vec<String> = self.parameters.iter().map(|p| p.name.clone()).collect();
        PosteriorSample::from_chains(
            self.draws.values.clone(),
            vec![self.draws.acceptance.clone(); self.draws.chains],
            names,
            self.draws.keep,
            self.meta.hpd_level,
            Vec::new(),
        )
        .map_err(|e| anyhow::anyhow!("artifact draws: {e}"))
    }
}

/// Write a JSON document with a stable layout and a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
