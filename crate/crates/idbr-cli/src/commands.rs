//! The three commands: fit a model to a CSV, predict new rows from a fit
//! artifact, and run a simulation study.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use idbr::model::{ModelSpec, ParamVector, Submodel};
use idbr::predict;
use idbr::sampler::{self, PosteriorSample};
use idbr::simulate::{self, Generator, SimDesign};

use crate::artifact::{
    write_json, DrawsDoc, FitArtifact, MetaDoc, ModelDoc, ParameterDoc, ScaleDoc,
    StandardizationDoc, SubmodelDoc, FIT_KIND, FIT_VERSION,
};
use crate::config::{ModelConfig, RunConfig};
use crate::ingest;

/// Used columns in dataset order: first appearance across the submodels.
fn used_columns(model: &ModelConfig) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut push_all = |names: &[String]| {
        for name in names {
            if !out.contains(name) {
                out.push(name.clone());
            }
        }
    };
    if let Some(inflation) = &model.inflation {
        push_all(inflation);
    }
    push_all(&model.location);
    push_all(&model.dispersion);
    out
}

fn build_spec(
    model: &ModelConfig,
    columns: &[String],
    scale: idbr::scale::ScaleSpec,
) -> Result<ModelSpec> {
    let resolve = |names: &[String], intercept: bool| -> Result<Submodel> {
        let cols = names
            .iter()
            .map(|n| {
                columns
                    .iter()
                    .position(|c| c == n)
                    .ok_or_else(|| anyhow::anyhow!("column {n:?} not among used columns"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Submodel { cols, intercept })
    };
    let location = resolve(&model.location, model.location_intercept)?;
    let dispersion = resolve(&model.dispersion, model.dispersion_intercept)?;
    Ok(match &model.inflation {
        Some(inflation) => ModelSpec::idbr(
            scale,
            resolve(inflation, model.inflation_intercept)?,
            location,
            dispersion,
        ),
        None => ModelSpec::dbr(scale, location, dispersion),
    })
}

fn print_fit_summary(posterior: &PosteriorSample) {
    println!(
        "{:<24} {:>9} {:>9} {:>9} {:>7} {:>7} {:>8}",
        "parameter", "estimate", "hpd.low", "hpd.up", "p", "rhat", "accept"
    );
    for j in 0..posterior.dim {
        println!(
            "{:<24} {:>9.3} {:>9.3} {:>9.3} {:>7.3} {:>7.3} {:>8.3}",
            posterior.param_names[j],
            posterior.medians[j],
            posterior.hpd[j].0,
            posterior.hpd[j].1,
            posterior.sign_opposition[j],
            posterior.gelman[j],
            posterior.acceptance_rates[j],
        );
    }
    for w in &posterior.warnings {
        eprintln!("warning: {w}");
    }
}

/// `fit`: estimate the model and write the self-contained artifact.
pub fn run_fit(config: &RunConfig) -> Result<PathBuf> {
    let scale_cfg = config.require_scale()?;
    let model_cfg = config.require_model()?;
    let data_path = config.require_data()?;
    let response = config.require_response()?;

    let scale = scale_cfg.build()?;
    let columns = used_columns(model_cfg);
    if columns.is_empty() {
        bail!("no covariate columns named in the [model] block");
    }
    let ingested =
        ingest::ingest_csv(data_path, response, &columns, &model_cfg.dummies, &scale)?;
    let spec = build_spec(model_cfg, &columns, scale.clone())?;
    let sampler_cfg = config.sampler.build();

    let (posterior, standardization) = if config.standardize {
        let (p, s) = sampler::fit_standardized(&ingested.data, &spec, &sampler_cfg)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        (p, Some(s))
    } else {
        let p = sampler::fit(&ingested.data, &spec, &sampler_cfg)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        (p, None)
    };

    print_fit_summary(&posterior);

    let parameters: Vec<ParameterDoc> = (0..posterior.dim)
        .map(|j| ParameterDoc {
            name: posterior.param_names[j].clone(),
            estimate: posterior.medians[j],
            hpd_low: posterior.hpd[j].0,
            hpd_up: posterior.hpd[j].1,
            p: posterior.sign_opposition[j],
            rhat: posterior.gelman[j],
            acceptance: posterior.acceptance_rates[j],
            ess: posterior.effective_sizes[j],
        })
        .collect();

    let artifact = FitArtifact {
        kind: FIT_KIND.to_string(),
        version: FIT_VERSION,
        meta: MetaDoc {
            seed: sampler_cfg.seed,
            burn_in: sampler_cfg.burn_in,
            keep: sampler_cfg.keep,
            chains: sampler_cfg.n_chains,
            hpd_level: sampler_cfg.hpd_level,
            adapt_window: sampler_cfg.adapt_window,
            target_accept: sampler_cfg.target_accept,
            n: ingested.data.n(),
            dropped_rows: ingested.dropped,
            standardize: config.standardize,
            warnings: posterior.warnings.clone(),
        },
        scale: ScaleDoc::from_scale(&scale),
        columns: columns.clone(),
        dummies: model_cfg.dummies.clone(),
        model: ModelDoc {
            inflation: spec.inflation.as_ref().map(|s| submodel_doc(s, &columns)),
            location: submodel_doc(&spec.location, &columns),
            dispersion: submodel_doc(&spec.dispersion, &columns),
        },
        standardization: standardization
            .map(|s| StandardizationDoc { means: s.means, sds: s.sds }),
        inflated_label: scale
            .inflated()
            .and_then(|k| scale.label(k).map(str::to_string)),
        parameters,
        draws: DrawsDoc {
            chains: posterior.n_chains,
            keep: posterior.keep,
            dim: posterior.dim,
            values: (0..posterior.n_chains).map(|c| posterior.chain(c).to_vec()).collect(),
            acceptance: posterior.acceptance_rates.clone(),
        },
    };

    let out = config.out.clone().unwrap_or_else(|| PathBuf::from("idbr-fit.json"));
    write_json(&out, &artifact)?;
    println!("fit written to {}", out.display());
    Ok(out)
}

fn submodel_doc(sub: &Submodel, columns: &[String]) -> SubmodelDoc {
    SubmodelDoc {
        columns: sub.cols.iter().map(|c| columns[*c].clone()).collect(),
        intercept: sub.intercept,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionRow {
    /// 0-based data row in the input file.
    pub row: usize,
    pub mass: Vec<f64>,
    pub mode: f64,
    pub mode_label: Option<String>,
    pub region: Vec<f64>,
    pub region_labels: Option<Vec<String>>,
    pub disjoint: bool,
    pub pi_hat: f64,
    pub region_length: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionDoc {
    pub kind: String,
    pub version: u32,
    pub model: String,
    pub data: String,
    pub seed: u64,
    pub hpd_level: f64,
    pub rows: usize,
    pub dropped_rows: usize,
    /// Original-scale level per grid index, aligning the mass vectors.
    pub levels: Vec<f64>,
    pub labels: Option<Vec<String>>,
    pub predictions: Vec<PredictionRow>,
}

/// `predict`: score new covariate rows from a fit artifact.
pub fn run_predict(config: &RunConfig) -> Result<PathBuf> {
    let model_path = config
        .model_path
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("no model artifact given (config `model_path` or --model)"))?;
    let data_path = config.require_data()?;

    let artifact = FitArtifact::load(model_path)?;
    let spec = artifact.model_spec()?;
    let posterior = artifact.posterior()?;
    let (rows, dropped, kept_rows) =
        ingest::ingest_covariates(data_path, &artifact.columns, &artifact.dummies)?;

    let seed = config.prediction_seed.unwrap_or(config.sampler.seed);
    let level = config.sampler.hpd_level;
    let scale = &spec.scale;
    let levels: Vec<f64> = (1..=scale.levels()).map(|k| scale.original_level(k)).collect();
    let labels: Option<Vec<String>> = (1..=scale.levels())
        .map(|k| scale.label(k).map(str::to_string))
        .collect();

    let mut predictions = Vec::with_capacity(rows.len());
    for (position, values) in rows.iter().enumerate() {
        let mut rng = predict::row_rng(seed, position);
        let dist = predict::predictive_distribution(
            &posterior,
            &|c| values[c],
            &spec,
            level,
            &mut rng,
        )
        .map_err(|e| anyhow::anyhow!("row {position}: {e}"))?;
        predictions.push(PredictionRow {
            row: kept_rows[position],
            mass: dist.mass.clone(),
            mode: scale.original_level(dist.mode),
            mode_label: scale.label(dist.mode).map(str::to_string),
            region: dist.region.points.iter().map(|k| scale.original_level(*k)).collect(),
            region_labels: labels.as_ref().map(|all| {
                dist.region.points.iter().map(|k| all[*k - 1].clone()).collect()
            }),
            disjoint: dist.region.disjoint,
            pi_hat: dist.pi_hat,
            region_length: predict::scaled_region_length(&dist.region.points, scale),
            coverage: dist.region.coverage,
        });
    }

    let doc = PredictionDoc {
        kind: "idbr-predictions".to_string(),
        version: 1,
        model: model_path.display().to_string(),
        data: data_path.display().to_string(),
        seed,
        hpd_level: level,
        rows: predictions.len(),
        dropped_rows: dropped,
        levels,
        labels,
        predictions,
    };
    let out = config.out.clone().unwrap_or_else(|| PathBuf::from("idbr-predictions.json"));
    write_json(&out, &doc)?;
    println!("{} prediction rows written to {}", doc.rows, out.display());
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamMetricsDoc {
    pub name: String,
    pub truth: f64,
    pub bias: f64,
    pub emp_sd: f64,
    pub rmse: f64,
    pub coverage: f64,
    pub mean_hpd_length: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionMetricsDoc {
    pub percent_correct: f64,
    pub coverage: f64,
    pub mean_length: f64,
    pub percent_disjoint: f64,
    pub pairs: usize,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairDoc {
    pub from: usize,
    pub to: usize,
    pub rows: usize,
    pub correct: usize,
    pub covered: usize,
    pub disjoint: usize,
    pub total_length: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicationDoc {
    pub index: usize,
    pub ok: bool,
    pub error: Option<String>,
    pub medians: Vec<f64>,
    pub hpd: Vec<(f64, f64)>,
    pub prediction: Option<PairDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationDoc {
    pub kind: String,
    pub version: u32,
    pub levels: usize,
    pub n: usize,
    pub generator: String,
    pub replications: usize,
    pub design_seed: u64,
    pub sampler_seed: u64,
    pub truth: Vec<f64>,
    pub parameters: Vec<ParamMetricsDoc>,
    pub prediction: Option<PredictionMetricsDoc>,
    pub used: usize,
    pub excluded: usize,
    pub records: Vec<ReplicationDoc>,
}

/// `simulate`: run a replication study and write the metrics document.
pub fn run_simulate(config: &RunConfig) -> Result<PathBuf> {
    let sim = config
        .simulate
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("config is missing the [simulate] block"))?;

    let mut design = match sim.generator.as_str() {
        "idbr" => SimDesign::benchmark_idbr(sim.levels, sim.n, sim.replications, sim.design_seed),
        "rounded-linear" => SimDesign::benchmark_rounded_linear(
            sim.levels,
            sim.n,
            sim.replications,
            sim.design_seed,
        ),
        other => bail!("unknown generator {other:?} (expected \"idbr\" or \"rounded-linear\")"),
    };
    if let Some(k) = sim.inflated_index {
        design.inflated_index = k;
    }
    if sim.inflation.is_some() || sim.location.is_some() || sim.dispersion.is_some() {
        let default = design.truth.clone();
        let gamma = sim.inflation.clone().unwrap_or_else(|| default.gamma().to_vec());
        let beta = sim.location.clone().unwrap_or_else(|| default.beta().to_vec());
        let theta = sim.dispersion.clone().unwrap_or_else(|| default.theta().to_vec());
        design.truth = ParamVector::from_parts(&gamma, &beta, &theta);
    }
    if let Generator::RoundedLinear { coefficients, noise_sd } = &mut design.generator {
        if let Some(c) = &sim.linear_coefficients {
            *coefficients = c.clone();
        }
        if let Some(sd) = sim.noise_sd {
            *noise_sd = sd;
        }
    }

    let sampler_cfg = config.sampler.build();
    let study =
        simulate::run_study(&design, &sampler_cfg).map_err(|e| anyhow::anyhow!("{e}"))?;
    print!("{}", study.report);

    let doc = SimulationDoc {
        kind: "idbr-simulation".to_string(),
        version: 1,
        levels: design.levels,
        n: design.n,
        generator: sim.generator.clone(),
        replications: design.replications,
        design_seed: design.seed,
        sampler_seed: sampler_cfg.seed,
        truth: design.truth.values().to_vec(),
        parameters: study
            .report
            .parameters
            .iter()
            .map(|p| ParamMetricsDoc {
                name: p.name.clone(),
                truth: p.truth,
                bias: p.bias,
                emp_sd: p.emp_sd,
                rmse: p.rmse,
                coverage: p.coverage,
                mean_hpd_length: p.mean_hpd_length,
            })
            .collect(),
        prediction: study.report.prediction.map(|p| PredictionMetricsDoc {
            percent_correct: p.percent_correct,
            coverage: p.coverage,
            mean_length: p.mean_length,
            percent_disjoint: p.percent_disjoint,
            pairs: p.pairs,
            rows: p.rows,
        }),
        used: study.report.used,
        excluded: study.report.excluded,
        records: study
            .records
            .iter()
            .map(|r| ReplicationDoc {
                index: r.index,
                ok: r.ok,
                error: r.error.clone(),
                medians: r.medians.clone(),
                hpd: r.hpd.clone(),
                prediction: r.prediction.map(|p| PairDoc {
                    from: p.from,
                    to: p.to,
                    rows: p.rows,
                    correct: p.correct,
                    covered: p.covered,
                    disjoint: p.disjoint,
                    total_length: p.total_length,
                }),
            })
            .collect(),
    };
    let out = config.out.clone().unwrap_or_else(|| PathBuf::from("idbr-simulation.json"));
    write_json(&out, &doc)?;
    println!("simulation report written to {}", out.display());
    Ok(out)
}

/// Shared entry used by `main` and the integration tests.
pub fn run(command: &str, config_path: &Path, overrides: &crate::config::Overrides) -> Result<PathBuf> {
    let mut config = RunConfig::load(config_path)?;
    config.apply(overrides);
    match command {
        "fit" => run_fit(&config),
        "predict" => run_predict(&config),
        "simulate" => run_simulate(&config),
        other => bail!("unknown command {other:?}"),
    }
    .with_context(|| format!("{command} failed"))
}
