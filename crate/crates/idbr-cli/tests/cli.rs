//! End-to-end tests of the CLI workflow: ingestion, fit artifacts,
//! prediction documents, and the simulate command.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use idbr::predict;
use idbr::scale::ScaleSpec;
use idbr::simulate::{self, SimDesign};
use idbr_cli::config::{Overrides, RunConfig};
use idbr_cli::{artifact::FitArtifact, commands};

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

/// A small synthetic ratings file on a 0–10 scale.
fn demo_csv(path: &Path, n: usize) {
    let mut text = String::from("score,age,female\n");
    let mut rng = idbr::Rng::new(99, 0);
    let scale = ScaleSpec::new(0.0, 10.0, 1.0).unwrap().with_inflated_index(11).unwrap();
    for _ in 0..n {
        let age = 30.0 + 8.0 * rng.standard_normal();
        let female = if rng.uniform() < 0.5 { 1.0 } else { 0.0 };
        let u = rng.beta(3.0, 2.0).unwrap();
        let k = ((u * 11.0).ceil() as usize).clamp(1, 11);
        let score = scale.original_level(k);
        text.push_str(&format!("{score},{age:.3},{female}\n"));
    }
    write(path, &text);
}

fn demo_config(dir: &Path, data: &Path, out: &Path) -> PathBuf {
    let path = dir.join("config.toml");
    write(
        &path,
        &format!(
            r#"
data = "{data}"
response = "score"
out = "{out}"

[scale]
min = 0.0
max = 10.0
step = 1.0
inflated = 10.0

[model]
inflation = ["age"]
location = ["age", "female"]
dispersion = ["age"]
dummies = ["female"]

[sampler]
seed = 11
burn_in = 150
keep = 120
chains = 2
adapt_window = 10
"#,
            data = data.display(),
            out = out.display(),
        ),
    );
    path
}

#[test]
fn ingest_drops_incomplete_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    write(&csv, "score,age\n3,41\n5,\n7,28\n");
    let scale = ScaleSpec::new(0.0, 10.0, 1.0).unwrap();
    let got = idbr_cli::ingest::ingest_csv(
        &csv,
        "score",
        &["age".to_string()],
        &[],
        &scale,
    )
    .unwrap();
    assert_eq!(got.data.n(), 2);
    assert_eq!(got.dropped, 1);
    assert_eq!(got.kept_rows, vec![0, 2]);
    assert_eq!(scale.levels(), 11);
    assert!((scale.h() - 1.0 / 11.0).abs() < 1e-15);
}

#[test]
fn ingest_rejects_off_scale_response() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    write(&csv, "score,age\n3,41\n11,30\n");
    let scale = ScaleSpec::new(0.0, 10.0, 1.0).unwrap();
    let err = idbr_cli::ingest::ingest_csv(
        &csv,
        "score",
        &["age".to_string()],
        &[],
        &scale,
    )
    .unwrap_err();
    let msg = format!("{err:#}");
    assert!(msg.contains("row 1"), "{msg}");
}

#[test]
fn ingest_rejects_bad_dummy() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    write(&csv, "score,female\n3,0\n4,2\n");
    let scale = ScaleSpec::new(0.0, 10.0, 1.0).unwrap();
    let err = idbr_cli::ingest::ingest_csv(
        &csv,
        "score",
        &["female".to_string()],
        &["female".to_string()],
        &scale,
    )
    .unwrap_err();
    assert!(format!("{err:#}").contains("must be 0/1"));
}

#[test]
fn ingest_maps_labels() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    write(&csv, "opinion,age\nagree,30\nneutral,40\n");
    let scale = ScaleSpec::new(1.0, 3.0, 1.0)
        .unwrap()
        .with_labels(vec!["disagree".into(), "neutral".into(), "agree".into()])
        .unwrap();
    let got = idbr_cli::ingest::ingest_csv(
        &csv,
        "opinion",
        &["age".to_string()],
        &[],
        &scale,
    )
    .unwrap();
    assert_eq!(got.data.y_index(), &[3, 2]);
}

#[test]
fn fit_document_is_reproducible_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ratings.csv");
    demo_csv(&csv, 120);
    let out = dir.path().join("fit.json");
    let config_path = demo_config(dir.path(), &csv, &out);

    let config = RunConfig::load(&config_path).unwrap();
    commands::run_fit(&config).unwrap();
    let first = fs::read(&out).unwrap();

    let artifact = FitArtifact::load(&out).unwrap();
    assert_eq!(artifact.meta.n, 120);
    assert_eq!(artifact.meta.dropped_rows, 0);
    assert_eq!(artifact.parameters.len(), 2 + 3 + 2);
    assert_eq!(artifact.draws.values.len(), 2);
    assert_eq!(artifact.draws.values[0].len(), 120 * 7);
    for p in &artifact.parameters {
        assert!(p.estimate.is_finite());
        assert!(p.hpd_low <= p.estimate && p.estimate <= p.hpd_up);
        assert!((0.0..=1.0).contains(&p.p));
    }

    // byte-identical rerun under the same seeds
    commands::run_fit(&config).unwrap();
    let second = fs::read(&out).unwrap();
    assert_eq!(first, second);
}

#[test]
fn predict_document_reports_valid_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ratings.csv");
    demo_csv(&csv, 100);
    let fit_out = dir.path().join("fit.json");
    let config_path = demo_config(dir.path(), &csv, &fit_out);
    let mut config = RunConfig::load(&config_path).unwrap();
    commands::run_fit(&config).unwrap();

    let pred_out = dir.path().join("pred.json");
    config.model_path = Some(fit_out);
    config.out = Some(pred_out.clone());
    commands::run_predict(&config).unwrap();

    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&pred_out).unwrap()).unwrap();
    assert_eq!(doc["kind"], "idbr-predictions");
    assert_eq!(doc["rows"], 100);
    let levels: Vec<f64> =
        doc["levels"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(levels.len(), 11);
    for row in doc["predictions"].as_array().unwrap() {
        let mass: Vec<f64> =
            row["mass"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        let sum: f64 = mass.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(mass.iter().all(|m| (0.0..=1.0).contains(m)));
        let mode = row["mode"].as_f64().unwrap();
        assert!(levels.contains(&mode));
        for point in row["region"].as_array().unwrap() {
            assert!(levels.contains(&point.as_f64().unwrap()));
        }
        let length = row["region_length"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&length));
        let coverage = row["coverage"].as_f64().unwrap();
        assert!(coverage >= 0.95 - 1e-9);
    }
}

/// The CLI prediction path must reproduce the simulation harness's
/// in-sample predictive masses exactly when given the same seeds.
#[test]
fn predict_matches_simulate_masses_exactly() {
    let design = SimDesign::benchmark_idbr(6, 40, 2, 123);
    let cfg = idbr::SamplerConfig {
        burn_in: 120,
        keep: 80,
        n_chains: 2,
        seed: 5,
        adapt_window: 10,
        ..Default::default()
    };
    let fit = simulate::run_replication(&design, &cfg, 0);
    let posterior = fit.posterior.expect("fit succeeded");
    let (target, spec) = simulate::replication_dataset(&design, 1).unwrap();
    let seed = simulate::prediction_seed(design.seed, 1);

    // simulate-side mass for row 0
    let mut rng = predict::row_rng(seed, 0);
    let direct = predict::predictive_distribution(
        &posterior,
        &|c| target.value(0, c),
        &spec,
        0.95,
        &mut rng,
    )
    .unwrap();

    // CLI-side: write the artifact and the target row, then predict
    let dir = tempfile::tempdir().unwrap();
    let fit_path = dir.path().join("fit.json");
    let csv = dir.path().join("target.csv");
    let mut text = String::from("V1,V2,V3,V4,D1,D2,D3\n");
    for c in 0..7 {
        text.push_str(&format!("{}", target.value(0, c)));
        text.push(if c == 6 { '\n' } else { ',' });
    }
    write(&csv, &text);

    let artifact = idbr_cli::artifact::FitArtifact {
        kind: "idbr-fit".into(),
        version: 1,
        meta: idbr_cli::artifact::MetaDoc {
            seed: cfg.seed,
            burn_in: cfg.burn_in,
            keep: cfg.keep,
            chains: cfg.n_chains,
            hpd_level: 0.95,
            adapt_window: cfg.adapt_window,
            target_accept: cfg.target_accept,
            n: 40,
            dropped_rows: 0,
            standardize: true,
            warnings: vec![],
        },
        scale: idbr_cli::artifact::ScaleDoc::from_scale(&spec.scale),
        columns: (0..7).map(|c| target.names()[c].clone()).collect(),
        dummies: vec![],
        model: idbr_cli::artifact::ModelDoc {
            inflation: Some(idbr_cli::artifact::SubmodelDoc {
                columns: target.names().to_vec(),
                intercept: true,
            }),
            location: idbr_cli::artifact::SubmodelDoc {
                columns: target.names().to_vec(),
                intercept: true,
            },
            dispersion: idbr_cli::artifact::SubmodelDoc {
                columns: target.names().to_vec(),
                intercept: true,
            },
        },
        standardization: None,
        inflated_label: None,
        parameters: (0..posterior.dim)
            .map(|j| idbr_cli::artifact::ParameterDoc {
                name: posterior.param_names[j].clone(),
                estimate: posterior.medians[j],
                hpd_low: posterior.hpd[j].0,
                hpd_up: posterior.hpd[j].1,
                p: posterior.sign_opposition[j],
                rhat: posterior.gelman[j],
                acceptance: posterior.acceptance_rates[j],
                ess: posterior.effective_sizes[j],
            })
            .collect(),
        draws: idbr_cli::artifact::DrawsDoc {
            chains: posterior.n_chains,
            keep: posterior.keep,
            dim: posterior.dim,
            values: (0..posterior.n_chains).map(|c| posterior.chain(c).to_vec()).collect(),
            acceptance: posterior.acceptance_rates.clone(),
        },
    };
    idbr_cli::artifact::write_json(&fit_path, &artifact).unwrap();

    let pred_out = dir.path().join("pred.json");
    let config = RunConfig {
        data: Some(csv),
        response: None,
        model_path: Some(fit_path),
        out: Some(pred_out.clone()),
        standardize: false,
        prediction_seed: Some(seed),
        scale: None,
        model: None,
        sampler: Default::default(),
        simulate: None,
    };
    commands::run_predict(&config).unwrap();
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&pred_out).unwrap()).unwrap();
    let mass: Vec<f64> = doc["predictions"][0]["mass"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(mass, direct.mass);
    assert_eq!(doc["predictions"][0]["pi_hat"].as_f64().unwrap(), direct.pi_hat);
}

#[test]
fn simulate_command_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.json");
    let config_path = dir.path().join("sim.toml");
    write(
        &config_path,
        &format!(
            r#"
out = "{out}"

[sampler]
seed = 3
burn_in = 120
keep = 80
chains = 2
adapt_window = 10

[simulate]
levels = 6
n = 50
replications = 2
design_seed = 77
"#,
            out = out.display()
        ),
    );
    let config = RunConfig::load(&config_path).unwrap();
    commands::run_simulate(&config).unwrap();
    let first = fs::read(&out).unwrap();
    let doc: serde_json::Value = serde_json::from_str(std::str::from_utf8(&first).unwrap()).unwrap();
    assert_eq!(doc["kind"], "idbr-simulation");
    assert_eq!(doc["records"].as_array().unwrap().len(), 2);
    assert_eq!(doc["parameters"].as_array().unwrap().len(), 24);
    assert_eq!(doc["used"], 2);

    // identical report on rerun with the same seeds
    commands::run_simulate(&config).unwrap();
    assert_eq!(first, fs::read(&out).unwrap());
}

#[test]
fn binary_reports_errors_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("broken.toml");
    write(&config_path, "response = \"score\"\n");
    let output = Command::new(env!("CARGO_BIN_EXE_idbr"))
        .args(["fit", "--config"])
        .arg(&config_path)
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("error"), "{stderr}");
}

#[test]
fn binary_fit_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ratings.csv");
    demo_csv(&csv, 80);
    let out = dir.path().join("fit.json");
    let config_path = demo_config(dir.path(), &csv, &out);
    let output = Command::new(env!("CARGO_BIN_EXE_idbr"))
        .args(["fit", "--config"])
        .arg(&config_path)
        .args(["--keep", "60", "--burn-in", "100"])
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(out.exists());
    let artifact = FitArtifact::load(&out).unwrap();
    assert_eq!(artifact.meta.keep, 60);
    assert_eq!(artifact.meta.burn_in, 100);
}

#[test]
fn overrides_take_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ratings.csv");
    demo_csv(&csv, 60);
    let out = dir.path().join("fit.json");
    let config_path = demo_config(dir.path(), &csv, &out);
    let overrides = Overrides {
        seed: Some(1234),
        keep: Some(40),
        burn_in: Some(80),
        hpd_level: Some(0.9),
        ..Default::default()
    };
    commands::run("fit", &config_path, &overrides).unwrap();
    let artifact = FitArtifact::load(&out).unwrap();
    assert_eq!(artifact.meta.seed, 1234);
    assert_eq!(artifact.meta.keep, 40);
    assert_eq!(artifact.meta.hpd_level, 0.9);
}
