//! Temporary diagnostic: one benchmark fit with full per-parameter summaries.

use idbr::sampler::{fit_standardized, SamplerConfig};
use idbr::simulate::{replication_dataset, SimDesign};

fn main() {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();
    let get = |i: usize, default: usize| args.get(i).copied().unwrap_or(default);
    let design = SimDesign::benchmark_idbr(get(0, 6), get(1, 900), 2, 2024);
    let cfg = SamplerConfig {
        burn_in: get(2, 1000),
        keep: get(3, 1000),
        n_chains: get(4, 3),
        adapt_window: get(5, 10),
        seed: 4242,
        ..SamplerConfig::default()
    };
    let (data, spec) = replication_dataset(&design, 0).unwrap();
    let start = std::time::Instant::now();
    let (posterior, _) = fit_standardized(&data, &spec, &cfg).unwrap();
    println!(
        "{:<24} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "parameter", "truth", "median", "rhat", "ess", "accept", "sign-p"
    );
    for j in 0..posterior.dim {
        println!(
            "{:<24} {:>8.3} {:>8.3} {:>8.3} {:>8.1} {:>8.3} {:>8.3}",
            posterior.param_names[j],
            design.truth.values()[j],
            posterior.medians[j],
            posterior.gelman[j],
            posterior.effective_sizes[j],
            posterior.acceptance_rates[j],
            posterior.sign_opposition[j],
        );
    }
    for w in &posterior.warnings {
        println!("warning: {w}");
    }
    println!("elapsed {:.1}s", start.elapsed().as_secs_f64());
}
