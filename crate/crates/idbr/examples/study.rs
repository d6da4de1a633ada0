//! Run a small benchmark simulation study and print the metrics report.
//!
//! Usage: study [levels] [n] [replications] [burn_in] [keep] [chains] [seed] [adapt_window] [design_seed]

use idbr::sampler::SamplerConfig;
use idbr::simulate::{run_study, SimDesign};

fn main() {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();
    let get = |i: usize, default: usize| args.get(i).copied().unwrap_or(default);
    let levels = get(0, 6);
    let n = get(1, 300);
    let replications = get(2, 5);
    let cfg = SamplerConfig {
        burn_in: get(3, 1000),
        keep: get(4, 1000),
        n_chains: get(5, 3),
        seed: get(6, 42) as u64,
        adapt_window: get(7, 50),
        ..SamplerConfig::default()
    };
    let design = SimDesign::benchmark_idbr(levels, n, replications, get(8, 2024) as u64);
    let start = std::time::Instant::now();
    let study = run_study(&design, &cfg).expect("study failed");
    println!("{}", study.report);
    println!("elapsed: {:.1}s", start.elapsed().as_secs_f64());
}
