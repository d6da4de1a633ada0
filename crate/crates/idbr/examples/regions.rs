//! Temporary diagnostic: per-row predictive-region anatomy on one
//! fit/predict pair of the benchmark design.

use idbr::predict;
use idbr::sampler::{fit_standardized, SamplerConfig};
use idbr::simulate::{prediction_seed, replication_dataset, SimDesign};

fn main() {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();
    let get = |i: usize, default: usize| args.get(i).copied().unwrap_or(default);
    let design = SimDesign::benchmark_idbr(get(0, 6), get(1, 900), 2, get(2, 7001) as u64);
    let cfg = SamplerConfig { adapt_window: 10, seed: 4242, ..SamplerConfig::default() };
    let (data, spec) = replication_dataset(&design, 0).unwrap();
    let (posterior, _) = fit_standardized(&data, &spec, &cfg).unwrap();
    let (next, _) = replication_dataset(&design, 1).unwrap();
    let seed = prediction_seed(design.seed, 1);

    let k = spec.scale.levels();
    let mut trigger = 0usize;
    let mut flagged = 0usize;
    let mut covered = 0usize;
    let mut correct = 0usize;
    let mut content = 0.0;
    let mut length = 0.0;
    let mut pi_sum = 0.0;
    let mut points = 0.0;
    let mut top_reach = vec![0usize; k + 1];
    let n = next.n();
    for i in 0..n {
        let mut rng = predict::row_rng(seed, i);
        let dist = predict::predictive_distribution(&posterior, &|c| next.value(i, c), &spec, 0.95, &mut rng)
            .unwrap();
        let region = &dist.region;
        trigger += usize::from(dist.pi_hat > 0.05);
        flagged += usize::from(region.disjoint);
        covered += usize::from(region.points.contains(&next.y_index()[i]));
        correct += usize::from(dist.mode == next.y_index()[i]);
        content += region.coverage;
        length += predict::region_length(&region.points, &spec.scale);
        pi_sum += dist.pi_hat;
        points += region.points.len() as f64;
        // highest interval point excluding a detached inflated level
        let interval_top = region
            .points
            .iter()
            .rev()
            .find(|p| !(region.disjoint && Some(**p) == spec.scale.inflated()))
            .copied()
            .unwrap_or(0);
        top_reach[interval_top] += 1;
    }
    let nf = n as f64;
    println!("trigger(pi>alpha): {:.3}", trigger as f64 / nf);
    println!("disjoint flag:     {:.3}", flagged as f64 / nf);
    println!("coverage:          {:.3}", covered as f64 / nf);
    println!("correct:           {:.3}", correct as f64 / nf);
    println!("mean content:      {:.4}", content / nf);
    println!("mean length:       {:.4}", length / nf);
    println!("mean pi_hat:       {:.4}", pi_sum / nf);
    println!("mean points:       {:.2}", points / nf);
    println!("interval top end distribution: {top_reach:?}");
}
