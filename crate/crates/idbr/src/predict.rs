//! Posterior-predictive distributions, point predictions, and possibly
//! disjoint HPD prediction regions.
//!
//! Each retained posterior draw produces one response draw by the two-step
//! mechanism: with probability `π` the inflated level, otherwise a beta
//! draw rounded up to the grid (`ŷ = h⌈u/h⌉`). The empirical law of those
//! draws is the predictive distribution. When the inflated level carries
//! more predictive mass than `1 − level` it is forced into the region and
//! the rest of the coverage comes from the shortest contiguous grid
//! interval of the remaining mass, which can leave the region disjoint.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::model::{mu_phi_to_pq, ModelSpec};
use crate::num::Rng;
use crate::sampler::PosteriorSample;
use crate::scale::ScaleSpec;

/// Slack used in coverage comparisons so empirical masses a few ulp short
/// of the target do not flip window decisions.
const COVERAGE_SLACK: f64 = 1e-12;

/// Snap tolerance for `u` exactly on a grid boundary.
const BOUNDARY_SNAP: f64 = 1e-9;

/// One draw from the predictive distribution of a single row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictiveDraw {
    /// 1-based grid index of the drawn level.
    pub index: usize,
    /// The level on the reduced grid.
    pub value: f64,
    /// Whether the draw came from the inflation step rather than the beta.
    pub from_inflation: bool,
}

/// RNG for one prediction row: stream = row index under the prediction seed.
///
/// Shared by the CLI and the simulation harness so in-sample predictions
/// reproduce exactly under the same seeds.
pub fn row_rng(seed: u64, row: usize) -> Rng {
    Rng::new(seed, row as u64)
}

/// Map a beta draw `u ∈ [0, 1]` to its grid level: `⌈u·K⌉`, with values on a
/// boundary snapping to that boundary's own level and `u = 0` mapping to the
/// first level.
fn ceil_to_grid(u: f64, levels: usize) -> usize {
    if u <= 0.0 {
        return 1;
    }
    let t = u * levels as f64;
    let nearest = math::round(t);
    let idx = if math::abs(t - nearest) <= BOUNDARY_SNAP { nearest } else { math::ceil(t) };
    (idx as usize).clamp(1, levels)
}

/// Draw one predictive response for a covariate row under one parameter
/// vector (flat, in `(γ, β, θ)` layout).
pub fn predictive_draw<F: Fn(usize) -> f64>(
    spec: &ModelSpec,
    params: &[f64],
    row: &F,
    rng: &mut Rng,
) -> Result<PredictiveDraw> {
    let pr = spec.predictors_flat(params, row);
    if spec.inflation.is_some() {
        let k = spec.scale.inflated().ok_or_else(|| {
            Error::InvalidSpec(alloc::string::String::from(
                "inflation submodel requires an inflated level on the scale",
            ))
        })?;
        if rng.uniform() <= pr.pi {
            return Ok(PredictiveDraw {
                index: k,
                value: spec.scale.grid_point(k),
                from_inflation: true,
            });
        }
    }
    let (p, q) = mu_phi_to_pq(pr.mu, pr.phi)?;
    let u = rng.beta(p, q)?;
    let index = ceil_to_grid(u, spec.scale.levels());
    Ok(PredictiveDraw { index, value: spec.scale.grid_point(index), from_inflation: false })
}

/// An HPD prediction region on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    /// 1-based grid indices, ascending.
    pub points: Vec<usize>,
    /// Total predictive mass inside the region.
    pub coverage: f64,
    /// Whether the inflated level sits apart from the interval part.
    pub disjoint: bool,
}

/// Monte Carlo predictive distribution for one covariate row.
///
/// The region is disjoint exactly when `pi_hat` exceeds `1 − level` and the
/// inflated level ends up neither inside nor adjacent to the interval part.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveDistribution {
    /// Empirical mass per grid level.
    pub mass: Vec<f64>,
    /// The part of `mass` contributed by the beta step only.
    pub beta_mass: Vec<f64>,
    /// Estimated predictive probability of the inflated level: the share of
    /// draws equal to it, whichever step produced them.
    pub pi_hat: f64,
    /// Modal level (1-based); ties break toward the lower level.
    pub mode: usize,
    /// Region at the level the distribution was built with.
    pub region: Region,
    /// Nominal level used for `region`.
    pub level: f64,
}

/// Build the predictive distribution of one row from every retained draw.
pub fn predictive_distribution<F: Fn(usize) -> f64>(
    posterior: &PosteriorSample,
    row: &F,
    spec: &ModelSpec,
    level: f64,
    rng: &mut Rng,
) -> Result<PredictiveDistribution> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain { op: "predictive_distribution", value: level });
    }
    let k = spec.scale.levels();
    let mut counts = vec![0u64; k];
    let mut beta_counts = vec![0u64; k];
    let mut total = 0u64;
    for draw in posterior.each_draw() {
        let d = predictive_draw(spec, draw, row, rng)?;
        counts[d.index - 1] += 1;
        if !d.from_inflation {
            beta_counts[d.index - 1] += 1;
        }
        total += 1;
    }
    let l = total as f64;
    let mass: Vec<f64> = counts.iter().map(|c| *c as f64 / l).collect();
    let beta_mass: Vec<f64> = beta_counts.iter().map(|c| *c as f64 / l).collect();
    let pi_hat = spec.scale.inflated().map_or(0.0, |k| mass[k - 1]);

    let mut mode = 1;
    for (i, m) in mass.iter().enumerate() {
        if *m > mass[mode - 1] {
            mode = i + 1;
        }
    }
    let region = build_region(&mass, pi_hat, level, &spec.scale);
    Ok(PredictiveDistribution { mass, beta_mass, pi_hat, mode, region, level })
}

/// HPD prediction region of a predictive distribution at `level`.
pub fn hpd_region(dist: &PredictiveDistribution, level: f64, scale: &ScaleSpec) -> Region {
    build_region(&dist.mass, dist.pi_hat, level, scale)
}

fn build_region(mass: &[f64], pi_hat: f64, level: f64, scale: &ScaleSpec) -> Region {
    let coverage_of = |points: &[usize]| points.iter().map(|k| mass[*k - 1]).sum::<f64>();
    if let Some(k_star) = scale.inflated() {
        if pi_hat > 1.0 - level {
            let target = level - pi_hat;
            if target <= 0.0 {
                // the inflated level alone already reaches the level
                return Region {
                    points: vec![k_star],
                    coverage: mass[k_star - 1],
                    disjoint: false,
                };
            }
            // the inflated level's mass is fully accounted for by π̂, so the
            // interval search sees the remaining distribution only
            let mut residual = mass.to_vec();
            residual[k_star - 1] = 0.0;
            let (start, end) = shortest_window(&residual, target);
            let mut points: Vec<usize> = (start..=end).collect();
            let disjoint = k_star + 1 < start || k_star > end + 1;
            if !points.contains(&k_star) {
                points.push(k_star);
                points.sort_unstable();
            }
            let coverage = coverage_of(&points);
            return Region { points, coverage, disjoint };
        }
    }
    let (start, end) = shortest_window(mass, level);
    let points: Vec<usize> = (start..=end).collect();
    let coverage = coverage_of(&points);
    Region { points, coverage, disjoint: false }
}

/// Shortest contiguous window (1-based inclusive bounds) whose weight sum
/// reaches `target`; ties break to fewer points, then to the lowest start.
fn shortest_window(weights: &[f64], target: f64) -> (usize, usize) {
    let k = weights.len();
    for len in 1..=k {
        for start in 0..=(k - len) {
            let sum: f64 = weights[start..start + len].iter().sum();
            if sum >= target - COVERAGE_SLACK {
                return (start + 1, start + len);
            }
        }
    }
    (1, k)
}

/// Length of a region on the reduced scale: span of the interval part,
/// plus `h` when the inflated level sits apart from it.
pub fn region_length(points: &[usize], scale: &ScaleSpec) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let mut sorted = points.to_vec();
    sorted.sort_unstable();
    sorted.dedup();

    // split into maximal runs of consecutive indices
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = sorted[0];
    let mut prev = sorted[0];
    for &k in &sorted[1..] {
        if k == prev + 1 {
            prev = k;
        } else {
            runs.push((start, prev));
            start = k;
            prev = k;
        }
    }
    runs.push((start, prev));

    if runs.len() == 1 {
        let (s, e) = runs[0];
        return scale.grid_point(e) - scale.grid_point(s);
    }
    // Two runs: the lone inflated point plus the interval. Span the
    // interval and add h for the detached point.
    let inflated = scale.inflated();
    let interval = runs
        .iter()
        .find(|(s, e)| !(s == e && Some(*s) == inflated))
        .copied()
        .unwrap_or(runs[0]);
    (scale.grid_point(interval.1) - scale.grid_point(interval.0)) + scale.h()
}

/// [`region_length`] rescaled so the longest possible region has length 1:
/// the full grid spans `1 − h`, so lengths are divided by that. This is the
/// comparable-across-K length used by reports.
pub fn scaled_region_length(points: &[usize], scale: &ScaleSpec) -> f64 {
    region_length(points, scale) / (1.0 - scale.h())
}
