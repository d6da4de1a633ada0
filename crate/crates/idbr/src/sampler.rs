//! Adaptive random-walk Metropolis estimation with three initialized
//! chains, convergence diagnostics, and posterior summaries.
//!
//! Proposals are component-wise Gaussian random walks. During burn-in the
//! per-coordinate log proposal scales follow a Robbins–Monro batch update
//! (±min(0.05, 1/√batch) toward the target acceptance rate) and are frozen
//! afterwards, so the retained sample comes from a fixed kernel.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::model::{
    beta_cell, inv_logit, logit, mu_phi_to_pq, squeeze, Dataset, ModelSpec, ParamVector,
    Submodel, PRIOR_BOUND, PROB_FLOOR,
};
use crate::num::Rng;
use crate::scale::ScaleSpec;

/// Initial proposal scale on every coordinate.
const INITIAL_SCALE: f64 = 0.1;

/// R̂ above this adds a convergence warning to the fit (never aborts).
const RHAT_WARN: f64 = 1.1;

/// Posterior medians within 2% of the prior boundary trigger a warning.
const BOUNDARY_WARN_FRACTION: f64 = 0.02;

/// Chain `c` draws from stream `CHAIN_STREAM_BASE + c` of the sampler seed.
const CHAIN_STREAM_BASE: u64 = 1;
/// Jitter for the third (and later) chain initializations.
const INIT_STREAM_BASE: u64 = 1_000_001;

/// Sampler settings. Defaults mirror the estimation protocol: burn-in 1000,
/// then 3 chains of 1000 retained draws each, target acceptance 0.44.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub burn_in: usize,
    pub keep: usize,
    pub n_chains: usize,
    pub target_accept: f64,
    pub seed: u64,
    pub adapt_window: usize,
    pub hpd_level: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            burn_in: 1000,
            keep: 1000,
            n_chains: 3,
            target_accept: 0.44,
            seed: 42,
            adapt_window: 50,
            hpd_level: 0.95,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in < 1 {
            return Err(Error::InvalidSpec(String::from("burn_in must be at least 1")));
        }
        if self.keep < 1 {
            return Err(Error::InvalidSpec(String::from("keep must be at least 1")));
        }
        if self.n_chains < 2 {
            return Err(Error::InvalidSpec(String::from(
                "need at least 2 chains for convergence diagnostics",
            )));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::InvalidSpec(String::from("target_accept must be in (0, 1)")));
        }
        if self.adapt_window < 1 {
            return Err(Error::InvalidSpec(String::from("adapt_window must be at least 1")));
        }
        if !(self.hpd_level > 0.0 && self.hpd_level < 1.0) {
            return Err(Error::InvalidSpec(String::from("hpd_level must be in (0, 1)")));
        }
        Ok(())
    }
}

/// A log target that supports cheap single-coordinate updates.
pub(crate) trait CoordTarget {
    fn dim(&self) -> usize;
    /// Set the full state and return its log density.
    fn reset(&mut self, x: &[f64]) -> f64;
    /// Log density with coordinate `j` moved to `value`, others unchanged.
    fn eval_coord(&mut self, j: usize, value: f64) -> f64;
    /// Adopt the proposal last evaluated for coordinate `j`.
    fn commit(&mut self, j: usize, value: f64);
    /// Support check applied before any density work.
    fn in_support(&self, _j: usize, _value: f64) -> bool {
        true
    }
}

/// One chain's retained draws plus its adaptation bookkeeping.
#[derive(Debug, Clone)]
pub struct ChainRun {
    /// Row-major `keep × dim` draw matrix.
    pub draws: Vec<f64>,
    pub dim: usize,
    pub keep: usize,
    /// Post-burn-in acceptance rate per coordinate.
    pub accept_rates: Vec<f64>,
    /// Frozen proposal scales in effect for every retained draw.
    pub final_scales: Vec<f64>,
    /// Acceptance over the last completed burn-in batch, per coordinate.
    pub last_burnin_batch_accept: Vec<f64>,
}

impl ChainRun {
    pub fn draw(&self, iter: usize) -> &[f64] {
        &self.draws[iter * self.dim..(iter + 1) * self.dim]
    }
}

pub(crate) fn run_chain_target<T: CoordTarget>(
    target: &mut T,
    init: &[f64],
    cfg: &SamplerConfig,
    rng: &mut Rng,
) -> ChainRun {
    let dim = target.dim();
    let mut current = init.to_vec();
    let mut cur_lp = target.reset(&current);

    let mut log_scales = vec![math::ln(INITIAL_SCALE); dim];
    let mut batch_accepts = vec![0usize; dim];
    let mut post_accepts = vec![0usize; dim];
    let mut last_batch_rates = vec![0.0; dim];
    let mut draws = Vec::with_capacity(cfg.keep * dim);
    let mut batch = 0usize;

    for iter in 0..cfg.burn_in + cfg.keep {
        let burning = iter < cfg.burn_in;
        for j in 0..dim {
            let step = math::exp(log_scales[j]) * rng.standard_normal();
            let proposal = current[j] + step;
            // The uniform is drawn unconditionally so rejected and
            // out-of-support proposals consume the same stream length.
            let u = rng.uniform();
            let mut accepted = false;
            if target.in_support(j, proposal) {
                let lp = target.eval_coord(j, proposal);
                if math::ln(u) < lp - cur_lp {
                    target.commit(j, proposal);
                    current[j] = proposal;
                    cur_lp = lp;
                    accepted = true;
                }
            }
            if burning {
                batch_accepts[j] += usize::from(accepted);
            } else {
                post_accepts[j] += usize::from(accepted);
            }
        }
        if burning && (iter + 1) % cfg.adapt_window == 0 {
            batch += 1;
            let delta = (1.0 / math::sqrt(batch as f64)).min(0.05);
            for j in 0..dim {
                let rate = batch_accepts[j] as f64 / cfg.adapt_window as f64;
                last_batch_rates[j] = rate;
                if rate > cfg.target_accept {
                    log_scales[j] += delta;
                } else if rate < cfg.target_accept {
                    log_scales[j] -= delta;
                }
                batch_accepts[j] = 0;
            }
        }
        if !burning {
            draws.extend_from_slice(&current);
        }
    }

    ChainRun {
        draws,
        dim,
        keep: cfg.keep,
        accept_rates: post_accepts.iter().map(|a| *a as f64 / cfg.keep as f64).collect(),
        final_scales: log_scales.iter().map(|s| math::exp(*s)).collect(),
        last_burnin_batch_accept: last_batch_rates,
    }
}

/// Row-major materialized design matrix for one submodel.
struct Design {
    width: usize,
    data: Vec<f64>,
}

impl Design {
    fn build(sub: &Submodel, data: &Dataset) -> Design {
        let n = data.n();
        let width = sub.width();
        let mut out = Vec::with_capacity(n * width);
        for i in 0..n {
            if sub.intercept {
                out.push(1.0);
            }
            for &c in &sub.cols {
                out.push(data.value(i, c));
            }
        }
        Design { width, data: out }
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }
}

#[inline]
fn dot(row: &[f64], coef: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (r, c) in row.iter().zip(coef) {
        acc += r * c;
    }
    acc
}

#[derive(Clone, Copy, PartialEq)]
enum Block {
    Inflation,
    Location,
    Dispersion,
}

/// The IDBR log posterior with per-observation caches.
///
/// A coordinate proposal only touches one linked predictor, so the other
/// two stay cached: inflation moves reuse the beta cell probabilities, and
/// location/dispersion moves reuse `π`. All refreshed quantities are
/// recomputed from full dot products, never updated incrementally.
pub(crate) struct PosteriorTarget<'a> {
    dim: usize,
    n: usize,
    k_of: Vec<usize>,
    inflated: Option<usize>,
    scale: ScaleSpec,
    w: Option<Design>,
    x: Design,
    z: Design,
    gamma_end: usize,
    beta_end: usize,
    params: Vec<f64>,
    cur_pi: Vec<f64>,
    cur_mu: Vec<f64>,
    cur_phi: Vec<f64>,
    cur_cell: Vec<f64>,
    prop_pi: Vec<f64>,
    prop_mu: Vec<f64>,
    prop_phi: Vec<f64>,
    prop_cell: Vec<f64>,
    prop_block: Option<Block>,
    _spec: core::marker::PhantomData<&'a ()>,
}

impl<'a> PosteriorTarget<'a> {
    pub(crate) fn new(data: &'a Dataset, spec: &'a ModelSpec) -> PosteriorTarget<'a> {
        let n = data.n();
        PosteriorTarget {
            dim: spec.dim(),
            n,
            k_of: data.y_index().to_vec(),
            inflated: spec.scale.inflated(),
            scale: spec.scale.clone(),
            w: spec.inflation.as_ref().map(|sub| Design::build(sub, data)),
            x: Design::build(&spec.location, data),
            z: Design::build(&spec.dispersion, data),
            gamma_end: spec.n_gamma(),
            beta_end: spec.n_gamma() + spec.n_beta(),
            params: vec![0.0; spec.dim()],
            cur_pi: vec![0.0; n],
            cur_mu: vec![0.0; n],
            cur_phi: vec![0.0; n],
            cur_cell: vec![0.0; n],
            prop_pi: vec![0.0; n],
            prop_mu: vec![0.0; n],
            prop_phi: vec![0.0; n],
            prop_cell: vec![0.0; n],
            prop_block: None,
            _spec: core::marker::PhantomData,
        }
    }

    fn block_of(&self, j: usize) -> Block {
        if j < self.gamma_end {
            Block::Inflation
        } else if j < self.beta_end {
            Block::Location
        } else {
            Block::Dispersion
        }
    }

    #[inline]
    fn obs_log_mass(&self, i: usize, pi: f64, cell: f64) -> f64 {
        let mass = if Some(self.k_of[i]) == self.inflated {
            pi + (1.0 - pi) * cell
        } else {
            (1.0 - pi) * cell
        };
        math::ln(mass.max(PROB_FLOOR))
    }

    /// Beta cell probability for observation `i` under shapes `(p, q)`.
    #[inline]
    fn cell(&self, i: usize, p: f64, q: f64, ln_b: f64) -> f64 {
        beta_cell(p, q, ln_b, self.k_of[i], &self.scale)
    }

    fn recompute_pi(&mut self, gamma: &[f64], into_prop: bool) {
        if let Some(w) = &self.w {
            for i in 0..self.n {
                let pi = squeeze(inv_logit(dot(w.row(i), gamma)));
                if into_prop {
                    self.prop_pi[i] = pi;
                } else {
                    self.cur_pi[i] = pi;
                }
            }
        } else if into_prop {
            self.prop_pi.fill(0.0);
        } else {
            self.cur_pi.fill(0.0);
        }
    }
}

impl<'a> CoordTarget for PosteriorTarget<'a> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn in_support(&self, _j: usize, value: f64) -> bool {
        math::abs(value) <= PRIOR_BOUND
    }

    fn reset(&mut self, x: &[f64]) -> f64 {
        self.params.copy_from_slice(x);
        let beta = &x[self.gamma_end..self.beta_end];
        let theta = &x[self.beta_end..];
        let gamma = x[..self.gamma_end].to_vec();
        self.recompute_pi(&gamma, false);
        let mut lp = 0.0;
        for i in 0..self.n {
            let mu = squeeze(inv_logit(dot(self.x.row(i), beta)));
            let phi = squeeze(inv_logit(dot(self.z.row(i), theta)));
            let (p, q) = mu_phi_to_pq(mu, phi).expect("squeezed predictors are interior");
            let ln_b = math::ln_gamma(p) + math::ln_gamma(q) - math::ln_gamma(p + q);
            let cell = self.cell(i, p, q, ln_b);
            self.cur_mu[i] = mu;
            self.cur_phi[i] = phi;
            self.cur_cell[i] = cell;
            lp += self.obs_log_mass(i, self.cur_pi[i], cell);
        }
        lp
    }

    fn eval_coord(&mut self, j: usize, value: f64) -> f64 {
        let block = self.block_of(j);
        self.prop_block = Some(block);
        let old = self.params[j];
        self.params[j] = value;
        let mut lp = 0.0;
        match block {
            Block::Inflation => {
                let gamma = self.params[..self.gamma_end].to_vec();
                self.recompute_pi(&gamma, true);
                for i in 0..self.n {
                    lp += self.obs_log_mass(i, self.prop_pi[i], self.cur_cell[i]);
                }
            }
            Block::Location => {
                let beta = self.params[self.gamma_end..self.beta_end].to_vec();
                for i in 0..self.n {
                    let mu = squeeze(inv_logit(dot(self.x.row(i), &beta)));
                    let phi = self.cur_phi[i];
                    let s = 1.0 / phi - 1.0;
                    let (p, q) = (mu * s, (1.0 - mu) * s);
                    let ln_b = math::ln_gamma(p) + math::ln_gamma(q) - math::ln_gamma(p + q);
                    let cell = self.cell(i, p, q, ln_b);
                    self.prop_mu[i] = mu;
                    self.prop_cell[i] = cell;
                    lp += self.obs_log_mass(i, self.cur_pi[i], cell);
                }
            }
            Block::Dispersion => {
                let theta = self.params[self.beta_end..].to_vec();
                for i in 0..self.n {
                    let phi = squeeze(inv_logit(dot(self.z.row(i), &theta)));
                    let mu = self.cur_mu[i];
                    let s = 1.0 / phi - 1.0;
                    let (p, q) = (mu * s, (1.0 - mu) * s);
                    let ln_b = math::ln_gamma(p) + math::ln_gamma(q) - math::ln_gamma(p + q);
                    let cell = self.cell(i, p, q, ln_b);
                    self.prop_phi[i] = phi;
                    self.prop_cell[i] = cell;
                    lp += self.obs_log_mass(i, self.cur_pi[i], cell);
                }
            }
        }
        self.params[j] = old;
        lp
    }

    fn commit(&mut self, j: usize, value: f64) {
        let block = self.prop_block.take().expect("commit without a pending proposal");
        debug_assert!(block == self.block_of(j));
        self.params[j] = value;
        match block {
            Block::Inflation => core::mem::swap(&mut self.cur_pi, &mut self.prop_pi),
            Block::Location => {
                core::mem::swap(&mut self.cur_mu, &mut self.prop_mu);
                core::mem::swap(&mut self.cur_cell, &mut self.prop_cell);
            }
            Block::Dispersion => {
                core::mem::swap(&mut self.cur_phi, &mut self.prop_phi);
                core::mem::swap(&mut self.cur_cell, &mut self.prop_cell);
            }
        }
    }
}

/// Moment-matched initial values: intercepts are set so the marginal
/// response distribution is roughly reproduced, other coefficients are 0.
///
/// Returns the vector plus a flag saying whether a constant response forced
/// the fallback to the chain-2 values.
pub fn init_chain_1(data: &Dataset, spec: &ModelSpec) -> (ParamVector, bool) {
    let y = data.y();
    let n = y.len();
    let constant = n < 2 || y.iter().all(|v| *v == y[0]);
    if constant {
        return (init_chain_2(spec), true);
    }
    let nf = n as f64;
    let ybar = y.iter().sum::<f64>() / nf;
    let s2 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum::<f64>() / (nf - 1.0);

    let clamp_arg = |u: f64| u.clamp(1e-6, 1.0 - 1e-6);
    let clip = |v: f64| v.clamp(-PRIOR_BOUND, PRIOR_BOUND);

    let mut params = ParamVector::zeros(spec);
    let mut offset = 0;
    if let Some(infl) = &spec.inflation {
        if infl.intercept {
            let k = spec.scale.inflated().expect("validated: inflation needs an inflated level");
            let share =
                data.y_index().iter().filter(|idx| **idx == k).count() as f64 / nf;
            params.values_mut()[offset] = clip(logit(clamp_arg(share)));
        }
        offset += infl.width();
    }
    if spec.location.intercept {
        params.values_mut()[offset] = clip(logit(clamp_arg(ybar)));
    }
    offset += spec.location.width();
    if spec.dispersion.intercept {
        let ratio = s2 / (ybar * (1.0 - ybar));
        params.values_mut()[offset] = clip(logit(clamp_arg(ratio)));
    }
    (params, false)
}

/// Initial values matching a uniform, uninflated response: `γ₀ = −9`,
/// `β₀ = logit(1/2) = 0`, `θ₀ = logit(1/3)`.
pub fn init_chain_2(spec: &ModelSpec) -> ParamVector {
    let mut params = ParamVector::zeros(spec);
    let mut offset = 0;
    if let Some(infl) = &spec.inflation {
        if infl.intercept {
            params.values_mut()[offset] = -9.0;
        }
        offset += infl.width();
    }
    // location intercept is logit(1/2) = 0, already there
    offset += spec.location.width();
    if spec.dispersion.intercept {
        params.values_mut()[offset] = logit(1.0 / 3.0);
    }
    params
}

/// Chain-1 values with independent uniform jitter on `[−0.5, 0.5]` per
/// coordinate, clipped to the prior box.
pub fn init_chain_3(data: &Dataset, spec: &ModelSpec, rng: &mut Rng) -> ParamVector {
    let (mut params, _) = init_chain_1(data, spec);
    for v in params.values_mut() {
        *v = (*v + rng.uniform() - 0.5).clamp(-PRIOR_BOUND, PRIOR_BOUND);
    }
    params
}

/// Classical potential scale reduction factor for one scalar parameter.
///
/// `W` is the mean within-chain sample variance, `B/n` the sample variance
/// of the chain means; `R̂ = √(((n−1)/n · W + B/n) / W)`.
pub fn gelman_rubin(chains: &[&[f64]]) -> f64 {
    let m = chains.len();
    assert!(m >= 2, "need at least two chains");
    let n = chains[0].len();
    assert!(n >= 2, "need at least two draws per chain");
    assert!(chains.iter().all(|c| c.len() == n), "chains must have equal lengths");

    let nf = n as f64;
    let mut means = Vec::with_capacity(m);
    let mut vars = Vec::with_capacity(m);
    for chain in chains {
        let mean = chain.iter().sum::<f64>() / nf;
        let var = chain.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
        means.push(mean);
        vars.push(var);
    }
    let w = vars.iter().sum::<f64>() / m as f64;
    let grand = means.iter().sum::<f64>() / m as f64;
    let b_over_n =
        means.iter().map(|v| (v - grand) * (v - grand)).sum::<f64>() / (m as f64 - 1.0);
    if w == 0.0 {
        return if b_over_n == 0.0 { 1.0 } else { f64::INFINITY };
    }
    math::sqrt(((nf - 1.0) / nf * w + b_over_n) / w)
}

/// Shortest empirical interval containing `ceil(level · L)` of the draws.
///
/// Draws are sorted internally; among windows of that many consecutive
/// order statistics the narrowest wins, ties going to the lowest start.
pub fn hpd_interval(draws: &[f64], level: f64) -> Result<(f64, f64)> {
    if draws.len() < 10 {
        return Err(Error::TooFewDraws { needed: 10, got: draws.len() });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain { op: "hpd_interval", value: level });
    }
    let mut sorted = draws.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("draws must not contain NaN"));
    let l = sorted.len();
    // tolerate float fuzz in level·L before taking the ceiling
    let m = (math::ceil(level * l as f64 - 1e-9) as usize).clamp(1, l);
    let mut best = 0;
    let mut best_width = f64::INFINITY;
    for start in 0..=(l - m) {
        let width = sorted[start + m - 1] - sorted[start];
        if width < best_width {
            best_width = width;
            best = start;
        }
    }
    Ok((sorted[best], sorted[best + m - 1]))
}

/// Effective sample size across chains (Geyer initial-positive-sequence
/// truncation of the autocorrelation sum, per chain, summed).
pub fn effective_size(chains: &[&[f64]]) -> f64 {
    let mut total = 0.0;
    for chain in chains {
        let n = chain.len();
        if n < 4 {
            total += n as f64;
            continue;
        }
        let nf = n as f64;
        let mean = chain.iter().sum::<f64>() / nf;
        let var0 = chain.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
        if var0 == 0.0 {
            total += 1.0;
            continue;
        }
        let auto = |t: usize| -> f64 {
            let mut s = 0.0;
            for i in 0..n - t {
                s += (chain[i] - mean) * (chain[i + t] - mean);
            }
            s / nf / var0
        };
        let mut tau = 1.0;
        let mut t = 1;
        while t + 1 < n {
            let pair = auto(t) + auto(t + 1);
            if pair <= 0.0 {
                break;
            }
            tau += 2.0 * pair;
            t += 2;
        }
        total += nf / tau.max(1e-8);
    }
    total
}

/// Posterior draws with their summaries.
#[derive(Debug, Clone)]
pub struct PosteriorSample {
    pub param_names: Vec<String>,
    pub dim: usize,
    pub n_chains: usize,
    pub keep: usize,
    pub hpd_level: f64,
    chains: Vec<Vec<f64>>,
    pub acceptance_rates: Vec<f64>,
    pub gelman: Vec<f64>,
    pub medians: Vec<f64>,
    pub hpd: Vec<(f64, f64)>,
    pub effective_sizes: Vec<f64>,
    /// Share of pooled draws whose sign opposes the posterior median's.
    pub sign_opposition: Vec<f64>,
    pub warnings: Vec<String>,
}

impl PosteriorSample {
    /// Assemble the summaries from per-chain draw matrices.
    ///
    /// Also the path by which a persisted fit is revived from its draws.
    pub fn from_chains(
        chains: Vec<Vec<f64>>,
        acceptance_per_chain: Vec<Vec<f64>>,
        param_names: Vec<String>,
        keep: usize,
        hpd_level: f64,
        mut warnings: Vec<String>,
    ) -> Result<Self> {
        let n_chains = chains.len();
        if n_chains < 2 {
            return Err(Error::InvalidSpec(String::from("need draws from at least two chains")));
        }
        let dim = param_names.len();
        for chain in &chains {
            if chain.len() != keep * dim {
                return Err(Error::InvalidSpec(String::from(
                    "chain draw matrix does not match keep × dim",
                )));
            }
        }
        let total = n_chains * keep;
        let mut medians = Vec::with_capacity(dim);
        let mut hpd = Vec::with_capacity(dim);
        let mut gelman = Vec::with_capacity(dim);
        let mut effective = Vec::with_capacity(dim);
        let mut sign_p = Vec::with_capacity(dim);

        let mut column = vec![0.0; total];
        let mut per_chain_col: Vec<Vec<f64>> = vec![vec![0.0; keep]; n_chains];
        for j in 0..dim {
            for (c, chain) in chains.iter().enumerate() {
                for t in 0..keep {
                    let v = chain[t * dim + j];
                    column[c * keep + t] = v;
                    per_chain_col[c][t] = v;
                }
            }
            let refs: Vec<&[f64]> = per_chain_col.iter().map(|c| c.as_slice()).collect();
            gelman.push(gelman_rubin(&refs));
            effective.push(effective_size(&refs));
            hpd.push(hpd_interval(&column, hpd_level)?);

            let mut sorted = column.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("draws must not contain NaN"));
            let median = if total % 2 == 1 {
                sorted[total / 2]
            } else {
                0.5 * (sorted[total / 2 - 1] + sorted[total / 2])
            };
            medians.push(median);
            let opposed = if median >= 0.0 {
                column.iter().filter(|v| **v < 0.0).count()
            } else {
                column.iter().filter(|v| **v > 0.0).count()
            };
            sign_p.push(opposed as f64 / total as f64);
        }

        let acceptance_rates: Vec<f64> = (0..dim)
            .map(|j| {
                acceptance_per_chain.iter().map(|a| a[j]).sum::<f64>() / n_chains as f64
            })
            .collect();

        let poor: Vec<&str> = (0..dim)
            .filter(|j| gelman[*j] > RHAT_WARN)
            .map(|j| param_names[j].as_str())
            .collect();
        if !poor.is_empty() {
            warnings.push(format!(
                "convergence: R-hat exceeds {RHAT_WARN} for {}",
                poor.join(", ")
            ));
        }
        let near: Vec<&str> = (0..dim)
            .filter(|j| math::abs(medians[*j]) >= PRIOR_BOUND * (1.0 - BOUNDARY_WARN_FRACTION))
            .map(|j| param_names[j].as_str())
            .collect();
        if !near.is_empty() {
            warnings.push(format!(
                "posterior median within 2% of the prior boundary for {}",
                near.join(", ")
            ));
        }

        Ok(PosteriorSample {
            param_names,
            dim,
            n_chains,
            keep,
            hpd_level,
            chains,
            acceptance_rates,
            gelman,
            medians,
            hpd,
            effective_sizes: effective,
            sign_opposition: sign_p,
            warnings,
        })
    }

    /// Pooled draw count `L`.
    pub fn total_draws(&self) -> usize {
        self.n_chains * self.keep
    }

    pub fn chain(&self, c: usize) -> &[f64] {
        &self.chains[c]
    }

    /// Pooled column of one parameter, chain-major order.
    pub fn pooled(&self, j: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.total_draws());
        for chain in &self.chains {
            for t in 0..self.keep {
                out.push(chain[t * self.dim + j]);
            }
        }
        out
    }

    /// Iterate over all pooled draws as parameter slices, chain-major.
    pub fn each_draw(&self) -> impl Iterator<Item = &[f64]> {
        let dim = self.dim;
        self.chains.iter().flat_map(move |chain| chain.chunks_exact(dim))
    }
}

/// Run one Metropolis chain for the IDBR posterior.
pub fn run_chain(
    init: &ParamVector,
    data: &Dataset,
    spec: &ModelSpec,
    cfg: &SamplerConfig,
    rng: &mut Rng,
) -> Result<ChainRun> {
    if !init.in_prior_box() {
        return Err(Error::InvalidSpec(String::from("initial values must lie in the prior box")));
    }
    spec.validate(data)?;
    let mut target = PosteriorTarget::new(data, spec);
    Ok(run_chain_target(&mut target, init.values(), cfg, rng))
}

/// Per-column centering/scaling parameters of a standardized fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl Standardization {
    /// Column statistics of a dataset. Constant columns are left untouched
    /// (the rank check rejects them when they collide with an intercept).
    pub fn from_data(data: &Dataset) -> Self {
        let n = data.n() as f64;
        let mut means = Vec::with_capacity(data.columns());
        let mut sds = Vec::with_capacity(data.columns());
        for c in 0..data.columns() {
            let col = data.column(c);
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            let sd = math::sqrt(var);
            if sd > 0.0 {
                means.push(mean);
                sds.push(sd);
            } else {
                means.push(0.0);
                sds.push(1.0);
            }
        }
        Standardization { means, sds }
    }

    /// The dataset with every covariate column centered and scaled.
    pub fn apply(&self, data: &Dataset, scale: &ScaleSpec) -> Result<Dataset> {
        let columns = (0..data.columns())
            .map(|c| {
                let col = data
                    .column(c)
                    .iter()
                    .map(|v| (v - self.means[c]) / self.sds[c])
                    .collect();
                (data.names()[c].clone(), col)
            })
            .collect();
        Dataset::new(data.y().to_vec(), columns, scale)
    }

    /// Map one standardized-scale draw back to original-scale coefficients.
    ///
    /// For a submodel with intercept, `η = b₀ + Σ bⱼ (xⱼ − mⱼ)/sⱼ` becomes
    /// `(b₀ − Σ bⱼ mⱼ/sⱼ) + Σ (bⱼ/sⱼ) xⱼ`.
    pub fn unstandardize_draw(&self, spec: &ModelSpec, draw: &mut [f64]) {
        let mut offset = 0;
        let per_submodel = |sub: &Submodel, draw: &mut [f64], offset: usize| {
            let base = offset + usize::from(sub.intercept);
            let mut shift = 0.0;
            for (i, &c) in sub.cols.iter().enumerate() {
                shift += draw[base + i] * self.means[c] / self.sds[c];
                draw[base + i] /= self.sds[c];
            }
            if sub.intercept {
                draw[offset] -= shift;
            }
        };
        if let Some(infl) = &spec.inflation {
            per_submodel(infl, draw, offset);
            offset += infl.width();
        }
        per_submodel(&spec.location, draw, offset);
        offset += spec.location.width();
        per_submodel(&spec.dispersion, draw, offset);
    }
}

/// [`fit`] on internally standardized covariates, with the retained draws
/// mapped back to original-scale coefficients before summarizing.
///
/// Centering removes the intercept–slope posterior correlations that choke
/// a component-wise sampler, and it is the parametrization under which the
/// `[−10, 10]` prior box is meant to hold. Every submodel must carry an
/// intercept, otherwise centering would change the model.
pub fn fit_standardized(
    data: &Dataset,
    spec: &ModelSpec,
    cfg: &SamplerConfig,
) -> Result<(PosteriorSample, Standardization)> {
    let with_intercepts = spec.inflation.as_ref().map_or(true, |s| s.intercept)
        && spec.location.intercept
        && spec.dispersion.intercept;
    if !with_intercepts {
        return Err(Error::InvalidSpec(String::from(
            "standardized fits need an intercept in every submodel",
        )));
    }
    let standardization = Standardization::from_data(data);
    let transformed = standardization.apply(data, &spec.scale)?;
    let (mut chains, acceptance, warnings) = run_fit_chains(&transformed, spec, cfg)?;
    for chain in chains.iter_mut() {
        for draw in chain.chunks_exact_mut(spec.dim()) {
            standardization.unstandardize_draw(spec, draw);
        }
    }
    let sample = PosteriorSample::from_chains(
        chains,
        acceptance,
        spec.param_names(data),
        cfg.keep,
        cfg.hpd_level,
        warnings,
    )?;
    Ok((sample, standardization))
}

/// Full estimation: chains with the three initializations, pooled summaries.
pub fn fit(data: &Dataset, spec: &ModelSpec, cfg: &SamplerConfig) -> Result<PosteriorSample> {
    let (chains, acceptance, warnings) = run_fit_chains(data, spec, cfg)?;
    PosteriorSample::from_chains(
        chains,
        acceptance,
        spec.param_names(data),
        cfg.keep,
        cfg.hpd_level,
        warnings,
    )
}

type FitChains = (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<String>);

fn run_fit_chains(data: &Dataset, spec: &ModelSpec, cfg: &SamplerConfig) -> Result<FitChains> {
    cfg.validate()?;
    spec.validate(data)?;
    spec.check_designs(data)?;

    let mut warnings = Vec::new();
    let (first, fell_back) = init_chain_1(data, spec);
    if fell_back {
        warnings.push(String::from(
            "constant response: chain 1 fell back to the uniform-response initialization",
        ));
    }

    let mut chains = Vec::with_capacity(cfg.n_chains);
    let mut acceptance = Vec::with_capacity(cfg.n_chains);
    for c in 0..cfg.n_chains {
        let init = match c {
            0 => first.clone(),
            1 => init_chain_2(spec),
            _ => {
                let mut jitter_rng = Rng::new(cfg.seed, INIT_STREAM_BASE + c as u64);
                init_chain_3(data, spec, &mut jitter_rng)
            }
        };
        let mut rng = Rng::new(cfg.seed, CHAIN_STREAM_BASE + c as u64);
        let mut target = PosteriorTarget::new(data, spec);
        let run = run_chain_target(&mut target, init.values(), cfg, &mut rng);
        chains.push(run.draws);
        acceptance.push(run.accept_rates);
    }
    Ok((chains, acceptance, warnings))
}
