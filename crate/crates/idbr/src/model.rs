//! Links, parametrization, per-observation likelihood, and log posterior.
//!
//! The response on the reduced grid is modeled as the discretization of a
//! latent `Beta(p, q)`: the probability of level `kh` is the beta-density
//! area over `(kh − h, kh]`. Location `μ` (beta mean) and dispersion `φ`
//! (`Var = μ(1−μ)φ`) are logit-linked linear predictors, as is the optional
//! point-mass share `π` at the inflated level. Priors are flat on the
//! closed box `[−10, 10]` per coefficient.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::num;
use crate::scale::ScaleSpec;

/// Half-width of the flat prior box on every regression coefficient.
pub const PRIOR_BOUND: f64 = 10.0;

/// Interval probabilities are floored here before taking logs, so extreme
/// excursions inside the prior box cannot poison a chain with `−∞`.
pub const PROB_FLOOR: f64 = 1e-300;

/// Probability-scale clamp for the links.
const LINK_EPS: f64 = 1e-12;

/// Condition-number threshold on the normal-equations matrix.
const COND_THRESHOLD: f64 = 1e8;

/// `ln(u / (1−u))`, with `u` clamped into `[1e−12, 1 − 1e−12]` first.
pub fn logit(u: f64) -> f64 {
    let u = u.clamp(LINK_EPS, 1.0 - LINK_EPS);
    math::ln(u / (1.0 - u))
}

/// Inverse logit, evaluated on the non-overflowing branch for either sign.
pub fn inv_logit(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + math::exp(-v))
    } else {
        let e = math::exp(v);
        e / (1.0 + e)
    }
}

#[inline]
pub(crate) fn squeeze(p: f64) -> f64 {
    p.clamp(LINK_EPS, 1.0 - LINK_EPS)
}

/// Convert (mean, dispersion) to beta shapes: `p = μ(1/φ − 1)`, `q = (1−μ)(1/φ − 1)`.
pub fn mu_phi_to_pq(mu: f64, phi: f64) -> Result<(f64, f64)> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::Domain { op: "mu_phi_to_pq", value: mu });
    }
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::Domain { op: "mu_phi_to_pq", value: phi });
    }
    let s = 1.0 / phi - 1.0;
    Ok((mu * s, (1.0 - mu) * s))
}

/// Dispersion to precision: `ϕ = 1/φ − 1`, so dispersion effects are the
/// precision effects with flipped signs.
pub fn dispersion_to_precision(phi: f64) -> Result<f64> {
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::Domain { op: "dispersion_to_precision", value: phi });
    }
    Ok(1.0 / phi - 1.0)
}

/// Column selection for one submodel's linear predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct Submodel {
    /// Indices into the dataset's covariate columns.
    pub cols: Vec<usize>,
    /// Whether an intercept column of ones is prepended.
    pub intercept: bool,
}

impl Submodel {
    /// Submodel on the given columns with an intercept (the default).
    pub fn with_intercept(cols: Vec<usize>) -> Self {
        Submodel { cols, intercept: true }
    }

    /// Intercept-only submodel.
    pub fn intercept_only() -> Self {
        Submodel { cols: Vec::new(), intercept: true }
    }

    /// Number of coefficients.
    pub fn width(&self) -> usize {
        self.cols.len() + usize::from(self.intercept)
    }
}

/// The model: scale plus the three submodels.
///
/// `inflation: None` is the pure (uninflated) discrete beta regression.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub scale: ScaleSpec,
    pub inflation: Option<Submodel>,
    pub location: Submodel,
    pub dispersion: Submodel,
}

impl ModelSpec {
    pub fn dbr(scale: ScaleSpec, location: Submodel, dispersion: Submodel) -> Self {
        ModelSpec { scale, inflation: None, location, dispersion }
    }

    pub fn idbr(
        scale: ScaleSpec,
        inflation: Submodel,
        location: Submodel,
        dispersion: Submodel,
    ) -> Self {
        ModelSpec { scale, inflation: Some(inflation), location, dispersion }
    }

    pub fn n_gamma(&self) -> usize {
        self.inflation.as_ref().map_or(0, Submodel::width)
    }

    pub fn n_beta(&self) -> usize {
        self.location.width()
    }

    pub fn n_theta(&self) -> usize {
        self.dispersion.width()
    }

    /// Total coefficient count across the three submodels.
    pub fn dim(&self) -> usize {
        self.n_gamma() + self.n_beta() + self.n_theta()
    }

    /// Structural consistency with a dataset (column bounds, inflation level).
    pub fn validate(&self, data: &Dataset) -> Result<()> {
        if self.inflation.is_some() && self.scale.inflated().is_none() {
            return Err(Error::InvalidSpec(String::from(
                "inflation submodel requires an inflated level on the scale",
            )));
        }
        let m = data.names().len();
        let check = |sub: &Submodel, name: &str| -> Result<()> {
            for &c in &sub.cols {
                if c >= m {
                    return Err(Error::InvalidSpec(format!(
                        "{name} submodel references column {c}, dataset has {m}"
                    )));
                }
            }
            if sub.width() == 0 {
                return Err(Error::InvalidSpec(format!("{name} submodel has no coefficients")));
            }
            Ok(())
        };
        if let Some(infl) = &self.inflation {
            check(infl, "inflation")?;
        }
        check(&self.location, "location")?;
        check(&self.dispersion, "dispersion")?;
        Ok(())
    }

    /// Numerical full-rank check of each design matrix (fit-time gate).
    pub fn check_designs(&self, data: &Dataset) -> Result<()> {
        if let Some(infl) = &self.inflation {
            check_full_rank(data, infl, "inflation")?;
        }
        check_full_rank(data, &self.location, "location")?;
        check_full_rank(data, &self.dispersion, "dispersion")?;
        Ok(())
    }

    /// Human-readable coefficient names, in parameter-vector order.
    pub fn param_names(&self, data: &Dataset) -> Vec<String> {
        let mut out = Vec::with_capacity(self.dim());
        let push = |sub: &Submodel, name: &str, out: &mut Vec<String>| {
            if sub.intercept {
                out.push(format!("{name}.Intercept"));
            }
            for &c in &sub.cols {
                out.push(format!("{name}.{}", data.names()[c]));
            }
        };
        if let Some(infl) = &self.inflation {
            push(infl, "inflation", &mut out);
        }
        push(&self.location, "location", &mut out);
        push(&self.dispersion, "dispersion", &mut out);
        out
    }

    /// Evaluate the three linked predictors for one covariate row.
    ///
    /// `col_value` maps a dataset column index to that row's value.
    pub fn predictors<F: Fn(usize) -> f64>(&self, params: &ParamVector, col_value: F) -> Predictors {
        self.predictors_flat(params.values(), &col_value)
    }

    /// Same as [`Self::predictors`] on a flat `(γ, β, θ)` slice.
    pub fn predictors_flat<F: Fn(usize) -> f64>(&self, values: &[f64], col_value: &F) -> Predictors {
        let n_gamma = self.n_gamma();
        let beta_end = n_gamma + self.n_beta();
        let pi = match &self.inflation {
            None => 0.0,
            Some(sub) => squeeze(inv_logit(lin_pred(&values[..n_gamma], sub, col_value))),
        };
        let mu = squeeze(inv_logit(lin_pred(&values[n_gamma..beta_end], &self.location, col_value)));
        let phi = squeeze(inv_logit(lin_pred(&values[beta_end..], &self.dispersion, col_value)));
        Predictors { pi, mu, phi }
    }
}

fn lin_pred<F: Fn(usize) -> f64>(coef: &[f64], sub: &Submodel, col_value: &F) -> f64 {
    let mut acc = 0.0;
    let mut i = 0;
    if sub.intercept {
        acc = coef[0];
        i = 1;
    }
    for &c in &sub.cols {
        acc += coef[i] * col_value(c);
        i += 1;
    }
    acc
}

/// The per-row linked quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Predictors {
    /// Point-mass share at the inflated level (0 without an inflation submodel).
    pub pi: f64,
    /// Beta mean.
    pub mu: f64,
    /// Beta dispersion.
    pub phi: f64,
}

/// Concatenated coefficient vector `(γ, β, θ)` with recorded offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    values: Vec<f64>,
    n_gamma: usize,
    n_beta: usize,
    n_theta: usize,
}

impl ParamVector {
    /// All-zero coefficients shaped for `spec`.
    pub fn zeros(spec: &ModelSpec) -> Self {
        ParamVector {
            values: vec![0.0; spec.dim()],
            n_gamma: spec.n_gamma(),
            n_beta: spec.n_beta(),
            n_theta: spec.n_theta(),
        }
    }

    pub fn from_parts(gamma: &[f64], beta: &[f64], theta: &[f64]) -> Self {
        let mut values = Vec::with_capacity(gamma.len() + beta.len() + theta.len());
        values.extend_from_slice(gamma);
        values.extend_from_slice(beta);
        values.extend_from_slice(theta);
        ParamVector { values, n_gamma: gamma.len(), n_beta: beta.len(), n_theta: theta.len() }
    }

    /// Wrap a flat vector laid out for `spec`.
    pub fn from_flat(values: Vec<f64>, spec: &ModelSpec) -> Result<Self> {
        if values.len() != spec.dim() {
            return Err(Error::InvalidSpec(format!(
                "parameter vector has length {}, model needs {}",
                values.len(),
                spec.dim()
            )));
        }
        Ok(ParamVector {
            values,
            n_gamma: spec.n_gamma(),
            n_beta: spec.n_beta(),
            n_theta: spec.n_theta(),
        })
    }

    pub fn gamma(&self) -> &[f64] {
        &self.values[..self.n_gamma]
    }

    pub fn beta(&self) -> &[f64] {
        &self.values[self.n_gamma..self.n_gamma + self.n_beta]
    }

    pub fn theta(&self) -> &[f64] {
        &self.values[self.n_gamma + self.n_beta..]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Whether every coefficient lies in the closed prior box.
    pub fn in_prior_box(&self) -> bool {
        self.values.iter().all(|v| math::abs(*v) <= PRIOR_BOUND)
    }
}

/// Observed responses (already on the reduced grid) plus named covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<f64>,
    y_index: Vec<usize>,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Dataset {
    /// Build a dataset, validating and snapping every response to the grid.
    pub fn new(
        y_reduced: Vec<f64>,
        columns: Vec<(String, Vec<f64>)>,
        scale: &ScaleSpec,
    ) -> Result<Self> {
        let n = y_reduced.len();
        let mut y = Vec::with_capacity(n);
        let mut y_index = Vec::with_capacity(n);
        for (row, &v) in y_reduced.iter().enumerate() {
            let k = scale.grid_index(v).map_err(|_| Error::OffGrid { value: v, row: Some(row) })?;
            y_index.push(k);
            y.push(scale.grid_point(k));
        }
        let mut names = Vec::with_capacity(columns.len());
        let mut cols = Vec::with_capacity(columns.len());
        for (name, col) in columns {
            if col.len() != n {
                return Err(Error::InvalidSpec(format!(
                    "column {name} has {} rows, response has {n}",
                    col.len()
                )));
            }
            if let Some(bad) = col.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidSpec(format!("column {name} contains {bad}")));
            }
            names.push(name);
            cols.push(col);
        }
        Ok(Dataset { y, y_index, names, columns: cols })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Responses on the reduced grid.
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// 1-based grid index of each response.
    pub fn y_index(&self) -> &[usize] {
        &self.y_index
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    #[inline]
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.columns[col][row]
    }
}

/// Probability mass over the K grid points under the (uninflated) DBR.
///
/// Component `k` is the beta-density area over `((k−1)h, kh]`; the cells
/// telescope, so they sum to one by construction.
pub fn dbr_pmf(mu: f64, phi: f64, scale: &ScaleSpec) -> Result<Vec<f64>> {
    let (p, q) = mu_phi_to_pq(mu, phi)?;
    let ln_b = num::log_beta(p, q)?;
    let k = scale.levels();
    let mut out = Vec::with_capacity(k);
    let mut prev = 0.0;
    for i in 1..=k {
        let cdf = if i == k {
            1.0
        } else {
            let x = scale.grid_point(i);
            num::reg_inc_beta_prepared(x, math::ln(x), math::ln_1p(-x), p, q, ln_b)
        };
        out.push((cdf - prev).max(0.0));
        prev = cdf;
    }
    Ok(out)
}

/// Probability mass under the inflated model: `(1−π)·DBR + π·δ(inflated)`.
pub fn idbr_pmf(pi: f64, mu: f64, phi: f64, scale: &ScaleSpec) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&pi) {
        return Err(Error::Domain { op: "idbr_pmf", value: pi });
    }
    let inflated = scale.inflated();
    if pi > 0.0 && inflated.is_none() {
        return Err(Error::InvalidSpec(String::from(
            "positive inflation probability but the scale has no inflated level",
        )));
    }
    let mut pmf = dbr_pmf(mu, phi, scale)?;
    if pi > 0.0 {
        for cell in pmf.iter_mut() {
            *cell *= 1.0 - pi;
        }
        pmf[inflated.unwrap() - 1] += pi;
    }
    Ok(pmf)
}

/// Beta-density area over the grid cell of (1-based) index `k`.
pub(crate) fn beta_cell(p: f64, q: f64, ln_b: f64, k: usize, scale: &ScaleSpec) -> f64 {
    let levels = scale.levels();
    let upper = if k == levels {
        1.0
    } else {
        let x = scale.grid_point(k);
        num::reg_inc_beta_prepared(x, math::ln(x), math::ln_1p(-x), p, q, ln_b)
    };
    let lower = if k == 1 {
        0.0
    } else {
        let x = scale.grid_point(k - 1);
        num::reg_inc_beta_prepared(x, math::ln(x), math::ln_1p(-x), p, q, ln_b)
    };
    (upper - lower).max(0.0)
}

/// Sum over observations of the log IDBR probability of the observed level.
///
/// Finite everywhere on the prior box thanks to the probability floor.
pub fn log_likelihood(params: &ParamVector, data: &Dataset, spec: &ModelSpec) -> f64 {
    let inflated = spec.scale.inflated();
    let mut total = 0.0;
    for i in 0..data.n() {
        let pr = spec.predictors(params, |c| data.value(i, c));
        let (p, q) = mu_phi_to_pq(pr.mu, pr.phi).expect("squeezed predictors are interior");
        let ln_b = math::ln_gamma(p) + math::ln_gamma(q) - math::ln_gamma(p + q);
        let k = data.y_index()[i];
        let cell = beta_cell(p, q, ln_b, k, &spec.scale);
        let mass = if Some(k) == inflated {
            pr.pi + (1.0 - pr.pi) * cell
        } else {
            (1.0 - pr.pi) * cell
        };
        total += math::ln(mass.max(PROB_FLOOR));
    }
    total
}

/// Log likelihood under the flat box prior: `−∞` outside `[−10, 10]^dim`.
pub fn log_posterior(params: &ParamVector, data: &Dataset, spec: &ModelSpec) -> f64 {
    if !params.in_prior_box() {
        return f64::NEG_INFINITY;
    }
    log_likelihood(params, data, spec)
}

/// Condition-number gate on `AᵀA` for one submodel's design matrix.
fn check_full_rank(data: &Dataset, sub: &Submodel, which: &'static str) -> Result<()> {
    let n = data.n();
    let p = sub.width();
    if p == 0 {
        return Ok(());
    }
    // column-major materialized design
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(p);
    if sub.intercept {
        cols.push(vec![1.0; n]);
    }
    for &c in &sub.cols {
        cols.push(data.column(c).to_vec());
    }
    let mut gram = vec![0.0; p * p];
    for i in 0..p {
        for j in i..p {
            let mut s = 0.0;
            for r in 0..n {
                s += cols[i][r] * cols[j][r];
            }
            gram[i * p + j] = s;
            gram[j * p + i] = s;
        }
    }
    let eig = symmetric_eigenvalues(&gram, p);
    let max = eig.iter().cloned().fold(f64::MIN, f64::max);
    let min = eig.iter().cloned().fold(f64::MAX, f64::min);
    let cond = if min <= 0.0 { f64::INFINITY } else { max / min };
    if cond <= COND_THRESHOLD {
        return Ok(());
    }
    Err(Error::RankDeficient { submodel: which, columns: collinear_columns(data, sub, &cols) })
}

/// Name the columns that Gram–Schmidt finds (nearly) dependent on earlier ones.
fn collinear_columns(data: &Dataset, sub: &Submodel, cols: &[Vec<f64>]) -> Vec<String> {
    let n = cols[0].len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut culprits = Vec::new();
    for (idx, col) in cols.iter().enumerate() {
        let mut resid = col.clone();
        for b in &basis {
            let dot: f64 = resid.iter().zip(b).map(|(r, b)| r * b).sum();
            for r in 0..n {
                resid[r] -= dot * b[r];
            }
        }
        let orig_norm: f64 = math::sqrt(col.iter().map(|v| v * v).sum::<f64>());
        let resid_norm: f64 = math::sqrt(resid.iter().map(|v| v * v).sum::<f64>());
        if resid_norm <= 1e-6 * orig_norm.max(1e-12) {
            let name = if sub.intercept && idx == 0 {
                String::from("Intercept")
            } else {
                let c = sub.cols[idx - usize::from(sub.intercept)];
                data.names()[c].clone()
            };
            culprits.push(name);
        } else {
            for r in resid.iter_mut() {
                *r /= resid_norm;
            }
            basis.push(resid);
        }
    }
    if culprits.is_empty() {
        culprits.push(String::from("(ill-conditioned)"));
    }
    culprits
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
fn symmetric_eigenvalues(matrix: &[f64], p: usize) -> Vec<f64> {
    let mut a = matrix.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..p {
            for j in (i + 1)..p {
                off += a[i * p + j] * a[i * p + j];
            }
        }
        if off < 1e-30 {
            break;
        }
        for i in 0..p {
            for j in (i + 1)..p {
                let apq = a[i * p + j];
                if math::abs(apq) < 1e-300 {
                    continue;
                }
                let app = a[i * p + i];
                let aqq = a[j * p + j];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + math::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + math::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..p {
                    let aik = a[i * p + k];
                    let ajk = a[j * p + k];
                    a[i * p + k] = c * aik - s * ajk;
                    a[j * p + k] = s * aik + c * ajk;
                }
                for k in 0..p {
                    let aki = a[k * p + i];
                    let akj = a[k * p + j];
                    a[k * p + i] = c * aki - s * akj;
                    a[k * p + j] = s * aki + c * akj;
                }
            }
        }
    }
    (0..p).map(|i| a[i * p + i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        math::abs(a - b) <= tol
    }

    fn scale6() -> ScaleSpec {
        ScaleSpec::new(1.0, 6.0, 1.0).unwrap().with_inflated_index(6).unwrap()
    }

    #[test]
    fn link_basics() {
        assert_eq!(inv_logit(0.0), 0.5);
        assert_eq!(logit(0.5), 0.0);
        assert!(close(inv_logit(-10.0), 4.5397868702434395e-5, 1e-18));
        // clamped: still finite at the boundaries
        assert!(logit(0.0).is_finite());
        assert!(logit(1.0).is_finite());
        for &u in &[0.001, 0.3, 0.5, 0.77, 0.999] {
            assert!(close(inv_logit(logit(u)), u, 1e-12));
        }
    }

    #[test]
    fn shape_conversion() {
        assert_eq!(mu_phi_to_pq(0.5, 1.0 / 3.0).unwrap(), (1.0, 1.0));
        let (p, q) = mu_phi_to_pq(0.25, 0.2).unwrap();
        assert!(close(p, 1.0, 1e-12) && close(q, 3.0, 1e-12));
        assert_eq!(mu_phi_to_pq(0.5, 0.5).unwrap(), (0.5, 0.5));
        assert!(mu_phi_to_pq(0.0, 0.5).is_err());
        assert!(mu_phi_to_pq(0.5, 1.0).is_err());
    }

    #[test]
    fn precision_correspondence() {
        assert!(close(dispersion_to_precision(0.5).unwrap(), 1.0, 1e-12));
        assert!(close(dispersion_to_precision(1.0 / 3.0).unwrap(), 2.0, 1e-12));
        assert!(close(dispersion_to_precision(0.2).unwrap(), 4.0, 1e-12));
        assert!(dispersion_to_precision(0.0).is_err());
        assert!(dispersion_to_precision(1.0).is_err());
        // strictly decreasing in φ
        let mut prev = f64::INFINITY;
        for i in 1..100 {
            let v = dispersion_to_precision(i as f64 / 100.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    fn demo_dataset(scale: &ScaleSpec) -> Dataset {
        let y = alloc::vec![2.0 / 6.0, 3.0 / 6.0, 1.0, 5.0 / 6.0];
        let v = alloc::vec![0.5, -1.0, 2.0, 0.0];
        Dataset::new(y, alloc::vec![(String::from("V1"), v)], scale).unwrap()
    }

    #[test]
    fn predictor_evaluation() {
        let scale = scale6();
        let data = demo_dataset(&scale);
        let spec = ModelSpec::idbr(
            scale,
            Submodel::intercept_only(),
            Submodel::intercept_only(),
            Submodel::intercept_only(),
        );
        let params = ParamVector::zeros(&spec);
        let pr = spec.predictors(&params, |c| data.value(0, c));
        assert_eq!((pr.pi, pr.mu, pr.phi), (0.5, 0.5, 0.5));
        let (p, q) = mu_phi_to_pq(pr.mu, pr.phi).unwrap();
        assert_eq!((p, q), (0.5, 0.5));

        let params = ParamVector::from_parts(&[0.0], &[logit(0.25)], &[0.0]);
        let pr = spec.predictors(&params, |c| data.value(0, c));
        assert!(close(pr.mu, 0.25, 1e-12));
    }

    #[test]
    fn predictors_match_closed_forms() {
        // p = exp(−z'θ)/(1+exp(−x'β)), q = exp(−z'θ)/(1+exp(x'β))
        let scale = scale6();
        let data = demo_dataset(&scale);
        let spec = ModelSpec::idbr(
            scale,
            Submodel::with_intercept(alloc::vec![0]),
            Submodel::with_intercept(alloc::vec![0]),
            Submodel::with_intercept(alloc::vec![0]),
        );
        let params = ParamVector::from_parts(&[0.3, -0.2], &[-0.4, 0.9], &[-1.1, 0.25]);
        for i in 0..data.n() {
            let x = data.value(i, 0);
            let eta_x = -0.4 + 0.9 * x;
            let eta_z = -1.1 + 0.25 * x;
            let pr = spec.predictors(&params, |c| data.value(i, c));
            let (p, q) = mu_phi_to_pq(pr.mu, pr.phi).unwrap();
            let p_ref = math::exp(-eta_z) / (1.0 + math::exp(-eta_x));
            let q_ref = math::exp(-eta_z) / (1.0 + math::exp(eta_x));
            assert!(close(p, p_ref, 1e-12 * p_ref.max(1.0)));
            assert!(close(q, q_ref, 1e-12 * q_ref.max(1.0)));
        }
    }

    #[test]
    fn dbr_pmf_uniform() {
        let scale = ScaleSpec::new(1.0, 6.0, 1.0).unwrap();
        let pmf = dbr_pmf(0.5, 1.0 / 3.0, &scale).unwrap();
        for cell in &pmf {
            assert!(close(*cell, 1.0 / 6.0, 1e-12));
        }
    }

    #[test]
    fn dbr_pmf_two_levels() {
        // (μ, φ) = (2/3, 1/4) is Beta(2, 1): ∫₀^½ 2u du = 1/4
        let scale = ScaleSpec::new(0.0, 1.0, 1.0).unwrap();
        let pmf = dbr_pmf(2.0 / 3.0, 0.25, &scale).unwrap();
        assert!(close(pmf[0], 0.25, 1e-12));
        assert!(close(pmf[1], 0.75, 1e-12));
    }

    #[test]
    fn dbr_pmf_reference_vector() {
        // High-precision reference cells for μ=0.3, φ=0.1, K=11 (Beta(2.7, 6.3)).
        let expected = [
            0.0515951545398232394,
            0.179152565811009602,
            0.238122902776403611,
            0.218764786465286347,
            0.15817645443612446,
            0.0926056880479500163,
            0.0430659057644519577,
            0.0148873047729675302,
            0.00329637859857979455,
            0.000327945983624005018,
            4.91280377943706513e-6,
        ];
        let scale = ScaleSpec::new(0.0, 10.0, 1.0).unwrap();
        let pmf = dbr_pmf(0.3, 0.1, &scale).unwrap();
        for (got, want) in pmf.iter().zip(expected.iter()) {
            assert!(close(*got, *want, 1e-10), "{got} vs {want}");
        }
        let sum: f64 = pmf.iter().sum();
        assert!(close(sum, 1.0, 1e-12));
    }

    #[test]
    fn dbr_pmf_sums_to_one_randomized() {
        let mut rng = Rng::new(99, 0);
        for _ in 0..200 {
            let mu = 0.02 + 0.96 * rng.uniform();
            let phi = 0.02 + 0.96 * rng.uniform();
            let k = 2 + (rng.next_u64() % 14) as usize;
            let scale = ScaleSpec::new(1.0, k as f64, 1.0).unwrap();
            let pmf = dbr_pmf(mu, phi, &scale).unwrap();
            let sum: f64 = pmf.iter().sum();
            assert!(close(sum, 1.0, 1e-10), "mu={mu} phi={phi} K={k}: sum={sum}");
            assert!(pmf.iter().all(|c| *c >= 0.0));
        }
    }

    #[test]
    fn idbr_pmf_mixture() {
        let scale = scale6();
        // π = 1: unit mass at the inflated level
        let pmf = idbr_pmf(1.0, 0.4, 0.2, &scale).unwrap();
        assert_eq!(pmf[5], 1.0);
        assert!(pmf[..5].iter().all(|c| *c == 0.0));
        // π = 0: exactly the DBR pmf
        assert_eq!(idbr_pmf(0.0, 0.4, 0.2, &scale).unwrap(), dbr_pmf(0.4, 0.2, &scale).unwrap());
        // half-and-half on two levels with a uniform beta
        let scale2 = ScaleSpec::new(0.0, 1.0, 1.0).unwrap().with_inflated_index(2).unwrap();
        let pmf = idbr_pmf(0.5, 0.5, 1.0 / 3.0, &scale2).unwrap();
        assert!(close(pmf[0], 0.25, 1e-12));
        assert!(close(pmf[1], 0.75, 1e-12));
        // non-inflated cells scale by exactly (1−π)
        let dbr = dbr_pmf(0.4, 0.2, &scale).unwrap();
        let mixed = idbr_pmf(0.3, 0.4, 0.2, &scale).unwrap();
        for k in 0..5 {
            assert_eq!(mixed[k], 0.7 * dbr[k]);
        }
    }

    #[test]
    fn idbr_pmf_requires_inflated_level() {
        let scale = ScaleSpec::new(1.0, 6.0, 1.0).unwrap();
        assert!(idbr_pmf(0.5, 0.4, 0.2, &scale).is_err());
        assert!(idbr_pmf(0.0, 0.4, 0.2, &scale).is_ok());
    }

    #[test]
    fn log_likelihood_uniform_case() {
        let scale = ScaleSpec::new(1.0, 6.0, 1.0).unwrap();
        let y: Vec<f64> = (0..10).map(|i| scale.grid_point(1 + i % 6)).collect();
        let data = Dataset::new(y, alloc::vec![], &scale).unwrap();
        let spec =
            ModelSpec::dbr(scale, Submodel::intercept_only(), Submodel::intercept_only());
        // μ = 1/2, φ = 1/3 is the uniform beta
        let params = ParamVector::from_parts(&[], &[0.0], &[logit(1.0 / 3.0)]);
        let ll = log_likelihood(&params, &data, &spec);
        assert!(close(ll, 10.0 * math::ln(1.0 / 6.0), 1e-9), "{ll}");
    }

    #[test]
    fn log_likelihood_pure_inflation() {
        let scale = scale6();
        let data = Dataset::new(alloc::vec![1.0], alloc::vec![], &scale).unwrap();
        let spec = ModelSpec::idbr(
            scale,
            Submodel::intercept_only(),
            Submodel::intercept_only(),
            Submodel::intercept_only(),
        );
        // γ₀ huge ⇒ π ≈ 1 ⇒ observing the inflated level has probability ≈ 1
        let params = ParamVector::from_parts(&[40.0], &[0.0], &[0.0]);
        let ll = log_likelihood(&params, &data, &spec);
        assert!(math::abs(ll) < 1e-9, "{ll}");
    }

    #[test]
    fn log_posterior_box() {
        let scale = ScaleSpec::new(1.0, 6.0, 1.0).unwrap();
        let data = Dataset::new(alloc::vec![0.5, 1.0], alloc::vec![], &scale).unwrap();
        let spec =
            ModelSpec::dbr(scale, Submodel::intercept_only(), Submodel::intercept_only());
        let inside = ParamVector::from_parts(&[], &[1.0], &[-2.0]);
        assert_eq!(log_posterior(&inside, &data, &spec), log_likelihood(&inside, &data, &spec));
        let outside = ParamVector::from_parts(&[], &[10.0001], &[0.0]);
        assert_eq!(log_posterior(&outside, &data, &spec), f64::NEG_INFINITY);
        let boundary = ParamVector::from_parts(&[], &[10.0], &[0.0]);
        assert_eq!(
            log_posterior(&boundary, &data, &spec),
            log_likelihood(&boundary, &data, &spec)
        );
    }

    #[test]
    fn log_likelihood_is_finite_across_the_box() {
        let scale = scale6();
        let data = demo_dataset(&scale);
        let spec = ModelSpec::idbr(
            scale,
            Submodel::with_intercept(alloc::vec![0]),
            Submodel::with_intercept(alloc::vec![0]),
            Submodel::with_intercept(alloc::vec![0]),
        );
        let mut rng = Rng::new(5, 0);
        for _ in 0..200 {
            let vals: Vec<f64> =
                (0..spec.dim()).map(|_| -10.0 + 20.0 * rng.uniform()).collect();
            let params = ParamVector::from_flat(vals, &spec).unwrap();
            let ll = log_likelihood(&params, &data, &spec);
            assert!(ll.is_finite(), "non-finite log likelihood at {:?}", params.values());
        }
    }

    /// Straight per-observation evaluation of the likelihood from the closed
    /// forms, with no shared code beyond `reg_inc_beta` itself.
    fn naive_obs_probability(
        params: &ParamVector,
        data: &Dataset,
        spec: &ModelSpec,
        i: usize,
    ) -> f64 {
        let gather = |sub: &Submodel, coef: &[f64]| -> f64 {
            let mut acc = 0.0;
            let mut idx = 0;
            if sub.intercept {
                acc += coef[0];
                idx = 1;
            }
            for &c in &sub.cols {
                acc += coef[idx] * data.value(i, c);
                idx += 1;
            }
            acc
        };
        let eta_x = gather(&spec.location, params.beta());
        let eta_z = gather(&spec.dispersion, params.theta());
        let p = math::exp(-eta_z) / (1.0 + math::exp(-eta_x));
        let q = math::exp(-eta_z) / (1.0 + math::exp(eta_x));
        let k = data.y_index()[i];
        let upper = crate::num::reg_inc_beta(spec.scale.grid_point(k), p, q).unwrap();
        let lower = if k == 1 {
            0.0
        } else {
            crate::num::reg_inc_beta(spec.scale.grid_point(k - 1), p, q).unwrap()
        };
        let area = upper - lower;
        match &spec.inflation {
            None => area,
            Some(sub) => {
                let pi = 1.0 / (1.0 + math::exp(-gather(sub, params.gamma())));
                let hit = if Some(k) == spec.scale.inflated() { pi } else { 0.0 };
                hit + area * (1.0 - pi)
            }
        }
    }

    #[test]
    fn log_likelihood_matches_naive_product() {
        // Plain product of naive per-observation probabilities, n = 50.
        let design = crate::simulate::SimDesign::benchmark_idbr(6, 50, 2, 77);
        let (data, spec) = crate::simulate::replication_dataset(&design, 0).unwrap();
        let params = design.truth.clone();
        let mut product = 1.0;
        for i in 0..data.n() {
            product *= naive_obs_probability(&params, &data, &spec, i);
        }
        let ll = log_likelihood(&params, &data, &spec);
        assert!(
            close(ll, math::ln(product), 1e-8 * math::abs(ll)),
            "{ll} vs {}",
            math::ln(product)
        );
    }

    #[test]
    fn log_likelihood_matches_naive_sum_n300() {
        let design = crate::simulate::SimDesign::benchmark_idbr(6, 300, 2, 78);
        let (data, spec) = crate::simulate::replication_dataset(&design, 0).unwrap();
        let params = design.truth.clone();
        let naive: f64 = (0..data.n())
            .map(|i| math::ln(naive_obs_probability(&params, &data, &spec, i)))
            .sum();
        let ll = log_likelihood(&params, &data, &spec);
        assert!(ll.is_finite());
        assert!(close(ll, naive, 1e-8 * math::abs(ll)), "{ll} vs {naive}");
    }

    #[test]
    fn rank_check_flags_duplicate_column() {
        let scale = ScaleSpec::new(1.0, 6.0, 1.0).unwrap();
        let v = alloc::vec![0.5, -1.0, 2.0, 0.3, 1.4, -0.7];
        let y: Vec<f64> = (0..6).map(|i| scale.grid_point(1 + i % 6)).collect();
        let data = Dataset::new(
            y,
            alloc::vec![
                (String::from("V1"), v.clone()),
                (String::from("V1_copy"), v),
                (String::from("V2"), alloc::vec![1.0, 0.0, 1.0, 1.0, 0.0, 0.0]),
            ],
            &scale,
        )
        .unwrap();
        let good = ModelSpec::dbr(
            data_scale(),
            Submodel::with_intercept(alloc::vec![0, 2]),
            Submodel::intercept_only(),
        );
        assert!(good.check_designs(&data).is_ok());
        let bad = ModelSpec::dbr(
            data_scale(),
            Submodel::with_intercept(alloc::vec![0, 1]),
            Submodel::intercept_only(),
        );
        match bad.check_designs(&data) {
            Err(Error::RankDeficient { submodel, columns }) => {
                assert_eq!(submodel, "location");
                assert!(columns.iter().any(|c| c == "V1_copy"), "{columns:?}");
            }
            other => panic!("expected rank error, got {other:?}"),
        }
    }

    fn data_scale() -> ScaleSpec {
        ScaleSpec::new(1.0, 6.0, 1.0).unwrap()
    }
}
