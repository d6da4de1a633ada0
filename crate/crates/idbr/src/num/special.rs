//! Log-gamma, log-beta, and the regularized incomplete beta function.

use crate::error::{Error, Result};
use crate::math;

/// Natural log of the gamma function, `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain { op: "log_gamma", value: x });
    }
    Ok(math::ln_gamma(x))
}

/// Natural log of the beta function, `ln B(p, q) = lnΓ(p) + lnΓ(q) − lnΓ(p+q)`.
pub fn log_beta(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Domain { op: "log_beta", value: p });
    }
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Domain { op: "log_beta", value: q });
    }
    Ok(math::ln_gamma(p) + math::ln_gamma(q) - math::ln_gamma(p + q))
}

/// Regularized incomplete beta function `I_x(p, q)`: the Beta(p, q) CDF at `x`.
pub fn reg_inc_beta(x: f64, p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain { op: "reg_inc_beta", value: x });
    }
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Domain { op: "reg_inc_beta", value: p });
    }
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Domain { op: "reg_inc_beta", value: q });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_b = log_beta(p, q)?;
    Ok(reg_inc_beta_prepared(x, math::ln(x), math::ln_1p(-x), p, q, ln_b))
}

/// Hot-path variant with the logs and `ln B(p, q)` precomputed by the caller.
///
/// Assumes `p, q > 0`. The likelihood evaluates this at every grid node of
/// every observation, so the per-node `ln x`/`ln(1−x)` are computed once per
/// dataset rather than per call.
#[inline]
pub(crate) fn reg_inc_beta_prepared(
    x: f64,
    ln_x: f64,
    ln_1mx: f64,
    p: f64,
    q: f64,
    ln_beta_pq: f64,
) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front = math::exp(p * ln_x + q * ln_1mx - ln_beta_pq);
    // Symmetry switch keeps the continued fraction in its convergent regime.
    let value = if x < (p + 1.0) / (p + q + 2.0) {
        front * beta_cf(p, q, x) / p
    } else {
        1.0 - front * beta_cf(q, p, 1.0 - x) / q
    };
    value.clamp(0.0, 1.0)
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 600;
    const EPS: f64 = 1e-16;
    const FPMIN: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if math::abs(d) < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=MAX_ITER {
        let mf = m as f64;
        let m2 = 2.0 * mf;

        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if math::abs(d) < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if math::abs(c) < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if math::abs(d) < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if math::abs(c) < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;

        if math::abs(del - 1.0) < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        math::abs(a - b) <= tol
    }

    #[test]
    fn log_gamma_known_values() {
        assert!(close(log_gamma(1.0).unwrap(), 0.0, 1e-14));
        assert!(close(log_gamma(0.5).unwrap(), 0.5723649429247001, 1e-13));
        // Γ(10) = 9! = 362880
        assert!(close(log_gamma(10.0).unwrap(), 12.801827480081469, 1e-12));
    }

    #[test]
    fn log_gamma_relative_accuracy_over_range() {
        // ln Γ(x) vs ln((x-1)!) at integers where the exact value is cheap.
        let mut factorial_log = 0.0;
        for k in 2..=170u32 {
            factorial_log += math::ln((k - 1) as f64);
            let got = log_gamma(k as f64).unwrap();
            assert!(
                math::abs(got - factorial_log) <= 1e-12 * factorial_log.max(1.0),
                "lnGamma({k}) = {got}, want {factorial_log}"
            );
        }
    }

    #[test]
    fn log_gamma_domain_errors() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.0).is_err());
        assert!(log_gamma(f64::NAN).is_err());
        assert!(log_gamma(f64::INFINITY).is_err());
    }

    #[test]
    fn log_beta_known_values() {
        assert!(close(log_beta(1.0, 1.0).unwrap(), 0.0, 1e-14));
        assert!(close(log_beta(2.0, 1.0).unwrap(), -0.6931471805599453, 1e-13));
        assert!(close(log_beta(2.0, 2.0).unwrap(), -1.791759469228055, 1e-13));
        assert!(log_beta(0.0, 1.0).is_err());
    }

    #[test]
    fn reg_inc_beta_trivial_cases() {
        assert_eq!(reg_inc_beta(0.0, 3.0, 4.0).unwrap(), 0.0);
        assert_eq!(reg_inc_beta(1.0, 3.0, 4.0).unwrap(), 1.0);
        // Beta(1,1) is uniform
        assert!(close(reg_inc_beta(0.3, 1.0, 1.0).unwrap(), 0.3, 1e-14));
        // symmetry of Beta(2,2)
        assert!(close(reg_inc_beta(0.5, 2.0, 2.0).unwrap(), 0.5, 1e-13));
        // Beta(2,1) CDF is x^2
        assert!(close(reg_inc_beta(0.25, 2.0, 1.0).unwrap(), 0.0625, 1e-13));
    }

    #[test]
    fn reg_inc_beta_reference_value() {
        // High-precision reference for an asymmetric case.
        let got = reg_inc_beta(0.7, 3.7, 0.9).unwrap();
        assert!(close(got, 0.23575395702408299, 1e-12), "got {got}");
    }

    #[test]
    fn reg_inc_beta_domain_errors() {
        assert!(reg_inc_beta(-0.1, 1.0, 1.0).is_err());
        assert!(reg_inc_beta(1.1, 1.0, 1.0).is_err());
        assert!(reg_inc_beta(0.5, 0.0, 1.0).is_err());
        assert!(reg_inc_beta(0.5, 1.0, -1.0).is_err());
    }

    #[test]
    fn reg_inc_beta_symmetry_identity() {
        // I_x(p,q) + I_{1-x}(q,p) = 1
        let cases = [
            (0.1, 0.3, 2.5),
            (0.42, 5.0, 1.7),
            (0.9, 12.0, 0.05),
            (0.5, 250.0, 300.0),
            (0.77, 0.08, 0.06),
        ];
        for &(x, p, q) in &cases {
            let a = reg_inc_beta(x, p, q).unwrap();
            let b = reg_inc_beta(1.0 - x, q, p).unwrap();
            assert!(close(a + b, 1.0, 1e-12), "x={x} p={p} q={q}: {a} + {b}");
        }
    }

    #[test]
    fn reg_inc_beta_monotone_in_x() {
        let (p, q) = (2.7, 6.3);
        let mut prev = 0.0;
        for i in 1..100 {
            let x = i as f64 / 100.0;
            let v = reg_inc_beta(x, p, q).unwrap();
            assert!(v >= prev, "not monotone at x={x}");
            prev = v;
        }
    }
}
