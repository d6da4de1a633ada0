//! The ordinal scale and its reduced-grid representation.
//!
//! A K-level scale with original support `{a, a+h*, …, b}` is mapped onto
//! the reduced grid `{h, 2h, …, 1}` with `h = 1/K`, which is the support the
//! model works on. Grid membership is checked with a relative tolerance and
//! then snapped to the exact rational `k/K`, so CSV round-trips cannot
//! accumulate float drift.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Relative tolerance for deciding that a value sits on the grid.
const GRID_TOL: f64 = 1e-9;

/// A K-level equally spaced ordinal scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSpec {
    a: f64,
    b: f64,
    h_star: f64,
    k: usize,
    inflated: Option<usize>,
    labels: Option<Vec<String>>,
}

impl ScaleSpec {
    /// Build a scale from its original support `{a, a+h_star, …, b}`.
    pub fn new(a: f64, b: f64, h_star: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || !h_star.is_finite() {
            return Err(Error::InvalidScale(String::from("bounds must be finite")));
        }
        if !(h_star > 0.0) {
            return Err(Error::InvalidScale(format!("spacing must be positive, got {h_star}")));
        }
        if b <= a {
            return Err(Error::InvalidScale(format!("need minimum < maximum, got [{a}, {b}]")));
        }
        let ratio = (b - a) / h_star;
        let rounded = math::round(ratio);
        if math::abs(ratio - rounded) > GRID_TOL * ratio.max(1.0) {
            return Err(Error::InvalidScale(format!(
                "(max − min)/spacing = {ratio} is not an integer"
            )));
        }
        let k = rounded as usize + 1;
        if k < 2 {
            return Err(Error::InvalidScale(format!("need at least 2 levels, got {k}")));
        }
        Ok(ScaleSpec { a, b, h_star, k, inflated: None, labels: None })
    }

    /// Mark a grid index (1-based) as the inflated level.
    pub fn with_inflated_index(mut self, index: usize) -> Result<Self> {
        if index < 1 || index > self.k {
            return Err(Error::InvalidScale(format!(
                "inflated index {index} outside 1..={}",
                self.k
            )));
        }
        self.inflated = Some(index);
        Ok(self)
    }

    /// Mark an original-scale level as the inflated one.
    pub fn with_inflated_level(self, y_star: f64) -> Result<Self> {
        let y = self.to_reduced(y_star)?;
        let index = self.grid_index(y)?;
        self.with_inflated_index(index)
    }

    /// Attach one label per level, in scale order.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.k {
            return Err(Error::InvalidScale(format!(
                "got {} labels for {} levels",
                labels.len(),
                self.k
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Number of levels K.
    pub fn levels(&self) -> usize {
        self.k
    }

    /// Reduced-grid spacing `h = 1/K`.
    pub fn h(&self) -> f64 {
        1.0 / self.k as f64
    }

    pub fn min(&self) -> f64 {
        self.a
    }

    pub fn max(&self) -> f64 {
        self.b
    }

    pub fn spacing(&self) -> f64 {
        self.h_star
    }

    /// Grid index (1-based) of the inflated level, if any.
    pub fn inflated(&self) -> Option<usize> {
        self.inflated
    }

    /// The reduced grid point `k/K` for a 1-based index.
    pub fn grid_point(&self, index: usize) -> f64 {
        index as f64 / self.k as f64
    }

    /// The original-scale level for a 1-based index.
    pub fn original_level(&self, index: usize) -> f64 {
        self.a + (index - 1) as f64 * self.h_star
    }

    /// Label of a level, when labels were declared.
    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.as_ref().map(|l| l[index - 1].as_str())
    }

    /// Map an original-support value onto the reduced grid.
    pub fn to_reduced(&self, y_star: f64) -> Result<f64> {
        self.to_reduced_at(y_star, None)
    }

    /// Like [`Self::to_reduced`] but names the data row in the error.
    pub fn to_reduced_at(&self, y_star: f64, row: Option<usize>) -> Result<f64> {
        if !y_star.is_finite() {
            return Err(Error::OffGrid { value: y_star, row });
        }
        let t = (y_star - self.a) / self.h_star;
        let j = math::round(t);
        if math::abs(y_star - (self.a + j * self.h_star)) > GRID_TOL * self.h_star {
            return Err(Error::OffGrid { value: y_star, row });
        }
        let index = j as i64 + 1;
        if index < 1 || index > self.k as i64 {
            return Err(Error::OffGrid { value: y_star, row });
        }
        Ok(self.grid_point(index as usize))
    }

    /// Map a reduced-grid value back to the original support.
    pub fn from_reduced(&self, y: f64) -> Result<f64> {
        let index = self.grid_index(y)?;
        Ok(self.original_level(index))
    }

    /// The 1-based grid index of a reduced-grid value: `grid_index(kh) = k`.
    pub fn grid_index(&self, y: f64) -> Result<usize> {
        if !y.is_finite() {
            return Err(Error::OffGrid { value: y, row: None });
        }
        let t = y * self.k as f64;
        let index = math::round(t);
        if math::abs(y - index / self.k as f64) > GRID_TOL {
            return Err(Error::OffGrid { value: y, row: None });
        }
        if index < 1.0 || index > self.k as f64 {
            return Err(Error::OffGrid { value: y, row: None });
        }
        Ok(index as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eleven_point_scale_mapping() {
        let s = ScaleSpec::new(0.0, 10.0, 1.0).unwrap();
        assert_eq!(s.levels(), 11);
        assert_eq!(s.to_reduced(0.0).unwrap(), 1.0 / 11.0);
        assert_eq!(s.to_reduced(10.0).unwrap(), 1.0);
        assert_eq!(s.to_reduced(5.0).unwrap(), 6.0 / 11.0);
    }

    #[test]
    fn inverse_mapping() {
        let s = ScaleSpec::new(0.0, 10.0, 1.0).unwrap();
        assert_eq!(s.from_reduced(1.0).unwrap(), 10.0);
        assert_eq!(s.from_reduced(1.0 / 11.0).unwrap(), 0.0);
        assert_eq!(s.from_reduced(6.0 / 11.0).unwrap(), 5.0);
    }

    #[test]
    fn grid_index_examples() {
        let s = ScaleSpec::new(0.0, 10.0, 1.0).unwrap();
        assert_eq!(s.grid_index(s.h()).unwrap(), 1);
        assert_eq!(s.grid_index(1.0).unwrap(), 11);
        assert_eq!(s.grid_index(6.0 / 11.0).unwrap(), 6);
    }

    #[test]
    fn off_grid_is_rejected_with_row() {
        let s = ScaleSpec::new(0.0, 10.0, 1.0).unwrap();
        match s.to_reduced_at(3.4, Some(17)) {
            Err(Error::OffGrid { value, row }) => {
                assert_eq!(value, 3.4);
                assert_eq!(row, Some(17));
            }
            other => panic!("expected off-grid error, got {other:?}"),
        }
        assert!(s.to_reduced(11.0).is_err());
        assert!(s.to_reduced(-1.0).is_err());
        assert!(s.grid_index(0.5).is_err());
    }

    #[test]
    fn near_grid_values_snap() {
        let s = ScaleSpec::new(0.0, 10.0, 1.0).unwrap();
        assert_eq!(s.to_reduced(5.0 + 4e-10).unwrap(), 6.0 / 11.0);
        assert_eq!(s.to_reduced(5.0 - 4e-10).unwrap(), 6.0 / 11.0);
    }

    #[test]
    fn inflated_level_lookup() {
        let s = ScaleSpec::new(0.0, 10.0, 1.0)
            .unwrap()
            .with_inflated_level(5.0)
            .unwrap();
        assert_eq!(s.inflated(), Some(6));
        assert!(ScaleSpec::new(0.0, 10.0, 1.0).unwrap().with_inflated_level(3.5).is_err());
    }

    #[test]
    fn invalid_scales_rejected() {
        assert!(ScaleSpec::new(0.0, 10.0, 3.0).is_err()); // 10/3 not integer
        assert!(ScaleSpec::new(0.0, 0.0, 1.0).is_err());
        assert!(ScaleSpec::new(5.0, 1.0, 1.0).is_err());
        assert!(ScaleSpec::new(0.0, 1.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_identity(
            a in -50.0f64..50.0,
            h_star in 0.05f64..5.0,
            k in 2usize..30,
            j in 0usize..30,
        ) {
            let j = j % k;
            let b = a + (k - 1) as f64 * h_star;
            let s = ScaleSpec::new(a, b, h_star).unwrap();
            prop_assert_eq!(s.levels(), k);
            let y_star = a + j as f64 * h_star;
            let y = s.to_reduced(y_star).unwrap();
            let back = s.from_reduced(y).unwrap();
            prop_assert!((back - y_star).abs() <= 1e-9 * h_star);
        }

        #[test]
        fn to_reduced_strictly_increasing(
            a in -50.0f64..50.0,
            h_star in 0.05f64..5.0,
            k in 2usize..30,
        ) {
            let b = a + (k - 1) as f64 * h_star;
            let s = ScaleSpec::new(a, b, h_star).unwrap();
            let mut prev = f64::NEG_INFINITY;
            for j in 0..k {
                let y = s.to_reduced(a + j as f64 * h_star).unwrap();
                prop_assert!(y > prev);
                prev = y;
            }
        }
    }
}
