use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniformly sampled path `x_0, ..., x_n` with step `delta_t`.
///
/// The implied grid is `t_i = i * delta_t`. "Rows" refer to the `n`
/// increments `(x_i, x_{i+1})`, indexed `0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    delta_t: f64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(delta_t: f64, values: Vec<f64>) -> Result<Self> {
        if !(delta_t.is_finite() && delta_t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta_t must be finite and positive, got {delta_t}"
            )));
        }
        if values.len() < 3 {
            return Err(Error::InvalidData(format!(
                "a series needs at least 3 points (n >= 2 increments), got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite value at index {pos}"
            )));
        }
        Ok(Self { delta_t, values })
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of increments `n` (one less than the number of points).
    pub fn n_rows(&self) -> usize {
        self.values.len() - 1
    }

    pub fn time_at(&self, i: usize) -> f64 {
        i as f64 * self.delta_t
    }

    /// Total horizon `T = n * delta_t`.
    pub fn horizon(&self) -> f64 {
        self.n_rows() as f64 * self.delta_t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_nonfinite() {
        assert!(TimeSeries::new(0.1, vec![1.0, 2.0]).is_err());
        assert!(TimeSeries::new(0.0, vec![1.0, 2.0, 3.0]).is_err());
        assert!(TimeSeries::new(-1.0, vec![1.0, 2.0, 3.0]).is_err());
        assert!(TimeSeries::new(0.1, vec![1.0, f64::NAN, 3.0]).is_err());
        let s = TimeSeries::new(0.1, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.n_rows(), 2);
        assert_eq!(s.time_at(2), 0.2);
    }
}
