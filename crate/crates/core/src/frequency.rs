use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Strictly increasing list of positive frequencies (Hz).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(try_from = "Vec<f64>", into = "Vec<f64>"))]
pub struct FrequencyGrid {
    points: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("frequencies", "grid is empty"));
        }
        if let Some(bad) = points.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
            return Err(Error::param("frequencies", format!("{bad} Hz is not a positive frequency")));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("frequencies", "points must be strictly increasing"));
        }
        Ok(FrequencyGrid { points })
    }

    /// `n` evenly spaced points from `start` to `stop` inclusive.
    pub fn linear(start_hz: f64, stop_hz: f64, n: usize) -> Result<Self> {
        match n {
            0 => Err(Error::param("points", "need at least one point")),
            1 => Self::new(alloc::vec![start_hz]),
            _ => {
                let step = (stop_hz - start_hz) / (n - 1) as f64;
                let mut pts: Vec<f64> = (0..n).map(|i| start_hz + step * i as f64).collect();
                pts[n - 1] = stop_hz;
                Self::new(pts)
            }
        }
    }

    /// 100 points, 1 to 100 GHz.
    pub fn default_sweep() -> Self {
        Self::linear(1e9, 100e9, 100).expect("valid default grid")
    }

    pub fn single(f_hz: f64) -> Result<Self> {
        Self::new(alloc::vec![f_hz])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of a grid point equal to `f_hz` within a relative 1e-9.
    pub fn index_of(&self, f_hz: f64) -> Option<usize> {
        self.points.iter().position(|&p| (p - f_hz).abs() <= 1e-9 * p.abs().max(f_hz.abs()))
    }
}

impl TryFrom<Vec<f64>> for FrequencyGrid {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FrequencyGrid> for Vec<f64> {
    fn from(g: FrequencyGrid) -> Self {
        g.points
    }
}
