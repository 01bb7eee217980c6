use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw objective values of one model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveVector {
    pub accuracy: f64,
    pub latency_ms: f64,
    pub params: u64,
}

impl ObjectiveVector {
    /// Minimization form `(−accuracy, latency, −params)`.
    pub fn canonicalize(&self) -> [f64; 3] {
        [-self.accuracy, self.latency_ms, -(self.params as f64)]
    }
}

pub fn canonicalize(o: &ObjectiveVector) -> [f64; 3] {
    o.canonicalize()
}

/// Pareto dominance between minimization vectors: no worse everywhere and
/// not equal.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strictly_better = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly_better = true;
        }
    }
    strictly_better
}

/// Preference weights of the three objectives; they sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub acc: f64,
    pub lat: f64,
    pub params: f64,
}

impl ObjectiveWeights {
    pub const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(acc: f64, lat: f64, params: f64) -> Result<Self> {
        let w = ObjectiveWeights { acc, lat, params };
        w.validate()?;
        Ok(w)
    }

    pub fn equal() -> Self {
        ObjectiveWeights {
            acc: 1.0 / 3.0,
            lat: 1.0 / 3.0,
            params: 1.0 / 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.acc, self.lat, self.params];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Config(format!(
                "weights: every weight must be a non-negative number, got {all:?}"
            )));
        }
        let sum: f64 = all.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::Config(format!(
                "weights: acc + lat + params must equal 1, got {sum}"
            )));
        }
        Ok(())
    }
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        ObjectiveWeights {
            acc: 0.4,
            lat: 0.4,
            params: 0.2,
        }
    }
}

/// Which objectives take part in dominance and crowding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveMode {
    /// Accuracy, latency and parameter count.
    #[default]
    Three,
    /// Accuracy and latency only; params are reported but ignored.
    AccuracyLatency,
}

impl ObjectiveMode {
    pub fn arity(self) -> usize {
        match self {
            ObjectiveMode::Three => 3,
            ObjectiveMode::AccuracyLatency => 2,
        }
    }

    /// The active minimization coordinates of `o`.
    pub fn project(self, o: &ObjectiveVector) -> Vec<f64> {
        let c = o.canonicalize();
        c[..self.arity()].to_vec()
    }

    /// Crowding weights for the active coordinates. In two-objective mode
    /// the params weight is dropped and the rest renormalized.
    pub fn crowding_weights(self, w: &ObjectiveWeights) -> Vec<f64> {
        match self {
            ObjectiveMode::Three => vec![w.acc, w.lat, w.params],
            ObjectiveMode::AccuracyLatency => {
                let sum = w.acc + w.lat;
                if sum > 0.0 {
                    vec![w.acc / sum, w.lat / sum]
                } else {
                    vec![0.5, 0.5]
                }
            }
        }
    }
}
