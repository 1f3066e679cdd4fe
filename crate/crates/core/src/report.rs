use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Run summary shared by every sweeping algorithm.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    /// Completed iterations; one iteration is a left-to-right plus a right-to-left sweep.
    pub sweeps: usize,
    /// Output bond dimensions (boundaries included) after each iteration.
    pub bond_dims_history: Vec<Vec<usize>>,
    /// Largest per-bond error estimate after each iteration.
    pub max_error_history: Vec<f64>,
    pub converged: bool,
    pub wall_ms: f64,
}

impl SweepReport {
    pub fn final_max_error(&self) -> Option<f64> {
        self.max_error_history.last().copied()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_fields() {
        let r = SweepReport {
            sweeps: 2,
            bond_dims_history: vec![vec![1, 2, 1], vec![1, 2, 1]],
            max_error_history: vec![1e-3, 0.0],
            converged: true,
            wall_ms: 1.5,
        };
        let s = r.to_json().unwrap();
        for key in ["sweeps", "bond_dims_history", "max_error_history", "converged", "wall_ms"] {
            assert!(s.contains(key));
        }
        assert_eq!(SweepReport::from_json(&s).unwrap(), r);
    }
}
