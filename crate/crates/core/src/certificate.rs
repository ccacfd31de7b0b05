use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Outcome of a sampled inequality check.
///
/// `worst_value` is the largest sampled left-hand side (for ratio checks, the
/// largest ratio) and `worst_point` the `(x, t)` sample where it occurred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCertificate {
    pub claim: String,
    pub pass: bool,
    pub worst_value: f64,
    pub worst_point: Option<(f64, f64)>,
    pub grid_size: usize,
    pub params: BTreeMap<String, f64>,
    /// Per-ε measurements for sweep-based checks, `(ε, value)`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<(f64, f64)>,
}

impl ClassCertificate {
    pub fn new(claim: impl Into<String>) -> Self {
        Self {
            claim: claim.into(),
            pass: true,
            worst_value: f64::NEG_INFINITY,
            worst_point: None,
            grid_size: 0,
            params: BTreeMap::new(),
            sweep: Vec::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    /// Records one sample, keeping the larger value.
    pub fn observe(&mut self, value: f64, point: (f64, f64)) {
        self.grid_size += 1;
        if value > self.worst_value || self.worst_point.is_none() {
            self.worst_value = value;
            self.worst_point = Some(point);
        }
    }

    pub fn merge(mut self, other: ClassCertificate) -> Self {
        self.grid_size += other.grid_size;
        if other.worst_point.is_some()
            && (self.worst_point.is_none() || other.worst_value > self.worst_value)
        {
            self.worst_value = other.worst_value;
            self.worst_point = other.worst_point;
        }
        self
    }

    /// Sets `pass` from `worst_value <= tol` (an empty grid passes).
    pub fn finish(mut self, tol: f64) -> Self {
        if self.worst_point.is_none() {
            self.worst_value = 0.0;
        }
        self.pass = self.worst_value <= tol;
        self
    }
}
