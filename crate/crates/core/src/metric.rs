use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minkowski metric diag(-1, +1, ..., +1) in `dim` space-time dimensions.
///
/// Axis 0 is the time axis and carries q⁰ = c t as a length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSignature {
    dim: usize,
}

impl MetricSignature {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Contract(format!(
                "metric needs one time and at least one space axis, got d = {dim}"
            )));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Diagonal entry η_μμ.
    #[inline]
    pub fn eta(&self, mu: usize) -> f64 {
        eta(mu)
    }

    /// Lowers (or raises) an index; η is its own inverse.
    pub fn lower(&self, v: &[f64]) -> Vec<f64> {
        v.iter().enumerate().map(|(mu, x)| eta(mu) * x).collect()
    }
}

#[inline]
pub(crate) fn eta(mu: usize) -> f64 {
    if mu == 0 {
        -1.0
    } else {
        1.0
    }
}

/// η_{αβ} a^α b^β = -a₀b₀ + Σ_{i≥1} a_i b_i.
pub fn minkowski_contract(a: &[f64], b: &[f64], metric: &MetricSignature) -> Result<f64> {
    let d = metric.dim();
    for v in [a, b] {
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: v.len(),
            });
        }
    }
    Ok(contract(a, b))
}

/// Unchecked contraction over the common length of `a` and `b`.
#[inline]
pub(crate) fn contract(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (mu, (x, y)) in a.iter().zip(b).enumerate() {
        s += eta(mu) * x * y;
    }
    s
}
