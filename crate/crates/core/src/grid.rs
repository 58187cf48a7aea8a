use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::MetricSignature;

/// Uniform periodic grid over d space-time dimensions.
///
/// Axis 0 is q⁰ = c t. Points are cell-centred on a torus whose origin sits
/// in the middle of the domain: q_μ = -L_μ/2 + i_μ Δ_μ. Flat storage is
/// row-major with axis 0 slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeGrid {
    points: Vec<usize>,
    extents: Vec<f64>,
}

pub const MAX_DIM: usize = 4;

impl SpacetimeGrid {
    pub fn new(points: Vec<usize>, extents: Vec<f64>) -> Result<Self> {
        if points.len() != extents.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: extents.len(),
            });
        }
        let d = points.len();
        if !(2..=MAX_DIM).contains(&d) {
            return Err(Error::Contract(format!(
                "grid dimension must be 2..={MAX_DIM}, got {d}"
            )));
        }
        if let Some(n) = points.iter().find(|&&n| n < 2) {
            return Err(Error::Contract(format!("every axis needs N >= 2, got {n}")));
        }
        if let Some(l) = extents.iter().find(|&&l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::Contract(format!(
                "every extent must be > 0, got {l}"
            )));
        }
        Ok(Self { points, extents })
    }

    /// Square grid with `n` points and extent `l` on each of `d` axes.
    pub fn uniform(d: usize, n: usize, l: f64) -> Result<Self> {
        Self::new(vec![n; d], vec![l; d])
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn metric(&self) -> MetricSignature {
        MetricSignature::new(self.dim()).expect("grid dimension validated")
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extents[axis] / self.points[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    #[inline]
    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        -0.5 * self.extents[axis] + i as f64 * self.spacing(axis)
    }

    pub fn coordinates(&self, index: &[usize]) -> Result<Vec<f64>> {
        self.check_index(index)?;
        Ok(index
            .iter()
            .enumerate()
            .map(|(axis, &i)| self.coordinate(axis, i))
            .collect())
    }

    /// Row-major strides, axis 0 slowest.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for a in (0..self.dim().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.points[a + 1];
        }
        s
    }

    pub fn flat_index(&self, index: &[usize]) -> Result<usize> {
        self.check_index(index)?;
        Ok(index.iter().zip(self.strides()).map(|(i, s)| i * s).sum())
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.points[a];
            flat /= self.points[a];
        }
        idx
    }

    /// Coordinates of the point at a flat offset.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.coordinate(a, i))
            .collect()
    }

    /// Signed mode number of FFT bin `i`: n ∈ {-N/2, …, N/2 - 1}.
    #[inline]
    pub fn mode_number(&self, axis: usize, i: usize) -> i64 {
        let n = self.points[axis];
        if i < n.div_ceil(2) {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Wavenumber 2πn/L_μ of FFT bin `i`.
    #[inline]
    pub fn wavenumber(&self, axis: usize, i: usize) -> f64 {
        2.0 * PI * self.mode_number(axis, i) as f64 / self.extents[axis]
    }

    /// Wavenumber for a signed mode number.
    pub fn lattice_wavenumber(&self, axis: usize, n: i64) -> f64 {
        2.0 * PI * n as f64 / self.extents[axis]
    }

    fn check_index(&self, index: &[usize]) -> Result<()> {
        if index.len() != self.dim() || index.iter().zip(&self.points).any(|(i, n)| i >= n) {
            return Err(Error::OutOfBounds {
                index: index.to_vec(),
                points: self.points.clone(),
            });
        }
        Ok(())
    }
}
