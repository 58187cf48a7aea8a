use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::SpacetimeGrid;

/// Separable d-dimensional FFT over row-major storage.
pub(crate) struct FftNd {
    points: Vec<usize>,
    strides: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl FftNd {
    pub fn new(grid: &SpacetimeGrid) -> Self {
        let mut planner = FftPlanner::new();
        let points = grid.points().to_vec();
        Self {
            strides: grid.strides(),
            forward: points
                .iter()
                .map(|&n| planner.plan_fft_forward(n))
                .collect(),
            inverse: points
                .iter()
                .map(|&n| planner.plan_fft_inverse(n))
                .collect(),
            points,
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse transform including the 1/N normalization.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    fn transform(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        let total = data.len();
        for (axis, plan) in plans.iter().enumerate() {
            let n = self.points[axis];
            let stride = self.strides[axis];
            if stride == 1 {
                plan.process(data);
                continue;
            }
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
            let block = n * stride;
            for outer in (0..total).step_by(block) {
                for inner in 0..stride {
                    let start = outer + inner;
                    for (k, z) in line.iter_mut().enumerate() {
                        *z = data[start + k * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (k, z) in line.iter().enumerate() {
                        data[start + k * stride] = *z;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_wave_lands_in_one_bin() {
        let grid = SpacetimeGrid::new(vec![8, 6, 4], vec![1.0, 1.0, 1.0]).unwrap();
        let fft = FftNd::new(&grid);
        let modes = [2i64, -1, 1];
        let mut data: Vec<Complex64> = (0..grid.len())
            .map(|p| {
                let idx = grid.multi_index(p);
                let phase: f64 = (0..3)
                    .map(|a| {
                        2.0 * std::f64::consts::PI * (modes[a] * idx[a] as i64) as f64
                            / grid.points()[a] as f64
                    })
                    .sum();
                Complex64::from_polar(1.0, phase)
            })
            .collect();
        let orig = data.clone();
        fft.forward(&mut data);
        let peak = grid.flat_index(&[2, 5, 1]).unwrap();
        for (p, z) in data.iter().enumerate() {
            let expect = if p == peak { grid.len() as f64 } else { 0.0 };
            assert!((z.re - expect).abs() < 1e-10 && z.im.abs() < 1e-10);
        }
        fft.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
