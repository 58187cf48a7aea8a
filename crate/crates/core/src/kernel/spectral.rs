use num_complex::Complex64;

use super::{check_grid, StepConfig};
use crate::error::Result;
use crate::fft::FftNd;
use crate::field::WaveField;
use crate::grid::SpacetimeGrid;
use crate::metric::eta;

/// ψ ← e^{−iεmc²/2ħ} F⁻¹[e^{−iεħ κ·κ/2m} F ψ], κ_α = k_α − ζA_α/(ħc).
pub struct SpectralStepper {
    grid: SpacetimeGrid,
    fft: FftNd,
    multiplier: Vec<Complex64>,
    epsilon: f64,
}

impl SpectralStepper {
    pub(super) fn new(grid: &SpacetimeGrid, cfg: &StepConfig) -> Self {
        let k = &cfg.constants;
        let eps = cfg.epsilon;
        let d = grid.dim();
        let shift = cfg.potential.evaluate(&vec![0.0; d]);
        let coupling = k.coupling();
        // separable per axis: exp(−iεħ η κ²/2m)
        let axis_phase: Vec<Vec<f64>> = (0..d)
            .map(|a| {
                (0..grid.points()[a])
                    .map(|i| {
                        let kappa = grid.wavenumber(a, i) - coupling * shift[a];
                        -eps * k.hbar * eta(a) * kappa * kappa / (2.0 * k.mass)
                    })
                    .collect()
            })
            .collect();
        let rest = -eps * k.rest_energy() / (2.0 * k.hbar);
        let multiplier = (0..grid.len())
            .map(|p| {
                let idx = grid.multi_index(p);
                let phase: f64 = rest + (0..d).map(|a| axis_phase[a][idx[a]]).sum::<f64>();
                Complex64::from_polar(1.0, phase)
            })
            .collect();
        Self {
            grid: grid.clone(),
            fft: FftNd::new(grid),
            multiplier,
            epsilon: eps,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Unimodular Fourier multiplier, FFT bin order.
    pub fn multiplier(&self) -> &[Complex64] {
        &self.multiplier
    }

    pub fn apply(&self, psi: &WaveField) -> Result<WaveField> {
        check_grid(psi, &self.grid)?;
        let mut data = psi.values().to_vec();
        self.fft.forward(&mut data);
        for (z, m) in data.iter_mut().zip(&self.multiplier) {
            *z *= m;
        }
        self.fft.inverse(&mut data);
        let mut out = psi.with_values(data);
        out.s = psi.s + self.epsilon;
        Ok(out)
    }
}
