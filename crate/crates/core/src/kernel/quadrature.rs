use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{axis_prefactor, check_grid, sampling_ratio, QuadratureRule, StepConfig};
use crate::error::Result;
use crate::field::WaveField;
use crate::grid::SpacetimeGrid;
use crate::metric::eta;

enum LinearTerm {
    None,
    /// A varies in space: A − Ā tabulated on the half-integer lattice of
    /// midpoints q − ξ/2, `3N` entries per axis.
    Varying {
        table: Vec<f64>,
        strides: Vec<usize>,
    },
}

/// ψ_b(q) = e^{−iεmc²/2ħ} Σ_ξ W(ξ) exp[(iζ/ħc) ξ^α A_α(q − ξ/2)] ψ_a(q − ξ),
/// a periodic convolution over the displacement lattice ξ = nΔ,
/// n ∈ {−N/2, …, N/2 − 1}. W carries the Fresnel factor divided by its
/// Gaussian integral.
pub struct QuadratureStepper {
    grid: SpacetimeGrid,
    epsilon: f64,
    weights: Vec<Complex64>,
    modes: Vec<Vec<i64>>,
    linear: LinearTerm,
    coupling: f64,
    rest: Complex64,
}

impl QuadratureStepper {
    pub(super) fn new(grid: &SpacetimeGrid, cfg: &StepConfig) -> Self {
        let k = &cfg.constants;
        let eps = cfg.epsilon;
        let d = grid.dim();
        let ratio = sampling_ratio(grid, eps, k);
        if ratio > 1.0 {
            log::warn!(
                "quadrature sampling ratio {ratio:.3} > 1 at epsilon {eps}: Fresnel phase aliases near the domain edge"
            );
        }
        let modes: Vec<Vec<i64>> = (0..d)
            .map(|a| {
                (0..grid.points()[a])
                    .map(|i| grid.mode_number(a, i))
                    .collect()
            })
            .collect();
        let coupling = k.coupling();
        let uniform = cfg.potential.is_uniform();
        let a_ref = reference_potential(grid, cfg);
        let axis_w: Vec<Vec<Complex64>> = (0..d)
            .map(|a| axis_weights(grid, a, cfg, &modes[a], coupling * a_ref[a]))
            .collect();
        let weights = (0..grid.len())
            .map(|j| {
                let idx = grid.multi_index(j);
                (0..d).map(|a| axis_w[a][idx[a]]).product()
            })
            .collect();

        let linear = if uniform {
            LinearTerm::None
        } else {
            tabulate_midpoints(grid, cfg, &a_ref)
        };
        Self {
            grid: grid.clone(),
            epsilon: eps,
            weights,
            modes,
            linear,
            coupling,
            rest: Complex64::from_polar(1.0, -eps * k.rest_energy() / (2.0 * k.hbar)),
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Normalised displacement weights W(ξ), FFT bin order.
    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn apply(&self, psi: &WaveField) -> Result<WaveField> {
        check_grid(psi, &self.grid)?;
        let grid = &self.grid;
        let d = grid.dim();
        let points = grid.points();
        let strides = grid.strides();
        let src = psi.values();
        let len = grid.len();

        let values: Vec<Complex64> = (0..len)
            .into_par_iter()
            .map(|p| {
                let out_idx = grid.multi_index(p);
                // per-axis source offsets (i − n) mod N and midpoint table rows
                let src_off: Vec<Vec<usize>> = (0..d)
                    .map(|a| {
                        let n = points[a] as i64;
                        self.modes[a]
                            .iter()
                            .map(|&m| ((out_idx[a] as i64 - m).rem_euclid(n)) as usize * strides[a])
                            .collect()
                    })
                    .collect();
                let mid_off: Option<Vec<Vec<usize>>> = match &self.linear {
                    LinearTerm::None => None,
                    LinearTerm::Varying { strides: ts, .. } => Some(
                        (0..d)
                            .map(|a| {
                                let half = (points[a] / 2) as i64;
                                self.modes[a]
                                    .iter()
                                    .map(|&m| (2 * out_idx[a] as i64 - m + half) as usize * ts[a])
                                    .collect()
                            })
                            .collect(),
                    ),
                };
                let xi: Vec<Vec<f64>> = (0..d)
                    .map(|a| {
                        self.modes[a]
                            .iter()
                            .map(|&m| m as f64 * grid.spacing(a))
                            .collect()
                    })
                    .collect();

                let mut jidx = [0usize; crate::grid::MAX_DIM];
                let mut acc = Complex64::new(0.0, 0.0);
                for w in &self.weights {
                    let mut s = 0;
                    for a in 0..d {
                        s += src_off[a][jidx[a]];
                    }
                    let mut term = w * src[s];
                    if let (Some(mo), LinearTerm::Varying { table, .. }) = (&mid_off, &self.linear)
                    {
                        let mut t = 0;
                        for a in 0..d {
                            t += mo[a][jidx[a]];
                        }
                        let mut lin = 0.0;
                        for a in 0..d {
                            lin += xi[a][jidx[a]] * table[t * d + a];
                        }
                        term *= Complex64::from_polar(1.0, self.coupling * lin);
                    }
                    acc += term;
                    // odometer, last axis fastest
                    for a in (0..d).rev() {
                        jidx[a] += 1;
                        if jidx[a] < points[a] {
                            break;
                        }
                        jidx[a] = 0;
                    }
                }
                acc * self.rest
            })
            .collect();
        let mut out = psi.with_values(values);
        out.s = psi.s + self.epsilon;
        Ok(out)
    }
}

/// Mean of A over the grid nodes. Its linear phase e^{ib·ξ} is folded
/// into the displacement weights; only A − Ā is sampled per pair.
fn reference_potential(grid: &SpacetimeGrid, cfg: &StepConfig) -> Vec<f64> {
    let d = grid.dim();
    if cfg.potential.is_uniform() {
        return cfg.potential.evaluate(&vec![0.0; d]);
    }
    let mut sum = vec![0.0; d];
    let mut comp = vec![0.0; d];
    for p in 0..grid.len() {
        cfg.potential.evaluate_into(&grid.point(p), &mut comp);
        for (s, c) in sum.iter_mut().zip(&comp) {
            *s += c;
        }
    }
    sum.iter().map(|s| s / grid.len() as f64).collect()
}

/// Displacement weights along one axis for the kernel e^{iaηξ² + ibξ},
/// divided by the axis' Gaussian integral √(2πħε/m) e^{iηπ/4}.
fn axis_weights(
    grid: &SpacetimeGrid,
    axis: usize,
    cfg: &StepConfig,
    modes: &[i64],
    b: f64,
) -> Vec<Complex64> {
    let k = &cfg.constants;
    let eps = cfg.epsilon;
    let n = grid.points()[axis];
    let h = grid.spacing(axis);
    let sign = eta(axis);
    match cfg.rule {
        QuadratureRule::Trapezoid => {
            let g = axis_prefactor(sign, eps, k);
            modes
                .iter()
                .map(|&m| {
                    let xi = m as f64 * h;
                    let phase = k.mass * sign * xi * xi / (2.0 * k.hbar * eps) + b * xi;
                    Complex64::from_polar(h, phase) / g
                })
                .collect()
        }
        QuadratureRule::Filon => {
            // ∫ e^{iaηξ² + ibξ} e^{−ikξ} dξ / ∫ e^{iaηξ²} dξ = e^{−iεħη(k−b)²/2m},
            // so sample j carries (1/N) Σ_n e^{−iεħη(k_n−b)²/2m} e^{ik_n ξ_j}.
            let phases: Vec<f64> = modes
                .iter()
                .map(|&m| {
                    let kn = grid.lattice_wavenumber(axis, m) - b;
                    -eps * k.hbar * sign * kn * kn / (2.0 * k.mass)
                })
                .collect();
            modes
                .iter()
                .map(|&j| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (&m, &ph) in modes.iter().zip(&phases) {
                        let arg = ph + 2.0 * PI * ((m * j).rem_euclid(n as i64)) as f64 / n as f64;
                        acc += Complex64::from_polar(1.0, arg);
                    }
                    acc / n as f64
                })
                .collect()
        }
    }
}

fn tabulate_midpoints(grid: &SpacetimeGrid, cfg: &StepConfig, a_ref: &[f64]) -> LinearTerm {
    let d = grid.dim();
    let sizes: Vec<usize> = grid.points().iter().map(|&n| 3 * n).collect();
    let mut strides = vec![1; d];
    for a in (0..d - 1).rev() {
        strides[a] = strides[a + 1] * sizes[a + 1];
    }
    let total: usize = sizes.iter().product();
    let mut table = vec![0.0; total * d];
    let mut q = vec![0.0; d];
    let mut comp = vec![0.0; d];
    for t in 0..total {
        let mut rem = t;
        for a in (0..d).rev() {
            let h = (rem % sizes[a]) as f64;
            rem /= sizes[a];
            let half = (grid.points()[a] / 2) as f64;
            q[a] = -0.5 * grid.extents()[a] + 0.5 * (h - half) * grid.spacing(a);
        }
        cfg.potential.evaluate_into(&q, &mut comp);
        for a in 0..d {
            table[t * d + a] = comp[a] - a_ref[a];
        }
    }
    LinearTerm::Varying { table, strides }
}
