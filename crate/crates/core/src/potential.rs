use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpacetimeGrid;
use crate::metric::eta;

/// One covariant component A_α(q) = amplitude · cos(k·q + phase).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveComponent {
    pub amplitude: f64,
    pub wavevector: Vec<f64>,
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Zero,
    Constant,
    AnalyticPreset,
    GridSampled,
}

impl PotentialKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Constant => "constant",
            Self::AnalyticPreset => "analytic-preset",
            Self::GridSampled => "grid-sampled",
        }
    }
}

/// Covariant four-potential A_α(q) with A_0 = -φ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialField {
    Zero {
        dim: usize,
    },
    Constant {
        components: Vec<f64>,
    },
    /// Uniform electric field E along axis 1: φ = -E q¹, so A_0 = E q¹.
    ConstantElectric {
        dim: usize,
        field: f64,
    },
    /// Uniform magnetic field B along axis 3 (d = 4), A = ½ B × r.
    ConstantMagnetic {
        field: f64,
    },
    /// Plane-wave profile, one cosine per component.
    Wave {
        components: Vec<WaveComponent>,
    },
    /// Samples at grid nodes, point-major (`values[p * d + α]`).
    Sampled {
        grid: SpacetimeGrid,
        values: Vec<f64>,
    },
}

impl PotentialField {
    pub fn zero(dim: usize) -> Self {
        Self::Zero { dim }
    }

    pub fn constant(components: Vec<f64>) -> Self {
        Self::Constant { components }
    }

    pub fn electric(dim: usize, field: f64) -> Self {
        Self::ConstantElectric { dim, field }
    }

    pub fn magnetic(field: f64) -> Self {
        Self::ConstantMagnetic { field }
    }

    /// A_α = amplitude_α cos(2π q^α / L_α): every component varies along its
    /// own axis with the fundamental mode of the grid.
    pub fn longitudinal_wave(grid: &SpacetimeGrid, amplitudes: &[f64]) -> Result<Self> {
        let d = grid.dim();
        if amplitudes.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: amplitudes.len(),
            });
        }
        let components = amplitudes
            .iter()
            .enumerate()
            .map(|(alpha, &amplitude)| {
                let mut wavevector = vec![0.0; d];
                wavevector[alpha] = grid.lattice_wavenumber(alpha, 1);
                WaveComponent {
                    amplitude,
                    wavevector,
                    phase: 0.0,
                }
            })
            .collect();
        Ok(Self::Wave { components })
    }

    /// Samples `f` at every grid node.
    pub fn sample<F>(grid: &SpacetimeGrid, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let d = grid.dim();
        let mut values = Vec::with_capacity(grid.len() * d);
        for p in 0..grid.len() {
            let a = f(&grid.point(p));
            assert_eq!(a.len(), d, "sampled potential must return d components");
            values.extend(a);
        }
        Self::Sampled {
            grid: grid.clone(),
            values,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Zero { dim } | Self::ConstantElectric { dim, .. } => *dim,
            Self::Constant { components } => components.len(),
            Self::ConstantMagnetic { .. } => 4,
            Self::Wave { components } => components.len(),
            Self::Sampled { grid, .. } => grid.dim(),
        }
    }

    pub fn kind(&self) -> PotentialKind {
        match self {
            Self::Zero { .. } => PotentialKind::Zero,
            Self::Constant { .. } => PotentialKind::Constant,
            Self::Sampled { .. } => PotentialKind::GridSampled,
            _ => PotentialKind::AnalyticPreset,
        }
    }

    /// True when A is the same at every point (zero or constant).
    pub fn is_uniform(&self) -> bool {
        matches!(self.kind(), PotentialKind::Zero | PotentialKind::Constant)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Zero { dim } | Self::ConstantElectric { dim, .. } if *dim < 2 => Err(
                Error::Contract(format!("potential dimension must be >= 2, got {dim}")),
            ),
            Self::Wave { components } => {
                let d = components.len();
                match components.iter().find(|c| c.wavevector.len() != d) {
                    Some(c) => Err(Error::DimensionMismatch {
                        expected: d,
                        got: c.wavevector.len(),
                    }),
                    None => Ok(()),
                }
            }
            Self::Sampled { grid, values } if values.len() != grid.len() * grid.dim() => {
                Err(Error::DimensionMismatch {
                    expected: grid.len() * grid.dim(),
                    got: values.len(),
                })
            }
            _ => Ok(()),
        }
    }

    /// Covariant components A_α(q).
    pub fn evaluate(&self, q: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.evaluate_into(q, &mut out);
        out
    }

    pub fn evaluate_into(&self, q: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        match self {
            Self::Zero { .. } => {}
            Self::Constant { components } => out.copy_from_slice(components),
            Self::ConstantElectric { field, .. } => out[0] = field * q[1],
            Self::ConstantMagnetic { field } => {
                out[1] = -0.5 * field * q[2];
                out[2] = 0.5 * field * q[1];
            }
            Self::Wave { components } => {
                for (o, c) in out.iter_mut().zip(components) {
                    *o = c.amplitude * (dot(&c.wavevector, q) + c.phase).cos();
                }
            }
            Self::Sampled { grid, values } => {
                let d = grid.dim();
                interpolate(grid, d, q, out, |p, o| {
                    o.copy_from_slice(&values[p * d..(p + 1) * d])
                })
            }
        }
    }

    /// Contravariant components A^α(q).
    pub fn evaluate_raised(&self, q: &[f64]) -> Vec<f64> {
        let mut a = self.evaluate(q);
        for (mu, x) in a.iter_mut().enumerate() {
            *x *= eta(mu);
        }
        a
    }

    /// ∂_μ A_ν stored at `[mu * d + nu]`.
    pub fn gradient(&self, q: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut g = vec![0.0; d * d];
        match self {
            Self::Zero { .. } | Self::Constant { .. } => {}
            Self::ConstantElectric { field, .. } => g[d] = *field,
            Self::ConstantMagnetic { field } => {
                g[2 * d + 1] = -0.5 * field;
                g[d + 2] = 0.5 * field;
            }
            Self::Wave { components } => {
                for (nu, c) in components.iter().enumerate() {
                    let s = -c.amplitude * (dot(&c.wavevector, q) + c.phase).sin();
                    for mu in 0..d {
                        g[mu * d + nu] = s * c.wavevector[mu];
                    }
                }
            }
            Self::Sampled { grid, values } => interpolate(grid, d * d, q, &mut g, |p, out| {
                node_gradient(grid, values, p, out)
            }),
        }
        g
    }

    /// Lorenz-gauge divergence ∂^α A_α = Σ η^{αα} ∂_α A_α.
    pub fn divergence(&self, q: &[f64]) -> f64 {
        let d = self.dim();
        let g = self.gradient(q);
        (0..d).map(|a| eta(a) * g[a * d + a]).sum()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Second-order central difference with periodic wrap at node `p`.
fn node_gradient(grid: &SpacetimeGrid, values: &[f64], p: usize, out: &mut [f64]) {
    let d = grid.dim();
    let strides = grid.strides();
    let idx = grid.multi_index(p);
    for mu in 0..d {
        let n = grid.points()[mu];
        let here = p - idx[mu] * strides[mu];
        let up = here + ((idx[mu] + 1) % n) * strides[mu];
        let dn = here + ((idx[mu] + n - 1) % n) * strides[mu];
        let h2 = 2.0 * grid.spacing(mu);
        for nu in 0..d {
            out[mu * d + nu] = (values[up * d + nu] - values[dn * d + nu]) / h2;
        }
    }
}

/// Periodic multilinear interpolation of `width` channels produced per node.
fn interpolate<F>(grid: &SpacetimeGrid, width: usize, q: &[f64], out: &mut [f64], node: F)
where
    F: Fn(usize, &mut [f64]),
{
    let d = grid.dim();
    let strides = grid.strides();
    let mut base = [0usize; crate::grid::MAX_DIM];
    let mut next = [0usize; crate::grid::MAX_DIM];
    let mut frac = [0.0f64; crate::grid::MAX_DIM];
    for a in 0..d {
        let n = grid.points()[a];
        let t = (q[a] + 0.5 * grid.extents()[a]) / grid.spacing(a);
        let f = t.floor();
        frac[a] = t - f;
        let i = (f as i64).rem_euclid(n as i64) as usize;
        base[a] = i;
        next[a] = (i + 1) % n;
    }
    out.iter_mut().for_each(|x| *x = 0.0);
    let mut corner_vals = vec![0.0; width];
    for corner in 0..(1usize << d) {
        let mut w = 1.0;
        let mut flat = 0;
        for a in 0..d {
            if corner >> a & 1 == 1 {
                w *= frac[a];
                flat += next[a] * strides[a];
            } else {
                w *= 1.0 - frac[a];
                flat += base[a] * strides[a];
            }
        }
        if w == 0.0 {
            continue;
        }
        node(flat, &mut corner_vals);
        for (o, v) in out.iter_mut().zip(&corner_vals) {
            *o += w * v;
        }
    }
}
