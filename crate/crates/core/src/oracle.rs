//! Brute-force Gaussian moments of the step kernel.
//!
//! ∫ ξ^{α…} exp[(i/ħ)(m ξ·ξ/2ε + b·ξ)] e^{−δ|ξ|²} dξ over [−R, R]^d by the
//! tensor-product trapezoid rule, extrapolated δ → 0 with a Richardson
//! tableau over δ₀, δ₀/2, δ₀/4, … Independent of the closed forms it checks.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 64;
/// Damped tail R^order e^{−δR²} at the smallest δ is below e^{−28} ≈ 7e−13.
const TAIL_EXPONENT: f64 = 28.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisKind {
    Timelike,
    Spacelike,
}

impl AxisKind {
    pub fn eta(self) -> f64 {
        match self {
            Self::Timelike => -1.0,
            Self::Spacelike => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSpec {
    /// One entry per integration axis; d = axes.len() ∈ {1, 2}.
    pub axes: Vec<AxisKind>,
    /// Axis indices of the monomial; the moment order is `indices.len()`.
    pub indices: Vec<usize>,
    /// Coefficient b_α of ξ^α in the action, i.e. (ζ/c)A_α.
    pub source: Vec<f64>,
    /// Largest damping δ₀ of the sequence.
    pub damping: f64,
    pub levels: usize,
    pub cutoff: f64,
    /// Minimum samples per axis; raised per level to resolve the phase.
    pub samples: usize,
    /// Accepted change between the last two extrapolants, relative to the
    /// larger of the estimate and the natural scale of the moment.
    pub tolerance: f64,
}

impl MomentSpec {
    pub fn new(axes: Vec<AxisKind>, indices: Vec<usize>, source: Vec<f64>) -> Self {
        let damping = 0.05;
        let levels = 6;
        let delta_min = damping / (1u64 << (levels - 1)) as f64;
        let log_r = 0.5 * (TAIL_EXPONENT / delta_min).ln();
        let cutoff = ((TAIL_EXPONENT + indices.len() as f64 * log_r) / delta_min).sqrt();
        Self {
            axes,
            indices,
            source,
            damping,
            levels,
            cutoff,
            samples: MIN_SAMPLES,
            tolerance: 1e-7,
        }
    }

    /// Minkowski axes: timelike first, then spacelike.
    pub fn minkowski(d: usize, indices: Vec<usize>, source: Vec<f64>) -> Self {
        let axes = (0..d)
            .map(|a| {
                if a == 0 {
                    AxisKind::Timelike
                } else {
                    AxisKind::Spacelike
                }
            })
            .collect();
        Self::new(axes, indices, source)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn order(&self) -> usize {
        self.indices.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if !(1..=2).contains(&d) {
            return Err(Error::Contract(format!(
                "oracle supports d = 1, 2; got {d}"
            )));
        }
        if self.order() > 2 {
            return Err(Error::Contract(format!(
                "oracle supports moment order <= 2; got {}",
                self.order()
            )));
        }
        if self.indices.iter().any(|&i| i >= d) {
            return Err(Error::Contract("moment index out of range".into()));
        }
        if self.source.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.source.len(),
            });
        }
        if !(self.damping > 0.0 && self.damping.is_finite()) {
            return Err(Error::Contract("damping must be > 0".into()));
        }
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return Err(Error::Contract("cutoff must be > 0".into()));
        }
        if self.samples < MIN_SAMPLES {
            return Err(Error::Contract(format!(
                "samples per axis must be >= {MIN_SAMPLES}"
            )));
        }
        if self.levels < 2 {
            return Err(Error::Contract("need at least 2 damping levels".into()));
        }
        Ok(())
    }
}

/// Extrapolated value with the raw per-δ integrals and the diagonal of the
/// Richardson tableau.
#[derive(Debug, Clone, PartialEq)]
pub struct FresnelEstimate {
    pub value: Complex64,
    pub raw: Vec<(f64, Complex64)>,
    pub diagonal: Vec<Complex64>,
    /// |T_kk − T_{k−1,k−1}| at the last level over max(|T_kk|, natural scale).
    pub change: f64,
}

/// (2πħε/m)^{d/2} (ħε/m)^{order/2}: the size of an undamped moment.
fn natural_scale(spec: &MomentSpec, epsilon: f64, k: &PhysicalConstants) -> f64 {
    let w = k.hbar * epsilon / k.mass;
    (2.0 * PI * w).powf(0.5 * spec.dim() as f64) * w.powf(0.5 * spec.order() as f64)
}

pub fn damped_fresnel_moment(
    spec: &MomentSpec,
    epsilon: f64,
    k: &PhysicalConstants,
) -> Result<Complex64> {
    damped_fresnel_estimate(spec, epsilon, k).map(|e| e.value)
}

pub fn damped_fresnel_estimate(
    spec: &MomentSpec,
    epsilon: f64,
    k: &PhysicalConstants,
) -> Result<FresnelEstimate> {
    spec.validate()?;
    k.validate()?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Contract("epsilon must be > 0".into()));
    }
    let raw: Vec<(f64, Complex64)> = (0..spec.levels)
        .map(|l| {
            let delta = spec.damping / (1u64 << l) as f64;
            (delta, damped_integral(spec, delta, epsilon, k))
        })
        .collect();

    // T[j][0] = I(δ_j); T[j][m] = (2^m T[j][m−1] − T[j−1][m−1]) / (2^m − 1)
    let mut prev: Vec<Complex64> = Vec::new();
    let mut diagonal = Vec::with_capacity(raw.len());
    for (j, &(_, v)) in raw.iter().enumerate() {
        let mut row = vec![v];
        for m in 1..=j {
            let f = (1u64 << m) as f64;
            row.push((f * row[m - 1] - prev[m - 1]) / (f - 1.0));
        }
        diagonal.push(row[j]);
        prev = row;
    }
    let n = diagonal.len();
    let scale = natural_scale(spec, epsilon, k).max(diagonal[n - 1].norm());
    let change = (diagonal[n - 1] - diagonal[n - 2]).norm() / scale;
    if !(change <= spec.tolerance) {
        return Err(Error::Convergence {
            estimates: diagonal.iter().map(|z| (z.re, z.im)).collect(),
        });
    }
    Ok(FresnelEstimate {
        value: diagonal[n - 1],
        raw,
        diagonal,
        change,
    })
}

/// Trapezoid sum at one damping level. The step resolves the damped chirp
/// so that the aliasing error is far below the extrapolation tolerance.
fn damped_integral(
    spec: &MomentSpec,
    delta: f64,
    epsilon: f64,
    k: &PhysicalConstants,
) -> Complex64 {
    let a = k.mass / (2.0 * k.hbar * epsilon);
    let beta_max = spec.source.iter().fold(0.0f64, |m, b| m.max(b.abs())) / k.hbar;
    let bandwidth = 12.0 * (a * a + delta * delta).sqrt() / delta.sqrt() + beta_max + 10.0;
    let r = spec.cutoff;
    let n = ((2.0 * r * bandwidth / (2.0 * PI)).ceil() as usize).max(spec.samples);
    let h = 2.0 * r / n as f64;
    let nodes: Vec<f64> = (0..=n).map(|i| -r + i as f64 * h).collect();
    let weight = |i: usize| if i == 0 || i == n { 0.5 * h } else { h };

    // exp of a sum of per-axis terms is the product of per-axis factors
    let factors: Vec<Vec<Complex64>> = (0..spec.dim())
        .map(|axis| {
            let eta = spec.axes[axis].eta();
            let b = spec.source[axis] / k.hbar;
            let power = spec.indices.iter().filter(|&&i| i == axis).count() as i32;
            nodes
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let phase = a * eta * x * x + b * x;
                    Complex64::from_polar(weight(i) * x.powi(power) * (-delta * x * x).exp(), phase)
                })
                .collect()
        })
        .collect();

    match spec.dim() {
        1 => factors[0].iter().sum(),
        _ => {
            let rows: Vec<Complex64> = factors[0]
                .par_iter()
                .map(|f0| factors[1].iter().map(|f1| f0 * f1).sum::<Complex64>())
                .collect();
            rows.iter().sum()
        }
    }
}

/// ∫ exp[i(aη ξ² + βξ)] dξ = √(π/a) e^{iηπ/4} e^{−iηβ²/4a} for one axis.
fn axis_integral(eta: f64, beta: f64, a: f64) -> Complex64 {
    Complex64::from_polar(
        (PI / a).sqrt(),
        eta * FRAC_PI_4 - eta * beta * beta / (4.0 * a),
    )
}

/// Closed-form moment (not normalised) of the kernel described by `spec`.
pub fn analytic_moment(
    spec: &MomentSpec,
    epsilon: f64,
    k: &PhysicalConstants,
) -> Result<Complex64> {
    spec.validate()?;
    let a = k.mass / (2.0 * k.hbar * epsilon);
    let d = spec.dim();
    let mut total = Complex64::new(1.0, 0.0);
    for axis in 0..d {
        let eta = spec.axes[axis].eta();
        let beta = spec.source[axis] / k.hbar;
        let zeroth = axis_integral(eta, beta, a);
        let mean = -eta * beta / (2.0 * a);
        let var = Complex64::new(0.0, eta / (2.0 * a));
        let power = spec.indices.iter().filter(|&&i| i == axis).count();
        let factor = match power {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(mean, 0.0),
            _ => mean * mean + var,
        };
        total *= zeroth * factor;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub name: String,
    pub indices: Vec<usize>,
    /// [re, im]
    pub analytic: [f64; 2],
    pub oracle: [f64; 2],
    /// |oracle − analytic| / max(|analytic|, (ħε/m)^{order/2} scale).
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub epsilon: f64,
    pub constants: PhysicalConstants,
    pub potential: Vec<f64>,
    pub entries: Vec<MomentEntry>,
}

impl MomentTable {
    pub fn max_rel_error(&self) -> f64 {
        self.entries.iter().map(|e| e.rel_error).fold(0.0, f64::max)
    }

    pub fn entry(&self, name: &str) -> Option<&MomentEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serialises")
    }
}

/// Zeroth moment and the first and second moments normalised by it, for a
/// constant covariant potential in d = 1 (one spacelike axis) or d = 2
/// (Minkowski). The closed forms are
///
/// * zeroth: Π_α √(2πħε/m) e^{iη_απ/4} · exp(−iεζ²A^αA_α/(2ħmc²)),
/// * ⟨ξ^α⟩ = −εζA^α/(mc),
/// * ⟨ξ^αξ^β⟩ = ε²ζ²A^αA^β/(m²c²) + (iħε/m)η^{αβ}.
pub fn moment_table(epsilon: f64, k: &PhysicalConstants, a_const: &[f64]) -> Result<MomentTable> {
    let d = a_const.len();
    let axes = match d {
        1 => vec![AxisKind::Spacelike],
        2 => vec![AxisKind::Timelike, AxisKind::Spacelike],
        _ => {
            return Err(Error::Contract(format!(
                "moment table supports d = 1, 2; got {d}"
            )))
        }
    };
    let source: Vec<f64> = a_const
        .iter()
        .map(|x| k.charge / k.light_speed * x)
        .collect();
    let spec_for = |indices: Vec<usize>| MomentSpec::new(axes.clone(), indices, source.clone());

    let zero_spec = spec_for(vec![]);
    let z_oracle = damped_fresnel_moment(&zero_spec, epsilon, k)?;
    let z_exact = analytic_moment(&zero_spec, epsilon, k)?;
    let w = k.hbar * epsilon / k.mass;

    let mut names = vec![(String::from("zeroth"), vec![])];
    for a in 0..d {
        names.push((format!("first[{a}]"), vec![a]));
    }
    for a in 0..d {
        for b in a..d {
            names.push((format!("second[{a},{b}]"), vec![a, b]));
        }
    }
    let entries = names
        .into_iter()
        .map(|(name, indices)| {
            let (analytic, oracle, scale) = if indices.is_empty() {
                (z_exact, z_oracle, 0.0)
            } else {
                let spec = spec_for(indices.clone());
                let analytic = analytic_moment(&spec, epsilon, k)? / z_exact;
                let oracle = damped_fresnel_moment(&spec, epsilon, k)? / z_oracle;
                (analytic, oracle, w.powf(0.5 * indices.len() as f64))
            };
            Ok(MomentEntry {
                name,
                indices,
                analytic: [analytic.re, analytic.im],
                oracle: [oracle.re, oracle.im],
                rel_error: (oracle - analytic).norm() / analytic.norm().max(scale),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentTable {
        epsilon,
        constants: *k,
        potential: a_const.to_vec(),
        entries,
    })
}
