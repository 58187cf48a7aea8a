//! One proper-time step ψ(s) → ψ(s + ε) of the path integral with action
//! S = ε L_e evaluated at the midpoint, normalised so that the step is the
//! identity at zeroth order in ε.
//!
//! Two backends:
//!
//! * [`Backend::Spectral`]: exact Gaussian integration on the Fourier
//!   lattice; valid for zero or constant potentials.
//! * [`Backend::Quadrature`]: the position-space sum over displacements ξ
//!   with A evaluated at q − ξ/2, for arbitrary potentials.

mod quadrature;
mod spectral;

use std::f64::consts::{FRAC_PI_4, PI};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::grid::SpacetimeGrid;
use crate::metric::{contract, eta};
use crate::potential::PotentialField;

pub use quadrature::QuadratureStepper;
pub use spectral::SpectralStepper;

/// Default cap on grid points for the O(N²) quadrature.
pub const QUADRATURE_GUARD: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    #[default]
    Spectral,
    Quadrature,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Spectral => "spectral",
            Self::Quadrature => "quadrature",
        }
    }
}

/// Per-axis weights used for the Fresnel factor exp(i m η ξ²/(2ħε)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureRule {
    /// Fresnel factor integrated exactly against the trigonometric
    /// interpolant of the rest of the integrand (Filon-type weights).
    #[default]
    Filon,
    /// Plain samples of the kernel times the cell width. Coincides with
    /// `Filon` when the sampling ratio is an integer; otherwise carries a
    /// truncation error of order 1/(π√(N·ratio)).
    Trapezoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub epsilon: f64,
    pub backend: Backend,
    pub constants: PhysicalConstants,
    pub potential: PotentialField,
    #[serde(default)]
    pub rule: QuadratureRule,
    #[serde(default = "default_guard")]
    pub grid_guard: usize,
}

fn default_guard() -> usize {
    QUADRATURE_GUARD
}

impl StepConfig {
    pub fn new(
        epsilon: f64,
        backend: Backend,
        constants: PhysicalConstants,
        potential: PotentialField,
    ) -> Self {
        Self {
            epsilon,
            backend,
            constants,
            potential,
            rule: QuadratureRule::default(),
            grid_guard: QUADRATURE_GUARD,
        }
    }

    pub fn with_rule(mut self, rule: QuadratureRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Contract(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        self.constants.validate()?;
        self.potential.validate()?;
        if self.backend == Backend::Spectral && !self.potential.is_uniform() {
            return Err(Error::UnsupportedBackend {
                backend: self.backend.name(),
                kind: self.potential.kind().name(),
            });
        }
        Ok(())
    }

    /// Checks the configuration against a grid, including the quadrature
    /// size guard.
    pub fn validate_for(&self, grid: &SpacetimeGrid) -> Result<()> {
        self.validate()?;
        if self.potential.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                got: self.potential.dim(),
            });
        }
        if self.backend == Backend::Quadrature && grid.len() > self.grid_guard {
            return Err(Error::GridGuard {
                points: grid.len(),
                limit: self.grid_guard,
            });
        }
        Ok(())
    }
}

/// S_ε(ξ; q_c) = (m/2ε) ξ·ξ + (ζ/c) A_α(q_c) ξ^α − ½ m c² ε.
pub fn step_action(xi: &[f64], q_mid: &[f64], cfg: &StepConfig) -> f64 {
    let k = &cfg.constants;
    let a = cfg.potential.evaluate(q_mid);
    let lin: f64 = a.iter().zip(xi).map(|(x, y)| x * y).sum();
    k.mass / (2.0 * cfg.epsilon) * contract(xi, xi) + k.charge / k.light_speed * lin
        - 0.5 * k.rest_energy() * cfg.epsilon
}

/// (2πħε/(i m))^{d/2} on the principal branch.
///
/// For d = 4 this is (2πħε/im)². It equals the Gaussian integral of the
/// kernel only when every axis takes the timelike branch; see
/// [`gaussian_prefactor`] for the Minkowski value.
pub fn normalization_m(d: usize, epsilon: f64, k: &PhysicalConstants) -> Complex64 {
    assert!(d >= 1 && epsilon > 0.0);
    let z = Complex64::new(0.0, -2.0 * PI * k.hbar * epsilon / k.mass);
    z.sqrt().powi(d as i32)
}

/// ∫ exp(i m η ξ²/(2ħε)) dξ = √(2πħε/m) e^{iηπ/4} for one axis of sign η.
pub fn axis_prefactor(eta: f64, epsilon: f64, k: &PhysicalConstants) -> Complex64 {
    Complex64::from_polar(
        (2.0 * PI * k.hbar * epsilon / k.mass).sqrt(),
        eta.signum() * FRAC_PI_4,
    )
}

/// Product of [`axis_prefactor`] over a Minkowski signature in d
/// dimensions: (2πħε/m)^{d/2} e^{iπ(d−2)/4}.
pub fn gaussian_prefactor(d: usize, epsilon: f64, k: &PhysicalConstants) -> Complex64 {
    (0..d)
        .map(|mu| axis_prefactor(eta(mu), epsilon, k))
        .product()
}

/// m · L_max · Δ_max / (2πħε). Above 1 the Fresnel phase advances by
/// more than π between neighbouring samples at the domain edge.
pub fn sampling_ratio(grid: &SpacetimeGrid, epsilon: f64, k: &PhysicalConstants) -> f64 {
    let l = grid.extents().iter().copied().fold(0.0, f64::max);
    let h = (0..grid.dim()).map(|a| grid.spacing(a)).fold(0.0, f64::max);
    k.mass * l * h / (2.0 * PI * k.hbar * epsilon)
}

/// A prepared step operator for a fixed grid and configuration.
pub enum Stepper {
    Spectral(SpectralStepper),
    Quadrature(QuadratureStepper),
}

impl Stepper {
    pub fn new(grid: &SpacetimeGrid, cfg: &StepConfig) -> Result<Self> {
        cfg.validate_for(grid)?;
        Ok(match cfg.backend {
            Backend::Spectral => Self::Spectral(SpectralStepper::new(grid, cfg)),
            Backend::Quadrature => Self::Quadrature(QuadratureStepper::new(grid, cfg)),
        })
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            Self::Spectral(s) => s.epsilon(),
            Self::Quadrature(q) => q.epsilon(),
        }
    }

    pub fn apply(&self, psi: &WaveField) -> Result<WaveField> {
        let out = match self {
            Self::Spectral(s) => s.apply(psi),
            Self::Quadrature(q) => q.apply(psi),
        }?;
        out.check_finite("step")?;
        Ok(out)
    }
}

fn check_grid(psi: &WaveField, grid: &SpacetimeGrid) -> Result<()> {
    if psi.grid() != grid {
        return Err(Error::Contract(
            "field grid differs from stepper grid".into(),
        ));
    }
    Ok(())
}

pub fn spectral_step(psi: &WaveField, cfg: &StepConfig) -> Result<WaveField> {
    if cfg.backend != Backend::Spectral {
        return Err(Error::Contract(
            "spectral_step needs backend = spectral".into(),
        ));
    }
    Stepper::new(psi.grid(), cfg)?.apply(psi)
}

pub fn quadrature_step(psi: &WaveField, cfg: &StepConfig) -> Result<WaveField> {
    if cfg.backend != Backend::Quadrature {
        return Err(Error::Contract(
            "quadrature_step needs backend = quadrature".into(),
        ));
    }
    Stepper::new(psi.grid(), cfg)?.apply(psi)
}

/// One configured step.
pub fn step(psi: &WaveField, cfg: &StepConfig) -> Result<WaveField> {
    Stepper::new(psi.grid(), cfg)?.apply(psi)
}

/// Applies the configured step `n_steps` times.
pub fn propagate(psi: &WaveField, cfg: &StepConfig, n_steps: usize) -> Result<WaveField> {
    propagate_with_diagnostics(psi, cfg, n_steps).map(|(f, _)| f)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepDiagnostic {
    pub step: usize,
    pub s: f64,
    pub norm: f64,
    /// ‖ψ_{n} − ψ_{n−1}‖ / ‖ψ_{n−1}‖.
    pub deviation: f64,
    /// ‖ψ_n‖/‖ψ_0‖ − 1.
    pub norm_drift: f64,
}

pub fn propagate_with_diagnostics(
    psi: &WaveField,
    cfg: &StepConfig,
    n_steps: usize,
) -> Result<(WaveField, Vec<StepDiagnostic>)> {
    cfg.validate_for(psi.grid())?;
    let norm0 = psi.l2_norm();
    let mut diags = vec![StepDiagnostic {
        step: 0,
        s: psi.s,
        norm: norm0,
        deviation: 0.0,
        norm_drift: 0.0,
    }];
    if n_steps == 0 {
        return Ok((psi.clone(), diags));
    }
    let stepper = Stepper::new(psi.grid(), cfg)?;
    let mut cur = psi.clone();
    for n in 1..=n_steps {
        let next = stepper.apply(&cur)?;
        let norm = next.l2_norm();
        diags.push(StepDiagnostic {
            step: n,
            s: next.s,
            norm,
            deviation: next.relative_distance(&cur),
            norm_drift: norm / norm0 - 1.0,
        });
        cur = next;
    }
    Ok((cur, diags))
}

/// CSV `step,s,norm,deviation,norm_drift`.
pub fn write_diagnostics_csv<W: Write>(diags: &[StepDiagnostic], mut w: W) -> Result<()> {
    writeln!(w, "step,s,norm,deviation,norm_drift")?;
    for d in diags {
        writeln!(
            w,
            "{},{:e},{:e},{:e},{:e}",
            d.step, d.s, d.norm, d.deviation, d.norm_drift
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
