//! Klein–Gordon operator on the grid and the checks tying the single step
//! to it: ψ(s + ε) = ψ + ε G[ψ] + O(ε²) with G = (iħ/2m)(D^αD_α − (mc/ħ)²).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::fft::FftNd;
use crate::field::WaveField;
use crate::grid::SpacetimeGrid;
use crate::kernel::{self, sampling_ratio, Backend, StepConfig};
use crate::metric::eta;
use crate::potential::PotentialField;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeScheme {
    #[default]
    Spectral,
    /// Second-order central differences, independent of the FFT used by
    /// the spectral propagator.
    CentralDifference2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KgOperatorConfig {
    pub constants: PhysicalConstants,
    pub potential: PotentialField,
    pub grid: SpacetimeGrid,
    #[serde(default)]
    pub scheme: DerivativeScheme,
}

impl KgOperatorConfig {
    pub fn new(
        constants: PhysicalConstants,
        potential: PotentialField,
        grid: SpacetimeGrid,
    ) -> Self {
        Self {
            constants,
            potential,
            grid,
            scheme: DerivativeScheme::Spectral,
        }
    }

    pub fn with_scheme(mut self, scheme: DerivativeScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.potential.validate()?;
        if self.potential.dim() != self.grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.dim(),
                got: self.potential.dim(),
            });
        }
        Ok(())
    }

    fn check(&self, psi: &WaveField) -> Result<()> {
        self.validate()?;
        if psi.grid() != &self.grid {
            return Err(Error::Contract(
                "field grid differs from operator grid".into(),
            ));
        }
        Ok(())
    }
}

/// Derivatives along grid axes in the configured scheme.
struct Diff<'a> {
    grid: &'a SpacetimeGrid,
    fft: Option<FftNd>,
}

impl<'a> Diff<'a> {
    fn new(grid: &'a SpacetimeGrid, scheme: DerivativeScheme) -> Self {
        let fft = (scheme == DerivativeScheme::Spectral).then(|| FftNd::new(grid));
        Self { grid, fft }
    }

    fn first(&self, f: &[Complex64], axis: usize) -> Vec<Complex64> {
        let grid = self.grid;
        match &self.fft {
            Some(fft) => {
                let mut data = f.to_vec();
                fft.forward(&mut data);
                for (p, z) in data.iter_mut().enumerate() {
                    let i = grid.multi_index(p)[axis];
                    *z *= I * grid.wavenumber(axis, i);
                }
                fft.inverse(&mut data);
                data
            }
            None => {
                let stride = grid.strides()[axis];
                let n = grid.points()[axis];
                let h2 = 2.0 * grid.spacing(axis);
                (0..f.len())
                    .map(|p| {
                        let i = grid.multi_index(p)[axis];
                        let base = p - i * stride;
                        let up = base + ((i + 1) % n) * stride;
                        let dn = base + ((i + n - 1) % n) * stride;
                        (f[up] - f[dn]) / h2
                    })
                    .collect()
            }
        }
    }

    /// □f = Σ_α η^{αα} ∂_α∂_α f.
    fn box_op(&self, f: &[Complex64]) -> Vec<Complex64> {
        let grid = self.grid;
        let d = grid.dim();
        match &self.fft {
            Some(fft) => {
                let mut data = f.to_vec();
                fft.forward(&mut data);
                for (p, z) in data.iter_mut().enumerate() {
                    let idx = grid.multi_index(p);
                    let kk: f64 = (0..d)
                        .map(|a| eta(a) * grid.wavenumber(a, idx[a]).powi(2))
                        .sum();
                    *z *= -kk;
                }
                fft.inverse(&mut data);
                data
            }
            None => {
                let strides = grid.strides();
                (0..f.len())
                    .map(|p| {
                        let idx = grid.multi_index(p);
                        let mut acc = Complex64::new(0.0, 0.0);
                        for a in 0..d {
                            let n = grid.points()[a];
                            let base = p - idx[a] * strides[a];
                            let up = base + ((idx[a] + 1) % n) * strides[a];
                            let dn = base + ((idx[a] + n - 1) % n) * strides[a];
                            let h = grid.spacing(a);
                            acc += eta(a) * (f[up] - 2.0 * f[p] + f[dn]) / (h * h);
                        }
                        acc
                    })
                    .collect()
            }
        }
    }

    fn first_real(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let z: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.first(&z, axis).into_iter().map(|z| z.re).collect()
    }
}

/// Node values of A, point-major.
fn node_potential(cfg: &KgOperatorConfig) -> Vec<f64> {
    let d = cfg.grid.dim();
    let mut out = vec![0.0; cfg.grid.len() * d];
    for p in 0..cfg.grid.len() {
        cfg.potential
            .evaluate_into(&cfg.grid.point(p), &mut out[p * d..(p + 1) * d]);
    }
    out
}

/// ∂^α A_α at the nodes. Sampled potentials on the operator grid are
/// differentiated in the operator's scheme, analytic ones exactly.
fn node_divergence(cfg: &KgOperatorConfig, diff: &Diff, a: &[f64]) -> Vec<f64> {
    let grid = &cfg.grid;
    let d = grid.dim();
    match &cfg.potential {
        PotentialField::Sampled { grid: g, .. } if g == grid => {
            let mut div = vec![0.0; grid.len()];
            for axis in 0..d {
                let comp: Vec<f64> = (0..grid.len()).map(|p| a[p * d + axis]).collect();
                for (v, dv) in div.iter_mut().zip(diff.first_real(&comp, axis)) {
                    *v += eta(axis) * dv;
                }
            }
            div
        }
        pot => (0..grid.len())
            .map(|p| pot.divergence(&grid.point(p)))
            .collect(),
    }
}

/// D^αD_αψ − (mc/ħ)²ψ with D_α = ∂_α − i(ζ/ħc)A_α, evaluated as a product
/// of covariant derivatives.
pub fn kg_residual(psi: &WaveField, cfg: &KgOperatorConfig) -> Result<WaveField> {
    cfg.check(psi)?;
    let grid = &cfg.grid;
    let d = grid.dim();
    let g = cfg.constants.coupling();
    let kc2 = cfg.constants.compton_wavenumber().powi(2);
    let diff = Diff::new(grid, cfg.scheme);
    let a = node_potential(cfg);
    let f = psi.values();

    let mut out: Vec<Complex64> = f.iter().map(|z| -kc2 * z).collect();
    for axis in 0..d {
        let dpsi = diff.first(f, axis);
        let cov: Vec<Complex64> = (0..f.len())
            .map(|p| dpsi[p] - I * g * a[p * d + axis] * f[p])
            .collect();
        let dcov = diff.first(&cov, axis);
        for p in 0..f.len() {
            out[p] += eta(axis) * (dcov[p] - I * g * a[p * d + axis] * cov[p]);
        }
    }
    Ok(psi.with_values(out))
}

/// The same operator expanded:
/// □ψ − g²A^αA_αψ − 2ig A^α∂_αψ − ig(∂^αA_α)ψ − (mc/ħ)²ψ, g = ζ/(ħc).
pub fn kg_residual_expanded(psi: &WaveField, cfg: &KgOperatorConfig) -> Result<WaveField> {
    cfg.check(psi)?;
    let grid = &cfg.grid;
    let d = grid.dim();
    let g = cfg.constants.coupling();
    let kc2 = cfg.constants.compton_wavenumber().powi(2);
    let diff = Diff::new(grid, cfg.scheme);
    let a = node_potential(cfg);
    let div = node_divergence(cfg, &diff, &a);
    let f = psi.values();

    let mut out = diff.box_op(f);
    for (p, o) in out.iter_mut().enumerate() {
        let a2: f64 = (0..d).map(|al| eta(al) * a[p * d + al].powi(2)).sum();
        *o += (-g * g * a2 - kc2) * f[p] - I * g * div[p] * f[p];
    }
    for axis in 0..d {
        let dpsi = diff.first(f, axis);
        for (p, o) in out.iter_mut().enumerate() {
            *o -= 2.0 * I * g * eta(axis) * a[p * d + axis] * dpsi[p];
        }
    }
    Ok(psi.with_values(out))
}

/// G[ψ] assembled from the five O(ε) contributions of one step:
/// rest-energy phase −imc²/2ħ, gauge phase −iζ²A^αA_α/(2ħmc²), drift
/// (ζ/mc)A^α∂_α, and (iħ/2m)(□ − i(ζ/ħc)∂^αA_α).
pub fn first_order_generator(psi: &WaveField, cfg: &KgOperatorConfig) -> Result<WaveField> {
    cfg.check(psi)?;
    let k = &cfg.constants;
    let grid = &cfg.grid;
    let d = grid.dim();
    let g = k.coupling();
    let diff = Diff::new(grid, cfg.scheme);
    let a = node_potential(cfg);
    let div = node_divergence(cfg, &diff, &a);
    let f = psi.values();

    let rest = -I * k.rest_energy() / (2.0 * k.hbar);
    let gauge = -I * k.charge * k.charge / (2.0 * k.hbar * k.mass * k.light_speed.powi(2));
    let drift = k.charge / (k.mass * k.light_speed);
    let diffusion = I * k.hbar / (2.0 * k.mass);

    let lap = diff.box_op(f);
    let mut out: Vec<Complex64> = (0..f.len())
        .map(|p| {
            let a2: f64 = (0..d).map(|al| eta(al) * a[p * d + al].powi(2)).sum();
            rest * f[p] + gauge * a2 * f[p] + diffusion * (lap[p] - I * g * div[p] * f[p])
        })
        .collect();
    for axis in 0..d {
        let dpsi = diff.first(f, axis);
        for (p, o) in out.iter_mut().enumerate() {
            *o += drift * eta(axis) * a[p * d + axis] * dpsi[p];
        }
    }
    Ok(psi.with_values(out))
}

/// Order-of-accuracy measurement in JSON-ready form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderReport {
    pub test: String,
    pub grid: SpacetimeGrid,
    pub constants: PhysicalConstants,
    pub eps_list: Vec<f64>,
    pub residuals: Vec<f64>,
    pub slope: f64,
}

impl OrderReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Least-squares slope of ln y against ln x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// r(ε) = ‖step_ε(ψ) − ψ − εG[ψ]‖ / ‖ψ‖ over `eps_list` and its log–log
/// slope. A slope near 2 means the step matches G to first order.
pub fn step_consistency_order(
    psi: &WaveField,
    cfg: &KgOperatorConfig,
    step_cfg: &StepConfig,
    eps_list: &[f64],
) -> Result<OrderReport> {
    cfg.check(psi)?;
    if eps_list.len() < 3 {
        return Err(Error::Contract("eps_list needs at least 3 values".into()));
    }
    if eps_list.iter().any(|e| !(e.is_finite() && *e > 0.0))
        || eps_list.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::Contract(
            "eps_list must be positive and strictly decreasing".into(),
        ));
    }
    if step_cfg.backend == Backend::Quadrature {
        for &e in eps_list {
            let ratio = sampling_ratio(psi.grid(), e, &step_cfg.constants);
            if ratio > 1.0 {
                return Err(Error::Sampling { ratio, epsilon: e });
            }
        }
    }
    let gen = first_order_generator(psi, cfg)?;
    let norm = psi.l2_norm();
    let mut residuals = Vec::with_capacity(eps_list.len());
    for &e in eps_list {
        let stepped = kernel::step(psi, &step_cfg.with_epsilon(e))?;
        let diff: Vec<Complex64> = stepped
            .values()
            .iter()
            .zip(psi.values())
            .zip(gen.values())
            .map(|((b, a), g)| b - a - e * g)
            .collect();
        residuals.push(crate::field::l2_norm(&diff, psi.grid().cell_volume()) / norm);
    }
    // residuals at the rounding floor carry no order information
    let floor = 64.0 * f64::EPSILON;
    if residuals.windows(2).any(|w| !(w[1] < w[0])) || residuals.iter().any(|&r| r < floor) {
        return Err(Error::InconclusiveOrder {
            eps: eps_list.to_vec(),
            residuals,
        });
    }
    Ok(OrderReport {
        test: format!("step-consistency-order/{}", step_cfg.backend.name()),
        grid: psi.grid().clone(),
        constants: step_cfg.constants,
        eps_list: eps_list.to_vec(),
        slope: loglog_slope(eps_list, &residuals),
        residuals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub test: String,
    pub grid: SpacetimeGrid,
    pub constants: PhysicalConstants,
    pub epsilon: f64,
    /// ‖ψ_n − ψ_{n−1}‖ / ‖ψ_{n−1}‖ for n = 1..=n_steps.
    pub deviations: Vec<f64>,
    /// ‖KG residual‖ / ‖ψ‖ of the initial field.
    pub kg_residual_norm: f64,
    /// First-order prediction ε(ħ/2m)‖KG residual‖/‖ψ‖ of each deviation.
    pub predicted_deviation: f64,
}

impl StationarityReport {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().copied().fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Steps ψ repeatedly and compares the per-step change with the size of
/// its Klein–Gordon residual.
pub fn stationarity_check(
    psi: &WaveField,
    cfg: &KgOperatorConfig,
    step_cfg: &StepConfig,
    n_steps: usize,
) -> Result<StationarityReport> {
    cfg.check(psi)?;
    let (_, diags) = kernel::propagate_with_diagnostics(psi, step_cfg, n_steps)?;
    let residual = kg_residual(psi, cfg)?;
    let rel = residual.l2_norm() / psi.l2_norm();
    let k = &step_cfg.constants;
    Ok(StationarityReport {
        test: format!("stationarity/{}", step_cfg.backend.name()),
        grid: psi.grid().clone(),
        constants: *k,
        epsilon: step_cfg.epsilon,
        deviations: diags.iter().skip(1).map(|d| d.deviation).collect(),
        kg_residual_norm: rel,
        predicted_deviation: step_cfg.epsilon * k.hbar / (2.0 * k.mass) * rel,
    })
}
