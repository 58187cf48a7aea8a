//! Classical s-parametrised motion under the quadratic extended Lagrangian
//!
//! L_e = ½ m u^α u_α + (ζ/c) A_α u^α − ½ m c²,   u^μ = dq^μ/ds,
//!
//! whose Euler–Lagrange flow is the proper-time Lorentz force and which
//! carries the hypersurface constraint u^α u_α = −c² as a conserved quantity.

mod dd;
mod integrate;
pub mod reference;

pub use dd::{DoubleDouble, Scalar};
pub use integrate::{
    defect_conservation_report, integrate_classical, IntegratorConfig, Method, Precision,
    Trajectory,
};

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::metric::{contract, eta};
use crate::potential::PotentialField;

/// Default on-shell tolerance relative to c².
pub const TOL_ONSHELL: f64 = 1e-9;

/// Phase point (s; q^μ; u^μ) of the extended system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedState {
    pub s: f64,
    pub q: Vec<f64>,
    pub u: Vec<f64>,
}

impl ExtendedState {
    pub fn new(s: f64, q: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if q.len() != u.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                got: u.len(),
            });
        }
        let st = Self { s, q, u };
        if !st.is_finite() {
            return Err(Error::NonFinite("ExtendedState::new"));
        }
        Ok(st)
    }

    /// Particle at rest at `q`: u = (c, 0, …).
    pub fn at_rest(q: Vec<f64>, k: &PhysicalConstants) -> Self {
        let mut u = vec![0.0; q.len()];
        u[0] = k.light_speed;
        Self { s: 0.0, q, u }
    }

    /// On-shell state with the given spatial velocity components u^i;
    /// u⁰ = √(c² + |u|²).
    pub fn on_shell(q: Vec<f64>, spatial_u: &[f64], k: &PhysicalConstants) -> Self {
        let c = k.light_speed;
        let u0 = (c * c + spatial_u.iter().map(|x| x * x).sum::<f64>()).sqrt();
        let mut u = Vec::with_capacity(q.len());
        u.push(u0);
        u.extend_from_slice(spatial_u);
        Self { s: 0.0, q, u }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn is_finite(&self) -> bool {
        self.s.is_finite() && self.q.iter().chain(&self.u).all(|x| x.is_finite())
    }

    /// (u·u + c²)/c².
    pub fn onshell_residual(&self, k: &PhysicalConstants) -> f64 {
        let c2 = k.light_speed * k.light_speed;
        (contract(&self.u, &self.u) + c2) / c2
    }

    pub fn is_on_shell(&self, k: &PhysicalConstants, tol: f64) -> bool {
        self.onshell_residual(k).abs() <= tol
    }
}

/// F_{μν} = ∂_μ A_ν − ∂_ν A_μ of a potential.
///
/// Presets are differentiated analytically; grid-sampled potentials use
/// periodic central differences interpolated to the evaluation point.
#[derive(Debug, Clone)]
pub struct FieldTensor {
    potential: PotentialField,
}

impl FieldTensor {
    pub fn new(potential: PotentialField) -> Self {
        Self { potential }
    }

    pub fn potential(&self) -> &PotentialField {
        &self.potential
    }

    pub fn dim(&self) -> usize {
        self.potential.dim()
    }

    /// Components at `[mu * d + nu]`.
    pub fn evaluate(&self, q: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let g = self.potential.gradient(q);
        let mut f = vec![0.0; d * d];
        for mu in 0..d {
            for nu in 0..d {
                f[mu * d + nu] = g[mu * d + nu] - g[nu * d + mu];
            }
        }
        f
    }
}

fn check_dims(state: &ExtendedState, a: &PotentialField) -> Result<()> {
    if state.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: state.dim(),
        });
    }
    if !state.is_finite() {
        return Err(Error::NonFinite("state"));
    }
    Ok(())
}

/// ½ m u·u + (ζ/c) A_α(q) u^α − ½ m c².
pub fn extended_lagrangian(
    state: &ExtendedState,
    a: &PotentialField,
    k: &PhysicalConstants,
) -> Result<f64> {
    check_dims(state, a)?;
    let pot = a.evaluate(&state.q);
    let coupling: f64 = pot.iter().zip(&state.u).map(|(x, y)| x * y).sum();
    Ok(
        0.5 * k.mass * contract(&state.u, &state.u) + k.charge / k.light_speed * coupling
            - 0.5 * k.rest_energy(),
    )
}

/// ∂L_e/∂u^μ = m u_μ + (ζ/c) A_μ.
pub fn canonical_momentum(
    state: &ExtendedState,
    a: &PotentialField,
    k: &PhysicalConstants,
) -> Result<Vec<f64>> {
    check_dims(state, a)?;
    let pot = a.evaluate(&state.q);
    Ok((0..state.dim())
        .map(|mu| k.mass * eta(mu) * state.u[mu] + k.charge / k.light_speed * pot[mu])
        .collect())
}

/// L_e − Σ_μ (∂L_e/∂u^μ) u^μ, evaluated term by term. For the quadratic
/// Lagrangian this is −½ m (u·u + c²); it vanishes exactly on the
/// hypersurface.
pub fn homogeneity_defect(
    state: &ExtendedState,
    a: &PotentialField,
    k: &PhysicalConstants,
) -> Result<f64> {
    let le = extended_lagrangian(state, a, k)?;
    let p = canonical_momentum(state, a, k)?;
    let euler: f64 = p.iter().zip(&state.u).map(|(x, y)| x * y).sum();
    Ok(le - euler)
}

/// The conventional Lagrangian −mc²√(1 − v²/c²) + (ζ/c)A·v − ζφ with
/// v^i = c u^i/u⁰.
pub fn projected_lagrangian(
    state: &ExtendedState,
    a: &PotentialField,
    k: &PhysicalConstants,
) -> Result<f64> {
    check_dims(state, a)?;
    let c = k.light_speed;
    let u0 = state.u[0];
    if u0 <= 0.0 {
        return Err(Error::NotFutureDirected(u0));
    }
    let v: Vec<f64> = state.u[1..].iter().map(|ui| c * ui / u0).collect();
    let v2: f64 = v.iter().map(|x| x * x).sum();
    if v2 >= c * c {
        return Err(Error::Superluminal {
            speed: v2.sqrt(),
            c,
        });
    }
    let pot = a.evaluate(&state.q);
    let phi = -pot[0];
    let av: f64 = pot[1..].iter().zip(&v).map(|(x, y)| x * y).sum();
    Ok(-k.rest_energy() * (1.0 - v2 / (c * c)).sqrt() + k.charge / c * av - k.charge * phi)
}

/// ds/dt along the world line, (c/u⁰).
pub fn proper_time_rate(state: &ExtendedState, k: &PhysicalConstants) -> f64 {
    k.light_speed / state.u[0]
}

/// Right-hand side (dq/ds, du/ds) with m du^μ/ds = (ζ/c) η^{μν} F_{να} u^α.
pub fn el_rhs(
    state: &ExtendedState,
    field: &FieldTensor,
    k: &PhysicalConstants,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dims(state, field.potential())?;
    let f = field.evaluate(&state.q);
    let du = lorentz_force(&f, &state.u, k);
    Ok((state.u.clone(), du))
}

pub(crate) fn lorentz_force<S: Scalar>(f: &[f64], u: &[S], k: &PhysicalConstants) -> Vec<S> {
    let d = u.len();
    let coef = k.charge / (k.mass * k.light_speed);
    (0..d)
        .map(|mu| {
            let mut acc = S::from(0.0);
            for (alpha, &ua) in u.iter().enumerate() {
                let fm = f[mu * d + alpha];
                if fm != 0.0 {
                    acc = acc + ua * fm;
                }
            }
            acc * (coef * eta(mu))
        })
        .collect()
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::grid::SpacetimeGrid;

    fn nat() -> PhysicalConstants {
        PhysicalConstants::natural()
    }

    fn st(u: Vec<f64>) -> ExtendedState {
        ExtendedState::new(0.0, vec![0.0; u.len()], u).unwrap()
    }

    #[test]
    fn lagrangian_examples() {
        let k = nat();
        let zero = PotentialField::zero(2);
        assert_eq!(
            extended_lagrangian(&st(vec![1.0, 0.0]), &zero, &k).unwrap(),
            -1.0
        );
        let a = PotentialField::constant(vec![2.0, 0.0]);
        assert_eq!(
            extended_lagrangian(&st(vec![1.0, 0.0]), &a, &k).unwrap(),
            1.0
        );
        assert_eq!(
            extended_lagrangian(&st(vec![2.0, 0.0]), &zero, &k).unwrap(),
            -2.5
        );
    }

    #[test]
    fn defect_examples() {
        let k = PhysicalConstants::new(2.0, 3.0, 0.7, 1.0).unwrap();
        let a = PotentialField::constant(vec![0.3, -0.2, 0.5, 0.1]);
        let c = k.light_speed;
        let rest = st(vec![c, 0.0, 0.0, 0.0]);
        assert!(homogeneity_defect(&rest, &a, &k).unwrap().abs() < 1e-12);
        let boosted = st(vec![2f64.sqrt() * c, c, 0.0, 0.0]);
        assert!(homogeneity_defect(&boosted, &a, &k).unwrap().abs() < 1e-12);
        let light = st(vec![1.0, 1.0]);
        assert_eq!(
            homogeneity_defect(&light, &PotentialField::zero(2), &nat()).unwrap(),
            -0.5
        );
    }

    #[test]
    fn projected_examples() {
        let k = nat();
        let zero = PotentialField::zero(2);
        assert_eq!(
            projected_lagrangian(&st(vec![1.0, 0.0]), &zero, &k).unwrap(),
            -1.0
        );
        let boosted = st(vec![1f64.cosh(), 1f64.sinh()]);
        let l = projected_lagrangian(&boosted, &zero, &k).unwrap();
        // −√(1 − tanh² 1) = −1/cosh 1
        assert!((l + 1.0 / 1f64.cosh()).abs() < 1e-15);
        assert!((l + 0.6480542736638855).abs() < 1e-12);
        let le = extended_lagrangian(&boosted, &zero, &k).unwrap();
        assert!((l * boosted.u[0] / k.light_speed - le).abs() < 1e-14);
    }

    #[test]
    fn projected_errors() {
        let k = nat();
        let zero = PotentialField::zero(2);
        assert!(matches!(
            projected_lagrangian(&st(vec![-1.0, 0.0]), &zero, &k),
            Err(Error::NotFutureDirected(_))
        ));
        assert!(matches!(
            projected_lagrangian(&st(vec![1.0, 1.0]), &zero, &k),
            Err(Error::Superluminal { .. })
        ));
    }

    #[test]
    fn rhs_examples() {
        let k = nat();
        let free = FieldTensor::new(PotentialField::zero(3));
        let (dq, du) = el_rhs(&st(vec![1.3, 0.4, -2.0]), &free, &k).unwrap();
        assert_eq!(dq, vec![1.3, 0.4, -2.0]);
        assert_eq!(du, vec![0.0; 3]);

        let e = FieldTensor::new(PotentialField::electric(2, 1.0));
        let f = e.evaluate(&[0.0, 0.0]);
        assert_eq!(f[1], -1.0); // F_01 = −E
        let (_, du) = el_rhs(&st(vec![1.0, 0.0]), &e, &k).unwrap();
        assert_eq!(du, vec![0.0, 1.0]);

        let b = FieldTensor::new(PotentialField::magnetic(1.5));
        let (_, du) = el_rhs(&st(vec![1.0, 0.0, 0.6, 0.0]), &b, &k).unwrap();
        assert_eq!(du[0], 0.0);
        assert_eq!(du[3], 0.0);
        assert!(du[1] != 0.0);
        assert_eq!(du[2], 0.0);
    }

    #[test]
    fn field_tensor_antisymmetric() {
        let grid = SpacetimeGrid::uniform(3, 16, 5.0).unwrap();
        let wave = PotentialField::Wave {
            components: (0..3)
                .map(|a| crate::potential::WaveComponent {
                    amplitude: 0.2 + a as f64,
                    wavevector: vec![1.0, -0.5 * a as f64, 0.3],
                    phase: 0.1 * a as f64,
                })
                .collect(),
        };
        let sampled = PotentialField::sample(&grid, |q| wave.evaluate(q));
        for pot in [wave, sampled] {
            let f = FieldTensor::new(pot).evaluate(&[0.13, -0.7, 1.9]);
            for mu in 0..3 {
                for nu in 0..3 {
                    assert_eq!(f[mu * 3 + nu], -f[nu * 3 + mu]);
                }
            }
        }
    }

    /// The Euler–Lagrange expression built from finite differences of L_e
    /// matches the analytic Lorentz force with O(h²) error.
    #[test]
    fn rhs_matches_finite_difference_euler_lagrange() {
        let k = PhysicalConstants::new(1.3, 0.9, -0.8, 1.0).unwrap();
        let pot = PotentialField::Wave {
            components: vec![
                crate::potential::WaveComponent {
                    amplitude: 0.7,
                    wavevector: vec![0.4, 1.1],
                    phase: 0.3,
                },
                crate::potential::WaveComponent {
                    amplitude: -0.5,
                    wavevector: vec![0.9, -0.6],
                    phase: 1.2,
                },
            ],
        };
        let state = ExtendedState::new(0.0, vec![0.3, -0.4], vec![1.4, 0.6]).unwrap();
        let (_, du) = el_rhs(&state, &FieldTensor::new(pot.clone()), &k).unwrap();

        let fd_error = |h: f64| -> f64 {
            let mut worst: f64 = 0.0;
            for mu in 0..2 {
                let shift = |sgn: f64| {
                    let mut s = state.clone();
                    s.q[mu] += sgn * h;
                    s
                };
                let dl_dq = (extended_lagrangian(&shift(1.0), &pot, &k).unwrap()
                    - extended_lagrangian(&shift(-1.0), &pot, &k).unwrap())
                    / (2.0 * h);
                // d/ds (∂L/∂u^μ) = m η_μμ du^μ/ds + (ζ/c) ∂_ν A_μ u^ν
                let mut dp_conv = 0.0;
                for nu in 0..2 {
                    let mut qp = state.q.clone();
                    let mut qm = state.q.clone();
                    qp[nu] += h;
                    qm[nu] -= h;
                    let da = (pot.evaluate(&qp)[mu] - pot.evaluate(&qm)[mu]) / (2.0 * h);
                    dp_conv += da * state.u[nu];
                }
                let du_fd = eta(mu) * (dl_dq - k.charge / k.light_speed * dp_conv) / k.mass;
                worst = worst.max((du_fd - du[mu]).abs());
            }
            worst
        };
        let e1 = fd_error(1e-2);
        let e2 = fd_error(5e-3);
        assert!(e1 < 1e-4, "{e1}");
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }
}
