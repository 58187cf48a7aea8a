use std::io::Write;

use serde::{Deserialize, Serialize};

use super::dd::{DoubleDouble, Scalar};
use super::{homogeneity_defect, lorentz_force, ExtendedState, FieldTensor};
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::metric::eta;
use crate::potential::PotentialField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Rk4,
}

/// Working precision of the integrator state.
///
/// The on-shell residual u·u + c² is a difference of two numbers of size
/// |u|², so at large boosts the f64 representation of u alone limits it to
/// about |u|² · 2⁻⁵². `DoubleDouble` carries the state in ~106 bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    #[default]
    Double,
    DoubleDouble,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct IntegratorConfig {
    pub method: Method,
    pub precision: Precision,
}

/// States at s₀, s₀ + Δs, … with the homogeneity defect of each state
/// evaluated in the working precision.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub states: Vec<ExtendedState>,
    pub defects: Vec<f64>,
    pub step: f64,
    pub config: IntegratorConfig,
}

impl Trajectory {
    pub fn last(&self) -> &ExtendedState {
        self.states.last().expect("trajectory is never empty")
    }

    /// Defect normalized as (u·u + c²)/c², i.e. −2·defect/(m c²).
    pub fn onshell_residuals(&self, k: &PhysicalConstants) -> Vec<f64> {
        self.defects
            .iter()
            .map(|d| -2.0 * d / k.rest_energy())
            .collect()
    }

    /// CSV with header `s,q0,…,u0,…,defect`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.states.first().map_or(0, ExtendedState::dim);
        let mut header = vec!["s".to_string()];
        header.extend((0..d).map(|i| format!("q{i}")));
        header.extend((0..d).map(|i| format!("u{i}")));
        header.push("defect".into());
        writeln!(w, "{}", header.join(","))?;
        for (st, defect) in self.states.iter().zip(&self.defects) {
            let mut row = vec![format!("{:e}", st.s)];
            row.extend(st.q.iter().chain(&st.u).map(|x| format!("{x:e}")));
            row.push(format!("{defect:e}"));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Integrates the extended Euler–Lagrange equations with classic rk4.
pub fn integrate_classical(
    initial: &ExtendedState,
    field: &FieldTensor,
    k: &PhysicalConstants,
    s_span: f64,
    steps: usize,
    config: IntegratorConfig,
) -> Result<Trajectory> {
    k.validate()?;
    if steps == 0 {
        return Err(Error::Contract("steps must be >= 1".into()));
    }
    if !(s_span.is_finite() && s_span > 0.0) {
        return Err(Error::Contract(format!("s_span must be > 0, got {s_span}")));
    }
    if initial.dim() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: initial.dim(),
        });
    }
    if !initial.is_finite() {
        return Err(Error::NonFinite("initial state"));
    }
    match config.precision {
        Precision::Double => run::<f64>(initial, field, k, s_span, steps, config),
        Precision::DoubleDouble => run::<DoubleDouble>(initial, field, k, s_span, steps, config),
    }
}

fn run<S: Scalar>(
    initial: &ExtendedState,
    field: &FieldTensor,
    k: &PhysicalConstants,
    s_span: f64,
    steps: usize,
    config: IntegratorConfig,
) -> Result<Trajectory> {
    let d = initial.dim();
    let h = s_span / steps as f64;
    let lift = |v: &[f64]| v.iter().map(|&x| S::from(x)).collect::<Vec<S>>();
    let mut y: Vec<S> = lift(&initial.q);
    y.extend(lift(&initial.u));

    let rhs = |y: &[S]| -> Vec<S> {
        let q: Vec<f64> = y[..d].iter().map(|x| x.to_f64()).collect();
        let f = field.evaluate(&q);
        let mut out = y[d..].to_vec();
        out.extend(lorentz_force(&f, &y[d..], k));
        out
    };
    let axpy = |y: &[S], a: f64, x: &[S]| -> Vec<S> {
        y.iter().zip(x).map(|(&yi, &xi)| yi + xi * a).collect()
    };

    let snapshot = |y: &[S], s: f64| -> Result<(ExtendedState, f64)> {
        let st = ExtendedState {
            s,
            q: y[..d].iter().map(|x| x.to_f64()).collect(),
            u: y[d..].iter().map(|x| x.to_f64()).collect(),
        };
        let defect = match config.precision {
            Precision::Double => homogeneity_defect(&st, field.potential(), k)?,
            Precision::DoubleDouble => defect_in::<S>(&y[..d], &y[d..], field.potential(), k),
        };
        Ok((st, defect))
    };

    let mut states = Vec::with_capacity(steps + 1);
    let mut defects = Vec::with_capacity(steps + 1);
    let (st, df) = snapshot(&y, initial.s)?;
    states.push(st);
    defects.push(df);

    for n in 0..steps {
        let k1 = rhs(&y);
        let k2 = rhs(&axpy(&y, 0.5 * h, &k1));
        let k3 = rhs(&axpy(&y, 0.5 * h, &k2));
        let k4 = rhs(&axpy(&y, h, &k3));
        for i in 0..2 * d {
            let incr = (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
            y[i] = y[i] + incr;
        }
        let s = initial.s + (n + 1) as f64 * h;
        let (st, df) = match snapshot(&y, s) {
            Ok((st, df)) if df.is_finite() => (st, df),
            _ => return Err(Error::Divergence { step: n + 1 }),
        };
        states.push(st);
        defects.push(df);
    }
    Ok(Trajectory {
        states,
        defects,
        step: h,
        config,
    })
}

/// L_e − Σ (∂L_e/∂u^μ) u^μ evaluated term by term in precision `S`.
fn defect_in<S: Scalar>(q: &[S], u: &[S], a: &PotentialField, k: &PhysicalConstants) -> f64 {
    let qf: Vec<f64> = q.iter().map(|x| x.to_f64()).collect();
    let pot = a.evaluate(&qf);
    let zc = k.charge / k.light_speed;
    let mut uu = S::from(0.0);
    let mut au = S::from(0.0);
    let mut euler = S::from(0.0);
    for (mu, &um) in u.iter().enumerate() {
        uu = uu + um * um * eta(mu);
        au = au + um * pot[mu];
        let p = um * (k.mass * eta(mu)) + S::from(zc * pot[mu]);
        euler = euler + p * um;
    }
    let le = uu * (0.5 * k.mass) + au * zc - S::from(0.5 * k.rest_energy());
    (le - euler).to_f64()
}

/// Homogeneity defect at every state of `traj`.
///
/// Double-precision trajectories are re-evaluated from their states; for
/// double-double runs the values recorded in working precision are returned,
/// since rounding the state to f64 would dominate the result.
pub fn defect_conservation_report(
    traj: &Trajectory,
    a: &PotentialField,
    k: &PhysicalConstants,
) -> Result<Vec<f64>> {
    if traj.states.is_empty() {
        return Err(Error::Contract("empty trajectory".into()));
    }
    match traj.config.precision {
        Precision::Double => traj
            .states
            .iter()
            .map(|st| homogeneity_defect(st, a, k))
            .collect(),
        Precision::DoubleDouble => Ok(traj.defects.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::reference;

    fn nat() -> PhysicalConstants {
        PhysicalConstants::natural()
    }

    #[test]
    fn free_rest_state() {
        let k = PhysicalConstants::new(1.0, 2.0, 1.0, 1.0).unwrap();
        let init = ExtendedState::at_rest(vec![0.0, 0.0], &k);
        let f = FieldTensor::new(PotentialField::zero(2));
        let t = integrate_classical(&init, &f, &k, 3.0, 30, IntegratorConfig::default()).unwrap();
        assert_eq!(t.states.len(), 31);
        for st in &t.states {
            assert!((st.q[0] - 2.0 * st.s).abs() < 1e-13);
            assert_eq!(st.q[1], 0.0);
        }
        let rep = defect_conservation_report(&t, f.potential(), &k).unwrap();
        assert!(rep.iter().all(|d| d.abs() < 1e-14));
        // s strictly increasing, uniform
        for w in t.states.windows(2) {
            assert!((w[1].s - w[0].s - 0.1).abs() < 1e-14);
        }
    }

    #[test]
    fn hyperbolic_motion_at_unit_s() {
        let k = nat();
        let init = ExtendedState::at_rest(vec![0.0, 0.0], &k);
        let f = FieldTensor::new(PotentialField::electric(2, 1.0));
        let t = integrate_classical(&init, &f, &k, 1.0, 200, IntegratorConfig::default()).unwrap();
        let u = &t.last().u;
        assert!((u[0] - 1.5430806348152437).abs() < 1e-10);
        assert!((u[1] - 1.1752011936438014).abs() < 1e-10);
        let r = reference::hyperbolic_motion(&init, 1.0, 1.0, &k);
        assert!((t.last().q[1] - r.q[1]).abs() < 1e-10);
    }

    #[test]
    fn cyclotron_radius_conserved() {
        let k = nat();
        let init = ExtendedState::on_shell(vec![0.0; 4], &[0.0, 0.8, 0.1], &k);
        let f = FieldTensor::new(PotentialField::magnetic(2.0));
        let t = integrate_classical(&init, &f, &k, 5.0, 2000, IntegratorConfig::default()).unwrap();
        let r0 = init.u[1].hypot(init.u[2]);
        for st in &t.states {
            assert!((st.u[1].hypot(st.u[2]) - r0).abs() < 1e-10);
            assert!((st.u[3] - 0.1).abs() < 1e-15);
        }
        let r = reference::cyclotron(&init, 2.0, 5.0, &k);
        for (a, b) in t.last().u.iter().zip(&r.u) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn off_shell_defect_is_conserved() {
        let k = nat();
        let init = ExtendedState::new(0.0, vec![0.0, 0.0], vec![1.5, 0.3]).unwrap();
        let a = PotentialField::electric(2, 0.7);
        let f = FieldTensor::new(a.clone());
        let t = integrate_classical(&init, &f, &k, 2.0, 400, IntegratorConfig::default()).unwrap();
        let rep = defect_conservation_report(&t, &a, &k).unwrap();
        let d0 = rep[0];
        assert!((d0 + 0.5 * (-1.5f64 * 1.5 + 0.09 + 1.0)).abs() < 1e-15);
        assert!(rep.iter().all(|d| (d - d0).abs() < 1e-12));
    }

    #[test]
    fn double_double_matches_double_on_short_runs() {
        let k = nat();
        let init = ExtendedState::on_shell(vec![0.0; 2], &[0.4], &k);
        let a = PotentialField::electric(2, 1.0);
        let f = FieldTensor::new(a.clone());
        let cfg = |precision| IntegratorConfig {
            method: Method::Rk4,
            precision,
        };
        let t1 = integrate_classical(&init, &f, &k, 1.0, 100, cfg(Precision::Double)).unwrap();
        let t2 =
            integrate_classical(&init, &f, &k, 1.0, 100, cfg(Precision::DoubleDouble)).unwrap();
        for (a, b) in t1.last().u.iter().zip(&t2.last().u) {
            assert!((a - b).abs() < 1e-13);
        }
        let rep = defect_conservation_report(&t2, &a, &k).unwrap();
        assert_eq!(rep, t2.defects);
    }

    #[test]
    fn rejects_bad_arguments() {
        let k = nat();
        let init = ExtendedState::at_rest(vec![0.0, 0.0], &k);
        let f = FieldTensor::new(PotentialField::zero(2));
        let cfg = IntegratorConfig::default();
        assert!(integrate_classical(&init, &f, &k, 1.0, 0, cfg).is_err());
        assert!(integrate_classical(&init, &f, &k, -1.0, 10, cfg).is_err());
        let f3 = FieldTensor::new(PotentialField::zero(3));
        assert!(integrate_classical(&init, &f3, &k, 1.0, 10, cfg).is_err());
    }

    #[test]
    fn divergence_reports_step() {
        let k = nat();
        let init = ExtendedState::at_rest(vec![0.0, 0.0], &k);
        // an absurd field overflows within a few steps
        let f = FieldTensor::new(PotentialField::electric(2, 1e300));
        let err = integrate_classical(&init, &f, &k, 10.0, 10, IntegratorConfig::default());
        assert!(matches!(err, Err(Error::Divergence { step }) if step >= 1));
    }

    #[test]
    fn csv_header_and_rows() {
        let k = nat();
        let init = ExtendedState::at_rest(vec![0.0, 0.0, 0.0], &k);
        let f = FieldTensor::new(PotentialField::zero(3));
        let t = integrate_classical(&init, &f, &k, 1.0, 4, IntegratorConfig::default()).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "s,q0,q1,q2,u0,u1,u2,defect");
        assert_eq!(lines.count(), 5);
    }
}
