use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use xprop::classical::{
    integrate_classical, reference, ExtendedState, FieldTensor, IntegratorConfig, TOL_ONSHELL,
};
use xprop::field::relative_sup;
use xprop::kernel::{self, sampling_ratio, Backend, StepConfig, StepDiagnostic, Stepper};
use xprop::kg::{self, DerivativeScheme, KgOperatorConfig};
use xprop::oracle::moment_table;
use xprop::{PhysicalConstants, PotentialField, SpacetimeGrid, WaveField};

use crate::config::{ClassicalSpec, FieldSpec, KgSuiteSpec, MomentsSpec, Plan, PropagationSpec};
use crate::output::OutputDir;
use crate::{Check, CliError};

/// Relative agreement required between reformulations of one operator.
pub const OPERATOR_TOL: f64 = 1e-10;
/// Relative deviation from a closed-form orbit.
pub const ORBIT_TOL: f64 = 1e-8;
/// Oracle versus closed-form moment.
pub const MOMENT_TOL: f64 = 1e-6;

type Result<T> = std::result::Result<T, CliError>;

pub fn run(plan: Plan, seed: u64, out: &mut OutputDir) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match plan {
        Plan::Classical {
            constants,
            potential,
            initial,
            spec,
        } => classical(&constants, potential, &initial, &spec, out),
        Plan::Propagate {
            grid,
            field,
            step,
            spec,
        } => {
            let psi = build_field(&grid, &field, &mut rng);
            propagate(psi, &step, &spec, out)
        }
        Plan::KgSuite {
            grid,
            field,
            potential,
            constants,
            spec,
        } => {
            let psi = build_field(&grid, &field, &mut rng);
            kg_suite(psi, &potential, &constants, &spec, &mut rng, out)
        }
        Plan::Moments { constants, spec } => moments(&constants, &spec, out),
    }
}

pub fn build_field(grid: &SpacetimeGrid, spec: &FieldSpec, rng: &mut ChaCha8Rng) -> WaveField {
    match spec {
        FieldSpec::Gaussian {
            center,
            width,
            carrier,
        } => WaveField::gaussian_packet(grid.clone(), center, width, carrier),
        FieldSpec::PlaneWave { modes } => WaveField::lattice_plane_wave(grid.clone(), modes),
        FieldSpec::Random { max_mode } => random_field(grid, rng, *max_mode),
    }
}

/// Sum of lattice plane waves with |n_α| ≤ `max_mode` and coefficients
/// uniform in the unit square.
pub fn random_field(grid: &SpacetimeGrid, rng: &mut ChaCha8Rng, max_mode: i64) -> WaveField {
    let d = grid.dim();
    let side = (2 * max_mode + 1) as usize;
    let modes: Vec<(Vec<f64>, Complex64)> = (0..side.pow(d as u32))
        .map(|mut c| {
            let mut k = vec![0.0; d];
            for (a, ka) in k.iter_mut().enumerate().rev() {
                *ka = grid.lattice_wavenumber(a, (c % side) as i64 - max_mode);
                c /= side;
            }
            let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (k, amp)
        })
        .collect();
    WaveField::from_fn(grid.clone(), |q| {
        modes
            .iter()
            .map(|(k, c)| {
                let ph: f64 = k.iter().zip(q).map(|(a, b)| a * b).sum();
                c * Complex64::from_polar(1.0, ph)
            })
            .sum()
    })
}

#[derive(Serialize)]
struct ReferenceComparison {
    kind: &'static str,
    max_rel_u_error: f64,
    max_rel_q_error: f64,
}

#[derive(Serialize)]
struct ClassicalSummary<'a> {
    constants: &'a PhysicalConstants,
    potential: &'a PotentialField,
    initial: &'a ExtendedState,
    final_state: &'a ExtendedState,
    steps: usize,
    s_span: f64,
    initial_defect: f64,
    final_defect: f64,
    /// max |defect(s) − defect(0)| / (½ m c²).
    max_defect_drift: f64,
    final_onshell_residual: f64,
    reference: Option<ReferenceComparison>,
}

type Orbit<'a> = Box<dyn Fn(f64) -> ExtendedState + 'a>;

fn closed_form<'a>(
    potential: &PotentialField,
    initial: &'a ExtendedState,
    k: &'a PhysicalConstants,
) -> Option<(&'static str, Orbit<'a>)> {
    let on_shell = initial.is_on_shell(k, TOL_ONSHELL);
    match potential {
        PotentialField::Zero { .. } | PotentialField::Constant { .. } => {
            Some(("free", Box::new(move |s| reference::free(initial, s))))
        }
        PotentialField::ConstantElectric { field, .. }
            if on_shell && initial.u[1..].iter().all(|&v| v == 0.0) =>
        {
            let accel = k.charge * *field / k.mass;
            Some((
                "hyperbolic",
                Box::new(move |s| reference::hyperbolic_motion(initial, accel, s, k)),
            ))
        }
        PotentialField::ConstantMagnetic { field } if on_shell => {
            let omega = k.charge * field / (k.mass * k.light_speed);
            Some((
                "cyclotron",
                Box::new(move |s| reference::cyclotron(initial, omega, s, k)),
            ))
        }
        _ => None,
    }
}

fn rel_error(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

fn classical(
    k: &PhysicalConstants,
    potential: PotentialField,
    initial: &ExtendedState,
    spec: &ClassicalSpec,
    out: &mut OutputDir,
) -> Result<Vec<Check>> {
    let field = FieldTensor::new(potential);
    let cfg = IntegratorConfig {
        precision: spec.precision,
        ..Default::default()
    };
    let traj = integrate_classical(initial, &field, k, spec.s_span, spec.steps, cfg)?;
    let mut csv = Vec::new();
    traj.write_csv(&mut csv)?;
    out.write("trajectory.csv", &csv)?;

    let scale = 0.5 * k.rest_energy();
    let d0 = traj.defects[0];
    let drift = traj
        .defects
        .iter()
        .map(|d| (d - d0).abs() / scale)
        .fold(0.0, f64::max);
    let mut checks = vec![Check::at_most("defect drift", drift, TOL_ONSHELL)];
    let reference = closed_form(field.potential(), initial, k).map(|(kind, orbit)| {
        let (mut du, mut dq) = (0.0f64, 0.0f64);
        for st in &traj.states {
            let r = orbit(st.s - initial.s);
            du = du.max(rel_error(&st.u, &r.u));
            dq = dq.max(rel_error(&st.q, &r.q));
        }
        ReferenceComparison {
            kind,
            max_rel_u_error: du,
            max_rel_q_error: dq,
        }
    });
    if let Some(r) = &reference {
        checks.push(Check::at_most(
            &format!("{} orbit |u − u_ref|", r.kind),
            r.max_rel_u_error,
            ORBIT_TOL,
        ));
    }
    let last = traj.last();
    out.write_json(
        "summary.json",
        &ClassicalSummary {
            constants: k,
            potential: field.potential(),
            initial,
            final_state: last,
            steps: spec.steps,
            s_span: spec.s_span,
            initial_defect: d0,
            final_defect: *traj.defects.last().expect("non-empty"),
            max_defect_drift: drift,
            final_onshell_residual: last.onshell_residual(k),
            reference,
        },
    )?;
    Ok(checks)
}

fn snapshot(psi: &WaveField) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    psi.write_snapshot(&mut buf)?;
    Ok(buf)
}

#[derive(Serialize)]
struct PropagationSummary<'a> {
    grid: &'a SpacetimeGrid,
    step: &'a StepConfig,
    n_steps: usize,
    sampling_ratio: Option<f64>,
    final_s: f64,
    max_deviation: f64,
    max_abs_norm_drift: f64,
}

fn propagate(
    psi: WaveField,
    cfg: &StepConfig,
    spec: &PropagationSpec,
    out: &mut OutputDir,
) -> Result<Vec<Check>> {
    let initial = snapshot(&psi)?;
    out.write("initial.xprop", &initial)?;
    let norm0 = psi.l2_norm();
    let mut diags = vec![StepDiagnostic {
        step: 0,
        s: psi.s,
        norm: norm0,
        deviation: 0.0,
        norm_drift: 0.0,
    }];
    let mut cur = psi;
    if spec.n_steps > 0 {
        let stepper = Stepper::new(cur.grid(), cfg)?;
        for n in 1..=spec.n_steps {
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
            if spec.snapshot_every > 0 && n % spec.snapshot_every == 0 && n < spec.n_steps {
                out.write(&format!("snapshots/step_{n:06}.xprop"), &snapshot(&cur)?)?;
            }
        }
    }
    out.write("final.xprop", &snapshot(&cur)?)?;
    let mut csv = Vec::new();
    kernel::write_diagnostics_csv(&diags, &mut csv)?;
    out.write("diagnostics.csv", &csv)?;
    out.write_json(
        "summary.json",
        &PropagationSummary {
            grid: cur.grid(),
            step: cfg,
            n_steps: spec.n_steps,
            sampling_ratio: (cfg.backend == Backend::Quadrature)
                .then(|| sampling_ratio(cur.grid(), cfg.epsilon, &cfg.constants)),
            final_s: cur.s,
            max_deviation: diags.iter().map(|d| d.deviation).fold(0.0, f64::max),
            max_abs_norm_drift: diags.iter().map(|d| d.norm_drift.abs()).fold(0.0, f64::max),
        },
    )?;
    Ok(Vec::new())
}

#[derive(Serialize)]
struct AgreementReport<'a> {
    test: &'a str,
    grid: &'a SpacetimeGrid,
    constants: &'a PhysicalConstants,
    potential: &'a str,
    scheme: DerivativeScheme,
    fields: usize,
    max_mode: i64,
    /// max |a − b| / max |b| per random field.
    relative_errors: Vec<f64>,
    max_relative_error: f64,
}

#[derive(Serialize)]
struct Bundle<'a> {
    checks: &'a [Check],
    reports: Vec<&'static str>,
    errors: Vec<String>,
}

fn kg_suite(
    psi: WaveField,
    potential: &PotentialField,
    k: &PhysicalConstants,
    spec: &KgSuiteSpec,
    rng: &mut ChaCha8Rng,
    out: &mut OutputDir,
) -> Result<Vec<Check>> {
    let grid = psi.grid().clone();
    let op = KgOperatorConfig::new(*k, potential.clone(), grid.clone()).with_scheme(spec.scheme);
    let mut checks = Vec::new();
    let mut reports = Vec::new();
    let mut errors = Vec::new();

    let fields: Vec<WaveField> = (0..spec.random_fields)
        .map(|_| random_field(&grid, rng, spec.max_mode))
        .collect();
    let factor = Complex64::new(0.0, k.hbar / (2.0 * k.mass));
    let mut product_vs_expanded = Vec::new();
    let mut generator = Vec::new();
    for f in &fields {
        let product = kg::kg_residual(f, &op)?;
        let expanded = kg::kg_residual_expanded(f, &op)?;
        product_vs_expanded.push(relative_sup(product.values(), expanded.values()));
        let g = kg::first_order_generator(f, &op)?;
        let scaled: Vec<Complex64> = product.values().iter().map(|z| factor * z).collect();
        generator.push(relative_sup(g.values(), &scaled));
    }
    for (file, test, errs) in [
        (
            "kg_product_vs_expanded.json",
            "kg-product-vs-expanded",
            product_vs_expanded,
        ),
        (
            "kg_generator_identity.json",
            "generator-identity",
            generator,
        ),
    ] {
        let worst = errs.iter().copied().fold(0.0, f64::max);
        out.write_json(
            file,
            &AgreementReport {
                test,
                grid: &grid,
                constants: k,
                potential: potential.kind().name(),
                scheme: spec.scheme,
                fields: fields.len(),
                max_mode: spec.max_mode,
                relative_errors: errs,
                max_relative_error: worst,
            },
        )?;
        reports.push(file);
        checks.push(Check::at_most(test, worst, OPERATOR_TOL));
    }

    // the step is compared with the exact (spectral) generator
    let order_op = op.clone().with_scheme(DerivativeScheme::Spectral);
    let step =
        StepConfig::new(spec.eps_list[0], spec.backend, *k, potential.clone()).with_rule(spec.rule);
    let order_name = "step-consistency order";
    match kg::step_consistency_order(&psi, &order_op, &step, &spec.eps_list) {
        Ok(rep) => {
            out.write(
                "order_report.json",
                format!("{}\n", rep.to_json()).as_bytes(),
            )?;
            reports.push("order_report.json");
            checks.push(match spec.backend {
                Backend::Spectral => Check {
                    name: order_name.into(),
                    value: rep.slope,
                    threshold: "|slope - 2| <= 0.2".into(),
                    pass: (rep.slope - 2.0).abs() <= 0.2,
                },
                Backend::Quadrature => Check {
                    name: order_name.into(),
                    value: rep.slope,
                    threshold: ">= 1.8".into(),
                    pass: rep.slope >= 1.8,
                },
            });
        }
        Err(e) => {
            errors.push(format!("{order_name}: {e}"));
            checks.push(Check {
                name: order_name.into(),
                value: f64::NAN,
                threshold: "conclusive estimate".into(),
                pass: false,
            });
        }
    }

    let table = moment_table(spec.moment_epsilon, k, &spec.moment_potential)?;
    out.write_json("moment_table.json", &table)?;
    reports.push("moment_table.json");
    checks.push(Check::at_most(
        "moment table",
        table.max_rel_error(),
        MOMENT_TOL,
    ));

    out.write_json(
        "bundle.json",
        &Bundle {
            checks: &checks,
            reports,
            errors,
        },
    )?;
    Ok(checks)
}

fn moments(k: &PhysicalConstants, spec: &MomentsSpec, out: &mut OutputDir) -> Result<Vec<Check>> {
    let tables = spec
        .epsilon
        .iter()
        .map(|&e| moment_table(e, k, &spec.potential))
        .collect::<xprop::Result<Vec<_>>>()?;
    out.write_json("moments.json", &tables)?;
    Ok(tables
        .iter()
        .map(|t| {
            Check::at_most(
                &format!("moments eps={}", t.epsilon),
                t.max_rel_error(),
                spec.tolerance,
            )
        })
        .collect())
}
