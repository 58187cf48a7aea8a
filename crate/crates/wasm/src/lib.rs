//! JSON-in, JSON-out bindings used by the static page in `www/`.
//!
//! Every exported function takes a JSON parameter object and returns a JSON
//! string; failures come back as `{"error": "..."}` so the page never has
//! to catch exceptions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;
use xprop::classical::{
    integrate_classical, reference, ExtendedState, FieldTensor, IntegratorConfig, Precision,
};
use xprop::kernel::{Backend, StepConfig, Stepper};
use xprop::oracle::moment_table;
use xprop::{PhysicalConstants, PotentialField, SpacetimeGrid, WaveField};

/// Largest number of trajectory samples returned to the page.
const MAX_SAMPLES: usize = 400;
const MAX_GRID: usize = 256;

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Free,
    Electric,
    Magnetic,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitParams {
    pub preset: Preset,
    #[serde(default)]
    pub field: f64,
    pub spatial_u: Vec<f64>,
    pub s_span: f64,
    pub steps: usize,
    #[serde(default)]
    pub double_double: bool,
}

#[derive(Debug, Serialize)]
pub struct Orbit {
    pub s: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    /// (u·u + c²)/c² per sample.
    pub residual: Vec<f64>,
    /// max |u − u_ref| / |u_ref| over the samples, when a closed form exists.
    pub reference_error: Option<f64>,
}

pub fn orbit_json(params: &str) -> Result<String, String> {
    let p: OrbitParams = serde_json::from_str(params).map_err(|e| e.to_string())?;
    let k = PhysicalConstants::natural();
    let (d, potential) = match p.preset {
        Preset::Free => (
            p.spatial_u.len() + 1,
            PotentialField::zero(p.spatial_u.len() + 1),
        ),
        Preset::Electric => (2, PotentialField::electric(2, p.field)),
        Preset::Magnetic => (4, PotentialField::magnetic(p.field)),
    };
    if p.spatial_u.len() + 1 != d {
        return Err(format!("spatial_u needs {} entries", d - 1));
    }
    if !(p.s_span > 0.0) || p.steps == 0 || p.steps > 1_000_000 {
        return Err("need s_span > 0 and 1 <= steps <= 1e6".into());
    }
    let start = ExtendedState::on_shell(vec![0.0; d], &p.spatial_u, &k);
    let cfg = IntegratorConfig {
        precision: if p.double_double {
            Precision::DoubleDouble
        } else {
            Precision::Double
        },
        ..Default::default()
    };
    let field = FieldTensor::new(potential);
    let traj = integrate_classical(&start, &field, &k, p.s_span, p.steps, cfg)
        .map_err(|e| e.to_string())?;
    let closed: Option<Box<dyn Fn(f64) -> ExtendedState>> = match p.preset {
        Preset::Free => Some(Box::new(|s| reference::free(&start, s))),
        Preset::Electric if p.spatial_u[0] == 0.0 => Some(Box::new(|s| {
            reference::hyperbolic_motion(&start, k.charge * p.field / k.mass, s, &k)
        })),
        Preset::Magnetic => Some(Box::new(|s| {
            reference::cyclotron(&start, k.charge * p.field / (k.mass * k.light_speed), s, &k)
        })),
        _ => None,
    };
    let stride = traj.states.len().div_ceil(MAX_SAMPLES).max(1);
    let mut out = Orbit {
        s: Vec::new(),
        q: Vec::new(),
        u: Vec::new(),
        residual: Vec::new(),
        reference_error: closed.as_ref().map(|_| 0.0),
    };
    for (i, st) in traj.states.iter().enumerate() {
        if let (Some(f), Some(err)) = (&closed, out.reference_error.as_mut()) {
            let r = f(st.s);
            let num: f64 = st.u.iter().zip(&r.u).map(|(a, b)| (a - b).powi(2)).sum();
            let den: f64 = r.u.iter().map(|b| b * b).sum();
            *err = err.max((num / den).sqrt());
        }
        if i % stride == 0 || i + 1 == traj.states.len() {
            out.s.push(st.s);
            out.q.push(st.q.clone());
            out.u.push(st.u.clone());
            out.residual.push(st.onshell_residual(&k));
        }
    }
    Ok(serde_json::to_string(&out).expect("orbit serialises"))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketParams {
    pub points: usize,
    pub extent: f64,
    pub epsilon: f64,
    pub steps: usize,
    pub center: [f64; 2],
    pub width: [f64; 2],
    pub carrier: [f64; 2],
    #[serde(default)]
    pub potential: [f64; 2],
}

#[derive(Debug, Serialize)]
pub struct Packet {
    pub points: usize,
    pub s: f64,
    pub norm_drift: f64,
    /// |ψ|² scaled to max 1, row-major with q⁰ slowest.
    pub density: Vec<f64>,
}

/// Propagates a Gaussian packet on a (q⁰, q¹) torus with the spectral step
/// in a constant potential.
pub fn packet_json(params: &str) -> Result<String, String> {
    let p: PacketParams = serde_json::from_str(params).map_err(|e| e.to_string())?;
    if !(2..=MAX_GRID).contains(&p.points) {
        return Err(format!("points must be in 2..={MAX_GRID}"));
    }
    if p.steps > 10_000 {
        return Err("at most 10000 steps".into());
    }
    let grid = SpacetimeGrid::uniform(2, p.points, p.extent).map_err(|e| e.to_string())?;
    let k = PhysicalConstants::natural();
    let cfg = StepConfig::new(
        p.epsilon,
        Backend::Spectral,
        k,
        PotentialField::constant(p.potential.to_vec()),
    );
    let stepper = Stepper::new(&grid, &cfg).map_err(|e| e.to_string())?;
    let mut psi = WaveField::gaussian_packet(grid, &p.center, &p.width, &p.carrier);
    let norm0 = psi.l2_norm();
    for _ in 0..p.steps {
        psi = stepper.apply(&psi).map_err(|e| e.to_string())?;
    }
    let mut density: Vec<f64> = psi.values().iter().map(|z| z.norm_sqr()).collect();
    let peak = density.iter().copied().fold(0.0, f64::max);
    if peak > 0.0 {
        density.iter_mut().for_each(|v| *v /= peak);
    }
    let out = Packet {
        points: p.points,
        s: psi.s,
        norm_drift: psi.l2_norm() / norm0 - 1.0,
        density,
    };
    Ok(serde_json::to_string(&out).expect("packet serialises"))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentParams {
    pub epsilon: f64,
    pub potential: Vec<f64>,
}

/// Kernel moments from closed forms and from the damped Fresnel oracle.
pub fn moments_json(params: &str) -> Result<String, String> {
    let p: MomentParams = serde_json::from_str(params).map_err(|e| e.to_string())?;
    let table = moment_table(p.epsilon, &PhysicalConstants::natural(), &p.potential)
        .map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&table).expect("table serialises"))
}

fn respond(r: Result<String, String>) -> String {
    r.unwrap_or_else(|e| serde_json::json!({ "error": e }).to_string())
}

#[wasm_bindgen]
pub fn orbit(params: &str) -> String {
    respond(orbit_json(params))
}

#[wasm_bindgen]
pub fn packet(params: &str) -> String {
    respond(packet_json(params))
}

#[wasm_bindgen]
pub fn moments(params: &str) -> String {
    respond(moments_json(params))
}
