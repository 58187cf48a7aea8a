//! Closed-form solutions of the proper-time Lorentz force for the presets.

use super::ExtendedState;
use crate::constants::PhysicalConstants;

/// Hyperbolic motion from rest in a uniform field along axis 1 with proper
/// acceleration a = ζE/m:
/// u = c (cosh(a s/c), sinh(a s/c)), q = q₀ + (c²/a)(sinh, cosh − 1).
pub fn hyperbolic_motion(
    initial: &ExtendedState,
    accel: f64,
    s: f64,
    k: &PhysicalConstants,
) -> ExtendedState {
    let c = k.light_speed;
    let rate = accel / c;
    let (sh, ch) = ((rate * s).sinh(), (rate * s).cosh());
    let mut q = initial.q.clone();
    let mut u = vec![0.0; q.len()];
    q[0] += c / rate * sh;
    q[1] += c / rate * (ch - 1.0);
    u[0] = c * ch;
    u[1] = c * sh;
    ExtendedState {
        s: initial.s + s,
        q,
        u,
    }
}

/// Gyration in a uniform field along axis 3 (d = 4) with ω = ζB/(mc):
/// (u¹, u²) rotates clockwise at rate ω, u⁰ and u³ are constant.
pub fn cyclotron(
    initial: &ExtendedState,
    omega: f64,
    s: f64,
    _k: &PhysicalConstants,
) -> ExtendedState {
    let (sn, cs) = (omega * s).sin_cos();
    let (u1, u2) = (initial.u[1], initial.u[2]);
    let mut q = initial.q.clone();
    let mut u = initial.u.clone();
    u[1] = u1 * cs + u2 * sn;
    u[2] = -u1 * sn + u2 * cs;
    q[0] += initial.u[0] * s;
    q[3] += initial.u[3] * s;
    q[1] += (u1 * sn + u2 * (1.0 - cs)) / omega;
    q[2] += (u1 * (cs - 1.0) + u2 * sn) / omega;
    ExtendedState {
        s: initial.s + s,
        q,
        u,
    }
}

/// Straight world line q = q₀ + u s.
pub fn free(initial: &ExtendedState, s: f64) -> ExtendedState {
    ExtendedState {
        s: initial.s + s,
        q: initial
            .q
            .iter()
            .zip(&initial.u)
            .map(|(q, u)| q + u * s)
            .collect(),
        u: initial.u.clone(),
    }
}
