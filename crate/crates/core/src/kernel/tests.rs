use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::classical::{extended_lagrangian, ExtendedState};
use crate::field::{relative_l2, relative_sup};

fn nat() -> PhysicalConstants {
    PhysicalConstants::natural()
}

fn spectral(eps: f64, pot: PotentialField) -> StepConfig {
    StepConfig::new(eps, Backend::Spectral, nat(), pot)
}

fn quadrature(eps: f64, pot: PotentialField) -> StepConfig {
    StepConfig::new(eps, Backend::Quadrature, nat(), pot)
}

/// 2D grid with mL/2π = 12 so that (13, 5) and (12, 0) are on shell.
fn shell_grid() -> SpacetimeGrid {
    SpacetimeGrid::uniform(2, 64, 2.0 * PI * 12.0).unwrap()
}

#[test]
fn step_action_examples() {
    let cfg = spectral(1.0, PotentialField::zero(2));
    assert_eq!(step_action(&[0.0, 0.0], &[0.0, 0.0], &cfg), -0.5);
    assert_eq!(step_action(&[1.0, 0.0], &[0.0, 0.0], &cfg), -1.0);
    let cfg = spectral(1.0, PotentialField::constant(vec![2.0, 0.0]));
    assert_eq!(step_action(&[1.0, 0.0], &[0.0, 0.0], &cfg), 1.0);
}

#[test]
fn step_action_matches_extended_lagrangian() {
    let k = PhysicalConstants::new(1.3, 2.0, -0.7, 0.9).unwrap();
    let pot = PotentialField::constant(vec![0.4, -1.1, 0.3]);
    let eps = 0.37;
    let cfg = StepConfig::new(eps, Backend::Spectral, k, pot.clone());
    let u = [2.5, 0.3, -0.8];
    let xi: Vec<f64> = u.iter().map(|x| x * eps).collect();
    let lhs = step_action(&xi, &[0.0; 3], &cfg);
    let state = ExtendedState::new(0.0, vec![0.0; 3], u.to_vec()).unwrap();
    let rhs = eps * extended_lagrangian(&state, &pot, &k).unwrap();
    assert!((lhs - rhs).abs() < 1e-13, "{lhs} vs {rhs}");
}

#[test]
fn normalization_examples() {
    let k = nat();
    let m2 = normalization_m(2, 1.0, &k);
    assert!((m2 - Complex64::new(0.0, -2.0 * PI)).norm() < 1e-12);
    let eps = 0.3;
    let target = (Complex64::new(2.0 * PI * eps, 0.0) / Complex64::i()).powi(2);
    assert!((normalization_m(4, eps, &k) - target).norm() < 1e-12);
    let g = gaussian_prefactor(2, 1.0, &k);
    assert!((g - Complex64::new(2.0 * PI, 0.0)).norm() < 1e-12);
}

#[test]
fn constant_field_picks_up_rest_phase() {
    let grid = SpacetimeGrid::uniform(2, 8, 4.0).unwrap();
    let psi = WaveField::from_fn(grid, |_| Complex64::new(1.0, 0.0));
    let out = spectral_step(&psi, &spectral(0.1, PotentialField::zero(2))).unwrap();
    let want = Complex64::from_polar(1.0, -0.05);
    for z in out.values() {
        assert!((z - want).norm() < 1e-14);
    }
    assert!((out.s - 0.1).abs() < 1e-15);
}

#[test]
fn on_shell_plane_wave_is_stationary() {
    let grid = shell_grid();
    for modes in [[12, 0], [13, 5], [-13, -5], [15, 9], [20, 16]] {
        let psi = WaveField::lattice_plane_wave(grid.clone(), &modes);
        let out = spectral_step(&psi, &spectral(0.7, PotentialField::zero(2))).unwrap();
        assert!(
            relative_sup(out.values(), psi.values()) < 1e-12,
            "{modes:?}"
        );
    }
}

#[test]
fn shifted_on_shell_wave_is_stationary_in_constant_potential() {
    let grid = shell_grid();
    let base = [13i64, 5];
    let dk = grid.lattice_wavenumber(0, 1);
    // ħk = ζA/c + ħk' with A chosen as whole lattice shifts
    let a = vec![3.0 * dk, -2.0 * dk];
    let modes = [base[0] + 3, base[1] - 2];
    let psi = WaveField::lattice_plane_wave(grid, &modes);
    let out = spectral_step(&psi, &spectral(0.4, PotentialField::constant(a))).unwrap();
    assert!(relative_sup(out.values(), psi.values()) < 1e-12);
}

#[test]
fn spectral_backend_rejects_varying_potential() {
    let grid = SpacetimeGrid::uniform(2, 8, 4.0).unwrap();
    let psi = WaveField::zeros(grid);
    let err = spectral_step(&psi, &spectral(0.1, PotentialField::electric(2, 1.0))).unwrap_err();
    assert!(matches!(err, Error::UnsupportedBackend { .. }));
}

#[test]
fn quadrature_guard() {
    let grid = SpacetimeGrid::uniform(2, 16, 4.0).unwrap();
    let psi = WaveField::zeros(grid);
    let mut cfg = quadrature(0.1, PotentialField::zero(2));
    cfg.grid_guard = 100;
    let err = quadrature_step(&psi, &cfg).unwrap_err();
    assert!(matches!(
        err,
        Error::GridGuard {
            points: 256,
            limit: 100
        }
    ));
}

#[test]
fn zero_steps_is_identity() {
    let grid = SpacetimeGrid::uniform(2, 8, 4.0).unwrap();
    let psi = WaveField::gaussian_packet(grid, &[0.0, 0.0], &[0.7, 0.7], &[0.0, 1.0]);
    let out = propagate(&psi, &spectral(0.1, PotentialField::zero(2)), 0).unwrap();
    assert_eq!(out, psi);
}

#[test]
fn off_shell_phase_accumulates() {
    let grid = shell_grid();
    let k = nat();
    let eps = 0.3;
    let modes = [4i64, 7];
    let psi = WaveField::lattice_plane_wave(grid.clone(), &modes);
    let kv = [
        grid.lattice_wavenumber(0, modes[0]),
        grid.lattice_wavenumber(1, modes[1]),
    ];
    let delta = k.hbar * k.hbar * contract(&kv, &kv) / (2.0 * k.mass) + 0.5 * k.rest_energy();
    let n = 9;
    let out = propagate(&psi, &spectral(eps, PotentialField::zero(2)), n).unwrap();
    let phase = Complex64::from_polar(1.0, -(n as f64) * eps * delta / k.hbar);
    let want: Vec<Complex64> = psi.values().iter().map(|z| z * phase).collect();
    assert!(relative_sup(out.values(), &want) < 1e-11);
    assert!((out.s - n as f64 * eps).abs() < 1e-12);
}

#[test]
fn half_steps_compose() {
    let grid = SpacetimeGrid::uniform(2, 32, 10.0).unwrap();
    let psi = WaveField::gaussian_packet(grid, &[0.5, -1.0], &[1.2, 1.0], &[0.3, 2.0]);
    let pot = PotentialField::constant(vec![0.3, -0.2]);
    let full = spectral_step(&psi, &spectral(0.2, pot.clone())).unwrap();
    let half = propagate(&psi, &spectral(0.1, pot), 2).unwrap();
    assert!(relative_sup(half.values(), full.values()) < 1e-13);
}

#[test]
fn kernel_magnitude_is_uniform_for_delta() {
    let grid = SpacetimeGrid::uniform(2, 16, 4.0).unwrap();
    let mut psi = WaveField::zeros(grid.clone());
    psi.values_mut()[grid.flat_index(&[8, 8]).unwrap()] = Complex64::new(1.0, 0.0);
    let cfg = quadrature(1.0, PotentialField::zero(2)).with_rule(QuadratureRule::Trapezoid);
    let out = quadrature_step(&psi, &cfg).unwrap();
    let m0 = out.values()[0].norm();
    for z in out.values() {
        assert!((z.norm() - m0).abs() < 1e-14 * m0.max(1.0));
    }
}

#[test]
fn trapezoid_matches_literal_sum() {
    let grid = SpacetimeGrid::uniform(2, 6, 3.0).unwrap();
    let pot = PotentialField::longitudinal_wave(&grid, &[0.3, -0.2]).unwrap();
    let k = nat();
    let eps = 0.8;
    let cfg = quadrature(eps, pot).with_rule(QuadratureRule::Trapezoid);
    let psi = WaveField::gaussian_packet(grid.clone(), &[0.2, 0.0], &[0.6, 0.6], &[0.0, 1.0]);
    let out = quadrature_step(&psi, &cfg).unwrap();

    let n = grid.points()[0];
    let g = gaussian_prefactor(2, eps, &k);
    let vol = grid.cell_volume();
    for p in 0..grid.len() {
        let i = grid.multi_index(p);
        let q = grid.point(p);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..grid.len() {
            let jj = grid.multi_index(j);
            let xi: Vec<f64> = (0..2)
                .map(|a| grid.mode_number(a, jj[a]) as f64 * grid.spacing(a))
                .collect();
            let mid: Vec<f64> = (0..2).map(|a| q[a] - 0.5 * xi[a]).collect();
            let src: Vec<usize> = (0..2)
                .map(|a| (i[a] as i64 - grid.mode_number(a, jj[a])).rem_euclid(n as i64) as usize)
                .collect();
            let s = step_action(&xi, &mid, &cfg);
            acc += Complex64::from_polar(1.0, s / k.hbar)
                * psi.values()[grid.flat_index(&src).unwrap()]
                * vol;
        }
        let want = acc / g;
        assert!((out.values()[p] - want).norm() < 1e-12, "point {p}");
    }
}

#[test]
fn filon_equals_trapezoid_at_integer_ratio() {
    // at ratio exactly 1 the sampled chirp is its own discrete Fourier pair
    let grid = SpacetimeGrid::uniform(2, 32, 8.0).unwrap();
    let k = nat();
    let eps = grid.extents()[0] * grid.spacing(0) / (2.0 * PI);
    assert!((sampling_ratio(&grid, eps, &k) - 1.0).abs() < 1e-12);
    let psi = WaveField::gaussian_packet(grid, &[0.0, 0.3], &[1.0, 1.0], &[0.5, 0.0]);
    let f = quadrature_step(&psi, &quadrature(eps, PotentialField::zero(2))).unwrap();
    let t = quadrature_step(
        &psi,
        &quadrature(eps, PotentialField::zero(2)).with_rule(QuadratureRule::Trapezoid),
    )
    .unwrap();
    assert!(relative_sup(t.values(), f.values()) < 1e-11);
}

#[test]
fn filon_matches_spectral_for_uniform_potential() {
    let grid = SpacetimeGrid::uniform(2, 32, 8.0).unwrap();
    let pot = PotentialField::constant(vec![0.2, 0.5]);
    let psi = WaveField::gaussian_packet(grid, &[0.0, 0.0], &[1.0, 1.0], &[0.0, 1.5]);
    let a = spectral_step(&psi, &spectral(0.9, pot.clone())).unwrap();
    let b = quadrature_step(&psi, &quadrature(0.9, pot)).unwrap();
    let r = relative_l2(b.values(), a.values());
    assert!(r < 1e-12, "{r}");
}

#[test]
fn diagnostics_csv_header() {
    let grid = SpacetimeGrid::uniform(2, 8, 4.0).unwrap();
    let psi = WaveField::from_fn(grid, |_| Complex64::new(1.0, 0.0));
    let (_, diags) =
        propagate_with_diagnostics(&psi, &spectral(0.1, PotentialField::zero(2)), 2).unwrap();
    assert_eq!(diags.len(), 3);
    let mut buf = Vec::new();
    write_diagnostics_csv(&diags, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("step,s,norm,deviation,norm_drift\n"));
    assert_eq!(text.lines().count(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectral_step_is_unitary(
        seed in 0u64..1000,
        eps in 0.01f64..2.0,
        a0 in -1.0f64..1.0,
        a1 in -1.0f64..1.0,
    ) {
        let grid = SpacetimeGrid::uniform(2, 16, 6.0).unwrap();
        let psi = WaveField::from_fn(grid, |q| {
            let t = seed as f64 * 0.013;
            Complex64::new((q[0] * 1.1 + t).sin() + 0.3, (q[1] * 2.0 - t).cos() * q[0])
        });
        let out = spectral_step(&psi, &spectral(eps, PotentialField::constant(vec![a0, a1]))).unwrap();
        prop_assert!((out.l2_norm() / psi.l2_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_modes_are_eigenvectors(
        n0 in -8i64..8,
        n1 in -8i64..8,
        eps in 0.01f64..1.0,
        a0 in -0.5f64..0.5,
        a1 in -0.5f64..0.5,
    ) {
        let grid = SpacetimeGrid::uniform(2, 16, 6.0).unwrap();
        let k = nat();
        let psi = WaveField::lattice_plane_wave(grid.clone(), &[n0, n1]);
        let out = spectral_step(&psi, &spectral(eps, PotentialField::constant(vec![a0, a1]))).unwrap();
        let kappa = [
            grid.lattice_wavenumber(0, n0) - k.coupling() * a0,
            grid.lattice_wavenumber(1, n1) - k.coupling() * a1,
        ];
        let phase = -eps * (k.hbar * contract(&kappa, &kappa) / (2.0 * k.mass)
            + k.rest_energy() / (2.0 * k.hbar));
        let lambda = Complex64::from_polar(1.0, phase);
        let want: Vec<Complex64> = psi.values().iter().map(|z| z * lambda).collect();
        prop_assert!(relative_sup(out.values(), &want) < 1e-12);
    }
}
