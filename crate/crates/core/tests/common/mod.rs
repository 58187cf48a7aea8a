#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use xprop::{PotentialField, SpacetimeGrid, WaveComponent, WaveField};

/// Random field band-limited to |n_α| ≤ `max_mode` on every axis.
pub fn random_field(grid: &SpacetimeGrid, rng: &mut ChaCha8Rng, max_mode: i64) -> WaveField {
    let d = grid.dim();
    let side = (2 * max_mode + 1) as usize;
    let count = side.pow(d as u32);
    let modes: Vec<(Vec<f64>, Complex64)> = (0..count)
        .map(|mut c| {
            let mut k = vec![0.0; d];
            for (a, ka) in k.iter_mut().enumerate().rev() {
                let n = (c % side) as i64 - max_mode;
                c /= side;
                *ka = grid.lattice_wavenumber(a, n);
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

/// Plane-wave potential with one random lattice-commensurate cosine per
/// component, modes |n| ≤ 2.
pub fn random_wave(grid: &SpacetimeGrid, rng: &mut ChaCha8Rng) -> PotentialField {
    let d = grid.dim();
    let components = (0..d)
        .map(|_| WaveComponent {
            amplitude: rng.gen_range(-0.5..0.5),
            wavevector: (0..d)
                .map(|a| grid.lattice_wavenumber(a, rng.gen_range(-2..=2)))
                .collect(),
            phase: rng.gen_range(0.0..std::f64::consts::TAU),
        })
        .collect();
    PotentialField::Wave { components }
}

/// Grid-sampled potential band-limited to |n| ≤ 2.
pub fn random_sampled(grid: &SpacetimeGrid, rng: &mut ChaCha8Rng) -> PotentialField {
    let d = grid.dim();
    let terms: Vec<Vec<(Vec<f64>, f64, f64)>> = (0..d)
        .map(|_| {
            (0..3)
                .map(|_| {
                    let k = (0..d)
                        .map(|a| grid.lattice_wavenumber(a, rng.gen_range(-2..=2)))
                        .collect();
                    (
                        k,
                        rng.gen_range(-0.3..0.3),
                        rng.gen_range(0.0..std::f64::consts::TAU),
                    )
                })
                .collect()
        })
        .collect();
    PotentialField::sample(grid, |q| {
        terms
            .iter()
            .map(|comp| {
                comp.iter()
                    .map(|(k, a, ph)| {
                        let x: f64 = k.iter().zip(q).map(|(u, v)| u * v).sum();
                        a * (x + ph).cos()
                    })
                    .sum()
            })
            .collect()
    })
}

/// Every potential preset applicable in dimension `grid.dim()`.
pub fn presets(grid: &SpacetimeGrid, rng: &mut ChaCha8Rng) -> Vec<(&'static str, PotentialField)> {
    let d = grid.dim();
    let mut out = vec![
        ("zero", PotentialField::zero(d)),
        (
            "constant",
            PotentialField::constant((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()),
        ),
        (
            "constant-electric",
            PotentialField::electric(d, rng.gen_range(-1.0..1.0)),
        ),
        ("wave", random_wave(grid, rng)),
        ("sampled", random_sampled(grid, rng)),
    ];
    if d == 4 {
        out.push((
            "constant-magnetic",
            PotentialField::magnetic(rng.gen_range(-1.0..1.0)),
        ));
    }
    out
}
