use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::SpacetimeGrid;

/// Complex amplitude ψ on a space-time grid, evolved in the parameter s.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    grid: SpacetimeGrid,
    values: Vec<Complex64>,
    pub s: f64,
}

const MAGIC: &str = "XPROP1";

impl WaveField {
    pub fn new(grid: SpacetimeGrid, values: Vec<Complex64>, s: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        let field = Self { grid, values, s };
        field.check_finite("constructor")?;
        Ok(field)
    }

    pub fn zeros(grid: SpacetimeGrid) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self {
            grid,
            values,
            s: 0.0,
        }
    }

    pub fn from_fn<F>(grid: SpacetimeGrid, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let values = (0..grid.len()).map(|p| f(&grid.point(p))).collect();
        Self {
            grid,
            values,
            s: 0.0,
        }
    }

    /// e^{i Σ k_μ q^μ} for covariant wavenumbers `k`.
    pub fn plane_wave(grid: SpacetimeGrid, k: &[f64]) -> Self {
        assert_eq!(k.len(), grid.dim());
        Self::from_fn(grid, |q| {
            let phase: f64 = k.iter().zip(q).map(|(a, b)| a * b).sum();
            Complex64::from_polar(1.0, phase)
        })
    }

    /// Plane wave of signed lattice mode numbers, exactly periodic on the grid.
    pub fn lattice_plane_wave(grid: SpacetimeGrid, modes: &[i64]) -> Self {
        let k: Vec<f64> = modes
            .iter()
            .enumerate()
            .map(|(a, &n)| grid.lattice_wavenumber(a, n))
            .collect();
        Self::plane_wave(grid, &k)
    }

    /// Periodized Gaussian packet with per-axis widths and carrier wavenumbers.
    ///
    /// Images up to two periods away are summed, which keeps the field
    /// smooth across the torus seams for widths up to about L/4.
    pub fn gaussian_packet(
        grid: SpacetimeGrid,
        center: &[f64],
        width: &[f64],
        carrier: &[f64],
    ) -> Self {
        let d = grid.dim();
        let extents = grid.extents().to_vec();
        Self::from_fn(grid, |q| {
            let mut amp = 1.0;
            for a in 0..d {
                let mut s = 0.0;
                for image in -2..=2 {
                    let x = q[a] - center[a] + image as f64 * extents[a];
                    s += (-0.5 * (x / width[a]).powi(2)).exp();
                }
                amp *= s;
            }
            let phase: f64 = (0..d).map(|a| carrier[a] * (q[a] - center[a])).sum();
            Complex64::from_polar(amp, phase)
        })
    }

    pub fn grid(&self) -> &SpacetimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn with_values(&self, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        Self {
            grid: self.grid.clone(),
            values,
            s: self.s,
        }
    }

    /// Unweighted grid L2 norm times the square root of the cell volume.
    pub fn l2_norm(&self) -> f64 {
        l2_norm(&self.values, self.grid.cell_volume())
    }

    pub fn check_finite(&self, op: &'static str) -> Result<()> {
        if self
            .values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            Ok(())
        } else {
            Err(Error::NonFinite(op))
        }
    }

    /// ‖self − other‖ / ‖other‖ on the same grid.
    pub fn relative_distance(&self, other: &WaveField) -> f64 {
        relative_l2(&self.values, &other.values)
    }

    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "{MAGIC} {}", self.grid.dim())?;
        for n in self.grid.points() {
            write!(w, " {n}")?;
        }
        for l in self.grid.extents() {
            write!(w, " {l:e}")?;
        }
        writeln!(w, " {:e}", self.s)?;
        for z in &self.values {
            writeln!(w, "{:e} {:e}", z.re, z.im)?;
        }
        Ok(())
    }

    pub fn read_snapshot<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty snapshot".into(),
        })?;
        let header = header?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        if toks.first() != Some(&MAGIC) {
            return Err(perr(1, format!("expected {MAGIC} magic")));
        }
        let d: usize = toks
            .get(1)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| perr(1, "missing dimension".into()))?;
        if toks.len() != 2 + 2 * d + 1 {
            return Err(perr(1, format!("expected {} header fields", 3 + 2 * d)));
        }
        let points = toks[2..2 + d]
            .iter()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| perr(1, e.to_string()))?;
        let extents = toks[2 + d..2 + 2 * d]
            .iter()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| perr(1, e.to_string()))?;
        let s: f64 = toks[2 + 2 * d]
            .parse()
            .map_err(|e: std::num::ParseFloatError| perr(1, e.to_string()))?;
        let grid = SpacetimeGrid::new(points, extents)?;
        let mut values = Vec::with_capacity(grid.len());
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let mut next = || -> Result<f64> {
                it.next()
                    .ok_or_else(|| perr(i + 1, "expected `re im`".into()))?
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| perr(i + 1, e.to_string()))
            };
            values.push(Complex64::new(next()?, next()?));
        }
        Self::new(grid, values, s)
    }
}

pub(crate) fn l2_norm(values: &[Complex64], cell: f64) -> f64 {
    (values.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell).sqrt()
}

/// ‖a − b‖₂ / ‖b‖₂ over raw samples.
pub fn relative_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// max |a − b| / max |b|.
pub fn relative_sup(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    let den = b.iter().map(|y| y.norm()).fold(0.0, f64::max);
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_wrong_length_and_nan() {
        let g = SpacetimeGrid::uniform(2, 4, 1.0).unwrap();
        assert!(WaveField::new(g.clone(), vec![Complex64::new(0.0, 0.0); 3], 0.0).is_err());
        let mut v = vec![Complex64::new(0.0, 0.0); 16];
        v[3].im = f64::NAN;
        assert!(matches!(
            WaveField::new(g, v, 0.0),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn snapshot_header_format() {
        let g = SpacetimeGrid::new(vec![2, 3], vec![1.5, 2.0]).unwrap();
        let f = WaveField::zeros(g);
        let mut buf = Vec::new();
        f.write_snapshot(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(first, "XPROP1 2 2 3 1.5e0 2e0 0e0");
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn snapshot_parse_errors() {
        assert!(WaveField::read_snapshot("XPROP2 2 2 2 1 1 0\n".as_bytes()).is_err());
        assert!(WaveField::read_snapshot("XPROP1 2 2 2 1 1 0\n0 0\n".as_bytes()).is_err());
        let ok = "XPROP1 2 2 2 1 1 0.5\n0 0\n1 0\n0 1\n-1 -1\n";
        let f = WaveField::read_snapshot(ok.as_bytes()).unwrap();
        assert_eq!(f.s, 0.5);
        assert_eq!(f.values()[3], Complex64::new(-1.0, -1.0));
    }

    #[test]
    fn norm_of_plane_wave_is_sqrt_volume() {
        let g = SpacetimeGrid::new(vec![8, 16], vec![2.0, 3.0]).unwrap();
        let f = WaveField::lattice_plane_wave(g, &[1, -3]);
        assert!((f.l2_norm() - 6.0f64.sqrt()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn snapshot_roundtrip_bit_exact(
            vals in proptest::collection::vec((-1e300f64..1e300, -1e-300f64..1e-300), 12),
            s in -1e6f64..1e6,
            l0 in 1e-3f64..1e3,
        ) {
            let g = SpacetimeGrid::new(vec![3, 4], vec![l0, 0.1]).unwrap();
            let values = vals.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
            let f = WaveField::new(g, values, s).unwrap();
            let mut buf = Vec::new();
            f.write_snapshot(&mut buf).unwrap();
            let back = WaveField::read_snapshot(buf.as_slice()).unwrap();
            prop_assert_eq!(back.grid(), f.grid());
            prop_assert_eq!(back.s.to_bits(), f.s.to_bits());
            for (a, b) in back.values().iter().zip(f.values()) {
                prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }
}
