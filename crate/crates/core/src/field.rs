//! Spectral fields and the DFT contract.
//!
//! Normalization: a field is `u(x) = Σ_k c_k e^{i<k,x>}` on `[0, 2π)^d`, and
//! [`SpectralField`] stores the `c_k`. Sampling at the grid points
//! `x_j = 2π j / N` and applying the forward DFT divided by `N^d` recovers the
//! `c_k`. With this choice
//!
//! ```text
//! ‖u‖²_{L²} = ∫ |u|² dx = (2π)^d Σ_k |c_k|² = (2π/N)^d Σ_j |u(x_j)|²
//! ```
//!
//! holds exactly for trigonometric polynomials on the lattice. Every norm in
//! the crate goes through [`weighted_norm`].

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::grid::{Mode, TorusGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

/// Point values of a field on the collocation grid, same flat layout as the
/// coefficients (axis `a` slot `j` is the point `x_a = 2π j / N`).
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: TorusGrid,
    values: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                actual: coeffs.len(),
            });
        }
        Ok(SpectralField { grid, coeffs })
    }

    /// Builds a field from a function of the lattice point.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(Mode) -> Complex64 + Sync) -> Self {
        let coeffs = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.mode(i)))
            .collect();
        SpectralField { grid, coeffs }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at lattice point `k`, `None` off the lattice.
    pub fn get(&self, k: &[i64]) -> Option<Complex64> {
        self.grid.index_of(k).map(|i| self.coeffs[i])
    }

    pub fn set(&mut self, k: &[i64], value: Complex64) -> Result<()> {
        let i = self.grid.index_of(k).ok_or_else(|| {
            Error::InvalidGrid(format!("mode {k:?} is not on the {}-point lattice", self.grid.n_per_axis()))
        })?;
        self.coeffs[i] = value;
        Ok(())
    }

    pub fn l2_norm(&self) -> f64 {
        weighted_norm(self, |_| 1.0)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn scale_in_place(&mut self, factor: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= factor);
    }

    /// `self - other`, failing when the grids differ.
    pub fn difference(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_same_grid(other)?;
        Ok(SpectralField {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// `‖self - other‖_{L²}`.
    pub fn l2_distance(&self, other: &SpectralField) -> Result<f64> {
        Ok(self.difference(other)?.l2_norm())
    }

    pub(crate) fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    pub fn to_physical(&self) -> PhysicalField {
        let mut values = self.coeffs.clone();
        fft::transform(&mut values, &self.grid, Direction::Inverse);
        PhysicalField {
            grid: self.grid,
            values,
        }
    }
}

impl PhysicalField {
    pub fn new(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        Ok(PhysicalField { grid, values })
    }

    /// Samples `f` at the grid points.
    pub fn sample(grid: TorusGrid, f: impl Fn(&[f64]) -> Complex64 + Sync) -> Self {
        let h = grid.spacing();
        let n = grid.n_per_axis();
        let values = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let mut x = [0.0; crate::grid::MAX_DIM];
                let mut rest = idx;
                for axis in (0..grid.dim()).rev() {
                    x[axis] = (rest % n) as f64 * h;
                    rest /= n;
                }
                f(&x[..grid.dim()])
            })
            .collect();
        PhysicalField { grid, values }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Quadrature L² norm `((2π/N)^d Σ_j |u_j|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let cell = self.grid.spacing().powi(self.grid.dim() as i32);
        (cell * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_spectral(&self) -> SpectralField {
        to_spectral_owned(self.values.clone(), self.grid)
    }
}

/// Forward transform of point values given as a raw slice.
pub fn to_spectral(values: &[Complex64], grid: TorusGrid) -> Result<SpectralField> {
    if values.len() != grid.len() {
        return Err(Error::SizeMismatch {
            expected: grid.len(),
            actual: values.len(),
        });
    }
    Ok(to_spectral_owned(values.to_vec(), grid))
}

pub(crate) fn to_spectral_owned(mut values: Vec<Complex64>, grid: TorusGrid) -> SpectralField {
    fft::transform(&mut values, &grid, Direction::Forward);
    let inv = 1.0 / grid.len() as f64;
    values.par_iter_mut().for_each(|v| *v *= inv);
    SpectralField {
        grid,
        coeffs: values,
    }
}

/// `((2π)^d Σ_k w(k)² |c_k|²)^{1/2}`, summed sequentially in index order so
/// the value is independent of the thread count.
pub fn weighted_norm(field: &SpectralField, weight: impl Fn(Mode) -> f64) -> f64 {
    let grid = field.grid();
    let sum: f64 = field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let w = weight(grid.mode(i));
            w * w * c.norm_sqr()
        })
        .sum();
    grid.volume_sqrt() * sum.sqrt()
}
