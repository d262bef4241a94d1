//! Uniform grids on the d-torus `[0, 2π)^d` and their frequency lattices.
//!
//! A grid with `N` points per axis carries the lattice `{-N/2, …, N/2 - 1}^d`.
//! Coefficients live in a flat row-major array whose per-axis order is the
//! usual FFT order: slot `j` on an axis holds frequency `j` for `j < N/2` and
//! `j - N` otherwise. The last axis varies fastest. Everything that needs to
//! know which frequency sits where goes through [`TorusGrid::mode`] and
//! [`TorusGrid::index_of`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct TorusGrid {
    dim: usize,
    n: usize,
    log2n: u32,
    len: usize,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    dim: usize,
    n_per_axis: usize,
}

impl TryFrom<GridRepr> for TorusGrid {
    type Error = Error;
    fn try_from(r: GridRepr) -> Result<Self> {
        TorusGrid::new(r.dim, r.n_per_axis)
    }
}

impl From<TorusGrid> for GridRepr {
    fn from(g: TorusGrid) -> Self {
        GridRepr {
            dim: g.dim,
            n_per_axis: g.n,
        }
    }
}

/// A point of the frequency lattice. Only the first `dim` entries are used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mode {
    k: [i64; MAX_DIM],
    dim: usize,
}

impl Mode {
    pub fn new(k: &[i64]) -> Result<Self> {
        if k.is_empty() || k.len() > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "lattice point must have 1..={MAX_DIM} components, got {}",
                k.len()
            )));
        }
        let mut buf = [0; MAX_DIM];
        buf[..k.len()].copy_from_slice(k);
        Ok(Mode { k: buf, dim: k.len() })
    }

    pub fn zero(dim: usize) -> Self {
        Mode {
            k: [0; MAX_DIM],
            dim,
        }
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.k[..self.dim]
    }

    /// `|k|^2`, the symbol of `-Δ`.
    pub fn norm_sq(&self) -> f64 {
        self.as_slice().iter().map(|&k| (k * k) as f64).sum()
    }

    /// `max_j |k_j|`, the quantity compared against the filter cutoff.
    pub fn max_abs(&self) -> u64 {
        self.as_slice()
            .iter()
            .map(|k| k.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// Japanese bracket `<k> = (1 + |k|^2)^{1/2}`.
    pub fn bracket(&self) -> f64 {
        (1.0 + self.norm_sq()).sqrt()
    }
}

impl TorusGrid {
    pub fn new(dim: usize, n_per_axis: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be in 1..={MAX_DIM}, got {dim}"
            )));
        }
        if n_per_axis < 2 || !n_per_axis.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 2, got {n_per_axis}"
            )));
        }
        let log2n = n_per_axis.trailing_zeros();
        let len = (0..dim)
            .try_fold(1usize, |acc, _| acc.checked_mul(n_per_axis))
            .filter(|&len| len <= isize::MAX as usize / std::mem::size_of::<[f64; 2]>())
            .ok_or_else(|| {
                Error::InvalidGrid(format!(
                    "{n_per_axis}^{dim} modes exceed the addressable range"
                ))
            })?;
        Ok(TorusGrid {
            dim,
            n: n_per_axis,
            log2n,
            len,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_per_axis(&self) -> usize {
        self.n
    }

    /// Total number of modes, `N^dim`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Frequency stored in per-axis slot `j`.
    #[inline]
    pub fn frequency(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Per-axis slot holding frequency `k`, if it belongs to the lattice.
    pub fn slot(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k < -half || k >= half {
            return None;
        }
        Some(if k >= 0 { k as usize } else { (k + self.n as i64) as usize })
    }

    /// Lattice point stored at flat index `idx`.
    #[inline]
    pub fn mode(&self, idx: usize) -> Mode {
        debug_assert!(idx < self.len);
        let mut k = [0i64; MAX_DIM];
        let mask = self.n - 1;
        let mut rest = idx;
        for axis in (0..self.dim).rev() {
            k[axis] = self.frequency(rest & mask);
            rest >>= self.log2n;
        }
        Mode { k, dim: self.dim }
    }

    /// Flat index of lattice point `k`, or `None` when `k` is off the lattice.
    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        k.iter()
            .try_fold(0usize, |acc, &kj| Some((acc << self.log2n) | self.slot(kj)?))
    }

    /// Grid spacing `2π/N`.
    pub fn spacing(&self) -> f64 {
        std::f64::consts::TAU / self.n as f64
    }

    /// `(2π)^{d/2}`: the factor between the coefficient l² norm and the L²
    /// norm on the torus.
    pub fn volume_sqrt(&self) -> f64 {
        std::f64::consts::TAU.powf(self.dim as f64 / 2.0)
    }
}
