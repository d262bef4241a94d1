//! The frequency projector and the free Schrödinger flow. Both are diagonal
//! in the coefficient basis.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::TorusGrid;

/// Sharp cube cutoff induced by a time step: mode `k` survives iff
/// `|k_j| <= tau^{-1/2}` for every axis. The boundary of the cube is kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    tau: f64,
    cutoff: f64,
}

impl FilterSpec {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::config(format!("filter step must be positive, got {tau}")));
        }
        Ok(FilterSpec {
            tau,
            cutoff: 1.0 / tau.sqrt(),
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `K = tau^{-1/2}`.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    #[inline]
    pub fn keeps(&self, k: i64) -> bool {
        k.unsigned_abs() as f64 <= self.cutoff
    }

    /// Per-axis keep mask in slot order.
    pub(crate) fn axis_mask(&self, grid: &TorusGrid) -> Vec<bool> {
        (0..grid.n_per_axis())
            .map(|j| self.keeps(grid.frequency(j)))
            .collect()
    }

    /// 0/1 multiplier over the whole flat layout.
    pub(crate) fn indicator(&self, grid: &TorusGrid) -> Vec<f64> {
        let axis = self.axis_mask(grid);
        let n = grid.n_per_axis();
        (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let mut rest = idx;
                for _ in 0..grid.dim() {
                    if !axis[rest % n] {
                        return 0.0;
                    }
                    rest /= n;
                }
                1.0
            })
            .collect()
    }

    /// True when the cube covers the whole lattice, i.e. the projector is the
    /// identity on this grid.
    pub fn is_identity_on(&self, grid: &TorusGrid) -> bool {
        self.keeps(-(grid.n_per_axis() as i64 / 2))
    }
}

/// `Π_τ f`.
pub fn apply_projector(f: &SpectralField, spec: &FilterSpec) -> SpectralField {
    let mut out = f.clone();
    project_in_place(&mut out, spec);
    out
}

pub fn project_in_place(f: &mut SpectralField, spec: &FilterSpec) {
    if spec.is_identity_on(f.grid()) {
        return;
    }
    let grid = *f.grid();
    let mask = spec.indicator(&grid);
    f.coeffs_mut()
        .par_iter_mut()
        .zip(mask.par_iter())
        .for_each(|(c, &m)| {
            if m == 0.0 {
                *c = Complex64::default();
            }
        });
}

/// Diagonal multiplier `e^{-i t |k|^2}` of the free flow `e^{itΔ}`, cached
/// for repeated application with the same `t`.
#[derive(Debug, Clone)]
pub struct FreeFlow {
    grid: TorusGrid,
    t: f64,
    phases: Vec<Complex64>,
}

impl FreeFlow {
    pub fn new(grid: TorusGrid, t: f64) -> Self {
        let phases = (0..grid.len())
            .into_par_iter()
            .map(|i| Complex64::cis(-t * grid.mode(i).norm_sq()))
            .collect();
        FreeFlow { grid, t, phases }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub(crate) fn phases(&self) -> &[Complex64] {
        &self.phases
    }

    pub fn apply_in_place(&self, f: &mut SpectralField) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch(format!(
                "free flow built for {:?}, field on {:?}",
                self.grid,
                f.grid()
            )));
        }
        f.coeffs_mut()
            .par_iter_mut()
            .zip(self.phases.par_iter())
            .for_each(|(c, p)| *c *= p);
        Ok(())
    }
}

/// `e^{itΔ} f`.
pub fn free_flow(f: &SpectralField, t: f64) -> SpectralField {
    let mut out = f.clone();
    FreeFlow::new(*f.grid(), t)
        .apply_in_place(&mut out)
        .expect("flow built on the field's own grid");
    out
}
