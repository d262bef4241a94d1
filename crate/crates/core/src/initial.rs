//! Initial data: random rough fields with a prescribed Sobolev regularity, and
//! single plane waves used as exact-solution seeds.
//!
//! Rough data has coefficients `<k>^{-(s + d/2 + eps)} g_k` with `g_k` drawn
//! uniformly from the square `[-1, 1] + i[-1, 1]`, then the whole field is
//! rescaled to a target L² norm.
//!
//! Randomness: `g_k` at flat index `i` comes from ChaCha8 seeded with
//! `seed_from_u64(seed)`, switched to stream `i`, drawing the real part then
//! the imaginary part with `rand`'s inclusive uniform `f64` sampler. Each mode
//! owns its stream, so the field does not depend on traversal order or
//! thread count.

use num_complex::Complex64;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::TorusGrid;

/// Default L² norm of generated data.
pub const DEFAULT_L2_TARGET: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoughDataSpec {
    /// Sobolev exponent.
    pub s: f64,
    /// Extra decay added to the exponent.
    #[serde(default)]
    pub eps: f64,
    pub seed: u64,
    #[serde(default = "default_target")]
    pub target_l2: f64,
    pub grid: TorusGrid,
}

fn default_target() -> f64 {
    DEFAULT_L2_TARGET
}

impl RoughDataSpec {
    pub fn new(grid: TorusGrid, s: f64, seed: u64) -> Self {
        RoughDataSpec {
            s,
            eps: 0.0,
            seed,
            target_l2: DEFAULT_L2_TARGET,
            grid,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_target_l2(mut self, target: f64) -> Self {
        self.target_l2 = target;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s.is_finite() && self.s >= 0.0) {
            return Err(Error::config(format!("s must be >= 0, got {}", self.s)));
        }
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return Err(Error::config(format!("eps must be >= 0, got {}", self.eps)));
        }
        if !(self.target_l2.is_finite() && self.target_l2 > 0.0) {
            return Err(Error::config(format!(
                "target L2 norm must be positive, got {}",
                self.target_l2
            )));
        }
        Ok(())
    }

    /// Decay exponent `s + d/2 + eps`.
    pub fn decay(&self) -> f64 {
        self.s + self.grid.dim() as f64 / 2.0 + self.eps
    }
}

/// Random `H^s` data normalized to `spec.target_l2`.
pub fn rough_data(spec: &RoughDataSpec) -> Result<SpectralField> {
    spec.validate()?;
    let base = ChaCha8Rng::seed_from_u64(spec.seed);
    let unit = Uniform::new_inclusive(-1.0, 1.0);
    let field = shaped_field(spec, |idx| {
        let mut rng = base.clone();
        rng.set_stream(idx as u64);
        let re = unit.sample(&mut rng);
        let im = unit.sample(&mut rng);
        Complex64::new(re, im)
    });
    normalize(field, spec.target_l2)
}

/// `<k>^{-decay} g(idx)` for every mode, before normalization.
pub(crate) fn shaped_field(
    spec: &RoughDataSpec,
    draw: impl Fn(usize) -> Complex64 + Sync,
) -> SpectralField {
    let grid = spec.grid;
    let decay = spec.decay();
    SpectralField::from_fn(grid, |mode| {
        let idx = grid
            .index_of(mode.as_slice())
            .expect("mode produced by the grid");
        draw(idx) * mode.bracket().powf(-decay)
    })
}

pub(crate) fn normalize(mut field: SpectralField, target: f64) -> Result<SpectralField> {
    let norm = field.l2_norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::Degenerate(format!(
            "cannot rescale a field of norm {norm}"
        )));
    }
    field.scale_in_place(target / norm);
    Ok(field)
}

/// `amplitude * e^{i<k,x>}`.
pub fn plane_wave(grid: TorusGrid, k: &[i64], amplitude: Complex64) -> Result<SpectralField> {
    let mut f = SpectralField::zeros(grid);
    f.set(k, amplitude)?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::fit_order;

    #[test]
    fn normalized_3d_data() {
        let grid = TorusGrid::new(3, 16).unwrap();
        let spec = RoughDataSpec::new(grid, 0.5, 42);
        let f = rough_data(&spec).unwrap();
        assert!((f.l2_norm() - 0.1).abs() <= 1e-14 * 0.1);
    }

    #[test]
    fn unit_draws_give_bracket_powers() {
        let grid = TorusGrid::new(1, 4).unwrap();
        let spec = RoughDataSpec::new(grid, 0.0, 0);
        let f = shaped_field(&spec, |_| Complex64::new(1.0, 0.0));
        // <k>^{-1/2} on {-2, -1, 0, 1}
        for (k, expected) in [(-2, 5f64.powf(-0.25)), (-1, 2f64.powf(-0.25)), (0, 1.0), (1, 2f64.powf(-0.25))] {
            let c = f.get(&[k]).unwrap();
            assert!((c.re - expected).abs() < 1e-15 && c.im == 0.0, "k={k}: {c}");
        }
    }

    #[test]
    fn same_seed_same_bits() {
        let grid = TorusGrid::new(2, 32).unwrap();
        let spec = RoughDataSpec::new(grid, 1.0, 9);
        let a = rough_data(&spec).unwrap();
        let b = rough_data(&spec).unwrap();
        assert_eq!(a, b);
        let c = rough_data(&RoughDataSpec { seed: 10, ..spec }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn independent_of_thread_count() {
        let grid = TorusGrid::new(2, 64).unwrap();
        let spec = RoughDataSpec::new(grid, 0.75, 5);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| rough_data(&spec).unwrap());
        assert_eq!(one, rough_data(&spec).unwrap());
    }

    #[test]
    fn spectral_decay_over_dyadic_shells() {
        let grid = TorusGrid::new(1, 1024).unwrap();
        for (s, eps, seed) in [(0.5, 0.0, 1u64), (1.0, 0.0, 2), (2.0, 0.1, 3)] {
            let spec = RoughDataSpec::new(grid, s, seed).with_eps(eps);
            let f = rough_data(&spec).unwrap();
            let mut samples = Vec::new();
            for j in 0..9 {
                let (lo, hi) = (1i64 << j, 1i64 << (j + 1));
                let shell: Vec<(f64, f64)> = (0..grid.len())
                    .map(|i| (grid.mode(i), f.coeffs()[i]))
                    .filter(|(m, _)| (lo..hi).contains(&m.as_slice()[0].abs()))
                    .map(|(m, c)| (m.bracket(), c.norm()))
                    .collect();
                let n = shell.len() as f64;
                let bracket = shell.iter().map(|p| p.0.ln()).sum::<f64>() / n;
                let amp = shell.iter().map(|p| p.1).sum::<f64>() / n;
                samples.push((bracket.exp(), amp));
            }
            let fit = fit_order(&samples).unwrap();
            let expected = -(s + 0.5 + eps);
            assert!((fit.slope - expected).abs() <= 0.2, "s={s}: slope {}", fit.slope);
        }
    }

    #[test]
    fn plane_wave_norm() {
        let grid = TorusGrid::new(3, 8).unwrap();
        let c = Complex64::new(0.3, -0.4);
        let f = plane_wave(grid, &[1, 0, 0], c).unwrap();
        assert!((f.l2_norm() - 0.5 * grid.volume_sqrt()).abs() < 1e-14);
        let phys = f.to_physical();
        assert!((phys.l2_norm() - 0.5 * grid.volume_sqrt()).abs() < 1e-13);

        let constant = plane_wave(grid, &[0, 0, 0], 0.1.into()).unwrap().to_physical();
        assert!(constant.values().iter().all(|v| (v - Complex64::new(0.1, 0.0)).norm() < 1e-15));
        assert!(plane_wave(grid, &[4, 0, 0], c).is_err());
    }

    #[test]
    fn rejects_invalid_spec() {
        let grid = TorusGrid::new(1, 8).unwrap();
        assert!(rough_data(&RoughDataSpec::new(grid, -0.1, 0)).is_err());
        assert!(rough_data(&RoughDataSpec::new(grid, 1.0, 0).with_target_l2(0.0)).is_err());
        assert!(normalize(SpectralField::zeros(grid), 1.0).is_err());
    }
}
