//! Norms of time sequences of fields: `l^p_τ H^s` and the discrete Bourgain
//! norm `X^{s,b}_τ`.
//!
//! For a sequence `u_0, …, u_{M-1}` (zero outside) the time-space transform
//! is `ũ(σ, k) = τ Σ_m c_m(k) e^{imτσ}`, which is `2π/τ`-periodic in `σ`. The
//! Bourgain norm is
//!
//! ```text
//! ‖u‖²_{X^{s,b}_τ} = (2π)^d Σ_k <k>^{2s} (1/2π) ∫_0^{2π/τ} <d_τ(σ - |k|²)>^{2b} |ũ(σ, k)|² dσ
//! ```
//!
//! with `d_τ(σ) = (e^{iτσ} - 1)/τ`. The `1/2π` on the σ integral makes
//! `X^{0,0}_τ` coincide with `l²_τ L²`. The integral is evaluated with
//! `S` equispaced nodes `σ_j = 2πj/(τS)`; at these nodes `ũ` is a length-`S`
//! inverse DFT of the zero-padded sequence.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::field::{weighted_norm, SpectralField};
use crate::grid::TorusGrid;

/// Optional time taper applied to the sequence before transforming.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Taper {
    #[default]
    None,
    /// `w_m = sin²(π(m+1)/(M+1))`, vanishing just outside the sequence.
    Hann,
}

impl Taper {
    fn weight(self, m: usize, len: usize) -> f64 {
        match self {
            Taper::None => 1.0,
            Taper::Hann => (std::f64::consts::PI * (m + 1) as f64 / (len + 1) as f64)
                .sin()
                .powi(2),
        }
    }
}

impl std::str::FromStr for Taper {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Taper::None),
            "hann" => Ok(Taper::Hann),
            other => Err(Error::config(format!("unknown taper {other:?}"))),
        }
    }
}

/// A finite sequence of fields on a common grid, spaced `tau` apart in time.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSample {
    tau: f64,
    fields: Vec<SpectralField>,
    taper: Taper,
}

impl SequenceSample {
    pub fn new(tau: f64, fields: Vec<SpectralField>) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::config(format!("tau must be positive, got {tau}")));
        }
        let first = fields
            .first()
            .ok_or_else(|| Error::config("a sequence needs at least one field"))?;
        for f in &fields[1..] {
            first.check_same_grid(f)?;
        }
        Ok(SequenceSample {
            tau,
            fields,
            taper: Taper::None,
        })
    }

    pub fn with_taper(mut self, taper: Taper) -> Self {
        self.taper = taper;
        self
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    pub fn grid(&self) -> &TorusGrid {
        self.fields[0].grid()
    }

    pub fn taper(&self) -> Taper {
        self.taper
    }
}

/// `(Σ_k <k>^{2s} |c_k|²)^{1/2}` times `(2π)^{d/2}`. `s = 0` is the L² norm.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    if s == 0.0 {
        return f.l2_norm();
    }
    weighted_norm(f, |m| m.bracket().powf(s))
}

/// Exponent of an `l^p` norm, finite or infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinite,
}

impl std::str::FromStr for LpExponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "infinity" | "∞" => Ok(LpExponent::Infinite),
            other => other
                .parse::<f64>()
                .map(LpExponent::Finite)
                .map_err(|_| Error::config(format!("invalid exponent {other:?}"))),
        }
    }
}

/// `(τ Σ_n ‖u_n‖^p_{H^s})^{1/p}`, or `sup_n ‖u_n‖_{H^s}` for `p = ∞`.
pub fn lp_tau_norm(seq: &SequenceSample, p: LpExponent, s: f64) -> Result<f64> {
    let norms = seq.fields.iter().map(|f| sobolev_norm(f, s));
    match p {
        LpExponent::Infinite => Ok(norms.fold(0.0, f64::max)),
        LpExponent::Finite(p) if p.is_infinite() && p > 0.0 => Ok(norms.fold(0.0, f64::max)),
        LpExponent::Finite(p) if p >= 1.0 => {
            let sum: f64 = norms.map(|v| v.powf(p)).sum();
            Ok((seq.tau * sum).powf(1.0 / p))
        }
        LpExponent::Finite(p) => Err(Error::config(format!("p must be >= 1, got {p}"))),
    }
}

/// How many σ nodes the caller must supply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadraturePolicy {
    /// At least `2M` nodes. The uniform rule then integrates `|ũ|²`
    /// exactly, and the whole integrand for integer `b ∈ {0, 1}`.
    #[default]
    Exact,
    /// At least `M` nodes.
    Relaxed,
}

/// `<d_τ(x)>^{2b}` with `|d_τ(x)|² = 4 sin²(τx/2)/τ²`.
fn modulation_weight(tau: f64, x: f64, b: f64) -> f64 {
    let half = (0.5 * tau * x).sin();
    let d2 = 4.0 * half * half / (tau * tau);
    (1.0 + d2).powf(b)
}

/// Quadrature value of the discrete Bourgain norm `‖u‖_{X^{s,b}_τ}`.
pub fn discrete_bourgain_norm(
    seq: &SequenceSample,
    s: f64,
    b: f64,
    sigma_samples: usize,
    policy: QuadraturePolicy,
) -> Result<f64> {
    let m = seq.len();
    let needed = match policy {
        QuadraturePolicy::Exact => 2 * m,
        QuadraturePolicy::Relaxed => m,
    };
    if sigma_samples < needed {
        return Err(Error::config(format!(
            "{sigma_samples} sigma nodes are too few for a sequence of {m} fields (need {needed})"
        )));
    }
    if !(s.is_finite() && b.is_finite()) {
        return Err(Error::config("s and b must be finite"));
    }

    let grid = *seq.grid();
    let tau = seq.tau;
    let fft = fft::plan(sigma_samples, Direction::Inverse);
    let tapers: Vec<f64> = (0..m).map(|i| seq.taper.weight(i, m)).collect();
    let node = std::f64::consts::TAU / (tau * sigma_samples as f64);

    let per_mode: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || {
                (
                    vec![Complex64::default(); sigma_samples],
                    vec![Complex64::default(); fft.get_inplace_scratch_len()],
                )
            },
            |(buf, scratch), idx| {
                buf.iter_mut().for_each(|v| *v = Complex64::default());
                let mut any = false;
                for (slot, (f, w)) in buf.iter_mut().zip(seq.fields.iter().zip(&tapers)) {
                    *slot = f.coeffs()[idx] * *w;
                    any |= *slot != Complex64::default();
                }
                if !any {
                    return 0.0;
                }
                fft.process_with_scratch(buf, scratch);
                let mode = grid.mode(idx);
                let k2 = mode.norm_sq();
                let integral: f64 = buf
                    .iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let u_tilde = tau * *v;
                        modulation_weight(tau, j as f64 * node - k2, b) * u_tilde.norm_sqr()
                    })
                    .sum::<f64>()
                    / (tau * sigma_samples as f64);
                mode.bracket().powf(2.0 * s) * integral
            },
        )
        .collect();

    let total: f64 = per_mode.iter().sum();
    Ok(grid.volume_sqrt() * total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::{plane_wave, rough_data, RoughDataSpec};
    use proptest::prelude::*;

    fn random_sequence(grid: TorusGrid, len: usize, seed: u64, tau: f64) -> SequenceSample {
        let fields = (0..len)
            .map(|i| rough_data(&RoughDataSpec::new(grid, 0.5, seed + i as u64).with_target_l2(1.0)).unwrap())
            .collect();
        SequenceSample::new(tau, fields).unwrap()
    }

    #[test]
    fn sobolev_basics() {
        let grid = TorusGrid::new(3, 8).unwrap();
        let f = rough_data(&RoughDataSpec::new(grid, 1.0, 1)).unwrap();
        assert_eq!(sobolev_norm(&f, 0.0).to_bits(), f.l2_norm().to_bits());
        let w = plane_wave(grid, &[1, 0, 0], 1.0.into()).unwrap();
        let expected = 2f64.sqrt() * w.l2_norm();
        assert!((sobolev_norm(&w, 1.0) - expected).abs() < 1e-14);
        assert_eq!(sobolev_norm(&SpectralField::zeros(grid), 2.0), 0.0);
    }

    #[test]
    fn lp_examples() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let u = rough_data(&RoughDataSpec::new(grid, 1.0, 2)).unwrap();
        let h1 = sobolev_norm(&u, 1.0);
        let tau = 0.25;
        let one = SequenceSample::new(tau, vec![u.clone()]).unwrap();
        assert!((lp_tau_norm(&one, LpExponent::Finite(1.0), 1.0).unwrap() - tau * h1).abs() < 1e-15);
        let two = SequenceSample::new(tau, vec![u.clone(), u.clone()]).unwrap();
        let expected = (2.0 * tau).sqrt() * h1;
        assert!((lp_tau_norm(&two, LpExponent::Finite(2.0), 1.0).unwrap() - expected).abs() < 1e-15);
        let mixed = SequenceSample::new(tau, vec![u.clone(), u.scaled(3.0.into())]).unwrap();
        assert!((lp_tau_norm(&mixed, LpExponent::Infinite, 1.0).unwrap() - 3.0 * h1).abs() < 1e-14);
        assert!(lp_tau_norm(&one, LpExponent::Finite(0.5), 0.0).is_err());
    }

    #[test]
    fn sequence_validation() {
        let g1 = TorusGrid::new(1, 8).unwrap();
        let g2 = TorusGrid::new(1, 16).unwrap();
        assert!(SequenceSample::new(0.1, vec![]).is_err());
        assert!(SequenceSample::new(0.0, vec![SpectralField::zeros(g1)]).is_err());
        assert!(SequenceSample::new(0.1, vec![SpectralField::zeros(g1), SpectralField::zeros(g2)]).is_err());
    }

    #[test]
    fn zero_sequence_and_sample_count() {
        let grid = TorusGrid::new(2, 8).unwrap();
        let seq = SequenceSample::new(0.1, vec![SpectralField::zeros(grid); 3]).unwrap();
        assert_eq!(discrete_bourgain_norm(&seq, 1.0, 0.5, 6, QuadraturePolicy::Exact).unwrap(), 0.0);
        assert!(discrete_bourgain_norm(&seq, 1.0, 0.5, 5, QuadraturePolicy::Exact).is_err());
        assert!(discrete_bourgain_norm(&seq, 1.0, 0.5, 3, QuadraturePolicy::Relaxed).is_ok());
        assert!(discrete_bourgain_norm(&seq, 1.0, 0.5, 2, QuadraturePolicy::Relaxed).is_err());
    }

    #[test]
    fn zero_zero_matches_l2_tau() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let seq = random_sequence(grid, 5, 3, 0.1);
        let x = discrete_bourgain_norm(&seq, 0.0, 0.0, 10, QuadraturePolicy::Exact).unwrap();
        let l2 = lp_tau_norm(&seq, LpExponent::Finite(2.0), 0.0).unwrap();
        assert!((x - l2).abs() <= 1e-10 * l2);
    }

    #[test]
    fn single_plane_wave_closed_form() {
        // Oracle: one-dimensional σ quadrature of the weight alone on a very
        // fine uniform grid (spectrally accurate for a smooth periodic integrand).
        let grid = TorusGrid::new(1, 8).unwrap();
        let tau = 0.2;
        let k = [3i64];
        let seq = SequenceSample::new(tau, vec![plane_wave(grid, &k, 1.0.into()).unwrap()]).unwrap();
        for b in [-1.0, 0.0, 0.5, 1.0, 1.5] {
            let fine = 4096;
            let period = std::f64::consts::TAU / tau;
            let mean: f64 = (0..fine)
                .map(|j| {
                    let sigma = period * j as f64 / fine as f64;
                    let d = (Complex64::cis(tau * (sigma - 9.0)) - 1.0) / tau;
                    (1.0 + d.norm_sqr()).powf(b)
                })
                .sum::<f64>()
                / fine as f64;
            let expected = tau * (mean / tau).sqrt() * grid.volume_sqrt();
            let got = discrete_bourgain_norm(&seq, 0.0, b, 512, QuadraturePolicy::Exact).unwrap();
            assert!((got - expected).abs() <= 1e-10 * expected, "b={b}: {got} vs {expected}");
        }
    }

    #[test]
    fn node_doubling_is_exact_for_integer_b() {
        let grid = TorusGrid::new(1, 8).unwrap();
        let seq = random_sequence(grid, 6, 9, 0.05);
        for b in [0.0, 1.0] {
            let base = discrete_bourgain_norm(&seq, 0.5, b, 12, QuadraturePolicy::Exact).unwrap();
            let doubled = discrete_bourgain_norm(&seq, 0.5, b, 24, QuadraturePolicy::Exact).unwrap();
            assert!((base - doubled).abs() <= 1e-12 * base, "b={b}");
        }
    }

    #[test]
    fn hann_taper_shrinks_norm() {
        let grid = TorusGrid::new(1, 8).unwrap();
        let seq = random_sequence(grid, 6, 1, 0.1);
        let plain = discrete_bourgain_norm(&seq, 0.0, 0.0, 12, QuadraturePolicy::Exact).unwrap();
        let tapered = discrete_bourgain_norm(&seq.clone().with_taper(Taper::Hann), 0.0, 0.0, 12, QuadraturePolicy::Exact).unwrap();
        assert!(tapered < plain);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn monotone_in_s_and_b(seed in any::<u32>(), s in 0.0f64..2.0, ds in 0.0f64..1.0, b in -1.0f64..1.0, db in 0.0f64..1.0) {
            let grid = TorusGrid::new(1, 8).unwrap();
            let seq = random_sequence(grid, 4, seed as u64, 0.1);
            let base = discrete_bourgain_norm(&seq, s, b, 8, QuadraturePolicy::Exact).unwrap();
            let more_s = discrete_bourgain_norm(&seq, s + ds, b, 8, QuadraturePolicy::Exact).unwrap();
            let more_b = discrete_bourgain_norm(&seq, s, b + db, 8, QuadraturePolicy::Exact).unwrap();
            prop_assert!(more_s >= base * (1.0 - 1e-10));
            prop_assert!(more_b >= base * (1.0 - 1e-10));
        }

        #[test]
        fn homogeneous(seed in any::<u32>(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let grid = TorusGrid::new(1, 8).unwrap();
            let seq = random_sequence(grid, 3, seed as u64, 0.1);
            let lambda = Complex64::new(re, im);
            let scaled = SequenceSample::new(0.1, seq.fields().iter().map(|f| f.scaled(lambda)).collect()).unwrap();
            let a = discrete_bourgain_norm(&seq, 1.0, 0.5, 6, QuadraturePolicy::Exact).unwrap();
            let b = discrete_bourgain_norm(&scaled, 1.0, 0.5, 6, QuadraturePolicy::Exact).unwrap();
            prop_assert!((b - lambda.norm() * a).abs() <= 1e-12 * (1.0 + b));
            let p = lp_tau_norm(&seq, LpExponent::Finite(2.0), 0.5).unwrap();
            let q = lp_tau_norm(&scaled, LpExponent::Finite(2.0), 0.5).unwrap();
            prop_assert!((q - lambda.norm() * p).abs() <= 1e-12 * (1.0 + q));
        }
    }
}
