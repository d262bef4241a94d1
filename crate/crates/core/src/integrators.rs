//! Lie splitting for `i u_t = -Δu - μ|u|²u`, with and without the step-size
//! dependent frequency filter, plus a fine-step integrator for the filtered
//! equation used to measure one-step defects.
//!
//! One filtered step is
//!
//! ```text
//! u ↦ e^{iτΔ} Π_τ ( e^{iμτ|Π_τ u|²} Π_τ u )
//! ```
//!
//! with `|·|²` evaluated pointwise on the collocation grid. The unfiltered
//! step drops both projections.

use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::field::SpectralField;
use crate::filter::{FilterSpec, FreeFlow};
use crate::grid::TorusGrid;

/// Physical-space amplitude above which a run is declared blown up.
pub const BLOWUP_THRESHOLD: f64 = 1e6;

/// Default ratio `tau / fine_dt` for defect measurements.
pub const DEFAULT_FINE_STEPS: u32 = 64;

/// Sign `μ` of the cubic term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum NonlinearSign {
    /// `μ = +1`
    Focusing,
    /// `μ = -1`
    Defocusing,
}

impl NonlinearSign {
    pub fn value(self) -> f64 {
        match self {
            NonlinearSign::Focusing => 1.0,
            NonlinearSign::Defocusing => -1.0,
        }
    }
}

impl TryFrom<i8> for NonlinearSign {
    type Error = Error;
    fn try_from(v: i8) -> Result<Self> {
        match v {
            1 => Ok(NonlinearSign::Focusing),
            -1 => Ok(NonlinearSign::Defocusing),
            other => Err(Error::config(format!("mu must be +1 or -1, got {other}"))),
        }
    }
}

impl From<NonlinearSign> for i8 {
    fn from(s: NonlinearSign) -> i8 {
        s.value() as i8
    }
}

impl std::str::FromStr for NonlinearSign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "+1" => Ok(NonlinearSign::Focusing),
            "-1" => Ok(NonlinearSign::Defocusing),
            other => Err(Error::config(format!("mu must be +1 or -1, got {other:?}"))),
        }
    }
}

/// What to do when the grid is too coarse for alias-free evaluation of the
/// cubic term inside the filter band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DealiasPolicy {
    #[default]
    Strict,
    Warn,
    Off,
}

impl std::str::FromStr for DealiasPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(DealiasPolicy::Strict),
            "warn" => Ok(DealiasPolicy::Warn),
            "off" => Ok(DealiasPolicy::Off),
            other => Err(Error::config(format!(
                "dealias policy must be strict, warn or off, got {other:?}"
            ))),
        }
    }
}

/// `N/2 >= 2 ceil(tau^{-1/2})` on every axis.
pub fn check_dealias(grid: &TorusGrid, filter: &FilterSpec, policy: DealiasPolicy) -> Result<()> {
    let half_n = grid.n_per_axis() / 2;
    let required = 2 * filter.cutoff().ceil() as usize;
    if half_n >= required {
        return Ok(());
    }
    match policy {
        DealiasPolicy::Strict => Err(Error::Aliasing { half_n, required }),
        DealiasPolicy::Warn => {
            static SEEN: Mutex<Vec<(usize, usize)>> = Mutex::new(Vec::new());
            let mut seen = SEEN.lock().unwrap_or_else(|e| e.into_inner());
            if seen.contains(&(half_n, required)) {
                return Ok(());
            }
            seen.push((half_n, required));
            log::warn!(
                "cubic term aliases inside the filter band: N/2 = {half_n} < {required} (tau = {})",
                filter.tau()
            );
            Ok(())
        }
        DealiasPolicy::Off => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub tau: f64,
    pub mu: NonlinearSign,
    pub filtered: bool,
    pub grid: TorusGrid,
    #[serde(default)]
    pub dealias: DealiasPolicy,
}

impl StepperConfig {
    pub fn new(grid: TorusGrid, tau: f64, mu: NonlinearSign, filtered: bool) -> Self {
        StepperConfig {
            tau,
            mu,
            filtered,
            grid,
            dealias: DealiasPolicy::Strict,
        }
    }

    pub fn with_dealias(mut self, policy: DealiasPolicy) -> Self {
        self.dealias = policy;
        self
    }

    pub fn filter(&self) -> Result<Option<FilterSpec>> {
        self.filtered.then(|| FilterSpec::new(self.tau)).transpose()
    }

    fn check_step(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::config(format!(
                "time step must lie in (0, 1], got {}",
                self.tau
            )));
        }
        Ok(())
    }

    /// Checks `tau ∈ (0, 1]` and, for filtered runs, the dealias policy.
    pub fn validate(&self) -> Result<()> {
        self.check_step()?;
        if let Some(filter) = self.filter()? {
            check_dealias(&self.grid, &filter, self.dealias)?;
        }
        Ok(())
    }
}

/// A reusable one-step map with its multipliers precomputed.
#[derive(Debug, Clone)]
pub struct LieStepper {
    grid: TorusGrid,
    dt: f64,
    mu: f64,
    filter: Option<FilterSpec>,
    input_mask: Option<Vec<f64>>,
    /// Projection, free flow and the `1/N^d` of the forward transform, fused.
    output: Vec<Complex64>,
}

impl LieStepper {
    /// Step of size `dt` whose projector (if any) has its own cutoff. Passing
    /// `FilterSpec::new(dt)` gives the filtered scheme; a fixed coarser filter
    /// gives a discretization of the filtered equation.
    pub fn new(
        grid: TorusGrid,
        dt: f64,
        mu: NonlinearSign,
        filter: Option<FilterSpec>,
        policy: DealiasPolicy,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::config(format!("step size must be positive, got {dt}")));
        }
        if let Some(f) = &filter {
            check_dealias(&grid, f, policy)?;
        }
        let input_mask = filter
            .filter(|f| !f.is_identity_on(&grid))
            .map(|f| f.indicator(&grid));
        let flow = FreeFlow::new(grid, dt);
        let inv = 1.0 / grid.len() as f64;
        let output = match &input_mask {
            Some(mask) => flow
                .phases()
                .par_iter()
                .zip(mask.par_iter())
                .map(|(p, &m)| p * (m * inv))
                .collect(),
            None => flow.phases().par_iter().map(|p| p * inv).collect(),
        };
        Ok(LieStepper {
            grid,
            dt,
            mu: mu.value(),
            filter,
            input_mask,
            output,
        })
    }

    pub fn from_config(cfg: &StepperConfig) -> Result<Self> {
        cfg.check_step()?;
        LieStepper::new(cfg.grid, cfg.tau, cfg.mu, cfg.filter()?, cfg.dealias)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn filter(&self) -> Option<&FilterSpec> {
        self.filter.as_ref()
    }

    pub fn project(&self, field: &mut SpectralField) {
        if let Some(mask) = &self.input_mask {
            field
                .coeffs_mut()
                .par_iter_mut()
                .zip(mask.par_iter())
                .for_each(|(c, &m)| {
                    if m == 0.0 {
                        *c = Complex64::default();
                    }
                });
        }
    }

    pub fn step(&self, u: &SpectralField) -> Result<SpectralField> {
        let mut out = u.clone();
        self.advance(&mut out, 0)?;
        Ok(out)
    }

    /// Advances `field` by one step in place; `step` only labels errors.
    pub fn advance(&self, field: &mut SpectralField, step: u64) -> Result<()> {
        if *field.grid() != self.grid {
            return Err(Error::GridMismatch(format!(
                "stepper on {:?}, field on {:?}",
                self.grid,
                field.grid()
            )));
        }
        self.project(field);
        let grid = self.grid;
        let data = field.coeffs_mut();
        fft::transform(data, &grid, Direction::Inverse);

        let limit = BLOWUP_THRESHOLD * BLOWUP_THRESHOLD;
        if data.par_iter().any(|v| v.norm_sqr().is_nan() || v.norm_sqr() > limit) {
            let worst = data.iter().map(|v| v.norm()).fold(0.0, |a: f64, b| {
                if a.is_nan() || b.is_nan() {
                    f64::NAN
                } else {
                    a.max(b)
                }
            });
            return Err(Error::NumericalAbort {
                step,
                reason: format!("sup norm {worst:e} is non-finite or exceeds {BLOWUP_THRESHOLD:e}"),
            });
        }

        let phase = self.mu * self.dt;
        data.par_iter_mut()
            .for_each(|v| *v *= Complex64::cis(phase * v.norm_sqr()));
        fft::transform(data, &grid, Direction::Forward);
        data.par_iter_mut()
            .zip(self.output.par_iter())
            .for_each(|(c, m)| *c *= m);
        Ok(())
    }
}

/// One step of the filtered scheme. Requires `cfg.filtered`.
pub fn lie_filtered_step(u: &SpectralField, cfg: &StepperConfig) -> Result<SpectralField> {
    if !cfg.filtered {
        return Err(Error::config("lie_filtered_step needs a filtered configuration"));
    }
    LieStepper::from_config(cfg)?.step(u)
}

/// One step of plain Lie splitting. Requires `!cfg.filtered`.
pub fn lie_standard_step(u: &SpectralField, cfg: &StepperConfig) -> Result<SpectralField> {
    if cfg.filtered {
        return Err(Error::config("lie_standard_step needs an unfiltered configuration"));
    }
    LieStepper::from_config(cfg)?.step(u)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: u64,
    pub field: SpectralField,
}

/// Snapshots of a run. Times are `step * tau`; the step index is the source
/// of truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub config: StepperConfig,
    pub seed: Option<u64>,
    pub snapshots: Vec<Snapshot>,
    /// `‖u_n‖_{L²}` for every `n = 0..=n_steps`.
    pub masses: Vec<f64>,
}

impl Trajectory {
    pub fn time(&self, step: u64) -> f64 {
        step as f64 * self.config.tau
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory holds the initial snapshot")
    }

    pub fn n_steps(&self) -> u64 {
        self.masses.len() as u64 - 1
    }

    /// Largest `‖u_{n+1}‖ - ‖u_n‖` along the run (negative when mass strictly
    /// decreases at every step, zero for a run without steps).
    pub fn max_mass_increase(&self) -> f64 {
        self.masses
            .windows(2)
            .map(|w| w[1] - w[0])
            .reduce(f64::max)
            .unwrap_or(0.0)
    }
}

/// Runs `n_steps` steps from `u0` (projected first when filtered), keeping
/// every `stride`-th state and the final one.
pub fn evolve(
    u0: &SpectralField,
    cfg: &StepperConfig,
    n_steps: u64,
    stride: u64,
) -> Result<Trajectory> {
    if stride == 0 {
        return Err(Error::config("snapshot stride must be >= 1"));
    }
    let stepper = LieStepper::from_config(cfg)?;
    let mut state = u0.clone();
    stepper.project(&mut state);
    let mut snapshots = vec![Snapshot {
        step: 0,
        field: state.clone(),
    }];
    let mut masses = Vec::with_capacity(n_steps as usize + 1);
    masses.push(state.l2_norm());
    for n in 1..=n_steps {
        stepper.advance(&mut state, n - 1)?;
        masses.push(state.l2_norm());
        if n % stride == 0 || n == n_steps {
            snapshots.push(Snapshot {
                step: n,
                field: state.clone(),
            });
        }
    }
    if !state.is_finite() {
        return Err(Error::NumericalAbort {
            step: n_steps,
            reason: "non-finite coefficients in the final state".into(),
        });
    }
    Ok(Trajectory {
        config: *cfg,
        seed: None,
        snapshots,
        masses,
    })
}

/// Number of steps of size `dt` that cover `t_end`, rejecting ratios that are
/// not integral up to rounding.
pub fn step_count(t_end: f64, dt: f64) -> Result<u64> {
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::config(format!("final time must be >= 0, got {t_end}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::config(format!("step size must be positive, got {dt}")));
    }
    let ratio = t_end / dt;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::config(format!(
            "step {dt} does not divide final time {t_end}"
        )));
    }
    Ok(n as u64)
}

/// Approximates the filtered-equation flow `u^τ(t_end)` from `u0`:
/// Lie steps of size `fine_dt` with the projector frozen at
/// `tau_filter^{-1/2}`.
pub fn filtered_equation_reference(
    u0: &SpectralField,
    tau_filter: f64,
    t_end: f64,
    fine_dt: f64,
    mu: NonlinearSign,
    dealias: DealiasPolicy,
) -> Result<SpectralField> {
    let filter = FilterSpec::new(tau_filter)?;
    if fine_dt > tau_filter / 16.0 * (1.0 + 1e-12) {
        return Err(Error::config(format!(
            "fine step {fine_dt} must be at most tau_filter/16 = {}",
            tau_filter / 16.0
        )));
    }
    let n = step_count(t_end, fine_dt)?;
    let stepper = LieStepper::new(*u0.grid(), fine_dt, mu, Some(filter), dealias)?;
    let mut state = u0.clone();
    stepper.project(&mut state);
    for step in 0..n {
        stepper.advance(&mut state, step)?;
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub mu: NonlinearSign,
    /// `tau / fine_dt` for the reference flow.
    pub fine_steps: u32,
    pub dealias: DealiasPolicy,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            mu: NonlinearSign::Defocusing,
            fine_steps: DEFAULT_FINE_STEPS,
            dealias: DealiasPolicy::Warn,
        }
    }
}

/// `‖Ψ^τ(w) - u^τ_w(τ)‖_{L²}` for `w = Π_τ u0`: the defect of one filtered
/// step against the filtered-equation flow from the same band-limited state.
pub fn local_error_probe(u0: &SpectralField, tau: f64, cfg: &ProbeConfig) -> Result<f64> {
    if cfg.fine_steps < 16 {
        return Err(Error::config(format!(
            "fine_steps must be >= 16, got {}",
            cfg.fine_steps
        )));
    }
    let step_cfg = StepperConfig::new(*u0.grid(), tau, cfg.mu, true).with_dealias(cfg.dealias);
    let stepper = LieStepper::from_config(&step_cfg)?;
    let mut w = u0.clone();
    stepper.project(&mut w);
    let one_step = stepper.step(&w)?;
    let fine_dt = tau / cfg.fine_steps as f64;
    let reference = filtered_equation_reference(&w, tau, tau, fine_dt, cfg.mu, cfg.dealias)?;
    one_step.l2_distance(&reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::apply_projector;
    use crate::initial::{plane_wave, rough_data, RoughDataSpec};
    use proptest::prelude::*;

    /// `c e^{i<k,x> - i(|k|² - μ|c|²)t}` at mode `k`.
    fn exact_plane_wave(c: Complex64, k: &[i64], mu: f64, t: f64) -> Complex64 {
        let k2: f64 = k.iter().map(|&v| (v * v) as f64).sum();
        c * Complex64::cis(-(k2 - mu * c.norm_sqr()) * t)
    }

    fn cfg(grid: TorusGrid, tau: f64, filtered: bool) -> StepperConfig {
        StepperConfig::new(grid, tau, NonlinearSign::Defocusing, filtered)
            .with_dealias(DealiasPolicy::Warn)
    }

    #[test]
    fn zero_stays_zero() {
        let grid = TorusGrid::new(2, 16).unwrap();
        let z = SpectralField::zeros(grid);
        assert_eq!(lie_filtered_step(&z, &cfg(grid, 0.1, true)).unwrap(), z);
        assert_eq!(lie_standard_step(&z, &cfg(grid, 0.1, false)).unwrap(), z);
        let probe = local_error_probe(&z, 0.01, &ProbeConfig::default()).unwrap();
        assert_eq!(probe, 0.0);
    }

    #[test]
    fn out_of_band_wave_is_annihilated() {
        let grid = TorusGrid::new(1, 64).unwrap();
        let u = plane_wave(grid, &[12], Complex64::new(0.5, 0.0)).unwrap();
        let out = lie_filtered_step(&u, &cfg(grid, 0.01, true)).unwrap();
        assert!(out.coeffs().iter().all(|c| *c == Complex64::default()));
    }

    #[test]
    fn plane_wave_one_step_is_exact() {
        let grid = TorusGrid::new(3, 16).unwrap();
        let c = Complex64::new(0.3, -0.7);
        let k = [2, -1, 3];
        for (filtered, mu) in [(true, NonlinearSign::Defocusing), (false, NonlinearSign::Focusing)] {
            let config = StepperConfig::new(grid, 0.05, mu, filtered).with_dealias(DealiasPolicy::Off);
            let u = plane_wave(grid, &k, c).unwrap();
            let out = LieStepper::from_config(&config).unwrap().step(&u).unwrap();
            let expected = plane_wave(grid, &k, exact_plane_wave(c, &k, mu.value(), 0.05)).unwrap();
            assert!(out.l2_distance(&expected).unwrap() <= 1e-12 * u.l2_norm());
        }
    }

    #[test]
    fn plane_wave_hundred_steps() {
        let grid = TorusGrid::new(1, 32).unwrap();
        let c = Complex64::new(0.8, 0.1);
        let tau = 1.0 / 128.0;
        let u = plane_wave(grid, &[3], c).unwrap();
        let traj = evolve(&u, &cfg(grid, tau, true), 100, 10).unwrap();
        assert_eq!(traj.snapshots.len(), 11);
        let exact = plane_wave(grid, &[3], exact_plane_wave(c, &[3], -1.0, 100.0 * tau)).unwrap();
        assert!(traj.last().field.l2_distance(&exact).unwrap() <= 1e-10);
    }

    #[test]
    fn zero_steps_returns_projected_input() {
        let grid = TorusGrid::new(1, 64).unwrap();
        let u = rough_data(&RoughDataSpec::new(grid, 1.0, 3)).unwrap();
        let filtered = evolve(&u, &cfg(grid, 0.01, true), 0, 1).unwrap();
        assert_eq!(filtered.snapshots.len(), 1);
        assert_eq!(filtered.last().field, apply_projector(&u, &FilterSpec::new(0.01).unwrap()));
        let plain = evolve(&u, &cfg(grid, 0.01, false), 0, 1).unwrap();
        assert_eq!(plain.last().field, u);
    }

    #[test]
    fn filtered_output_has_no_out_of_band_modes() {
        let grid = TorusGrid::new(2, 32).unwrap();
        let u = rough_data(&RoughDataSpec::new(grid, 0.5, 11).with_target_l2(2.0)).unwrap();
        let tau = 1.0 / 50.0;
        let out = lie_filtered_step(&u, &cfg(grid, tau, true)).unwrap();
        let filter = FilterSpec::new(tau).unwrap();
        for (i, c) in out.coeffs().iter().enumerate() {
            if grid.mode(i).as_slice().iter().any(|&k| !filter.keeps(k)) {
                assert_eq!(*c, Complex64::default());
            }
        }
    }

    #[test]
    fn filtered_mass_is_non_increasing() {
        let grid = TorusGrid::new(1, 128).unwrap();
        let u = rough_data(&RoughDataSpec::new(grid, 0.5, 2).with_target_l2(3.0)).unwrap();
        let traj = evolve(&u, &cfg(grid, 1.0 / 64.0, true), 200, 200).unwrap();
        assert!(traj.max_mass_increase() <= 1e-12);
    }

    #[test]
    fn standard_step_conserves_mass() {
        let grid = TorusGrid::new(1, 256).unwrap();
        let u = rough_data(&RoughDataSpec::new(grid, 0.0, 4).with_target_l2(2.0)).unwrap();
        let traj = evolve(&u, &cfg(grid, 1e-3, false), 500, 500).unwrap();
        let m0 = traj.masses[0];
        assert!(traj.masses.iter().all(|m| (m - m0).abs() <= 1e-12 * m0));
    }

    #[test]
    fn blowup_guard_aborts() {
        let grid = TorusGrid::new(1, 8).unwrap();
        let u = plane_wave(grid, &[0], Complex64::new(2e6, 0.0)).unwrap();
        let err = evolve(&u, &cfg(grid, 0.1, false), 3, 1).unwrap_err();
        assert!(err.is_numerical());
        let mut nan = SpectralField::zeros(grid);
        nan.coeffs_mut()[1] = Complex64::new(f64::NAN, 0.0);
        assert!(lie_standard_step(&nan, &cfg(grid, 0.1, false)).unwrap_err().is_numerical());
    }

    #[test]
    fn strict_policy_rejects_coarse_grids() {
        let grid = TorusGrid::new(1, 32).unwrap();
        let strict = StepperConfig::new(grid, 1.0 / 64.0, NonlinearSign::Defocusing, true);
        assert!(strict.validate().is_ok());
        let too_fine = StepperConfig::new(grid, 1.0 / 100.0, NonlinearSign::Defocusing, true);
        assert!(matches!(too_fine.validate(), Err(Error::Aliasing { half_n: 16, required: 20 })));
        assert!(too_fine.with_dealias(DealiasPolicy::Warn).validate().is_ok());
        // unfiltered runs have no band to protect
        assert!(StepperConfig::new(grid, 1e-4, NonlinearSign::Defocusing, false).validate().is_ok());
    }

    #[test]
    fn config_and_precondition_errors() {
        let grid = TorusGrid::new(1, 32).unwrap();
        let u = SpectralField::zeros(grid);
        assert!(lie_filtered_step(&u, &cfg(grid, 0.1, false)).is_err());
        assert!(lie_standard_step(&u, &cfg(grid, 0.1, true)).is_err());
        assert!(cfg(grid, 1.5, false).validate().is_err());
        assert!(cfg(grid, 0.0, false).validate().is_err());
        assert!(evolve(&u, &cfg(grid, 0.1, false), 1, 0).is_err());
        assert!(step_count(1.0, 0.3).is_err());
        assert_eq!(step_count(1.0, 0.001).unwrap(), 1000);
        assert!(filtered_equation_reference(&u, 0.1, 0.1, 0.1 / 8.0, NonlinearSign::Defocusing, DealiasPolicy::Warn).is_err());
    }

    #[test]
    fn reference_plane_wave_and_zero_time() {
        let grid = TorusGrid::new(1, 32).unwrap();
        let c = Complex64::new(0.4, 0.2);
        let u = plane_wave(grid, &[2], c).unwrap();
        let tau = 1.0 / 16.0;
        let exact = plane_wave(grid, &[2], exact_plane_wave(c, &[2], -1.0, tau)).unwrap();
        for fine in [tau / 16.0, tau / 64.0] {
            let r = filtered_equation_reference(&u, tau, tau, fine, NonlinearSign::Defocusing, DealiasPolicy::Warn).unwrap();
            assert!(r.l2_distance(&exact).unwrap() <= 1e-12);
        }
        let rough = rough_data(&RoughDataSpec::new(grid, 1.0, 1)).unwrap();
        let r0 = filtered_equation_reference(&rough, tau, 0.0, tau / 16.0, NonlinearSign::Defocusing, DealiasPolicy::Warn).unwrap();
        assert_eq!(r0, apply_projector(&rough, &FilterSpec::new(tau).unwrap()));
        let probe = local_error_probe(&u, tau, &ProbeConfig::default()).unwrap();
        assert!(probe <= 1e-12, "{probe}");
    }

    #[test]
    fn reference_self_converges_at_first_order() {
        let grid = TorusGrid::new(1, 128).unwrap();
        let u = rough_data(&RoughDataSpec::new(grid, 1.0, 8).with_target_l2(2.0)).unwrap();
        let tau = 1.0 / 64.0;
        let run = |fine: f64| {
            filtered_equation_reference(&u, tau, tau, fine, NonlinearSign::Defocusing, DealiasPolicy::Warn).unwrap()
        };
        let (a, b, c) = (run(tau / 16.0), run(tau / 32.0), run(tau / 64.0));
        let ratio = a.l2_distance(&b).unwrap() / b.l2_distance(&c).unwrap();
        assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let grid = TorusGrid::new(3, 16).unwrap();
        let u = rough_data(&RoughDataSpec::new(grid, 1.0, 21).with_target_l2(1.0)).unwrap();
        let config = cfg(grid, 1.0 / 32.0, true);
        let run = || evolve(&u, &config, 20, 5).unwrap();
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(run);
        assert_eq!(single, many);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn gauge_covariance(seed in any::<u64>(), theta in 0.0f64..6.3, filtered in any::<bool>()) {
            let grid = TorusGrid::new(2, 16).unwrap();
            let u = rough_data(&RoughDataSpec::new(grid, 0.5, seed).with_target_l2(1.5)).unwrap();
            let config = cfg(grid, 1.0 / 16.0, filtered);
            let rot = Complex64::cis(theta);
            let stepper = LieStepper::from_config(&config).unwrap();
            let a = stepper.step(&u.scaled(rot)).unwrap();
            let b = stepper.step(&u).unwrap().scaled(rot);
            prop_assert!(a.l2_distance(&b).unwrap() <= 1e-12 * u.l2_norm());
        }
    }
}
