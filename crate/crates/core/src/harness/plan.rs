//! Declarative experiment plans, read from TOML.
//!
//! Time steps are given as base-2 logarithms so every ladder is dyadic and
//! divides dyadic final times exactly.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::TorusGrid;
use crate::initial::{plane_wave, rough_data, RoughDataSpec, DEFAULT_L2_TARGET};
use crate::integrators::{step_count, DealiasPolicy, NonlinearSign, DEFAULT_FINE_STEPS};

/// Initial data family of a plan.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// Random rough data, one realization per `(s, seed)`.
    #[default]
    Rough,
    /// `amplitude * e^{i<mode,x>}`, ignoring `s` and the seed.
    PlaneWave { mode: Vec<i64>, amplitude: [f64; 2] },
    Zero,
}

impl InitialData {
    pub fn build(
        &self,
        grid: TorusGrid,
        s: f64,
        eps: f64,
        seed: u64,
        l2_target: f64,
    ) -> Result<SpectralField> {
        match self {
            InitialData::Rough => rough_data(
                &RoughDataSpec::new(grid, s, seed)
                    .with_eps(eps)
                    .with_target_l2(l2_target),
            ),
            InitialData::PlaneWave { mode, amplitude } => {
                plane_wave(grid, mode, Complex64::new(amplitude[0], amplitude[1]))
            }
            InitialData::Zero => Ok(SpectralField::zeros(grid)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceMethod {
    /// Unfiltered Lie splitting on the plan's grid.
    #[default]
    StandardLie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceRecipe {
    #[serde(default)]
    pub method: ReferenceMethod,
    pub tau_ref_log2: i32,
    /// Must equal the plan's `n_per_axis`: the reference runs on the same grid.
    pub n_ref_per_axis: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

fn default_l2() -> f64 {
    DEFAULT_L2_TARGET
}

fn default_warn() -> DealiasPolicy {
    DealiasPolicy::Warn
}

fn default_fine_steps() -> u32 {
    DEFAULT_FINE_STEPS
}

fn default_state_times() -> Vec<f64> {
    vec![0.0, 0.25, 0.5]
}

fn default_state_dt_log2() -> i32 {
    -14
}

/// Global-error study: filtered Lie over a ladder of steps against an
/// unfiltered fine-step reference, for every `(s, seed)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub dim: usize,
    pub n_per_axis: usize,
    pub s: Vec<f64>,
    pub mu: NonlinearSign,
    pub t_final: f64,
    pub tau_ladder_log2: Vec<i32>,
    pub reference: ReferenceRecipe,
    pub seeds: Vec<u64>,
    #[serde(default = "default_l2")]
    pub l2_target: f64,
    #[serde(default)]
    pub eps: f64,
    #[serde(default = "default_warn")]
    pub dealias: DealiasPolicy,
    #[serde(default)]
    pub initial: InitialData,
    /// Also run the reference at half its step and flag curves whose errors
    /// move by 5% or more of the finest-step error.
    #[serde(default)]
    pub check_reference: bool,
    #[serde(default)]
    pub output: OutputPaths,
}

/// Local-error study: one filtered step against the filtered-equation flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalErrorPlan {
    pub dim: usize,
    pub n_per_axis: usize,
    pub s: Vec<f64>,
    pub mu: NonlinearSign,
    pub tau_ladder_log2: Vec<i32>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_fine_steps")]
    pub fine_steps: u32,
    #[serde(default = "default_l2")]
    pub l2_target: f64,
    #[serde(default)]
    pub eps: f64,
    /// Times at which probe states are taken along an unfiltered run.
    #[serde(default = "default_state_times")]
    pub state_times: Vec<f64>,
    #[serde(default = "default_state_dt_log2")]
    pub state_dt_log2: i32,
    #[serde(default = "default_warn")]
    pub dealias: DealiasPolicy,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default)]
    pub output: OutputPaths,
}

pub fn dyadic(log2: i32) -> f64 {
    (log2 as f64).exp2()
}

fn check_common(dim: usize, n: usize, s: &[f64], seeds: &[u64], ladder: &[i32], l2: f64, eps: f64) -> Result<TorusGrid> {
    let grid = TorusGrid::new(dim, n)?;
    if s.is_empty() {
        return Err(Error::config("`s` must list at least one Sobolev exponent"));
    }
    if let Some(bad) = s.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::config(format!("`s` entries must be >= 0, got {bad}")));
    }
    if seeds.is_empty() {
        return Err(Error::config("`seeds` must not be empty"));
    }
    if ladder.len() < 4 {
        return Err(Error::config(format!(
            "`tau_ladder_log2` needs at least 4 steps for an order fit, got {}",
            ladder.len()
        )));
    }
    if let Some(bad) = ladder.iter().find(|&&k| !(-60..=0).contains(&k)) {
        return Err(Error::config(format!(
            "`tau_ladder_log2` entries must lie in -60..=0, got {bad}"
        )));
    }
    if !(l2.is_finite() && l2 > 0.0) {
        return Err(Error::config(format!("`l2_target` must be positive, got {l2}")));
    }
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::config(format!("`eps` must be >= 0, got {eps}")));
    }
    Ok(grid)
}

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    parse_toml(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn parse_toml<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

impl ExperimentPlan {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        parse_toml(text)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        read_toml(path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("plans serialize to TOML")
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.dim, self.n_per_axis)
    }

    pub fn taus(&self) -> Vec<f64> {
        self.tau_ladder_log2.iter().map(|&k| dyadic(k)).collect()
    }

    pub fn tau_ref(&self) -> f64 {
        dyadic(self.reference.tau_ref_log2)
    }

    pub fn validate(&self) -> Result<TorusGrid> {
        let grid = check_common(
            self.dim,
            self.n_per_axis,
            &self.s,
            &self.seeds,
            &self.tau_ladder_log2,
            self.l2_target,
            self.eps,
        )?;
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::config(format!("`t_final` must be positive, got {}", self.t_final)));
        }
        for &k in &self.tau_ladder_log2 {
            step_count(self.t_final, dyadic(k)).map_err(|_| {
                Error::config(format!("t_final = {} is not a multiple of 2^{k}", self.t_final))
            })?;
        }
        let finest = *self.tau_ladder_log2.iter().min().expect("ladder is non-empty");
        if self.reference.tau_ref_log2 > finest - 3 {
            return Err(Error::config(format!(
                "reference step 2^{} must be below a quarter of the finest ladder step 2^{finest}",
                self.reference.tau_ref_log2
            )));
        }
        if self.reference.n_ref_per_axis != self.n_per_axis {
            return Err(Error::config(format!(
                "reference.n_ref_per_axis = {} must equal n_per_axis = {} (the reference shares the grid)",
                self.reference.n_ref_per_axis, self.n_per_axis
            )));
        }
        if let InitialData::PlaneWave { mode, .. } = &self.initial {
            if grid.index_of(mode).is_none() {
                return Err(Error::config(format!("plane-wave mode {mode:?} is off the lattice")));
            }
        }
        Ok(grid)
    }

    /// Desk-scale one-dimensional study: `N = 2^10`, `s = 1`, `T = 1`,
    /// ladder `2^-6..2^-12`, reference `2^-16`, three seeds.
    pub fn desk_1d() -> Self {
        ExperimentPlan {
            dim: 1,
            n_per_axis: 1 << 10,
            s: vec![1.0],
            mu: NonlinearSign::Defocusing,
            t_final: 1.0,
            tau_ladder_log2: (6..=12).map(|k| -k).collect(),
            reference: ReferenceRecipe {
                method: ReferenceMethod::StandardLie,
                tau_ref_log2: -16,
                n_ref_per_axis: 1 << 10,
            },
            seeds: vec![1, 2, 3],
            l2_target: DEFAULT_L2_TARGET,
            eps: 0.0,
            dealias: DealiasPolicy::Warn,
            initial: InitialData::Rough,
            check_reference: false,
            output: OutputPaths::default(),
        }
    }

    /// Desk-scale three-dimensional study: `N = 2^5`, `s ∈ {1, 2}`, ladder
    /// `2^-5..2^-10`, reference `2^-14`.
    pub fn desk_3d() -> Self {
        ExperimentPlan {
            dim: 3,
            n_per_axis: 1 << 5,
            s: vec![1.0, 2.0],
            tau_ladder_log2: (5..=10).map(|k| -k).collect(),
            reference: ReferenceRecipe {
                method: ReferenceMethod::StandardLie,
                tau_ref_log2: -14,
                n_ref_per_axis: 1 << 5,
            },
            ..Self::desk_1d()
        }
    }
}

impl LocalErrorPlan {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        parse_toml(text)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        read_toml(path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("plans serialize to TOML")
    }

    pub fn taus(&self) -> Vec<f64> {
        self.tau_ladder_log2.iter().map(|&k| dyadic(k)).collect()
    }

    pub fn validate(&self) -> Result<TorusGrid> {
        let grid = check_common(
            self.dim,
            self.n_per_axis,
            &self.s,
            &self.seeds,
            &self.tau_ladder_log2,
            self.l2_target,
            self.eps,
        )?;
        if self.fine_steps < 16 {
            return Err(Error::config(format!("`fine_steps` must be >= 16, got {}", self.fine_steps)));
        }
        if self.state_times.is_empty() {
            return Err(Error::config("`state_times` must not be empty"));
        }
        let dt = dyadic(self.state_dt_log2);
        if dt > 1.0 {
            return Err(Error::config("`state_dt_log2` must be <= 0"));
        }
        for &t in &self.state_times {
            step_count(t, dt).map_err(|_| {
                Error::config(format!("state time {t} is not a multiple of 2^{}", self.state_dt_log2))
            })?;
        }
        if let InitialData::PlaneWave { mode, .. } = &self.initial {
            if grid.index_of(mode).is_none() {
                return Err(Error::config(format!("plane-wave mode {mode:?} is off the lattice")));
            }
        }
        Ok(grid)
    }

    /// One-dimensional defect study on `N = 2^10` over `2^-6..2^-11`.
    pub fn desk_1d() -> Self {
        LocalErrorPlan {
            dim: 1,
            n_per_axis: 1 << 10,
            s: vec![1.0, 2.0],
            mu: NonlinearSign::Defocusing,
            tau_ladder_log2: (6..=11).map(|k| -k).collect(),
            seeds: vec![1, 2, 3],
            fine_steps: DEFAULT_FINE_STEPS,
            l2_target: DEFAULT_L2_TARGET,
            eps: 0.0,
            state_times: default_state_times(),
            state_dt_log2: default_state_dt_log2(),
            dealias: DealiasPolicy::Warn,
            initial: InitialData::Rough,
            output: OutputPaths::default(),
        }
    }
}
