//! Global L² error at the final time over a ladder of steps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::regime::{regime_check, RegimeQuery};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::TorusGrid;
use crate::harness::fit::{fit_order, OrderFit};
use crate::harness::plan::{dyadic, ExperimentPlan};
use crate::integrators::{step_count, DealiasPolicy, LieStepper, StepperConfig};

pub const CONVERGENCE_SCHEMA: &str = "nls-convergence-report/1";

/// Errors below this multiple of the initial norm count as exact.
const EXACT_FAMILY_RTOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub tau_log2: i32,
    pub tau: f64,
    pub steps: u64,
    pub l2_error: f64,
    /// Largest per-step growth of the L² norm along the filtered run.
    pub max_mass_increase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum FitStatus {
    Fitted,
    Degenerate { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCheck {
    pub tau_half_log2: i32,
    /// `max_τ |e(τ) - e_half(τ)|`.
    pub max_change: f64,
    /// 5% of the error at the finest ladder step.
    pub threshold: f64,
    pub reference_limited: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceInfo {
    pub tau_log2: i32,
    pub steps: u64,
    /// `max_n |‖u_n‖ - ‖u_0‖|` along the reference run.
    pub mass_drift: f64,
    pub check: Option<ReferenceCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSummary {
    pub admissible: bool,
    pub case: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCurve {
    pub s: f64,
    pub seed: u64,
    pub initial_l2: f64,
    pub samples: Vec<ErrorSample>,
    pub fit: Option<OrderFit>,
    pub fit_status: FitStatus,
    /// `s/2`.
    pub theoretical_slope: f64,
    pub regime: RegimeSummary,
    pub reference: ReferenceInfo,
    /// Fraction of adjacent ladder pairs whose error does not grow as the
    /// step shrinks.
    pub monotone_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub schema: String,
    pub version: String,
    pub grid: TorusGrid,
    pub plan: ExperimentPlan,
    pub curves: Vec<ConvergenceCurve>,
}

impl ConvergenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize to JSON")
    }

    /// `s,seed,tau,l2_error`, one row per ladder point, in plan order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,seed,tau,l2_error\n");
        for c in &self.curves {
            for p in &c.samples {
                out.push_str(&format!("{},{},{:e},{:e}\n", c.s, c.seed, p.tau, p.l2_error));
            }
        }
        out
    }

    pub fn all_slopes(&self) -> Vec<Option<f64>> {
        self.curves.iter().map(|c| c.fit.map(|f| f.slope)).collect()
    }
}

struct RunResult {
    field: SpectralField,
    masses: Vec<f64>,
}

/// Runs `steps` steps, keeping only the final state and the mass history.
fn run(u0: &SpectralField, cfg: &StepperConfig, steps: u64) -> Result<RunResult> {
    let stepper = LieStepper::from_config(cfg)?;
    let mut state = u0.clone();
    stepper.project(&mut state);
    let mut masses = Vec::with_capacity(steps as usize + 1);
    masses.push(state.l2_norm());
    for n in 0..steps {
        stepper.advance(&mut state, n)?;
        masses.push(state.l2_norm());
    }
    if !state.is_finite() {
        return Err(Error::NumericalAbort {
            step: steps,
            reason: "non-finite coefficients in the final state".into(),
        });
    }
    Ok(RunResult {
        field: state,
        masses,
    })
}

fn max_increase(masses: &[f64]) -> f64 {
    masses
        .windows(2)
        .map(|w| w[1] - w[0])
        .reduce(f64::max)
        .unwrap_or(0.0)
}

fn reference_run(plan: &ExperimentPlan, grid: TorusGrid, u0: &SpectralField, log2: i32) -> Result<RunResult> {
    let tau = dyadic(log2);
    let cfg = StepperConfig::new(grid, tau, plan.mu, false).with_dealias(DealiasPolicy::Off);
    run(u0, &cfg, step_count(plan.t_final, tau)?)
}

fn curve(plan: &ExperimentPlan, grid: TorusGrid, s: f64, seed: u64) -> Result<ConvergenceCurve> {
    let u0 = plan.initial.build(grid, s, plan.eps, seed, plan.l2_target)?;
    let ref_log2 = plan.reference.tau_ref_log2;

    let ((reference, half), finals) = rayon::join(
        || {
            rayon::join(
                || reference_run(plan, grid, &u0, ref_log2),
                || {
                    plan.check_reference
                        .then(|| reference_run(plan, grid, &u0, ref_log2 - 1))
                        .transpose()
                },
            )
        },
        || {
            plan.tau_ladder_log2
                .par_iter()
                .map(|&k| {
                    let tau = dyadic(k);
                    let cfg = StepperConfig::new(grid, tau, plan.mu, true).with_dealias(plan.dealias);
                    let steps = step_count(plan.t_final, tau)?;
                    run(&u0, &cfg, steps).map(|r| (k, tau, steps, r))
                })
                .collect::<Result<Vec<_>>>()
        },
    );
    let reference = reference?;
    let half = half?;
    let finals = finals?;

    let mut samples = Vec::with_capacity(finals.len());
    for (k, tau, steps, r) in &finals {
        samples.push(ErrorSample {
            tau_log2: *k,
            tau: *tau,
            steps: *steps,
            l2_error: r.field.l2_distance(&reference.field)?,
            max_mass_increase: max_increase(&r.masses),
        });
    }

    let check = match &half {
        Some(h) => {
            let mut max_change: f64 = 0.0;
            for ((_, _, _, r), sample) in finals.iter().zip(&samples) {
                let e_half = r.field.l2_distance(&h.field)?;
                max_change = max_change.max((e_half - sample.l2_error).abs());
            }
            let finest = samples
                .iter()
                .min_by_key(|p| p.tau_log2)
                .expect("ladder is non-empty")
                .l2_error;
            let threshold = 0.05 * finest;
            Some(ReferenceCheck {
                tau_half_log2: ref_log2 - 1,
                max_change,
                threshold,
                reference_limited: max_change >= threshold,
            })
        }
        None => None,
    };
    let m0 = reference.masses[0];
    let mass_drift = reference
        .masses
        .iter()
        .map(|m| (m - m0).abs())
        .fold(0.0, f64::max);

    let initial_l2 = u0.l2_norm();
    let floor = EXACT_FAMILY_RTOL * initial_l2;
    let (fit, fit_status) = if samples.iter().all(|p| p.l2_error <= floor) {
        (
            None,
            FitStatus::Degenerate {
                reason: "exact family: every error is at reference accuracy".into(),
            },
        )
    } else {
        let pts: Vec<(f64, f64)> = samples.iter().map(|p| (p.tau, p.l2_error)).collect();
        match fit_order(&pts) {
            Ok(f) => (Some(f), FitStatus::Fitted),
            Err(e) => (None, FitStatus::Degenerate { reason: e.to_string() }),
        }
    };

    let mut by_tau: Vec<&ErrorSample> = samples.iter().collect();
    by_tau.sort_by_key(|p| std::cmp::Reverse(p.tau_log2));
    let pairs = by_tau.len().saturating_sub(1).max(1);
    let monotone = by_tau
        .windows(2)
        .filter(|w| w[1].l2_error <= w[0].l2_error)
        .count();

    let regime = regime_check(&RegimeQuery {
        dim: grid.dim(),
        s0: s,
        b0: None,
    })?;

    Ok(ConvergenceCurve {
        s,
        seed,
        initial_l2,
        samples,
        fit,
        fit_status,
        theoretical_slope: s / 2.0,
        regime: RegimeSummary {
            admissible: regime.admissible,
            case: regime.case,
        },
        reference: ReferenceInfo {
            tau_log2: ref_log2,
            steps: step_count(plan.t_final, dyadic(ref_log2))?,
            mass_drift,
            check,
        },
        monotone_fraction: monotone as f64 / pairs as f64,
    })
}

/// Runs every `(s, seed)` curve of the plan. Curves and ladder points run in
/// parallel; the report is assembled in plan order.
pub fn run_convergence(plan: &ExperimentPlan) -> Result<ConvergenceReport> {
    let grid = plan.validate()?;
    for &s in &plan.s {
        let r = regime_check(&RegimeQuery {
            dim: grid.dim(),
            s0: s,
            b0: None,
        })?;
        if !r.admissible {
            log::warn!(
                "s = {s} is outside the proven regime for d = {} (needs {} < s <= 2)",
                grid.dim(),
                r.s0_condition.lower
            );
        }
    }
    let jobs: Vec<(f64, u64)> = plan
        .s
        .iter()
        .flat_map(|&s| plan.seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let curves = jobs
        .par_iter()
        .map(|&(s, seed)| curve(plan, grid, s, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        schema: CONVERGENCE_SCHEMA.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        grid,
        plan: plan.clone(),
        curves,
    })
}
