//! One-step defect of the filtered scheme against the filtered-equation flow,
//! over a ladder of steps.
//!
//! The defect is measured in L². The analytical rate `1 + s/2` is stated for
//! a weaker space-time norm, so the L² slope is a proxy and is labelled as
//! such in the report.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::SpectralField;
use crate::grid::TorusGrid;
use crate::harness::convergence::FitStatus;
use crate::harness::fit::{fit_order, OrderFit};
use crate::harness::plan::{dyadic, LocalErrorPlan};
use crate::integrators::{
    local_error_probe, step_count, DealiasPolicy, LieStepper, ProbeConfig, StepperConfig,
};

pub const LOCAL_ERROR_SCHEMA: &str = "nls-local-error-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectSample {
    pub tau_log2: i32,
    pub tau: f64,
    /// Mean defect over the probe states.
    pub mean_defect: f64,
    pub defects: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalErrorCurve {
    pub s: f64,
    pub seed: u64,
    pub samples: Vec<DefectSample>,
    pub fit: Option<OrderFit>,
    pub fit_status: FitStatus,
    /// `1 + s/2`.
    pub theoretical_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalErrorReport {
    pub schema: String,
    pub version: String,
    /// Norm the defect is measured in.
    pub norm: String,
    /// The theoretical rate refers to a different norm than `norm`.
    pub proxy: bool,
    pub grid: TorusGrid,
    pub plan: LocalErrorPlan,
    pub curves: Vec<LocalErrorCurve>,
}

impl LocalErrorReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize to JSON")
    }

    /// `s,seed,tau,mean_defect`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,seed,tau,mean_defect\n");
        for c in &self.curves {
            for p in &c.samples {
                out.push_str(&format!("{},{},{:e},{:e}\n", c.s, c.seed, p.tau, p.mean_defect));
            }
        }
        out
    }
}

/// Probe states: the initial data evolved by unfiltered Lie splitting at the
/// plan's state step, sampled at `state_times`.
pub fn probe_states(plan: &LocalErrorPlan, u0: &SpectralField) -> Result<Vec<SpectralField>> {
    let dt = dyadic(plan.state_dt_log2);
    let cfg = StepperConfig::new(*u0.grid(), dt, plan.mu, false).with_dealias(DealiasPolicy::Off);
    let targets: Vec<u64> = plan
        .state_times
        .iter()
        .map(|&t| step_count(t, dt))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by_key(|&i| targets[i]);
    let stepper = LieStepper::from_config(&cfg)?;
    let mut state = u0.clone();
    let mut done = 0u64;
    let mut states = vec![None; targets.len()];
    for i in order {
        while done < targets[i] {
            stepper.advance(&mut state, done)?;
            done += 1;
        }
        states[i] = Some(state.clone());
    }
    Ok(states.into_iter().map(|s| s.expect("every target visited")).collect())
}

fn curve(plan: &LocalErrorPlan, grid: TorusGrid, s: f64, seed: u64) -> Result<LocalErrorCurve> {
    let u0 = plan.initial.build(grid, s, plan.eps, seed, plan.l2_target)?;
    let states = probe_states(plan, &u0)?;
    let probe = ProbeConfig {
        mu: plan.mu,
        fine_steps: plan.fine_steps,
        dealias: plan.dealias,
    };
    let samples = plan
        .tau_ladder_log2
        .par_iter()
        .map(|&k| {
            let tau = dyadic(k);
            let defects = states
                .iter()
                .map(|w| local_error_probe(w, tau, &probe))
                .collect::<Result<Vec<f64>>>()?;
            let mean_defect = defects.iter().sum::<f64>() / defects.len() as f64;
            Ok(DefectSample {
                tau_log2: k,
                tau,
                mean_defect,
                defects,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (fit, fit_status) = if samples.iter().all(|p| p.mean_defect == 0.0) {
        (
            None,
            FitStatus::Degenerate {
                reason: "every defect is zero".into(),
            },
        )
    } else {
        let pts: Vec<(f64, f64)> = samples.iter().map(|p| (p.tau, p.mean_defect)).collect();
        match fit_order(&pts) {
            Ok(f) => (Some(f), FitStatus::Fitted),
            Err(e) => (None, FitStatus::Degenerate { reason: e.to_string() }),
        }
    };
    Ok(LocalErrorCurve {
        s,
        seed,
        samples,
        fit,
        fit_status,
        theoretical_slope: 1.0 + s / 2.0,
    })
}

pub fn run_local_error(plan: &LocalErrorPlan) -> Result<LocalErrorReport> {
    let grid = plan.validate()?;
    let jobs: Vec<(f64, u64)> = plan
        .s
        .iter()
        .flat_map(|&s| plan.seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let curves = jobs
        .par_iter()
        .map(|&(s, seed)| curve(plan, grid, s, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalErrorReport {
        schema: LOCAL_ERROR_SCHEMA.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        norm: "L2".into(),
        proxy: true,
        grid,
        plan: plan.clone(),
        curves,
    })
}
