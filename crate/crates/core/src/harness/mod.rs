//! Experiment plans, the global convergence and local error studies, and
//! order fitting.

pub mod convergence;
pub mod fit;
pub mod local_error;
pub mod plan;

pub use convergence::{run_convergence, ConvergenceReport};
pub use fit::{fit_order, OrderFit};
pub use local_error::{run_local_error, LocalErrorReport};
pub use plan::{ExperimentPlan, LocalErrorPlan};
