//! Fourier pseudospectral solver for the periodic cubic nonlinear Schrödinger
//! equation `i u_t = -Δu - μ|u|²u` on the torus `[0, 2π)^d`, `d = 1..=5`,
//! with the filtered Lie splitting scheme, Bourgain-type norm diagnostics and
//! a convergence harness for rough initial data.
//!
//! Normalization of the spectral coefficients is documented in [`field`].

pub mod diagnostics;
pub mod error;
mod fft;
pub mod field;
pub mod filter;
pub mod grid;
pub mod harness;
pub mod initial;
pub mod integrators;
pub mod io;

pub use error::{Error, Result};
pub use field::{PhysicalField, SpectralField};
pub use filter::{FilterSpec, FreeFlow};
pub use grid::{Mode, TorusGrid, MAX_DIM};
pub use initial::{plane_wave, rough_data, RoughDataSpec};
pub use integrators::{
    evolve, lie_filtered_step, lie_standard_step, DealiasPolicy, LieStepper, NonlinearSign,
    StepperConfig, Trajectory,
};
