//! Norm diagnostics on discrete sequences and the parameter regime checker.

pub mod bourgain;
pub mod regime;

pub use bourgain::{
    discrete_bourgain_norm, lp_tau_norm, sobolev_norm, LpExponent, QuadraturePolicy,
    SequenceSample, Taper,
};
pub use regime::{dimension_row, regime_check, RegimeQuery, RegimeReport};
