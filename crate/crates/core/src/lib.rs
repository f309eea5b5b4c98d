//! Simulation library for light-mediated atomic pair generation.
//!
//! Off-resonant Raman scattering into a slow cavity mode creates spin-flipped
//! atom pairs the way a parametric amplifier creates photon pairs. This crate
//! models that process as a two-mode open quantum system (dark polariton +
//! spin wave) through three mutually validating layers:
//!
//! * [`params`]: derived rates and closed-form predictions (variance
//!   evolution, optimal detuning, optimal interaction time);
//! * [`ideal`] and [`gaussian`]: the lossless closed forms and the exact
//!   covariance-matrix engine for the dissipative linear model;
//! * [`fock`]: a truncated number-basis master-equation oracle used to
//!   cross-validate the engine's drift and noise construction.

pub mod error;
pub mod fock;
pub mod gaussian;
pub mod ideal;
pub mod params;

pub use error::{Error, Result};
pub use fock::{compare_engine_oracle, oracle_evolve, ComparisonReport, FockSeries, FockState};
pub use gaussian::{
    build_model, evolve, excitations, minimal_variance, variances, GaussianState, LinearModel,
    Variances,
};
pub use ideal::{ideal_excitations, ideal_variances, state_coefficients, IdealSqueezedState};
pub use params::{
    derive_rates, predict_optimal_detuning, predict_optimal_time, predict_variance,
    regime_check, DerivedRates, OptimalDetuning, PhysicalParams, RegimeReport,
};
