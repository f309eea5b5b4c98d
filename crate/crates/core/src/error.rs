//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Parameter set violates an invariant (non-finite value, wrong sign, ...).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Single-photon detuning of zero makes the adiabatic elimination singular.
    #[error("single-photon detuning must be nonzero")]
    ZeroDetuning,

    /// The control field cannot vanish: the polariton basis is undefined at omega2 = 0.
    #[error("control Rabi frequency omega2 must be nonzero")]
    ZeroControlField,

    /// g2^2 N = 0 leaves no collective coupling and eta = 0.
    #[error("collective coupling g2^2 N must be positive (eta = 0)")]
    ZeroEta,

    /// Squeezing coupling must be positive for closed-form predictions.
    #[error("pair coupling xi must be positive, got {0}")]
    NonPositiveXi(f64),

    /// No finite optimal interaction time exists for a lossless model.
    #[error("optimal time is unbounded: gamma_L + kappa/eta = 0")]
    UnboundedOptimalTime,

    /// Losses exceed the gain window: (gamma_L + kappa/eta)/(4 xi) >= 1.
    #[error("no squeezing window: (gamma_L + kappa/eta)/(4 xi) = {ratio} >= 1")]
    NoSqueezingWindow { ratio: f64 },

    /// Dissipation rates must be non-negative.
    #[error("negative rate rejected: {name} = {value}")]
    NegativeRate { name: &'static str, value: f64 },

    /// Fixed-step integrator asked to run above its stability bound.
    #[error("step size {dt} exceeds stability bound {bound} set by {binding}")]
    StepSize {
        binding: &'static str,
        bound: f64,
        dt: f64,
    },

    /// A mode occupation came out below -1e-9: the integration is corrupt.
    #[error("negative occupancy {value}: covariance integration corrupted")]
    NegativeOccupancy { value: f64 },

    /// Fock cutoff too small for the requested squeezing horizon.
    #[error("cutoff {cutoff} too small for expected occupation {expected:.3}; need at least {suggested}")]
    CutoffTooSmall {
        cutoff: usize,
        expected: f64,
        suggested: usize,
    },

    /// Density-matrix trace drifted beyond 1e-6 during oracle integration.
    #[error("density matrix trace drifted by {drift:e}")]
    TraceDrift { drift: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
