//! Geometric phase of a charge qubit in a pair of coupled quantum dots whose
//! interdot coupling is switched by a lead-connected detector dot.
//!
//! The simulation pipeline is:
//!
//! 1. [`master_equation`] integrates the four-state master equation for the
//!    dot-plus-detector density matrix with fixed-step RK4.
//! 2. [`domain::EnvDensityState::reduce`] traces out the detector dot, giving
//!    the qubit's 2x2 density matrix.
//! 3. [`spectral`] eigendecomposes the reduced matrix with a deterministic
//!    gauge.
//! 4. [`phase`] accumulates the kinematic mixed-state geometric phase along
//!    the eigenvector path and detects its long-time saturation value.
//! 5. [`harness`] drives trajectory, phase-vs-time, and parameter-sweep
//!    experiments, exporting reproducible CSV plus a JSON metadata sidecar.
//!
//! All energies are measured in units of the base interdot coupling `s1`,
//! all times in `1/s1`.
//!
//! The numerics are generic over the floating-point scalar; `f64` aliases
//! are exported at the crate root.

pub mod domain;
pub mod harness;
pub mod master_equation;
pub mod oracle;
pub mod phase;
pub mod spectral;

use std::fmt;

use num_traits::{Float, FloatConst, NumAssign};

/// Floating-point scalar the whole crate is generic over (`f64`, `f32`).
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + NumAssign
        + fmt::Debug
        + fmt::Display
        + fmt::LowerExp
        + Send
        + Sync
        + 'static
{
}

/// Lift an `f64` constant into the working scalar type.
#[inline]
pub(crate) fn real<T: Real>(x: f64) -> T {
    T::from(x).expect("constant must be representable in the scalar type")
}

pub use domain::{
    BlochVector, EnvDensityState, PhaseSample, PhaseTrace, ReducedDensity, SpectralDecomp,
    SystemParams,
};
pub use master_equation::{integrate, rk4_step, IntegrateError, IntegratorConfig};
pub use phase::{accumulate, detect_cgp, full_phase, PhaseConfig, PhaseError, Saturation};
pub use spectral::{decompose, DegenerateState};

pub type SystemParams64 = SystemParams<f64>;
pub type EnvDensityState64 = EnvDensityState<f64>;
pub type ReducedDensity64 = ReducedDensity<f64>;
pub type BlochVector64 = BlochVector<f64>;
pub type SpectralDecomp64 = SpectralDecomp<f64>;
pub type PhaseTrace64 = PhaseTrace<f64>;
pub type IntegratorConfig64 = IntegratorConfig<f64>;
pub type PhaseConfig64 = PhaseConfig<f64>;
