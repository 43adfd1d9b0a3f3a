//! Value types shared by every stage of the pipeline.
//!
//! The environment density matrix is block diagonal in the pairs of basis
//! states `{|1>,|3>}` and `{|2>,|4>}` (detector dot empty / occupied), so
//! only six independent elements exist: four real populations and the two
//! coherences `c13`, `c24`. Their mirror elements are never stored; they are
//! recovered by conjugation, which makes Hermiticity structural.

use num_complex::Complex;
use thiserror::Error;

use crate::{real, Real};

/// Physical rates and energies. Energies are in units of `s1`, times in
/// `1/s1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams<T> {
    /// Tunneling rate from the left lead onto the detector dot.
    pub gamma_l: T,
    /// Tunneling rate from the detector dot into the right lead.
    pub gamma_r: T,
    /// Interdot coupling with the detector dot empty (the base unit).
    pub s1: T,
    /// Interdot coupling with the detector dot occupied.
    pub s2: T,
    /// Qubit detuning, the energy of dot 1 minus the energy of dot 2.
    pub eps0: T,
}

#[derive(Clone, Copy, Debug, Error, PartialEq)]
pub enum ParamsError<T: Real> {
    #[error("tunneling rate {name} = {value} must be nonnegative")]
    NegativeRate { name: &'static str, value: T },
    #[error("base coupling s1 = {value} must be positive (it is the unit of energy)")]
    NonpositiveBaseCoupling { value: T },
}

impl<T: Real> SystemParams<T> {
    /// Check the physical-range constraints. Called at interface boundaries
    /// (CLI, sweep points); the integrator itself only needs the stability
    /// guard.
    pub fn validate(&self) -> Result<(), ParamsError<T>> {
        if self.gamma_l < T::zero() {
            return Err(ParamsError::NegativeRate {
                name: "gamma_l",
                value: self.gamma_l,
            });
        }
        if self.gamma_r < T::zero() {
            return Err(ParamsError::NegativeRate {
                name: "gamma_r",
                value: self.gamma_r,
            });
        }
        if self.s1 <= T::zero() {
            return Err(ParamsError::NonpositiveBaseCoupling { value: self.s1 });
        }
        Ok(())
    }
}

/// The six independent elements of the dot-plus-detector density matrix.
///
/// Basis: `|1> = |1,0,0>`, `|2> = |1,0,1>`, `|3> = |0,1,0>`, `|4> = |0,1,1>`
/// with occupation numbers ordered (dot 1, dot 2, detector dot).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvDensityState<T> {
    pub p11: T,
    pub p22: T,
    pub p33: T,
    pub p44: T,
    /// Coherence between `|1>` and `|3>`; the `(3,1)` element is its conjugate.
    pub c13: Complex<T>,
    /// Coherence between `|2>` and `|4>`; the `(4,2)` element is its conjugate.
    pub c24: Complex<T>,
}

impl<T: Real> EnvDensityState<T> {
    /// Electron in dot 1, detector dot empty: the canonical starting state.
    pub fn electron_in_dot1() -> Self {
        Self {
            p11: T::one(),
            p22: T::zero(),
            p33: T::zero(),
            p44: T::zero(),
            c13: Complex::new(T::zero(), T::zero()),
            c24: Complex::new(T::zero(), T::zero()),
        }
    }

    pub fn trace(&self) -> T {
        self.p11 + self.p22 + self.p33 + self.p44
    }

    /// `|trace - 1|`, the conserved-quantity drift of an evolved state.
    pub fn trace_error(&self) -> T {
        (self.trace() - T::one()).abs()
    }

    /// Trace out the detector dot: populations of `|1>` and `|2>` both mean
    /// "electron in dot 1", and the two coherences add.
    pub fn reduce(&self) -> ReducedDensity<T> {
        ReducedDensity {
            r11: self.p11 + self.p22,
            r12: self.c13 + self.c24,
        }
    }
}

/// The qubit's 2x2 density matrix. Unit trace is built in: only `r11` and
/// the upper coherence are stored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedDensity<T> {
    /// Population of "electron in dot 1".
    pub r11: T,
    /// Coherence `rho_{12}`; `rho_{21}` is its conjugate.
    pub r12: Complex<T>,
}

impl<T: Real> ReducedDensity<T> {
    pub fn rho22(&self) -> T {
        T::one() - self.r11
    }

    /// Cartesian Bloch coordinates: `x = 2 Re r12`, `y = -2 Im r12`,
    /// `z = 2 r11 - 1`.
    pub fn to_bloch(&self) -> BlochVector<T> {
        let two = real::<T>(2.0);
        BlochVector {
            x: two * self.r12.re,
            y: -two * self.r12.im,
            z: two * self.r11 - T::one(),
        }
    }
}

/// Real 3-vector picture of a qubit state: pure states on the unit sphere,
/// mixed states inside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> BlochVector<T> {
    pub fn norm(&self) -> T {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Ordered eigensystem of a reduced density matrix, `omega1 >= omega2`,
/// with the gauge fixed by [`crate::spectral::decompose`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralDecomp<T> {
    pub omega1: T,
    pub omega2: T,
    pub phi1: [Complex<T>; 2],
    pub phi2: [Complex<T>; 2],
}

impl<T: Real> SpectralDecomp<T> {
    pub fn gap(&self) -> T {
        self.omega1 - self.omega2
    }
}

/// One record of the phase-accumulation output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSample<T> {
    /// Time in units of `1/s1`.
    pub t: T,
    pub bloch: BlochVector<T>,
    /// Larger eigenvalue of the reduced density matrix.
    pub omega1: T,
    /// Accumulated geometric phase in radians, unwrapped (no 2-pi reduction).
    pub gamma: T,
}

/// Time series produced by [`crate::phase::accumulate`]: strictly increasing
/// times starting at 0, with `gamma(0) = 0`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PhaseTrace<T> {
    pub samples: Vec<PhaseSample<T>>,
}

impl<T: Real> PhaseTrace<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Final accumulated phase, `0` for an empty trace.
    pub fn final_gamma(&self) -> T {
        self.samples.last().map_or(T::zero(), |s| s.gamma)
    }
}
