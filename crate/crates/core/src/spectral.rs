//! Eigendecomposition of the 2x2 reduced density matrix with a fixed gauge.
//!
//! The eigenvector phases are pinned deterministically: the first component
//! of `phi1` and the second component of `phi2` are real and nonnegative.
//! With that choice the overlap of `phi1(0)` with any later `phi1(t)` is real
//! and nonnegative whenever the evolution starts from a pure basis state,
//! which is what lets the phase accumulator work with a single running sum
//! of overlap arguments.
//!
//! Near-diagonal matrices are snapped to the diagonal eigenbasis: the closed
//! ratio form for the eigenvector components degenerates to 0/0 there even
//! though the limit exists.

use num_complex::Complex;
use thiserror::Error;

use crate::domain::{ReducedDensity, SpectralDecomp};
use crate::{real, Real};

/// Default eigenvalue-gap threshold below which eigenvectors are treated as
/// undefined: below RK4 drift scale, above double-precision noise.
pub const DEFAULT_EPS_DEGEN: f64 = 1e-8;

/// Coherence magnitude below which the matrix is treated as diagonal.
const DIAGONAL_SNAP: f64 = 1e-14;

/// The two eigenvalues are too close for the eigenvectors to mean anything;
/// the caller decides policy (abort, freeze, skip).
#[derive(Clone, Copy, Debug, Error, PartialEq)]
#[error("eigenvalue gap {gap} is below the degeneracy threshold {threshold}")]
pub struct DegenerateState<T: Real> {
    pub gap: T,
    pub threshold: T,
}

/// Eigenvalues `(omega1, omega2)`, ordered `omega1 >= omega2`,
/// `omega1 + omega2 = 1`.
pub fn eigenvalues<T: Real>(rho: &ReducedDensity<T>) -> (T, T) {
    let half = real::<T>(0.5);
    let g = eigenvalue_gap(rho);
    ((T::one() + g) * half, (T::one() - g) * half)
}

/// `omega1 - omega2`, which equals the Bloch-vector norm.
pub fn eigenvalue_gap<T: Real>(rho: &ReducedDensity<T>) -> T {
    let z = rho.r11 - rho.rho22();
    (z * z + real::<T>(4.0) * rho.r12.norm_sqr()).sqrt()
}

/// Gauge-fixed eigendecomposition.
///
/// Exactly diagonal input maps to the basis eigenvectors, ordered by which
/// population dominates. Fails with [`DegenerateState`] when the gap is
/// below `eps_degen`.
pub fn decompose<T: Real>(
    rho: &ReducedDensity<T>,
    eps_degen: T,
) -> Result<SpectralDecomp<T>, DegenerateState<T>> {
    let zero = T::zero();
    let one = T::one();
    let half = real::<T>(0.5);

    let z = rho.r11 - rho.rho22();
    let gap = eigenvalue_gap(rho);
    if gap < eps_degen {
        return Err(DegenerateState {
            gap,
            threshold: eps_degen,
        });
    }

    let omega1 = (one + gap) * half;
    let omega2 = (one - gap) * half;
    let czero = Complex::new(zero, zero);
    let cone = Complex::new(one, zero);

    if rho.r12.norm() < real(DIAGONAL_SNAP) {
        let (phi1, phi2) = if rho.r11 >= rho.rho22() {
            ([cone, czero], [czero, cone])
        } else {
            ([czero, cone], [cone, czero])
        };
        return Ok(SpectralDecomp {
            omega1,
            omega2,
            phi1,
            phi2,
        });
    }

    // d = omega1 - rho22 = (gap + z) / 2, rewritten cancellation-free for
    // z < 0; likewise omega2 - rho11 = -d.
    let d = if z >= zero {
        (gap + z) * half
    } else {
        real::<T>(2.0) * rho.r12.norm_sqr() / (gap - z)
    };

    let w1 = rho.r12.conj() / d;
    let n1 = one / (one + w1.norm_sqr()).sqrt();
    let phi1 = [Complex::new(n1, zero), w1 * n1];

    let w2 = -rho.r12 / d;
    let n2 = one / (one + w2.norm_sqr()).sqrt();
    let phi2 = [w2 * n2, Complex::new(n2, zero)];

    Ok(SpectralDecomp {
        omega1,
        omega2,
        phi1,
        phi2,
    })
}
