//! Accumulation of the kinematic mixed-state geometric phase along a
//! trajectory, plus saturation detection.
//!
//! Two evaluators are provided:
//!
//! * [`accumulate`] is the running, unwrapped phase for trajectories that
//!   start in a pure state, where only the dominant eigenvector carries
//!   weight. Each step adds `-Arg <phi1(t_i)|phi1(t_{i+1})>`, the discrete
//!   form of `i * integral of <phi1|d/dt phi1>`. Arg-of-overlap increments
//!   are gauge-consistent per step, unlike a finite-difference derivative of
//!   eigenvectors, which amplifies noise near small gaps.
//! * [`full_phase`] evaluates the general two-band functional
//!   `Arg sum_k sqrt(w_k(0) w_k(tau)) <phi_k(0)|phi_k(tau)> exp(-i theta_k)`
//!   and returns a value in `(-pi, pi]`. Use it for mixed initial states.
//!
//! Once the trajectory reaches the degenerate point at the Bloch-sphere
//! center the eigenvectors stop meaning anything, and the state barely moves
//! afterwards anyway; accumulation latches (the phase is held constant from
//! the first sub-threshold sample on) rather than aborting or extrapolating,
//! which is what the long-time plateau of the phase looks like.

use num_complex::Complex;
use thiserror::Error;

use crate::domain::{EnvDensityState, PhaseSample, PhaseTrace};
use crate::spectral::{self, DegenerateState};
use crate::{real, Real};

/// Largest admissible subdominant weight at `t = 0` for the single-band
/// accumulator.
const PURE_START_LIMIT: f64 = 1e-12;

/// Thresholds for phase accumulation and saturation detection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseConfig<T> {
    /// Gap below which eigenvectors are treated as undefined (shared with
    /// [`spectral::decompose`]), default `1e-8`.
    pub eps_degen: T,
    /// Gap below which accumulation latches, default `1e-6`. Keep it at or
    /// above `eps_degen`.
    pub freeze_gap: T,
    /// Window length (units of `1/s1`) over which the phase must stay flat
    /// to count as saturated, default `5.0`.
    pub saturation_window: T,
    /// Maximal phase variation over the window, default `1e-4`.
    pub saturation_tol: T,
}

impl<T: Real> Default for PhaseConfig<T> {
    fn default() -> Self {
        Self {
            eps_degen: real(spectral::DEFAULT_EPS_DEGEN),
            freeze_gap: real(1e-6),
            saturation_window: real(5.0),
            saturation_tol: real(1e-4),
        }
    }
}

#[derive(Clone, Copy, Debug, Error, PartialEq)]
pub enum PhaseError<T: Real> {
    #[error("initial state is degenerate (gap {gap}); no eigenvector to follow")]
    DegenerateStart { gap: T },
    #[error("initial subdominant weight {omega2} exceeds 1e-12; use the general evaluator")]
    NonUnitWeight { omega2: T },
    #[error("degenerate state at t = {t}: {source}")]
    Degenerate {
        t: T,
        #[source]
        source: DegenerateState<T>,
    },
}

impl<T: Real> PhaseError<T> {
    /// Short machine-readable code used in CSV markers and CLI errors.
    pub fn code(&self) -> &'static str {
        match self {
            PhaseError::DegenerateStart { .. } => "degenerate_start",
            PhaseError::NonUnitWeight { .. } => "non_unit_weight",
            PhaseError::Degenerate { .. } => "degenerate",
        }
    }
}

/// Saturation report from [`detect_cgp`]: the characteristic value the
/// phase settles at, and the first time from which it stays flat.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Saturation<T> {
    pub cgp: T,
    pub t_sat: T,
}

fn overlap<T: Real>(a: &[Complex<T>; 2], b: &[Complex<T>; 2]) -> Complex<T> {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// Running unwrapped geometric phase for a pure-start trajectory.
///
/// Requires a nondegenerate start (`gap >= freeze_gap`) and an initial
/// subdominant weight below `1e-12`; fails with [`PhaseError`] otherwise.
pub fn accumulate<T: Real>(
    trajectory: &[(T, EnvDensityState<T>)],
    cfg: &PhaseConfig<T>,
) -> Result<PhaseTrace<T>, PhaseError<T>> {
    let mut trace = PhaseTrace {
        samples: Vec::with_capacity(trajectory.len()),
    };
    let Some((t0, env0)) = trajectory.first() else {
        return Ok(trace);
    };

    let rho0 = env0.reduce();
    let (omega1_0, omega2_0) = spectral::eigenvalues(&rho0);
    let gap0 = omega1_0 - omega2_0;
    if gap0 < cfg.freeze_gap {
        return Err(PhaseError::DegenerateStart { gap: gap0 });
    }
    if omega2_0 > real(PURE_START_LIMIT) {
        return Err(PhaseError::NonUnitWeight { omega2: omega2_0 });
    }

    let mut prev = spectral::decompose(&rho0, cfg.eps_degen)
        .map_err(|source| PhaseError::Degenerate { t: *t0, source })?;
    let mut gamma = T::zero();
    let mut frozen = false;
    trace.samples.push(PhaseSample {
        t: *t0,
        bloch: rho0.to_bloch(),
        omega1: omega1_0,
        gamma,
    });

    for (t, env) in &trajectory[1..] {
        let rho = env.reduce();
        let (omega1, omega2) = spectral::eigenvalues(&rho);

        if !frozen {
            if omega1 - omega2 < cfg.freeze_gap {
                frozen = true;
            } else {
                let next = spectral::decompose(&rho, cfg.eps_degen)
                    .map_err(|source| PhaseError::Degenerate { t: *t, source })?;
                gamma -= overlap(&prev.phi1, &next.phi1).arg();
                prev = next;
            }
        }
        trace.samples.push(PhaseSample {
            t: *t,
            bloch: rho.to_bloch(),
            omega1,
            gamma,
        });
    }
    Ok(trace)
}

/// General two-band phase functional, reduced into `(-pi, pi]`.
///
/// Unlike [`accumulate`] this has no freeze policy: the gap must stay at or
/// above `eps_degen` over the whole trajectory.
pub fn full_phase<T: Real>(
    trajectory: &[(T, EnvDensityState<T>)],
    cfg: &PhaseConfig<T>,
) -> Result<T, PhaseError<T>> {
    let Some((t0, env0)) = trajectory.first() else {
        return Ok(T::zero());
    };

    let first = spectral::decompose(&env0.reduce(), cfg.eps_degen)
        .map_err(|source| PhaseError::Degenerate { t: *t0, source })?;
    let mut prev = first;
    let mut theta1 = T::zero();
    let mut theta2 = T::zero();

    for (t, env) in &trajectory[1..] {
        let next = spectral::decompose(&env.reduce(), cfg.eps_degen)
            .map_err(|source| PhaseError::Degenerate { t: *t, source })?;
        theta1 += overlap(&prev.phi1, &next.phi1).arg();
        theta2 += overlap(&prev.phi2, &next.phi2).arg();
        prev = next;
    }

    let last = prev;
    let weight1 = (first.omega1 * last.omega1).sqrt();
    let weight2 = (first.omega2 * last.omega2).sqrt();
    let term1 = overlap(&first.phi1, &last.phi1) * Complex::from_polar(weight1, -theta1);
    let term2 = overlap(&first.phi2, &last.phi2) * Complex::from_polar(weight2, -theta2);
    Ok((term1 + term2).arg())
}

/// Discrete gauge-invariant phase of an eigenvector path: the argument of
/// `<v_0|v_n> * prod_i <v_{i+1}|v_i>`. Every vector enters once as a bra and
/// once as a ket, so per-sample phase redefinitions cancel exactly. Equals
/// the mod-2-pi value of [`accumulate`] when the path comes from a
/// pure-start trajectory.
pub fn pancharatnam_phase<T: Real>(vectors: &[[Complex<T>; 2]]) -> T {
    let Some(first) = vectors.first() else {
        return T::zero();
    };
    let last = vectors.last().unwrap();
    let mut product = overlap(first, last);
    for pair in vectors.windows(2) {
        product *= overlap(&pair[1], &pair[0]);
        let norm = product.norm();
        if norm > T::zero() {
            product /= norm;
        }
    }
    product.arg()
}

/// Find the first sample time after which the phase varies by less than
/// `saturation_tol` over every window of length `saturation_window`, through
/// the end of the trace. `None` when the trace never settles (or is shorter
/// than one window).
pub fn detect_cgp<T: Real>(trace: &PhaseTrace<T>, cfg: &PhaseConfig<T>) -> Option<Saturation<T>> {
    let samples = &trace.samples;
    if samples.is_empty() {
        return None;
    }
    let n = samples.len();
    let t_end = samples[n - 1].t;
    let window = cfg.saturation_window;

    // flat[i]: phase range over samples within [t_i, t_i + window] < tol,
    // via sliding max/min deques.
    let mut flat = vec![false; n];
    let mut maxq: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let mut minq: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let mut end = 0usize;
    for i in 0..n {
        while end < n && samples[end].t <= samples[i].t + window {
            let g = samples[end].gamma;
            while maxq.back().is_some_and(|&j| samples[j].gamma <= g) {
                maxq.pop_back();
            }
            maxq.push_back(end);
            while minq.back().is_some_and(|&j| samples[j].gamma >= g) {
                minq.pop_back();
            }
            minq.push_back(end);
            end += 1;
        }
        while maxq.front().is_some_and(|&j| j < i) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&j| j < i) {
            minq.pop_front();
        }
        let spread = samples[*maxq.front().unwrap()].gamma - samples[*minq.front().unwrap()].gamma;
        flat[i] = spread < cfg.saturation_tol;
    }

    let first_settled = match flat.iter().rposition(|&ok| !ok) {
        Some(last_bad) => last_bad + 1,
        None => 0,
    };
    if first_settled >= n {
        return None;
    }
    let t_sat = samples[first_settled].t;
    // Demand at least one full window of evidence.
    if t_sat + window > t_end {
        return None;
    }
    Some(Saturation {
        cgp: samples[n - 1].gamma,
        t_sat,
    })
}
