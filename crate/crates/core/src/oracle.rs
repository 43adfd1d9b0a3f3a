//! Analytic closed-system reference: when the two interdot couplings are
//! equal (`s2 == s1`) the detector decouples from the reduced dynamics and
//! the qubit evolves as a closed two-level system. These closed forms serve
//! as ground truth for the integrator and the phase accumulator.
//!
//! The effective qubit Hamiltonian is taken in the convention induced by
//! the master equation's reduced flow (off-diagonal coupling `-s1`, which
//! differs from `+s1` only by the basis sign of the second dot state); only
//! the detuning `eps0 = E1 - E2` is physical, so the diagonal is split
//! symmetrically as `(+eps0/2, -eps0/2)`.

use num_complex::Complex;

use crate::domain::{ReducedDensity, SystemParams};
use crate::{real, Real};

/// Level splitting of the closed two-level system,
/// `sqrt(eps0^2 + 4 s1^2)`.
pub fn level_splitting<T: Real>(params: &SystemParams<T>) -> T {
    let four = real::<T>(4.0);
    (params.eps0 * params.eps0 + four * params.s1 * params.s1).sqrt()
}

/// Period after which the closed system returns to its initial state:
/// `2 pi / sqrt(eps0^2 + 4 s1^2)`.
pub fn closed_period<T: Real>(params: &SystemParams<T>) -> T {
    let two = real::<T>(2.0);
    two * T::PI() / level_splitting(params)
}

/// Closed-system state at time `t`, starting from "electron in dot 1".
pub fn closed_state<T: Real>(t: T, params: &SystemParams<T>) -> ReducedDensity<T> {
    let splitting = level_splitting(params);
    let half_angle = splitting * t * real::<T>(0.5);
    let (sin, cos) = half_angle.sin_cos();
    let two = real::<T>(2.0);

    let psi1 = Complex::new(cos, -(params.eps0 / splitting) * sin);
    let psi2 = Complex::new(T::zero(), two * params.s1 / splitting * sin);
    ReducedDensity {
        r11: psi1.norm_sqr(),
        r12: psi1 * psi2.conj(),
    }
}

/// Geometric phase of one closed precession cycle, in the accumulation
/// convention of [`crate::phase::accumulate`]: magnitude
/// `pi * (1 - |eps0| / sqrt(eps0^2 + 4 s1^2))` (the solid-angle formula for
/// the precession cone), positive for `eps0 <= 0` and negative for
/// `eps0 > 0`.
pub fn closed_loop_phase<T: Real>(params: &SystemParams<T>) -> T {
    let magnitude = T::PI() * (T::one() - params.eps0.abs() / level_splitting(params));
    if params.eps0 > T::zero() {
        -magnitude
    } else {
        magnitude
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::EnvDensityState;
    use crate::master_equation::{integrate, IntegratorConfig};
    use crate::phase::{accumulate, PhaseConfig};
    use std::f64::consts::PI;

    fn closed_params(eps0: f64) -> SystemParams<f64> {
        SystemParams {
            gamma_l: 1.0,
            gamma_r: 2.0,
            s1: 1.0,
            s2: 1.0,
            eps0,
        }
    }

    #[test]
    fn period_values() {
        assert!((closed_period(&closed_params(-2.0)) - PI / 2.0f64.sqrt()).abs() < 1e-15);
        assert!((closed_period(&closed_params(0.0)) - PI).abs() < 1e-15);
        let fast = SystemParams { s1: 2.0, ..closed_params(0.0) };
        assert!((closed_period(&fast) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn state_at_zero_and_after_one_period() {
        let params = closed_params(-2.0);
        let rho = closed_state(0.0, &params);
        assert_eq!(rho.r11, 1.0);
        assert_eq!(rho.r12.norm(), 0.0);

        let rho = closed_state(closed_period(&params), &params);
        assert!((rho.r11 - 1.0).abs() < 1e-12);
        assert!(rho.r12.norm() < 1e-12);
    }

    #[test]
    fn resonant_half_period_fully_transfers() {
        let params = closed_params(0.0);
        let rho = closed_state(PI / 2.0, &params);
        assert!(rho.r11.abs() < 1e-15);
    }

    #[test]
    fn state_is_periodic_and_pure() {
        let params = closed_params(-1.3);
        let period = closed_period(&params);
        for k in 0..40 {
            let t = 0.37 * k as f64;
            let a = closed_state(t, &params);
            let b = closed_state(t + period, &params);
            assert!((a.r11 - b.r11).abs() < 1e-12);
            assert!((a.r12 - b.r12).norm() < 1e-12);
            assert!((a.to_bloch().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn loop_phase_values() {
        let expected = PI - PI / 2.0f64.sqrt();
        assert!((closed_loop_phase(&closed_params(-2.0)) - expected).abs() < 1e-15);
        assert!((closed_loop_phase(&closed_params(0.0)) - PI).abs() < 1e-15);
    }

    #[test]
    fn loop_phase_matches_numeric_accumulation_for_either_detuning_sign() {
        for eps0 in [-2.0, -1.0, 1.0, 2.5] {
            let params = closed_params(eps0);
            let trajectory = integrate(
                &EnvDensityState::electron_in_dot1(),
                &params,
                &IntegratorConfig::default().with_t_max(closed_period(&params)),
            )
            .unwrap();
            let gamma = accumulate(&trajectory, &PhaseConfig::default())
                .unwrap()
                .final_gamma();
            let expected = closed_loop_phase(&params);
            assert!(
                (gamma - expected).abs() <= 1e-3,
                "eps0 = {eps0}: accumulated {gamma}, closed form {expected}"
            );
        }
    }

    #[test]
    fn integrator_reproduces_closed_state() {
        let params = closed_params(-2.0);
        let samples = integrate(
            &EnvDensityState::electron_in_dot1(),
            &params,
            &IntegratorConfig::default().with_t_max(20.0),
        )
        .unwrap();
        let mut worst = 0.0f64;
        for (t, env) in &samples {
            let numeric = env.reduce();
            let exact = closed_state(*t, &params);
            worst = worst
                .max((numeric.r11 - exact.r11).abs())
                .max((numeric.r12.re - exact.r12.re).abs())
                .max((numeric.r12.im - exact.r12.im).abs());
        }
        println!("closed-system max deviation: {worst:.3e}");
        assert!(worst <= 1e-8);
    }
}
