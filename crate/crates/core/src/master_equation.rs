//! Fixed-step fourth-order Runge-Kutta integration of the six coupled
//! equations of motion for [`EnvDensityState`].
//!
//! The right-hand side is linear and time independent, so a fixed step is
//! both adequate and exactly reproducible; there is no adaptive control.
//! Each step costs four derivative evaluations. The step size is protected
//! by a stability guard: `dt * max(gamma_l, gamma_r, |eps0|, 2 max(s1, s2))`
//! must stay below 0.5, comfortably inside the RK4 stability region for the
//! largest eigenvalue magnitude of the generator. Violating the guard is an
//! error, not a warning, because a silently unstable trajectory would
//! corrupt every quantity computed downstream.

use num_complex::Complex;
use thiserror::Error;

use crate::domain::{EnvDensityState, SystemParams};
use crate::{real, Real};

/// Time-stamped state sequence produced by [`integrate`].
pub type Trajectory<T> = Vec<(T, EnvDensityState<T>)>;

/// Integration controls. Times are in `1/s1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig<T> {
    /// Step size, default `1e-3`.
    pub dt: T,
    /// Final time. The last step is shortened so the trajectory ends at
    /// exactly `t_max`. `t_max = 0` yields the initial sample alone.
    pub t_max: T,
    /// Record every n-th step; the initial and final states are always kept.
    pub sample_stride: usize,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            dt: real(1e-3),
            t_max: real(30.0),
            sample_stride: 1,
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn with_t_max(self, t_max: T) -> Self {
        Self { t_max, ..self }
    }

    pub fn with_dt(self, dt: T) -> Self {
        Self { dt, ..self }
    }
}

/// Trace drift beyond this aborts the run: it signals a mis-set step, since
/// RK4 roundoff stays orders of magnitude lower.
const TRACE_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Error, PartialEq)]
pub enum IntegrateError<T: Real> {
    #[error("step {dt} violates the stability guard: dt * {rate_scale} must be < 0.5")]
    StabilityGuardViolated { dt: T, rate_scale: T },
    #[error("trace drifted by {deviation} at t = {t} (limit 1e-6); reduce dt")]
    InvariantDrift { t: T, deviation: T },
}

impl<T: Real> IntegrateError<T> {
    /// Short machine-readable code used in CSV markers and CLI errors.
    pub fn code(&self) -> &'static str {
        match self {
            IntegrateError::StabilityGuardViolated { .. } => "stability_guard",
            IntegrateError::InvariantDrift { .. } => "invariant_drift",
        }
    }
}

/// Largest rate entering the generator, the scale the stability guard
/// multiplies by `dt`.
pub fn rate_scale<T: Real>(params: &SystemParams<T>) -> T {
    let two = real::<T>(2.0);
    params
        .gamma_l
        .max(params.gamma_r)
        .max(params.eps0.abs())
        .max(two * params.s1.max(params.s2))
}

fn check_guard<T: Real>(params: &SystemParams<T>, dt: T) -> Result<(), IntegrateError<T>> {
    if dt <= T::zero() {
        return Err(IntegrateError::StabilityGuardViolated {
            dt,
            rate_scale: rate_scale(params),
        });
    }
    let scale = rate_scale(params);
    if dt * scale >= real(0.5) {
        return Err(IntegrateError::StabilityGuardViolated { dt, rate_scale: scale });
    }
    Ok(())
}

/// Right-hand side of the equations of motion, with the mirror coherences
/// substituted by conjugates. The populations couple to the coherences only
/// through `Im c13` and `Im c24`, so their derivatives are real by
/// construction and the four of them sum to zero identically.
pub fn derivative<T: Real>(
    env: &EnvDensityState<T>,
    params: &SystemParams<T>,
) -> EnvDensityState<T> {
    let SystemParams {
        gamma_l,
        gamma_r,
        s1,
        s2,
        eps0,
    } = *params;
    let two = real::<T>(2.0);
    let im13 = env.c13.im;
    let im24 = env.c24.im;
    EnvDensityState {
        p11: -gamma_l * env.p11 + gamma_r * env.p22 + two * s1 * im13,
        p22: gamma_l * env.p11 - gamma_r * env.p22 + two * s2 * im24,
        p33: -gamma_l * env.p33 + gamma_r * env.p44 - two * s1 * im13,
        p44: gamma_l * env.p33 - gamma_r * env.p44 - two * s2 * im24,
        c13: Complex::new(-gamma_l, -eps0) * env.c13
            + Complex::new(T::zero(), -(s1 * (env.p11 - env.p33)))
            + env.c24 * gamma_r,
        c24: Complex::new(-gamma_r, -eps0) * env.c24
            + Complex::new(T::zero(), -(s2 * (env.p22 - env.p44)))
            + env.c13 * gamma_l,
    }
}

/// `env + k * h`, componentwise.
fn offset<T: Real>(env: &EnvDensityState<T>, k: &EnvDensityState<T>, h: T) -> EnvDensityState<T> {
    EnvDensityState {
        p11: env.p11 + k.p11 * h,
        p22: env.p22 + k.p22 * h,
        p33: env.p33 + k.p33 * h,
        p44: env.p44 + k.p44 * h,
        c13: env.c13 + k.c13 * h,
        c24: env.c24 + k.c24 * h,
    }
}

fn step_unchecked<T: Real>(
    env: &EnvDensityState<T>,
    params: &SystemParams<T>,
    dt: T,
) -> EnvDensityState<T> {
    let half = dt * real::<T>(0.5);
    let k1 = derivative(env, params);
    let k2 = derivative(&offset(env, &k1, half), params);
    let k3 = derivative(&offset(env, &k2, half), params);
    let k4 = derivative(&offset(env, &k3, dt), params);

    let two = real::<T>(2.0);
    let w = dt / real::<T>(6.0);
    EnvDensityState {
        p11: env.p11 + (k1.p11 + two * (k2.p11 + k3.p11) + k4.p11) * w,
        p22: env.p22 + (k1.p22 + two * (k2.p22 + k3.p22) + k4.p22) * w,
        p33: env.p33 + (k1.p33 + two * (k2.p33 + k3.p33) + k4.p33) * w,
        p44: env.p44 + (k1.p44 + two * (k2.p44 + k3.p44) + k4.p44) * w,
        c13: env.c13 + (k1.c13 + (k2.c13 + k3.c13) * two + k4.c13) * w,
        c24: env.c24 + (k1.c24 + (k2.c24 + k3.c24) * two + k4.c24) * w,
    }
}

/// One classical RK4 update (weights 1/6, 1/3, 1/3, 1/6; local error
/// `O(dt^5)`). Fails if `dt` violates the stability guard.
pub fn rk4_step<T: Real>(
    env: &EnvDensityState<T>,
    params: &SystemParams<T>,
    dt: T,
) -> Result<EnvDensityState<T>, IntegrateError<T>> {
    check_guard(params, dt)?;
    Ok(step_unchecked(env, params, dt))
}

/// Integrate from `initial` to `cfg.t_max`, recording every
/// `cfg.sample_stride`-th step plus the final state.
///
/// Interior sample times are exact step multiples `i * dt`; the final sample
/// is reported at exactly `t_max`. The trace is checked after every step and
/// the run aborts with [`IntegrateError::InvariantDrift`] past `1e-6`.
pub fn integrate<T: Real>(
    initial: &EnvDensityState<T>,
    params: &SystemParams<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>, IntegrateError<T>> {
    check_guard(params, cfg.dt)?;
    let stride = cfg.sample_stride.max(1);
    let drift_limit = real::<T>(TRACE_DRIFT_LIMIT);

    // Full steps that fit below t_max, then one shortened step to land on it.
    let ratio = cfg.t_max / cfg.dt;
    let full_steps = (ratio + real::<T>(1e-9))
        .floor()
        .to_usize()
        .expect("step count must fit in usize");
    let t_full = T::from(full_steps).unwrap() * cfg.dt;
    let remainder = cfg.t_max - t_full;
    let has_tail = remainder > cfg.dt * real::<T>(1e-9);
    let total_steps = full_steps + usize::from(has_tail);

    let mut samples = Vec::with_capacity(total_steps / stride + 2);
    samples.push((T::zero(), *initial));
    let mut state = *initial;

    for step in 1..=total_steps {
        let dt = if step <= full_steps { cfg.dt } else { remainder };
        state = step_unchecked(&state, params, dt);

        let is_last = step == total_steps;
        let t = if is_last {
            cfg.t_max
        } else {
            T::from(step).unwrap() * cfg.dt
        };

        let deviation = state.trace_error();
        if deviation > drift_limit {
            return Err(IntegrateError::InvariantDrift { t, deviation });
        }
        if step % stride == 0 || is_last {
            samples.push((t, state));
        }
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::tests::valid_env_state;
    use proptest::prelude::*;

    fn demo_params() -> SystemParams<f64> {
        SystemParams {
            gamma_l: 1.0,
            gamma_r: 2.0,
            s1: 1.0,
            s2: 0.5,
            eps0: -2.0,
        }
    }

    fn max_component_diff(a: &EnvDensityState<f64>, b: &EnvDensityState<f64>) -> f64 {
        [
            (a.p11 - b.p11).abs(),
            (a.p22 - b.p22).abs(),
            (a.p33 - b.p33).abs(),
            (a.p44 - b.p44).abs(),
            (a.c13 - b.c13).norm(),
            (a.c24 - b.c24).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    #[test]
    fn derivative_of_initial_state() {
        let d = derivative(&EnvDensityState::electron_in_dot1(), &demo_params());
        assert_eq!(d.p11, -1.0);
        assert_eq!(d.p22, 1.0);
        assert_eq!(d.p33, 0.0);
        assert_eq!(d.p44, 0.0);
        assert_eq!(d.c13, Complex::new(0.0, -1.0));
        assert_eq!(d.c24, Complex::new(0.0, 0.0));
    }

    #[test]
    fn derivative_of_flat_diagonal_state() {
        let env = EnvDensityState {
            p11: 0.25,
            p22: 0.25,
            p33: 0.25,
            p44: 0.25,
            c13: Complex::new(0.0, 0.0),
            c24: Complex::new(0.0, 0.0),
        };
        let p = demo_params();
        let d = derivative(&env, &p);
        assert!((d.p11 - 0.25 * (p.gamma_r - p.gamma_l)).abs() < 1e-15);
        assert_eq!(d.c13, Complex::new(0.0, 0.0));
    }

    #[test]
    fn zero_coupling_leaves_state_unchanged() {
        let frozen = SystemParams {
            gamma_l: 0.0,
            gamma_r: 0.0,
            s1: 0.0,
            s2: 0.0,
            eps0: -2.0,
        };
        let env = EnvDensityState {
            p11: 0.3,
            p22: 0.3,
            p33: 0.2,
            p44: 0.2,
            c13: Complex::new(0.05, -0.02),
            c24: Complex::new(-0.01, 0.04),
        };
        let next = rk4_step(&env, &frozen, 1e-3).unwrap();
        // eps0 still drives the coherence phases; kill it too for a no-op.
        let frozen = SystemParams { eps0: 0.0, ..frozen };
        let next_flat = rk4_step(&env, &frozen, 1e-3).unwrap();
        assert_eq!(next_flat, env);
        assert!((next.c13 - env.c13).norm() > 0.0);
    }

    #[test]
    fn guard_rejects_oversized_step() {
        let err = rk4_step(&EnvDensityState::electron_in_dot1(), &demo_params(), 0.3);
        assert!(matches!(
            err,
            Err(IntegrateError::StabilityGuardViolated { .. })
        ));
        let err = integrate(
            &EnvDensityState::electron_in_dot1(),
            &demo_params(),
            &IntegratorConfig::default().with_dt(0.5),
        );
        assert!(matches!(
            err,
            Err(IntegrateError::StabilityGuardViolated { .. })
        ));
    }

    #[test]
    fn coarse_step_matches_fine_reference_after_one_step() {
        let params = demo_params();
        let start = EnvDensityState::electron_in_dot1();
        let coarse = rk4_step(&start, &params, 1e-3).unwrap();
        let mut fine = start;
        for _ in 0..100 {
            fine = rk4_step(&fine, &params, 1e-5).unwrap();
        }
        assert!((coarse.p11 - fine.p11).abs() <= 1e-12);
    }

    #[test]
    fn global_error_shrinks_at_fourth_order() {
        let params = demo_params();
        let start = EnvDensityState::electron_in_dot1();
        let at = |dt: f64| {
            integrate(
                &start,
                &params,
                &IntegratorConfig { dt, t_max: 5.0, sample_stride: usize::MAX },
            )
            .unwrap()
            .last()
            .unwrap()
            .1
        };
        let reference = at(1e-5);
        let coarse = max_component_diff(&at(2e-3), &reference);
        let fine = max_component_diff(&at(1e-3), &reference);
        let ratio = coarse / fine;
        println!("order-check ratio: {ratio}");
        assert!((12.0..=20.0).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn trajectory_spirals_toward_center() {
        let samples = integrate(
            &EnvDensityState::electron_in_dot1(),
            &demo_params(),
            &IntegratorConfig::default().with_t_max(30.0),
        )
        .unwrap();
        let (t_end, last) = samples.last().unwrap();
        assert_eq!(*t_end, 30.0);
        let norm_at = |t: f64| samples[(t / 1e-3) as usize].1.reduce().to_bloch().norm();
        assert!(norm_at(10.0) < norm_at(0.0));
        assert!(norm_at(20.0) < norm_at(10.0));
        // Pinned from a dt=1e-4 reference run (agrees to 1.2e-13).
        let final_norm = last.reduce().to_bloch().norm();
        assert!(
            (final_norm - 0.3889339370781698).abs() < 1e-9,
            "norm(30) = {final_norm}"
        );
    }

    #[test]
    fn bloch_norm_enters_center_ball_late() {
        let samples = integrate(
            &EnvDensityState::electron_in_dot1(),
            &demo_params(),
            &IntegratorConfig::default().with_t_max(150.0),
        )
        .unwrap();
        // Time of the last entry into the 0.05 ball, pinned from a dt=1e-4
        // reference run.
        let entry = samples
            .iter()
            .rev()
            .take_while(|(_, env)| env.reduce().to_bloch().norm() < 0.05)
            .last()
            .expect("norm must end below 0.05");
        assert!((entry.0 - 101.254).abs() <= 1e-2, "entry at t = {}", entry.0);
    }

    #[test]
    fn trace_is_conserved_along_demo_run() {
        let samples = integrate(
            &EnvDensityState::electron_in_dot1(),
            &demo_params(),
            &IntegratorConfig::default().with_t_max(30.0),
        )
        .unwrap();
        let worst = samples
            .iter()
            .map(|(_, s)| s.trace_error())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-9, "trace drift {worst}");
    }

    #[test]
    fn constant_trajectory_under_zero_params() {
        let frozen = SystemParams {
            gamma_l: 0.0,
            gamma_r: 0.0,
            s1: 0.0,
            s2: 0.0,
            eps0: 0.0,
        };
        let start = EnvDensityState::electron_in_dot1();
        let samples = integrate(&start, &frozen, &IntegratorConfig::default().with_t_max(2.0))
            .unwrap();
        assert!(samples.iter().all(|(_, s)| *s == start));
    }

    #[test]
    fn t_max_zero_returns_initial_sample() {
        let start = EnvDensityState::electron_in_dot1();
        let samples =
            integrate(&start, &demo_params(), &IntegratorConfig::default().with_t_max(0.0))
                .unwrap();
        assert_eq!(samples, vec![(0.0, start)]);
    }

    #[test]
    fn stride_keeps_first_and_last_samples() {
        let cfg = IntegratorConfig {
            dt: 1e-3,
            t_max: 0.0105,
            sample_stride: 4,
        };
        let samples =
            integrate(&EnvDensityState::electron_in_dot1(), &demo_params(), &cfg).unwrap();
        let times: Vec<f64> = samples.iter().map(|(t, _)| *t).collect();
        assert_eq!(times.first(), Some(&0.0));
        assert_eq!(times.last(), Some(&0.0105));
        assert!((times[1] - 0.004).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn population_derivatives_sum_to_zero(
            env in valid_env_state(),
            gl in 0.0..3.0f64,
            gr in 0.0..3.0f64,
            s2 in 0.0..3.0f64,
            eps0 in -3.0..3.0f64,
        ) {
            let params = SystemParams { gamma_l: gl, gamma_r: gr, s1: 1.0, s2, eps0 };
            let d = derivative(&env, &params);
            let sum = d.p11 + d.p22 + d.p33 + d.p44;
            prop_assert!(sum.abs() < 1e-14, "sum = {sum}");
        }
    }
}
