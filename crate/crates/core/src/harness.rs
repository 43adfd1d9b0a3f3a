//! Experiment layer: trajectory export, phase-vs-time export, and parameter
//! sweeps, all as deterministic CSV with a JSON metadata sidecar.
//!
//! Floats are rendered with 17 significant digits, so files are
//! byte-identical across runs and round-trip exactly. Sweep points are
//! independent pure pipelines and run in parallel; results are gathered in
//! grid order, so parallel and serial execution produce the same bytes.

use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::domain::{EnvDensityState, ParamsError, PhaseTrace, SystemParams};
use crate::master_equation::{integrate, IntegrateError, IntegratorConfig, Trajectory};
use crate::oracle;
use crate::phase::{accumulate, detect_cgp, PhaseConfig, PhaseError};
use crate::Real;

/// Which parameter a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    S2,
    GammaL,
    GammaR,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::S2 => "s2",
            SweepParameter::GammaL => "gamma_l",
            SweepParameter::GammaR => "gamma_r",
        }
    }

    fn apply<T: Real>(&self, base: &SystemParams<T>, value: T) -> SystemParams<T> {
        let mut params = *base;
        match self {
            SweepParameter::S2 => params.s2 = value,
            SweepParameter::GammaL => params.gamma_l = value,
            SweepParameter::GammaR => params.gamma_r = value,
        }
        params
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "s2" => Ok(SweepParameter::S2),
            "gamma_l" => Ok(SweepParameter::GammaL),
            "gamma_r" => Ok(SweepParameter::GammaR),
            other => Err(format!("unknown sweep parameter `{other}` (use s2, gamma-l, gamma-r)")),
        }
    }
}

/// What a sweep reports per point: the long-time saturated phase, or the
/// phase after one environment-free precession period.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    Cgp,
    FixedT,
}

impl SweepMode {
    pub fn name(&self) -> &'static str {
        match self {
            SweepMode::Cgp => "cgp",
            SweepMode::FixedT => "fixed_T",
        }
    }
}

impl std::str::FromStr for SweepMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").to_lowercase().as_str() {
            "cgp" => Ok(SweepMode::Cgp),
            "fixed_t" => Ok(SweepMode::FixedT),
            other => Err(format!("unknown sweep mode `{other}` (use cgp or fixed-t)")),
        }
    }
}

/// Full description of a parameter sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSpec<T> {
    pub parameter: SweepParameter,
    pub from: T,
    pub to: T,
    /// Number of grid points, endpoints included; at least 2.
    pub steps: usize,
    pub mode: SweepMode,
    pub base: SystemParams<T>,
    /// Per-point integration controls. In `cgp` mode `t_max` is the horizon
    /// the saturation search gives up at; in `fixed_T` mode it is ignored
    /// and each point integrates to exactly one closed-system period.
    pub integrator: IntegratorConfig<T>,
    pub phase: PhaseConfig<T>,
}

impl<T: Real> SweepSpec<T> {
    fn validate(&self) -> Result<(), HarnessError<T>> {
        if self.steps < 2 {
            return Err(HarnessError::InvalidSpec(format!(
                "sweep needs at least 2 steps, got {}",
                self.steps
            )));
        }
        if self.from.partial_cmp(&self.to) != Some(std::cmp::Ordering::Less) {
            return Err(HarnessError::InvalidSpec(format!(
                "sweep bounds must satisfy from < to, got [{}, {}]",
                self.from, self.to
            )));
        }
        self.base.validate()?;
        Ok(())
    }

    /// Evenly spaced grid, endpoints included. In `cgp` mode a grid value
    /// that hits `s1` exactly while sweeping `s2` is dropped: there the
    /// environment decouples, the phase grows without bound, and no
    /// saturated value exists.
    pub fn grid(&self) -> Vec<T> {
        let span = self.to - self.from;
        let denom = T::from(self.steps - 1).unwrap();
        (0..self.steps)
            .map(|i| self.from + span * T::from(i).unwrap() / denom)
            .filter(|&v| {
                !(self.mode == SweepMode::Cgp
                    && self.parameter == SweepParameter::S2
                    && v == self.base.s1)
            })
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum HarnessError<T: Real> {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Params(#[from] ParamsError<T>),
    #[error(transparent)]
    Integrate(#[from] IntegrateError<T>),
    #[error(transparent)]
    Phase(#[from] PhaseError<T>),
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
}

impl<T: Real> HarnessError<T> {
    pub fn code(&self) -> &'static str {
        match self {
            HarnessError::Io(_) => "io",
            HarnessError::Params(_) => "invalid_params",
            HarnessError::Integrate(e) => e.code(),
            HarnessError::Phase(e) => e.code(),
            HarnessError::InvalidSpec(_) => "invalid_spec",
        }
    }
}

/// 17-significant-digit decimal rendering; deterministic and lossless.
/// Negative zero is normalized so exact zeros print uniformly.
fn fmt_real<T: Real>(x: T) -> String {
    let x = if x == T::zero() { T::zero() } else { x };
    format!("{:.16e}", x)
}

fn fmt_opt<T: Real>(x: Option<T>) -> String {
    x.map_or_else(|| "nan".to_string(), fmt_real)
}

fn params_json<T: Real>(params: &SystemParams<T>) -> serde_json::Value {
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    json!({
        "gamma_l": f(params.gamma_l),
        "gamma_r": f(params.gamma_r),
        "s1": f(params.s1),
        "s2": f(params.s2),
        "eps0": f(params.eps0),
    })
}

fn configs_json<T: Real>(integrator: &IntegratorConfig<T>, phase: &PhaseConfig<T>) -> serde_json::Value {
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    json!({
        "integrator": {
            "dt": f(integrator.dt),
            "t_max": f(integrator.t_max),
            "sample_stride": integrator.sample_stride,
        },
        "phase": {
            "eps_degen": f(phase.eps_degen),
            "freeze_gap": f(phase.freeze_gap),
            "saturation_window": f(phase.saturation_window),
            "saturation_tol": f(phase.saturation_tol),
        },
    })
}

fn write_outputs<T: Real>(
    out: &Path,
    csv: &str,
    metadata: serde_json::Value,
) -> Result<(), HarnessError<T>> {
    fs::write(out, csv)?;
    let sidecar = format!("{}.meta.json", out.display());
    fs::write(sidecar, format!("{:#}\n", metadata))?;
    Ok(())
}

fn trajectory_pipeline<T: Real>(
    params: &SystemParams<T>,
    integrator: &IntegratorConfig<T>,
    phase: &PhaseConfig<T>,
) -> Result<(Trajectory<T>, PhaseTrace<T>), HarnessError<T>> {
    let trajectory = integrate(&EnvDensityState::electron_in_dot1(), params, integrator)?;
    let trace = accumulate(&trajectory, phase)?;
    Ok((trajectory, trace))
}

/// Render the Bloch-sphere trajectory CSV:
/// `t,x,y,z,omega1,gamma,trace_err`, one row per sample.
pub fn trajectory_csv<T: Real>(
    params: &SystemParams<T>,
    integrator: &IntegratorConfig<T>,
    phase: &PhaseConfig<T>,
) -> Result<String, HarnessError<T>> {
    let (trajectory, trace) = trajectory_pipeline(params, integrator, phase)?;
    let mut out = String::with_capacity(trace.len() * 140 + 64);
    out.push_str("t,x,y,z,omega1,gamma,trace_err\n");
    for ((_, env), sample) in trajectory.iter().zip(&trace.samples) {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_real(sample.t),
            fmt_real(sample.bloch.x),
            fmt_real(sample.bloch.y),
            fmt_real(sample.bloch.z),
            fmt_real(sample.omega1),
            fmt_real(sample.gamma),
            fmt_real(env.trace_error()),
        ));
    }
    Ok(out)
}

/// Render the phase-vs-time CSV: `t,gamma,saturated_flag`, with a trailing
/// `# cgp=...,t_sat=...` summary line when a plateau is detected.
pub fn phase_csv<T: Real>(
    params: &SystemParams<T>,
    integrator: &IntegratorConfig<T>,
    phase: &PhaseConfig<T>,
) -> Result<String, HarnessError<T>> {
    let (_, trace) = trajectory_pipeline(params, integrator, phase)?;
    let saturation = detect_cgp(&trace, phase);
    let mut out = String::with_capacity(trace.len() * 50 + 64);
    out.push_str("t,gamma,saturated_flag\n");
    for sample in &trace.samples {
        let flag = match &saturation {
            Some(sat) if sample.t >= sat.t_sat => 1,
            _ => 0,
        };
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_real(sample.t),
            fmt_real(sample.gamma),
            flag
        ));
    }
    if let Some(sat) = saturation {
        out.push_str(&format!(
            "# cgp={},t_sat={}\n",
            fmt_real(sat.cgp),
            fmt_real(sat.t_sat)
        ));
    }
    Ok(out)
}

/// One sweep-point result. `marker` is empty on success, `not_saturated`
/// when the phase never settles within the horizon, or a short error code.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow<T> {
    pub param_value: T,
    pub phase_value: Option<T>,
    pub saturated: bool,
    pub t_sat: Option<T>,
    pub marker: &'static str,
}

fn sweep_point<T: Real>(spec: &SweepSpec<T>, value: T) -> SweepRow<T> {
    let params = spec.parameter.apply(&spec.base, value);
    if params.validate().is_err() {
        return SweepRow {
            param_value: value,
            phase_value: None,
            saturated: false,
            t_sat: None,
            marker: "invalid_params",
        };
    }

    let integrator = match spec.mode {
        SweepMode::Cgp => spec.integrator,
        // The reference interval is the environment-free precession period
        // of the base system; the last step lands on it exactly.
        SweepMode::FixedT => spec.integrator.with_t_max(oracle::closed_period(&spec.base)),
    };

    let trajectory = match integrate(&EnvDensityState::electron_in_dot1(), &params, &integrator) {
        Ok(t) => t,
        Err(e) => {
            return SweepRow {
                param_value: value,
                phase_value: None,
                saturated: false,
                t_sat: None,
                marker: e.code(),
            }
        }
    };
    let trace = match accumulate(&trajectory, &spec.phase) {
        Ok(t) => t,
        Err(e) => {
            return SweepRow {
                param_value: value,
                phase_value: None,
                saturated: false,
                t_sat: None,
                marker: e.code(),
            }
        }
    };

    match spec.mode {
        SweepMode::FixedT => SweepRow {
            param_value: value,
            phase_value: Some(trace.final_gamma()),
            saturated: true,
            t_sat: Some(integrator.t_max),
            marker: "",
        },
        SweepMode::Cgp => match detect_cgp(&trace, &spec.phase) {
            Some(sat) => SweepRow {
                param_value: value,
                phase_value: Some(sat.cgp),
                saturated: true,
                t_sat: Some(sat.t_sat),
                marker: "",
            },
            None => SweepRow {
                param_value: value,
                phase_value: Some(trace.final_gamma()),
                saturated: false,
                t_sat: None,
                marker: "not_saturated",
            },
        },
    }
}

/// Evaluate every grid point (in parallel; rows come back in grid order).
pub fn sweep_rows<T: Real>(spec: &SweepSpec<T>) -> Result<Vec<SweepRow<T>>, HarnessError<T>> {
    spec.validate()?;
    Ok(spec
        .grid()
        .into_par_iter()
        .map(|value| sweep_point(spec, value))
        .collect())
}

/// Render the sweep CSV:
/// `param_value,phase_value,saturated_flag,t_sat,marker`.
pub fn sweep_csv<T: Real>(spec: &SweepSpec<T>) -> Result<String, HarnessError<T>> {
    let rows = sweep_rows(spec)?;
    let mut out = String::with_capacity(rows.len() * 80 + 64);
    out.push_str("param_value,phase_value,saturated_flag,t_sat,marker\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_real(row.param_value),
            fmt_opt(row.phase_value),
            u8::from(row.saturated),
            fmt_opt(row.t_sat),
            row.marker,
        ));
    }
    Ok(out)
}

/// Integrate one trajectory and write the Bloch-path CSV plus its
/// `<out>.meta.json` sidecar.
pub fn run_trajectory<T: Real>(
    params: &SystemParams<T>,
    integrator: &IntegratorConfig<T>,
    phase: &PhaseConfig<T>,
    out: &Path,
) -> Result<(), HarnessError<T>> {
    let csv = trajectory_csv(params, integrator, phase)?;
    let metadata = json!({
        "command": "trajectory",
        "crate_version": env!("CARGO_PKG_VERSION"),
        "params": params_json(params),
        "configs": configs_json(integrator, phase),
        "output": out.display().to_string(),
    });
    write_outputs(out, &csv, metadata)
}

/// Write the phase-vs-time CSV plus metadata sidecar.
pub fn run_phase<T: Real>(
    params: &SystemParams<T>,
    integrator: &IntegratorConfig<T>,
    phase: &PhaseConfig<T>,
    out: &Path,
) -> Result<(), HarnessError<T>> {
    let csv = phase_csv(params, integrator, phase)?;
    let metadata = json!({
        "command": "phase",
        "crate_version": env!("CARGO_PKG_VERSION"),
        "params": params_json(params),
        "configs": configs_json(integrator, phase),
        "output": out.display().to_string(),
    });
    write_outputs(out, &csv, metadata)
}

/// Run a parameter sweep and write its CSV plus metadata sidecar.
/// Per-point failures land in the row's marker column; the sweep continues.
pub fn run_sweep<T: Real>(spec: &SweepSpec<T>, out: &Path) -> Result<(), HarnessError<T>> {
    let csv = sweep_csv(spec)?;
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    let metadata = json!({
        "command": "sweep",
        "crate_version": env!("CARGO_PKG_VERSION"),
        "params": params_json(&spec.base),
        "configs": configs_json(&spec.integrator, &spec.phase),
        "sweep": {
            "parameter": spec.parameter.name(),
            "from": f(spec.from),
            "to": f(spec.to),
            "steps": spec.steps,
            "mode": spec.mode.name(),
        },
        "output": out.display().to_string(),
    });
    write_outputs(out, &csv, metadata)
}
