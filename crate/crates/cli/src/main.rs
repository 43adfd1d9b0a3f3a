//! Command-line front end: integrates the coupled-dot master equation and
//! exports Bloch trajectories, accumulated geometric phase, and parameter
//! sweeps as reproducible CSV (plus a JSON metadata sidecar per run).
//!
//! Units: energies in `s1`, times in `1/s1`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use geophase::domain::SystemParams;
use geophase::harness::{
    run_phase, run_sweep, run_trajectory, HarnessError, SweepMode, SweepParameter, SweepSpec,
};
use geophase::master_equation::IntegratorConfig;
use geophase::phase::PhaseConfig;

#[derive(Parser)]
#[command(
    name = "geophase",
    version,
    about = "Geometric phase of a coupled-quantum-dot charge qubit under lead-induced decoherence",
    long_about = "Integrates the four-state master equation of a charge qubit whose interdot \
                  coupling is switched by a lead-connected detector dot, and computes the \
                  kinematic mixed-state geometric phase along the trajectory.\n\n\
                  Units: all energies (gamma-l, gamma-r, s2, eps0) are in units of the base \
                  coupling s1; all times (dt, t-max) are in units of 1/s1."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ParamArgs {
    /// Left-lead tunneling rate onto the detector dot (units of s1)
    #[arg(long = "gamma-l", default_value_t = 1.0)]
    gamma_l: f64,
    /// Detector-dot tunneling rate into the right lead (units of s1)
    #[arg(long = "gamma-r", default_value_t = 2.0)]
    gamma_r: f64,
    /// Base interdot coupling, the unit of energy; must be positive
    #[arg(long, default_value_t = 1.0)]
    s1: f64,
    /// Interdot coupling with the detector dot occupied (units of s1)
    #[arg(long, default_value_t = 0.5)]
    s2: f64,
    /// Qubit detuning E1 - E2 (units of s1)
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    eps0: f64,
    /// Integration step (units of 1/s1)
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
}

impl ParamArgs {
    fn params(&self) -> SystemParams<f64> {
        SystemParams {
            gamma_l: self.gamma_l,
            gamma_r: self.gamma_r,
            s1: self.s1,
            s2: self.s2,
            eps0: self.eps0,
        }
    }

    fn integrator(&self, t_max: f64) -> IntegratorConfig<f64> {
        IntegratorConfig {
            dt: self.dt,
            t_max,
            sample_stride: 1,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Export the Bloch-sphere trajectory as CSV (t,x,y,z,omega1,gamma,trace_err)
    Trajectory {
        #[command(flatten)]
        params: ParamArgs,
        /// Final time (units of 1/s1)
        #[arg(long = "t-max", default_value_t = 30.0)]
        t_max: f64,
        /// Output CSV path; a .meta.json sidecar is written next to it
        #[arg(long, default_value = "trajectory.csv")]
        out: PathBuf,
    },
    /// Export accumulated geometric phase vs time as CSV (t,gamma,saturated_flag)
    Phase {
        #[command(flatten)]
        params: ParamArgs,
        /// Final time (units of 1/s1)
        #[arg(long = "t-max", default_value_t = 30.0)]
        t_max: f64,
        /// Output CSV path; a .meta.json sidecar is written next to it
        #[arg(long, default_value = "phase.csv")]
        out: PathBuf,
    },
    /// Sweep one parameter; per point report the saturated phase (cgp mode)
    /// or the phase after one closed-system period (fixed-t mode)
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        /// Parameter to sweep: s2, gamma-l, or gamma-r
        #[arg(long, default_value = "s2")]
        param: SweepParameter,
        /// Lower sweep bound (units of s1)
        #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
        from: f64,
        /// Upper sweep bound (units of s1)
        #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
        to: f64,
        /// Number of grid points, endpoints included
        #[arg(long, default_value_t = 59)]
        steps: usize,
        /// cgp (saturated long-time phase) or fixed-t (phase at one period)
        #[arg(long, default_value = "cgp")]
        mode: SweepMode,
        /// Per-point integration horizon in cgp mode (units of 1/s1)
        #[arg(long = "t-max", default_value_t = 200.0)]
        t_max: f64,
        /// Output CSV path; a .meta.json sidecar is written next to it
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<PathBuf, HarnessError<f64>> {
    match cli.command {
        Command::Trajectory { params, t_max, out } => {
            params.params().validate()?;
            run_trajectory(
                &params.params(),
                &params.integrator(t_max),
                &PhaseConfig::default(),
                &out,
            )?;
            Ok(out)
        }
        Command::Phase { params, t_max, out } => {
            params.params().validate()?;
            run_phase(
                &params.params(),
                &params.integrator(t_max),
                &PhaseConfig::default(),
                &out,
            )?;
            Ok(out)
        }
        Command::Sweep {
            params,
            param,
            from,
            to,
            steps,
            mode,
            t_max,
            out,
        } => {
            let spec = SweepSpec {
                parameter: param,
                from,
                to,
                steps,
                mode,
                base: params.params(),
                integrator: params.integrator(t_max),
                phase: PhaseConfig::default(),
            };
            run_sweep(&spec, &out)?;
            Ok(out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(out) => {
            println!("wrote {} and {}.meta.json", out.display(), out.display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            // One machine-readable error line on stderr.
            eprintln!(
                "{}",
                serde_json::json!({ "error": err.code(), "message": err.to_string() })
            );
            ExitCode::FAILURE
        }
    }
}
