//! Command-line workflows for the soft-arm library: trajectory IK, oracle
//! validation, closed-loop tracking and the link-count benchmark.
//!
//! Exit codes: 0 ok, 1 validation failure, 2 bad input, 3 numerical failure.

// `!(x > 0.0)` checks are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
mod error;
pub mod format;
pub mod io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pcc_core::control::ControlLaw;

pub use error::{CliError, CliResult};

use commands::{RunConfig, StartState, TrackOptions};
use config::RobotConfig;
use io::TrajectorySource;

#[derive(Debug, Parser)]
#[command(name = "pcc", version, about = "Soft-arm kinematics, IK and tracking workflows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve IK along a trajectory; writes results.csv and summary.json.
    Solve(RunArgs),
    /// IK then closed-loop tracking; writes trace.csv and metrics.json.
    Track(TrackArgs),
    /// IK cost and accuracy versus link count; writes bench.csv and bench.json.
    Bench(BenchArgs),
    /// Compare single-segment IK with the closed-form inverse; writes validate.csv and validate.json.
    Validate(RunArgs),
    /// Write a trajectory as trajectory.csv.
    TrajGen(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Robot TOML file or preset:{single,two,four,planar4}.
    #[arg(long, default_value = "preset:single")]
    pub robot: String,
    /// CSV file, shape:{flower,circle2d,circle3d} or random:N.
    #[arg(long, default_value = "shape:flower")]
    pub trajectory: String,
    /// Points of a generated trajectory, or resample count for a file [default: 1150 for shapes].
    #[arg(long)]
    pub points: Option<usize>,
    /// Time span of a generated trajectory in seconds [default: one period].
    #[arg(long)]
    pub duration: Option<f64>,
    /// Planar tip angle to hold, in degrees.
    #[arg(long)]
    pub tip_angle: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use the raw rigid-link chain without drift compensation.
    #[arg(long)]
    pub no_compensation: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LawArg {
    /// τ = M(q)·(kp e + kv ė) + K(q_d) + G(q_d)
    InertiaWeighted,
    /// τ = kp e + kv ė + K(q_d) + G(q_d)
    Direct,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StartArg {
    Rest,
    OnTrajectory,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value_t = 1000.0)]
    pub kp: f64,
    #[arg(long, default_value_t = 5.0)]
    pub kv: f64,
    #[arg(long, value_enum, default_value = "inertia-weighted")]
    pub law: LawArg,
    /// Integration step in seconds.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Control update rate in Hz.
    #[arg(long, default_value_t = 250.0)]
    pub control_rate: f64,
    /// Realize the torque through clamped bellows pressures.
    #[arg(long)]
    pub pressure: bool,
    /// Use the corrected pressure mapping; false reproduces the rank-deficient layout.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub erratum_fix: bool,
    #[arg(long, value_enum, default_value = "rest")]
    pub start: StartArg,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Link counts: a range "2-30" or a list "2,6,10".
    #[arg(long, default_value = "2-30")]
    pub links: String,
    /// Timing repetitions per link count; the median is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
}

impl RunArgs {
    pub fn to_config(&self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::new(
            RobotConfig::resolve(&self.robot)?,
            TrajectorySource::parse(&self.trajectory)?,
            &self.out,
        );
        cfg.points = self.points;
        cfg.duration = self.duration;
        cfg.tip_angle_deg = self.tip_angle;
        cfg.seed = self.seed;
        cfg.compensated = !self.no_compensation;
        Ok(cfg)
    }
}

/// Runs a parsed command and returns the JSON summary it wrote.
pub fn run(cli: &Cli) -> CliResult<serde_json::Value> {
    let value = match &cli.command {
        Command::Solve(a) => serde_json::to_value(commands::solve(&a.to_config()?)?)?,
        Command::Validate(a) => serde_json::to_value(commands::validate(&a.to_config()?)?)?,
        Command::TrajGen(a) => serde_json::json!({ "path": commands::traj_gen(&a.to_config()?)? }),
        Command::Bench(a) => {
            let links = commands::parse_links(&a.links)?;
            serde_json::to_value(commands::bench(&a.run.to_config()?, &links, a.repeats)?)?
        }
        Command::Track(a) => {
            let opts = TrackOptions {
                kp: a.kp,
                kv: a.kv,
                law: match a.law {
                    LawArg::InertiaWeighted => ControlLaw::InertiaWeighted,
                    LawArg::Direct => ControlLaw::Direct,
                },
                control_rate: a.control_rate,
                dt: a.dt,
                pressure: a.pressure,
                erratum_fix: a.erratum_fix,
                start: match a.start {
                    StartArg::Rest => StartState::Rest,
                    StartArg::OnTrajectory => StartState::OnTrajectory,
                },
            };
            serde_json::to_value(commands::track(&a.run.to_config()?, &opts)?)?
        }
    };
    Ok(value)
}
