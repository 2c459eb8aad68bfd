//! The workflows behind the `pcc` subcommands. Each writes its files into
//! the run's output directory and returns the summary it serialized.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DVector, Vector3};
use pcc_core::control::{
    desired_from_configs, simulate_tracking, tracking_error_metrics, ControlLaw, Gains, SimulationSettings,
    TrackingMetrics, TrackingTrace,
};
use pcc_core::dynamics::DynState;
use pcc_core::geometry::{
    analytic_ik_single, drift_ratio, tip_position, workspace_extent, ConfigVector, RobotSpec, SegmentConfig,
};
use pcc_core::ik::{
    oracle_deltas, smoothness, solve_point, solve_trajectory, IkResult, IkSettings, IkStatus, SecondaryTask,
};
use pcc_core::timing::Stopwatch;
use pcc_core::trajectory::Trajectory;
use pcc_core::PccError;
use serde::Serialize;

use crate::config::RobotConfig;
use crate::error::{CliError, CliResult};
use crate::format::{num, opt};
use crate::io::{write_trajectory, TrajectorySource};

/// Largest accepted per-variable deviation from the closed-form inverse.
pub const ORACLE_TOLERANCE: f64 = 1e-5;
/// Below this oracle bending angle the deflection angle is undefined.
pub const PHI_DEGENERATE_BELOW: f64 = 1e-3;
/// Share of a tracking run treated as transient.
pub const TRANSIENT_FRACTION: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub robot: RobotConfig,
    pub trajectory: TrajectorySource,
    /// Point count for generated trajectories, resample count for files.
    pub points: Option<usize>,
    /// Time span of generated trajectories (s).
    pub duration: Option<f64>,
    /// Planar tip angle to hold (degrees).
    pub tip_angle_deg: Option<f64>,
    pub compensated: bool,
    pub seed: u64,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn new(robot: RobotConfig, trajectory: TrajectorySource, out: impl Into<PathBuf>) -> Self {
        Self {
            robot,
            trajectory,
            points: None,
            duration: None,
            tip_angle_deg: None,
            compensated: true,
            seed: 0,
            out: out.into(),
        }
    }

    fn robot(&self) -> &RobotSpec {
        &self.robot.robot
    }

    pub fn ik_settings(&self) -> IkSettings {
        IkSettings {
            compensated: self.compensated,
            ..self.robot.solver
        }
    }

    pub fn task(&self) -> CliResult<SecondaryTask> {
        match self.tip_angle_deg {
            None => Ok(SecondaryTask::None),
            Some(_) if !self.robot().planar() => Err(CliError::bad_input("--tip-angle needs a planar robot")),
            Some(deg) if !deg.is_finite() => Err(CliError::bad_input("tip angle must be finite")),
            Some(deg) => Ok(SecondaryTask::TipAngle {
                theta_d: deg.to_radians(),
            }),
        }
    }

    /// A stationary trajectory has no radius; its percentages use the
    /// workspace extent instead.
    pub fn load_trajectory(&self) -> CliResult<Trajectory> {
        let mut traj = self
            .trajectory
            .load(self.robot(), self.points, self.duration, self.seed)?;
        if traj.meta.characteristic_radius == 0.0 {
            traj.meta.characteristic_radius = workspace_extent(self.robot());
        }
        Ok(traj)
    }

    fn output(&self, name: &str) -> CliResult<PathBuf> {
        fs::create_dir_all(&self.out)
            .map_err(|e| CliError::bad_input(format!("cannot create {}: {e}", self.out.display())))?;
        Ok(self.out.join(name))
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn xyz(prefix: &str) -> [String; 3] {
    ["x", "y", "z"].map(|c| format!("{prefix}_{c}"))
}

fn push_xyz(row: &mut Vec<String>, v: &Vector3<f64>) {
    row.extend(v.iter().map(|c| num(*c)));
}

/// Residual statistics shared by `solve` and `bench`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ResidualStats {
    pub mean_residual_mm: f64,
    pub max_residual_mm: f64,
    pub mean_residual_percent: f64,
    pub max_residual_percent: f64,
    pub mean_iterations: f64,
}

impl ResidualStats {
    pub fn of(results: &[IkResult], extent: f64) -> Self {
        let n = results.len().max(1) as f64;
        let mean = results.iter().map(|r| r.residual).sum::<f64>() / n;
        let max = results.iter().map(|r| r.residual).fold(0.0, f64::max);
        Self {
            mean_residual_mm: mean,
            max_residual_mm: max,
            mean_residual_percent: 100.0 * mean / extent,
            max_residual_percent: 100.0 * max / extent,
            mean_iterations: results.iter().map(|r| r.iterations as f64).sum::<f64>() / n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveSummary {
    pub points: usize,
    pub segments: usize,
    pub links: Vec<usize>,
    pub compensated: bool,
    pub tip_angle_deg: Option<f64>,
    pub workspace_extent_mm: f64,
    #[serde(flatten)]
    pub residuals: ResidualStats,
    pub max_secondary_residual_rad: Option<f64>,
    /// Point count per solver status.
    pub status: BTreeMap<String, usize>,
    /// Largest step-to-median ratio between consecutive solutions.
    pub smoothness_worst_ratio: f64,
    pub total_time_s: f64,
    pub mean_time_ms: f64,
}

fn results_header(robot: &RobotSpec) -> Vec<String> {
    let mut h = vec!["index".to_string(), "t".to_string()];
    h.extend(xyz("target"));
    for i in 0..robot.segment_count() {
        h.extend(["delta_l", "theta", "phi"].map(|v| format!("{v}_{i}")));
    }
    h.extend(xyz("achieved"));
    h.extend(
        [
            "residual_mm",
            "residual_percent",
            "secondary_residual_rad",
            "status",
            "iterations",
            "solve_ms",
        ]
        .map(String::from),
    );
    h
}

fn results_row(index: usize, t: f64, target: &Vector3<f64>, r: &IkResult, extent: f64) -> Vec<String> {
    let mut row = vec![index.to_string(), num(t)];
    push_xyz(&mut row, target);
    for c in &r.config.per_segment {
        row.extend([num(c.delta_l), num(c.theta), num(c.phi)]);
    }
    push_xyz(&mut row, &r.achieved);
    row.extend([
        num(r.residual),
        num(100.0 * r.residual / extent),
        opt(r.secondary_residual),
        r.status.as_str().to_string(),
        r.iterations.to_string(),
        num(1e3 * r.solve_time),
    ]);
    row
}

/// Warm-started IK over the trajectory. Writes `results.csv` row by row and
/// `summary.json`; a solver breakdown stops the run after its row.
pub fn solve(cfg: &RunConfig) -> CliResult<SolveSummary> {
    let robot = cfg.robot();
    let traj = cfg.load_trajectory()?;
    let task = cfg.task()?;
    let settings = cfg.ik_settings();
    let extent = workspace_extent(robot);
    let mut w = csv::Writer::from_path(cfg.output("results.csv")?)?;
    w.write_record(results_header(robot))?;

    let clock = Stopwatch::start();
    let mut warm = ConfigVector::zeros(robot.segment_count());
    let mut results: Vec<IkResult> = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let target = traj.robot_target(k, robot.planar());
        let r = solve_point(robot, &target, &warm, task, &settings).inspect_err(|_| {
            let _ = w.flush();
        })?;
        w.write_record(results_row(k, traj.points[k].t, &target, &r, extent))?;
        if r.status == IkStatus::NumericalFailure {
            w.flush()?;
            return Err(CliError::Numerical(format!("solver broke down at point {k}")));
        }
        warm = r.config.clone();
        results.push(r);
    }
    w.flush()?;
    let total = clock.elapsed_secs();

    let mut status = BTreeMap::new();
    for r in &results {
        *status.entry(r.status.as_str().to_string()).or_insert(0) += 1;
    }
    let summary = SolveSummary {
        points: results.len(),
        segments: robot.segment_count(),
        links: robot.segments().iter().map(|s| s.links).collect(),
        compensated: cfg.compensated,
        tip_angle_deg: cfg.tip_angle_deg,
        workspace_extent_mm: extent,
        residuals: ResidualStats::of(&results, extent),
        max_secondary_residual_rad: results.iter().filter_map(|r| r.secondary_residual).reduce(f64::max),
        status,
        smoothness_worst_ratio: smoothness(robot, &results).worst_ratio,
        total_time_s: total,
        mean_time_ms: 1e3 * total / results.len() as f64,
    };
    write_json(&cfg.output("summary.json")?, &summary)?;
    Ok(summary)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StartState {
    /// `q = 0`, at rest.
    Rest,
    /// The first desired state, at rest.
    OnTrajectory,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackOptions {
    pub kp: f64,
    pub kv: f64,
    pub law: ControlLaw,
    /// Hz.
    pub control_rate: f64,
    /// Integration step (s).
    pub dt: f64,
    /// Route the torque through clamped bellows pressures.
    pub pressure: bool,
    pub erratum_fix: bool,
    pub start: StartState,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            kp: 1000.0,
            kv: 5.0,
            law: ControlLaw::InertiaWeighted,
            control_rate: 250.0,
            dt: 1e-3,
            pressure: false,
            erratum_fix: true,
            start: StartState::Rest,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackSummary {
    pub options: TrackOptions,
    pub rows: usize,
    pub duration_s: f64,
    pub ik_max_residual_mm: f64,
    pub clamp_events: usize,
    pub metrics: TrackingMetrics,
    pub wall_time_s: f64,
}

fn trace_header(dof: usize, pressures: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for name in ["q", "qdot", "q_d", "tau"] {
        h.extend((0..dof).map(|i| format!("{name}_{i}")));
    }
    h.extend((0..pressures).map(|i| format!("u_{i}")));
    h.extend(xyz("tip"));
    h.extend(xyz("target"));
    h.push("error_mm".into());
    h
}

pub fn write_trace(path: &Path, trace: &TrackingTrace) -> CliResult<()> {
    let dof = trace.q.first().map_or(0, |q| q.len());
    let pressures = trace.u.first().map_or(0, |u| u.len());
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(trace_header(dof, pressures))?;
    for k in 0..trace.len() {
        let mut row = vec![num(trace.t[k])];
        for v in [&trace.q[k], &trace.qdot[k], &trace.q_d[k], &trace.tau[k]] {
            row.extend(v.iter().map(|x| num(*x)));
        }
        row.extend(trace.u[k].iter().map(|x| num(*x)));
        push_xyz(&mut row, &trace.tip[k]);
        push_xyz(&mut row, &trace.target[k]);
        row.push(num(trace.error[k]));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// IK over the trajectory, then closed-loop tracking of the resulting
/// states. Writes `trace.csv` and `metrics.json`.
pub fn track(cfg: &RunConfig, opts: &TrackOptions) -> CliResult<TrackSummary> {
    let clock = Stopwatch::start();
    let robot = cfg.robot();
    let traj = cfg.load_trajectory()?;
    let ik = solve_trajectory(robot, &traj, cfg.task()?, &cfg.ik_settings())?;
    if let Some(k) = ik.iter().position(|r| r.status == IkStatus::NumericalFailure) {
        return Err(CliError::Numerical(format!("IK broke down at point {k}")));
    }
    let configs: Vec<ConfigVector> = ik.iter().map(|r| r.config.clone()).collect();
    let desired = desired_from_configs(robot, &traj, &configs)?;
    let model = cfg.robot.model()?;
    let settings = SimulationSettings {
        control_rate: opts.control_rate,
        dt: opts.dt,
        initial: match opts.start {
            StartState::Rest => None,
            StartState::OnTrajectory => Some(DynState {
                q: desired.states[0].clone(),
                qdot: DVector::zeros(robot.dof()),
            }),
        },
        actuation: opts.pressure.then_some(pcc_core::dynamics::ActuationParams {
            erratum_fix: opts.erratum_fix,
            ..cfg.robot.actuation
        }),
        compensated: cfg.compensated,
    };
    let gains = Gains::uniform(robot.dof(), opts.kp, opts.kv, opts.law);
    let trace = simulate_tracking(&model, &desired, &gains, &settings)?;
    write_trace(&cfg.output("trace.csv")?, &trace)?;
    let metrics = tracking_error_metrics(&trace, &traj, robot.planar(), TRANSIENT_FRACTION)?;
    let summary = TrackSummary {
        options: opts.clone(),
        rows: trace.len(),
        duration_s: desired.duration(),
        ik_max_residual_mm: ik.iter().map(|r| r.residual).fold(0.0, f64::max),
        clamp_events: trace.clamp_events,
        metrics,
        wall_time_s: clock.elapsed_secs(),
    };
    write_json(&cfg.output("metrics.json")?, &summary)?;
    Ok(summary)
}

/// `"2-30"` or `"2,4,8"`; sorted and deduplicated.
pub fn parse_links(text: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::bad_input(format!("'{text}' is not a link range or list"));
    let mut links: Vec<usize> = match text.split_once('-') {
        Some((a, b)) => {
            let (a, b): (usize, usize) = (
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            );
            (a..=b).collect()
        }
        None => text
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<CliResult<_>>()?,
    };
    links.sort_unstable();
    links.dedup();
    if links.is_empty() {
        return Err(bad());
    }
    if links[0] < 1 {
        return Err(CliError::bad_input("link counts must be at least 1"));
    }
    Ok(links)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub n_links: usize,
    pub n_points: usize,
    #[serde(flatten)]
    pub residuals: ResidualStats,
    /// Median over the repeats of the whole-trajectory solve time.
    pub total_time_s: f64,
    pub mean_time_ms: f64,
    /// Length error of an uncompensated segment bent to π/2.
    pub uncompensated_length_error_percent: f64,
    /// Mean tip shift when the solutions are replayed without compensation.
    pub uncompensated_tip_shift_mm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub repeats: usize,
    /// Rank correlation of solve time with link count.
    pub spearman_time_vs_links: f64,
    /// Largest over smallest mean residual across the sweep.
    pub accuracy_ratio: f64,
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // ties share the mean of their positions
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation; `NaN` when either side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Trajectory IK for every link count in `links` (applied to all segments).
/// Writes `bench.csv` and `bench.json`.
pub fn bench(cfg: &RunConfig, links: &[usize], repeats: usize) -> CliResult<BenchReport> {
    if links.is_empty() || links.contains(&0) {
        return Err(CliError::bad_input("link counts must be non-empty and at least 1"));
    }
    if repeats == 0 {
        return Err(CliError::bad_input("repeats must be at least 1"));
    }
    let task = cfg.task()?;
    let settings = cfg.ik_settings();
    let mut links = links.to_vec();
    links.sort_unstable();
    links.dedup();
    let mut rows = Vec::with_capacity(links.len());
    for &n in &links {
        let robot = cfg.robot().with_links(n)?;
        let traj = cfg.trajectory.load(&robot, cfg.points, cfg.duration, cfg.seed)?;
        let mut times = Vec::with_capacity(repeats);
        let mut results = Vec::new();
        for _ in 0..repeats {
            let clock = Stopwatch::start();
            results = solve_trajectory(&robot, &traj, task, &settings)?;
            times.push(clock.elapsed_secs());
        }
        if let Some(k) = results.iter().position(|r| r.status == IkStatus::NumericalFailure) {
            return Err(CliError::Numerical(format!("n = {n}: solver broke down at point {k}")));
        }
        times.sort_by(f64::total_cmp);
        let median = times[times.len() / 2];
        let shift = results
            .iter()
            .map(|r| (tip_position(&robot, &r.config, false) - tip_position(&robot, &r.config, true)).norm())
            .sum::<f64>()
            / results.len() as f64;
        rows.push(BenchRow {
            n_links: n,
            n_points: traj.len(),
            residuals: ResidualStats::of(&results, workspace_extent(&robot)),
            total_time_s: median,
            mean_time_ms: 1e3 * median / traj.len() as f64,
            uncompensated_length_error_percent: 100.0 * (1.0 - 1.0 / drift_ratio(std::f64::consts::FRAC_PI_2, n)),
            uncompensated_tip_shift_mm: shift,
        });
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n_links as f64).collect();
    let ts: Vec<f64> = rows.iter().map(|r| r.total_time_s).collect();
    let mean = |r: &BenchRow| r.residuals.mean_residual_mm;
    let report = BenchReport {
        repeats,
        spearman_time_vs_links: spearman(&ns, &ts),
        accuracy_ratio: rows.iter().map(mean).fold(0.0, f64::max) / rows.iter().map(mean).fold(f64::INFINITY, f64::min),
        rows,
    };

    let mut w = csv::Writer::from_path(cfg.output("bench.csv")?)?;
    w.write_record([
        "n_links",
        "n_points",
        "mean_residual_mm",
        "max_residual_mm",
        "mean_residual_percent",
        "max_residual_percent",
        "mean_iterations",
        "total_time_s",
        "mean_time_ms",
        "uncompensated_length_error_percent",
        "uncompensated_tip_shift_mm",
    ])?;
    for r in &report.rows {
        let s = &r.residuals;
        w.write_record([
            r.n_links.to_string(),
            r.n_points.to_string(),
            num(s.mean_residual_mm),
            num(s.max_residual_mm),
            num(s.mean_residual_percent),
            num(s.max_residual_percent),
            num(s.mean_iterations),
            num(r.total_time_s),
            num(r.mean_time_ms),
            num(r.uncompensated_length_error_percent),
            num(r.uncompensated_tip_shift_mm),
        ])?;
    }
    w.flush()?;
    write_json(&cfg.output("bench.json")?, &report)?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidateSummary {
    pub points: usize,
    pub compensated: bool,
    pub tolerance: f64,
    /// Points whose deflection angle is undefined and was not compared.
    pub phi_excluded: usize,
    /// Points the closed form cannot invert within the segment limits.
    pub no_oracle: usize,
    pub failures: usize,
    /// Largest `(ΔL, θ, φ)` deviations.
    pub max_delta: [f64; 3],
    pub pass: bool,
}

/// The closed form reports planar bends to negative x as `φ = π`; the
/// planar solver writes them as negative `θ`.
fn planar_oracle(c: SegmentConfig) -> SegmentConfig {
    if c.phi.abs() > std::f64::consts::FRAC_PI_2 {
        SegmentConfig::new(c.delta_l, -c.theta, 0.0)
    } else {
        SegmentConfig::new(c.delta_l, c.theta, 0.0)
    }
}

/// Compares trajectory IK with the closed-form single-segment inverse.
/// Writes `validate.csv` and `validate.json`; any deviation above
/// [`ORACLE_TOLERANCE`] is a validation failure.
///
/// Without compensation the solver's extension is expected to differ from
/// the arc's by `L_arc (1/r − 1)` with `r` the drift ratio at the oracle's
/// bending angle; that shortfall is removed before comparing.
pub fn validate(cfg: &RunConfig) -> CliResult<ValidateSummary> {
    let robot = cfg.robot();
    if robot.segment_count() != 1 {
        return Err(CliError::bad_input(format!(
            "validation needs a single-segment robot, got {} segments",
            robot.segment_count()
        )));
    }
    if cfg.tip_angle_deg.is_some() {
        return Err(CliError::bad_input("validation does not take a tip angle"));
    }
    let spec = &robot.segments()[0];
    let traj = cfg.load_trajectory()?;
    let results = solve_trajectory(robot, &traj, SecondaryTask::None, &cfg.ik_settings())?;

    let mut w = csv::Writer::from_path(cfg.output("validate.csv")?)?;
    let mut header = vec!["index".to_string()];
    header.extend(xyz("target"));
    header.extend(
        [
            "ik_delta_l",
            "ik_theta",
            "ik_phi",
            "oracle_delta_l",
            "oracle_theta",
            "oracle_phi",
            "expected_delta_l_offset",
            "delta_delta_l",
            "delta_theta",
            "delta_phi",
            "phi_checked",
            "pass",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;

    let mut summary = ValidateSummary {
        points: results.len(),
        compensated: cfg.compensated,
        tolerance: ORACLE_TOLERANCE,
        phi_excluded: 0,
        no_oracle: 0,
        failures: 0,
        max_delta: [0.0; 3],
        pass: true,
    };
    for (k, r) in results.iter().enumerate() {
        let target = traj.robot_target(k, robot.planar());
        let ik = r.config.per_segment[0];
        let mut row = vec![k.to_string()];
        push_xyz(&mut row, &target);
        row.extend([num(ik.delta_l), num(ik.theta), num(ik.phi)]);
        let oracle = match analytic_ik_single(&target, spec) {
            Ok(c) => c,
            Err(PccError::Unreachable { .. } | PccError::OutOfRange { .. }) => {
                summary.no_oracle += 1;
                row.extend(std::iter::repeat_n(String::new(), 9));
                row.push("excluded".into());
                w.write_record(&row)?;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let oracle = if spec.planar { planar_oracle(oracle) } else { oracle };
        let offset = if cfg.compensated {
            0.0
        } else {
            (spec.rest_length + oracle.delta_l) * (1.0 / drift_ratio(oracle.theta, spec.links) - 1.0)
        };
        let shifted = SegmentConfig::new(oracle.delta_l + offset, oracle.theta, oracle.phi);
        let mut delta = oracle_deltas(&ik, &shifted);
        let phi_checked = spec.planar || oracle.theta.abs() >= PHI_DEGENERATE_BELOW;
        if !phi_checked {
            summary.phi_excluded += 1;
            delta[2] = 0.0;
        }
        let pass = delta.iter().all(|d| *d <= ORACLE_TOLERANCE);
        if !pass {
            summary.failures += 1;
        }
        for (m, d) in summary.max_delta.iter_mut().zip(delta) {
            *m = m.max(d);
        }
        row.extend([num(oracle.delta_l), num(oracle.theta), num(oracle.phi), num(offset)]);
        row.extend(delta.iter().map(|d| num(*d)));
        row.extend([phi_checked.to_string(), pass.to_string()]);
        w.write_record(&row)?;
    }
    w.flush()?;
    summary.pass = summary.failures == 0;
    write_json(&cfg.output("validate.json")?, &summary)?;
    if !summary.pass {
        return Err(CliError::Validation(format!(
            "{} of {} points deviate from the closed form by more than {ORACLE_TOLERANCE} (max {:?})",
            summary.failures, summary.points, summary.max_delta
        )));
    }
    Ok(summary)
}

/// Writes the trajectory to `trajectory.csv` in the output directory.
pub fn traj_gen(cfg: &RunConfig) -> CliResult<PathBuf> {
    let traj = cfg.load_trajectory()?;
    let path = cfg.output("trajectory.csv")?;
    write_trajectory(&path, &traj)?;
    Ok(path)
}
