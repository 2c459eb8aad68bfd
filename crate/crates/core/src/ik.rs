//! Warm-started inverse kinematics over the rigid-link chain.
//!
//! The primary task minimizes the squared tip error inside the segment
//! limits. 3D segments are optimized in posture coordinates (extension and
//! bending vector), so passing through a straight segment is not a boundary.
//! A position solve that stalls short of the target is retried from a few
//! fixed half-bent postures. A planar tip-angle task is layered on top as a
//! weighted penalty and only kept when the position task is still met;
//! otherwise the position-only solution is returned.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{PccError, Result};
use crate::geometry::{self, config_from_posture, posture_coordinates, ConfigVector, RobotSpec, SegmentConfig};
use crate::optimize::{constrained_minimize, Bounds, Equality, MinimizeSettings, Termination};
use crate::timing::Stopwatch;
use crate::trajectory::Trajectory;

/// Cold restarts after a failed warm-started position solve.
const RESTARTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IkSettings {
    /// Tip error accepted as solved (mm).
    pub position_tolerance: f64,
    pub gradient_tolerance: f64,
    pub step_tolerance: f64,
    pub max_iterations: usize,
    /// Penalty weight of the secondary task.
    pub secondary_weight: f64,
    /// Relative step of the central-difference Jacobian.
    pub finite_difference_step: f64,
    /// Use drift-compensated link lengths.
    pub compensated: bool,
}

impl Default for IkSettings {
    fn default() -> Self {
        Self {
            position_tolerance: 1e-6,
            gradient_tolerance: 1e-10,
            step_tolerance: 1e-12,
            max_iterations: 200,
            secondary_weight: 1e3,
            finite_difference_step: 1e-7,
            compensated: true,
        }
    }
}

impl IkSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.position_tolerance,
            self.gradient_tolerance,
            self.step_tolerance,
            self.secondary_weight,
            self.finite_difference_step,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) || self.max_iterations < 1 {
            return Err(PccError::InvalidParameter(format!("invalid solver settings {self:?}")));
        }
        Ok(())
    }

    fn minimize_settings(&self, penalty_weight: f64) -> MinimizeSettings {
        MinimizeSettings {
            value_tolerance: self.position_tolerance * self.position_tolerance,
            gradient_tolerance: self.gradient_tolerance,
            step_tolerance: self.step_tolerance,
            max_iterations: self.max_iterations,
            penalty_weight,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum SecondaryTask {
    #[default]
    None,
    /// Hold the planar tip angle `Σ θ_i` at `theta_d` (rad).
    TipAngle { theta_d: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IkStatus {
    Converged,
    /// Stopped without meeting the position tolerance.
    MaxIter,
    /// Position met, secondary task dropped.
    InfeasibleSecondary,
    NumericalFailure,
}

impl IkStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            IkStatus::Converged => "converged",
            IkStatus::MaxIter => "max_iter",
            IkStatus::InfeasibleSecondary => "infeasible_secondary",
            IkStatus::NumericalFailure => "numerical_failure",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IkResult {
    pub config: ConfigVector,
    /// Tip position reached by `config`, robot frame (mm).
    pub achieved: Vector3<f64>,
    /// Tip error norm (mm).
    pub residual: f64,
    /// `|θ_d - Σθ_i|` when a tip-angle task was requested.
    pub secondary_residual: Option<f64>,
    pub iterations: usize,
    pub status: IkStatus,
    /// Wall-clock solve time (s).
    pub solve_time: f64,
    /// Objective of the accepted stage evaluated at the warm start.
    pub start_objective: f64,
    /// Objective of the accepted stage at the returned configuration.
    pub final_objective: f64,
}

/// `θ_d - Σ θ_i`; only defined for planar configurations (every φ = 0).
pub fn tip_angle_residual(config: &ConfigVector, theta_d: f64) -> Result<f64> {
    if config.per_segment.iter().any(|c| c.phi != 0.0) {
        return Err(PccError::NonPlanar);
    }
    Ok(theta_d - config.total_bending())
}

/// Feasible set of the optimizer variables: a box on ΔL and planar θ, and an
/// annulus `θ_min ≤ |(u, v)| ≤ θ_max` on each 3D bending pair.
pub fn variable_bounds(robot: &RobotSpec) -> Bounds {
    let mut lower = Vec::with_capacity(robot.dof());
    let mut upper = Vec::with_capacity(robot.dof());
    let mut annuli = Vec::new();
    for seg in robot.segments() {
        lower.push(seg.delta_l_bounds[0]);
        upper.push(seg.delta_l_bounds[1]);
        let [lo, hi] = seg.theta_bounds;
        if seg.planar {
            lower.push(lo);
            upper.push(hi);
        } else {
            annuli.push((lower.len(), lo, hi));
            lower.extend([-hi, -hi]);
            upper.extend([hi, hi]);
        }
    }
    annuli.into_iter().fold(Bounds::new(lower, upper), |b, (u, lo, hi)| {
        b.with_radial(u, u + 1, lo, hi)
    })
}

/// Fixed half-bent starts tried when the warm start ends in a local minimum.
fn restart_postures(robot: &RobotSpec) -> Vec<Vec<f64>> {
    (0..RESTARTS)
        .map(|k| {
            let config = ConfigVector::new(
                robot
                    .segments()
                    .iter()
                    .enumerate()
                    .map(|(i, seg)| {
                        let [lo, hi] = seg.theta_bounds;
                        if seg.planar {
                            let flip = (k >> (i % 2)) & 1 == 1;
                            SegmentConfig::new(0.0, if flip { lo / 2.0 } else { hi / 2.0 }, 0.0)
                        } else {
                            let phi = std::f64::consts::FRAC_PI_2 * (k + i) as f64;
                            SegmentConfig::new(0.0, (lo + hi) / 2.0, phi)
                        }
                    })
                    .collect(),
            );
            posture_coordinates(robot, &config)
        })
        .collect()
}

/// Squared tip error with a central-difference Jacobian of the tip.
struct TipObjective<'a> {
    robot: &'a RobotSpec,
    target: Vector3<f64>,
    compensated: bool,
    fd_step: f64,
    probe: Vec<f64>,
}

impl<'a> TipObjective<'a> {
    fn new(robot: &'a RobotSpec, target: Vector3<f64>, settings: &IkSettings) -> Self {
        Self {
            robot,
            target,
            compensated: settings.compensated,
            fd_step: settings.finite_difference_step,
            probe: vec![0.0; robot.dof()],
        }
    }

    fn tip(&self, x: &[f64]) -> Vector3<f64> {
        geometry::tip_position(self.robot, &config_from_posture(self.robot, x), self.compensated)
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.tip(x) - self.target).norm_squared()
    }

    fn evaluate(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        let r = self.tip(x) - self.target;
        self.probe.copy_from_slice(x);
        for i in 0..x.len() {
            let h = self.fd_step * (1.0 + x[i].abs());
            self.probe[i] = x[i] + h;
            let plus = self.tip(&self.probe);
            self.probe[i] = x[i] - h;
            let minus = self.tip(&self.probe);
            self.probe[i] = x[i];
            let column = (plus - minus) / (2.0 * h);
            grad[i] = 2.0 * column.dot(&r);
        }
        r.norm_squared()
    }
}

/// Squared tip error at posture coordinates `x` and its central-difference
/// gradient, exactly as the solver sees them.
pub fn objective_gradient(
    robot: &RobotSpec,
    target: &Vector3<f64>,
    x: &[f64],
    settings: &IkSettings,
) -> Result<(f64, Vec<f64>)> {
    if x.len() != robot.dof() {
        return Err(PccError::DimensionMismatch {
            expected: robot.dof(),
            actual: x.len(),
        });
    }
    let mut grad = vec![0.0; x.len()];
    let value = TipObjective::new(robot, *target, settings).evaluate(x, &mut grad);
    Ok((value, grad))
}

/// Solves one target, warm-started from `warm_start`.
pub fn solve_point(
    robot: &RobotSpec,
    target: &Vector3<f64>,
    warm_start: &ConfigVector,
    task: SecondaryTask,
    settings: &IkSettings,
) -> Result<IkResult> {
    let clock = Stopwatch::start();
    warm_start.check(robot)?;
    settings.validate()?;
    if target.iter().any(|v| !v.is_finite()) {
        return Err(PccError::InvalidParameter("target must be finite".into()));
    }
    if matches!(task, SecondaryTask::TipAngle { .. }) && !robot.planar() {
        return Err(PccError::NonPlanar);
    }

    let bounds = variable_bounds(robot);
    let mut objective = TipObjective::new(robot, *target, settings);
    let x0 = posture_coordinates(robot, warm_start);
    let start_position = objective.value(&x0);
    let tol = settings.position_tolerance;
    let mut stage1 = constrained_minimize(
        |x: &[f64], g: &mut [f64]| objective.evaluate(x, g),
        &x0,
        &bounds,
        &[],
        &settings.minimize_settings(0.0),
    );
    let mut iterations = stage1.iterations;
    for start in restart_postures(robot) {
        if stage1.termination == Termination::NumericalFailure || stage1.value <= tol * tol {
            break;
        }
        let retry = constrained_minimize(
            |x: &[f64], g: &mut [f64]| objective.evaluate(x, g),
            &start,
            &bounds,
            &[],
            &settings.minimize_settings(0.0),
        );
        iterations += retry.iterations;
        if retry.termination != Termination::NumericalFailure && retry.value < stage1.value {
            stage1 = retry;
        }
    }

    let finish = |x: &[f64], iterations, status, start, end, secondary: Option<f64>| {
        let mut config = config_from_posture(robot, x);
        for (c, seg) in config.per_segment.iter_mut().zip(robot.segments()) {
            // radial projection can overshoot the limit by an ulp
            c.theta = c.theta.clamp(seg.theta_bounds[0], seg.theta_bounds[1]);
        }
        let achieved = geometry::tip_position(robot, &config, settings.compensated);
        IkResult {
            residual: (achieved - target).norm(),
            achieved,
            secondary_residual: secondary.map(|theta_d| (theta_d - config.total_bending()).abs()),
            config,
            iterations,
            status,
            solve_time: clock.elapsed_secs(),
            start_objective: start,
            final_objective: end,
        }
    };

    if stage1.termination == Termination::NumericalFailure {
        return Ok(finish(
            &stage1.x,
            iterations,
            IkStatus::NumericalFailure,
            start_position,
            stage1.value,
            None,
        ));
    }
    let stage1_residual = objective.value(&stage1.x).sqrt();
    let stage1_status = if stage1_residual <= tol {
        IkStatus::Converged
    } else {
        IkStatus::MaxIter
    };

    let SecondaryTask::TipAngle { theta_d } = task else {
        return Ok(finish(
            &stage1.x,
            iterations,
            stage1_status,
            start_position,
            stage1.value,
            None,
        ));
    };

    // θ variables sit at the second slot of every planar segment.
    let thetas: Vec<usize> = (0..robot.segment_count()).map(|i| 2 * i + 1).collect();
    let angle = |x: &[f64], g: &mut [f64]| {
        g.iter_mut().for_each(|v| *v = 0.0);
        let mut sum = 0.0;
        for &i in &thetas {
            sum += x[i];
            g[i] = -1.0;
        }
        theta_d - sum
    };
    let equalities: [Equality; 1] = [&angle];
    let penalized_at = |x: &[f64], objective: &TipObjective| {
        let mut g = vec![0.0; x.len()];
        objective.value(x) + settings.secondary_weight * angle(x, &mut g).powi(2)
    };
    let start_penalized = penalized_at(&x0, &objective);

    // Prefer continuing from the warm start (keeps the posture sequence
    // smooth); fall back to the position-only solution.
    for start in [x0.as_slice(), stage1.x.as_slice()] {
        let stage2 = constrained_minimize(
            |x: &[f64], g: &mut [f64]| objective.evaluate(x, g),
            start,
            &bounds,
            &equalities,
            &settings.minimize_settings(settings.secondary_weight),
        );
        iterations += stage2.iterations;
        if stage2.termination != Termination::NumericalFailure && objective.value(&stage2.x).sqrt() <= tol {
            return Ok(finish(
                &stage2.x,
                iterations,
                IkStatus::Converged,
                start_penalized,
                stage2.value,
                Some(theta_d),
            ));
        }
    }

    let status = if stage1_status == IkStatus::Converged {
        IkStatus::InfeasibleSecondary
    } else {
        stage1_status
    };
    Ok(finish(
        &stage1.x,
        iterations,
        status,
        start_position,
        stage1.value,
        Some(theta_d),
    ))
}

/// Solves every trajectory point in order, each warm-started from the
/// previous accepted configuration; the first starts straight.
pub fn solve_trajectory(
    robot: &RobotSpec,
    trajectory: &Trajectory,
    task: SecondaryTask,
    settings: &IkSettings,
) -> Result<Vec<IkResult>> {
    if trajectory.is_empty() {
        return Err(PccError::Trajectory("empty trajectory".into()));
    }
    let mut warm = ConfigVector::zeros(robot.segment_count());
    let mut results = Vec::with_capacity(trajectory.len());
    for k in 0..trajectory.len() {
        let target = trajectory.robot_target(k, robot.planar());
        let result = solve_point(robot, &target, &warm, task, settings)?;
        warm = result.config.clone();
        results.push(result);
    }
    Ok(results)
}

/// Per-variable step statistics between consecutive solutions.
///
/// Steps are taken in [`geometry::posture_coordinates`], which stay
/// continuous when a segment passes through straight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Smoothness {
    pub max_step: Vec<f64>,
    pub median_step: Vec<f64>,
    /// Largest `max / median` over the variables; medians below the floor
    /// are raised to it so constant variables do not dominate.
    pub worst_ratio: f64,
}

pub const SMOOTHNESS_FLOOR: f64 = 1e-6;

pub fn smoothness(robot: &RobotSpec, results: &[IkResult]) -> Smoothness {
    let dof = robot.dof();
    let mut steps = vec![Vec::with_capacity(results.len()); dof];
    for w in results.windows(2) {
        let a = posture_coordinates(robot, &w[0].config);
        let b = posture_coordinates(robot, &w[1].config);
        for i in 0..dof {
            steps[i].push((b[i] - a[i]).abs());
        }
    }
    let mut max_step = Vec::with_capacity(dof);
    let mut median_step = Vec::with_capacity(dof);
    let mut worst: f64 = 0.0;
    for mut s in steps {
        if s.is_empty() {
            max_step.push(0.0);
            median_step.push(0.0);
            continue;
        }
        s.sort_by(f64::total_cmp);
        let median = s[s.len() / 2];
        let max = *s.last().unwrap();
        worst = worst.max(max / median.max(SMOOTHNESS_FLOOR));
        max_step.push(max);
        median_step.push(median);
    }
    Smoothness {
        max_step,
        median_step,
        worst_ratio: worst,
    }
}

/// Compares the IK solution for a single segment against the closed-form
/// inverse, returning `(ΔL, θ, φ)` absolute deltas.
pub fn oracle_deltas(ik: &SegmentConfig, analytic: &SegmentConfig) -> [f64; 3] {
    [
        (ik.delta_l - analytic.delta_l).abs(),
        (ik.theta - analytic.theta).abs(),
        geometry::wrap_angle(ik.phi - analytic.phi).abs(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{SegmentSpec, STANDARD_GRAVITY};
    use crate::trajectory::{generate, Shape, TrajectoryMeta, TrajectoryPoint};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn single() -> RobotSpec {
        RobotSpec::uniform(1, 6, false).unwrap()
    }

    #[test]
    fn tip_angle_residual_examples() {
        let cfg = |t: [f64; 4]| ConfigVector::new(t.iter().map(|&th| SegmentConfig::new(0.0, th, 0.0)).collect());
        assert_eq!(tip_angle_residual(&cfg([0.0; 4]), 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            tip_angle_residual(&cfg([PI / 12.0, PI / 12.0, 0.0, 0.0]), PI / 6.0).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            tip_angle_residual(&cfg([PI / 6.0, PI / 6.0, 0.0, 0.0]), PI / 6.0).unwrap(),
            -PI / 6.0,
            epsilon = 1e-15
        );
        let bent = ConfigVector::new(vec![SegmentConfig::new(0.0, 0.2, 0.3)]);
        assert_eq!(tip_angle_residual(&bent, 0.0), Err(PccError::NonPlanar));
    }

    #[test]
    fn pure_extension() {
        let robot = single();
        let seg = &robot.segments()[0];
        let half = seg.delta_l_bounds[1] / 2.0;
        let target = Vector3::new(0.0, 0.0, seg.rest_length + half);
        let tight = IkSettings {
            position_tolerance: 1e-10,
            ..Default::default()
        };
        let r = solve_point(&robot, &target, &ConfigVector::zeros(1), SecondaryTask::None, &tight).unwrap();
        assert_eq!(r.status, IkStatus::Converged);
        assert!(r.residual <= 1e-9, "{}", r.residual);
        assert_abs_diff_eq!(r.config.per_segment[0].delta_l, half, epsilon = 1e-9);
        assert_abs_diff_eq!(r.config.per_segment[0].theta, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn off_axis_target_from_straight_start() {
        // target on the -y side: unreachable for a naive local search at φ = 0
        let robot = single();
        let target = geometry::arc_endpoint(70.0, 1.1, -2.4);
        let r = solve_point(
            &robot,
            &target,
            &ConfigVector::zeros(1),
            SecondaryTask::None,
            &IkSettings::default(),
        )
        .unwrap();
        assert_eq!(r.status, IkStatus::Converged);
        let c = r.config.per_segment[0];
        assert_abs_diff_eq!(c.theta, 1.1, epsilon = 1e-6);
        assert_abs_diff_eq!(c.phi, -2.4, epsilon = 1e-6);
        assert_abs_diff_eq!(c.delta_l, 70.0 - 64.4, epsilon = 1e-6);
    }

    #[test]
    fn unreachable_target_reports_shortfall() {
        let robot = single();
        let reach = geometry::workspace_extent(&robot);
        let target = Vector3::new(0.0, 0.0, reach + 25.0);
        let r = solve_point(
            &robot,
            &target,
            &ConfigVector::zeros(1),
            SecondaryTask::None,
            &IkSettings::default(),
        )
        .unwrap();
        assert_eq!(r.status, IkStatus::MaxIter);
        assert_abs_diff_eq!(r.residual, 25.0, epsilon = 1e-6);
    }

    #[test]
    fn tip_angle_rejected_for_3d_robot() {
        let err = solve_point(
            &single(),
            &Vector3::new(0.0, 0.0, 60.0),
            &ConfigVector::zeros(1),
            SecondaryTask::TipAngle { theta_d: 0.1 },
            &IkSettings::default(),
        );
        assert_eq!(err.unwrap_err(), PccError::NonPlanar);
    }

    #[test]
    fn warm_start_mismatch_rejected() {
        let err = solve_point(
            &single(),
            &Vector3::z(),
            &ConfigVector::zeros(3),
            SecondaryTask::None,
            &IkSettings::default(),
        );
        assert!(matches!(err, Err(PccError::DimensionMismatch { .. })));
    }

    #[test]
    fn infeasible_secondary_keeps_position() {
        // Single planar segment: the tip angle is fixed by the target, so any
        // other θ_d is infeasible.
        let robot = RobotSpec::new(
            vec![SegmentSpec::new(64.4, 6, true)],
            vec![17.3],
            [0.0, 0.0, -STANDARD_GRAVITY],
            3,
        )
        .unwrap();
        let target = geometry::arc_endpoint(70.0, 0.8, 0.0);
        let r = solve_point(
            &robot,
            &target,
            &ConfigVector::zeros(1),
            SecondaryTask::TipAngle { theta_d: -0.5 },
            &IkSettings::default(),
        )
        .unwrap();
        assert_eq!(r.status, IkStatus::InfeasibleSecondary);
        assert!(r.residual <= 1e-6);
        assert_abs_diff_eq!(r.secondary_residual.unwrap(), 1.3, epsilon = 1e-5);
    }

    #[test]
    fn constant_trajectory_needs_no_iterations_after_first() {
        let robot = single();
        let target = geometry::arc_endpoint(72.0, 0.9, 0.7);
        let meta = TrajectoryMeta {
            shape: "constant".into(),
            parameters: vec![],
            characteristic_radius: 1.0,
            planar: false,
        };
        let points = (0..10).map(|k| TrajectoryPoint { t: k as f64, target }).collect();
        let traj = Trajectory::from_points(points, meta).unwrap();
        let results = solve_trajectory(&robot, &traj, SecondaryTask::None, &IkSettings::default()).unwrap();
        for r in &results[1..] {
            assert!(r.iterations <= 1);
            assert_eq!(r.config, results[0].config);
        }
    }

    #[test]
    fn trajectory_results_respect_bounds() {
        let robot = single();
        let traj = generate(Shape::flower(), 200, None).unwrap();
        let results = solve_trajectory(&robot, &traj, SecondaryTask::None, &IkSettings::default()).unwrap();
        let bounds = variable_bounds(&robot);
        for r in &results {
            assert_eq!(r.status, IkStatus::Converged);
            assert!(bounds.contains(&posture_coordinates(&robot, &r.config)));
            let phi = r.config.per_segment[0].phi;
            assert!(phi > -PI && phi <= PI);
            assert!(r.final_objective <= r.start_objective);
        }
    }

    #[test]
    fn uncompensated_solution_is_short_by_drift_ratio() {
        let robot = single();
        let length = 75.0;
        let theta = 1.2;
        let target = geometry::arc_endpoint(length, theta, 0.5);
        let settings = IkSettings {
            compensated: false,
            ..Default::default()
        };
        let r = solve_point(&robot, &target, &ConfigVector::zeros(1), SecondaryTask::None, &settings).unwrap();
        let c = r.config.per_segment[0];
        assert_abs_diff_eq!(c.theta, theta, epsilon = 1e-6);
        let solved_length = 64.4 + c.delta_l;
        assert_abs_diff_eq!(solved_length, length / geometry::drift_ratio(theta, 6), epsilon = 1e-5);
    }

    #[test]
    fn smoothness_of_uniform_steps() {
        let robot = single();
        let result = |config| IkResult {
            config,
            achieved: Vector3::zeros(),
            residual: 0.0,
            secondary_residual: None,
            iterations: 0,
            status: IkStatus::Converged,
            solve_time: 0.0,
            start_objective: 0.0,
            final_objective: 0.0,
        };
        let results: Vec<IkResult> = (0..5)
            .map(|k| {
                result(ConfigVector::new(vec![SegmentConfig::new(
                    k as f64,
                    0.1 * k as f64,
                    0.3,
                )]))
            })
            .collect();
        let s = smoothness(&robot, &results);
        assert_abs_diff_eq!(s.max_step[0], 1.0);
        assert_abs_diff_eq!(s.median_step[1], 0.1 * 0.3f64.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.worst_ratio, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn smoothness_ignores_chart_switch_through_straight() {
        let robot = RobotSpec::uniform(2, 6, false).unwrap();
        let result = |a: f64, phi1: f64, phi2: f64| IkResult {
            config: ConfigVector::new(vec![
                SegmentConfig::new(0.0, a, phi1),
                SegmentConfig::new(0.0, 0.5, phi2),
            ]),
            achieved: Vector3::zeros(),
            residual: 0.0,
            secondary_residual: None,
            iterations: 0,
            status: IkStatus::Converged,
            solve_time: 0.0,
            start_objective: 0.0,
            final_objective: 0.0,
        };
        // segment 1 bends through straight; its φ and the next φ flip by π
        let results = vec![
            result(0.02, 0.4, 0.1),
            result(0.01, 0.4, 0.1),
            result(0.0, 0.4, 0.1),
            result(0.01, 0.4 + PI, 0.1 - PI),
            result(0.02, 0.4 + PI, 0.1 - PI),
        ];
        let s = smoothness(&robot, &results);
        assert!(s.worst_ratio <= 1.0 + 1e-9, "{}", s.worst_ratio);
    }

    #[test]
    fn posture_round_trip_keeps_tip() {
        let robot = RobotSpec::uniform(3, 6, false).unwrap();
        let cfg = ConfigVector::new(vec![
            SegmentConfig::new(3.0, 0.0, 0.7),
            SegmentConfig::new(-2.0, 0.9, 0.2),
            SegmentConfig::new(1.0, 0.4, -2.9),
        ]);
        let back = config_from_posture(&robot, &posture_coordinates(&robot, &cfg));
        // the straight segment's twist moves into the next φ
        assert_eq!(back.per_segment[0].phi, 0.0);
        assert_abs_diff_eq!(back.per_segment[1].phi, 0.9, epsilon = 1e-12);
        let a = geometry::tip_position(&robot, &cfg, true);
        let b = geometry::tip_position(&robot, &back, true);
        assert!((a - b).norm() < 1e-12);
    }
}
