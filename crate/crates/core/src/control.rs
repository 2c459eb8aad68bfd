//! PD plus feedforward tracking control and the closed-loop simulation.
//!
//! The commanded acceleration is `q̈_cmd = kp (q_d − q) + kv (q̇_d − q̇)`,
//! with `q̇_d = q̈_d = 0` for the slow trajectories considered here. The
//! feedforward is always `K(q_d) + G(q_d)`.

use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::dynamics::{pressures_from_tau, robot_input_mapping, ActuationParams, DynState, DynamicsModel};
use crate::error::{PccError, Result};
use crate::geometry::{self, RobotSpec};
use crate::trajectory::Trajectory;

/// How the commanded acceleration enters the torque.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlLaw {
    /// `τ = q̈_cmd + K(q_d) + G(q_d)`.
    #[default]
    Direct,
    /// `τ = M(q) q̈_cmd + K(q_d) + G(q_d)`.
    InertiaWeighted,
}

/// Diagonal gains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    pub kp: Vec<f64>,
    pub kv: Vec<f64>,
    pub law: ControlLaw,
}

impl Gains {
    pub fn uniform(dof: usize, kp: f64, kv: f64, law: ControlLaw) -> Self {
        Self {
            kp: vec![kp; dof],
            kv: vec![kv; dof],
            law,
        }
    }

    pub fn validate(&self, dof: usize) -> Result<()> {
        if self.kp.len() != dof || self.kv.len() != dof {
            return Err(PccError::DimensionMismatch {
                expected: dof,
                actual: if self.kp.len() != dof {
                    self.kp.len()
                } else {
                    self.kv.len()
                },
            });
        }
        if self.kp.iter().any(|k| !(*k > 0.0) || !k.is_finite())
            || self.kv.iter().any(|k| !(*k >= 0.0) || !k.is_finite())
        {
            return Err(PccError::InvalidParameter("gains need kp > 0 and kv ≥ 0".into()));
        }
        Ok(())
    }
}

fn check_len(v: &DVector<f64>, dof: usize) -> Result<()> {
    if v.len() != dof {
        return Err(PccError::DimensionMismatch {
            expected: dof,
            actual: v.len(),
        });
    }
    Ok(())
}

/// Generalized force for the current state and setpoint.
pub fn control_law(
    model: &DynamicsModel,
    state: &DynState,
    q_d: &DVector<f64>,
    qdot_d: &DVector<f64>,
    gains: &Gains,
) -> Result<DVector<f64>> {
    let dof = model.dof();
    gains.validate(dof)?;
    check_len(&state.q, dof)?;
    check_len(&state.qdot, dof)?;
    check_len(q_d, dof)?;
    check_len(qdot_d, dof)?;
    let command = DVector::from_iterator(
        dof,
        (0..dof).map(|i| gains.kp[i] * (q_d[i] - state.q[i]) + gains.kv[i] * (qdot_d[i] - state.qdot[i])),
    );
    let feedback = match gains.law {
        ControlLaw::Direct => command,
        ControlLaw::InertiaWeighted => model.mass_matrix(&state.q)? * command,
    };
    Ok(feedback + model.stiffness_vector(q_d)? + model.gravity_vector(q_d)?)
}

/// Timed setpoints `q_d(t_k)` and the task-space targets they came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesiredStates {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    /// Robot-frame target per sample (mm).
    pub targets: Vec<Vector3<f64>>,
}

impl DesiredStates {
    pub fn validate(&self, dof: usize) -> Result<()> {
        let n = self.times.len();
        if n == 0 || self.states.len() != n || self.targets.len() != n {
            return Err(PccError::Trajectory(format!(
                "desired states need matching non-empty series ({n} times, {} states, {} targets)",
                self.states.len(),
                self.targets.len()
            )));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) || self.times.iter().any(|t| !t.is_finite()) {
            return Err(PccError::Trajectory(
                "desired time stamps must increase strictly".into(),
            ));
        }
        for q in &self.states {
            check_len(q, dof)?;
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.times.last().unwrap() - self.times[0]
    }

    /// Piecewise-linear interpolation, held constant outside the samples.
    pub fn sample(&self, t: f64) -> (DVector<f64>, Vector3<f64>) {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return (self.states[0].clone(), self.targets[0]);
        }
        if k == self.times.len() {
            return (self.states[k - 1].clone(), self.targets[k - 1]);
        }
        let w = (t - self.times[k - 1]) / (self.times[k] - self.times[k - 1]);
        (
            self.states[k - 1].lerp(&self.states[k], w),
            self.targets[k - 1].lerp(&self.targets[k], w),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSettings {
    /// Control update rate (Hz); the torque is held between updates.
    pub control_rate: f64,
    /// Integration step (s).
    pub dt: f64,
    /// Initial state; `None` starts at rest with `q = 0`.
    pub initial: Option<DynState>,
    /// Route the torque through bellows pressures when set.
    pub actuation: Option<ActuationParams>,
    /// Use drift-compensated kinematics for the tip.
    pub compensated: bool,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self {
            control_rate: 250.0,
            dt: crate::dynamics::DEFAULT_STEP,
            initial: None,
            actuation: None,
            compensated: true,
        }
    }
}

/// One row per control tick, recorded before the tick's torque is applied.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrackingTrace {
    pub t: Vec<f64>,
    pub q: Vec<DVector<f64>>,
    pub qdot: Vec<DVector<f64>>,
    pub q_d: Vec<DVector<f64>>,
    /// Torque actually applied.
    pub tau: Vec<DVector<f64>>,
    /// Bellows pressures; empty vectors in direct-torque mode.
    pub u: Vec<Vec<f64>>,
    pub tip: Vec<Vector3<f64>>,
    pub target: Vec<Vector3<f64>>,
    /// `‖tip − target‖` (mm).
    pub error: Vec<f64>,
    /// Ticks at which at least one pressure was clamped.
    pub clamp_events: usize,
}

impl TrackingTrace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Closed-loop run over the span of `desired`, one trace row per tick plus a
/// final row at the end time.
pub fn simulate_tracking(
    model: &DynamicsModel,
    desired: &DesiredStates,
    gains: &Gains,
    settings: &SimulationSettings,
) -> Result<TrackingTrace> {
    let robot = model.robot();
    let dof = model.dof();
    desired.validate(dof)?;
    gains.validate(dof)?;
    if !(settings.control_rate > 0.0 && settings.control_rate.is_finite()) {
        return Err(PccError::InvalidParameter("control rate must be positive".into()));
    }
    if !(settings.dt > 0.0 && settings.dt <= crate::dynamics::MAX_STEP) {
        return Err(PccError::InvalidParameter(format!(
            "step {} outside (0, {}]",
            settings.dt,
            crate::dynamics::MAX_STEP
        )));
    }
    let duration = desired.duration();
    if !(duration > 0.0) {
        return Err(PccError::Trajectory("simulation time must be positive".into()));
    }
    let mapping = match &settings.actuation {
        Some(params) => Some((robot_input_mapping(robot, params)?, params.p_max)),
        None => None,
    };

    let period = 1.0 / settings.control_rate;
    let ticks = (duration / period).ceil() as usize;
    let substeps = (period / settings.dt).ceil().max(1.0) as usize;
    let h = period / substeps as f64;
    let zero = DVector::zeros(dof);
    let mut state = settings.initial.clone().unwrap_or_else(|| DynState::rest(robot));
    state.check(robot)?;

    let t0 = desired.times[0];
    let mut trace = TrackingTrace::default();
    let record = |trace: &mut TrackingTrace,
                  t: f64,
                  state: &DynState,
                  q_d: DVector<f64>,
                  target: Vector3<f64>,
                  tau: DVector<f64>,
                  u: Vec<f64>|
     -> Result<()> {
        let tip = tip_of(robot, &state.q, settings.compensated)?;
        trace.t.push(t);
        trace.q.push(state.q.clone());
        trace.qdot.push(state.qdot.clone());
        trace.q_d.push(q_d);
        trace.tau.push(tau);
        trace.u.push(u);
        trace.error.push((tip - target).norm());
        trace.tip.push(tip);
        trace.target.push(target);
        Ok(())
    };

    for k in 0..=ticks {
        let t = t0 + (k as f64 * period).min(duration);
        let (q_d, target) = desired.sample(t);
        let command = control_law(model, &state, &q_d, &zero, gains)?;
        let (tau, u) = match &mapping {
            Some((hmat, p_max)) => {
                let sol = pressures_from_tau(hmat, &command, *p_max)?;
                if !sol.clamped.is_empty() {
                    trace.clamp_events += 1;
                }
                (DVector::from_vec(sol.realized), sol.pressures)
            }
            None => (command, Vec::new()),
        };
        record(&mut trace, t, &state, q_d, target, tau.clone(), u)?;
        if k == ticks {
            break;
        }
        for s in 0..substeps {
            state = model.step(&state, &tau, h).map_err(|e| match e {
                PccError::IntegrationFailure { reason, q, qdot, .. } => PccError::IntegrationFailure {
                    time: t + s as f64 * h,
                    reason: format!("tick {k}: {reason}"),
                    q,
                    qdot,
                },
                other => other,
            })?;
            if let Err(e) = state.check(robot) {
                return Err(PccError::IntegrationFailure {
                    time: t + (s + 1) as f64 * h,
                    reason: format!("tick {k}: {e}"),
                    q: state.q.iter().copied().collect(),
                    qdot: state.qdot.iter().copied().collect(),
                });
            }
        }
    }
    Ok(trace)
}

fn tip_of(robot: &RobotSpec, q: &DVector<f64>, compensated: bool) -> Result<Vector3<f64>> {
    let config = crate::dynamics::config_from_state(q, robot)?;
    Ok(geometry::tip_position(robot, &config, compensated))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackingMetrics {
    /// Mean error over the whole run (mm).
    pub mean: f64,
    /// Largest error over the whole run (mm).
    pub max: f64,
    /// Largest error after the transient (mm).
    pub steady_state: f64,
    /// Mean error after the transient (mm).
    pub steady_state_mean: f64,
    pub characteristic_length: f64,
    pub mean_percent: f64,
    pub max_percent: f64,
    pub steady_state_percent: f64,
    /// Start of the steady-state window (s).
    pub transient_end: f64,
}

/// Task-space error of `trace` against `reference`, evaluated at the trace
/// time stamps. Percentages use the reference's characteristic radius.
pub fn tracking_error_metrics(
    trace: &TrackingTrace,
    reference: &Trajectory,
    planar_robot: bool,
    transient_fraction: f64,
) -> Result<TrackingMetrics> {
    if trace.is_empty() {
        return Err(PccError::InvalidParameter("empty trace".into()));
    }
    if !(0.0..0.5).contains(&transient_fraction) {
        return Err(PccError::InvalidParameter(format!(
            "transient fraction {transient_fraction} outside [0, 0.5)"
        )));
    }
    reference.validate()?;
    let times: Vec<f64> = reference.points.iter().map(|p| p.t).collect();
    let targets: Vec<Vector3<f64>> = (0..reference.len())
        .map(|k| reference.robot_target(k, planar_robot))
        .collect();
    let target_at = |t: f64| {
        let k = times.partition_point(|&s| s <= t);
        if k == 0 {
            targets[0]
        } else if k == times.len() {
            targets[k - 1]
        } else {
            let w = (t - times[k - 1]) / (times[k] - times[k - 1]);
            targets[k - 1].lerp(&targets[k], w)
        }
    };
    let errors: Vec<f64> = trace
        .t
        .iter()
        .zip(&trace.tip)
        .map(|(&t, tip)| (tip - target_at(t)).norm())
        .collect();
    let start = trace.t[0];
    let transient_end = start + transient_fraction * (trace.t[trace.len() - 1] - start);
    let steady: Vec<f64> = trace
        .t
        .iter()
        .zip(&errors)
        .filter(|(t, _)| **t >= transient_end)
        .map(|(_, e)| *e)
        .collect();
    let radius = reference.meta.characteristic_radius;
    if !(radius > 0.0) {
        return Err(PccError::Trajectory("characteristic radius must be positive".into()));
    }
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    let max = errors.iter().cloned().fold(0.0, f64::max);
    let steady_state = steady.iter().cloned().fold(0.0, f64::max);
    let steady_state_mean = steady.iter().sum::<f64>() / steady.len().max(1) as f64;
    Ok(TrackingMetrics {
        mean,
        max,
        steady_state,
        steady_state_mean,
        characteristic_length: radius,
        mean_percent: 100.0 * mean / radius,
        max_percent: 100.0 * max / radius,
        steady_state_percent: 100.0 * steady_state / radius,
        transient_end,
    })
}

/// Desired states from IK configurations at the trajectory's time stamps.
pub fn desired_from_configs(
    robot: &RobotSpec,
    trajectory: &Trajectory,
    configs: &[geometry::ConfigVector],
) -> Result<DesiredStates> {
    if configs.len() != trajectory.len() {
        return Err(PccError::DimensionMismatch {
            expected: trajectory.len(),
            actual: configs.len(),
        });
    }
    let states = configs
        .iter()
        .map(|c| crate::dynamics::state_from_config(c, robot))
        .collect::<Result<Vec<_>>>()?;
    Ok(DesiredStates {
        times: trajectory.points.iter().map(|p| p.t).collect(),
        states,
        targets: (0..trajectory.len())
            .map(|k| trajectory.robot_target(k, robot.planar()))
            .collect(),
    })
}
