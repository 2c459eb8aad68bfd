//! Rigid-link PCC dynamics, `M q̈ + C q̇ + G + K + D = τ`.
//!
//! State per segment is `[ε, k_x, k_y]` (3D) or `[ε, k]` (planar), with
//! `ε = ΔL/l₀` and curvatures in 1/mm. Curvatures are expressed in each
//! segment's untwisted base frame. Units are mm, g and s throughout, so
//! forces are in g·mm/s².

pub mod actuation;
pub mod elastic;
pub mod inertia;

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{PccError, Result};
use crate::geometry::{self, ConfigVector, RobotSpec};

pub use actuation::{
    bellows_angles, input_mapping, matrix_rank, pressures_from_tau, robot_input_mapping, ActuationParams,
    PressureSolution,
};
pub use elastic::{elastic_potential, stiffness_vector, StiffnessParams};
pub use inertia::{
    coriolis_matrix, coriolis_vector, gravitational_potential, gravity_vector, mass_matrix, mass_matrix_derivatives,
    mass_points, point_masses, position_jacobian,
};

/// Largest accepted integration step (s).
pub const MAX_STEP: f64 = 0.01;
pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynState {
    pub q: DVector<f64>,
    pub qdot: DVector<f64>,
}

impl DynState {
    pub fn rest(robot: &RobotSpec) -> Self {
        Self {
            q: DVector::zeros(robot.dof()),
            qdot: DVector::zeros(robot.dof()),
        }
    }

    pub fn check(&self, robot: &RobotSpec) -> Result<()> {
        check_state(robot, &self.q)?;
        check_velocity(robot, &self.qdot)
    }
}

/// Index range of each segment's coordinates.
pub(crate) fn segment_slices(robot: &RobotSpec) -> Vec<Range<usize>> {
    let mut start = 0;
    robot
        .segments()
        .iter()
        .map(|seg| {
            let r = start..start + seg.dof();
            start = r.end;
            r
        })
        .collect()
}

pub(crate) fn check_velocity(robot: &RobotSpec, qdot: &DVector<f64>) -> Result<()> {
    if qdot.len() != robot.dof() {
        return Err(PccError::DimensionMismatch {
            expected: robot.dof(),
            actual: qdot.len(),
        });
    }
    if qdot.iter().any(|v| !v.is_finite()) {
        return Err(PccError::InvalidState("non-finite velocity".into()));
    }
    Ok(())
}

pub(crate) fn check_state(robot: &RobotSpec, q: &DVector<f64>) -> Result<()> {
    if q.len() != robot.dof() {
        return Err(PccError::DimensionMismatch {
            expected: robot.dof(),
            actual: q.len(),
        });
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(PccError::InvalidState("non-finite state".into()));
    }
    for range in segment_slices(robot) {
        if q[range.start] <= -1.0 {
            return Err(PccError::InvalidState(format!("strain {} ≤ -1", q[range.start])));
        }
    }
    Ok(())
}

pub fn state_from_config(config: &ConfigVector, robot: &RobotSpec) -> Result<DVector<f64>> {
    config.check(robot)?;
    let posture = geometry::posture_coordinates(robot, config);
    let mut q = DVector::zeros(robot.dof());
    for (seg, range) in robot.segments().iter().zip(segment_slices(robot)) {
        let length = seg.rest_length + posture[range.start];
        if !(length > 0.0) {
            return Err(PccError::InvalidState(format!("segment length {length} ≤ 0")));
        }
        q[range.start] = posture[range.start] / seg.rest_length;
        for i in range.start + 1..range.end {
            q[i] = posture[i] / length;
        }
    }
    Ok(q)
}

pub fn config_from_state(q: &DVector<f64>, robot: &RobotSpec) -> Result<ConfigVector> {
    check_state(robot, q)?;
    Ok(config_from_state_unchecked(robot, q.as_slice()))
}

pub(crate) fn config_from_state_unchecked(robot: &RobotSpec, q: &[f64]) -> ConfigVector {
    let mut posture = vec![0.0; q.len()];
    for (seg, range) in robot.segments().iter().zip(segment_slices(robot)) {
        let length = seg.rest_length * (1.0 + q[range.start]);
        posture[range.start] = seg.rest_length * q[range.start];
        for i in range.start + 1..range.end {
            posture[i] = length * q[i];
        }
    }
    geometry::config_from_posture(robot, &posture)
}

/// Diagonal Rayleigh damping, `D = R q̇`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DampingParams {
    pub diagonal: Vec<f64>,
}

impl DampingParams {
    pub fn uniform(dof: usize, value: f64) -> Self {
        Self {
            diagonal: vec![value; dof],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.diagonal.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(PccError::InvalidParameter(
                "damping entries must be finite and ≥ 0".into(),
            ));
        }
        Ok(())
    }
}

pub fn damping_vector(params: &DampingParams, qdot: &DVector<f64>) -> Result<DVector<f64>> {
    if qdot.len() != params.diagonal.len() {
        return Err(PccError::DimensionMismatch {
            expected: params.diagonal.len(),
            actual: qdot.len(),
        });
    }
    Ok(DVector::from_iterator(
        qdot.len(),
        qdot.iter().zip(&params.diagonal).map(|(v, r)| v * r),
    ))
}

/// Robot plus elastic and damping parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsModel {
    robot: RobotSpec,
    stiffness: StiffnessParams,
    damping: DampingParams,
}

/// Every term of the equation of motion at one state.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelTerms {
    pub mass: DMatrix<f64>,
    /// `C(q, q̇) q̇`.
    pub coriolis: DVector<f64>,
    pub gravity: DVector<f64>,
    pub stiffness: DVector<f64>,
    pub damping: DVector<f64>,
}

impl DynamicsModel {
    pub fn new(robot: RobotSpec, stiffness: StiffnessParams, damping: DampingParams) -> Result<Self> {
        stiffness.validate()?;
        damping.validate()?;
        if damping.diagonal.len() != robot.dof() {
            return Err(PccError::DimensionMismatch {
                expected: robot.dof(),
                actual: damping.diagonal.len(),
            });
        }
        Ok(Self {
            robot,
            stiffness,
            damping,
        })
    }

    /// Default stiffness and `R = 0.1·I`.
    pub fn with_defaults(robot: RobotSpec) -> Self {
        let damping = DampingParams::uniform(robot.dof(), 0.1);
        Self {
            robot,
            stiffness: StiffnessParams::default(),
            damping,
        }
    }

    pub fn robot(&self) -> &RobotSpec {
        &self.robot
    }

    pub fn stiffness_params(&self) -> &StiffnessParams {
        &self.stiffness
    }

    pub fn damping_params(&self) -> &DampingParams {
        &self.damping
    }

    pub fn dof(&self) -> usize {
        self.robot.dof()
    }

    pub fn mass_matrix(&self, q: &DVector<f64>) -> Result<DMatrix<f64>> {
        mass_matrix(&self.robot, q)
    }

    pub fn coriolis_matrix(&self, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<DMatrix<f64>> {
        coriolis_matrix(&self.robot, q, qdot)
    }

    pub fn gravity_vector(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        gravity_vector(&self.robot, q)
    }

    pub fn stiffness_vector(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        stiffness_vector(&self.robot, q, &self.stiffness)
    }

    pub fn elastic_potential(&self, q: &DVector<f64>) -> Result<f64> {
        elastic_potential(&self.robot, q, &self.stiffness)
    }

    pub fn gravitational_potential(&self, q: &DVector<f64>) -> Result<f64> {
        gravitational_potential(&self.robot, q)
    }

    pub fn kinetic_energy(&self, state: &DynState) -> Result<f64> {
        let m = self.mass_matrix(&state.q)?;
        Ok(0.5 * state.qdot.dot(&(m * &state.qdot)))
    }

    /// Kinetic plus elastic plus gravitational energy.
    pub fn total_energy(&self, state: &DynState) -> Result<f64> {
        Ok(self.kinetic_energy(state)? + self.elastic_potential(&state.q)? + self.gravitational_potential(&state.q)?)
    }

    /// All terms sharing one Jacobian evaluation.
    pub fn terms(&self, state: &DynState) -> Result<ModelTerms> {
        state.check(&self.robot)?;
        let j = inertia::position_jacobian(&self.robot, &state.q);
        Ok(ModelTerms {
            mass: inertia::mass_with_jacobian(&self.robot, &j),
            coriolis: inertia::coriolis_with_jacobian(&self.robot, &state.q, &state.qdot, &j),
            gravity: inertia::gravity_with_jacobian(&self.robot, &j),
            stiffness: self.stiffness_vector(&state.q)?,
            damping: damping_vector(&self.damping, &state.qdot)?,
        })
    }

    /// `q̈ = M⁻¹(τ − C q̇ − G − K − D)`.
    pub fn acceleration(&self, state: &DynState, tau: &DVector<f64>) -> Result<DVector<f64>> {
        if tau.len() != self.dof() {
            return Err(PccError::DimensionMismatch {
                expected: self.dof(),
                actual: tau.len(),
            });
        }
        let failure = |reason: &str| PccError::IntegrationFailure {
            time: f64::NAN,
            reason: reason.to_string(),
            q: state.q.as_slice().to_vec(),
            qdot: state.qdot.as_slice().to_vec(),
        };
        let t = self.terms(state).map_err(|e| failure(&e.to_string()))?;
        let rhs = tau - t.coriolis - t.gravity - t.stiffness - t.damping;
        let qddot = t
            .mass
            .cholesky()
            .ok_or_else(|| failure("mass matrix not positive definite"))?
            .solve(&rhs);
        if qddot.iter().any(|v| !v.is_finite()) {
            return Err(failure("non-finite acceleration"));
        }
        Ok(qddot)
    }

    /// One classical Runge–Kutta step with `τ` held constant. Failures carry
    /// the offending state; their `time` is NaN and left to the caller.
    pub fn step(&self, state: &DynState, tau: &DVector<f64>, dt: f64) -> Result<DynState> {
        if !(dt > 0.0 && dt <= MAX_STEP) {
            return Err(PccError::InvalidParameter(format!("step {dt} outside (0, {MAX_STEP}]")));
        }
        state.check(&self.robot)?;
        let shifted = |base: &DynState, dq: &DVector<f64>, dv: &DVector<f64>, h: f64| DynState {
            q: &base.q + dq * h,
            qdot: &base.qdot + dv * h,
        };
        let a1 = self.acceleration(state, tau)?;
        let v1 = state.qdot.clone();
        let s2 = shifted(state, &v1, &a1, 0.5 * dt);
        let a2 = self.acceleration(&s2, tau)?;
        let v2 = s2.qdot.clone();
        let s3 = shifted(state, &v2, &a2, 0.5 * dt);
        let a3 = self.acceleration(&s3, tau)?;
        let v3 = s3.qdot.clone();
        let s4 = shifted(state, &v3, &a3, dt);
        let a4 = self.acceleration(&s4, tau)?;
        let v4 = s4.qdot;
        Ok(DynState {
            q: &state.q + (v1 + 2.0 * v2 + 2.0 * v3 + v4) * (dt / 6.0),
            qdot: &state.qdot + (a1 + 2.0 * a2 + 2.0 * a3 + a4) * (dt / 6.0),
        })
    }
}
