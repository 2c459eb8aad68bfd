//! Browser bindings for a planar soft arm: click-to-reach IK, the rigid-link
//! chain with and without drift compensation, and the drift error curve.
//!
//! All positions are millimetres in the arm's bending plane, `x` lateral and
//! `z` along the base axis. Point lists are flat `[x0, z0, x1, z1, …]`.

use nalgebra::Vector3;
use pcc_core::geometry::{backbone_points, drift_ratio, link_joints, workspace_extent, ConfigVector, RobotSpec};
use pcc_core::ik::{solve_point, IkSettings, IkStatus, SecondaryTask};
use wasm_bindgen::prelude::*;

const BACKBONE_SAMPLES: usize = 24;
pub const MAX_SEGMENTS: usize = 6;
pub const MAX_LINKS: usize = 60;

#[wasm_bindgen]
pub struct PlanarArm {
    robot: RobotSpec,
    config: ConfigVector,
    tip_angle: Option<f64>,
    status: IkStatus,
    residual: f64,
}

fn flatten(points: impl Iterator<Item = Vector3<f64>>) -> Vec<f64> {
    points.flat_map(|p| [p.x, p.z]).collect()
}

#[wasm_bindgen]
impl PlanarArm {
    /// A straight arm of identical 64.4 mm segments.
    #[wasm_bindgen(constructor)]
    pub fn new(segments: usize, links: usize) -> Result<PlanarArm, String> {
        if !(1..=MAX_SEGMENTS).contains(&segments) || !(1..=MAX_LINKS).contains(&links) {
            return Err(format!("need 1..={MAX_SEGMENTS} segments and 1..={MAX_LINKS} links"));
        }
        let robot = RobotSpec::uniform(segments, links, true).map_err(|e| e.to_string())?;
        Ok(Self {
            config: ConfigVector::zeros(segments),
            robot,
            tip_angle: None,
            status: IkStatus::Converged,
            residual: 0.0,
        })
    }

    /// Changes the link count of every segment, keeping the configuration.
    pub fn set_links(&mut self, links: usize) -> Result<(), String> {
        if !(1..=MAX_LINKS).contains(&links) {
            return Err(format!("need 1..={MAX_LINKS} links"));
        }
        self.robot = self.robot.with_links(links).map_err(|e| e.to_string())?;
        Ok(())
    }

    /// Tip angle to hold while reaching, in degrees; `NaN` releases it.
    pub fn set_tip_angle(&mut self, degrees: f64) {
        self.tip_angle = degrees.is_finite().then(|| degrees.to_radians());
    }

    /// Solves for the target warm-started from the current pose and adopts
    /// the result. Returns the remaining tip error.
    pub fn reach(&mut self, x: f64, z: f64) -> Result<f64, String> {
        let task = match self.tip_angle {
            Some(theta_d) => SecondaryTask::TipAngle { theta_d },
            None => SecondaryTask::None,
        };
        let target = Vector3::new(x, 0.0, z);
        let r =
            solve_point(&self.robot, &target, &self.config, task, &IkSettings::default()).map_err(|e| e.to_string())?;
        if r.status != IkStatus::NumericalFailure {
            self.config = r.config;
        }
        self.status = r.status;
        self.residual = r.residual;
        Ok(r.residual)
    }

    /// `converged`, `max_iter`, `infeasible_secondary` or `numerical_failure`.
    pub fn status(&self) -> String {
        self.status.as_str().to_string()
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Rigid-link joints from the base.
    pub fn joints(&self, compensated: bool) -> Vec<f64> {
        let joints = link_joints(&self.robot, &self.config, compensated).expect("configuration matches robot");
        flatten(joints.into_iter())
    }

    /// Points on the constant-curvature backbone.
    pub fn backbone(&self) -> Vec<f64> {
        let points = backbone_points(&self.robot, &self.config, BACKBONE_SAMPLES).expect("configuration matches robot");
        flatten(points.into_iter().map(|p| p.position))
    }

    /// `[ΔL, θ]` per segment.
    pub fn config(&self) -> Vec<f64> {
        self.config
            .per_segment
            .iter()
            .flat_map(|c| [c.delta_l, c.theta])
            .collect()
    }

    /// Length of the fully extended straight arm.
    pub fn reach_extent(&self) -> f64 {
        workspace_extent(&self.robot)
    }

    pub fn links(&self) -> usize {
        self.robot.segments()[0].links
    }
}

/// Length error of an uncompensated segment bent by `theta`, in percent, for
/// `n = 1..=max_links`.
#[wasm_bindgen]
pub fn drift_curve(theta: f64, max_links: usize) -> Vec<f64> {
    (1..=max_links)
        .map(|n| 100.0 * (1.0 - 1.0 / drift_ratio(theta, n)))
        .collect()
}
