//! Rigid-link piecewise-constant-curvature kinematics.
//!
//! Each segment is an arc of constant curvature replaced by `n` equal links.
//! Link `j` (1-based) of a segment points along the arc tangent at the link's
//! midpoint, i.e. at bending angle `(2j - 1) θ / (2n)`, rotated about the
//! segment base z axis by the deflection angle `φ`. The orientation handed to
//! segment `i` is the ordered product of `Rz(φ_k) Ry(θ_k)` over every `k < i`.
//!
//! A chain of `n` links of length `ℓ` whose joints lie on a circle spans an
//! arc of length `n ℓ · drift_ratio(θ, n)`. Compensated kinematics therefore
//! shortens each link to `(L + ΔL) / (n · drift_ratio)` so that every joint,
//! and the tip in particular, lands exactly on the constant-curvature arc of
//! length `L + ΔL`.

use std::f64::consts::PI;

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{PccError, Result};

/// Below this bending angle the arc is treated as straight.
pub const SMALL_ANGLE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    /// Rest length `L` in mm.
    pub rest_length: f64,
    /// Number of rigid links `n`.
    pub links: usize,
    /// `[ΔL_min, ΔL_max]` in mm.
    pub delta_l_bounds: [f64; 2],
    /// `[θ_min, θ_max]` in rad.
    pub theta_bounds: [f64; 2],
    pub planar: bool,
}

impl SegmentSpec {
    /// Segment with the default limits: ΔL in [-0.2 L, 0.5 L], θ in [0, π]
    /// (or [-π, π] when planar).
    pub fn new(rest_length: f64, links: usize, planar: bool) -> Self {
        let theta_bounds = if planar { [-PI, PI] } else { [0.0, PI] };
        Self {
            rest_length,
            links,
            delta_l_bounds: [-0.2 * rest_length, 0.5 * rest_length],
            theta_bounds,
            planar,
        }
    }

    pub fn with_delta_l_bounds(mut self, min: f64, max: f64) -> Self {
        self.delta_l_bounds = [min, max];
        self
    }

    pub fn with_theta_bounds(mut self, min: f64, max: f64) -> Self {
        self.theta_bounds = [min, max];
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(PccError::InvalidRobot(msg));
        if self.links < 1 {
            return bad("segment needs at least one link".into());
        }
        if !(self.rest_length > 0.0) || !self.rest_length.is_finite() {
            return bad(format!("rest length must be positive, got {}", self.rest_length));
        }
        let [dl_min, dl_max] = self.delta_l_bounds;
        if !(dl_min > -self.rest_length) || !(dl_max >= dl_min) || !dl_max.is_finite() {
            return bad(format!(
                "extension bounds [{dl_min}, {dl_max}] invalid for rest length {}",
                self.rest_length
            ));
        }
        let [t_min, t_max] = self.theta_bounds;
        if !t_min.is_finite() || !t_max.is_finite() || t_min > t_max || t_max > PI {
            return bad(format!("bending bounds [{t_min}, {t_max}] invalid"));
        }
        if !self.planar && t_min < 0.0 {
            return bad("3D segments carry the bending direction in φ; θ_min must be ≥ 0".into());
        }
        Ok(())
    }

    /// Number of optimization variables contributed by this segment.
    pub fn dof(&self) -> usize {
        if self.planar {
            2
        } else {
            3
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    segments: Vec<SegmentSpec>,
    /// Gravity acceleration in mm/s².
    gravity: [f64; 3],
    /// Number of pneumatic bellows per segment.
    bellows: usize,
    /// Mass of each segment in g.
    masses: Vec<f64>,
}

/// Per-segment mass of the reference arm (g).
pub const DEFAULT_SEGMENT_MASS: f64 = 17.3;
/// Rest length of the reference arm (mm).
pub const DEFAULT_REST_LENGTH: f64 = 64.4;
/// Standard gravity in mm/s².
pub const STANDARD_GRAVITY: f64 = 9806.65;

impl RobotSpec {
    pub fn new(segments: Vec<SegmentSpec>, masses: Vec<f64>, gravity: [f64; 3], bellows: usize) -> Result<Self> {
        let robot = Self {
            segments,
            gravity,
            bellows,
            masses,
        };
        robot.validate()?;
        Ok(robot)
    }

    /// `count` identical segments of the reference arm, gravity along -z.
    pub fn uniform(count: usize, links: usize, planar: bool) -> Result<Self> {
        Self::new(
            vec![SegmentSpec::new(DEFAULT_REST_LENGTH, links, planar); count],
            vec![DEFAULT_SEGMENT_MASS; count],
            [0.0, 0.0, -STANDARD_GRAVITY],
            3,
        )
    }

    fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(PccError::InvalidRobot("robot needs at least one segment".into()));
        }
        for seg in &self.segments {
            seg.validate()?;
        }
        let planar = self.segments[0].planar;
        if self.segments.iter().any(|s| s.planar != planar) {
            return Err(PccError::InvalidRobot("planar flag must be uniform".into()));
        }
        if self.masses.len() != self.segments.len() {
            return Err(PccError::InvalidRobot(format!(
                "{} masses for {} segments",
                self.masses.len(),
                self.segments.len()
            )));
        }
        if self.masses.iter().any(|m| !(*m > 0.0)) {
            return Err(PccError::InvalidRobot("segment masses must be positive".into()));
        }
        if self.bellows < 1 {
            return Err(PccError::InvalidRobot("bellows count must be positive".into()));
        }
        if self.gravity.iter().any(|g| !g.is_finite()) {
            return Err(PccError::InvalidRobot("gravity must be finite".into()));
        }
        Ok(())
    }

    pub fn segments(&self) -> &[SegmentSpec] {
        &self.segments
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn planar(&self) -> bool {
        self.segments[0].planar
    }

    pub fn gravity(&self) -> Vector3<f64> {
        Vector3::from(self.gravity)
    }

    pub fn bellows(&self) -> usize {
        self.bellows
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Total number of IK variables.
    pub fn dof(&self) -> usize {
        self.segments.iter().map(SegmentSpec::dof).sum()
    }

    pub fn with_gravity(mut self, gravity: [f64; 3]) -> Self {
        self.gravity = gravity;
        self
    }

    /// Same robot with every segment discretized into `links` links.
    pub fn with_links(&self, links: usize) -> Result<Self> {
        let mut robot = self.clone();
        for seg in &mut robot.segments {
            seg.links = links;
        }
        robot.validate()?;
        Ok(robot)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SegmentConfig {
    /// Extension ΔL in mm.
    pub delta_l: f64,
    /// Bending angle θ in rad.
    pub theta: f64,
    /// Deflection angle φ in rad.
    pub phi: f64,
}

impl SegmentConfig {
    pub fn new(delta_l: f64, theta: f64, phi: f64) -> Self {
        Self { delta_l, theta, phi }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigVector {
    pub per_segment: Vec<SegmentConfig>,
}

impl ConfigVector {
    pub fn new(per_segment: Vec<SegmentConfig>) -> Self {
        Self { per_segment }
    }

    /// Straight, unextended configuration.
    pub fn zeros(segments: usize) -> Self {
        Self {
            per_segment: vec![SegmentConfig::default(); segments],
        }
    }

    pub fn len(&self) -> usize {
        self.per_segment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_segment.is_empty()
    }

    pub fn check(&self, robot: &RobotSpec) -> Result<()> {
        if self.len() != robot.segment_count() {
            return Err(PccError::DimensionMismatch {
                expected: robot.segment_count(),
                actual: self.len(),
            });
        }
        Ok(())
    }

    /// Flatten into the optimizer layout: `(ΔL, θ)` per planar segment,
    /// `(ΔL, θ, φ)` per 3D segment.
    pub fn to_vars(&self, robot: &RobotSpec) -> Vec<f64> {
        let mut out = Vec::with_capacity(robot.dof());
        for (cfg, seg) in self.per_segment.iter().zip(robot.segments()) {
            out.push(cfg.delta_l);
            out.push(cfg.theta);
            if !seg.planar {
                out.push(cfg.phi);
            }
        }
        out
    }

    pub fn from_vars(vars: &[f64], robot: &RobotSpec) -> Self {
        let mut per_segment = Vec::with_capacity(robot.segment_count());
        let mut k = 0;
        for seg in robot.segments() {
            let phi = if seg.planar { 0.0 } else { vars[k + 2] };
            per_segment.push(SegmentConfig::new(vars[k], vars[k + 1], phi));
            k += seg.dof();
        }
        Self { per_segment }
    }

    pub fn total_bending(&self) -> f64 {
        self.per_segment.iter().map(|c| c.theta).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose3 {
    pub position: Vector3<f64>,
    /// Tangent frame; its z column is the backbone tangent.
    pub frame: Rotation3<f64>,
}

impl Pose3 {
    pub fn origin() -> Self {
        Self {
            position: Vector3::zeros(),
            frame: Rotation3::identity(),
        }
    }

    pub fn x(&self) -> f64 {
        self.position.x
    }
    pub fn y(&self) -> f64 {
        self.position.y
    }
    pub fn z(&self) -> f64 {
        self.position.z
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainPose {
    pub tip: Pose3,
    pub segment_ends: Vec<Pose3>,
}

/// Ratio between the length of a constant-curvature arc and the summed
/// length of `n` equal chords inscribed in it.
///
/// Equals `θ / (n sqrt(2 - 2 cos(θ / n)))`, evaluated as `x / sin x` with
/// `x = |θ| / (2n)`.
pub fn drift_ratio(theta: f64, n: usize) -> f64 {
    let n = n.max(1) as f64;
    if theta.abs() < SMALL_ANGLE {
        return 1.0;
    }
    let x = theta.abs() / (2.0 * n);
    x / x.sin()
}

/// `(1 - cos θ) / θ` with its series below the small-angle threshold.
pub(crate) fn versine_over(theta: f64) -> f64 {
    if theta.abs() < SMALL_ANGLE {
        theta / 2.0
    } else {
        (1.0 - theta.cos()) / theta
    }
}

/// `sin θ / θ` with its series below the small-angle threshold.
pub(crate) fn sinc(theta: f64) -> f64 {
    if theta.abs() < SMALL_ANGLE {
        1.0 - theta * theta / 6.0
    } else {
        theta.sin() / theta
    }
}

/// Exact endpoint of a constant-curvature arc of length `length` bent by
/// `theta` towards deflection `phi`, in the segment base frame.
pub fn arc_endpoint(length: f64, theta: f64, phi: f64) -> Vector3<f64> {
    let radial = length * versine_over(theta);
    Vector3::new(radial * phi.cos(), radial * phi.sin(), length * sinc(theta))
}

fn segment_rotation(cfg: &SegmentConfig) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vector3::z_axis(), cfg.phi) * Rotation3::from_axis_angle(&Vector3::y_axis(), cfg.theta)
}

fn link_length(seg: &SegmentSpec, cfg: &SegmentConfig, links: usize, compensated: bool) -> f64 {
    let length = (seg.rest_length + cfg.delta_l) / links as f64;
    if compensated {
        length / drift_ratio(cfg.theta, links)
    } else {
        length
    }
}

/// Walks the rigid-link chain and calls `visit(segment, link, joint_start,
/// joint_end)` for every link. `links_override` replaces each segment's own
/// link count. Returns the tip pose and the per-segment end poses.
pub(crate) fn walk_chain<F>(
    robot: &RobotSpec,
    config: &ConfigVector,
    compensated: bool,
    links_override: Option<usize>,
    mut visit: F,
) -> ChainPose
where
    F: FnMut(usize, usize, &Vector3<f64>, &Vector3<f64>),
{
    let mut frame = Rotation3::identity();
    let mut position = Vector3::zeros();
    let mut segment_ends = Vec::with_capacity(robot.segment_count());
    for (i, (seg, cfg)) in robot.segments().iter().zip(&config.per_segment).enumerate() {
        let n = links_override.unwrap_or(seg.links);
        let ell = link_length(seg, cfg, n, compensated);
        let (sin_phi, cos_phi) = cfg.phi.sin_cos();
        for j in 1..=n {
            let a = (2 * j - 1) as f64 * cfg.theta / (2 * n) as f64;
            let (sa, ca) = a.sin_cos();
            let local = Vector3::new(cos_phi * sa, sin_phi * sa, ca);
            let next = position + frame * (ell * local);
            visit(i, j, &position, &next);
            position = next;
        }
        frame *= segment_rotation(cfg);
        segment_ends.push(Pose3 { position, frame });
    }
    ChainPose {
        tip: Pose3 { position, frame },
        segment_ends,
    }
}

/// Tip position only; the inner loop of the IK solver.
pub fn tip_position(robot: &RobotSpec, config: &ConfigVector, compensated: bool) -> Vector3<f64> {
    let mut frame = Rotation3::identity();
    let mut position = Vector3::zeros();
    for (seg, cfg) in robot.segments().iter().zip(&config.per_segment) {
        let n = seg.links;
        let ell = link_length(seg, cfg, n, compensated);
        let mut sum_sin = 0.0;
        let mut sum_cos = 0.0;
        for j in 1..=n {
            let a = (2 * j - 1) as f64 * cfg.theta / (2 * n) as f64;
            let (sa, ca) = a.sin_cos();
            sum_sin += sa;
            sum_cos += ca;
        }
        let (sin_phi, cos_phi) = cfg.phi.sin_cos();
        let local = Vector3::new(cos_phi * sum_sin, sin_phi * sum_sin, sum_cos) * ell;
        position += frame * local;
        frame *= segment_rotation(cfg);
    }
    position
}

pub fn forward_kinematics(robot: &RobotSpec, config: &ConfigVector, compensated: bool) -> Result<ChainPose> {
    config.check(robot)?;
    Ok(walk_chain(robot, config, compensated, None, |_, _, _, _| {}))
}

/// Joint positions of the rigid-link chain: the base origin, then the end of
/// every link in order.
pub fn link_joints(robot: &RobotSpec, config: &ConfigVector, compensated: bool) -> Result<Vec<Vector3<f64>>> {
    config.check(robot)?;
    let mut joints = Vec::with_capacity(1 + robot.segments().iter().map(|s| s.links).sum::<usize>());
    joints.push(Vector3::zeros());
    walk_chain(robot, config, compensated, None, |_, _, _, end| joints.push(*end));
    Ok(joints)
}

/// Backbone poses of the compensated chain with `samples_per_segment` joints
/// per segment, starting at the base origin. Every returned point lies on the
/// constant-curvature arc, evenly spaced in arc length within each segment.
pub fn backbone_points(robot: &RobotSpec, config: &ConfigVector, samples_per_segment: usize) -> Result<Vec<Pose3>> {
    config.check(robot)?;
    if samples_per_segment < 1 {
        return Err(PccError::InvalidParameter(
            "samples_per_segment must be at least 1".into(),
        ));
    }
    let n = samples_per_segment;
    let mut points = Vec::with_capacity(robot.segment_count() * n + 1);
    points.push(Pose3::origin());
    let mut base_frame = Rotation3::identity();
    walk_chain(robot, config, true, Some(n), |i, j, _, end| {
        let cfg = &config.per_segment[i];
        let partial = SegmentConfig::new(cfg.delta_l, cfg.theta * j as f64 / n as f64, cfg.phi);
        points.push(Pose3 {
            position: *end,
            frame: base_frame * segment_rotation(&partial),
        });
        if j == n {
            base_frame *= segment_rotation(cfg);
        }
    });
    Ok(points)
}

/// Closed-form inversion of a single constant-curvature segment.
pub fn analytic_ik_single(target: &Vector3<f64>, spec: &SegmentSpec) -> Result<SegmentConfig> {
    let (x, y, z) = (target.x, target.y, target.z);
    let rho = x.hypot(y);
    let dist = target.norm();
    if dist == 0.0 || (rho <= 1e-12 * dist && z <= 0.0) {
        return Err(PccError::Unreachable { x, y, z });
    }
    let raw = if rho <= 1e-12 * dist {
        SegmentConfig::new(z - spec.rest_length, 0.0, 0.0)
    } else {
        let theta = 2.0 * rho.atan2(z);
        // Circle through the base, tangent to z: radius (ρ² + z²) / (2ρ).
        let length = theta * (rho * rho + z * z) / (2.0 * rho);
        SegmentConfig::new(length - spec.rest_length, theta, y.atan2(x))
    };
    let [t_min, t_max] = spec.theta_bounds;
    let [dl_min, dl_max] = spec.delta_l_bounds;
    if raw.theta < t_min || raw.theta > t_max {
        return Err(PccError::OutOfRange {
            raw,
            reason: format!("θ = {} outside [{t_min}, {t_max}]", raw.theta),
        });
    }
    if raw.delta_l < dl_min || raw.delta_l > dl_max {
        return Err(PccError::OutOfRange {
            raw,
            reason: format!("ΔL = {} outside [{dl_min}, {dl_max}]", raw.delta_l),
        });
    }
    Ok(raw)
}

/// Maximum straight reach `Σ (L_i + ΔL_max,i)`; the denominator of every
/// percentage error.
pub fn workspace_extent(robot: &RobotSpec) -> f64 {
    robot
        .segments()
        .iter()
        .map(|s| s.rest_length + s.delta_l_bounds[1])
        .sum()
}

/// Wraps an angle into (-π, π].
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// `(ΔL, θ)` per planar segment and `(ΔL, θ cos φ̄, θ sin φ̄)` per 3D segment,
/// with `φ̄_i = Σ_{j≤i} φ_j` the deflection direction in the untwisted base
/// frame. The chain is smooth in these coordinates, including where a segment
/// passes through straight and `φ` is undefined.
pub fn posture_coordinates(robot: &RobotSpec, config: &ConfigVector) -> Vec<f64> {
    let mut out = Vec::with_capacity(robot.dof());
    let mut heading = 0.0;
    for (c, seg) in config.per_segment.iter().zip(robot.segments()) {
        out.push(c.delta_l);
        if seg.planar {
            out.push(c.theta);
        } else {
            heading += c.phi;
            out.extend([c.theta * heading.cos(), c.theta * heading.sin()]);
        }
    }
    out
}

/// Inverse of [`posture_coordinates`]. A straight segment keeps the previous
/// heading (φ = 0). Segment limits are not applied.
pub fn config_from_posture(robot: &RobotSpec, vars: &[f64]) -> ConfigVector {
    let mut per_segment = Vec::with_capacity(robot.segment_count());
    let mut heading = 0.0;
    let mut k = 0;
    for seg in robot.segments() {
        let delta_l = vars[k];
        if seg.planar {
            per_segment.push(SegmentConfig::new(delta_l, vars[k + 1], 0.0));
            k += 2;
            continue;
        }
        let (u, v) = (vars[k + 1], vars[k + 2]);
        let theta = u.hypot(v);
        let mut phi = 0.0;
        if theta > 0.0 {
            let direction = v.atan2(u);
            phi = wrap_angle(direction - heading);
            heading = direction;
        }
        per_segment.push(SegmentConfig::new(delta_l, theta, phi));
        k += 3;
    }
    ConfigVector::new(per_segment)
}
