//! Reference trajectories: generators for the circle and flower paths and an
//! arc-length resampler.
//!
//! Planar trajectories live in a 2D task plane `(X, Y)` and carry `z = 0`.
//! A planar arm bends in its x–z plane with the base axis along z, so the
//! task plane maps onto the arm as `X → z` (along the base axis) and
//! `Y → x` (lateral); see [`planar_to_robot`].

use std::f64::consts::TAU;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{PccError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    /// Nominal time stamp (s).
    pub t: f64,
    /// Target position (mm).
    pub target: Vector3<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub shape: String,
    pub parameters: Vec<(String, f64)>,
    /// Radius used as the denominator of tracking-error percentages (mm).
    pub characteristic_radius: f64,
    pub planar: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub meta: TrajectoryMeta,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    /// `X = cx + r cos u`, `Y = cy + r sin u` in the task plane.
    Circle2d { center: [f64; 2], radius: f64 },
    /// `X = r cos(ω t)`, `Y = r sin(ω t)`, `Z = height`.
    Circle3d { radius: f64, omega: f64, height: f64 },
    /// Four-petal curve `ρ = c + a cos 4u` at constant height.
    Flower {
        base_radius: f64,
        petal_amplitude: f64,
        height: f64,
    },
}

impl Shape {
    pub fn circle2d() -> Self {
        Shape::Circle2d {
            center: [175.0, 100.0],
            radius: 50.0,
        }
    }

    pub fn circle3d() -> Self {
        Shape::Circle3d {
            radius: 20.0,
            omega: 6.0,
            height: 60.0,
        }
    }

    pub fn flower() -> Self {
        Shape::Flower {
            base_radius: 40.0,
            petal_amplitude: 15.0,
            height: 60.0,
        }
    }

    /// Parses `circle2d`, `circle3d` or `flower` with default parameters.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "circle2d" => Ok(Self::circle2d()),
            "circle3d" => Ok(Self::circle3d()),
            "flower" => Ok(Self::flower()),
            other => Err(PccError::Trajectory(format!("unknown shape '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Shape::Circle2d { .. } => "circle2d",
            Shape::Circle3d { .. } => "circle3d",
            Shape::Flower { .. } => "flower",
        }
    }

    /// Duration of one period in the formula's own time base.
    pub fn natural_period(&self) -> f64 {
        match self {
            Shape::Circle3d { omega, .. } => TAU / omega.abs(),
            _ => TAU,
        }
    }

    fn characteristic_radius(&self) -> f64 {
        match *self {
            Shape::Circle2d { radius, .. } | Shape::Circle3d { radius, .. } => radius,
            Shape::Flower { base_radius, .. } => base_radius,
        }
    }

    fn parameters(&self) -> Vec<(String, f64)> {
        let named = |pairs: &[(&str, f64)]| pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        match *self {
            Shape::Circle2d { center, radius } => {
                named(&[("center_x", center[0]), ("center_y", center[1]), ("radius", radius)])
            }
            Shape::Circle3d { radius, omega, height } => {
                named(&[("radius", radius), ("omega", omega), ("height", height)])
            }
            Shape::Flower {
                base_radius,
                petal_amplitude,
                height,
            } => named(&[
                ("base_radius", base_radius),
                ("petal_amplitude", petal_amplitude),
                ("height", height),
            ]),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Shape::Circle2d { radius, .. } => radius > 0.0,
            Shape::Circle3d { radius, omega, .. } => radius > 0.0 && omega != 0.0,
            Shape::Flower {
                base_radius,
                petal_amplitude,
                ..
            } => base_radius > 0.0 && petal_amplitude.abs() < base_radius,
        };
        if ok {
            Ok(())
        } else {
            Err(PccError::Trajectory(format!("non-positive radius in {self:?}")))
        }
    }

    /// Position at phase `u ∈ [0, 2π]`.
    fn at_phase(&self, u: f64) -> Vector3<f64> {
        match *self {
            Shape::Circle2d { center, radius } => {
                Vector3::new(center[0] + radius * u.cos(), center[1] + radius * u.sin(), 0.0)
            }
            Shape::Circle3d { radius, height, .. } => Vector3::new(radius * u.cos(), radius * u.sin(), height),
            Shape::Flower {
                base_radius,
                petal_amplitude,
                height,
            } => {
                let rho = base_radius + petal_amplitude * (4.0 * u).cos();
                Vector3::new(rho * u.cos(), rho * u.sin(), height)
            }
        }
    }
}

/// Samples one full period of `shape` at `n_points` uniformly spaced phases,
/// endpoints included, with time stamps spread over `duration` seconds
/// (`None` uses the shape's own period).
pub fn generate(shape: Shape, n_points: usize, duration: Option<f64>) -> Result<Trajectory> {
    if n_points < 2 {
        return Err(PccError::Trajectory("need at least 2 points".into()));
    }
    shape.validate()?;
    let duration = duration.unwrap_or_else(|| shape.natural_period());
    if !(duration > 0.0) {
        return Err(PccError::Trajectory("duration must be positive".into()));
    }
    let last = (n_points - 1) as f64;
    let points = (0..n_points)
        .map(|k| {
            let frac = k as f64 / last;
            TrajectoryPoint {
                t: duration * frac,
                target: shape.at_phase(TAU * frac),
            }
        })
        .collect();
    Ok(Trajectory {
        points,
        meta: TrajectoryMeta {
            shape: shape.name().to_string(),
            parameters: shape.parameters(),
            characteristic_radius: shape.characteristic_radius(),
            planar: matches!(shape, Shape::Circle2d { .. }),
        },
    })
}

impl Trajectory {
    /// Builds a trajectory from raw points, checking time ordering.
    pub fn from_points(points: Vec<TrajectoryPoint>, meta: TrajectoryMeta) -> Result<Self> {
        let traj = Self { points, meta };
        traj.validate()?;
        Ok(traj)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(PccError::Trajectory(format!(
                "trajectory needs at least 2 points, got {}",
                self.points.len()
            )));
        }
        if self.points.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(PccError::Trajectory("time stamps must be strictly increasing".into()));
        }
        if self
            .points
            .iter()
            .any(|p| !p.t.is_finite() || p.target.iter().any(|v| !v.is_finite()))
        {
            return Err(PccError::Trajectory("non-finite trajectory value".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.t) - self.points.first().map_or(0.0, |p| p.t)
    }

    /// Target `k` expressed in the arm's base frame.
    pub fn robot_target(&self, k: usize, planar_robot: bool) -> Vector3<f64> {
        let p = self.points[k].target;
        if planar_robot {
            planar_to_robot(&p)
        } else {
            p
        }
    }

    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1].target - w[0].target).norm()).sum()
    }
}

/// Task-plane point `(X, Y)` to the planar arm's frame `(x, 0, z) = (Y, 0, X)`.
pub fn planar_to_robot(p: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(p.y, 0.0, p.x)
}

/// Inverse of [`planar_to_robot`].
pub fn robot_to_planar(p: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(p.z, p.x, 0.0)
}

/// Linear resampling to `n_points` evenly spaced in arc length; the first
/// and last points are kept exactly. Time stamps are interpolated alongside.
pub fn resample(trajectory: &Trajectory, n_points: usize) -> Result<Trajectory> {
    if n_points < 2 {
        return Err(PccError::Trajectory("need at least 2 points".into()));
    }
    let pts = &trajectory.points;
    let mut cumulative = Vec::with_capacity(pts.len());
    let mut acc = 0.0;
    cumulative.push(0.0);
    for w in pts.windows(2) {
        acc += (w[1].target - w[0].target).norm();
        cumulative.push(acc);
    }
    let total = acc;
    if !(total > 0.0) {
        return Err(PccError::Trajectory("cannot resample a zero-length trajectory".into()));
    }
    let mut out = Vec::with_capacity(n_points);
    let mut seg = 0;
    for k in 0..n_points {
        if k == 0 {
            out.push(pts[0]);
            continue;
        }
        if k == n_points - 1 {
            out.push(*pts.last().unwrap());
            continue;
        }
        let s = total * k as f64 / (n_points - 1) as f64;
        while seg + 1 < pts.len() - 1 && cumulative[seg + 1] < s {
            seg += 1;
        }
        let span = cumulative[seg + 1] - cumulative[seg];
        let frac = if span > 0.0 { (s - cumulative[seg]) / span } else { 0.0 };
        let (a, b) = (&pts[seg], &pts[seg + 1]);
        out.push(TrajectoryPoint {
            t: a.t + frac * (b.t - a.t),
            target: a.target + frac * (b.target - a.target),
        });
    }
    Ok(Trajectory {
        points: out,
        meta: trajectory.meta.clone(),
    })
}
