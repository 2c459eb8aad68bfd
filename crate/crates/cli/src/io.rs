//! Trajectory sources and CSV files.
//!
//! Trajectory CSV files carry a mandatory header naming the columns `t`, `x`,
//! `y` and optionally `z`, in any order. A file without `z` is planar.

use std::fs::File;
use std::path::Path;

use nalgebra::Vector3;
use pcc_core::geometry::{tip_position, ConfigVector, RobotSpec, SegmentConfig};
use pcc_core::trajectory::{generate, resample, robot_to_planar, Shape, Trajectory, TrajectoryMeta, TrajectoryPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};
use crate::format::num;

/// Default number of points for generated trajectories.
pub const DEFAULT_POINTS: usize = 1150;

/// Smallest bending angle of a random target, away from the degenerate
/// straight pose.
pub const RANDOM_MIN_BEND: f64 = 0.02;

#[derive(Clone, Debug, PartialEq)]
pub enum TrajectorySource {
    Shape(Shape),
    /// `N` targets reached by random configurations of the robot.
    Random(usize),
    File(std::path::PathBuf),
}

impl TrajectorySource {
    /// `shape:<name>`, `random:<N>` or a file path.
    pub fn parse(text: &str) -> CliResult<Self> {
        if let Some(name) = text.strip_prefix("shape:") {
            Ok(Self::Shape(Shape::by_name(name)?))
        } else if let Some(n) = text.strip_prefix("random:") {
            let n = n
                .parse()
                .map_err(|_| CliError::bad_input(format!("'{n}' is not a point count")))?;
            Ok(Self::Random(n))
        } else {
            Ok(Self::File(text.into()))
        }
    }

    /// Builds the trajectory. `points` resamples files and sizes generated
    /// trajectories; `duration` applies to generated ones only.
    pub fn load(
        &self,
        robot: &RobotSpec,
        points: Option<usize>,
        duration: Option<f64>,
        seed: u64,
    ) -> CliResult<Trajectory> {
        match self {
            Self::Shape(shape) => Ok(generate(*shape, points.unwrap_or(DEFAULT_POINTS), duration)?),
            Self::Random(n) => {
                if points.is_some() {
                    return Err(CliError::bad_input("--points does not apply to random:N"));
                }
                random_targets(robot, *n, duration, seed)
            }
            Self::File(path) => {
                if duration.is_some() {
                    return Err(CliError::bad_input("--duration applies to generated trajectories only"));
                }
                let traj = read_trajectory(path)?;
                match points {
                    Some(n) => Ok(resample(&traj, n)?),
                    None => Ok(traj),
                }
            }
        }
    }
}

/// Mean distance of the targets from their centroid.
pub fn mean_radius(points: &[TrajectoryPoint]) -> f64 {
    let n = points.len().max(1) as f64;
    let centroid = points.iter().fold(Vector3::zeros(), |acc, p| acc + p.target) / n;
    points.iter().map(|p| (p.target - centroid).norm()).sum::<f64>() / n
}

/// `n` targets at the compensated tips of uniformly random configurations,
/// one per time unit unless `duration` spreads them. Bending angles stay at
/// least [`RANDOM_MIN_BEND`] from straight.
pub fn random_targets(robot: &RobotSpec, n: usize, duration: Option<f64>, seed: u64) -> CliResult<Trajectory> {
    Ok(random_configs(robot, n, duration, seed)?.1)
}

/// Like [`random_targets`] and also returns the generating configurations.
pub fn random_configs(
    robot: &RobotSpec,
    n: usize,
    duration: Option<f64>,
    seed: u64,
) -> CliResult<(Vec<ConfigVector>, Trajectory)> {
    if n < 2 {
        return Err(CliError::bad_input("random trajectories need at least 2 points"));
    }
    let step = match duration {
        Some(d) if !(d > 0.0) => return Err(CliError::bad_input("duration must be positive")),
        Some(d) => d / (n - 1) as f64,
        None => 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut configs = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    for k in 0..n {
        let config = ConfigVector::new(
            robot
                .segments()
                .iter()
                .map(|seg| {
                    let [dl_lo, dl_hi] = seg.delta_l_bounds;
                    let [t_lo, t_hi] = seg.theta_bounds;
                    let theta = loop {
                        let t = rng.gen_range(t_lo..=t_hi);
                        if t.abs() >= RANDOM_MIN_BEND {
                            break t;
                        }
                    };
                    let phi = if seg.planar {
                        0.0
                    } else {
                        rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)
                    };
                    SegmentConfig::new(rng.gen_range(dl_lo..=dl_hi), theta, phi)
                })
                .collect(),
        );
        let tip = tip_position(robot, &config, true);
        let target = if robot.planar() { robot_to_planar(&tip) } else { tip };
        points.push(TrajectoryPoint {
            t: k as f64 * step,
            target,
        });
        configs.push(config);
    }
    let meta = TrajectoryMeta {
        shape: "random".into(),
        parameters: vec![("seed".into(), seed as f64)],
        characteristic_radius: mean_radius(&points),
        planar: robot.planar(),
    };
    Ok((configs, Trajectory::from_points(points, meta)?))
}

pub fn read_trajectory(path: &Path) -> CliResult<Trajectory> {
    let file = File::open(path).map_err(|e| CliError::bad_input(format!("cannot read {}: {e}", path.display())))?;
    parse_trajectory(file, &path.display().to_string())
}

pub fn parse_trajectory(reader: impl std::io::Read, name: &str) -> CliResult<Trajectory> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |key: &str| headers.iter().position(|h| h == key);
    let (Some(ti), Some(xi), Some(yi)) = (column("t"), column("x"), column("y")) else {
        return Err(CliError::bad_input(format!("{name}: header must name columns t, x, y")));
    };
    let zi = column("z");
    let mut points = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let field = |i: usize| -> CliResult<f64> {
            let cell = record.get(i).unwrap_or("");
            cell.parse()
                .map_err(|_| CliError::bad_input(format!("{name}: row {}: '{cell}' is not a number", row + 2)))
        };
        let z = match zi {
            Some(i) => field(i)?,
            None => 0.0,
        };
        points.push(TrajectoryPoint {
            t: field(ti)?,
            target: Vector3::new(field(xi)?, field(yi)?, z),
        });
    }
    if points.is_empty() {
        return Err(CliError::bad_input(format!("{name}: trajectory has no points")));
    }
    let meta = TrajectoryMeta {
        shape: "file".into(),
        parameters: Vec::new(),
        characteristic_radius: mean_radius(&points),
        planar: zi.is_none(),
    };
    Ok(Trajectory::from_points(points, meta)?)
}

pub fn write_trajectory(path: &Path, trajectory: &Trajectory) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    if trajectory.meta.planar {
        w.write_record(["t", "x", "y"])?;
    } else {
        w.write_record(["t", "x", "y", "z"])?;
    }
    for p in &trajectory.points {
        let mut row = vec![num(p.t), num(p.target.x), num(p.target.y)];
        if !trajectory.meta.planar {
            row.push(num(p.target.z));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
