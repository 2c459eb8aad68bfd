//! Robot description files.
//!
//! A robot is a TOML document with global keys, one `[[segment]]` table per
//! segment (base first) and optional parameter tables:
//!
//! ```toml
//! gravity_mm_s2 = [0.0, 0.0, -9806.65]
//! bellows = 3
//!
//! [[segment]]
//! rest_length_mm = 64.4
//! links = 6
//! dl_min_mm = -12.88
//! dl_max_mm = 32.2
//! theta_min_rad = 0.0
//! theta_max_rad = 3.141592653589793
//! mass_g = 17.3
//!
//! [stiffness]
//! a1 = 1.0
//!
//! [damping]
//! uniform = 0.1
//!
//! [actuation]
//! h1 = 8e-4
//! p_max = 100.0
//!
//! [solver]
//! position_tolerance = 1e-6
//! ```
//!
//! Missing segment keys take the segment defaults; missing table keys take
//! the library defaults. Unknown keys are rejected.

use std::path::Path;

use pcc_core::dynamics::{ActuationParams, DampingParams, DynamicsModel, StiffnessParams};
use pcc_core::geometry::{RobotSpec, SegmentSpec, DEFAULT_REST_LENGTH, DEFAULT_SEGMENT_MASS, STANDARD_GRAVITY};
use pcc_core::ik::IkSettings;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotFile {
    gravity_mm_s2: Option<[f64; 3]>,
    bellows: Option<usize>,
    #[serde(default, rename = "segment")]
    segments: Vec<SegmentEntry>,
    #[serde(default)]
    stiffness: StiffnessEntry,
    #[serde(default)]
    damping: DampingEntry,
    #[serde(default)]
    actuation: ActuationEntry,
    #[serde(default)]
    solver: SolverEntry,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentEntry {
    rest_length_mm: Option<f64>,
    links: usize,
    dl_min_mm: Option<f64>,
    dl_max_mm: Option<f64>,
    theta_min_rad: Option<f64>,
    theta_max_rad: Option<f64>,
    mass_g: Option<f64>,
    #[serde(default)]
    planar: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StiffnessEntry {
    a1: Option<f64>,
    a2: Option<f64>,
    a3: Option<f64>,
    a4: Option<f64>,
    a5: Option<f64>,
    a6: Option<f64>,
    lobe_count: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DampingEntry {
    uniform: Option<f64>,
    diagonal: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActuationEntry {
    h1: Option<f64>,
    h2: Option<f64>,
    p_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverEntry {
    position_tolerance: Option<f64>,
    gradient_tolerance: Option<f64>,
    step_tolerance: Option<f64>,
    max_iterations: Option<usize>,
    secondary_weight: Option<f64>,
    finite_difference_step: Option<f64>,
}

/// Everything a run needs to know about the arm.
#[derive(Clone, Debug, PartialEq)]
pub struct RobotConfig {
    pub robot: RobotSpec,
    pub stiffness: StiffnessParams,
    pub damping: DampingParams,
    /// `bellows` always equals the robot's bellows count.
    pub actuation: ActuationParams,
    pub solver: IkSettings,
}

const PRESETS: [(&str, usize, bool); 4] = [
    ("single", 1, false),
    ("two", 2, false),
    ("planar4", 4, true),
    ("four", 4, false),
];

impl RobotConfig {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        let file: RobotFile = toml::from_str(text).map_err(|e| CliError::bad_input(format!("robot config: {e}")))?;
        Self::from_file(file)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::bad_input(format!("cannot read robot config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// `preset:<name>` or a file path.
    pub fn resolve(source: &str) -> CliResult<Self> {
        match source.strip_prefix("preset:") {
            Some(name) => Self::preset(name),
            None => Self::load(Path::new(source)),
        }
    }

    /// Built-in arms of identical 64.4 mm segments with six links each:
    /// `single`, `two`, `four` (3D) and `planar4`.
    pub fn preset(name: &str) -> CliResult<Self> {
        let (_, count, planar) = PRESETS
            .iter()
            .find(|(n, ..)| *n == name)
            .ok_or_else(|| CliError::bad_input(format!("unknown preset '{name}'")))?;
        Self::with_robot(RobotSpec::uniform(*count, 6, *planar)?)
    }

    /// Default parameter sets around `robot`.
    pub fn with_robot(robot: RobotSpec) -> CliResult<Self> {
        let actuation = ActuationParams {
            bellows: robot.bellows(),
            ..Default::default()
        };
        Ok(Self {
            damping: DampingParams::uniform(robot.dof(), 0.1),
            robot,
            stiffness: StiffnessParams::default(),
            actuation,
            solver: IkSettings::default(),
        })
    }

    fn from_file(file: RobotFile) -> CliResult<Self> {
        if file.segments.is_empty() {
            return Err(CliError::bad_input("robot config has no [[segment]] tables"));
        }
        let mut segments = Vec::with_capacity(file.segments.len());
        let mut masses = Vec::with_capacity(file.segments.len());
        for s in &file.segments {
            let mut spec = SegmentSpec::new(s.rest_length_mm.unwrap_or(DEFAULT_REST_LENGTH), s.links, s.planar);
            spec.delta_l_bounds = [
                s.dl_min_mm.unwrap_or(spec.delta_l_bounds[0]),
                s.dl_max_mm.unwrap_or(spec.delta_l_bounds[1]),
            ];
            spec.theta_bounds = [
                s.theta_min_rad.unwrap_or(spec.theta_bounds[0]),
                s.theta_max_rad.unwrap_or(spec.theta_bounds[1]),
            ];
            segments.push(spec);
            masses.push(s.mass_g.unwrap_or(DEFAULT_SEGMENT_MASS));
        }
        let robot = RobotSpec::new(
            segments,
            masses,
            file.gravity_mm_s2.unwrap_or([0.0, 0.0, -STANDARD_GRAVITY]),
            file.bellows.unwrap_or(3),
        )?;
        let dof = robot.dof();

        let d = StiffnessParams::default();
        let k = &file.stiffness;
        let stiffness = StiffnessParams {
            a1: k.a1.unwrap_or(d.a1),
            a2: k.a2.unwrap_or(d.a2),
            a3: k.a3.unwrap_or(d.a3),
            a4: k.a4.unwrap_or(d.a4),
            a5: k.a5.unwrap_or(d.a5),
            a6: k.a6.unwrap_or(d.a6),
            lobe_count: k.lobe_count.unwrap_or(d.lobe_count),
        };
        stiffness.validate()?;

        let damping = match (&file.damping.uniform, &file.damping.diagonal) {
            (Some(_), Some(_)) => return Err(CliError::bad_input("damping: give either uniform or diagonal")),
            (None, Some(diag)) if diag.len() != dof => {
                return Err(CliError::bad_input(format!(
                    "damping diagonal has {} entries, robot has {dof} coordinates",
                    diag.len()
                )))
            }
            (None, Some(diag)) => DampingParams { diagonal: diag.clone() },
            (uniform, None) => DampingParams::uniform(dof, uniform.unwrap_or(0.1)),
        };
        damping.validate()?;

        let a = ActuationParams::default();
        let actuation = ActuationParams {
            h1: file.actuation.h1.unwrap_or(a.h1),
            h2: file.actuation.h2.unwrap_or(a.h2),
            p_max: file.actuation.p_max.unwrap_or(a.p_max),
            bellows: robot.bellows(),
            erratum_fix: true,
        };
        actuation.validate()?;

        let s = IkSettings::default();
        let e = &file.solver;
        let solver = IkSettings {
            position_tolerance: e.position_tolerance.unwrap_or(s.position_tolerance),
            gradient_tolerance: e.gradient_tolerance.unwrap_or(s.gradient_tolerance),
            step_tolerance: e.step_tolerance.unwrap_or(s.step_tolerance),
            max_iterations: e.max_iterations.unwrap_or(s.max_iterations),
            secondary_weight: e.secondary_weight.unwrap_or(s.secondary_weight),
            finite_difference_step: e.finite_difference_step.unwrap_or(s.finite_difference_step),
            compensated: true,
        };
        solver.validate()?;

        Ok(Self {
            robot,
            stiffness,
            damping,
            actuation,
            solver,
        })
    }

    pub fn model(&self) -> CliResult<DynamicsModel> {
        Ok(DynamicsModel::new(
            self.robot.clone(),
            self.stiffness,
            self.damping.clone(),
        )?)
    }
}
