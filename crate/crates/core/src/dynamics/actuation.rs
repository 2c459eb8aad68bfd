//! Bellows pressure to generalized force mapping, `τ = H u`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{PccError, Result};
use crate::geometry::RobotSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActuationParams {
    /// Elongation gain.
    pub h1: f64,
    /// Bending gain.
    pub h2: f64,
    pub bellows: usize,
    /// Upper pressure limit (kPa); the lower limit is 0.
    pub p_max: f64,
    /// Use `sin γ` in the third row; `false` reproduces the uncorrected layout,
    /// whose second and third rows cancel.
    pub erratum_fix: bool,
}

impl Default for ActuationParams {
    fn default() -> Self {
        Self {
            h1: 8e-4,
            h2: 7.91e-7,
            bellows: 3,
            p_max: 100.0,
            erratum_fix: true,
        }
    }
}

impl ActuationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.h1 > 0.0) || !(self.h2 > 0.0) || self.bellows < 3 || !(self.p_max > 0.0) || !self.p_max.is_finite() {
            return Err(PccError::InvalidParameter(format!(
                "actuation needs h1 > 0, h2 > 0, at least 3 bellows, p_max > 0: {self:?}"
            )));
        }
        Ok(())
    }
}

/// `γ_i = (i − 1)·2π/m` for `i = 1..m`.
pub fn bellows_angles(bellows: usize) -> Vec<f64> {
    (0..bellows)
        .map(|i| i as f64 * std::f64::consts::TAU / bellows as f64)
        .collect()
}

/// 3 × m map from one segment's bellows pressures to `(ε, k_x, k_y)` forces.
pub fn input_mapping(params: &ActuationParams) -> Result<DMatrix<f64>> {
    params.validate()?;
    let gammas = bellows_angles(params.bellows);
    Ok(DMatrix::from_fn(3, params.bellows, |r, c| {
        let g = gammas[c];
        match r {
            0 => params.h1,
            1 => -params.h2 * g.cos(),
            _ if params.erratum_fix => params.h2 * g.sin(),
            _ => params.h2 * g.cos(),
        }
    }))
}

/// Block-diagonal map for the whole robot. Planar segments keep the
/// elongation row and the in-plane bending row.
pub fn robot_input_mapping(robot: &RobotSpec, params: &ActuationParams) -> Result<DMatrix<f64>> {
    let block = input_mapping(params)?;
    let m = params.bellows;
    let mut h = DMatrix::zeros(robot.dof(), m * robot.segment_count());
    let mut row = 0;
    for (i, seg) in robot.segments().iter().enumerate() {
        let rows = seg.dof();
        h.view_mut((row, i * m), (rows, m)).copy_from(&block.rows(0, rows));
        row += rows;
    }
    Ok(h)
}

/// Numerical rank, counting singular values above `tol·σ_max`.
pub fn matrix_rank(h: &DMatrix<f64>, tol: f64) -> usize {
    let sv = h.clone().svd(false, false).singular_values;
    let largest = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|s| **s > tol * largest).count()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureSolution {
    /// Pressures after clamping to `[0, p_max]`.
    pub pressures: Vec<f64>,
    /// Minimum-norm least-squares pressures before clamping.
    pub unclamped: Vec<f64>,
    /// Indices that were clamped.
    pub clamped: Vec<usize>,
    /// `‖H u* − τ‖` of the unclamped solution: the part of `τ` outside the
    /// range of `H`.
    pub range_residual: f64,
    /// Force actually produced, `H u`.
    pub realized: Vec<f64>,
}

/// Least-squares pressures for `τ`, clamped into `[0, p_max]`.
pub fn pressures_from_tau(h: &DMatrix<f64>, tau: &DVector<f64>, p_max: f64) -> Result<PressureSolution> {
    if tau.len() != h.nrows() {
        return Err(PccError::DimensionMismatch {
            expected: h.nrows(),
            actual: tau.len(),
        });
    }
    if tau.iter().any(|v| !v.is_finite()) {
        return Err(PccError::InvalidParameter("non-finite generalized force".into()));
    }
    let pinv = h
        .clone()
        .pseudo_inverse(1e-12 * h.amax())
        .map_err(|e| PccError::InvalidParameter(e.to_string()))?;
    let unclamped = pinv * tau;
    let range_residual = (h * &unclamped - tau).norm();
    let mut clamped = Vec::new();
    let pressures: DVector<f64> = DVector::from_iterator(
        unclamped.len(),
        unclamped.iter().enumerate().map(|(i, &u)| {
            let c = u.clamp(0.0, p_max);
            if c != u {
                clamped.push(i);
            }
            c
        }),
    );
    let realized = h * &pressures;
    Ok(PressureSolution {
        pressures: pressures.as_slice().to_vec(),
        unclamped: unclamped.as_slice().to_vec(),
        clamped,
        range_residual,
        realized: realized.as_slice().to_vec(),
    })
}
