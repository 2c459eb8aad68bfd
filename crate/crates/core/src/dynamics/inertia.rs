//! Lumped-mass inertia, Coriolis and gravity terms.
//!
//! Each segment's mass is split evenly over its rigid links and placed at
//! the link midpoints of the compensated chain. Position Jacobians come from
//! central differences of the state-to-chain map.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::Result;
use crate::geometry::{self, RobotSpec};

use super::{check_state, check_velocity, config_from_state_unchecked};

/// Added to the diagonal of `M`.
pub const MASS_REGULARIZATION: f64 = 1e-9;

/// Central-difference step for first derivatives, in scaled units.
const FIRST_STEP: f64 = 1e-5;
/// Step for second derivatives, in scaled units.
const SECOND_STEP: f64 = 1e-4;

/// Positions of the lumped masses, stacked `[x0 y0 z0 x1 ...]`.
pub fn mass_points(robot: &RobotSpec, q: &DVector<f64>) -> Vec<Vector3<f64>> {
    let config = config_from_state_unchecked(robot, q.as_slice());
    let mut points = Vec::new();
    geometry::walk_chain(robot, &config, true, None, |_, _, start, end| {
        points.push(0.5 * (start + end))
    });
    points
}

/// Mass of each lumped point, in the order of [`mass_points`].
pub fn point_masses(robot: &RobotSpec) -> Vec<f64> {
    robot
        .segments()
        .iter()
        .zip(robot.masses())
        .flat_map(|(seg, m)| std::iter::repeat_n(m / seg.links as f64, seg.links))
        .collect()
}

/// Natural size of each coordinate: 1 for strain, `1/l₀` for curvature, so
/// equal scaled steps move the chain by comparable amounts.
fn coordinate_scales(robot: &RobotSpec) -> Vec<f64> {
    robot
        .segments()
        .iter()
        .flat_map(|seg| {
            let mut s = vec![1.0, 1.0 / seg.rest_length];
            if !seg.planar {
                s.push(1.0 / seg.rest_length);
            }
            s
        })
        .collect()
}

fn stacked(robot: &RobotSpec, q: &DVector<f64>) -> DVector<f64> {
    let points = mass_points(robot, q);
    DVector::from_iterator(3 * points.len(), points.iter().flat_map(|p| p.iter().copied()))
}

/// Stacked `3N × dof` Jacobian of the lumped-mass positions.
pub fn position_jacobian(robot: &RobotSpec, q: &DVector<f64>) -> DMatrix<f64> {
    let scales = coordinate_scales(robot);
    let mut columns = Vec::with_capacity(q.len());
    let mut probe = q.clone();
    for i in 0..q.len() {
        let h = FIRST_STEP * scales[i];
        probe[i] = q[i] + h;
        let plus = stacked(robot, &probe);
        probe[i] = q[i] - h;
        let minus = stacked(robot, &probe);
        probe[i] = q[i];
        columns.push((plus - minus) / (2.0 * h));
    }
    DMatrix::from_columns(&columns)
}

/// `Σ m Jᵀ A` for a stacked `A` with three rows per point.
fn weighted_transpose_product(robot: &RobotSpec, jacobian: &DMatrix<f64>, rhs: &DMatrix<f64>) -> DMatrix<f64> {
    let mut weighted = rhs.clone();
    for (k, m) in point_masses(robot).into_iter().enumerate() {
        weighted.rows_mut(3 * k, 3).scale_mut(m);
    }
    jacobian.transpose() * weighted
}

pub fn mass_matrix(robot: &RobotSpec, q: &DVector<f64>) -> Result<DMatrix<f64>> {
    check_state(robot, q)?;
    Ok(mass_with_jacobian(robot, &position_jacobian(robot, q)))
}

pub(crate) fn mass_with_jacobian(robot: &RobotSpec, jacobian: &DMatrix<f64>) -> DMatrix<f64> {
    let m = weighted_transpose_product(robot, jacobian, jacobian);
    let mut m = 0.5 * (&m + m.transpose());
    for i in 0..m.nrows() {
        m[(i, i)] += MASS_REGULARIZATION;
    }
    m
}

/// `C(q, q̇)q̇ = Σ m Jᵀ (q̇ᵀ ∇²p q̇)`: the velocity-product part of each point's
/// acceleration, from a second difference along `q̇`.
pub fn coriolis_vector(robot: &RobotSpec, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<DVector<f64>> {
    check_state(robot, q)?;
    check_velocity(robot, qdot)?;
    let j = position_jacobian(robot, q);
    Ok(coriolis_with_jacobian(robot, q, qdot, &j))
}

pub(crate) fn coriolis_with_jacobian(
    robot: &RobotSpec,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
    jacobian: &DMatrix<f64>,
) -> DVector<f64> {
    let scales = coordinate_scales(robot);
    let size = qdot.iter().zip(&scales).map(|(v, s)| (v / s).abs()).fold(0.0, f64::max);
    if size == 0.0 {
        return DVector::zeros(q.len());
    }
    let h = SECOND_STEP / size;
    let plus = stacked(robot, &(q + h * qdot));
    let centre = stacked(robot, q);
    let minus = stacked(robot, &(q - h * qdot));
    let acceleration = (plus - 2.0 * centre + minus) / (h * h);
    let column = DMatrix::from_column_slice(acceleration.len(), 1, acceleration.as_slice());
    weighted_transpose_product(robot, jacobian, &column)
        .column(0)
        .into_owned()
}

/// `∂M/∂q_k` for every `k`, from mixed second differences of the positions.
pub fn mass_matrix_derivatives(robot: &RobotSpec, q: &DVector<f64>) -> Result<Vec<DMatrix<f64>>> {
    check_state(robot, q)?;
    let n = q.len();
    let scales = coordinate_scales(robot);
    let j = position_jacobian(robot, q);
    let centre = stacked(robot, q);
    let at = |offsets: &[(usize, f64)]| {
        let mut probe = q.clone();
        for &(i, d) in offsets {
            probe[i] += d;
        }
        stacked(robot, &probe)
    };
    // hessian[i][k] = ∂²p/∂q_i∂q_k (stacked)
    let mut hessian = vec![vec![DVector::zeros(centre.len()); n]; n];
    for i in 0..n {
        let hi = SECOND_STEP * scales[i];
        hessian[i][i] = (at(&[(i, hi)]) - 2.0 * &centre + at(&[(i, -hi)])) / (hi * hi);
        for k in 0..i {
            let hk = SECOND_STEP * scales[k];
            let mixed = (at(&[(i, hi), (k, hk)]) - at(&[(i, hi), (k, -hk)]) - at(&[(i, -hi), (k, hk)])
                + at(&[(i, -hi), (k, -hk)]))
                / (4.0 * hi * hk);
            hessian[k][i] = mixed.clone();
            hessian[i][k] = mixed;
        }
    }
    Ok((0..n)
        .map(|k| {
            let dj = DMatrix::from_columns(&(0..n).map(|i| hessian[i][k].clone()).collect::<Vec<_>>());
            let half = weighted_transpose_product(robot, &dj, &j);
            &half + half.transpose()
        })
        .collect())
}

/// Christoffel-symbol Coriolis matrix,
/// `C_ij = Σ_k ½(∂_k M_ij + ∂_j M_ik − ∂_i M_jk) q̇_k`.
pub fn coriolis_matrix(robot: &RobotSpec, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<DMatrix<f64>> {
    check_velocity(robot, qdot)?;
    let dm = mass_matrix_derivatives(robot, q)?;
    let n = q.len();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| 0.5 * (dm[k][(i, j)] + dm[j][(i, k)] - dm[i][(j, k)]) * qdot[k])
            .sum()
    }))
}

/// `V(q) = −Σ m g·p`.
pub fn gravitational_potential(robot: &RobotSpec, q: &DVector<f64>) -> Result<f64> {
    check_state(robot, q)?;
    let g = robot.gravity();
    Ok(-mass_points(robot, q)
        .iter()
        .zip(point_masses(robot))
        .map(|(p, m)| m * g.dot(p))
        .sum::<f64>())
}

/// `G(q) = ∂V/∂q = −Σ m Jᵀ g`.
pub fn gravity_vector(robot: &RobotSpec, q: &DVector<f64>) -> Result<DVector<f64>> {
    check_state(robot, q)?;
    let j = position_jacobian(robot, q);
    Ok(gravity_with_jacobian(robot, &j))
}

pub(crate) fn gravity_with_jacobian(robot: &RobotSpec, jacobian: &DMatrix<f64>) -> DVector<f64> {
    let g = robot.gravity();
    let points = jacobian.nrows() / 3;
    let stacked_g = DMatrix::from_fn(3 * points, 1, |r, _| g[r % 3]);
    -weighted_transpose_product(robot, jacobian, &stacked_g)
        .column(0)
        .into_owned()
}
