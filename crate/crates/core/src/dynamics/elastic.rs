//! Hyper-elastic potential and its gradient.
//!
//! Per segment `U = ∫₀^ε k_e(s)s ds + α_φ·∫₀^β b(s)s ds` with
//! `k_e(s) = a1 + a2(tanh²(a3 s) − 1)`, `b(s) = a4 + a5(tanh²(a6 s) − 1)`,
//! `α_φ = (β/2)(sin(m φ) + 1) + 1` and `β = θ` the bending angle. Integrals use
//! 16-node Gauss–Legendre quadrature.

use std::sync::OnceLock;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{PccError, Result};
use crate::geometry::RobotSpec;

use super::{check_state, segment_slices};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StiffnessParams {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
    /// `m` in `sin(m φ)`.
    pub lobe_count: u32,
}

impl Default for StiffnessParams {
    /// Placeholder constants, not identified values.
    fn default() -> Self {
        Self {
            a1: 1.0,
            a2: 0.5,
            a3: 5.0,
            a4: 1.0,
            a5: 0.5,
            a6: 5.0,
            lobe_count: 3,
        }
    }
}

impl StiffnessParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.a1, self.a2, self.a3, self.a4, self.a5, self.a6];
        if all.iter().any(|v| !v.is_finite()) || !(self.a1 > 0.0) || !(self.a4 > 0.0) {
            return Err(PccError::InvalidParameter(format!(
                "stiffness needs finite values, a1 > 0, a4 > 0: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn elongation_stiffness(&self, strain: f64) -> f64 {
        self.a1 + self.a2 * ((self.a3 * strain).tanh().powi(2) - 1.0)
    }

    /// Bending stiffness before the direction factor `α_φ`.
    pub fn bending_stiffness(&self, beta: f64) -> f64 {
        self.a4 + self.a5 * ((self.a6 * beta).tanh().powi(2) - 1.0)
    }

    pub fn direction_factor(&self, beta: f64, phi: f64) -> f64 {
        0.5 * beta * ((self.lobe_count as f64 * phi).sin() + 1.0) + 1.0
    }

    /// `∫₀^ε k_e(s) s ds`.
    pub fn elongation_energy(&self, strain: f64) -> f64 {
        moment_integral(|s| self.elongation_stiffness(s), strain)
    }

    /// `∫₀^β b(s) s ds`.
    pub fn bending_energy(&self, beta: f64) -> f64 {
        moment_integral(|s| self.bending_stiffness(s), beta)
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
fn gauss_legendre() -> &'static [(f64, f64); 16] {
    static RULE: OnceLock<[(f64, f64); 16]> = OnceLock::new();
    RULE.get_or_init(|| {
        const N: usize = 16;
        let mut rule = [(0.0, 0.0); N];
        for (i, slot) in rule.iter_mut().enumerate() {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            let mut derivative = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=N {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                derivative = N as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / derivative;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *slot = (x, 2.0 / ((1.0 - x * x) * derivative * derivative));
        }
        rule
    })
}

/// `∫₀^x f(s) s ds`.
pub fn moment_integral(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let half = 0.5 * x;
    gauss_legendre()
        .iter()
        .map(|&(node, weight)| {
            let s = half * (node + 1.0);
            weight * f(s) * s
        })
        .sum::<f64>()
        * half
}

/// Bending angle and direction of one segment's curvature.
struct Bend {
    beta: f64,
    phi: f64,
    /// `∂β/∂ε` and `∂β/∂k` per curvature component.
    d_beta_strain: f64,
    d_beta_k: [f64; 2],
    d_phi_k: [f64; 2],
}

fn bend(rest_length: f64, q: &[f64]) -> Bend {
    let length = rest_length * (1.0 + q[0]);
    if q.len() == 2 {
        // planar: φ is 0 or π, and sin(mπ) = 0 for integer m
        let k = q[1];
        return Bend {
            beta: length * k.abs(),
            phi: 0.0,
            d_beta_strain: rest_length * k.abs(),
            d_beta_k: [if k == 0.0 { 0.0 } else { length * k.signum() }, 0.0],
            d_phi_k: [0.0; 2],
        };
    }
    let (kx, ky) = (q[1], q[2]);
    let r = kx.hypot(ky);
    if r == 0.0 {
        return Bend {
            beta: 0.0,
            phi: 0.0,
            d_beta_strain: 0.0,
            d_beta_k: [0.0; 2],
            d_phi_k: [0.0; 2],
        };
    }
    Bend {
        beta: length * r,
        phi: ky.atan2(kx),
        d_beta_strain: rest_length * r,
        d_beta_k: [length * kx / r, length * ky / r],
        d_phi_k: [-ky / (r * r), kx / (r * r)],
    }
}

pub fn elastic_potential(robot: &RobotSpec, q: &DVector<f64>, params: &StiffnessParams) -> Result<f64> {
    check_state(robot, q)?;
    let mut total = 0.0;
    for (seg, range) in robot.segments().iter().zip(segment_slices(robot)) {
        let qs = &q.as_slice()[range];
        let b = bend(seg.rest_length, qs);
        total +=
            params.elongation_energy(qs[0]) + params.direction_factor(b.beta, b.phi) * params.bending_energy(b.beta);
    }
    Ok(total)
}

/// `K(q) = ∂U/∂q`, by the chain rule through `β` and `φ`.
pub fn stiffness_vector(robot: &RobotSpec, q: &DVector<f64>, params: &StiffnessParams) -> Result<DVector<f64>> {
    check_state(robot, q)?;
    let mut out = DVector::zeros(q.len());
    let m = params.lobe_count as f64;
    for (seg, range) in robot.segments().iter().zip(segment_slices(robot)) {
        let start = range.start;
        let qs = &q.as_slice()[range];
        let b = bend(seg.rest_length, qs);
        let energy = params.bending_energy(b.beta);
        let alpha = params.direction_factor(b.beta, b.phi);
        let d_alpha_beta = 0.5 * ((m * b.phi).sin() + 1.0);
        let d_alpha_phi = 0.5 * b.beta * m * (m * b.phi).cos();
        let u_beta = d_alpha_beta * energy + alpha * params.bending_stiffness(b.beta) * b.beta;
        let u_phi = d_alpha_phi * energy;
        out[start] = params.elongation_stiffness(qs[0]) * qs[0] + u_beta * b.d_beta_strain;
        for c in 1..qs.len() {
            out[start + c] = u_beta * b.d_beta_k[c - 1] + u_phi * b.d_phi_k[c - 1];
        }
    }
    Ok(out)
}
