//! Box-constrained quasi-Newton minimization.
//!
//! The feasible set is a box, optionally intersected with radial limits
//! `r_min ≤ |(x_u, x_v)| ≤ r_max` on coordinate pairs. Projected BFGS:
//! variables sitting on a bound with the gradient pushing outward are
//! frozen for the iteration, the inverse-Hessian approximation
//! acts on the remaining ones, and an Armijo backtracking search runs along
//! the projected path. Equality constraints enter as a quadratic penalty and
//! their final violation is reported back to the caller.

use serde::{Deserialize, Serialize};

/// Radius limits on the pair of coordinates `(u, v)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialBound {
    pub u: usize,
    pub v: usize,
    pub min: f64,
    pub max: f64,
}

/// Relative slack allowed by [`Bounds::contains`] on radial limits.
const RADIAL_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub radial: Vec<RadialBound>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len(), "bound vectors differ in length");
        Self {
            lower,
            upper,
            radial: Vec::new(),
        }
    }

    /// Adds `min ≤ |(x_u, x_v)| ≤ max`; the pair's box limits still apply.
    pub fn with_radial(mut self, u: usize, v: usize, min: f64, max: f64) -> Self {
        assert!(
            u < self.dim() && v < self.dim() && u != v,
            "radial indices out of range"
        );
        assert!(min >= 0.0 && min <= max, "radial limits out of order");
        self.radial.push(RadialBound { u, v, min, max });
        self
    }

    pub fn unbounded(dim: usize) -> Self {
        Self::new(vec![f64::NEG_INFINITY; dim], vec![f64::INFINITY; dim])
    }

    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Self {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn project(&self, x: &mut [f64]) {
        for r in &self.radial {
            let radius = x[r.u].hypot(x[r.v]);
            if radius > r.max {
                x[r.u] *= r.max / radius;
                x[r.v] *= r.max / radius;
            } else if radius < r.min {
                if radius == 0.0 {
                    x[r.u] = r.min;
                } else {
                    x[r.u] *= r.min / radius;
                    x[r.v] *= r.min / radius;
                }
            }
        }
        for ((xi, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *xi = xi.clamp(*lo, *hi);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let boxed = x
            .iter()
            .zip(&self.lower)
            .zip(&self.upper)
            .all(|((xi, lo), hi)| *xi >= *lo && *xi <= *hi);
        boxed
            && self.radial.iter().all(|r| {
                let radius = x[r.u].hypot(x[r.v]);
                radius <= r.max * (1.0 + RADIAL_SLACK) && radius >= r.min * (1.0 - RADIAL_SLACK)
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimizeSettings {
    /// Stop when the objective falls to this value.
    pub value_tolerance: f64,
    pub gradient_tolerance: f64,
    pub step_tolerance: f64,
    pub max_iterations: usize,
    /// Weight of the quadratic equality penalty.
    pub penalty_weight: f64,
}

impl Default for MinimizeSettings {
    fn default() -> Self {
        Self {
            value_tolerance: 1e-12,
            gradient_tolerance: 1e-10,
            step_tolerance: 1e-12,
            max_iterations: 200,
            penalty_weight: 1e3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Value,
    Gradient,
    Step,
    MaxIterations,
    NumericalFailure,
}

impl Termination {
    pub fn converged(self) -> bool {
        matches!(self, Self::Value | Self::Gradient | Self::Step)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    /// Penalized objective at `x`.
    pub value: f64,
    pub projected_gradient_norm: f64,
    /// Largest absolute equality residual at `x` (0 without equalities).
    pub equality_violation: f64,
    pub iterations: usize,
    pub termination: Termination,
}

/// Smooth scalar function returning its value and writing its gradient.
pub trait Objective {
    fn evaluate(&mut self, x: &[f64], grad: &mut [f64]) -> f64;
}

impl<F> Objective for F
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    fn evaluate(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        self(x, grad)
    }
}

/// Scalar equality `c(x) = 0`; returns `c(x)` and writes `∇c`.
pub type Equality<'a> = &'a dyn Fn(&[f64], &mut [f64]) -> f64;

struct Penalized<'a, O> {
    objective: O,
    equalities: &'a [Equality<'a>],
    weight: f64,
    scratch: Vec<f64>,
}

impl<O: Objective> Penalized<'_, O> {
    /// Returns (penalized value, max |c_i|).
    fn evaluate(&mut self, x: &[f64], grad: &mut [f64]) -> (f64, f64) {
        let mut value = self.objective.evaluate(x, grad);
        let mut violation: f64 = 0.0;
        for eq in self.equalities {
            let c = eq(x, &mut self.scratch);
            value += self.weight * c * c;
            for (g, dc) in grad.iter_mut().zip(&self.scratch) {
                *g += 2.0 * self.weight * c * dc;
            }
            violation = violation.max(c.abs());
        }
        (value, violation)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn finite(v: f64, g: &[f64]) -> bool {
    v.is_finite() && g.iter().all(|x| x.is_finite())
}

/// Gradient with components that would push a variable through an active
/// bound removed.
fn projected_gradient(x: &[f64], g: &[f64], bounds: &Bounds, out: &mut [f64]) {
    for i in 0..x.len() {
        let blocked = (x[i] <= bounds.lower[i] && g[i] > 0.0) || (x[i] >= bounds.upper[i] && g[i] < 0.0);
        out[i] = if blocked { 0.0 } else { g[i] };
    }
    for r in &bounds.radial {
        let (xu, xv) = (x[r.u], x[r.v]);
        let radius = xu.hypot(xv);
        if radius == 0.0 {
            continue;
        }
        let outward = (out[r.u] * xu + out[r.v] * xv) / radius;
        // descent (-g) leaving the annulus through the active circle
        let blocked = (radius >= r.max * (1.0 - RADIAL_SLACK) && outward < 0.0)
            || (radius <= r.min * (1.0 + RADIAL_SLACK) && outward > 0.0);
        if blocked {
            out[r.u] -= outward * xu / radius;
            out[r.v] -= outward * xv / radius;
        }
    }
}

/// Minimizes `objective` subject to `bounds` and the penalized `equalities`.
///
/// `x0` is projected into the box first. All returned points satisfy the
/// bounds exactly.
pub fn constrained_minimize<O: Objective>(
    objective: O,
    x0: &[f64],
    bounds: &Bounds,
    equalities: &[Equality<'_>],
    settings: &MinimizeSettings,
) -> Minimum {
    let n = x0.len();
    assert_eq!(bounds.dim(), n, "bounds dimension mismatch");
    let mut problem = Penalized {
        objective,
        equalities,
        weight: settings.penalty_weight,
        scratch: vec![0.0; n],
    };

    let mut x = x0.to_vec();
    bounds.project(&mut x);
    let mut g = vec![0.0; n];
    let (mut f, mut violation) = problem.evaluate(&x, &mut g);
    let mut pg = vec![0.0; n];
    projected_gradient(&x, &g, bounds, &mut pg);

    let finish = |x: Vec<f64>, f: f64, pg: &[f64], violation: f64, iterations: usize, termination| Minimum {
        x,
        value: f,
        projected_gradient_norm: norm(pg),
        equality_violation: violation,
        iterations,
        termination,
    };

    if !finite(f, &g) {
        return finish(x, f, &pg, violation, 0, Termination::NumericalFailure);
    }

    // Row-major inverse Hessian approximation.
    let mut h = identity(n);
    let mut fresh = true;
    let mut d = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut hy = vec![0.0; n];

    for iter in 0..settings.max_iterations {
        if f <= settings.value_tolerance {
            return finish(x, f, &pg, violation, iter, Termination::Value);
        }
        if norm(&pg) <= settings.gradient_tolerance {
            return finish(x, f, &pg, violation, iter, Termination::Gradient);
        }

        // Direction on the free variables.
        let free: Vec<bool> = pg.iter().zip(&g).map(|(p, gi)| *p != 0.0 || *gi == 0.0).collect();
        for i in 0..n {
            d[i] = if free[i] {
                -(0..n).filter(|&j| free[j]).map(|j| h[i * n + j] * g[j]).sum::<f64>()
            } else {
                0.0
            };
        }
        if dot(&d, &g) >= 0.0 {
            h = identity(n);
            fresh = true;
            for i in 0..n {
                d[i] = -pg[i];
            }
        }
        if fresh {
            // unit-length first step; a raw gradient step jumps to the bounds
            let scale = norm(&d).max(1.0);
            d.iter_mut().for_each(|v| *v /= scale);
        }

        // Armijo backtracking along the projected path.
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = x[i] + alpha * d[i];
            }
            bounds.project(&mut x_new);
            for i in 0..n {
                s[i] = x_new[i] - x[i];
            }
            let decrease = dot(&g, &s);
            if decrease >= 0.0 && norm(&s) > 0.0 {
                alpha *= 0.5;
                continue;
            }
            let (f_trial, v_trial) = problem.evaluate(&x_new, &mut g_new);
            if f_trial.is_finite() && f_trial <= f + 1e-4 * decrease {
                accepted = Some((f_trial, v_trial));
                break;
            }
            alpha *= 0.5;
        }

        let Some((f_new, v_new)) = accepted else {
            if fresh {
                // Steepest descent made no progress: the iterate is stationary
                // to working precision.
                return finish(x, f, &pg, violation, iter, Termination::Step);
            }
            h = identity(n);
            fresh = true;
            continue;
        };
        if !finite(f_new, &g_new) {
            return finish(x_new, f_new, &pg, v_new, iter + 1, Termination::NumericalFailure);
        }

        for i in 0..n {
            y[i] = g_new[i] - g[i];
        }
        let step = s
            .iter()
            .zip(&x)
            .map(|(si, xi)| si.abs() / (1.0 + xi.abs()))
            .fold(0.0, f64::max);

        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        f = f_new;
        violation = v_new;
        projected_gradient(&x, &g, bounds, &mut pg);

        if step <= settings.step_tolerance {
            if fresh {
                return finish(x, f, &pg, violation, iter + 1, Termination::Step);
            }
            h = identity(n);
            fresh = true;
            continue;
        }

        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if fresh {
                let scale = sy / dot(&y, &y);
                h.iter_mut().for_each(|v| *v = 0.0);
                for i in 0..n {
                    h[i * n + i] = scale;
                }
                fresh = false;
            }
            bfgs_update(&mut h, &s, &y, sy, &mut hy);
        }
    }

    let termination = if f <= settings.value_tolerance {
        Termination::Value
    } else {
        Termination::MaxIterations
    };
    finish(x, f, &pg, violation, settings.max_iterations, termination)
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

/// `H ← (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ` with `ρ = 1 / sᵀy`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64, hy: &mut [f64]) {
    let n = s.len();
    let rho = 1.0 / sy;
    for i in 0..n {
        hy[i] = (0..n).map(|j| h[i * n + j] * y[j]).sum();
    }
    let yhy = dot(y, hy);
    let coeff = (1.0 + rho * yhy) * rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += coeff * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}
