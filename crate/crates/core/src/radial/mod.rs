//! One-dimensional numerical substrate: uniform grids, finite differences,
//! composite Simpson quadrature, the Thomas algorithm, an adaptive
//! Dormand–Prince integrator and a damped Newton solver.

mod grid;
mod newton;
mod ode;

pub(crate) use grid::interpolate_uniform;
pub use grid::{RadialField, RadialGrid, MIN_INTERVALS};
pub use newton::{damped_newton, tridiagonal_fd_jacobian, Jacobian, NewtonOptions, NewtonReport};
pub use ode::{integrate_ode, integrate_ode_limited, Trajectory};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Solver and checking tolerances used throughout a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Residual infinity-norm at which Newton stops.
    pub newton_tol: f64,
    pub ode_rel_tol: f64,
    pub ode_abs_tol: f64,
    /// Largest negative margin accepted by an inequality check.
    pub ineq_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            ode_rel_tol: 1e-10,
            ode_abs_tol: 1e-12,
            ineq_slack: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.newton_tol, self.ode_rel_tol, self.ode_abs_tol, self.ineq_slack];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Input("tolerances must be finite and strictly positive".into()));
        }
        if self.ineq_slack > 1e-8 {
            return Err(Error::Input(format!("ineq_slack {} exceeds 1e-8", self.ineq_slack)));
        }
        Ok(())
    }
}

/// Second-order derivative: central differences inside, one-sided
/// three-point stencils at both ends.
pub fn derivative(f: &RadialField) -> RadialField {
    let grid = *f.grid();
    let values = derivative_uniform(f.values(), grid.spacing());
    RadialField::new(grid, values).expect("derivative of a valid field is valid")
}

pub(crate) fn derivative_uniform(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len() - 1;
    let mut d = vec![0.0; n + 1];
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    for i in 1..n {
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    d[n] = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
    d
}

/// Composite Simpson rule over the whole grid.
pub fn integrate(f: &RadialField) -> Result<f64> {
    simpson_uniform(f.values(), f.grid().spacing())
}

pub(crate) fn simpson_uniform(v: &[f64], h: f64) -> Result<f64> {
    let n = v.len() - 1;
    if !n.is_multiple_of(2) {
        return Err(Error::Grid(format!(
            "Simpson quadrature needs an even interval count, got {n}"
        )));
    }
    let mut acc = v[0] + v[n];
    for (i, &x) in v.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 * x } else { 2.0 * x };
    }
    Ok(acc * h / 3.0)
}

/// Thomas algorithm. `lower[i]` multiplies `x[i-1]` and `upper[i]` multiplies
/// `x[i+1]` in row `i`; `lower[0]` and `upper[m-1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let m = diag.len();
    if lower.len() != m || upper.len() != m || rhs.len() != m || m == 0 {
        return Err(Error::Input("tridiagonal bands and rhs must share one length".into()));
    }
    let scale = diag
        .iter()
        .chain(lower)
        .chain(upper)
        .fold(0.0f64, |a, v| a.max(v.abs()));
    let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut pivot = diag[0];
    if pivot.abs() <= tiny {
        return Err(Error::SingularSystem { row: 0 });
    }
    c[0] = upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..m {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot.abs() <= tiny {
            return Err(Error::SingularSystem { row: i });
        }
        c[i] = if i + 1 < m { upper[i] / pivot } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    let mut x = d;
    for i in (0..m - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Three-point derivative at `x[k]` on a non-uniform grid (second order).
pub(crate) fn nonuniform_derivative(x: &[f64], y: &[f64], k: usize) -> f64 {
    let n = x.len();
    let (i0, i1, i2) = if k == 0 {
        (0, 1, 2)
    } else if k == n - 1 {
        (n - 3, n - 2, n - 1)
    } else {
        (k - 1, k, k + 1)
    };
    let (x0, x1, x2) = (x[i0], x[i1], x[i2]);
    let t = x[k];
    let l0 = ((t - x1) + (t - x2)) / ((x0 - x1) * (x0 - x2));
    let l1 = ((t - x0) + (t - x2)) / ((x1 - x0) * (x1 - x2));
    let l2 = ((t - x0) + (t - x1)) / ((x2 - x0) * (x2 - x1));
    l0 * y[i0] + l1 * y[i1] + l2 * y[i2]
}

/// Limit at the origin of an even function sampled at `h` and `2h`.
pub(crate) fn even_limit(at_h: f64, at_2h: f64) -> f64 {
    (4.0 * at_h - at_2h) / 3.0
}

/// Bisection for a sign change of `f` on `[a, b]`, to relative width `rel_tol`.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= rel_tol * m.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
