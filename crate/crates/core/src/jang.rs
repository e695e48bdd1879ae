//! Jang's equation for radial graphs `t = f(s)` over a spherical data set,
//! and the geometry of the resulting graph.
//!
//! With `y = f'/A` the radial slope in the orthonormal frame,
//! `W = √(1 + y²)` and `H = 2B'/(AB)`, the equation reduces to
//!
//! ```text
//! (y'/A / W - p_rad) / W² + 2 (H y / (2W) - p_tan) = 0.
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initial_data::{horizon_scan, scalar_curvature, SphericalDataSet};
use crate::radial::{
    damped_newton, derivative_uniform, even_limit, tridiagonal_fd_jacobian, NewtonOptions, RadialField, RadialGrid,
    Tolerances,
};

/// Number of homotopy steps in `p` used when the direct solve stalls.
const CONTINUATION_STEPS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct JangSolution {
    pub f: RadialField,
    pub fprime: RadialField,
    /// `√(1 + f'²/A²)`.
    pub w: RadialField,
    pub newton_iterations: usize,
    pub residual: f64,
    /// Zero when the direct solve converged.
    pub continuation_steps: usize,
}

/// Graph metric `ḡ = Ā² ds² + B² dΩ²` with `Ā² = A² + f'²` and the vector
/// field `X` entering the scalar-curvature inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphData {
    pub abar: RadialField,
    /// Areal radius, shared by `g` and `ḡ`.
    pub b: RadialField,
    pub db: RadialField,
    pub rbar: RadialField,
    /// Radial component of `X` in the `ḡ`-orthonormal frame.
    pub x_rad: RadialField,
    pub div_x: RadialField,
    pub hbar: f64,
    /// `⟨X, ν̄⟩` on the outer boundary.
    pub xnu: f64,
    /// `y = f'/A` at the outer boundary.
    pub boundary_slope: f64,
    /// `W` at the outer boundary.
    pub boundary_tilt: f64,
    pub areal_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JangSummary {
    pub newton_iterations: usize,
    pub residual: f64,
    pub continuation_steps: usize,
    pub max_slope: f64,
}

impl JangSolution {
    pub fn summary(&self, data: &SphericalDataSet) -> JangSummary {
        let max_slope = self
            .fprime
            .values()
            .iter()
            .zip(data.a().values())
            .fold(0.0f64, |m, (fp, a)| m.max((fp / a).abs()));
        JangSummary {
            newton_iterations: self.newton_iterations,
            residual: self.residual,
            continuation_steps: self.continuation_steps,
            max_slope,
        }
    }
}

/// Nodal coefficients of the radial Jang operator.
struct JangOperator<'a> {
    grid: RadialGrid,
    a: &'a [f64],
    da: Vec<f64>,
    mean: Vec<f64>,
    p_rad: &'a [f64],
    p_tan: &'a [f64],
}

impl<'a> JangOperator<'a> {
    fn new(data: &'a SphericalDataSet) -> Self {
        let grid = *data.grid();
        let a = data.a().values();
        let (b, db) = (data.b().values(), data.db().values());
        let mean = (0..grid.len())
            .map(|i| if b[i] > 0.0 { 2.0 * db[i] / (a[i] * b[i]) } else { 0.0 })
            .collect();
        Self {
            grid,
            a,
            da: derivative_uniform(a, grid.spacing()),
            mean,
            p_rad: data.p_rad().values(),
            p_tan: data.p_tan().values(),
        }
    }

    /// Operator at node `i` from `f'` and `f''`, with `p` scaled by `lambda`.
    fn at(&self, i: usize, fp: f64, fpp: f64, lambda: f64) -> f64 {
        let a = self.a[i];
        let y = fp / a;
        let w = (1.0 + y * y).sqrt();
        let dy = (fpp - self.da[i] * fp / a) / (a * a);
        (dy / w - lambda * self.p_rad[i]) / (w * w) + 2.0 * (0.5 * self.mean[i] * y / w - lambda * self.p_tan[i])
    }

    /// Limit at a regular center, where `f'(0) = 0` and `W = 1`.
    fn at_center(&self, fpp: f64, lambda: f64) -> f64 {
        3.0 * fpp - lambda * (self.p_rad[0] + 2.0 * self.p_tan[0])
    }

    /// Discrete system: Dirichlet rows at the boundary spheres, the center
    /// limit on a ball, centered differences elsewhere.
    fn system(&self, f: &[f64], lambda: f64) -> Vec<f64> {
        let n = self.grid.n();
        let h = self.grid.spacing();
        let mut r = vec![0.0; n + 1];
        r[0] = if self.grid.has_center() {
            self.at_center(2.0 * (f[1] - f[0]) / (h * h), lambda)
        } else {
            f[0]
        };
        for i in 1..n {
            let fp = (f[i + 1] - f[i - 1]) / (2.0 * h);
            let fpp = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
            r[i] = self.at(i, fp, fpp, lambda);
        }
        r[n] = f[n];
        r
    }
}

/// Left side of Jang's equation at every node for a trial height `f`.
/// Endpoints use one-sided second-order differences; a regular center uses
/// the limiting form of the operator.
pub fn jang_residual(data: &SphericalDataSet, f: &RadialField) -> Result<RadialField> {
    let grid = *data.grid();
    if f.grid() != &grid {
        return Err(Error::Grid("Jang residual: height lives on a different grid".into()));
    }
    let op = JangOperator::new(data);
    let v = f.values();
    let h = grid.spacing();
    let n = grid.n();
    let mut r = op.system(v, 1.0);
    r[0] = if grid.has_center() {
        op.at_center(2.0 * (v[1] - v[0]) / (h * h), 1.0)
    } else {
        let fp = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        let fpp = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h);
        op.at(0, fp, fpp, 1.0)
    };
    let fp = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
    let fpp = (2.0 * v[n] - 5.0 * v[n - 1] + 4.0 * v[n - 2] - v[n - 3]) / (h * h);
    r[n] = op.at(n, fp, fpp, 1.0);
    RadialField::new(grid, r)
}

/// Damped Newton solve with `f = 0` on every boundary sphere (and
/// `f'(0) = 0` at a regular center). Falls back to continuation in the
/// amplitude of `p` when the direct solve stalls.
pub fn jang_solve(data: &SphericalDataSet, tol: &Tolerances) -> Result<JangSolution> {
    let horizons = horizon_scan(data);
    if let Some(c) = horizons.first() {
        return Err(Error::JangBreakdown(format!(
            "data contains an apparent horizon at s = {:.6} ({} roots)",
            c.radius,
            horizons.len()
        )));
    }
    let grid = *data.grid();
    let op = JangOperator::new(data);
    let opts = NewtonOptions {
        tol: tol.newton_tol,
        ..Default::default()
    };
    let solve_at = |lambda: f64, x0: Vec<f64>| {
        let residual = |f: &[f64]| op.system(f, lambda);
        damped_newton(residual, |f| Ok(tridiagonal_fd_jacobian(&residual, f)), x0, opts)
    };

    let zeros = vec![0.0; grid.len()];
    let (report, steps) = match solve_at(1.0, zeros.clone()) {
        Ok(rep) => (rep, 0),
        Err(direct) => {
            let mut x = zeros;
            let mut last = None;
            for k in 1..=CONTINUATION_STEPS {
                let lambda = k as f64 / CONTINUATION_STEPS as f64;
                let rep = solve_at(lambda, x).map_err(|e| {
                    Error::JangBreakdown(format!(
                        "direct solve failed ({direct}); continuation stalled at p-scale {lambda:.1}: {e}"
                    ))
                })?;
                x = rep.x.clone();
                last = Some(rep);
            }
            (last.expect("at least one continuation step"), CONTINUATION_STEPS)
        }
    };

    let f = RadialField::new(grid, report.x.clone())
        .map_err(|_| Error::JangBreakdown("non-finite Jang solution".into()))?;
    let mut fp = derivative_uniform(f.values(), grid.spacing());
    if grid.has_center() {
        fp[0] = 0.0;
    }
    let fprime = RadialField::new(grid, fp)?;
    let w = fprime.zip_with(data.a(), |fp, a| (1.0 + (fp / a).powi(2)).sqrt());
    Ok(JangSolution {
        f,
        fprime,
        w,
        newton_iterations: report.iterations,
        residual: report.residual(),
        continuation_steps: steps,
    })
}

/// Graph metric, its scalar curvature and the field `X`.
///
/// In the orthonormal frame `X_rad = (y/W²)(y'/(A W) - p_rad)`. Since `f`
/// solves Jang's equation this equals `y (2 p_tan - H y / W)`, which needs
/// no second derivative of `f` and is the form evaluated here.
pub fn graph_geometry(data: &SphericalDataSet, sol: &JangSolution) -> Result<GraphData> {
    let grid = *data.grid();
    let n = grid.n();
    let h = grid.spacing();
    let a = data.a().values();
    let (b, db) = (data.b().values(), data.db().values());
    let pt = data.p_tan().values();
    let fp = sol.fprime.values();
    let w = sol.w.values();

    let abar: Vec<f64> = (0..=n).map(|i| (a[i] * a[i] + fp[i] * fp[i]).sqrt()).collect();
    let rbar = scalar_curvature(&grid, &abar, b, db);

    let y: Vec<f64> = (0..=n).map(|i| fp[i] / a[i]).collect();
    let x_rad: Vec<f64> = (0..=n)
        .map(|i| {
            if b[i] > 0.0 {
                y[i] * (2.0 * pt[i] - 2.0 * db[i] / (a[i] * b[i]) * y[i] / w[i])
            } else {
                0.0
            }
        })
        .collect();
    let flux: Vec<f64> = (0..=n).map(|i| b[i] * b[i] * x_rad[i]).collect();
    let dflux = derivative_uniform(&flux, h);
    let mut div_x = vec![0.0; n + 1];
    for i in usize::from(grid.has_center())..=n {
        div_x[i] = dflux[i] / (abar[i] * b[i] * b[i]);
    }
    if grid.has_center() {
        div_x[0] = even_limit(div_x[1], div_x[2]);
    }

    let (yb, wb) = (y[n], w[n]);
    let mean = 2.0 * db[n] / (a[n] * b[n]);
    Ok(GraphData {
        abar: RadialField::new(grid, abar)?,
        b: data.b().clone(),
        db: data.db().clone(),
        rbar: RadialField::new(grid, rbar)?,
        x_rad: RadialField::new(grid, x_rad)?,
        div_x: RadialField::new(grid, div_x)?,
        hbar: mean / wb,
        xnu: yb * (2.0 * pt[n] - mean * yb / wb),
        boundary_slope: yb,
        boundary_tilt: wb,
        areal_radius: b[n],
    })
}

/// `R̄ - 2|X|² + 2 div X`, nonnegative for Jang graphs over data obeying
/// the local energy condition.
pub fn check_eq20(gd: &GraphData) -> RadialField {
    let x2 = gd.x_rad.map(|x| x * x);
    let lhs = gd.rbar.zip_with(&x2, |r, x2| r - 2.0 * x2);
    lhs.zip_with(&gd.div_x, |l, d| l + 2.0 * d)
}
