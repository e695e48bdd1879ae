//! Conformal change `ĝ = u⁴ ḡ` to zero scalar curvature.
//!
//! `v = u - 1` solves `Δ̄v - R̄v/8 = R̄/8` with `v = 0` on the outer sphere,
//! where for radial functions `Δ̄v = (B² v'/Ā)' / (Ā B²)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jang::GraphData;
use crate::radial::{solve_tridiagonal, RadialField};

#[derive(Debug, Clone, PartialEq)]
pub struct ConformalSolution {
    pub v: RadialField,
    pub u: RadialField,
    /// `ν̄(u) = u'(s_out)/Ā(s_out)`.
    pub nu_u: f64,
    /// Boundary mean curvature in `ĝ`, `H̄ + 4 ν̄(u)`.
    pub hhat: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalSummary {
    pub min_u: f64,
    pub max_u: f64,
    pub nu_u: f64,
    #[serde(rename = "Hhat")]
    pub hhat: f64,
}

impl ConformalSolution {
    pub fn summary(&self) -> ConformalSummary {
        ConformalSummary {
            min_u: self.u.min(),
            max_u: self.u.max(),
            nu_u: self.nu_u,
            hhat: self.hhat,
        }
    }
}

/// Bands of the discrete operator `Δ̄ - R̄/8` with the boundary rows.
fn assemble(gd: &GraphData) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let grid = *gd.abar.grid();
    let n = grid.n();
    let h = grid.spacing();
    let abar = gd.abar.values();
    let b = gd.b.values();
    let r = gd.rbar.values();
    // flux coefficient B²/Ā at the midpoint of each interval
    let coef: Vec<f64> = (0..n)
        .map(|i| {
            let bm = 0.5 * (b[i] + b[i + 1]);
            2.0 * bm * bm / (abar[i] + abar[i + 1])
        })
        .collect();
    let mut lower = vec![0.0; n + 1];
    let mut diag = vec![0.0; n + 1];
    let mut upper = vec![0.0; n + 1];
    if grid.has_center() {
        let c = 6.0 / (h * h * abar[0] * abar[0]);
        diag[0] = -c - r[0] / 8.0;
        upper[0] = c;
    } else {
        diag[0] = 1.0;
    }
    for i in 1..n {
        // cell volume over [s_{i-1/2}, s_{i+1/2}] per unit solid angle
        let (bl, br) = (0.5 * (b[i - 1] + b[i]), 0.5 * (b[i] + b[i + 1]));
        let vol = abar[i] * h * (bl * bl + bl * br + br * br) / 3.0;
        let scale = 1.0 / (vol * h);
        let left = coef[i - 1] * scale;
        let right = coef[i] * scale;
        lower[i] = left;
        upper[i] = right;
        diag[i] = -left - right - r[i] / 8.0;
    }
    diag[n] = 1.0;
    (lower, diag, upper)
}

/// Second-order tridiagonal solve; `u = 1 + v` must stay positive.
pub fn solve_conformal(gd: &GraphData) -> Result<ConformalSolution> {
    let grid = *gd.abar.grid();
    let n = grid.n();
    let h = grid.spacing();
    let (lower, diag, upper) = assemble(gd);
    let mut rhs: Vec<f64> = gd.rbar.values().iter().map(|r| r / 8.0).collect();
    if !grid.has_center() {
        rhs[0] = 0.0;
    }
    rhs[n] = 0.0;
    let v = RadialField::new(grid, solve_tridiagonal(&lower, &diag, &upper, &rhs)?)?;
    let u = v.map(|v| 1.0 + v);
    let min_u = u.min();
    if !(min_u > 0.0) {
        return Err(Error::ConformalNotPositive { min_u });
    }
    let vv = v.values();
    let dv = (3.0 * vv[n] - 4.0 * vv[n - 1] + vv[n - 2]) / (2.0 * h);
    let nu_u = dv / gd.abar.last();
    Ok(ConformalSolution {
        v,
        u,
        nu_u,
        hhat: gd.hbar + 4.0 * nu_u,
    })
}

/// `∫Ĥ - ∫(H̄ - ⟨X, ν̄⟩)` over the outer sphere.
pub fn check_prop5_boundary(gd: &GraphData, cs: &ConformalSolution) -> f64 {
    let area = 4.0 * PI * gd.areal_radius * gd.areal_radius;
    area * (cs.hhat - gd.hbar + gd.xnu)
}
