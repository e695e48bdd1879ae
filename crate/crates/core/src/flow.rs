//! Quasi-spherical flow on the exterior parallel foliation of a convex
//! surface of revolution.
//!
//! The leaves are `Σ_r = {X + rN}`, with principal curvatures
//! `κ_i/(1 + rκ_i)`. The lapse `h` obeys
//!
//! ```text
//! ∂h/∂r = [2h² Δ_r h + (h - h³) R_r] / (2 H0_r)
//! ```
//!
//! which is discretized in θ by a finite-volume Laplacian whose cell
//! volumes evolve as `V_j(r) = V_j(0)(1 + rκ1_j)(1 + rκ2_j)`. With this
//! choice the discrete mass aspect obeys the discrete monotonicity formula
//! exactly, so the two differ only by the error of differencing in `r`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{integrate_ode_limited, nonuniform_derivative, Tolerances};
use crate::surface::ProfileEmbedding;

/// Which initial condition seeded the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMode {
    /// `h = H0/H` from time-symmetric data.
    Riemannian,
    /// `h = H0/(H̄ - ⟨X, ν̄⟩)` from the deformed data.
    General,
}

/// One leaf `Σ_r` of the parallel foliation.
#[derive(Debug, Clone, PartialEq)]
pub struct FoliationSlice {
    pub r: f64,
    pub kappa1: Vec<f64>,
    pub kappa2: Vec<f64>,
    pub h0: Vec<f64>,
    /// Scalar curvature `2κ1κ2` of the leaf.
    pub scalar_curvature: Vec<f64>,
    /// Cell integrals of the area density; `2π Σ V_j` is the leaf area.
    pub volumes: Vec<f64>,
    pub area: f64,
    /// Induced metric coefficients `A_r`, `B_r` on the θ nodes.
    pub metric_a: Vec<f64>,
    pub metric_b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Midpoint {
    rho: f64,
    sqrt_a: f64,
    kappa1: f64,
    kappa2: f64,
}

/// Exterior parallel foliation of a strictly convex base surface.
#[derive(Debug, Clone)]
pub struct ParallelFoliation {
    base: ProfileEmbedding,
    v0: Vec<f64>,
    mid: Vec<Midpoint>,
}

impl ParallelFoliation {
    pub fn new(base: ProfileEmbedding) -> Result<Self> {
        if let Some(j) = (0..=base.n()).find(|&j| !(base.kappa1[j] > 0.0 && base.kappa2[j] > 0.0)) {
            return Err(Error::NotEmbeddable { theta: base.theta[j] });
        }
        let h = base.metric.spacing();
        let mid = (0..base.n())
            .map(|j| {
                let p = base.point(base.theta[j] + 0.5 * h)?;
                Ok(Midpoint {
                    rho: p.rho,
                    sqrt_a: p.sqrt_a,
                    kappa1: p.kappa1,
                    kappa2: p.kappa2,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let v0 = base.cell_volumes();
        Ok(Self { base, v0, mid })
    }

    pub fn base(&self) -> &ProfileEmbedding {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// Radius of the round sphere with the base area.
    pub fn mean_radius(&self) -> f64 {
        (self.base.area / (4.0 * PI)).sqrt()
    }

    fn stretch(&self, j: usize, r: f64) -> (f64, f64) {
        (1.0 + r * self.base.kappa1[j], 1.0 + r * self.base.kappa2[j])
    }

    fn volumes(&self, r: f64) -> Vec<f64> {
        (0..=self.n())
            .map(|j| {
                let (s1, s2) = self.stretch(j, r);
                self.v0[j] * s1 * s2
            })
            .collect()
    }

    /// Curvature data of `Σ_r`.
    pub fn slice(&self, r: f64) -> FoliationSlice {
        let n = self.n();
        let mut s = FoliationSlice {
            r,
            kappa1: vec![0.0; n + 1],
            kappa2: vec![0.0; n + 1],
            h0: vec![0.0; n + 1],
            scalar_curvature: vec![0.0; n + 1],
            volumes: self.volumes(r),
            area: 0.0,
            metric_a: vec![0.0; n + 1],
            metric_b: vec![0.0; n + 1],
        };
        let (a, b) = (self.base.metric.a(), self.base.metric.b());
        for j in 0..=n {
            let (s1, s2) = self.stretch(j, r);
            let (k1, k2) = (self.base.kappa1[j] / s1, self.base.kappa2[j] / s2);
            s.kappa1[j] = k1;
            s.kappa2[j] = k2;
            s.h0[j] = k1 + k2;
            s.scalar_curvature[j] = 2.0 * k1 * k2;
            s.metric_a[j] = a[j] * s1 * s1;
            s.metric_b[j] = b[j] * s2 * s2;
        }
        s.area = 2.0 * PI * s.volumes.iter().sum::<f64>();
        s
    }

    /// Axis-regular finite-volume `Δ_r h`.
    pub fn laplacian(&self, r: f64, h: &[f64], out: &mut [f64]) {
        let n = self.n();
        let dt = self.base.metric.spacing();
        let mut flux_prev = 0.0;
        for j in 0..=n {
            let flux_next = if j < n {
                let m = &self.mid[j];
                let c = m.rho * (1.0 + r * m.kappa2) / (m.sqrt_a * (1.0 + r * m.kappa1));
                c * (h[j + 1] - h[j]) / dt
            } else {
                0.0
            };
            let (s1, s2) = self.stretch(j, r);
            out[j] = (flux_next - flux_prev) / (self.v0[j] * s1 * s2);
            flux_prev = flux_next;
        }
    }

    /// Right side of the flow equation.
    pub fn rhs(&self, r: f64, h: &[f64], out: &mut [f64]) {
        self.laplacian(r, h, out);
        for j in 0..=self.n() {
            let (s1, s2) = self.stretch(j, r);
            let (k1, k2) = (self.base.kappa1[j] / s1, self.base.kappa2[j] / s2);
            let hj = h[j];
            out[j] = (2.0 * hj * hj * out[j] + (hj - hj.powi(3)) * 2.0 * k1 * k2) / (2.0 * (k1 + k2));
        }
    }

    /// Gershgorin bound on the spectral radius of the diffusive part of
    /// the flow Jacobian.
    fn stiffness(&self, r: f64, h: &[f64]) -> f64 {
        let n = self.n();
        let dt = self.base.metric.spacing();
        let coef = |i: usize| {
            let m = &self.mid[i];
            m.rho * (1.0 + r * m.kappa2) / (m.sqrt_a * (1.0 + r * m.kappa1))
        };
        (0..=n)
            .map(|j| {
                let (s1, s2) = self.stretch(j, r);
                let h0 = self.base.kappa1[j] / s1 + self.base.kappa2[j] / s2;
                let flux = if j > 0 { coef(j - 1) } else { 0.0 } + if j < n { coef(j) } else { 0.0 };
                2.0 * h[j] * h[j] * flux / (h0 * self.v0[j] * s1 * s2 * dt)
            })
            .fold(0.0, f64::max)
    }

    /// `m(r) = (1/8πG) ∫ (H0 - H0/h) dσ_r`.
    pub fn mass(&self, r: f64, h: &[f64], gravity: f64) -> f64 {
        let s = self.slice(r);
        let sum: f64 = (0..=self.n())
            .map(|j| s.volumes[j] * s.h0[j] * (1.0 - 1.0 / h[j]))
            .sum();
        sum / (4.0 * gravity)
    }

    /// `-(1/16πG) ∫ R_r h⁻¹ (1 - h)² dσ_r`, never positive.
    pub fn mass_derivative(&self, r: f64, h: &[f64], gravity: f64) -> f64 {
        let s = self.slice(r);
        let sum: f64 = (0..=self.n())
            .map(|j| s.volumes[j] * s.scalar_curvature[j] * (1.0 - h[j]).powi(2) / h[j])
            .sum();
        -sum / (8.0 * gravity)
    }
}

/// Leaf of the foliation of `base` at distance `r`.
pub fn parallel_geometry(base: &ProfileEmbedding, r: f64) -> Result<FoliationSlice> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Input(format!("flow radius must be non-negative, got {r}")));
    }
    Ok(ParallelFoliation::new(base.clone())?.slice(r))
}

/// `samples + 1` radii on `[0, r_max]`, uniform in `log(1 + r/scale)`.
pub fn flow_radii(scale: f64, r_max: f64, samples: usize) -> Result<Vec<f64>> {
    if !(scale > 0.0 && r_max > 0.0 && r_max.is_finite()) || samples < 2 {
        return Err(Error::Input(format!(
            "flow grid needs r_max > 0 and ≥ 2 samples (r_max = {r_max}, samples = {samples})"
        )));
    }
    let top = (r_max / scale).ln_1p();
    let mut r: Vec<f64> = (0..=samples)
        .map(|k| scale * (top * k as f64 / samples as f64).exp_m1())
        .collect();
    r[samples] = r_max;
    Ok(r)
}

/// Largest step in units of the inverse stiffness bound. Dormand–Prince
/// damps real eigenvalues strongly well inside `|hλ| < 3.3`.
const STIFF_STEP: f64 = 1.0;

/// The lapse `h` on every leaf of the output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub mode: FlowMode,
    pub radii: Vec<f64>,
    pub h: Vec<Vec<f64>>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl FlowState {
    pub fn h_min(&self) -> f64 {
        self.h.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }
    pub fn h_max(&self) -> f64 {
        self.h.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Integrates the flow from `h0` across `radii` (which must start at 0).
pub fn flow_solve(
    fol: &ParallelFoliation,
    h0: &[f64],
    mode: FlowMode,
    radii: &[f64],
    tol: &Tolerances,
) -> Result<FlowState> {
    tol.validate()?;
    if h0.len() != fol.n() + 1 {
        return Err(Error::Grid(format!(
            "initial lapse has {} values, the base has {} nodes",
            h0.len(),
            fol.n() + 1
        )));
    }
    if let Some(j) = h0.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Input(format!(
            "initial lapse must be positive (node {j} holds {})",
            h0[j]
        )));
    }
    if radii.first() != Some(&0.0) || radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("flow radii must start at 0 and increase strictly".into()));
    }
    let mut state = FlowState {
        mode,
        radii: vec![0.0],
        h: vec![h0.to_vec()],
        accepted_steps: 0,
        rejected_steps: 0,
    };
    let rhs = |r: f64, h: &[f64], out: &mut [f64]| {
        if h.iter().any(|&v| v <= 0.0) {
            out.fill(f64::NAN);
        } else {
            fol.rhs(r, h, out);
        }
    };
    for w in radii.windows(2) {
        let last = state.h.last().expect("state holds the initial lapse").clone();
        let cap = |r: f64, h: &[f64]| STIFF_STEP / fol.stiffness(r, h).max(f64::MIN_POSITIVE);
        let seg = integrate_ode_limited(rhs, cap, &last, w, tol).map_err(|e| match e {
            Error::StepUnderflow { .. } => Error::FlowBreakdown {
                r: w[0],
                reason: "step size underflow".into(),
            },
            other => other,
        })?;
        state.accepted_steps += seg.accepted_steps;
        state.rejected_steps += seg.rejected_steps;
        let h = seg.last().to_vec();
        if let Some(&v) = h.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::FlowBreakdown {
                r: w[0],
                reason: format!("lapse reached {v}"),
            });
        }
        state.radii.push(w[1]);
        state.h.push(h);
    }
    Ok(state)
}

/// Mass aspect along a flow with its asymptotic fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassAspect {
    pub radii: Vec<f64>,
    pub m: Vec<f64>,
    /// Coefficient of `1/ρ` in `h - 1`.
    pub m_o: f64,
    pub m_inf: f64,
    /// Extrapolation with an extra `1/ρ²` term.
    pub m_inf_quadratic: f64,
    /// Tail supremum of `ρ²|h - 1 - m_o/ρ|`.
    pub kappa_bound: f64,
    /// Largest increase `m(r_{k+1}) - m(r_k)`.
    pub max_increase: f64,
}

impl MassAspect {
    pub fn m0(&self) -> f64 {
        self.m[0]
    }
}

/// Least-squares coefficients of `y ≈ Σ_k c_k x^k`.
fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Vec<f64> {
    let cols = degree + 1;
    let mut design = nalgebra::DMatrix::zeros(x.len(), cols);
    for (i, &xi) in x.iter().enumerate() {
        for k in 0..cols {
            design[(i, k)] = xi.powi(k as i32);
        }
    }
    let rhs = nalgebra::DVector::from_column_slice(y);
    let sol = design
        .svd(true, true)
        .solve(&rhs, 0.0)
        .expect("SVD factors were requested");
    sol.iter().copied().collect()
}

fn tail_start(radii: &[f64]) -> usize {
    let r_max = radii[radii.len() - 1];
    radii.iter().position(|&r| r >= 0.5 * r_max).unwrap_or(0)
}

/// Areal radius and area-weighted mean lapse of every stored leaf.
fn leaf_averages(fol: &ParallelFoliation, flow: &FlowState) -> Vec<(f64, f64)> {
    flow.radii
        .iter()
        .zip(&flow.h)
        .map(|(&r, h)| {
            let v = fol.volumes(r);
            let total: f64 = v.iter().sum();
            let mean = v.iter().zip(h).map(|(a, b)| a * b).sum::<f64>() / total;
            ((2.0 * PI * total / (4.0 * PI)).sqrt(), mean)
        })
        .collect()
}

/// `m(r)` on every stored leaf and the asymptotic fits over `[r_max/2, r_max]`.
pub fn mass_aspect(fol: &ParallelFoliation, flow: &FlowState, gravity: f64, tol: &Tolerances) -> Result<MassAspect> {
    if !(gravity > 0.0 && gravity.is_finite()) {
        return Err(Error::Input(format!("G must be positive, got {gravity}")));
    }
    let r_max = flow.radii[flow.radii.len() - 1];
    if r_max < 50.0 * fol.mean_radius() {
        return Err(Error::Input(format!(
            "r_max = {r_max} is below 50 mean radii ({})",
            50.0 * fol.mean_radius()
        )));
    }
    let tail = tail_start(&flow.radii);
    if flow.radii.len() - tail < 20 {
        return Err(Error::Input(format!(
            "only {} flow samples in the tail, need 20",
            flow.radii.len() - tail
        )));
    }
    let m: Vec<f64> = flow
        .radii
        .iter()
        .zip(&flow.h)
        .map(|(&r, h)| fol.mass(r, h, gravity))
        .collect();
    let max_increase = m.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let leaves = leaf_averages(fol, flow);
    let inv: Vec<f64> = leaves[tail..].iter().map(|(rho, _)| 1.0 / rho).collect();
    let linear = polyfit(&inv, &m[tail..], 1);
    let quadratic = polyfit(&inv, &m[tail..], 2);
    let (m_o, kappa_bound) = asymptotics_from(&leaves, flow, tail);
    let aspect = MassAspect {
        radii: flow.radii.clone(),
        m,
        m_o,
        m_inf: linear[0],
        m_inf_quadratic: quadratic[0],
        kappa_bound,
        max_increase,
    };
    if aspect.max_increase > tol.ineq_slack.max(1e-9) {
        return Err(Error::Violation {
            check: "mass aspect monotonicity".into(),
            margin: -aspect.max_increase,
        });
    }
    Ok(aspect)
}

fn asymptotics_from(leaves: &[(f64, f64)], flow: &FlowState, tail: usize) -> (f64, f64) {
    let rho: Vec<f64> = leaves[tail..].iter().map(|l| l.0).collect();
    let inv: Vec<f64> = rho.iter().map(|r| 1.0 / r).collect();
    let scaled: Vec<f64> = leaves[tail..].iter().map(|(rho, h)| (h - 1.0) * rho).collect();
    let m_o = polyfit(&inv, &scaled, 1)[0];
    let kappa = flow.h[tail..]
        .iter()
        .zip(&rho)
        .flat_map(|(h, &r)| h.iter().map(move |&v| r * r * (v - 1.0 - m_o / r).abs()))
        .fold(0.0, f64::max);
    (m_o, kappa)
}

/// Decay fit of the lapse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymptotics {
    pub m_o: f64,
    pub kappa_bound: f64,
    /// `ρ²|h - 1 - m_o/ρ|` did not grow by more than 20% across the last
    /// decade of areal radius.
    pub kappa_stable: bool,
}

pub fn asymptotics_check(fol: &ParallelFoliation, flow: &FlowState) -> Asymptotics {
    let leaves = leaf_averages(fol, flow);
    let tail = tail_start(&flow.radii);
    let (m_o, kappa_bound) = asymptotics_from(&leaves, flow, tail);
    let rho_max = leaves[leaves.len() - 1].0;
    let kappa_at = |k: usize| {
        let r = leaves[k].0;
        flow.h[k]
            .iter()
            .map(|&v| r * r * (v - 1.0 - m_o / r).abs())
            .fold(0.0, f64::max)
    };
    let decade: Vec<usize> = (0..leaves.len()).filter(|&k| leaves[k].0 >= 0.1 * rho_max).collect();
    let half = decade.len() / 2;
    let early = decade[..half].iter().map(|&k| kappa_at(k)).fold(0.0, f64::max);
    let late = decade[half..].iter().map(|&k| kappa_at(k)).fold(0.0, f64::max);
    Asymptotics {
        m_o,
        kappa_bound,
        kappa_stable: late <= 1.2 * early + 1e-12,
    }
}

/// Differenced mass aspect against the monotonicity formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub radii: Vec<f64>,
    pub rhs: Vec<f64>,
    pub dmdr_fd: Vec<f64>,
    /// Largest `|Δm/Δr - rhs|` over interior radii.
    pub max_discrepancy: f64,
    /// Largest value of the formula, which must not be positive.
    pub max_rhs: f64,
}

pub fn monotonicity_check(fol: &ParallelFoliation, flow: &FlowState, gravity: f64) -> MonotonicityReport {
    let r = &flow.radii;
    let m: Vec<f64> = r.iter().zip(&flow.h).map(|(&ri, h)| fol.mass(ri, h, gravity)).collect();
    let rhs: Vec<f64> = r
        .iter()
        .zip(&flow.h)
        .map(|(&ri, h)| fol.mass_derivative(ri, h, gravity))
        .collect();
    let dmdr_fd: Vec<f64> = (0..r.len()).map(|k| nonuniform_derivative(r, &m, k)).collect();
    let max_discrepancy = (1..r.len() - 1)
        .map(|k| (dmdr_fd[k] - rhs[k]).abs())
        .fold(0.0, f64::max);
    let max_rhs = rhs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    MonotonicityReport {
        radii: r.clone(),
        rhs,
        dmdr_fd,
        max_discrepancy,
        max_rhs,
    }
}

/// Monotonicity discrepancy on an output grid and on its refinement,
/// compared at the shared radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub coarse: f64,
    pub fine: f64,
    pub order: f64,
    /// Largest `m(r_{k+1}) - m(r_k)` on the fine grid.
    pub max_increase: f64,
    /// Largest value of the monotonicity integrand on the fine grid.
    pub max_rhs: f64,
}

pub fn eq11_convergence(
    fol: &ParallelFoliation,
    h0: &[f64],
    r_max: f64,
    samples: usize,
    tol: &Tolerances,
) -> Result<ConvergenceStudy> {
    let scale = fol.mean_radius();
    let coarse_r = flow_radii(scale, r_max, samples)?;
    let fine_r = flow_radii(scale, r_max, 2 * samples)?;
    let coarse = monotonicity_check(fol, &flow_solve(fol, h0, FlowMode::General, &coarse_r, tol)?, 1.0);
    let fine_flow = flow_solve(fol, h0, FlowMode::General, &fine_r, tol)?;
    let fine = monotonicity_check(fol, &fine_flow, 1.0);
    let worst = |m: &MonotonicityReport, stride: usize| {
        (1..samples)
            .map(|k| (m.dmdr_fd[k * stride] - m.rhs[k * stride]).abs())
            .fold(0.0, f64::max)
    };
    let (c, f) = (worst(&coarse, 1), worst(&fine, 2));
    let masses: Vec<f64> = fine_r
        .iter()
        .zip(&fine_flow.h)
        .map(|(&r, h)| fol.mass(r, h, 1.0))
        .collect();
    Ok(ConvergenceStudy {
        coarse: c,
        fine: f,
        order: (c / f).log2(),
        max_increase: masses.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max),
        max_rhs: fine.max_rhs,
    })
}

/// Smooth positive lapse `c0 + Σ_{k≤3} c_k cos(kθ)` with seeded
/// coefficients; even across both poles.
pub fn random_lapse(theta: &[f64], seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let c0 = rng.random_range(0.8..1.5);
    let c: Vec<f64> = (1..=3).map(|k| rng.random_range(-0.15..0.15) / k as f64).collect();
    theta
        .iter()
        .map(|t| {
            c0 + c
                .iter()
                .enumerate()
                .map(|(k, ck)| ck * ((k + 1) as f64 * t).cos())
                .sum::<f64>()
        })
        .collect()
}

/// Per-leaf table with the header `r,m_r,h_min,h_max,rhs11,dmdr_fd`.
pub fn flow_csv(fol: &ParallelFoliation, flow: &FlowState, gravity: f64) -> String {
    let mono = monotonicity_check(fol, flow, gravity);
    let mut out = String::from("r,m_r,h_min,h_max,rhs11,dmdr_fd\n");
    for (k, (&r, h)) in flow.radii.iter().zip(&flow.h).enumerate() {
        let lo = h.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.push_str(&format!(
            "{r:.12e},{:.12e},{lo:.12e},{hi:.12e},{:.12e},{:.12e}\n",
            fol.mass(r, h, gravity),
            mono.rhs[k],
            mono.dmdr_fd[k]
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{weyl_embed, AxisymMetric};

    fn round(a: f64, n: usize) -> ParallelFoliation {
        ParallelFoliation::new(weyl_embed(&AxisymMetric::round(a, n).unwrap()).unwrap()).unwrap()
    }

    fn ellipsoid(n: usize) -> ParallelFoliation {
        ParallelFoliation::new(weyl_embed(&AxisymMetric::ellipsoid(1.0, 1.0, 2.0, n).unwrap()).unwrap()).unwrap()
    }

    #[test]
    fn parallel_spheres() {
        let fol = round(2.0, 64);
        for r in [0.0, 0.5, 10.0] {
            let s = fol.slice(r);
            for j in 0..=64 {
                assert!((s.kappa1[j] - 1.0 / (2.0 + r)).abs() < 1e-12);
                assert!((s.kappa2[j] - 1.0 / (2.0 + r)).abs() < 1e-12);
                assert!((s.h0[j] - 2.0 / (2.0 + r)).abs() < 1e-12);
                assert!((s.scalar_curvature[j] - 2.0 / (2.0 + r).powi(2)).abs() < 1e-12);
            }
            assert!((s.area - 4.0 * PI * (2.0 + r).powi(2)).abs() < 1e-9 * s.area);
        }
    }

    #[test]
    fn zero_radius_is_the_base() {
        let fol = ellipsoid(64);
        let s = fol.slice(0.0);
        assert_eq!(s.kappa1, fol.base().kappa1);
        assert_eq!(s.kappa2, fol.base().kappa2);
        assert_eq!(s.metric_a, fol.base().metric.a());
    }

    #[test]
    fn leaf_curvature_matches_intrinsic_gauss() {
        let fol = ellipsoid(256);
        for r in [0.3, 2.0] {
            let s = fol.slice(r);
            let leaf = AxisymMetric::from_fields(s.metric_a.clone(), s.metric_b.clone()).unwrap();
            let k = crate::surface::gauss_curvature(&leaf).unwrap();
            for j in 0..=256 {
                // pole curvatures are extrapolated, which leaves a tiny cone on the tabulated leaf
                let tol = if (8..=248).contains(&j) { 1e-6 } else { 1e-3 };
                assert!((2.0 * k[j] - s.scalar_curvature[j]).abs() < tol, "r={r} j={j}");
            }
        }
    }

    #[test]
    fn area_increases() {
        let fol = ellipsoid(64);
        let areas: Vec<f64> = [0.0, 0.1, 1.0, 5.0].iter().map(|&r| fol.slice(r).area).collect();
        assert!(areas.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn laplacian_is_conservative_and_kills_constants() {
        let fol = ellipsoid(64);
        let h: Vec<f64> = fol
            .base()
            .theta
            .iter()
            .map(|t| 1.0 + 0.3 * t.cos() + 0.1 * (3.0 * t).sin().powi(2))
            .collect();
        for r in [0.0, 3.0] {
            let mut out = vec![0.0; 65];
            fol.laplacian(r, &h, &mut out);
            let total: f64 = out.iter().zip(fol.volumes(r)).map(|(l, v)| l * v).sum();
            assert!(total.abs() < 1e-12);
            fol.laplacian(r, &[2.5; 65], &mut out);
            assert!(out.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn laplacian_of_cosine_on_round_sphere() {
        // Δ cos θ = -2 cos θ / a²
        let err = |n: usize| {
            let fol = round(1.5, n);
            let h: Vec<f64> = fol.base().theta.iter().map(|t| t.cos()).collect();
            let mut out = vec![0.0; n + 1];
            fol.laplacian(0.0, &h, &mut out);
            (0..=n).map(|j| (out[j] + 2.0 * h[j] / 2.25).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(64), err(128));
        assert!(e2 < 1e-2 && (e1 / e2).log2() > 1.8, "{e1} {e2}");
    }

    #[test]
    fn unit_lapse_is_a_fixed_point() {
        let fol = ellipsoid(64);
        let radii = flow_radii(fol.mean_radius(), 100.0 * fol.mean_radius(), 50).unwrap();
        let flow = flow_solve(&fol, &[1.0; 65], FlowMode::Riemannian, &radii, &Tolerances::default()).unwrap();
        for h in &flow.h {
            assert!(h.iter().all(|v| (v - 1.0).abs() < 1e-12));
        }
        for (&r, h) in flow.radii.iter().zip(&flow.h) {
            assert_eq!(fol.mass(r, h, 1.0), 0.0);
        }
    }

    #[test]
    fn schwarzschild_lapse_is_exact() {
        let (a, mass) = (2.5, 1.0);
        let fol = round(a, 64);
        let h0 = vec![(1.0 - 2.0 * mass / a).powf(-0.5); 65];
        let radii = flow_radii(a, 100.0 * a, 200).unwrap();
        let flow = flow_solve(&fol, &h0, FlowMode::Riemannian, &radii, &Tolerances::default()).unwrap();
        for (&r, h) in flow.radii.iter().zip(&flow.h) {
            let exact = (1.0 - 2.0 * mass / (a + r)).powf(-0.5);
            for v in h {
                assert!((v - exact).abs() < 1e-8 * exact, "r={r}");
            }
            let spread =
                h.iter().copied().fold(f64::NEG_INFINITY, f64::max) - h.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(spread <= 1e-10);
            let m = fol.mass(r, h, 1.0);
            let closed = (a + r) * (1.0 - (1.0 - 2.0 * mass / (a + r)).sqrt());
            assert!((m - closed).abs() < 1e-8 * closed);
            // d/dρ of ρ(1 - √(1 - 2M/ρ)) is 1 - (1 - M/ρ)/√(1 - 2M/ρ)
            let rho = a + r;
            let q = (1.0 - 2.0 * mass / rho).sqrt();
            let exact_dm = 1.0 - (1.0 - mass / rho) / q;
            assert!((fol.mass_derivative(r, h, 1.0) - exact_dm).abs() < 1e-6, "r={r}");
        }
        let aspect = mass_aspect(&fol, &flow, 1.0, &Tolerances::default()).unwrap();
        assert!((aspect.m0() - 2.5 * (1.0 - 0.2f64.sqrt())).abs() < 1e-9);
        assert!((aspect.m_inf - mass).abs() < 1e-4, "{}", aspect.m_inf);
        assert!((aspect.m_o - mass).abs() < 1e-3, "{}", aspect.m_o);
        assert!((aspect.m_inf - aspect.m_inf_quadratic).abs() < 1e-3 * aspect.m_inf);
        let asym = asymptotics_check(&fol, &flow);
        assert!(asym.kappa_stable && asym.kappa_bound.is_finite());
    }

    #[test]
    fn mass_scales_inversely_with_gravity() {
        let fol = round(2.5, 64);
        let h = vec![1.3; 65];
        assert!((fol.mass(1.0, &h, 2.0) * 2.0 - fol.mass(1.0, &h, 1.0)).abs() < 1e-14);
    }

    fn bumpy_lapse(fol: &ParallelFoliation) -> Vec<f64> {
        fol.base().theta.iter().map(|t| 1.0 + 0.1 * (-t * t).exp()).collect()
    }

    #[test]
    fn ellipsoid_flow_stays_positive_and_monotone() {
        let fol = ellipsoid(64);
        let radii = flow_radii(fol.mean_radius(), 60.0 * fol.mean_radius(), 300).unwrap();
        let flow = flow_solve(
            &fol,
            &bumpy_lapse(&fol),
            FlowMode::General,
            &radii,
            &Tolerances::default(),
        )
        .unwrap();
        assert!(flow.h_min() > 0.0);
        let aspect = mass_aspect(&fol, &flow, 1.0, &Tolerances::default()).unwrap();
        assert!(aspect.m.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        let mono = monotonicity_check(&fol, &flow, 1.0);
        assert!(mono.max_rhs <= 0.0);
        assert!(aspect.m_inf <= aspect.m0() + 1e-8);
    }

    #[test]
    fn monotonicity_discrepancy_converges() {
        let fol = ellipsoid(64);
        let h0 = bumpy_lapse(&fol);
        let run = |samples: usize| {
            let radii = flow_radii(fol.mean_radius(), 20.0 * fol.mean_radius(), samples).unwrap();
            let flow = flow_solve(&fol, &h0, FlowMode::General, &radii, &Tolerances::default()).unwrap();
            monotonicity_check(&fol, &flow, 1.0)
        };
        let (coarse, fine) = (run(200), run(400));
        let ratio = coarse.max_discrepancy / fine.max_discrepancy;
        assert!(
            ratio >= 3.5,
            "{} {} ratio {ratio}",
            coarse.max_discrepancy,
            fine.max_discrepancy
        );
    }

    #[test]
    fn random_lapses_converge_at_second_order() {
        for (fol, seed) in [(round(1.0, 64), 1), (ellipsoid(64), 2), (ellipsoid(64), 3)] {
            let h0 = random_lapse(&fol.base().theta, seed);
            assert!(h0.iter().all(|&v| v > 0.0));
            let study = eq11_convergence(&fol, &h0, 20.0 * fol.mean_radius(), 100, &Tolerances::default()).unwrap();
            assert!(study.order >= 1.9, "{study:?}");
            assert!(study.max_increase <= 1e-9 && study.max_rhs <= 0.0);
        }
    }

    #[test]
    fn unit_lapse_asymptotics_vanish() {
        let fol = round(1.0, 64);
        let radii = flow_radii(1.0, 100.0, 200).unwrap();
        let flow = flow_solve(&fol, &[1.0; 65], FlowMode::Riemannian, &radii, &Tolerances::default()).unwrap();
        let aspect = mass_aspect(&fol, &flow, 1.0, &Tolerances::default()).unwrap();
        assert!(aspect.m.iter().all(|&m| m == 0.0));
        assert!(aspect.m_inf.abs() < 1e-14 && aspect.m_o.abs() < 1e-14 && aspect.kappa_bound < 1e-10);
    }

    #[test]
    fn csv_header_and_rows() {
        let fol = round(1.0, 64);
        let radii = flow_radii(1.0, 10.0, 10).unwrap();
        let flow = flow_solve(&fol, &[1.0; 65], FlowMode::Riemannian, &radii, &Tolerances::default()).unwrap();
        let csv = flow_csv(&fol, &flow, 1.0);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("r,m_r,h_min,h_max,rhs11,dmdr_fd"));
        assert_eq!(lines.count(), 11);
    }

    #[test]
    fn rejects_bad_inputs() {
        let fol = round(1.0, 64);
        let radii = flow_radii(1.0, 10.0, 10).unwrap();
        let tol = Tolerances::default();
        let mut h = vec![1.0; 65];
        h[3] = -0.1;
        assert!(matches!(
            flow_solve(&fol, &h, FlowMode::General, &radii, &tol),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            flow_solve(&fol, &[1.0; 10], FlowMode::General, &radii, &tol),
            Err(Error::Grid(_))
        ));
        let flow = flow_solve(&fol, &[1.0; 65], FlowMode::General, &radii, &tol).unwrap();
        assert!(matches!(mass_aspect(&fol, &flow, 1.0, &tol), Err(Error::Input(_))));
    }
}
