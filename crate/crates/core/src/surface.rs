//! Axisymmetric metrics `A(θ) dθ² + B(θ) dφ²` on the sphere and their
//! realization as convex surfaces of revolution in Euclidean space.
//!
//! The θ grid holds the nodes `θ_j = jπ/n`, poles included. Profiles are
//! `(ρ, z)` with `ρ = √B` the distance to the axis and
//! `z' = √(A - ρ'²)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{interpolate_uniform, simpson_uniform};

/// Smallest admissible number of θ intervals.
pub const MIN_THETA_INTERVALS: usize = 64;

const GAUSS_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GAUSS_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Integral of `f` over `[lo, hi]` by 5-point Gauss–Legendre.
pub(crate) fn gauss_legendre(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    GAUSS_NODES
        .iter()
        .zip(GAUSS_WEIGHTS)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum MetricPreset {
    Round {
        radius: f64,
    },
    /// Ellipsoid with semi-axes `(a, b, c)`; axisymmetry about `z` needs `a = b`.
    Ellipsoid {
        a: f64,
        b: f64,
        c: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub theta_n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<MetricPreset>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
}

/// Metric coefficient `A`, the axis distance `ρ = √B` and their
/// θ-derivatives at one angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricPoint {
    pub a: f64,
    pub da: f64,
    pub rho: f64,
    pub drho: f64,
    pub d2rho: f64,
}

/// Profile geometry at one angle away from the poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub sqrt_a: f64,
    pub rho: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl MetricPoint {
    fn rho_derivatives(&self) -> (f64, f64, f64) {
        (self.rho, self.drho, self.d2rho)
    }

    pub fn b(&self) -> f64 {
        self.rho * self.rho
    }

    /// Intrinsic curvature `K = -ρ''/(Aρ) + ρ'A'/(2A²ρ)`.
    fn gauss(&self) -> f64 {
        let (rho, drho, d2rho) = self.rho_derivatives();
        -d2rho / (self.a * rho) + drho * self.da / (2.0 * self.a * self.a * rho)
    }

    /// Meridian slope `z' = √(A - ρ'²)`, or `None` if not realizable.
    fn dz(&self) -> Option<f64> {
        let (_, drho, _) = self.rho_derivatives();
        let q = self.a - drho * drho;
        (q > 0.0).then(|| q.sqrt())
    }

    fn profile(&self) -> Option<ProfilePoint> {
        let (rho, drho, d2rho) = self.rho_derivatives();
        let dz = self.dz()?;
        let d2z = (self.da - 2.0 * drho * d2rho) / (2.0 * dz);
        let sqrt_a = self.a.sqrt();
        Some(ProfilePoint {
            sqrt_a,
            rho,
            kappa1: (drho * d2z - dz * d2rho) / (self.a * sqrt_a),
            kappa2: dz / (rho * sqrt_a),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Preset(MetricPreset),
    /// `A` extended evenly and `ρ` oddly across the poles.
    Tabulated {
        a_ext: Vec<f64>,
        da_ext: Vec<f64>,
        rho_ext: Vec<f64>,
        drho_ext: Vec<f64>,
        d2rho_ext: Vec<f64>,
    },
}

/// Ghost nodes on each side of a tabulated field.
const GHOSTS: usize = 2;

/// Value at `θ = 0` of an even function sampled at `h, 2h, 3h`.
fn pole_limit(f1: f64, f2: f64, f3: f64) -> f64 {
    (15.0 * f1 - 6.0 * f2 + f3) / 10.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisymMetric {
    n: usize,
    scale: f64,
    source: Source,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl AxisymMetric {
    fn check_n(n: usize) -> Result<()> {
        if n < MIN_THETA_INTERVALS || !n.is_multiple_of(2) {
            return Err(Error::Grid(format!(
                "theta grid needs an even number of intervals ≥ {MIN_THETA_INTERVALS}, got {n}"
            )));
        }
        Ok(())
    }

    pub fn round(radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Input(format!("sphere radius must be positive, got {radius}")));
        }
        Self::from_preset(MetricPreset::Round { radius }, n)
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64, n: usize) -> Result<Self> {
        Self::from_preset(MetricPreset::Ellipsoid { a, b, c }, n)
    }

    pub fn from_preset(preset: MetricPreset, n: usize) -> Result<Self> {
        Self::check_n(n)?;
        if let MetricPreset::Ellipsoid { a, b, c } = preset {
            if !(a > 0.0 && b > 0.0 && c > 0.0) {
                return Err(Error::Input("ellipsoid semi-axes must be positive".into()));
            }
            if a != b {
                return Err(Error::Input(format!(
                    "ellipsoid ({a}, {b}, {c}) is not axisymmetric about z (need a = b)"
                )));
            }
        }
        let source = Source::Preset(preset);
        let h = PI / n as f64;
        let pts: Vec<MetricPoint> = (0..=n).map(|j| preset_point(&source, 1.0, j as f64 * h)).collect();
        let mut m = Self {
            n,
            scale: 1.0,
            source,
            a: pts.iter().map(|p| p.a).collect(),
            b: pts.iter().map(|p| p.b()).collect(),
        };
        m.b[0] = 0.0;
        m.b[n] = 0.0;
        Ok(m)
    }

    /// Tabulated coefficients on the nodes `θ_j = jπ/n`.
    pub fn from_fields(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || a.len() < 2 {
            return Err(Error::Grid("A and B must have the same length".into()));
        }
        let n = a.len() - 1;
        Self::check_n(n)?;
        if let Some(j) = a.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Input(format!("A must be positive (node {j})")));
        }
        if let Some(j) = b[1..n].iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Input(format!(
                "B must be positive away from the poles (node {})",
                j + 1
            )));
        }
        if b[0] != 0.0 || b[n] != 0.0 {
            return Err(Error::Input("B must vanish at both poles".into()));
        }
        let h = PI / n as f64;
        for (label, bj, aj) in [("north", b[1], a[0]), ("south", b[n - 1], a[n])] {
            let ratio = bj / (h * h) / aj;
            if (ratio - 1.0).abs() > 0.05 {
                return Err(Error::Input(format!("{label} pole is singular: B/θ² → {:.4}·A", ratio)));
            }
        }
        let extend = |v: &[f64], sign: f64| {
            let mut e = Vec::with_capacity(n + 1 + 2 * GHOSTS);
            e.extend((1..=GHOSTS).rev().map(|k| sign * v[k]));
            e.extend_from_slice(v);
            e.extend((1..=GHOSTS).map(|k| sign * v[n - k]));
            e
        };
        let rho: Vec<f64> = b.iter().map(|v| v.sqrt()).collect();
        let (a_ext, rho_ext) = (extend(&a, 1.0), extend(&rho, -1.0));
        let d1 = |e: &[f64]| {
            let mut d = vec![0.0; e.len()];
            for i in 2..e.len() - 2 {
                d[i] = (e[i - 2] - 8.0 * e[i - 1] + 8.0 * e[i + 1] - e[i + 2]) / (12.0 * h);
            }
            d
        };
        let d2 = |e: &[f64]| {
            let mut d = vec![0.0; e.len()];
            for i in 2..e.len() - 2 {
                d[i] = (-e[i - 2] + 16.0 * e[i - 1] - 30.0 * e[i] + 16.0 * e[i + 1] - e[i + 2]) / (12.0 * h * h);
            }
            d
        };
        // derivatives are valid on every real node; ghosts only feed interpolation
        let trim_fix = |mut d: Vec<f64>, odd: bool| {
            let len = d.len();
            for k in 1..=GHOSTS {
                let s = if odd { -1.0 } else { 1.0 };
                d[GHOSTS - k] = s * d[GHOSTS + k];
                d[len - 1 - GHOSTS + k] = s * d[len - 1 - GHOSTS - k];
            }
            d
        };
        let da_ext = trim_fix(d1(&a_ext), true);
        let drho_ext = trim_fix(d1(&rho_ext), false);
        let d2rho_ext = trim_fix(d2(&rho_ext), true);
        Ok(Self {
            n,
            scale: 1.0,
            source: Source::Tabulated {
                a_ext,
                da_ext,
                rho_ext,
                drho_ext,
                d2rho_ext,
            },
            a,
            b,
        })
    }

    pub fn from_spec(spec: &MetricSpec) -> Result<Self> {
        match (&spec.preset, &spec.a, &spec.b) {
            (Some(p), None, None) => Self::from_preset(p.clone(), spec.theta_n),
            (None, Some(a), Some(b)) => {
                let m = Self::from_fields(a.clone(), b.clone())?;
                if m.n != spec.theta_n {
                    return Err(Error::Grid(format!(
                        "theta_n = {} but {} coefficients given",
                        spec.theta_n,
                        a.len()
                    )));
                }
                Ok(m)
            }
            _ => Err(Error::Input("metric needs either `preset` or both `A` and `B`".into())),
        }
    }

    pub fn to_spec(&self) -> MetricSpec {
        match (&self.source, self.scale == 1.0) {
            (Source::Preset(p), true) => MetricSpec {
                theta_n: self.n,
                preset: Some(p.clone()),
                a: None,
                b: None,
            },
            _ => MetricSpec {
                theta_n: self.n,
                preset: None,
                a: Some(self.a.clone()),
                b: Some(self.b.clone()),
            },
        }
    }

    /// The metric `λ² g`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let l2 = lambda * lambda;
        Self {
            n: self.n,
            scale: self.scale * lambda,
            source: self.source.clone(),
            a: self.a.iter().map(|v| v * l2).collect(),
            b: self.b.iter().map(|v| v * l2).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn spacing(&self) -> f64 {
        PI / self.n as f64
    }
    pub fn thetas(&self) -> Vec<f64> {
        (0..=self.n).map(|j| j as f64 * self.spacing()).collect()
    }
    pub fn a(&self) -> &[f64] {
        &self.a
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Coefficients and derivatives at any angle.
    pub fn point(&self, theta: f64) -> MetricPoint {
        match &self.source {
            Source::Preset(_) => preset_point(&self.source, self.scale, theta),
            Source::Tabulated {
                a_ext,
                da_ext,
                rho_ext,
                drho_ext,
                d2rho_ext,
            } => {
                let h = self.spacing();
                let x0 = -(GHOSTS as f64) * h;
                let s = self.scale;
                MetricPoint {
                    a: s * s * interpolate_uniform(x0, h, a_ext, theta),
                    da: s * s * interpolate_uniform(x0, h, da_ext, theta),
                    rho: s * interpolate_uniform(x0, h, rho_ext, theta),
                    drho: s * interpolate_uniform(x0, h, drho_ext, theta),
                    d2rho: s * interpolate_uniform(x0, h, d2rho_ext, theta),
                }
            }
        }
    }

    /// Nodal values; tabulated metrics return the stored data exactly.
    fn node(&self, j: usize) -> MetricPoint {
        match &self.source {
            Source::Preset(_) => self.point(j as f64 * self.spacing()),
            Source::Tabulated {
                da_ext,
                rho_ext,
                drho_ext,
                d2rho_ext,
                ..
            } => {
                let s = self.scale;
                MetricPoint {
                    a: self.a[j],
                    da: s * s * da_ext[j + GHOSTS],
                    rho: s * rho_ext[j + GHOSTS],
                    drho: s * drho_ext[j + GHOSTS],
                    d2rho: s * d2rho_ext[j + GHOSTS],
                }
            }
        }
    }

    /// `2π ∫ f √(AB) dθ` by composite Simpson on the nodes.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let vals: Vec<f64> = (0..=self.n).map(|j| f[j] * (self.a[j] * self.b[j]).sqrt()).collect();
        2.0 * PI * simpson_uniform(&vals, self.spacing()).expect("theta grids have an even interval count")
    }

    pub fn area(&self) -> f64 {
        self.integrate(&vec![1.0; self.n + 1])
    }
}

fn preset_point(source: &Source, scale: f64, theta: f64) -> MetricPoint {
    let (sn, cs) = theta.sin_cos();
    let p = match source {
        Source::Preset(MetricPreset::Round { radius }) => MetricPoint {
            a: radius * radius,
            da: 0.0,
            rho: radius * sn,
            drho: radius * cs,
            d2rho: -radius * sn,
        },
        Source::Preset(MetricPreset::Ellipsoid { a, c, .. }) => {
            let (a2, c2sq) = (a * a, c * c);
            MetricPoint {
                a: a2 * cs * cs + c2sq * sn * sn,
                da: (c2sq - a2) * (2.0 * theta).sin(),
                rho: a * sn,
                drho: a * cs,
                d2rho: -a * sn,
            }
        }
        Source::Tabulated { .. } => unreachable!("tabulated metrics are interpolated"),
    };
    let s2 = scale * scale;
    MetricPoint {
        a: s2 * p.a,
        da: s2 * p.da,
        rho: scale * p.rho,
        drho: scale * p.drho,
        d2rho: scale * p.d2rho,
    }
}

/// Intrinsic Gauss curvature at the nodes; pole values from the even
/// expansion. Fails if `K ≤ 0` anywhere.
pub fn gauss_curvature(m: &AxisymMetric) -> Result<Vec<f64>> {
    let n = m.n();
    let mut k = vec![0.0; n + 1];
    for (j, kj) in k.iter_mut().enumerate().take(n).skip(1) {
        *kj = m.node(j).gauss();
    }
    k[0] = pole_limit(k[1], k[2], k[3]);
    k[n] = pole_limit(k[n - 1], k[n - 2], k[n - 3]);
    let theta = m.thetas();
    if let Some(j) = k.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonPositiveCurvature {
            theta: theta[j],
            k: k[j],
        });
    }
    Ok(k)
}

/// Convex surface of revolution realizing an [`AxisymMetric`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileEmbedding {
    pub metric: AxisymMetric,
    pub theta: Vec<f64>,
    pub rho: Vec<f64>,
    pub z: Vec<f64>,
    /// Meridian principal curvature.
    pub kappa1: Vec<f64>,
    /// Parallel principal curvature.
    pub kappa2: Vec<f64>,
    pub h0: Vec<f64>,
    pub area: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSummary {
    pub theta_n: usize,
    pub area: f64,
    pub height: f64,
    pub max_radius: f64,
    pub min_gauss: f64,
    #[serde(rename = "integral_H0")]
    pub integral_h0: f64,
    pub minkowski_margin: f64,
    pub gauss_bonnet_error: f64,
}

/// Weyl embedding of an axisymmetric metric with positive curvature.
pub fn weyl_embed(m: &AxisymMetric) -> Result<ProfileEmbedding> {
    gauss_curvature(m)?;
    let n = m.n();
    let h = m.spacing();
    let theta = m.thetas();
    let mut rho = vec![0.0; n + 1];
    let mut kappa1 = vec![0.0; n + 1];
    let mut kappa2 = vec![0.0; n + 1];
    for j in 1..n {
        let pt = m.node(j);
        let prof = pt.profile().ok_or(Error::NotEmbeddable { theta: theta[j] })?;
        rho[j] = prof.rho;
        kappa1[j] = prof.kappa1;
        kappa2[j] = prof.kappa2;
    }
    for (j, (j1, j2, j3)) in [(0, (1, 2, 3)), (n, (n - 1, n - 2, n - 3))] {
        kappa1[j] = pole_limit(kappa1[j1], kappa1[j2], kappa1[j3]);
        kappa2[j] = pole_limit(kappa2[j1], kappa2[j2], kappa2[j3]);
    }
    let dz = |t: f64| m.point(t).dz().unwrap_or(0.0);
    let mut z = vec![0.0; n + 1];
    for j in 0..n {
        z[j + 1] = z[j] + gauss_legendre(dz, theta[j], theta[j] + h);
    }
    if let Some(j) = (0..=n).find(|&j| !(kappa1[j] > 0.0 && kappa2[j] > 0.0)) {
        return Err(Error::NotEmbeddable { theta: theta[j] });
    }
    let h0: Vec<f64> = kappa1.iter().zip(&kappa2).map(|(a, b)| a + b).collect();
    Ok(ProfileEmbedding {
        area: m.area(),
        metric: m.clone(),
        theta,
        rho,
        z,
        kappa1,
        kappa2,
        h0,
    })
}

impl ProfileEmbedding {
    pub fn n(&self) -> usize {
        self.metric.n()
    }

    /// Profile quantities at an interior angle.
    pub fn point(&self, theta: f64) -> Result<ProfilePoint> {
        self.metric.point(theta).profile().ok_or(Error::NotEmbeddable { theta })
    }

    /// `∫ √A ρ dθ` over the cells `[θ_{j-1/2}, θ_{j+1/2}]`, clipped at the
    /// poles. Summed and multiplied by `2π` they give the area.
    pub fn cell_volumes(&self) -> Vec<f64> {
        let n = self.n();
        let h = self.metric.spacing();
        let density = |t: f64| {
            let p = self.metric.point(t);
            p.a.sqrt() * p.rho.abs()
        };
        (0..=n)
            .map(|j| {
                let lo = (self.theta[j] - 0.5 * h).max(0.0);
                let hi = (self.theta[j] + 0.5 * h).min(PI);
                gauss_legendre(density, lo, hi)
            })
            .collect()
    }

    /// Outward unit normal `(N_ρ, N_z)` in the meridian plane.
    pub fn normals(&self) -> Vec<(f64, f64)> {
        let n = self.n();
        (0..=n)
            .map(|j| match j {
                0 => (0.0, -1.0),
                _ if j == n => (0.0, 1.0),
                _ => {
                    let p = self.metric.node(j);
                    let (_, drho, _) = p.rho_derivatives();
                    let dz = p.dz().unwrap_or(0.0);
                    let s = p.a.sqrt();
                    (dz / s, -drho / s)
                }
            })
            .collect()
    }

    pub fn integral_h0(&self) -> f64 {
        self.metric.integrate(&self.h0)
    }

    pub fn summary(&self) -> Result<EmbeddingSummary> {
        let k = gauss_curvature(&self.metric)?;
        Ok(EmbeddingSummary {
            theta_n: self.n(),
            area: self.area,
            height: self.z[self.n()] - self.z[0],
            max_radius: self.rho.iter().copied().fold(0.0, f64::max),
            min_gauss: k.iter().copied().fold(f64::INFINITY, f64::min),
            integral_h0: self.integral_h0(),
            minkowski_margin: minkowski_margin(self),
            gauss_bonnet_error: self.metric.integrate(&k) - 4.0 * PI,
        })
    }
}

/// `∫ H₀ dσ - √(16π · area)`; zero exactly for round spheres.
pub fn minkowski_margin(e: &ProfileEmbedding) -> f64 {
    e.integral_h0() - (16.0 * PI * e.area).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spheroid_closed_form(a: f64, c: f64, t: f64) -> (f64, f64, f64) {
        let q = a * a * t.cos().powi(2) + c * c * t.sin().powi(2);
        let k = c * c / (q * q);
        let kpar = c / (a * q.sqrt());
        let kmer = a * c / q.powf(1.5);
        (k, kmer, kpar)
    }

    #[test]
    fn round_sphere_curvature() {
        let m = AxisymMetric::round(2.0, 64).unwrap();
        for k in gauss_curvature(&m).unwrap() {
            assert!((k - 0.25).abs() < 1e-12);
        }
        let e = weyl_embed(&m).unwrap();
        for j in 0..=64 {
            assert!((e.kappa1[j] - 0.5).abs() < 1e-12 && (e.kappa2[j] - 0.5).abs() < 1e-12);
            assert!((e.h0[j] - 1.0).abs() < 1e-12);
            let t = e.theta[j];
            assert!((e.rho[j] - 2.0 * t.sin()).abs() < 1e-12);
            assert!((e.z[j] - 2.0 * (1.0 - t.cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_metric_curvature() {
        let m = AxisymMetric::ellipsoid(1.0, 1.0, 2.0, 128).unwrap();
        let k = gauss_curvature(&m).unwrap();
        let ks = gauss_curvature(&m.scaled(3.0)).unwrap();
        for (a, b) in k.iter().zip(&ks) {
            assert!((a / 9.0 - b).abs() < 1e-13 * b);
        }
    }

    #[test]
    fn ellipsoid_curvatures_match_closed_form() {
        for (a, c) in [(1.0, 2.0), (2.0, 1.0)] {
            let m = AxisymMetric::ellipsoid(a, a, c, 256).unwrap();
            let k = gauss_curvature(&m).unwrap();
            let e = weyl_embed(&m).unwrap();
            for j in 0..=256 {
                let t = e.theta[j];
                let (kk, kmer, kpar) = spheroid_closed_form(a, c, t);
                // pole values come from extrapolation
                let tol = if !(3..=253).contains(&j) { 1e-6 } else { 1e-11 };
                assert!((k[j] - kk).abs() < tol, "K at {t}: {} vs {kk}", k[j]);
                assert!((e.kappa1[j] - kmer).abs() < tol);
                assert!((e.kappa2[j] - kpar).abs() < tol);
                assert!((e.rho[j] - a * t.sin()).abs() < 1e-12);
                assert!((e.z[j] - c * (1.0 - t.cos())).abs() < 1e-10, "z at {t}");
            }
        }
    }

    #[test]
    fn theorema_egregium() {
        let m = AxisymMetric::ellipsoid(2.0, 2.0, 1.0, 128).unwrap();
        let k = gauss_curvature(&m).unwrap();
        let e = weyl_embed(&m).unwrap();
        for j in 0..=128 {
            let tol = if j == 0 || j == 128 { 1e-6 } else { 1e-10 };
            assert!((k[j] - e.kappa1[j] * e.kappa2[j]).abs() < tol);
        }
    }

    /// Induced metric of a nodal profile by fourth-order centered
    /// differences with the reflection symmetries of `ρ` (odd) and `z - z_pole` (even).
    fn induced_metric(rho: &[f64], z: &[f64]) -> AxisymMetric {
        let n = rho.len() - 1;
        let h = PI / n as f64;
        let ext = |v: &[f64], j: isize, odd_about_pole: bool| -> f64 {
            if j < 0 {
                let r = v[(-j) as usize];
                if odd_about_pole {
                    -r
                } else {
                    r
                }
            } else if j as usize > n {
                let r = v[2 * n - j as usize];
                if odd_about_pole {
                    -r
                } else {
                    r
                }
            } else {
                v[j as usize]
            }
        };
        let a: Vec<f64> = (0..=n as isize)
            .map(|j| {
                let d = |v: &[f64], odd: bool| {
                    (ext(v, j - 2, odd) - 8.0 * ext(v, j - 1, odd) + 8.0 * ext(v, j + 1, odd) - ext(v, j + 2, odd))
                        / (12.0 * h)
                };
                let (dr, dz) = (d(rho, true), d(z, false));
                dr * dr + dz * dz
            })
            .collect();
        let mut b: Vec<f64> = rho.iter().map(|r| r * r).collect();
        b[0] = 0.0;
        b[n] = 0.0;
        AxisymMetric::from_fields(a, b).unwrap()
    }

    #[test]
    fn round_trip_reproduces_curvatures() {
        for (a, c) in [(1.0, 2.0), (2.0, 1.0)] {
            let err = |n| {
                let m = AxisymMetric::ellipsoid(a, a, c, n).unwrap();
                let e = weyl_embed(&m).unwrap();
                let e2 = weyl_embed(&induced_metric(&e.rho, &e.z)).unwrap();
                let mut worst = 0.0f64;
                for j in 0..=n {
                    worst = worst
                        .max((e.kappa1[j] - e2.kappa1[j]).abs())
                        .max((e.kappa2[j] - e2.kappa2[j]).abs());
                }
                worst
            };
            let (e1, e2) = (err(128), err(256));
            assert!(e2 < 1e-3, "{e2}");
            assert!((e1 / e2).log2() >= 1.9, "order {}", (e1 / e2).log2());
        }
    }

    #[test]
    fn tabulated_gauss_curvature_second_order() {
        let err = |n| {
            let m = AxisymMetric::ellipsoid(1.0, 1.0, 2.0, n).unwrap();
            let tab = AxisymMetric::from_fields(m.a().to_vec(), m.b().to_vec()).unwrap();
            let k = gauss_curvature(&tab).unwrap();
            let exact = gauss_curvature(&m).unwrap();
            k.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(128), err(256));
        assert!((e1 / e2).log2() >= 1.9, "{e1} {e2}");
    }

    #[test]
    fn gauss_bonnet() {
        for m in [
            AxisymMetric::round(1.5, 512).unwrap(),
            AxisymMetric::ellipsoid(1.0, 1.0, 2.0, 512).unwrap(),
            AxisymMetric::ellipsoid(2.0, 2.0, 1.0, 512).unwrap(),
        ] {
            let k = gauss_curvature(&m).unwrap();
            assert!((m.integrate(&k) - 4.0 * PI).abs() <= 1e-4);
        }
        let m = AxisymMetric::ellipsoid(1.0, 1.0, 2.0, 512).unwrap();
        let tab = AxisymMetric::from_fields(m.a().to_vec(), m.b().to_vec()).unwrap();
        let k = gauss_curvature(&tab).unwrap();
        assert!((tab.integrate(&k) - 4.0 * PI).abs() <= 1e-4);
    }

    #[test]
    fn minkowski_round_is_equality() {
        let e = weyl_embed(&AxisymMetric::round(3.0, 1024).unwrap()).unwrap();
        assert!((e.integral_h0() - 24.0 * PI).abs() < 1e-9);
        assert!(minkowski_margin(&e).abs() < 1e-9);
    }

    #[test]
    fn minkowski_ellipsoid_positive_and_homogeneous() {
        let m = AxisymMetric::ellipsoid(1.0, 1.0, 2.0, 256).unwrap();
        let e = weyl_embed(&m).unwrap();
        let fine = weyl_embed(&AxisymMetric::ellipsoid(1.0, 1.0, 2.0, 1024).unwrap()).unwrap();
        let (coarse, fine_margin) = (minkowski_margin(&e), minkowski_margin(&fine));
        assert!(coarse > 0.0 && fine_margin > 0.0);
        assert!((coarse - fine_margin).abs() < 1e-6 * fine_margin.abs().max(1.0));
        // prolate spheroid area 2πa²(1 + (c/(a e)) asin e) with e = √(1 - a²/c²)
        let area = 2.0 * PI * (1.0 + 2.0 * (3f64.sqrt() / 2.0).asin() / (3f64.sqrt() / 2.0));
        assert!((e.area - area).abs() < 1e-7, "{} vs {area}", e.area);
        assert!((fine.area - area).abs() < 1e-10, "{} vs {area}", fine.area);
        let big = weyl_embed(&m.scaled(2.5)).unwrap();
        assert!((minkowski_margin(&big) - 2.5 * coarse).abs() < 1e-9);
    }

    #[test]
    fn cell_volumes_sum_to_area() {
        let e = weyl_embed(&AxisymMetric::ellipsoid(2.0, 2.0, 1.0, 64).unwrap()).unwrap();
        let total: f64 = e.cell_volumes().iter().sum::<f64>() * 2.0 * PI;
        // Gauss–Legendre cells against composite Simpson: O(h⁴) apart
        assert!((total - e.area).abs() < 1e-5 * e.area, "{total} vs {}", e.area);
        let fine = weyl_embed(&AxisymMetric::ellipsoid(2.0, 2.0, 1.0, 512).unwrap()).unwrap();
        let total: f64 = fine.cell_volumes().iter().sum::<f64>() * 2.0 * PI;
        assert!((total - fine.area).abs() < 1e-9 * fine.area, "{total} vs {}", fine.area);
    }

    #[test]
    fn positive_mean_curvature_and_normals() {
        let e = weyl_embed(&AxisymMetric::ellipsoid(1.0, 1.0, 2.0, 64).unwrap()).unwrap();
        assert!(e.h0.iter().all(|&h| h > 0.0));
        for (nr, nz) in e.normals() {
            assert!(((nr * nr + nz * nz) - 1.0).abs() < 1e-12);
        }
        let mid = e.normals()[32];
        assert!((mid.0 - 1.0).abs() < 1e-12 && mid.1.abs() < 1e-12);
    }

    #[test]
    fn rejects_non_axisymmetric_and_odd_grids() {
        assert!(AxisymMetric::ellipsoid(1.0, 2.0, 3.0, 64).is_err());
        assert!(AxisymMetric::round(1.0, 63).is_err());
        assert!(AxisymMetric::round(1.0, 32).is_err());
    }

    #[test]
    fn rejects_non_embeddable_metric() {
        // B grows faster than A allows: ρ'² > A on the equator band
        let n = 64;
        let h = PI / n as f64;
        let a: Vec<f64> = (0..=n).map(|_| 1.0).collect();
        let mut b: Vec<f64> = (0..=n)
            .map(|j| (j as f64 * h).sin().powi(2) * (1.0 + 0.9 * (2.0 * j as f64 * h).sin().powi(2)))
            .collect();
        b[0] = 0.0;
        b[n] = 0.0;
        let m = AxisymMetric::from_fields(a, b).unwrap();
        assert!(matches!(
            weyl_embed(&m),
            Err(Error::NotEmbeddable { .. }) | Err(Error::NonPositiveCurvature { .. })
        ));
    }

    #[test]
    fn spec_round_trip() {
        let m = AxisymMetric::ellipsoid(1.0, 1.0, 2.0, 64).unwrap();
        let json = serde_json::to_string(&m.to_spec()).unwrap();
        assert!(json.contains("\"name\":\"ellipsoid\""));
        let back = AxisymMetric::from_spec(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, m);
        let tab = AxisymMetric::from_fields(m.a().to_vec(), m.b().to_vec()).unwrap();
        let back = AxisymMetric::from_spec(&tab.to_spec()).unwrap();
        assert_eq!(back, tab);
    }
}
