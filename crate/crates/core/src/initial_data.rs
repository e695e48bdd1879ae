//! Spherically symmetric initial data sets `(Ω, g, p)`.
//!
//! The metric is `g = A(s)² ds² + B(s)² dΩ²` with `B` the areal radius
//! (`B = s` for every preset except isotropic Schwarzschild). The second
//! fundamental form is diagonal in the orthonormal frame with eigenvalues
//! `p_rad` (radial) and `p_tan` (both tangential directions).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{bisect, derivative_uniform, even_limit, interpolate_uniform, RadialField, RadialGrid};

/// Below this value of `|B'/A|` the mass-function form of the scalar
/// curvature is replaced by the direct second-derivative formula.
const MASS_FORM_CUTOFF: f64 = 1e-3;

/// Relative size of curvature roundoff tolerated by the perturbed-data search.
pub const ROUNDOFF_FLOOR: f64 = 1e-11;

/// Named analytic data sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Preset {
    Flat,
    /// Time-symmetric slice in areal coordinates, `A = (1 - 2M/s)^{-1/2}`.
    Schwarzschild {
        mass: f64,
    },
    /// Time-symmetric slice in isotropic coordinates, `g = ψ⁴(ds² + s²dΩ²)`.
    IsotropicSchwarzschild {
        mass: f64,
    },
    /// Smooth compactly supported matter and momentum bumps on a flat ball.
    Perturbed {
        seed: u64,
        amplitude: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub s_min: f64,
    pub s_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldsSpec {
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    /// Areal radius; defaults to `s`.
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    pub p_rad: Vec<f64>,
    pub p_tan: Vec<f64>,
}

/// JSON form of a data set: a grid plus exactly one of `preset` / `fields`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSetSpec {
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<FieldsSpec>,
    #[serde(rename = "G", default = "unit_gravity")]
    pub gravity: f64,
}

fn unit_gravity() -> f64 {
    1.0
}

/// Values of the data at a single radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointData {
    pub a: f64,
    pub b: f64,
    pub db: f64,
    pub p_rad: f64,
    pub p_tan: f64,
}

impl PointData {
    /// Mean curvature of the coordinate sphere w.r.t. the outward normal.
    pub fn mean_curvature(&self) -> f64 {
        2.0 * self.db / (self.a * self.b)
    }

    /// Trace of `p` restricted to the coordinate sphere.
    pub fn tangential_trace(&self) -> f64 {
        2.0 * self.p_tan
    }
}

/// Resolved parameters of a perturbed data set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedProfile {
    pub mass_center: f64,
    pub mass_width: f64,
    pub total_mass: f64,
    pub tan_center: f64,
    pub tan_width: f64,
    pub tan_amp: f64,
    pub rad_center: f64,
    pub rad_width: f64,
    pub rad_amp: f64,
    /// Multiplier on both momentum bumps chosen by the energy-condition search.
    pub momentum_scale: f64,
}

impl PerturbedProfile {
    fn mass(&self, s: f64) -> f64 {
        self.total_mass * smoothstep((s - self.mass_center) / self.mass_width)
    }

    fn point(&self, s: f64) -> PointData {
        let m = self.mass(s);
        let a = if s > 0.0 { (1.0 - 2.0 * m / s).powf(-0.5) } else { 1.0 };
        PointData {
            a,
            b: s,
            db: 1.0,
            p_rad: self.momentum_scale * self.rad_amp * bump((s - self.rad_center) / self.rad_width),
            p_tan: self.momentum_scale * self.tan_amp * bump((s - self.tan_center) / self.tan_width),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Profile {
    Flat,
    Schwarzschild { mass: f64 },
    Isotropic { mass: f64 },
    Perturbed(PerturbedProfile),
    Tabulated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphericalDataSet {
    grid: RadialGrid,
    a: RadialField,
    b: RadialField,
    db: RadialField,
    p_rad: RadialField,
    p_tan: RadialField,
    gravity: f64,
    profile: Profile,
    preset: Option<Preset>,
}

/// Local mass density and radial current density.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintDensities {
    pub mu: RadialField,
    pub j_rad: RadialField,
    /// Scalar curvature of `g`.
    pub scalar_curvature: RadialField,
}

/// Root of `H_s + P_s` (`sign = 1`) or `H_s - P_s` (`sign = -1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonCrossing {
    pub radius: f64,
    pub sign: i8,
}

/// Geometry of the outer boundary sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGeometry {
    /// Coordinate radius of the boundary.
    pub s_b: f64,
    pub areal_radius: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "H0")]
    pub h0: f64,
    pub area: f64,
    pub sqrt8rhomu: f64,
}

impl SphericalDataSet {
    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    pub fn a(&self) -> &RadialField {
        &self.a
    }
    pub fn b(&self) -> &RadialField {
        &self.b
    }
    pub fn db(&self) -> &RadialField {
        &self.db
    }
    pub fn p_rad(&self) -> &RadialField {
        &self.p_rad
    }
    pub fn p_tan(&self) -> &RadialField {
        &self.p_tan
    }
    pub fn gravity(&self) -> f64 {
        self.gravity
    }
    pub fn preset(&self) -> Option<&Preset> {
        self.preset.as_ref()
    }
    pub fn perturbed_profile(&self) -> Option<&PerturbedProfile> {
        match &self.profile {
            Profile::Perturbed(p) => Some(p),
            _ => None,
        }
    }

    /// True when `p` vanishes identically (time-symmetric data).
    pub fn is_time_symmetric(&self) -> bool {
        self.p_rad.max_abs() == 0.0 && self.p_tan.max_abs() == 0.0
    }

    /// Data evaluated at an arbitrary radius: exact for presets, cubic
    /// interpolation for tabulated fields.
    pub fn point(&self, s: f64) -> PointData {
        match &self.profile {
            Profile::Tabulated => {
                let (x0, h) = (self.grid.s_min(), self.grid.spacing());
                PointData {
                    a: interpolate_uniform(x0, h, self.a.values(), s),
                    b: interpolate_uniform(x0, h, self.b.values(), s),
                    db: interpolate_uniform(x0, h, self.db.values(), s),
                    p_rad: interpolate_uniform(x0, h, self.p_rad.values(), s),
                    p_tan: interpolate_uniform(x0, h, self.p_tan.values(), s),
                }
            }
            other => analytic_point(other, s),
        }
    }

    fn from_profile(grid: RadialGrid, profile: Profile, preset: Option<Preset>, gravity: f64) -> Result<Self> {
        let points: Vec<PointData> = grid
            .nodes()
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                if i == 0 && grid.has_center() {
                    PointData {
                        a: 1.0,
                        b: 0.0,
                        db: 1.0,
                        p_rad: 0.0,
                        p_tan: 0.0,
                    }
                } else {
                    analytic_point(&profile, s)
                }
            })
            .collect();
        let field = |f: fn(&PointData) -> f64| RadialField::new(grid, points.iter().map(f).collect());
        let data = Self {
            grid,
            a: field(|p| p.a)?,
            b: field(|p| p.b)?,
            db: field(|p| p.db)?,
            p_rad: field(|p| p.p_rad)?,
            p_tan: field(|p| p.p_tan)?,
            gravity,
            profile,
            preset,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn flat(s_in: f64, s_out: f64, n: usize) -> Result<Self> {
        Self::flat_with_gravity(s_in, s_out, n, 1.0)
    }

    pub fn flat_with_gravity(s_in: f64, s_out: f64, n: usize, gravity: f64) -> Result<Self> {
        check_gravity(gravity)?;
        Self::from_profile(
            RadialGrid::new(s_in, s_out, n)?,
            Profile::Flat,
            Some(Preset::Flat),
            gravity,
        )
    }

    pub fn schwarzschild(mass: f64, s_in: f64, s_out: f64, n: usize) -> Result<Self> {
        Self::schwarzschild_with_gravity(mass, s_in, s_out, n, 1.0)
    }

    pub fn schwarzschild_with_gravity(mass: f64, s_in: f64, s_out: f64, n: usize, gravity: f64) -> Result<Self> {
        check_gravity(gravity)?;
        if !(mass >= 0.0) {
            return Err(Error::Input(format!(
                "Schwarzschild mass must be nonnegative, got {mass}"
            )));
        }
        if s_in <= 2.0 * mass {
            return Err(Error::Input(format!(
                "Schwarzschild slice needs s_in > 2M (s_in = {s_in}, M = {mass})"
            )));
        }
        Self::from_profile(
            RadialGrid::new(s_in, s_out, n)?,
            Profile::Schwarzschild { mass },
            Some(Preset::Schwarzschild { mass }),
            gravity,
        )
    }

    pub fn isotropic_schwarzschild(mass: f64, s_in: f64, s_out: f64, n: usize) -> Result<Self> {
        if !(mass >= 0.0) {
            return Err(Error::Input(format!(
                "Schwarzschild mass must be nonnegative, got {mass}"
            )));
        }
        if s_in <= 0.0 {
            return Err(Error::Input("isotropic Schwarzschild data needs s_in > 0".into()));
        }
        Self::from_profile(
            RadialGrid::new(s_in, s_out, n)?,
            Profile::Isotropic { mass },
            Some(Preset::IsotropicSchwarzschild { mass }),
            1.0,
        )
    }

    /// Random smooth perturbation of a flat ball `[0, s_out]`.
    ///
    /// A nonnegative matter bump enters through the mass function
    /// `A = (1 - 2m(s)/s)^{-1/2}` with `m` nondecreasing; momentum bumps in
    /// `p_rad`, `p_tan` sit strictly inside its support. The momentum scale
    /// is bisected until the energy condition holds with no apparent horizon.
    pub fn perturbed(seed: u64, amplitude: f64, s_out: f64, n: usize) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude < 0.2) {
            return Err(Error::Input(format!(
                "perturbation amplitude must lie in (0, 0.2), got {amplitude}"
            )));
        }
        let grid = RadialGrid::new(0.0, s_out, n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mass_center = s_out * rng.random_range(0.4..0.6);
        let mass_width = s_out * rng.random_range(0.2..0.3);
        let tan_center = mass_center + mass_width * rng.random_range(-0.3..0.3);
        let tan_width = mass_width * rng.random_range(0.3..0.5);
        let rad_center = mass_center + mass_width * rng.random_range(-0.3..0.3);
        let rad_width = mass_width * rng.random_range(0.3..0.5);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let tan_amp = sign * amplitude * rng.random_range(0.5..1.0) / s_out;
        let rad_amp = amplitude * rng.random_range(-1.0..1.0) / s_out;
        let base = PerturbedProfile {
            mass_center,
            mass_width,
            total_mass: amplitude * s_out,
            tan_center,
            tan_width,
            tan_amp,
            rad_center,
            rad_width,
            rad_amp,
            momentum_scale: 1.0,
        };
        let preset = Preset::Perturbed { seed, amplitude };
        let build = |scale: f64| {
            Self::from_profile(
                grid,
                Profile::Perturbed(PerturbedProfile {
                    momentum_scale: scale,
                    ..base
                }),
                Some(preset.clone()),
                1.0,
            )
        };
        // The Misner-Sharp mass is recovered from A with cancellation, so the
        // vacuum region carries curvature noise of a few ulps.
        let floor = -ROUNDOFF_FLOOR / (s_out * s_out);
        let admissible = |d: &SphericalDataSet| {
            energy_condition_margin(&constraint_densities(d)).min() >= floor && horizon_scan(d).is_empty()
        };

        let full = build(1.0)?;
        if admissible(&full) {
            return Ok(full);
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if admissible(&build(mid)?) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo <= 0.0 {
            return Err(Error::Input(format!(
                "perturbed data: seed {seed} admits no energy-condition scaling"
            )));
        }
        // Back off from the threshold so the margin is strictly positive
        // where the momentum bumps live.
        let data = build(0.5 * lo)?;
        if !admissible(&data) {
            return Err(Error::Input(format!("perturbed data: seed {seed} rejected")));
        }
        Ok(data)
    }

    /// Explicit fields; `b = None` means `B = s`.
    pub fn from_fields(
        grid: RadialGrid,
        a: Vec<f64>,
        b: Option<Vec<f64>>,
        p_rad: Vec<f64>,
        p_tan: Vec<f64>,
        gravity: f64,
    ) -> Result<Self> {
        check_gravity(gravity)?;
        let a = RadialField::new(grid, a)?;
        let (b, db) = match b {
            Some(b) => {
                let b = RadialField::new(grid, b)?;
                let db = RadialField::new(grid, derivative_uniform(b.values(), grid.spacing()))?;
                (b, db)
            }
            None => (RadialField::from_fn(grid, |s| s), RadialField::from_fn(grid, |_| 1.0)),
        };
        let data = Self {
            grid,
            a,
            b,
            db,
            p_rad: RadialField::new(grid, p_rad)?,
            p_tan: RadialField::new(grid, p_tan)?,
            gravity,
            profile: Profile::Tabulated,
            preset: None,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn from_spec(spec: &DataSetSpec) -> Result<Self> {
        let GridSpec { s_min, s_max, n } = spec.grid;
        let g = spec.gravity;
        match (&spec.preset, &spec.fields) {
            (Some(_), Some(_)) => Err(Error::Input("`preset` and `fields` are mutually exclusive".into())),
            (None, None) => Err(Error::Input("data set needs either `preset` or `fields`".into())),
            (Some(preset), None) => {
                let data = match *preset {
                    Preset::Flat => Self::flat_with_gravity(s_min, s_max, n, g)?,
                    Preset::Schwarzschild { mass } => Self::schwarzschild_with_gravity(mass, s_min, s_max, n, g)?,
                    Preset::IsotropicSchwarzschild { mass } => {
                        let mut d = Self::isotropic_schwarzschild(mass, s_min, s_max, n)?;
                        check_gravity(g)?;
                        d.gravity = g;
                        d
                    }
                    Preset::Perturbed { seed, amplitude } => {
                        if s_min != 0.0 {
                            return Err(Error::Input("perturbed data is defined on a ball (s_min = 0)".into()));
                        }
                        let mut d = Self::perturbed(seed, amplitude, s_max, n)?;
                        check_gravity(g)?;
                        d.gravity = g;
                        d
                    }
                };
                Ok(data)
            }
            (None, Some(f)) => Self::from_fields(
                RadialGrid::new(s_min, s_max, n)?,
                f.a.clone(),
                f.b.clone(),
                f.p_rad.clone(),
                f.p_tan.clone(),
                g,
            ),
        }
    }

    pub fn to_spec(&self) -> DataSetSpec {
        let grid = GridSpec {
            s_min: self.grid.s_min(),
            s_max: self.grid.s_max(),
            n: self.grid.n(),
        };
        match &self.preset {
            Some(p) => DataSetSpec {
                grid,
                preset: Some(p.clone()),
                fields: None,
                gravity: self.gravity,
            },
            None => DataSetSpec {
                grid,
                preset: None,
                fields: Some(FieldsSpec {
                    a: self.a.values().to_vec(),
                    b: Some(self.b.values().to_vec()),
                    p_rad: self.p_rad.values().to_vec(),
                    p_tan: self.p_tan.values().to_vec(),
                }),
                gravity: self.gravity,
            },
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(i) = self.a.values().iter().position(|&a| !(a > 0.0)) {
            return Err(Error::Input(format!("A must be positive (node {i})")));
        }
        let start = usize::from(self.grid.has_center());
        if let Some(i) = self.b.values()[start..].iter().position(|&b| !(b > 0.0)) {
            return Err(Error::Input(format!(
                "areal radius must be positive (node {})",
                i + start
            )));
        }
        if self.grid.has_center() {
            let a = self.a.values();
            let h = self.grid.spacing();
            // odd part of A at the center from a quadratic fit in s
            let slope = (4.0 * (a[1] - a[0]) - (a[2] - a[0])) / (2.0 * h);
            if (a[0] - 1.0).abs() > 1e-8 || slope.abs() > 1e-6 {
                return Err(Error::Input(format!(
                    "a regular center needs A(0) = 1 and A'(0) = 0 (A(0) = {}, A'(0) ≈ {slope:.3e})",
                    a[0]
                )));
            }
            if self.b.first() != 0.0 {
                return Err(Error::Input("a regular center needs B(0) = 0".into()));
            }
        }
        Ok(())
    }
}

fn analytic_point(profile: &Profile, s: f64) -> PointData {
    match profile {
        Profile::Flat => PointData {
            a: 1.0,
            b: s,
            db: 1.0,
            p_rad: 0.0,
            p_tan: 0.0,
        },
        Profile::Schwarzschild { mass } => PointData {
            a: (1.0 - 2.0 * mass / s).powf(-0.5),
            b: s,
            db: 1.0,
            p_rad: 0.0,
            p_tan: 0.0,
        },
        Profile::Isotropic { mass } => {
            let psi = 1.0 + mass / (2.0 * s);
            PointData {
                a: psi * psi,
                b: psi * psi * s,
                db: psi * (1.0 - mass / (2.0 * s)),
                p_rad: 0.0,
                p_tan: 0.0,
            }
        }
        Profile::Perturbed(p) => p.point(s),
        Profile::Tabulated => unreachable!("tabulated data is interpolated"),
    }
}

fn check_gravity(g: f64) -> Result<()> {
    if g.is_finite() && g > 0.0 {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "gravitational constant must be positive, got {g}"
        )))
    }
}

/// `C³` monotone step from 0 (x ≤ -1) to 1 (x ≥ 1).
fn smoothstep(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let x2 = x * x;
        0.5 * (1.0 + 35.0 / 16.0 * x * (1.0 - x2 + 0.6 * x2 * x2 - x2 * x2 * x2 / 7.0))
    }
}

/// `(1 - x²)⁴` on `|x| < 1`, zero outside.
fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - x * x).powi(4)
    }
}

/// μ and J from the constraint equations.
pub fn constraint_densities(data: &SphericalDataSet) -> ConstraintDensities {
    let grid = *data.grid();
    let h = grid.spacing();
    let (a, b, db) = (data.a.values(), data.b.values(), data.db.values());
    let (pr, pt) = (data.p_rad.values(), data.p_tan.values());
    let n = grid.n();
    let r = scalar_curvature(&grid, a, b, db);
    let dpt = derivative_uniform(pt, h);
    let mut j = vec![0.0; n + 1];
    for i in usize::from(grid.has_center())..=n {
        j[i] = -2.0 * dpt[i] / a[i] + (pr[i] - pt[i]) * 2.0 * db[i] / (a[i] * b[i]);
    }
    let mu: Vec<f64> = (0..=n)
        .map(|i| 0.5 * r[i] + 2.0 * pr[i] * pt[i] + pt[i] * pt[i])
        .collect();
    ConstraintDensities {
        mu: RadialField::new(grid, mu).expect("finite densities"),
        j_rad: RadialField::new(grid, j).expect("finite densities"),
        scalar_curvature: RadialField::new(grid, r).expect("finite densities"),
    }
}

/// Scalar curvature of `A² ds² + B² dΩ²` from nodal `A`, `B`, `B'`.
///
/// Uses the mass-function form `R = 4 m'/(B² B')` with
/// `m = B(1 - B'²/A²)/2`, which vanishes identically on vacuum slices; near
/// minimal spheres (`B' → 0`) the direct formula takes over. At a regular
/// center the value is extrapolated from the even expansion.
pub(crate) fn scalar_curvature(grid: &RadialGrid, a: &[f64], b: &[f64], db: &[f64]) -> Vec<f64> {
    let h = grid.spacing();
    let n = grid.n();
    let m: Vec<f64> = (0..=n).map(|i| 0.5 * b[i] * (1.0 - (db[i] / a[i]).powi(2))).collect();
    let dm = derivative_uniform(&m, h);
    let da = derivative_uniform(a, h);
    let d2b = derivative_uniform(db, h);
    let mut r = vec![0.0; n + 1];
    for i in usize::from(grid.has_center())..=n {
        let (ai, bi, dbi) = (a[i], b[i], db[i]);
        r[i] = if (dbi / ai).abs() > MASS_FORM_CUTOFF {
            4.0 * dm[i] / (bi * bi * dbi)
        } else {
            2.0 / (bi * bi) - 4.0 * d2b[i] / (ai * ai * bi) + 4.0 * da[i] * dbi / (ai.powi(3) * bi)
                - 2.0 * dbi * dbi / (ai * ai * bi * bi)
        };
    }
    if grid.has_center() {
        r[0] = even_limit(r[1], r[2]);
    }
    r
}

/// `μ - |J|` pointwise.
pub fn energy_condition_margin(d: &ConstraintDensities) -> RadialField {
    d.mu.zip_with(&d.j_rad, |mu, j| mu - j.abs())
}

/// Coordinate spheres with `H_s + P_s = 0` or `H_s - P_s = 0`.
pub fn horizon_scan(data: &SphericalDataSet) -> Vec<HorizonCrossing> {
    let grid = data.grid();
    let nodes = grid.nodes();
    let start = usize::from(grid.has_center());
    let mut out = Vec::new();
    for sign in [1i8, -1] {
        let f = |s: f64| {
            let p = data.point(s);
            p.mean_curvature() + f64::from(sign) * p.tangential_trace()
        };
        let vals: Vec<f64> = nodes.iter().map(|&s| f(s)).collect();
        for i in start..grid.n() {
            let (f0, f1) = (vals[i], vals[i + 1]);
            if f0 == 0.0 {
                out.push(HorizonCrossing { radius: nodes[i], sign });
            } else if f0 * f1 < 0.0 {
                out.push(HorizonCrossing {
                    radius: bisect(f, nodes[i], nodes[i + 1], 1e-14),
                    sign,
                });
            }
        }
        if vals[grid.n()] == 0.0 {
            out.push(HorizonCrossing {
                radius: nodes[grid.n()],
                sign,
            });
        }
    }
    out
}

/// Boundary quantities of the outer sphere; refuses non-spacelike mean
/// curvature vectors.
pub fn boundary_geometry(data: &SphericalDataSet) -> Result<BoundaryGeometry> {
    let s_b = data.grid().s_max();
    let pt = data.point(s_b);
    let h = pt.mean_curvature();
    let p = pt.tangential_trace();
    if !(h > 0.0) || h * h <= p * p {
        return Err(Error::NotSpacelike { h, p });
    }
    Ok(BoundaryGeometry {
        s_b,
        areal_radius: pt.b,
        h,
        p,
        h0: 2.0 / pt.b,
        area: 4.0 * PI * pt.b * pt.b,
        sqrt8rhomu: (h * h - p * p).sqrt(),
    })
}
