//! Quasi-local energy of the outer boundary, the mass chain
//! `m_∞ ≤ m(0) ≤ E`, the pointwise inequality behind its second link and
//! the horizon bound.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initial_data::BoundaryGeometry;
use crate::surface::{minkowski_margin, ProfileEmbedding};

/// `E = (1/8πG)(∫H0 dσ - ∫√(H² - P²) dσ)` on a round boundary.
pub fn energy(bg: &BoundaryGeometry, integral_h0: f64, gravity: f64) -> f64 {
    (integral_h0 - bg.sqrt8rhomu * bg.area) / (8.0 * PI * gravity)
}

/// `r(1 - √(1 - 2M/r))/G`, the energy of the round sphere of areal radius
/// `r` in the Schwarzschild slice of mass `M`.
pub fn schwarzschild_mass(mass: f64, r: f64, gravity: f64) -> Result<f64> {
    if !(mass >= 0.0 && gravity > 0.0 && r.is_finite()) {
        return Err(Error::Input(format!(
            "need M ≥ 0 and G > 0 (M = {mass}, G = {gravity})"
        )));
    }
    if r < 2.0 * mass || r <= 0.0 {
        return Err(Error::Input(format!(
            "radius {r} is inside the horizon 2M = {}",
            2.0 * mass
        )));
    }
    Ok(r * (1.0 - (1.0 - 2.0 * mass / r).sqrt()) / gravity)
}

/// `(1/8πG)∫H0 - √(area/4π)/G`, the gap in the Minkowski bound for a
/// horizon with this induced metric.
pub fn horizon_energy_bound(e: &ProfileEmbedding, gravity: f64) -> f64 {
    minkowski_margin(e) / (8.0 * PI * gravity)
}

/// One configuration of the pointwise inequality: boundary data `H`, `P`
/// and a unit timelike-tilt pair `(c3, c4)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma6Sample {
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "P")]
    pub p: f64,
    pub c3: f64,
    pub c4: f64,
}

impl Lemma6Sample {
    /// `c4 = ±√(1 - c3²)` with the sign of `sign`.
    pub fn new(h: f64, p: f64, c3: f64, sign: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::Input(format!("H must be positive, got {h}")));
        }
        if !(c3 > 0.0 && c3 <= 1.0) {
            return Err(Error::Input(format!("c3 must lie in (0, 1], got {c3}")));
        }
        let c4 = (1.0 - c3 * c3).sqrt().copysign(sign);
        Ok(Self { h, p, c3, c4 })
    }
}

/// `(H - c4 P)/c3 - √max(H² - P², 0)`.
pub fn lemma6_margin(s: &Lemma6Sample) -> f64 {
    let lhs = (-s.c4 * s.p + s.h) / s.c3;
    lhs - (s.h * s.h - s.p * s.p).max(0.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma6Report {
    pub seed: u64,
    pub samples: usize,
    pub min_margin: f64,
    pub worst: Lemma6Sample,
    pub passed: bool,
}

/// Seeded sampler over spacelike data `|P| ≤ H`, with a share of draws on
/// the strata `P = ±H`, `P = 0`, `c3 = 1e-6`, `c3 = 1` and the equality
/// configuration `(c3, c4) = (√(H² - P²), P)/H`.
pub fn lemma6_suite(seed: u64, samples: usize) -> Lemma6Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Lemma6Sample {
        h: 1.0,
        p: 0.0,
        c3: 1.0,
        c4: 0.0,
    };
    let mut min_margin = f64::INFINITY;
    for i in 0..samples {
        let h = 10f64.powf(rng.random_range(-1.0..1.0));
        let mut p = h * rng.random_range(-1.0..=1.0);
        let mut c3 = rng.random_range(f64::EPSILON..=1.0);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        match i % 8 {
            0 => p = h,
            1 => p = -h,
            2 => p = 0.0,
            3 => c3 = 1e-6,
            4 => c3 = 1.0,
            _ => {}
        }
        let sample = if i % 8 == 5 {
            p = h * rng.random_range(-0.995..0.995);
            let c3 = (h * h - p * p).sqrt() / h;
            Lemma6Sample { h, p, c3, c4: p / h }
        } else {
            Lemma6Sample::new(h, p, c3, sign).expect("sampled H > 0 and c3 ∈ (0, 1]")
        };
        let m = lemma6_margin(&sample);
        if m < min_margin {
            min_margin = m;
            worst = sample;
        }
    }
    Lemma6Report {
        seed,
        samples,
        min_margin,
        worst,
        passed: min_margin >= -1e-12,
    }
}

/// Links of the chain `m_∞ ≤ m(0) ≤ E` and positivity of `E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainMargins {
    pub m0_minus_m_inf: f64,
    #[serde(rename = "E_minus_m0")]
    pub e_minus_m0: f64,
    #[serde(rename = "E")]
    pub positivity: f64,
}

impl ChainMargins {
    pub fn min(&self) -> f64 {
        self.m0_minus_m_inf.min(self.e_minus_m0).min(self.positivity)
    }
}

/// Fails with a violation if any link is below `-slack`.
pub fn chain_check(e: f64, m0: f64, m_inf: f64, slack: f64) -> Result<ChainMargins> {
    let margins = ChainMargins {
        m0_minus_m_inf: m0 - m_inf,
        e_minus_m0: e - m0,
        positivity: e,
    };
    for (check, margin) in [
        ("m_inf ≤ m0", margins.m0_minus_m_inf),
        ("m0 ≤ E", margins.e_minus_m0),
        ("E ≥ 0", margins.positivity),
    ] {
        if !(margin >= -slack) {
            return Err(Error::Violation {
                check: check.into(),
                margin,
            });
        }
    }
    Ok(margins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::{boundary_geometry, SphericalDataSet};
    use crate::surface::{weyl_embed, AxisymMetric};

    #[test]
    fn schwarzschild_closed_form() {
        assert!((schwarzschild_mass(1.0, 2.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((schwarzschild_mass(1.0, 4.0, 1.0).unwrap() - 1.171573).abs() < 1e-6);
        let far = schwarzschild_mass(1.0, 1e6, 1.0).unwrap();
        assert!((far - 1.0).abs() < 1e-5);
        assert!((schwarzschild_mass(1.0, 2.5, 2.0).unwrap() * 2.0 - 1.381966).abs() < 1e-6);
        assert!(schwarzschild_mass(1.0, 1.9, 1.0).is_err());
        let e: Vec<f64> = [2.5, 10.0, 50.0, 500.0]
            .iter()
            .map(|&r| schwarzschild_mass(1.0, r, 1.0).unwrap())
            .collect();
        for (v, want) in e.iter().zip([1.381966, 1.055728, 1.010205, 1.001001]) {
            assert!((v - want).abs() < 2e-6, "{v} vs {want}");
        }
        assert!(e.windows(2).all(|w| w[1] < w[0]));
        let e: Vec<f64> = [5.0, 100.0]
            .iter()
            .map(|&r| schwarzschild_mass(1.0, r, 1.0).unwrap())
            .collect();
        assert!((e[0] - 5.0 * (1.0 - 0.6f64.sqrt())).abs() < 1e-15);
        assert!((e[1] - 100.0 * (1.0 - 0.98f64.sqrt())).abs() < 1e-13);
    }

    #[test]
    fn energy_of_flat_and_schwarzschild_spheres() {
        let flat = SphericalDataSet::flat(0.0, 3.0, 400).unwrap();
        let bg = boundary_geometry(&flat).unwrap();
        assert!(energy(&bg, 8.0 * PI * 3.0, 1.0).abs() < 1e-12);
        for a in [2.001, 3.0] {
            let data = SphericalDataSet::schwarzschild(1.0, 2.0005, a, 400).unwrap();
            let bg = boundary_geometry(&data).unwrap();
            let e = energy(&bg, 8.0 * PI * bg.areal_radius, 1.0);
            assert!((e - schwarzschild_mass(1.0, a, 1.0).unwrap()).abs() < 1e-12, "{e}");
        }
    }

    #[test]
    fn lemma6_examples() {
        let s = Lemma6Sample::new(2.0, 1.0, 1.0, 1.0).unwrap();
        assert!((lemma6_margin(&s) - (2.0 - 3f64.sqrt())).abs() < 1e-15);
        let s = Lemma6Sample::new(2.0, 0.0, 0.8, 1.0).unwrap();
        assert!((s.c4 - 0.6).abs() < 1e-15);
        assert!((lemma6_margin(&s) - 0.5).abs() < 1e-15);
        for p in [-2.0, 2.0] {
            for sign in [-1.0, 1.0] {
                assert!(lemma6_margin(&Lemma6Sample::new(2.0, p, 0.3, sign).unwrap()) >= 0.0);
            }
        }
        assert!(Lemma6Sample::new(0.0, 0.0, 0.5, 1.0).is_err());
        assert!(Lemma6Sample::new(1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn lemma6_equality_configuration() {
        let (h, p) = (3.0, 1.2);
        let s = Lemma6Sample {
            h,
            p,
            c3: (h * h - p * p).sqrt() / h,
            c4: p / h,
        };
        assert!(lemma6_margin(&s).abs() < 1e-14);
    }

    #[test]
    fn lemma6_suite_is_reproducible_and_passes() {
        let a = lemma6_suite(1, 20_000);
        let b = lemma6_suite(1, 20_000);
        assert_eq!(a, b);
        assert!(a.passed, "{a:?}");
        assert!(a.min_margin.abs() < 1e-10);
    }

    #[test]
    fn horizon_bound() {
        let round = weyl_embed(&AxisymMetric::round(2.0, 512).unwrap()).unwrap();
        assert!(horizon_energy_bound(&round, 1.0).abs() < 1e-10);
        let ell = weyl_embed(&AxisymMetric::ellipsoid(1.0, 1.0, 2.0, 256).unwrap()).unwrap();
        let margin = horizon_energy_bound(&ell, 1.0);
        assert!(margin > 0.0);
        let big = weyl_embed(&AxisymMetric::ellipsoid(1.0, 1.0, 2.0, 256).unwrap().scaled(3.0)).unwrap();
        assert!((horizon_energy_bound(&big, 1.0) - 3.0 * margin).abs() < 1e-10);
        assert!((horizon_energy_bound(&ell, 2.0) * 2.0 - margin).abs() < 1e-15);
    }

    #[test]
    fn chain_check_signs() {
        let m = chain_check(1.38, 1.38, 1.0, 1e-8).unwrap();
        assert!(m.min() >= 0.0);
        assert!(chain_check(0.0, 0.0, 0.0, 1e-8).is_ok());
        assert!(matches!(chain_check(1.0, 1.2, 1.0, 1e-8), Err(Error::Violation { .. })));
        assert!(matches!(chain_check(1.0, 1.0, 1.1, 1e-8), Err(Error::Violation { .. })));
        assert!(matches!(
            chain_check(-1e-6, -1e-6, -1e-6, 1e-8),
            Err(Error::Violation { .. })
        ));
    }
}
