//! End-to-end construction for one scenario: constraint checks, the Jang
//! and conformal deformations, the exterior flow and the mass chain.
//!
//! [`run_pipeline`] always returns a [`QuasiLocalReport`]. When a stage
//! fails the report names the stage and the failure class and keeps every
//! margin computed before it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::conformal::{check_prop5_boundary, solve_conformal, ConformalSummary};
use crate::error::{Error, ErrorKind, Result};
use crate::flow::{
    asymptotics_check, flow_csv, flow_radii, flow_solve, mass_aspect, monotonicity_check, FlowMode, ParallelFoliation,
};
use crate::initial_data::{
    boundary_geometry, constraint_densities, energy_condition_margin, horizon_scan, BoundaryGeometry, DataSetSpec,
    Preset, SphericalDataSet,
};
use crate::jang::{check_eq20, graph_geometry, jang_solve, JangSummary};
use crate::qlm::{chain_check, energy, horizon_energy_bound, lemma6_margin, ChainMargins, Lemma6Sample};
use crate::radial::Tolerances;
use crate::surface::{weyl_embed, AxisymMetric};

/// Where the initial data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataSource {
    File { path: PathBuf },
    Inline(DataSetSpec),
}

fn default_samples() -> usize {
    400
}

fn default_theta_n() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Defaults to 100 areal radii of the boundary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    /// Number of stored flow intervals.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_theta_n")]
    pub theta_n: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            r_max: None,
            samples: default_samples(),
            theta_n: default_theta_n(),
            tolerances: Tolerances::default(),
        }
    }
}

fn enabled() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageToggles {
    /// Solve for the conformal factor in general mode.
    #[serde(default = "enabled")]
    pub conformal: bool,
}

impl Default for StageToggles {
    fn default() -> Self {
        Self { conformal: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub data: DataSource,
    pub mode: FlowMode,
    #[serde(default)]
    pub flow: FlowConfig,
    /// Replaces the seed of a perturbed preset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub stages: StageToggles,
}

impl Scenario {
    pub fn new(data: DataSetSpec, mode: FlowMode) -> Self {
        Self {
            data: DataSource::Inline(data),
            mode,
            flow: FlowConfig::default(),
            seed: None,
            stages: StageToggles::default(),
        }
    }

    /// Parses a scenario; a data file path is taken relative to the working
    /// directory.
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a scenario, resolving a data file relative to the scenario.
    pub fn load(path: &Path) -> Result<Self> {
        let mut sc: Scenario = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if let DataSource::File { path: data } = &sc.data {
            let full = match path.parent() {
                Some(dir) if data.is_relative() => dir.join(data),
                _ => data.clone(),
            };
            sc.data = DataSource::Inline(serde_json::from_str(&std::fs::read_to_string(full)?)?);
        }
        Ok(sc)
    }

    /// Data spec with the seed override applied.
    pub fn data_spec(&self) -> Result<DataSetSpec> {
        let mut spec = match &self.data {
            DataSource::Inline(spec) => spec.clone(),
            DataSource::File { path } => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        };
        if let (Some(seed), Some(Preset::Perturbed { seed: s, .. })) = (self.seed, spec.preset.as_mut()) {
            *s = seed;
        }
        Ok(spec)
    }

    /// SHA-256 of the scenario with its data inlined and the seed override
    /// folded into the data.
    pub fn digest(&self) -> Result<String> {
        let mut resolved = self.clone();
        resolved.data = DataSource::Inline(self.data_spec()?);
        resolved.seed = None;
        let bytes = serde_json::to_vec(&resolved)?;
        Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Input,
    Constraints,
    EnergyCondition,
    HorizonScan,
    Jang,
    GraphGeometry,
    Eq20,
    Conformal,
    Prop5,
    Boundary,
    Embedding,
    Flow,
    MassAspect,
    Monotonicity,
    Energy,
    Chain,
    Rigidity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: Stage,
    pub kind: ErrorKind,
    pub message: String,
}

/// Minimum of every checked inequality (non-negative means satisfied).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub energy_condition: Option<f64>,
    pub eq20: Option<f64>,
    pub prop5_boundary: Option<f64>,
    pub lemma6_boundary: Option<f64>,
    /// `-max(m(r_{k+1}) - m(r_k))`.
    pub mass_monotonicity: Option<f64>,
    /// `-max` of the monotonicity integrand.
    pub eq11_sign: Option<f64>,
    pub chain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub r_max: f64,
    pub samples: usize,
    pub theta_n: usize,
    #[serde(rename = "h0")]
    pub initial_lapse: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub m_o: f64,
    pub m_inf_quadratic: f64,
    pub kappa_bound: f64,
    pub kappa_stable: bool,
    /// `m_o - G m_inf`.
    pub m_o_mismatch: f64,
    /// Largest `|Δm/Δr - rhs|`.
    pub eq11_discrepancy: f64,
}

/// Witnesses for the equality case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rigidity {
    pub sup_u_minus_1: f64,
    pub sup_x: f64,
    /// Energy at most 1e-9 and both witnesses at most 1e-7.
    pub flat: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiLocalReport {
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<StageFailure>,
    pub mode: FlowMode,
    #[serde(rename = "G")]
    pub gravity: f64,
    pub seed: Option<u64>,
    pub inputs_digest: String,
    pub boundary: Option<BoundaryGeometry>,
    pub jang: Option<JangSummary>,
    pub conformal: Option<ConformalSummary>,
    pub flow: Option<FlowSummary>,
    #[serde(rename = "E")]
    pub energy: Option<f64>,
    pub m0: Option<f64>,
    pub m_inf: Option<f64>,
    pub chain_margins: Option<ChainMargins>,
    pub horizon_bound_margin: Option<f64>,
    pub margins: Margins,
    pub rigidity: Option<Rigidity>,
}

impl QuasiLocalReport {
    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, |f| f.kind.exit_code())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports hold only finite-or-null numbers and strings")
    }
}

/// Report plus the per-leaf flow table, when the flow ran.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub report: QuasiLocalReport,
    pub flow_csv: Option<String>,
}

fn tagged<T>(stage: Stage, r: Result<T>) -> std::result::Result<T, (Stage, Error)> {
    r.map_err(|e| (stage, e))
}

fn require(stage: Stage, check: &str, margin: f64, slack: f64) -> std::result::Result<(), (Stage, Error)> {
    if margin >= -slack {
        Ok(())
    } else {
        Err((
            stage,
            Error::Violation {
                check: check.into(),
                margin,
            },
        ))
    }
}

/// Runs every stage of the construction and assembles the report.
pub fn run_pipeline(sc: &Scenario) -> PipelineOutput {
    let mut report = QuasiLocalReport {
        ok: false,
        failure: None,
        mode: sc.mode,
        gravity: 1.0,
        seed: sc.seed,
        inputs_digest: sc.digest().unwrap_or_default(),
        boundary: None,
        jang: None,
        conformal: None,
        flow: None,
        energy: None,
        m0: None,
        m_inf: None,
        chain_margins: None,
        horizon_bound_margin: None,
        margins: Margins::default(),
        rigidity: None,
    };
    let mut csv = None;
    match run_stages(sc, &mut report, &mut csv) {
        Ok(()) => report.ok = true,
        Err((stage, e)) => {
            report.failure = Some(StageFailure {
                stage,
                kind: e.kind(),
                message: e.to_string(),
            });
        }
    }
    PipelineOutput { report, flow_csv: csv }
}

fn run_stages(
    sc: &Scenario,
    report: &mut QuasiLocalReport,
    csv: &mut Option<String>,
) -> std::result::Result<(), (Stage, Error)> {
    let tol = sc.flow.tolerances;
    tagged(Stage::Input, tol.validate())?;
    let spec = tagged(Stage::Input, sc.data_spec())?;
    let data = tagged(Stage::Input, SphericalDataSet::from_spec(&spec))?;
    let gravity = data.gravity();
    report.gravity = gravity;
    if sc.mode == FlowMode::Riemannian && !data.is_time_symmetric() {
        return Err((Stage::Input, Error::Input("riemannian mode needs p ≡ 0".into())));
    }
    let slack = tol.ineq_slack;

    let dens = constraint_densities(&data);
    let margin = energy_condition_margin(&dens);
    let (worst, lowest) = margin.argmin();
    report.margins.energy_condition = Some(lowest);
    if lowest < -slack {
        return Err((
            Stage::EnergyCondition,
            Error::EnergyCondition {
                margin: lowest,
                radius: margin.grid().node(worst),
            },
        ));
    }
    if let Some(c) = horizon_scan(&data).first() {
        return Err((Stage::HorizonScan, Error::HorizonPresent { radius: c.radius }));
    }

    let bg = tagged(Stage::Boundary, boundary_geometry(&data))?;
    report.boundary = Some(bg);

    let mut rigidity = Rigidity {
        sup_u_minus_1: 0.0,
        sup_x: 0.0,
        flat: false,
    };
    let denominator = match sc.mode {
        FlowMode::Riemannian => bg.h,
        FlowMode::General => {
            let sol = tagged(Stage::Jang, jang_solve(&data, &tol))?;
            report.jang = Some(sol.summary(&data));
            let gd = tagged(Stage::GraphGeometry, graph_geometry(&data, &sol))?;
            let eq20 = check_eq20(&gd).min();
            report.margins.eq20 = Some(eq20);
            require(Stage::Eq20, "graph scalar curvature margin", eq20, slack)?;
            rigidity.sup_x = gd.x_rad.max_abs();
            if sc.stages.conformal {
                let cs = tagged(Stage::Conformal, solve_conformal(&gd))?;
                report.conformal = Some(cs.summary());
                rigidity.sup_u_minus_1 = cs.u.values().iter().map(|u| (u - 1.0).abs()).fold(0.0, f64::max);
                let area = 4.0 * std::f64::consts::PI * gd.areal_radius * gd.areal_radius;
                let prop5 = check_prop5_boundary(&gd, &cs);
                report.margins.prop5_boundary = Some(prop5);
                require(Stage::Prop5, "boundary mean curvature inequality", prop5, slack * area)?;
            }
            let w = gd.boundary_tilt;
            let sample = Lemma6Sample {
                h: bg.h,
                p: bg.p,
                c3: 1.0 / w,
                c4: gd.boundary_slope / w,
            };
            report.margins.lemma6_boundary = Some(lemma6_margin(&sample));
            gd.hbar - gd.xnu
        }
    };
    if !(denominator > 0.0) {
        return Err((Stage::Boundary, Error::NotSpacelike { h: bg.h, p: bg.p }));
    }

    let metric = tagged(Stage::Embedding, AxisymMetric::round(bg.areal_radius, sc.flow.theta_n))?;
    let embedding = tagged(Stage::Embedding, weyl_embed(&metric))?;
    report.horizon_bound_margin = Some(horizon_energy_bound(&embedding, gravity));
    // ∫H0 dσ on a round boundary
    let e = energy(&bg, bg.h0 * bg.area, gravity);
    report.energy = Some(e);

    let fol = tagged(Stage::Flow, ParallelFoliation::new(embedding))?;
    let r_max = sc.flow.r_max.unwrap_or(100.0 * bg.areal_radius);
    let needed = 50.0 * data.grid().s_max().max(bg.areal_radius);
    if r_max < needed {
        return Err((
            Stage::Input,
            Error::Input(format!("r_max = {r_max} is below 50·s_out = {needed}")),
        ));
    }
    let radii = tagged(Stage::Flow, flow_radii(bg.areal_radius, r_max, sc.flow.samples))?;
    let h0_value = bg.h0 / denominator;
    let h0 = vec![h0_value; fol.n() + 1];
    let flow = tagged(Stage::Flow, flow_solve(&fol, &h0, sc.mode, &radii, &tol))?;
    *csv = Some(flow_csv(&fol, &flow, gravity));

    let mono = monotonicity_check(&fol, &flow, gravity);
    report.margins.eq11_sign = Some(-mono.max_rhs);
    let aspect = mass_aspect(&fol, &flow, gravity, &tol);
    let asym = asymptotics_check(&fol, &flow);
    let aspect = match aspect {
        Ok(a) => a,
        Err(e) => {
            if let Error::Violation { margin, .. } = &e {
                report.margins.mass_monotonicity = Some(*margin);
            }
            return Err((Stage::MassAspect, e));
        }
    };
    report.margins.mass_monotonicity = Some(-aspect.max_increase);
    report.m0 = Some(aspect.m0());
    report.m_inf = Some(aspect.m_inf);
    report.flow = Some(FlowSummary {
        r_max,
        samples: sc.flow.samples,
        theta_n: sc.flow.theta_n,
        initial_lapse: h0_value,
        h_min: flow.h_min(),
        h_max: flow.h_max(),
        accepted_steps: flow.accepted_steps,
        rejected_steps: flow.rejected_steps,
        m_o: asym.m_o,
        m_inf_quadratic: aspect.m_inf_quadratic,
        kappa_bound: asym.kappa_bound,
        kappa_stable: asym.kappa_stable,
        m_o_mismatch: asym.m_o - gravity * aspect.m_inf,
        eq11_discrepancy: mono.max_discrepancy,
    });
    require(
        Stage::Monotonicity,
        "sign of the monotonicity integrand",
        -mono.max_rhs,
        slack,
    )?;

    let chain = chain_check(e, aspect.m0(), aspect.m_inf, slack);
    let margins = ChainMargins {
        m0_minus_m_inf: aspect.m0() - aspect.m_inf,
        e_minus_m0: e - aspect.m0(),
        positivity: e,
    };
    report.chain_margins = Some(margins);
    report.margins.chain = Some(margins.min());
    tagged(Stage::Chain, chain)?;

    rigidity.flat = e <= 1e-9 && rigidity.sup_u_minus_1 <= 1e-7 && rigidity.sup_x <= 1e-7;
    report.rigidity = Some(rigidity);
    if e <= 1e-9 && !rigidity.flat {
        let margin = -rigidity.sup_u_minus_1.max(rigidity.sup_x);
        return Err((
            Stage::Rigidity,
            Error::Violation {
                check: "rigidity witnesses at zero energy".into(),
                margin,
            },
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::GridSpec;

    fn spec(preset: Preset, s_min: f64, s_max: f64, n: usize) -> DataSetSpec {
        DataSetSpec {
            grid: GridSpec { s_min, s_max, n },
            preset: Some(preset),
            fields: None,
            gravity: 1.0,
        }
    }

    #[test]
    fn flat_riemannian_is_all_zero() {
        let out = run_pipeline(&Scenario::new(spec(Preset::Flat, 0.0, 1.0, 200), FlowMode::Riemannian));
        let r = &out.report;
        assert!(r.ok, "{:?}", r.failure);
        assert_eq!(r.exit_code(), 0);
        assert!(r.energy.unwrap().abs() < 1e-12);
        assert!(r.m0.unwrap().abs() < 1e-12 && r.m_inf.unwrap().abs() < 1e-12);
        assert!(r.rigidity.unwrap().flat);
        let csv = out.flow_csv.unwrap();
        assert!(csv
            .lines()
            .skip(1)
            .all(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap() == 0.0));
    }

    #[test]
    fn schwarzschild_riemannian_chain() {
        let sc = Scenario::new(
            spec(Preset::Schwarzschild { mass: 1.0 }, 2.1, 2.5, 400),
            FlowMode::Riemannian,
        );
        let r = run_pipeline(&sc).report;
        assert!(r.ok, "{:?}", r.failure);
        let closed = 2.5 * (1.0 - 0.2f64.sqrt());
        assert!((r.energy.unwrap() - closed).abs() < 1e-9);
        assert!((r.m0.unwrap() - closed).abs() < 1e-9);
        assert!((r.m_inf.unwrap() - 1.0).abs() < 1e-3);
        let c = r.chain_margins.unwrap();
        assert!(c.m0_minus_m_inf > 0.0 && c.e_minus_m0.abs() < 1e-9);
    }

    #[test]
    fn general_mode_matches_riemannian_on_time_symmetric_data() {
        let data = spec(Preset::Schwarzschild { mass: 0.5 }, 1.2, 3.0, 300);
        let a = run_pipeline(&Scenario::new(data.clone(), FlowMode::Riemannian)).report;
        let b = run_pipeline(&Scenario::new(data, FlowMode::General)).report;
        assert!(a.ok && b.ok, "{:?} {:?}", a.failure, b.failure);
        for (x, y) in [(a.energy, b.energy), (a.m0, b.m0), (a.m_inf, b.m_inf)] {
            assert!((x.unwrap() - y.unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn perturbed_general_run_is_deterministic_and_passes() {
        let mut sc = Scenario::new(
            spec(
                Preset::Perturbed {
                    seed: 3,
                    amplitude: 0.1,
                },
                0.0,
                1.0,
                200,
            ),
            FlowMode::General,
        );
        sc.seed = Some(7);
        let a = run_pipeline(&sc);
        let b = run_pipeline(&sc);
        assert_eq!(a.report.to_json(), b.report.to_json());
        assert_eq!(a.flow_csv, b.flow_csv);
        let r = &a.report;
        assert!(r.ok, "{:?}", r.failure);
        assert!(r.chain_margins.unwrap().min() >= -1e-8);
        assert!(r.energy.unwrap() > 0.0);
        assert_eq!(r.seed, Some(7));
        assert_eq!(r.inputs_digest.len(), 64);
        let mut other = sc.clone();
        other.seed = Some(8);
        assert_ne!(other.digest().unwrap(), sc.digest().unwrap());
        let mut folded = Scenario::new(
            spec(
                Preset::Perturbed {
                    seed: 7,
                    amplitude: 0.1,
                },
                0.0,
                1.0,
                200,
            ),
            FlowMode::General,
        );
        assert_eq!(folded.digest().unwrap(), sc.digest().unwrap());
        folded.seed = Some(7);
        assert_eq!(folded.digest().unwrap(), sc.digest().unwrap());
    }

    #[test]
    fn conformal_toggle_is_a_no_op_on_scalar_flat_data() {
        let data = spec(Preset::Flat, 0.0, 1.0, 200);
        let on = run_pipeline(&Scenario::new(data.clone(), FlowMode::General)).report;
        let mut sc = Scenario::new(data, FlowMode::General);
        sc.stages.conformal = false;
        let off = run_pipeline(&sc).report;
        assert!(on.ok && off.ok);
        for (x, y) in [(on.energy, off.energy), (on.m0, off.m0), (on.m_inf, off.m_inf)] {
            assert!((x.unwrap() - y.unwrap()).abs() <= 1e-10);
        }
        assert!(off.conformal.is_none() && on.conformal.is_some());
    }

    #[test]
    fn failures_are_tagged() {
        let iso = spec(Preset::IsotropicSchwarzschild { mass: 1.0 }, 0.1, 2.0, 200);
        let r = run_pipeline(&Scenario::new(iso, FlowMode::General)).report;
        let f = r.failure.unwrap();
        assert_eq!(f.stage, Stage::HorizonScan);
        assert_eq!(f.kind, ErrorKind::Input);
        assert!(r.margins.energy_condition.is_some());

        let mut sc = Scenario::new(spec(Preset::Flat, 0.0, 1.0, 200), FlowMode::Riemannian);
        sc.flow.r_max = Some(10.0);
        let f = run_pipeline(&sc).report.failure.unwrap();
        assert_eq!((f.stage, f.kind), (Stage::Input, ErrorKind::Input));

        let pert = spec(
            Preset::Perturbed {
                seed: 1,
                amplitude: 0.1,
            },
            0.0,
            1.0,
            200,
        );
        let f = run_pipeline(&Scenario::new(pert, FlowMode::Riemannian))
            .report
            .failure
            .unwrap();
        assert_eq!(f.stage, Stage::Input);
    }

    #[test]
    fn scenario_json_round_trip() {
        let json = r#"{"data": {"grid": {"s_min": 0.0, "s_max": 1.0, "n": 100}, "preset": {"name": "flat"}}, "mode": "riemannian"}"#;
        let sc: Scenario = serde_json::from_str(json).unwrap();
        assert_eq!(sc.flow, FlowConfig::default());
        let back: Scenario = serde_json::from_str(&serde_json::to_string(&sc).unwrap()).unwrap();
        assert_eq!(back, sc);
    }

    #[test]
    fn scenario_loads_relative_data_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("data.json"),
            r#"{"grid": {"s_min": 0.0, "s_max": 1.0, "n": 100}, "preset": {"name": "flat"}}"#,
        )
        .unwrap();
        std::fs::write(
            dir.path().join("sc.json"),
            r#"{"data": {"path": "data.json"}, "mode": "general"}"#,
        )
        .unwrap();
        let sc = Scenario::load(&dir.path().join("sc.json")).unwrap();
        assert!(matches!(sc.data, DataSource::Inline(_)));
        assert!(run_pipeline(&sc).report.ok);
    }
}
