//! Command-line front end.
//!
//! Exit codes: 0 when every asserted margin passes, 1 for a violated
//! inequality, 2 for input or configuration errors, 3 when a solver fails
//! to converge.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{Error, Result};
use crate::flow::{
    eq11_convergence, flow_csv, flow_radii, flow_solve, mass_aspect, random_lapse, FlowMode, ParallelFoliation,
};
use crate::initial_data::{DataSetSpec, GridSpec, Preset};
use crate::pipeline::{run_pipeline, Scenario};
use crate::qlm::{lemma6_suite, schwarzschild_mass};
use crate::radial::Tolerances;
use crate::surface::{gauss_curvature, minkowski_margin, weyl_embed, AxisymMetric, MetricSpec};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "qlmass",
    version,
    about = "Quasi-local mass of spherically symmetric initial data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario (pipeline) or metric (flow, embed) JSON file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for report, CSV and JSON outputs.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Radial grid intervals (pipeline, schwarzschild) or θ intervals (flow, embed, check).
    #[arg(long = "grid-n", global = true)]
    pub grid_n: Option<usize>,
    #[arg(long, global = true)]
    pub rmax: Option<f64>,
    #[arg(long = "G", global = true)]
    pub gravity: Option<f64>,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pipeline energy of round spheres in Schwarzschild against the closed form.
    Schwarzschild {
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        /// Areal radii of the boundary spheres.
        #[arg(long, value_delimiter = ',', default_values_t = [2.5, 5.0, 10.0, 100.0])]
        radii: Vec<f64>,
    },
    /// Run a scenario and write `report.json` and `flow.csv`.
    Pipeline,
    /// Flow a constant initial lapse off a base surface and write `flow.csv`.
    Flow {
        #[arg(long, default_value_t = 1.0)]
        h0: f64,
        #[arg(long, default_value_t = 400)]
        samples: usize,
    },
    /// Property suites.
    Check {
        suite: Suite,
        /// Number of samples (lemma6) or random profiles (eq11).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Embed a metric and report its Minkowski margin.
    Embed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Lemma6,
    Minkowski,
    Eq11,
    Gaussbonnet,
}

/// Parses the process arguments and runs; returns the exit code.
pub fn main_entry() -> i32 {
    run(Cli::parse())
}

pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Schwarzschild { mass, radii } => cmd_schwarzschild(&cli, *mass, radii),
        Command::Pipeline => cmd_pipeline(&cli),
        Command::Flow { h0, samples } => cmd_flow(&cli, *h0, *samples),
        Command::Check { suite, samples } => cmd_check(&cli, *suite, *samples),
        Command::Embed => cmd_embed(&cli),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.kind().exit_code()
        }
    }
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn load_metric(cli: &Cli) -> Result<AxisymMetric> {
    match &cli.config {
        Some(path) => {
            let mut spec: MetricSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            if let (Some(n), Some(_)) = (cli.grid_n, &spec.preset) {
                spec.theta_n = n;
            }
            AxisymMetric::from_spec(&spec)
        }
        None => AxisymMetric::round(1.0, cli.grid_n.unwrap_or(64)),
    }
}

fn cmd_schwarzschild(cli: &Cli, mass: f64, radii: &[f64]) -> Result<i32> {
    let gravity = cli.gravity.unwrap_or(1.0);
    let n = cli.grid_n.unwrap_or(2000);
    let mut csv = String::from("a,E_pipeline,m_closed_form,rel_diff\n");
    let mut energies = Vec::new();
    for &a in radii {
        let closed = schwarzschild_mass(mass, a, gravity)?;
        let (preset, s_min) = if mass == 0.0 {
            (Preset::Flat, 0.0)
        } else {
            (Preset::Schwarzschild { mass }, 2.0 * mass + 0.5 * (a - 2.0 * mass))
        };
        let spec = DataSetSpec {
            grid: GridSpec { s_min, s_max: a, n },
            preset: Some(preset),
            fields: None,
            gravity,
        };
        let mut sc = Scenario::new(spec, FlowMode::Riemannian);
        sc.flow.r_max = cli.rmax;
        let out = run_pipeline(&sc);
        if let Some(f) = &out.report.failure {
            eprintln!("a = {a}: stage {:?} failed: {}", f.stage, f.message);
            return Ok(out.report.exit_code());
        }
        let e = out.report.energy.expect("successful runs report E");
        let diff = if closed != 0.0 {
            ((e - closed) / closed).abs()
        } else {
            e.abs()
        };
        csv.push_str(&format!("{a},{e:.12},{closed:.12},{diff:.3e}\n"));
        energies.push(e);
    }
    print!("{csv}");
    write_out(&cli.out, "schwarzschild.csv", &csv)?;
    if mass > 0.0 {
        let mut order: Vec<(f64, f64)> = radii.iter().copied().zip(energies).collect();
        order.sort_by(|x, y| x.0.total_cmp(&y.0));
        if let Some(w) = order.windows(2).find(|w| w[1].1 >= w[0].1) {
            eprintln!("E does not decrease between a = {} and a = {}", w[0].0, w[1].0);
            return Ok(1);
        }
    }
    Ok(0)
}

fn cmd_pipeline(cli: &Cli) -> Result<i32> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Input("pipeline needs --config SCENARIO".into()))?;
    let mut sc = Scenario::load(path)?;
    if let Some(seed) = cli.seed {
        sc.seed = Some(seed);
    }
    if cli.grid_n.is_some() || cli.gravity.is_some() {
        let mut spec = sc.data_spec()?;
        if let Some(n) = cli.grid_n {
            spec.grid.n = n;
        }
        if let Some(g) = cli.gravity {
            spec.gravity = g;
        }
        sc.data = crate::pipeline::DataSource::Inline(spec);
    }
    if cli.rmax.is_some() {
        sc.flow.r_max = cli.rmax;
    }
    let out = run_pipeline(&sc);
    let json = out.report.to_json();
    write_out(&cli.out, "report.json", &json)?;
    if let Some(csv) = &out.flow_csv {
        write_out(&cli.out, "flow.csv", csv)?;
    }
    println!("{json}");
    if let Some(f) = &out.report.failure {
        eprintln!("stage {:?} failed: {}", f.stage, f.message);
    }
    Ok(out.report.exit_code())
}

fn cmd_flow(cli: &Cli, h0: f64, samples: usize) -> Result<i32> {
    let gravity = cli.gravity.unwrap_or(1.0);
    let fol = ParallelFoliation::new(weyl_embed(&load_metric(cli)?)?)?;
    let r_max = cli.rmax.unwrap_or(100.0 * fol.mean_radius());
    let radii = flow_radii(fol.mean_radius(), r_max, samples)?;
    let tol = Tolerances::default();
    let flow = flow_solve(&fol, &vec![h0; fol.n() + 1], FlowMode::General, &radii, &tol)?;
    write_out(&cli.out, "flow.csv", &flow_csv(&fol, &flow, gravity))?;
    let aspect = mass_aspect(&fol, &flow, gravity, &tol)?;
    let summary = json!({
        "m0": aspect.m0(),
        "m_inf": aspect.m_inf,
        "m_o": aspect.m_o,
        "kappa_bound": aspect.kappa_bound,
        "h_min": flow.h_min(),
        "h_max": flow.h_max(),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(0)
}

fn cmd_embed(cli: &Cli) -> Result<i32> {
    if cli.config.is_none() {
        return Err(Error::Input("embed needs --config METRIC".into()));
    }
    let e = weyl_embed(&load_metric(cli)?)?;
    let summary = e.summary()?;
    let json = serde_json::to_string_pretty(&summary)?;
    let mut csv = String::from("theta,rho,z,kappa1,kappa2,H0\n");
    for j in 0..=e.n() {
        csv.push_str(&format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            e.theta[j], e.rho[j], e.z[j], e.kappa1[j], e.kappa2[j], e.h0[j]
        ));
    }
    write_out(&cli.out, "embedding.json", &json)?;
    write_out(&cli.out, "profile.csv", &csv)?;
    println!("{json}");
    Ok(0)
}

fn cmd_check(cli: &Cli, suite: Suite, samples: Option<usize>) -> Result<i32> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    eprintln!("seed = {seed}");
    let (passed, detail) = match suite {
        Suite::Lemma6 => {
            let report = lemma6_suite(seed, samples.unwrap_or(100_000));
            (report.passed, serde_json::to_value(report)?)
        }
        Suite::Minkowski => check_minkowski(cli.grid_n.unwrap_or(256))?,
        Suite::Gaussbonnet => check_gauss_bonnet(cli.grid_n.unwrap_or(512))?,
        Suite::Eq11 => check_eq11(seed, samples.unwrap_or(20), cli.grid_n.unwrap_or(64))?,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({ "passed": passed, "detail": detail }))?
    );
    Ok(if passed { 0 } else { 1 })
}

fn check_minkowski(n: usize) -> Result<(bool, serde_json::Value)> {
    let mut rows = Vec::new();
    let mut passed = true;
    for radius in [1.0, 3.0] {
        let margin = minkowski_margin(&weyl_embed(&AxisymMetric::round(radius, 4 * n)?)?);
        passed &= margin.abs() <= 1e-9;
        rows.push(json!({ "metric": format!("round {radius}"), "margin": margin }));
    }
    for (a, c) in [(1.0, 2.0), (2.0, 1.0)] {
        let coarse = minkowski_margin(&weyl_embed(&AxisymMetric::ellipsoid(a, a, c, n)?)?);
        let fine = minkowski_margin(&weyl_embed(&AxisymMetric::ellipsoid(a, a, c, 4 * n)?)?);
        passed &= coarse > 0.0 && fine > 0.0;
        rows.push(json!({ "metric": format!("ellipsoid ({a}, {a}, {c})"), "margin": coarse, "oracle": fine }));
    }
    Ok((passed, json!(rows)))
}

fn check_gauss_bonnet(n: usize) -> Result<(bool, serde_json::Value)> {
    let mut rows = Vec::new();
    let mut passed = true;
    for (label, m) in [
        ("round 1.5", AxisymMetric::round(1.5, n)?),
        ("ellipsoid (1, 1, 2)", AxisymMetric::ellipsoid(1.0, 1.0, 2.0, n)?),
        ("ellipsoid (2, 2, 1)", AxisymMetric::ellipsoid(2.0, 2.0, 1.0, n)?),
    ] {
        let err = m.integrate(&gauss_curvature(&m)?) - 4.0 * std::f64::consts::PI;
        passed &= err.abs() <= 1e-4;
        rows.push(json!({ "metric": label, "error": err }));
    }
    Ok((passed, json!(rows)))
}

fn check_eq11(seed: u64, profiles: usize, theta_n: usize) -> Result<(bool, serde_json::Value)> {
    let bases = [
        ParallelFoliation::new(weyl_embed(&AxisymMetric::round(1.0, theta_n)?)?)?,
        ParallelFoliation::new(weyl_embed(&AxisymMetric::ellipsoid(1.0, 1.0, 2.0, theta_n)?)?)?,
    ];
    let mut rows = Vec::new();
    let mut passed = true;
    for k in 0..profiles {
        let fol = &bases[k % 2];
        let h0 = random_lapse(&fol.base().theta, seed.wrapping_add(k as u64));
        let study = eq11_convergence(fol, &h0, 20.0 * fol.mean_radius(), 100, &Tolerances::default())?;
        passed &= study.order >= 1.9 && study.max_increase <= 1e-9 && study.max_rhs <= 0.0;
        rows.push(serde_json::to_value(study)?);
    }
    Ok((passed, json!(rows)))
}
