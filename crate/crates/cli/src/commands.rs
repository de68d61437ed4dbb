use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use mveu::defects::{defect_trace, domination_check};
use mveu::io::{self, ConfigError, RunConfig, SnapshotError, SolutionChoice};
use mveu::solver::{self, apriori_bounds, apriori_functionals, ConservedField};
use mveu::thermo::invariant_suite;
use mveu::weak_strong::weak_strong_study;
use mveu::young::{build_young_measure, run_ensemble, support_check, YoungError};
use serde_json::json;

/// Relative tolerance for mass conservation and energy monotonicity.
const CONSERVATION_TOL: f64 = 1e-12;
/// Entropy tolerance for the Young-measure support check.
const SUPPORT_TOL: f64 = 1e-8;
/// Relative tolerance for the energy bookkeeping identity.
const BOOKKEEPING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl From<bool> for Outcome {
    fn from(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SnapshotError> for CliError {
    fn from(e: SnapshotError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<YoungError> for CliError {
    fn from(e: YoungError) -> Self {
        match e {
            YoungError::InvalidSpec(msg) => CliError::Usage(msg),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<solver::SolverError> for CliError {
    fn from(e: solver::SolverError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn out_dir(cfg: &RunConfig, sub: &str) -> Result<PathBuf, CliError> {
    let dir = cfg.output_dir.join(sub);
    fs::create_dir_all(&dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn relative_drift(initial: f64, value: f64) -> f64 {
    (value - initial) / initial.abs().max(f64::MIN_POSITIVE)
}

fn snapshot_name(k: usize) -> String {
    format!("snap_{k:03}.bin")
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = cfg.model()?;
    let grid = cfg.grid()?;
    let init = cfg.problem.sample(grid, &model)?;
    let out = solver::run(init, &cfg.scheme, &model, &[])?;
    let dir = out_dir(cfg, "run")?;
    io::write_series_csv(create(&dir.join("series.csv"))?, &out.series, grid.dim())?;
    io::write_snapshot(create(&dir.join("final.bin"))?, &out.final_state, model.c_v())?;

    let first = &out.series[0];
    let mass_drift = out.series.iter().map(|d| relative_drift(first.mass, d.mass).abs()).fold(0.0, f64::max);
    let energy_increase = out
        .series
        .windows(2)
        .map(|w| relative_drift(first.energy, w[1].energy) - relative_drift(first.energy, w[0].energy))
        .fold(0.0, f64::max);
    let violations: usize = out.series.iter().map(|d| d.violations).sum();
    let functionals = apriori_functionals(&out.final_state, &model);
    let bounds = apriori_bounds(&model, out.s0, first.energy, grid.domain_volume());
    let pass = mass_drift <= CONSERVATION_TOL
        && energy_increase <= CONSERVATION_TOL
        && violations == 0
        && functionals.dominated_by(&bounds);
    let summary = json!({
        "steps": out.steps,
        "t_end": out.final_state.t,
        "s0": out.s0,
        "mass_drift": mass_drift,
        "energy_increase": energy_increase,
        "entropy_violations": violations,
        "floored_cells": out.floored_cells,
        "floored_mass": out.floored_mass,
        "apriori": functionals,
        "apriori_bounds": bounds,
        "pass": pass,
    });
    io::write_json(create(&dir.join("summary.json"))?, &summary)?;
    println!("run: n = {}, dim = {}, {} steps to t = {}", grid.n(), grid.dim(), out.steps, out.final_state.t);
    println!("  mass drift {mass_drift:.3e}, energy increase {energy_increase:.3e}, entropy violations {violations}");
    println!("{}", status(pass));
    Ok(pass.into())
}

pub fn ensemble(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.ensemble_spec()?;
    let dir = out_dir(cfg, "ensemble")?;
    let members = run_ensemble(&spec)?;
    let mut rows = Vec::new();
    let mut pass = true;
    for m in &members {
        let sub = dir.join(format!("n{}", m.resolution));
        fs::create_dir_all(&sub)?;
        for (k, snap) in m.run.snapshots.iter().enumerate() {
            io::write_snapshot(create(&sub.join(snapshot_name(k)))?, snap, spec.model.c_v())?;
        }
        io::write_series_csv(create(&sub.join("series.csv"))?, &m.run.series, spec.dim)?;
        let first = &m.run.series[0];
        let last = m.run.series.last().unwrap();
        let violations: usize = m.run.series.iter().map(|d| d.violations).sum();
        let mass_drift = relative_drift(first.mass, last.mass);
        let ok = violations == 0 && mass_drift.abs() <= CONSERVATION_TOL;
        pass &= ok;
        println!(
            "n = {:4}: {:5} steps, mass drift {:.3e}, entropy violations {}",
            m.resolution, m.run.steps, mass_drift, violations
        );
        rows.push(json!({
            "resolution": m.resolution,
            "steps": m.run.steps,
            "snapshots": m.run.snapshots.len(),
            "mass_drift": mass_drift,
            "entropy_violations": violations,
        }));
    }
    io::write_json(create(&dir.join("summary.json"))?, &json!({ "members": rows, "pass": pass }))?;
    println!("{}", status(pass));
    Ok(pass.into())
}

pub fn ym(cfg: &RunConfig, input: Option<&Path>) -> Result<Outcome, CliError> {
    let spec = cfg.ensemble_spec()?;
    let input = input.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir.join("ensemble"));
    let dir = out_dir(cfg, "ym")?;
    let count = spec.snapshot_times().len();
    let mut rows = Vec::new();
    let mut pass = true;
    for &n in &spec.resolutions {
        let sub = input.join(format!("n{n}"));
        let mut snaps: Vec<ConservedField> = Vec::with_capacity(count);
        for k in 0..count {
            let path = sub.join(snapshot_name(k));
            let file = File::open(&path).map_err(|e| {
                CliError::Usage(format!("{}: {e} (run `mveu ensemble` with the same config first)", path.display()))
            })?;
            let snap = io::read_snapshot(std::io::BufReader::new(file))?;
            if snap.c_v != spec.model.c_v() || snap.field.grid.n() != n || snap.field.grid.dim() != spec.dim {
                return Err(CliError::Usage(format!("{} does not match the configuration", path.display())));
            }
            snaps.push(snap.field);
        }
        let s0 = match spec.scheme.s0 {
            Some(s) => s,
            None => solver::min_entropy_monitor(&snaps[0], f64::NEG_INFINITY, &spec.model, spec.scheme.rho_floor).min_s,
        };
        let fine = build_young_measure(&spec, &snaps)?;
        let ym = match spec.compression {
            Some(tol) => fine.compress(tol),
            None => fine,
        };
        fs::write(dir.join(format!("n{n}.jsonl")), ym.to_jsonl())?;
        let report = support_check(&ym, &spec.model, s0, SUPPORT_TOL);
        let atoms: usize = ym.slices.iter().flat_map(|s| &s.blocks).map(|b| b.atoms.len()).sum();
        pass &= report.is_empty();
        println!(
            "n = {n:4}: {atoms} atoms, {} entropy and {} vacuum support violations",
            report.entropy.len(),
            report.vacuum.len()
        );
        rows.push(json!({
            "resolution": n,
            "s0": s0,
            "atoms": atoms,
            "entropy_violations": report.entropy,
            "vacuum_violations": report.vacuum,
        }));
    }
    io::write_json(create(&dir.join("summary.json"))?, &json!({ "measures": rows, "pass": pass }))?;
    println!("{}", status(pass));
    Ok(pass.into())
}

pub fn defects(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.ensemble_spec()?;
    let dir = out_dir(cfg, "defects")?;
    let members = run_ensemble(&spec)?;
    let mut rows = Vec::new();
    let mut pass = true;
    for m in &members {
        let (trace, blocks) = defect_trace(&m.measure, &m.fine, &m.energy_trace, &spec.model)?;
        io::write_defect_csv(create(&dir.join(format!("n{}.csv", m.resolution)))?, &trace)?;
        let dom = domination_check(&trace, &blocks, &spec.model);
        let d = &trace.dissipation;
        let e0 = d.energy_measure[0];
        let bookkeeping = (0..d.d.len())
            .map(|k| ((d.energy_measure[k] - e0 + d.d[k]) / e0).abs())
            .fold(0.0, f64::max);
        let ok = dom.holds && bookkeeping <= BOOKKEEPING_TOL;
        pass &= ok;
        println!(
            "n = {:4}: D(T) = {:.3e}, ||mu_R|| = {:.3e}, c_fit = {:.3e}, domination {}, bookkeeping {:.1e}",
            m.resolution,
            d.d.last().unwrap(),
            trace.mu_r_cumulative.last().unwrap(),
            dom.c_fit,
            if dom.holds { "holds" } else { "fails" },
            bookkeeping
        );
        rows.push(json!({
            "resolution": m.resolution,
            "c_fit": dom.c_fit,
            "domination_holds": dom.holds,
            "violations": dom.violations.len(),
            "bookkeeping_error": bookkeeping,
        }));
    }
    io::write_json(create(&dir.join("summary.json"))?, &json!({ "members": rows, "pass": pass }))?;
    println!("{}", status(pass));
    Ok(pass.into())
}

pub fn weakstrong(cfg: &RunConfig, choice: SolutionChoice) -> Result<Outcome, CliError> {
    let (spec, sol) = cfg.study_spec(choice)?;
    let dir = out_dir(cfg, "weakstrong")?;
    let report = weak_strong_study(&spec, &sol)?;
    let name = choice.name();
    io::write_study_json(create(&dir.join(format!("study_{name}.json")))?, &report)?;
    for t in &report.traces {
        io::write_study_trace_csv(create(&dir.join(format!("{name}_n{}.csv", t.resolution)))?, t)?;
    }
    println!("weak-strong study: {name}");
    for (n, v) in report.resolutions.iter().zip(&report.relenergy_finals) {
        println!("  n = {n:4}: relative energy at T = {v:.4e}");
    }
    match report.fitted_alpha {
        Some(a) => println!("  fitted alpha = {a:.4}"),
        None => println!("  exact agreement, no rate fitted"),
    }
    println!("  min inequality residual = {:.3e}", report.inequality_min_residual);
    println!("{}", status(report.pass));
    Ok(report.pass.into())
}

pub fn check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = cfg.model()?;
    let suite = invariant_suite(&model).map_err(|e| CliError::Runtime(e.to_string()))?;
    let dir = out_dir(cfg, "check")?;
    io::write_json(create(&dir.join("suite.json"))?, &suite)?;
    println!("Gibbs relation: max residual {:.3e} over {} points", suite.gibbs_max, suite.gibbs_samples);
    println!(
        "stability: min dp/drho {:.3e}, min de/dtheta {:.3e}",
        suite.stability_min_dp_drho, suite.stability_min_de_dtheta
    );
    let c = &suite.coercivity;
    match suite.coercivity_baseline {
        Some(b) => println!(
            "coercivity: min ratio {:.4e} over {} samples ({} non-positive), baseline {b:.4e}",
            c.min_ratio, c.samples, c.non_positive
        ),
        None => println!(
            "coercivity: min ratio {:.4e} over {} samples ({} non-positive)",
            c.min_ratio, c.samples, c.non_positive
        ),
    }
    println!("{}", status(suite.pass));
    Ok(suite.pass.into())
}
