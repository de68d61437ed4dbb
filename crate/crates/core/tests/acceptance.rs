//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use mveu::defects::{defect_trace, domination_check, dominated_observables, energy_density, SyntheticMeasure};
use mveu::io::{load_config, RunConfig, SolutionChoice};
use mveu::solver::{self, entropy_residual, ConservedField, FluxKind, Grid, SchemeConfig};
use mveu::thermo::{
    coercivity_sweep, default_coercivity_setup, log_grid, stability_check, within_factor_two, CutOff, SampleBox,
    ThermoModel, COERCIVITY_BASELINE,
};
use mveu::weak_strong::{default_cutoff, rel_energy_trace, weak_strong_study, StudyReport};
use mveu::young::{
    build_young_measure, run_ensemble, support_check, EnsembleSpec, InitialData, YoungMeasureField,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn sod_field(n: usize, model: &ThermoModel) -> ConservedField {
    InitialData::sod().sample(Grid::unit(1, n).unwrap(), model).unwrap()
}

fn shipped_configs() -> Vec<(String, RunConfig)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut paths: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| (p.file_stem().unwrap().to_string_lossy().into_owned(), load_config(&p).unwrap()))
        .collect()
}

fn gibbs() -> Outcome {
    let model = ThermoModel::default();
    let start = Instant::now();
    let grid = log_grid(1e-2, 1e2, 50);
    let mut worst = 0.0f64;
    for &rho in &grid {
        for &theta in &grid {
            let (r1, r2) = model.gibbs_residual(rho, theta, 1e-4).unwrap();
            worst = worst.max(r1.abs()).max(r2.abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-7 && secs < 1.0, format!("max residual {worst:.2e} (tol 1e-7), {secs:.3} s (limit 1 s)"))
}

fn stability() -> Outcome {
    let grid = log_grid(1e-2, 1e2, 50);
    let rep = stability_check(&ThermoModel::default(), &grid, &grid, 1e-4);
    outcome(
        rep.holds(),
        format!("min dp/drho {:.3e}, min de/dtheta {:.3e} over {} points", rep.min_dp_drho, rep.min_de_dtheta, rep.samples),
    )
}

fn min_entropy_support() -> Outcome {
    let start = Instant::now();
    let spec = EnsembleSpec {
        resolutions: vec![200],
        initial: InitialData::sod(),
        scheme: SchemeConfig { t_end: 0.15, ..Default::default() },
        ..Default::default()
    };
    let model = spec.model;
    let run = solver::run(spec.initial_field(200).unwrap(), &spec.scheme, &model, &spec.snapshot_times()).unwrap();
    let ym = build_young_measure(&spec, &run.snapshots).unwrap();
    let report = support_check(&ym, &model, run.s0, 1e-8);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        report.is_empty() && secs < 10.0,
        format!(
            "s0 = {:.6}, {} entropy / {} vacuum violations at tol 1e-8, {:.2} s (limit 10 s)",
            run.s0,
            report.entropy.len(),
            report.vacuum.len(),
            secs
        ),
    )
}

fn conservation() -> Outcome {
    let model = ThermoModel::default();
    let cfg = SchemeConfig { t_end: 1.5, ..Default::default() };
    let init = sod_field(200, &model);
    let (m0, e0) = (init.total_mass(), init.total_energy());
    let mut mass_drift = 0.0f64;
    let mut energy_rise = f64::NEG_INFINITY;
    let out = solver::run_with(init, &cfg, &model, &[], |before, step| {
        mass_drift = mass_drift.max(((step.field.total_mass() - m0) / m0).abs());
        energy_rise = energy_rise.max((step.field.total_energy() - before.total_energy()) / e0);
    })
    .unwrap();
    outcome(
        out.steps >= 1000 && mass_drift <= 1e-12 && energy_rise <= 1e-12,
        format!("{} steps, max mass drift {mass_drift:.2e}, max energy increase {energy_rise:.2e} (tol 1e-12)", out.steps),
    )
}

fn renormalized_entropy() -> Outcome {
    let model = ThermoModel::default();
    let cfg = SchemeConfig { t_end: 0.15, ..Default::default() };
    let init = sod_field(200, &model);
    let tol = 1e-8 / init.grid.h();
    let s: Vec<f64> = init.cells.iter().map(|c| model.entropy_unchecked(c.rho, c.internal_energy())).collect();
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cutoffs = [
        ("identity-on-range", CutOff::new(lo - 1.0, hi + 1.0).unwrap()),
        ("Z(-5,5)", CutOff::new(-5.0, 5.0).unwrap()),
        ("Z(-1,1)", CutOff::new(-1.0, 1.0).unwrap()),
    ];
    let mut worst = [f64::INFINITY; 3];
    let mut violations = [0usize; 3];
    solver::run_with(init, &cfg, &model, &[], |before, step| {
        for (k, (_, z)) in cutoffs.iter().enumerate() {
            let r = entropy_residual(before, &step.field, z, &model, FluxKind::LocalLaxFriedrichs).unwrap();
            for v in r {
                worst[k] = worst[k].min(v);
                if v < -tol {
                    violations[k] += 1;
                }
            }
        }
    })
    .unwrap();
    let detail = cutoffs
        .iter()
        .enumerate()
        .map(|(k, (name, _))| format!("{name}: min {:.2e}, {} cells below", worst[k], violations[k]))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(violations.iter().all(|&v| v == 0), format!("{detail} (tol -{tol:.1e})"))
}

fn young_oracle() -> Outcome {
    let (a, b) = (0.5, 1.5);
    let (x_blocks, n) = (8, 4096);
    let eps = 1.0 / (x_blocks as f64 * 64.0);
    let model = ThermoModel::default();
    let profile = |x: [f64; 3]| {
        let rho = if (x[0] / eps + 0.1).fract() < 0.5 { a } else { b };
        (rho, 1.0, [0.0; 3])
    };
    let field = ConservedField::from_primitive(Grid::unit(1, n).unwrap(), &model, 0.0, profile).unwrap();
    let ym = YoungMeasureField::from_groups(&[vec![&field]], x_blocks).unwrap().compress(1e-3);

    let per = n / x_blocks;
    let mut worst_weight = 0.0f64;
    let mut worst_mean = 0.0f64;
    let mut atoms_ok = true;
    for (blk, m) in ym.slices[0].blocks.iter().enumerate() {
        let mut rhos: Vec<(f64, f64)> = m.atoms.iter().map(|at| (at.point.rho, at.weight)).collect();
        rhos.sort_by(|p, q| p.0.total_cmp(&q.0));
        atoms_ok &= rhos.len() == 2 && (rhos[0].0 - a).abs() < 1e-12 && (rhos[1].0 - b).abs() < 1e-12;
        for &(_, w) in &rhos {
            worst_weight = worst_weight.max((w - 0.5).abs());
        }
        let brute: f64 = field.cells[blk * per..(blk + 1) * per].iter().map(|c| c.rho).sum::<f64>() / per as f64;
        let mean = m.expect(|p| p.rho);
        worst_mean = worst_mean.max((mean - brute).abs()).max((mean - 1.0).abs());
    }
    outcome(
        atoms_ok && worst_weight <= 0.02 && worst_mean <= 1e-3,
        format!("atoms at (0.5, 1.5): {atoms_ok}, max |w - 0.5| {worst_weight:.2e}, max mean error {worst_mean:.2e}"),
    )
}

fn synthetic_domination() -> Outcome {
    let model = ThermoModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let observables = dominated_observables(&model);
    let mut violations = 0;
    for _ in 0..1000 {
        let m = SyntheticMeasure::random(&mut rng, 5, 3);
        let mu_f = m.defect(energy_density);
        for (_, g, c) in &observables {
            if m.defect(g).abs() > c * mu_f {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("{violations} violations over 1000 measures x {} observables", observables.len()))
}

fn bookkeeping_and_cfit() -> (Outcome, Outcome) {
    let mut worst = 0.0f64;
    let mut cfits = Vec::new();
    let mut constant = (f64::NAN, f64::NAN);
    for (name, cfg) in shipped_configs() {
        let spec = cfg.ensemble_spec().unwrap();
        for m in run_ensemble(&spec).unwrap() {
            let (trace, blocks) = defect_trace(&m.measure, &m.fine, &m.energy_trace, &spec.model).unwrap();
            let energy = m.measure.integrate(energy_density).unwrap();
            for (k, d) in trace.dissipation.d.iter().enumerate() {
                worst = worst.max(((energy[k] - energy[0] + d) / energy[0]).abs());
            }
            let dom = domination_check(&trace, &blocks, &spec.model);
            cfits.push((format!("{name}/n{}", m.resolution), dom.c_fit, dom.holds));
            if name == "constant" {
                let mu = *trace.mu_r_cumulative.last().unwrap();
                let d = *trace.d_integral.last().unwrap();
                constant = (constant.0.max(mu).max(0.0), constant.1.max(d.abs()).max(0.0));
            }
        }
    }
    let finite = cfits.iter().all(|(_, c, h)| c.is_finite() && *h);
    let max_c = cfits.iter().map(|c| c.1).fold(0.0, f64::max);
    let bad: Vec<&str> = cfits.iter().filter(|(_, c, h)| !(c.is_finite() && *h)).map(|c| c.0.as_str()).collect();
    (
        outcome(worst <= 1e-10, format!("max relative imbalance {worst:.2e} over {} members (tol 1e-10)", cfits.len())),
        outcome(
            finite && constant.0 <= 1e-12 && constant.1 <= 1e-12,
            format!(
                "c_fit finite on {}/{} members (max {max_c:.3}){}; constant ensemble ||mu_R|| {:.1e}, int D {:.1e}",
                cfits.len() - bad.len(),
                cfits.len(),
                if bad.is_empty() { String::new() } else { format!(" failing {bad:?}") },
                constant.0,
                constant.1
            ),
        ),
    )
}

fn study(choice: SolutionChoice) -> StudyReport {
    let (spec, sol) = RunConfig::default().study_spec(choice).unwrap();
    weak_strong_study(&spec, &sol).unwrap()
}

fn weak_strong(reports: &[(SolutionChoice, StudyReport, f64)]) -> Outcome {
    let (_, contact, secs) = &reports[0];
    let alpha = contact.fitted_alpha.unwrap_or(f64::NAN);
    let band = (0.6..=1.5).contains(&alpha);
    let d_finals = &contact.d_finals;
    let d_ok = contact.dissipation_non_increasing();
    let (_, constant, _) = &reports[1];
    let constant_ok = constant.relenergy_finals.iter().all(|v| v.abs() <= 1e-12);
    let pass = contact.strictly_decreasing() && band && d_ok && *secs < 300.0 && constant_ok;
    outcome(
        pass,
        format!(
            "contact relenergy_final {:?}, strictly decreasing {}, fitted alpha {alpha:.4} (band [0.6, 1.5]: {band}), \
             D(T) {d_finals:?} non-increasing {d_ok}, {secs:.2} s; constant max |relenergy_final| {:.1e}",
            contact.relenergy_finals.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>(),
            contact.strictly_decreasing(),
            constant.relenergy_finals.iter().map(|v| v.abs()).fold(0.0, f64::max)
        ),
    )
}

fn inequality(reports: &[(SolutionChoice, StudyReport, f64)]) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (choice, rep, _) in reports {
        let tol = 1e-6 * rep.initial_energy;
        let ok = rep.inequality_min_residual >= -tol;
        pass &= ok;
        parts.push(format!("{}: min residual {:.3e} (tol -{tol:.1e})", choice.name(), rep.inequality_min_residual));
    }
    // Cut-off equivalence for data above the entropy floor.
    let mut gap = 0.0f64;
    let model = ThermoModel::default();
    for choice in [SolutionChoice::Contact, SolutionChoice::Constant, SolutionChoice::Boost] {
        let (spec, sol) = RunConfig::default().study_spec(choice).unwrap();
        for m in run_ensemble(&spec).unwrap() {
            let z = default_cutoff(&m.measure, &model).unwrap();
            let with = rel_energy_trace(&m.measure, &sol, &model, &z, None).unwrap();
            let without = rel_energy_trace(&m.measure, &sol, &model, &CutOff::identity(), None).unwrap();
            for (a, b) in with.value.iter().zip(&without.value) {
                gap = gap.max((a - b).abs());
            }
        }
    }
    pass &= gap <= 1e-10;
    parts.push(format!("cut-off equivalence gap {gap:.1e} (tol 1e-10)"));
    outcome(pass, parts.join("; "))
}

fn coercivity() -> Outcome {
    let model = ThermoModel::default();
    let (win, reference) = default_coercivity_setup(&model).unwrap();
    let sweep = coercivity_sweep(&model, &win, &reference, &SampleBox::default(), 100_000, 99).unwrap();
    let pass = sweep.non_positive == 0 && within_factor_two(sweep.min_ratio, COERCIVITY_BASELINE);
    outcome(
        pass,
        format!(
            "{} fresh samples, {} non-positive, min ratio {:.4e} vs baseline {COERCIVITY_BASELINE:.4e}",
            sweep.samples, sweep.non_positive, sweep.min_ratio
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("Gibbs consistency", gibbs()),
        ("thermodynamic stability", stability()),
        ("minimum-entropy support", min_entropy_support()),
        ("conservation and energy admissibility", conservation()),
        ("renormalized entropy inequality", renormalized_entropy()),
        ("Young-measure oracle", young_oracle()),
        ("synthetic concentration domination", synthetic_domination()),
    ];
    let (bookkeeping, cfit) = bookkeeping_and_cfit();
    results.push(("energy bookkeeping identity", bookkeeping));
    results.push(("defect domination", cfit));

    let reports: Vec<(SolutionChoice, StudyReport, f64)> =
        [SolutionChoice::Contact, SolutionChoice::Constant, SolutionChoice::Boost]
            .into_iter()
            .map(|c| {
                let start = Instant::now();
                let rep = study(c);
                (c, rep, start.elapsed().as_secs_f64())
            })
            .collect();
    results.push(("weak-strong study", weak_strong(&reports)));
    results.push(("relative energy inequality residual", inequality(&reports)));
    results.push(("coercivity", coercivity()));

    let failed = results.iter().filter(|(_, o)| !o.pass).count();
    for (name, o) in &results {
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("\n{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
