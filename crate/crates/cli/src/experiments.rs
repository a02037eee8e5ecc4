//! The figure reproductions, scans and the Gaussian/dense cross-check.

use std::sync::Arc;

use anyhow::{bail, Context, Result};
use gge_thermo::dense::fock::{correlation_from_dense, gaussian_to_dense, mode_number_operators, quadratic_form_dense};
use gge_thermo::dense::{self, ConservedSet};
use gge_thermo::fermion::{
    self, build_chain, gibbs_correlation, CorrelationMatrix, EquilibrationModel, QuadraticHamiltonian,
};
use gge_thermo::protocols::{
    build_population_inverted_bath, child_seed, local_quench_schedule, min_work_scan, optimal_gge_protocol,
    optimal_gge_schedule, optimal_work_bound, richardson, run_exact_schedule, run_schedule, Dense, DenseModel,
    Fermion, HoldTimes, ScanModel, ScanResult, Schedule, ScheduleSource, SystemBathSplit,
};
use gge_thermo::{eigh, CMatrix, HermitianMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig, ModelName, OracleState};
use crate::csv::{Cell, CsvTable};

/// A table plus human-readable summary lines.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: CsvTable,
    pub notes: Vec<String>,
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.experiment {
        Experiment::Fig1 => fig1(cfg),
        Experiment::Fig2 => fig2(cfg),
        Experiment::Fig3 => fig3(cfg),
        Experiment::Fig4 => fig4(cfg),
        Experiment::Scan => scan(cfg),
        Experiment::OracleCheck => oracle_check(cfg),
    }
}

fn chain(cfg: &ExperimentConfig) -> Result<QuadraticHamiltonian> {
    let mut eps = vec![cfg.eps; cfg.n];
    eps[0] = cfg.eps1;
    Ok(build_chain(cfg.n, &eps, cfg.g)?)
}

fn hold_times(cfg: &ExperimentConfig) -> Result<HoldTimes> {
    let (lo, hi) = cfg.hold_times();
    Ok(HoldTimes::new(lo, hi)?)
}

pub fn fig1(cfg: &ExperimentConfig) -> Result<Report> {
    let h0 = chain(cfg)?;
    let g0 = gibbs_correlation(&h0, cfg.beta0);
    let h1 = h0.with_site_energy(0, cfg.eps1 + cfg.delta);
    let t_max = 200.0 / cfg.g.abs();
    let times: Vec<f64> = (0..cfg.points)
        .map(|i| t_max * i as f64 / (cfg.points - 1) as f64)
        .collect();
    let n1 = fermion::site_occupation_trajectory(&g0, &h1, 0, &times)?;
    let gge = fermion::dephase_gge(&g0, &h1)?.site_occupation(0);
    let gibbs = fermion::equilibrate(&g0, &h1, EquilibrationModel::Gibbs)?.site_occupation(0);
    let mut table = CsvTable::new(["t", "n1_exact", "n1_gge", "n1_gibbs"]);
    for (t, x) in times.iter().zip(&n1) {
        table.push(vec![(*t).into(), (*x).into(), gge.into(), gibbs.into()]);
    }
    let tail = &n1[3 * n1.len() / 4..];
    let avg = tail.iter().sum::<f64>() / tail.len() as f64;
    let notes = vec![
        format!("window average of n1_exact over t >= {:.6e}: {avg:.12e}", times[3 * n1.len() / 4]),
        format!("|avg - n1_gge| = {:.3e}", (avg - gge).abs()),
        format!("|n1_gge - n1_gibbs| = {:.3e}", (gge - gibbs).abs()),
    ];
    Ok(Report { table, notes })
}

/// Mode populations drawn uniformly from `[0, 1)`.
pub fn fig2_initial_state(cfg: &ExperimentConfig, h: &QuadraticHamiltonian) -> Result<CorrelationMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let p: Vec<f64> = (0..cfg.n).map(|_| rng.random::<f64>()).collect();
    Ok(CorrelationMatrix::from_mode_populations(h, &p)?)
}

pub fn fig2(cfg: &ExperimentConfig) -> Result<Report> {
    let h = chain(cfg)?;
    let g0 = fig2_initial_state(cfg, &h)?;
    let bound = optimal_work_bound(&g0, &h)?;
    let hold = hold_times(cfg)?;
    let rows: Vec<(usize, Result<[f64; 3]>)> = cfg
        .n_list
        .par_iter()
        .map(|&n| {
            let cell = || -> Result<[f64; 3]> {
                let mut out = [f64::NAN; 3];
                if cfg.has(ModelName::TaGge) {
                    let rec = optimal_gge_protocol(&g0, &h, n)?;
                    out[1] = rec.work;
                    out[2] = rec.entropy_production;
                }
                if cfg.has(ModelName::Exact) {
                    let sched = optimal_gge_schedule(&g0, &h, n)?;
                    out[0] = run_exact_schedule(&g0, &sched, hold, child_seed(cfg.seed, n))?.work;
                }
                Ok(out)
            };
            (n, cell())
        })
        .collect();
    let mut table = CsvTable::new(["N", "W_exact", "W_gge", "W_bound", "S_produced_gge"]);
    let mut notes = vec![format!("W_bound = {bound:.12e}")];
    for (n, r) in rows {
        let v = r.unwrap_or_else(|e| {
            notes.push(format!("N={n}: {e}"));
            [f64::NAN; 3]
        });
        table.push(vec![n.into(), v[0].into(), v[1].into(), bound.into(), v[2].into()]);
    }
    Ok(Report { table, notes })
}

/// System site 0 at the configured occupation, bath either thermal at `beta0`
/// or with its `K` most energetic modes filled.
pub fn local_initial_state(cfg: &ExperimentConfig, h: &QuadraticHamiltonian, inverted: bool) -> Result<CorrelationMatrix> {
    let split = SystemBathSplit::new(h.coefficients(), vec![0])?;
    let hb = split.bath_hamiltonian(h.coefficients());
    let bath = if inverted {
        build_population_inverted_bath(&hb, cfg.k)?
    } else {
        gibbs_correlation(&hb, cfg.beta0)
    };
    let sys = CorrelationMatrix::from_site_occupations(&[cfg.occupation])?;
    Ok(split.compose(&sys, &bath)?)
}

fn local_source(h: &QuadraticHamiltonian, peak: f64) -> ScheduleSource {
    let c = h.coefficients().clone();
    ScheduleSource::Custom(Arc::new(move |n| local_quench_schedule(&c, 0, peak, n)))
}

fn scan_model(m: ModelName, hold: HoldTimes) -> ScanModel {
    match m {
        ModelName::Exact => ScanModel::Exact(hold),
        ModelName::TaGge => ScanModel::Effective(EquilibrationModel::TimeAverageGGE),
        ModelName::Gibbs => ScanModel::Effective(EquilibrationModel::Gibbs),
    }
}

struct LocalRun {
    scan: ScanResult,
    models: Vec<ModelName>,
}

impl LocalRun {
    fn work(&self, n: usize, m: ModelName) -> f64 {
        self.models
            .iter()
            .position(|&x| x == m)
            .and_then(|i| self.scan.work(n, i))
            .unwrap_or(f64::NAN)
    }
}

fn local_scan(cfg: &ExperimentConfig, g0: &CorrelationMatrix, src: &ScheduleSource, models: &[ModelName]) -> Result<LocalRun> {
    let hold = hold_times(cfg)?;
    let sm: Vec<ScanModel> = models.iter().map(|&m| scan_model(m, hold)).collect();
    Ok(LocalRun {
        scan: min_work_scan(g0, src, &sm, &cfg.n_list, cfg.seed),
        models: models.to_vec(),
    })
}

/// Richardson value of `W(N)` on `cfg.extrapolate`.
fn quasi_static_work(
    cfg: &ExperimentConfig,
    g0: &CorrelationMatrix,
    src: &ScheduleSource,
    model: EquilibrationModel,
    label: &str,
    notes: &mut Vec<String>,
) -> f64 {
    let ns = &cfg.extrapolate;
    let ws: Result<Vec<f64>> = ns
        .par_iter()
        .map(|&n| Ok(run_schedule::<Fermion>(g0, &src.build(n)?, &model)?.work))
        .collect();
    match ws {
        Err(e) => {
            notes.push(format!("{label}: quasi-static runs failed: {e}"));
            f64::NAN
        }
        Ok(ws) => match richardson(ns, &ws) {
            Some(x) => {
                notes.push(format!("{label} = {:.12e} (error estimate {:.3e})", x.value, x.error));
                x.value
            }
            None => {
                notes.push(format!("{label}: non-monotone, no extrapolation; W(N) for N = {ns:?}: {ws:?}"));
                f64::NAN
            }
        },
    }
}

fn cell_failures(run: &LocalRun, notes: &mut Vec<String>) {
    for c in &run.scan.cells {
        if let Err(e) = &c.outcome {
            notes.push(format!("N={} {}: {e}", c.n, run.models[c.model].name()));
        }
    }
    for (m, v) in run.models.iter().zip(&run.scan.verdicts) {
        notes.push(format!("minimum work principle ({}): {v}", m.name()));
    }
}

pub fn fig3(cfg: &ExperimentConfig) -> Result<Report> {
    let h = chain(cfg)?;
    let g0 = local_initial_state(cfg, &h, false)?;
    let src = local_source(&h, cfg.eps1_peak);
    let run = local_scan(cfg, &g0, &src, &cfg.models)?;
    let mut notes = Vec::new();
    cell_failures(&run, &mut notes);
    let gge_inf = quasi_static_work(cfg, &g0, &src, EquilibrationModel::TimeAverageGGE, "W_gge_inf", &mut notes);
    let gibbs_inf = quasi_static_work(cfg, &g0, &src, EquilibrationModel::Gibbs, "W_gibbs_inf", &mut notes);
    let mut table = CsvTable::new(["N", "W_exact", "W_gge", "W_gibbs", "W_gge_inf", "W_gibbs_inf"]);
    for &n in &cfg.n_list {
        table.push(vec![
            n.into(),
            run.work(n, ModelName::Exact).into(),
            run.work(n, ModelName::TaGge).into(),
            run.work(n, ModelName::Gibbs).into(),
            gge_inf.into(),
            gibbs_inf.into(),
        ]);
    }
    Ok(Report { table, notes })
}

pub fn fig4(cfg: &ExperimentConfig) -> Result<Report> {
    let h = chain(cfg)?;
    let g0 = local_initial_state(cfg, &h, true)?;
    let src = local_source(&h, cfg.eps1_peak);
    let models: Vec<ModelName> = cfg.models.iter().copied().filter(|&m| m != ModelName::Gibbs).collect();
    let run = local_scan(cfg, &g0, &src, &models)?;
    let mut notes = Vec::new();
    let positive = fermion::positive_temperature_condition(&g0, &h)?;
    notes.push(format!(
        "positive-temperature condition E <= sum(eps)/2: {} (E = {:.12e}, sum(eps)/2 = {:.12e})",
        if positive { "satisfied" } else { "violated" },
        fermion::energy(&g0, &h)?,
        0.5 * h.full_band_energy()
    ));
    cell_failures(&run, &mut notes);
    let gge_inf = quasi_static_work(cfg, &g0, &src, EquilibrationModel::TimeAverageGGE, "W_gge_inf", &mut notes);
    let mut table = CsvTable::new(["N", "W_exact", "W_gge", "W_gge_inf"]);
    for &n in &cfg.n_list {
        table.push(vec![
            n.into(),
            run.work(n, ModelName::Exact).into(),
            run.work(n, ModelName::TaGge).into(),
            gge_inf.into(),
        ]);
    }
    Ok(Report { table, notes })
}

/// Local-quench scan in long format; the bath is inverted when `K > 0`.
pub fn scan(cfg: &ExperimentConfig) -> Result<Report> {
    let h = chain(cfg)?;
    let g0 = local_initial_state(cfg, &h, cfg.k > 0)?;
    let src = local_source(&h, cfg.eps1_peak);
    let run = local_scan(cfg, &g0, &src, &cfg.models)?;
    let mut notes = Vec::new();
    cell_failures(&run, &mut notes);
    let mut table = CsvTable::new(["N", "model", "W", "S_produced"]);
    let mut cells: Vec<_> = run.scan.cells.iter().collect();
    cells.sort_by_key(|c| (c.n, c.model));
    for c in cells {
        let (w, s) = c.outcome.as_ref().map_or((f64::NAN, f64::NAN), |&(w, s)| (w, s));
        table.push(vec![c.n.into(), run.models[c.model].name().into(), w.into(), s.into()]);
    }
    Ok(Report { table, notes })
}

fn random_hermitian(rng: &mut impl Rng, n: usize) -> HermitianMatrix {
    let m = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    HermitianMatrix::hermitian_part(&m)
}

fn random_gaussian(rng: &mut impl Rng, n: usize) -> Result<CorrelationMatrix> {
    let u = eigh(&random_hermitian(rng, n)).vectors;
    let d: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.95)).collect();
    Ok(CorrelationMatrix::new(HermitianMatrix::from_spectrum(&u, &d))?)
}

pub fn oracle_check(cfg: &ExperimentConfig) -> Result<Report> {
    let n = cfg.n;
    let quenches = cfg.n_list.iter().copied().max().unwrap_or(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let hs: Vec<HermitianMatrix> = (0..=quenches).map(|_| random_hermitian(&mut rng, n)).collect();
    let g0 = match cfg.state {
        OracleState::Random => random_gaussian(&mut rng, n)?,
        OracleState::Vacuum => CorrelationMatrix::vacuum(n),
    };
    let rho0 = gaussian_to_dense(&g0).context("building the dense state")?;
    let h1 = QuadraticHamiltonian::new(hs[1].clone());
    let h0 = QuadraticHamiltonian::new(hs[0].clone());
    let dense_h = |h: &HermitianMatrix| quadratic_form_dense(h.matrix());
    let hd0 = dense_h(&hs[0])?;
    let hd1 = dense_h(&hs[1])?;

    let mut rows: Vec<(String, f64, f64)> = vec![
        ("energy".into(), fermion::energy(&g0, &h0)?, rho0.expectation(&hd0)),
        ("entropy".into(), fermion::entropy_gaussian(&g0)?, dense::vn_entropy(&rho0)),
    ];
    let gge = fermion::dephase_gge(&g0, &h1)?;
    let ta = correlation_from_dense(&dense::ta_state(&rho0, &hd1, 1e-9)?, n)?;
    for i in 0..n {
        rows.push((format!("ta_gge_occupation_{}", i + 1), gge.site_occupation(i), ta.site_occupation(i)));
    }
    let mut notes = Vec::new();
    let mixed = cfg.state == OracleState::Random;
    if mixed {
        let q = ConservedSet::measured(mode_number_operators(&h1)?, &rho0)?;
        let (dgge, _) = dense::gge_state_dense(&rho0, &hd1, &q)?;
        rows.push(("gge_entropy".into(), fermion::entropy_gaussian(&gge)?, dense::vn_entropy(&dgge)));
    } else {
        notes.push("pure initial state: dense GGE and Gibbs rows skipped (boundary targets)".to_string());
    }
    let with_gibbs = cfg.has(ModelName::Gibbs) && mixed;
    if with_gibbs {
        let gib = fermion::equilibrate(&g0, &h1, EquilibrationModel::Gibbs)?;
        let (dg, _) = dense::gibbs_state_dense(&rho0, &hd1)?;
        let dgc = correlation_from_dense(&dg, n)?;
        for i in 0..n {
            rows.push((format!("gibbs_occupation_{}", i + 1), gib.site_occupation(i), dgc.site_occupation(i)));
        }
    }

    let sched = Schedule::from_hamiltonians(hs.clone())?;
    let dsched = Schedule::from_hamiltonians(hs.iter().map(dense_h).collect::<gge_thermo::Result<_>>()?)?;
    let mut pairs = Vec::new();
    if cfg.has(ModelName::TaGge) {
        pairs.push(("ta_gge", EquilibrationModel::TimeAverageGGE, DenseModel::time_average()));
    }
    if with_gibbs {
        pairs.push(("gibbs", EquilibrationModel::Gibbs, DenseModel::Gibbs));
    }
    for (label, fm, dm) in pairs {
        let a = run_schedule::<Fermion>(&g0, &sched, &fm)?;
        let b = run_schedule::<Dense>(&rho0, &dsched, &dm)?;
        for m in 1..a.steps.len() {
            rows.push((
                format!("work_step_{m}_{label}"),
                a.steps[m].work_extracted,
                b.steps[m].work_extracted,
            ));
        }
    }

    let mut table = CsvTable::new(["quantity", "gaussian_value", "dense_value", "abs_diff"]);
    let mut worst: f64 = 0.0;
    for (q, a, b) in rows {
        let d = (a - b).abs();
        worst = worst.max(d);
        table.push(vec![Cell::Text(q), a.into(), b.into(), d.into()]);
    }
    notes.push(format!("max abs_diff = {worst:.3e}"));
    Ok(Report { table, notes })
}

/// Refuses configurations the experiment cannot run at all.
pub fn preflight(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.experiment == Experiment::OracleCheck && cfg.n > gge_thermo::dense::fock::MAX_FOCK_MODES {
        bail!("n = {} exceeds the dense limit", cfg.n);
    }
    Ok(())
}
