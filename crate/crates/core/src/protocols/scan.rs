//! Local-quench set-ups and scans of `W(N)` across equilibration models.

use std::sync::Arc;

use rayon::prelude::*;

use super::{run_exact_schedule, run_schedule, Fermion, HoldTimes, Schedule, Trajectory};
use crate::error::{Error, Result};
use crate::fermion::{CorrelationMatrix, EquilibrationModel, QuadraticHamiltonian};
use crate::linalg::{CMatrix, HermitianMatrix, C64};

/// Partition of the sites into a controlled system and a bath.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemBathSplit {
    pub system: Vec<usize>,
    pub bath: Vec<usize>,
    /// Nonzero couplings `(system site, bath site)` of the reference Hamiltonian.
    pub coupling: Vec<(usize, usize)>,
}

impl SystemBathSplit {
    pub fn new(h: &HermitianMatrix, system: Vec<usize>) -> Result<Self> {
        let n = h.dim();
        let mut in_system = vec![false; n];
        for &i in &system {
            if i >= n || in_system[i] {
                return Err(Error::InvalidArgument(format!(
                    "system site {i} is out of range or repeated"
                )));
            }
            in_system[i] = true;
        }
        let bath: Vec<usize> = (0..n).filter(|&i| !in_system[i]).collect();
        let coupling = system
            .iter()
            .flat_map(|&s| bath.iter().map(move |&b| (s, b)))
            .filter(|&(s, b)| h.get(s, b).norm() > 0.0)
            .collect();
        Ok(Self {
            system,
            bath,
            coupling,
        })
    }

    /// Coefficient matrix restricted to `sites`.
    pub fn restrict(h: &HermitianMatrix, sites: &[usize]) -> HermitianMatrix {
        let m = CMatrix::from_fn(sites.len(), sites.len(), |i, j| h.get(sites[i], sites[j]));
        HermitianMatrix::hermitian_part(&m)
    }

    pub fn bath_hamiltonian(&self, h: &HermitianMatrix) -> QuadraticHamiltonian {
        QuadraticHamiltonian::new(Self::restrict(h, &self.bath))
    }

    /// Uncorrelated `γ_S ⊕ γ_B` placed on the original site labels.
    pub fn compose(&self, system: &CorrelationMatrix, bath: &CorrelationMatrix) -> Result<CorrelationMatrix> {
        if system.dim() != self.system.len() || bath.dim() != self.bath.len() {
            return Err(Error::DimensionMismatch {
                expected: self.system.len() + self.bath.len(),
                found: system.dim() + bath.dim(),
            });
        }
        let n = self.system.len() + self.bath.len();
        let mut m = CMatrix::zeros(n, n);
        for (a, &i) in self.system.iter().enumerate() {
            for (b, &j) in self.system.iter().enumerate() {
                m[(i, j)] = system.gamma().get(a, b);
            }
        }
        for (a, &i) in self.bath.iter().enumerate() {
            for (b, &j) in self.bath.iter().enumerate() {
                m[(i, j)] = bath.gamma().get(a, b);
            }
        }
        Ok(CorrelationMatrix::from_hermitian_unchecked(
            HermitianMatrix::hermitian_part(&m),
        ))
    }
}

/// Bath state with the `k` most energetic modes of `bath` filled and the rest empty.
pub fn build_population_inverted_bath(bath: &QuadraticHamiltonian, k: usize) -> Result<CorrelationMatrix> {
    let n = bath.dim();
    if k >= n {
        return Err(Error::InvalidArgument(format!(
            "K = {k} populated modes needs K < n = {n}"
        )));
    }
    let p: Vec<f64> = (0..n).map(|i| if i >= n - k { 1.0 } else { 0.0 }).collect();
    CorrelationMatrix::from_mode_populations(bath, &p)
}

/// Quench the on-site energy of `site` to `peak`, then return to its initial value in
/// `N − 1` equidistant steps; `N ≥ 2`.
pub fn local_quench_schedule(h0: &HermitianMatrix, site: usize, peak: f64, n: usize) -> Result<Schedule> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "local quench schedule needs N ≥ 2 to return, got {n}"
        )));
    }
    if site >= h0.dim() {
        return Err(Error::InvalidArgument(format!("site {site} out of range")));
    }
    let e0 = h0.get(site, site).re;
    let with = |e: f64| {
        let mut m = h0.matrix().clone();
        m[(site, site)] = C64::new(e, 0.0);
        HermitianMatrix::hermitian_part(&m)
    };
    let mut hams = vec![h0.clone()];
    for m in 1..n {
        let s = (m - 1) as f64 / (n - 1) as f64;
        hams.push(with(peak + s * (e0 - peak)));
    }
    hams.push(h0.clone());
    Schedule::from_hamiltonians(hams)
}

/// Where the schedule for a given `N` comes from.
#[derive(Clone)]
pub enum ScheduleSource {
    /// Quenches at `u = m/N`.
    Trajectory(Trajectory),
    Custom(Arc<dyn Fn(usize) -> Result<Schedule> + Send + Sync>),
}

impl ScheduleSource {
    pub fn build(&self, n: usize) -> Result<Schedule> {
        match self {
            ScheduleSource::Trajectory(t) => Schedule::sampled(t, n),
            ScheduleSource::Custom(f) => f(n),
        }
    }
}

/// One column of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanModel {
    /// Exact evolution with sampled hold times.
    Exact(HoldTimes),
    Effective(EquilibrationModel),
}

impl ScanModel {
    pub fn name(&self) -> &'static str {
        match self {
            ScanModel::Exact(_) => "exact",
            ScanModel::Effective(EquilibrationModel::TimeAverageGGE) => "ta-gge",
            ScanModel::Effective(EquilibrationModel::Gibbs) => "gibbs",
            ScanModel::Effective(EquilibrationModel::Exact { .. }) => "exact-fixed",
        }
    }
}

/// Minimum-work-principle verdict for one model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Extracted work non-decreasing in `N`.
    Holds,
    Violated,
    InsufficientData,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::InsufficientData => "insufficient data",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ScanCell {
    pub n: usize,
    pub model: usize,
    /// `(W, ΔS)` or the failure of this cell.
    pub outcome: std::result::Result<(f64, f64), Error>,
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub models: Vec<ScanModel>,
    pub n_list: Vec<usize>,
    /// Row-major over `n_list × models`.
    pub cells: Vec<ScanCell>,
    pub verdicts: Vec<Verdict>,
}

impl ScanResult {
    pub fn work(&self, n: usize, model: usize) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.n == n && c.model == model)
            .and_then(|c| c.outcome.as_ref().ok().map(|o| o.0))
    }
}

/// SplitMix64 of `seed` and `n`: independent, reproducible per-`N` streams.
pub fn child_seed(seed: u64, n: usize) -> u64 {
    let mut z = seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Monotonicity of `values` (ordered by increasing `N`) with slack `1e-9 · scale`.
pub fn verdict(values: &[f64]) -> Verdict {
    if values.len() < 2 {
        return Verdict::InsufficientData;
    }
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if values.windows(2).all(|w| w[1] >= w[0] - 1e-9 * scale) {
        Verdict::Holds
    } else {
        Verdict::Violated
    }
}

/// One run per `(N, model)` cell, in parallel; a failing cell is recorded and the scan continues.
pub fn min_work_scan(
    initial: &CorrelationMatrix,
    source: &ScheduleSource,
    models: &[ScanModel],
    n_list: &[usize],
    seed: u64,
) -> ScanResult {
    let jobs: Vec<(usize, usize)> = n_list
        .iter()
        .flat_map(|&n| (0..models.len()).map(move |m| (n, m)))
        .collect();
    let cells: Vec<ScanCell> = jobs
        .par_iter()
        .map(|&(n, m)| {
            let outcome = source.build(n).and_then(|sched| {
                let rec = match models[m] {
                    ScanModel::Exact(hold) => run_exact_schedule(initial, &sched, hold, child_seed(seed, n))?,
                    ScanModel::Effective(model) => run_schedule::<Fermion>(initial, &sched, &model)?,
                };
                Ok((rec.work, rec.entropy_production))
            });
            ScanCell { n, model: m, outcome }
        })
        .collect();
    let mut order: Vec<usize> = n_list.to_vec();
    order.sort_unstable();
    order.dedup();
    let verdicts = (0..models.len())
        .map(|m| {
            let ws: Vec<f64> = order
                .iter()
                .filter_map(|&n| {
                    cells
                        .iter()
                        .find(|c| c.n == n && c.model == m)
                        .and_then(|c| c.outcome.as_ref().ok().map(|o| o.0))
                })
                .collect();
            verdict(&ws)
        })
        .collect();
    ScanResult {
        models: models.to_vec(),
        n_list: n_list.to_vec(),
        cells,
        verdicts,
    }
}
