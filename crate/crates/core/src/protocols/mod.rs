//! Sequences of quenches with equilibration, and their work and entropy accounting.
//!
//! Starting from `ω⁰ = ρ⁰` under `H⁰`, step `m` quenches to `H^m` and then
//! equilibrates. The extracted work of the step is
//! `Tr(ω^{m−1} H^{m−1}) − Tr(ω^{m−1} H^m)` and `W` is their sum.

mod optimal;
mod scan;
mod trajectory;

pub use optimal::{
    entropy_matched_beta, optimal_gge_protocol, optimal_gge_schedule, optimal_gibbs_protocol,
    optimal_gibbs_schedule, optimal_ta_protocol, optimal_ta_schedule, optimal_work_bound,
    passive_trajectory, restricted_first_quench, FirstQuenchChoice, GibbsProtocol,
    HamiltonianFamily,
};
pub use scan::{
    build_population_inverted_bath, child_seed, local_quench_schedule, min_work_scan, ScanCell,
    ScanModel, ScanResult, ScheduleSource, SystemBathSplit, Verdict,
};
pub use trajectory::{spectrum, Schedule, Segment, Trajectory};

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dense::{self, ConservedSet, DenseState, DualPoint};
use crate::error::{Error, Result};
use crate::fermion::{self, CorrelationMatrix, EquilibrationModel, QuadraticHamiltonian};
use crate::linalg::{eigh, HermitianMatrix, DEFAULT_DEGENERACY_TOL};
use crate::roots::BetaSolution;

/// Dual variables reported by an equilibration.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Duals {
    #[default]
    None,
    Beta(BetaSolution),
    Gge(DualPoint),
}

/// State representation and equilibration maps used by the runners.
pub trait Backend {
    type State: Clone + Send + Sync;
    type Hamiltonian: Send + Sync;
    type Model: Clone + Send + Sync;

    fn prepare(h: &HermitianMatrix) -> Self::Hamiltonian;
    fn state_dim(state: &Self::State) -> usize;
    fn energy(state: &Self::State, h: &Self::Hamiltonian) -> Result<f64>;
    fn entropy(state: &Self::State) -> Result<f64>;
    /// Conserved expectations the model transports across an equilibration.
    fn conserved(state: &Self::State, h: &Self::Hamiltonian, model: &Self::Model) -> Result<Vec<f64>>;
    fn equilibrate(
        state: &Self::State,
        h: &Self::Hamiltonian,
        model: &Self::Model,
    ) -> Result<(Self::State, Duals)>;
    fn gibbs_model() -> Self::Model;
}

/// Correlation-matrix back end for quadratic fermionic Hamiltonians.
#[derive(Debug, Clone, Copy)]
pub struct Fermion;

impl Backend for Fermion {
    type State = CorrelationMatrix;
    type Hamiltonian = QuadraticHamiltonian;
    type Model = EquilibrationModel;

    fn prepare(h: &HermitianMatrix) -> QuadraticHamiltonian {
        QuadraticHamiltonian::new(h.clone())
    }

    fn state_dim(state: &CorrelationMatrix) -> usize {
        state.dim()
    }

    fn energy(state: &CorrelationMatrix, h: &QuadraticHamiltonian) -> Result<f64> {
        fermion::energy(state, h)
    }

    fn entropy(state: &CorrelationMatrix) -> Result<f64> {
        fermion::entropy_gaussian(state)
    }

    fn conserved(state: &CorrelationMatrix, h: &QuadraticHamiltonian, _: &EquilibrationModel) -> Result<Vec<f64>> {
        state.mode_populations(h)
    }

    fn equilibrate(
        state: &CorrelationMatrix,
        h: &QuadraticHamiltonian,
        model: &EquilibrationModel,
    ) -> Result<(CorrelationMatrix, Duals)> {
        let eq = fermion::equilibrate_detailed(state, h, *model)?;
        Ok((eq.gamma, eq.beta.map_or(Duals::None, Duals::Beta)))
    }

    fn gibbs_model() -> EquilibrationModel {
        EquilibrationModel::Gibbs
    }
}

/// Supplies the conserved observables `Q_j^(m)` for the Hamiltonian of step `m`.
#[derive(Clone)]
pub struct ConservedFn(Arc<dyn Fn(&HermitianMatrix) -> Result<Vec<HermitianMatrix>> + Send + Sync>);

impl ConservedFn {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&HermitianMatrix) -> Result<Vec<HermitianMatrix>> + Send + Sync + 'static,
    {
        Self(Arc::new(f))
    }

    /// The same observables at every step.
    pub fn fixed(observables: Vec<HermitianMatrix>) -> Self {
        Self::new(move |_| Ok(observables.clone()))
    }

    /// Spectral projectors of the current Hamiltonian.
    pub fn spectral_projectors(tol: f64) -> Self {
        Self::new(move |h| Ok(ConservedSet::spectral_projectors(h, tol)))
    }

    pub fn observables(&self, h: &HermitianMatrix) -> Result<Vec<HermitianMatrix>> {
        (self.0)(h)
    }
}

impl std::fmt::Debug for ConservedFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ConservedFn(..)")
    }
}

/// Equilibration maps of the dense back end.
#[derive(Debug, Clone)]
pub enum DenseModel {
    TimeAverage { tol: f64 },
    Gibbs,
    Gge(ConservedFn),
}

impl DenseModel {
    pub fn time_average() -> Self {
        DenseModel::TimeAverage {
            tol: DEFAULT_DEGENERACY_TOL,
        }
    }
}

/// Density-matrix back end.
#[derive(Debug, Clone, Copy)]
pub struct Dense;

impl Backend for Dense {
    type State = DenseState;
    type Hamiltonian = HermitianMatrix;
    type Model = DenseModel;

    fn prepare(h: &HermitianMatrix) -> HermitianMatrix {
        h.clone()
    }

    fn state_dim(state: &DenseState) -> usize {
        state.dim()
    }

    fn energy(state: &DenseState, h: &HermitianMatrix) -> Result<f64> {
        if state.dim() != h.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                found: state.dim(),
            });
        }
        Ok(state.expectation(h))
    }

    fn entropy(state: &DenseState) -> Result<f64> {
        Ok(dense::vn_entropy(state))
    }

    fn conserved(state: &DenseState, h: &HermitianMatrix, model: &DenseModel) -> Result<Vec<f64>> {
        match model {
            DenseModel::Gge(q) => Ok(q
                .observables(h)?
                .iter()
                .map(|o| state.expectation(o))
                .collect()),
            _ => {
                let es = eigh(h);
                let m = es.vectors.adjoint() * state.rho().matrix() * &es.vectors;
                Ok((0..h.dim()).map(|k| m[(k, k)].re).collect())
            }
        }
    }

    fn equilibrate(state: &DenseState, h: &HermitianMatrix, model: &DenseModel) -> Result<(DenseState, Duals)> {
        match model {
            DenseModel::TimeAverage { tol } => Ok((dense::ta_state(state, h, *tol)?, Duals::None)),
            DenseModel::Gibbs => {
                let (w, b) = dense::gibbs_state_dense(state, h)?;
                Ok((w, Duals::Beta(b)))
            }
            DenseModel::Gge(q) => {
                let set = ConservedSet::measured(q.observables(h)?, state)?;
                let (w, d) = dense::gge_state_dense(state, h, &set)?;
                Ok((w, Duals::Gge(d)))
            }
        }
    }

    fn gibbs_model() -> DenseModel {
        DenseModel::Gibbs
    }
}

/// Quantities recorded after step `m` (step 0 is the initial state).
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Index of the Hamiltonian in the schedule.
    pub hamiltonian: usize,
    pub u: f64,
    /// Work gained in the quench of this step; zero at step 0.
    pub work_extracted: f64,
    /// `Tr(ω^m H^m)`.
    pub energy: f64,
    pub entropy: f64,
    pub duals: Duals,
    /// Conserved expectations under `H^m` just before the equilibration.
    pub conserved_before: Vec<f64>,
    /// The same expectations after the equilibration.
    pub conserved_after: Vec<f64>,
}

/// Full accounting of a protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolRecord<S> {
    pub steps: Vec<StepRecord>,
    /// Total extracted work `W = Σ_m work_extracted^(m)`.
    pub work: f64,
    /// `S(ω^N) − S(ω⁰)`.
    pub entropy_production: f64,
    pub final_state: S,
    /// States `ω⁰ … ω^N` when requested.
    pub snapshots: Option<Vec<S>>,
}

impl<S> ProtocolRecord<S> {
    pub fn quenches(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn initial_energy(&self) -> f64 {
        self.steps[0].energy
    }

    pub fn final_energy(&self) -> f64 {
        self.steps.last().unwrap().energy
    }

    /// Largest per-step decrease of the entropy (0 when non-decreasing).
    pub fn max_entropy_decrease(&self) -> f64 {
        self.steps
            .windows(2)
            .map(|w| w[0].entropy - w[1].entropy)
            .fold(0.0, f64::max)
    }

    /// Largest jump of any Lagrange multiplier between consecutive steps.
    /// Steps where the multiplier count changes are skipped.
    pub fn max_lambda_jump(&self) -> f64 {
        let lambdas = |d: &Duals| match d {
            Duals::Gge(p) => Some(p.lambdas.clone()),
            _ => None,
        };
        self.steps
            .windows(2)
            .filter_map(|w| {
                let (a, b) = (lambdas(&w[0].duals)?, lambdas(&w[1].duals)?);
                (a.len() == b.len()).then(|| {
                    a.iter()
                        .zip(&b)
                        .map(|(x, y)| (x - y).abs())
                        .fold(0.0, f64::max)
                })
            })
            .fold(0.0, f64::max)
    }
}

/// Per-step equilibration choice.
pub trait StepModels<M> {
    fn model(&mut self, step: usize) -> M;
}

impl<M, F: FnMut(usize) -> M> StepModels<M> for F {
    fn model(&mut self, step: usize) -> M {
        self(step)
    }
}

/// Runs `schedule` from `initial`, equilibrating with `models.model(m)` after quench `m`.
pub fn run_schedule_with<B: Backend>(
    initial: &B::State,
    schedule: &Schedule,
    mut models: impl StepModels<B::Model>,
    keep_states: bool,
) -> Result<ProtocolRecord<B::State>> {
    let hs = &schedule.hamiltonians;
    if hs.len() < 2 {
        return Err(Error::InvalidArgument("schedule needs at least one quench".into()));
    }
    if B::state_dim(initial) != hs[0].dim() {
        return Err(Error::DimensionMismatch {
            expected: hs[0].dim(),
            found: B::state_dim(initial),
        });
    }
    let h0 = B::prepare(&hs[0]);
    let mut state = initial.clone();
    let e0 = B::energy(&state, &h0)?;
    let s0 = B::entropy(&state)?;
    let mut steps = vec![StepRecord {
        hamiltonian: 0,
        u: schedule.u[0],
        work_extracted: 0.0,
        energy: e0,
        entropy: s0,
        duals: Duals::None,
        conserved_before: Vec::new(),
        conserved_after: Vec::new(),
    }];
    let mut snapshots = keep_states.then(|| vec![state.clone()]);
    let mut work = 0.0;
    let mut e_prev = e0;
    for m in 1..hs.len() {
        let step = |e: Error| e.at_step(m);
        let h = B::prepare(&hs[m]);
        let e_quenched = B::energy(&state, &h).map_err(step)?;
        let w = e_prev - e_quenched;
        work += w;
        let model = models.model(m);
        let before = B::conserved(&state, &h, &model).map_err(step)?;
        let (next, duals) = B::equilibrate(&state, &h, &model).map_err(step)?;
        let after = B::conserved(&next, &h, &model).map_err(step)?;
        let e_after = B::energy(&next, &h).map_err(step)?;
        let s_after = B::entropy(&next).map_err(step)?;
        steps.push(StepRecord {
            hamiltonian: m,
            u: schedule.u[m],
            work_extracted: w,
            energy: e_after,
            entropy: s_after,
            duals,
            conserved_before: before,
            conserved_after: after,
        });
        state = next;
        if let Some(s) = snapshots.as_mut() {
            s.push(state.clone());
        }
        e_prev = e_after;
    }
    let entropy_production = steps.last().unwrap().entropy - s0;
    Ok(ProtocolRecord {
        steps,
        work,
        entropy_production,
        final_state: state,
        snapshots,
    })
}

/// Runs a schedule with a single equilibration model.
pub fn run_schedule<B: Backend>(
    initial: &B::State,
    schedule: &Schedule,
    model: &B::Model,
) -> Result<ProtocolRecord<B::State>> {
    run_schedule_with::<B>(initial, schedule, |_| model.clone(), false)
}

/// Quenches along `traj` at `u = m/N`, `m = 1..=N`.
pub fn run_protocol<B: Backend>(
    initial: &B::State,
    traj: &Trajectory,
    n: usize,
    model: &B::Model,
) -> Result<ProtocolRecord<B::State>> {
    run_schedule::<B>(initial, &Schedule::sampled(traj, n)?, model)
}

/// Uniform distribution of hold times between quenches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoldTimes {
    pub min: f64,
    pub max: f64,
}

impl HoldTimes {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min >= 0.0 && min <= max && max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "hold times need 0 ≤ min ≤ max, got [{min}, {max}]"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn fixed(t: f64) -> Self {
        Self { min: t, max: t }
    }

    /// One draw per quench from a ChaCha8 stream seeded with `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                if self.max > self.min {
                    rng.random_range(self.min..=self.max)
                } else {
                    self.min
                }
            })
            .collect()
    }
}

/// Exact unitary evolution for a sampled hold time after every quench.
pub fn run_exact_schedule(
    gamma0: &CorrelationMatrix,
    schedule: &Schedule,
    hold: HoldTimes,
    seed: u64,
) -> Result<ProtocolRecord<CorrelationMatrix>> {
    let times = hold.sample(schedule.quenches(), seed);
    run_schedule_with::<Fermion>(
        gamma0,
        schedule,
        |m: usize| EquilibrationModel::Exact { t: times[m - 1] },
        false,
    )
}

pub fn run_exact_protocol(
    gamma0: &CorrelationMatrix,
    traj: &Trajectory,
    n: usize,
    hold: HoldTimes,
    seed: u64,
) -> Result<ProtocolRecord<CorrelationMatrix>> {
    run_exact_schedule(gamma0, &Schedule::sampled(traj, n)?, hold, seed)
}

/// Value extrapolated to `N → ∞` with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub value: f64,
    pub error: f64,
}

/// Runs at each `N` and their extrapolation in `1/N`.
#[derive(Debug, Clone)]
pub struct QuasiStatic<S> {
    pub runs: Vec<(usize, ProtocolRecord<S>)>,
    /// `None` when the sequence is not monotone in `N`.
    pub work: Option<Extrapolation>,
    pub entropy_production: Option<Extrapolation>,
}

/// Richardson extrapolation of `f(N) ≈ a + b/N` from the last three points.
pub fn richardson(ns: &[usize], values: &[f64]) -> Option<Extrapolation> {
    let k = ns.len();
    if k < 3 || values.len() != k {
        return None;
    }
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let flat = 1e-12 * scale;
    let up = diffs.iter().all(|&d| d >= -flat);
    let down = diffs.iter().all(|&d| d <= flat);
    if !(up || down) {
        return None;
    }
    let pair = |i: usize| {
        let (n1, n2) = (ns[i] as f64, ns[i + 1] as f64);
        (n2 * values[i + 1] - n1 * values[i]) / (n2 - n1)
    };
    let last = pair(k - 2);
    let prev = pair(k - 3);
    Some(Extrapolation {
        value: last,
        error: (last - prev).abs(),
    })
}

/// Runs `run_protocol` for each `N` (in parallel) and extrapolates `W` and `ΔS`.
pub fn quasi_static<B: Backend>(
    initial: &B::State,
    traj: &Trajectory,
    model: &B::Model,
    n_schedule: &[usize],
) -> Result<QuasiStatic<B::State>>
where
    B::State: Send,
{
    if n_schedule.len() < 3 || n_schedule.windows(2).any(|w| w[1] <= w[0]) || n_schedule[0] == 0 {
        return Err(Error::InvalidArgument(
            "N schedule must hold at least three increasing positive values".into(),
        ));
    }
    let runs: Vec<(usize, ProtocolRecord<B::State>)> = n_schedule
        .par_iter()
        .map(|&n| run_protocol::<B>(initial, traj, n, model).map(|r| (n, r)))
        .collect::<Result<_>>()?;
    let w: Vec<f64> = runs.iter().map(|(_, r)| r.work).collect();
    let s: Vec<f64> = runs.iter().map(|(_, r)| r.entropy_production).collect();
    Ok(QuasiStatic {
        work: richardson(n_schedule, &w),
        entropy_production: richardson(n_schedule, &s),
        runs,
    })
}

/// Result of doubling `N` until the work settles.
#[derive(Debug, Clone)]
pub struct Convergence<S> {
    pub record: ProtocolRecord<S>,
    pub n: usize,
    pub converged: bool,
}

/// Doubles `N` from `n0` until `|W(2N) − W(N)| ≤ 1e-6 · max(1, |W|)` or `N` exceeds `cap`.
pub fn converge_quasi_static<B: Backend>(
    initial: &B::State,
    traj: &Trajectory,
    model: &B::Model,
    n0: usize,
    cap: usize,
) -> Result<Convergence<B::State>> {
    let mut n = n0.max(1);
    let mut rec = run_protocol::<B>(initial, traj, n, model)?;
    while n * 2 <= cap {
        let next = run_protocol::<B>(initial, traj, n * 2, model)?;
        let done = (next.work - rec.work).abs() <= 1e-6 * next.work.abs().max(1.0);
        n *= 2;
        rec = next;
        if done {
            return Ok(Convergence {
                record: rec,
                n,
                converged: true,
            });
        }
    }
    Ok(Convergence {
        record: rec,
        n,
        converged: false,
    })
}

/// Default cap on `N` for [`converge_quasi_static`].
pub const QUASI_STATIC_CAP: usize = 1 << 16;
