//! Work-extraction bounds and the protocols that saturate them.

use std::sync::Arc;

use super::{run_schedule, Backend, Dense, DenseModel, Fermion, ProtocolRecord, Schedule, Segment, Trajectory};
use crate::dense::{self, block_populations, DenseState};
use crate::error::{Error, Result};
use crate::fermion::{self, CorrelationMatrix, EquilibrationModel, QuadraticHamiltonian};
use crate::linalg::{cluster_degenerate, eigh, CMatrix, EigenSystem, HermitianMatrix, C64, DEFAULT_DEGENERACY_TOL};

/// Largest dense dimension accepted by the time-average construction.
pub const MAX_DENSE_DIM: usize = 4096;

/// `W* = E(γ₀, H₀) − Σ_k d↓_k ε↑_k` with `d` the spectrum of `γ₀`.
pub fn optimal_work_bound(gamma0: &CorrelationMatrix, h0: &QuadraticHamiltonian) -> Result<f64> {
    let e0 = fermion::energy(gamma0, h0)?;
    let mut d = gamma0.spectrum();
    d.reverse();
    let floor: f64 = d.iter().zip(h0.mode_energies()).map(|(p, e)| p * e).sum();
    Ok(e0 - floor)
}

/// Greedy maximum-overlap matching of state orbitals to Hamiltonian eigenvectors.
/// Returns, for each eigenvector `j`, the matched orbital index.
fn match_orbitals(h: &CMatrix, orbitals: &CMatrix) -> Vec<usize> {
    let n = h.ncols();
    let overlap = h.adjoint() * orbitals;
    let mut pairs: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|j| (0..n).map(move |k| (j, k)))
        .map(|(j, k)| (overlap[(j, k)].norm_sqr(), j, k))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut of_h = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (_, j, k) in pairs {
        if of_h[j] == usize::MAX && !used[k] {
            of_h[j] = k;
            used[k] = true;
        }
    }
    of_h
}

/// Column `j` of `v` multiplied by a phase making `⟨ref_j, v_j⟩` real and non-negative.
fn phase_align(v: &CMatrix, reference: &CMatrix) -> CMatrix {
    let mut out = v.clone();
    for j in 0..v.ncols() {
        let z: C64 = reference.column(j).dotc(&v.column(j));
        if z.norm() > 1e-300 {
            let ph = z.conj() / z.norm();
            for x in out.column_mut(j).iter_mut() {
                *x *= ph;
            }
        }
    }
    out
}

/// Samples `s = i/steps` for `i = 1..=steps`, replacing the last with `end`.
fn sample_segment(seg: &Segment, steps: usize, end: &HermitianMatrix) -> Vec<HermitianMatrix> {
    let mut out: Vec<HermitianMatrix> = (1..steps).map(|i| seg.sample(i as f64 / steps as f64)).collect();
    out.push(end.clone());
    out
}

/// Four phases: quench to the Hamiltonian diagonal in the state's orbitals,
/// `N/2` rotations back to `H₀`, quench to the reordered Hamiltonian, and
/// `N/2` rotations back again.
fn four_phase_schedule(h0: &HermitianMatrix, h0_es: &EigenSystem, state_es: &EigenSystem, n: usize) -> Result<Schedule> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("N must be even and at least 2, got {n}")));
    }
    let half = n / 2;
    let a = &h0_es.vectors;
    let eps = &h0_es.values;
    let dim = eps.len();
    let of_h = match_orbitals(a, &state_es.vectors);
    let x = CMatrix::from_fn(dim, dim, |i, j| state_es.vectors[(i, of_h[j])]);
    let x = phase_align(&x, a);
    let h1 = HermitianMatrix::from_spectrum(&x, eps);

    let mut hams = vec![h0.clone(), h1];
    let back = Segment::rotation(x, a, eps.clone())?;
    hams.extend(sample_segment(&back, half, h0));

    // Population carried by H₀ eigenvector j after the return.
    let pops: Vec<f64> = (0..dim).map(|j| state_es.values[of_h[j]]).collect();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| pops[j].total_cmp(&pops[i]));
    let xs = CMatrix::from_fn(dim, dim, |i, r| a[(i, order[r])]);
    hams.push(HermitianMatrix::from_spectrum(&xs, eps));
    let back = Segment::rotation(xs, a, eps.clone())?;
    hams.extend(sample_segment(&back, half, h0));
    Schedule::from_hamiltonians(hams)
}

/// Schedule of N + 2 quenches for the optimal fermionic protocol.
pub fn optimal_gge_schedule(gamma0: &CorrelationMatrix, h0: &QuadraticHamiltonian, n: usize) -> Result<Schedule> {
    if gamma0.dim() != h0.dim() {
        return Err(Error::DimensionMismatch {
            expected: h0.dim(),
            found: gamma0.dim(),
        });
    }
    four_phase_schedule(h0.coefficients(), h0.eigensystem(), &gamma0.natural_orbitals(), n)
}

/// Optimal protocol under mode-number dephasing; extracts `optimal_work_bound` as `N → ∞`.
pub fn optimal_gge_protocol(
    gamma0: &CorrelationMatrix,
    h0: &QuadraticHamiltonian,
    n: usize,
) -> Result<ProtocolRecord<CorrelationMatrix>> {
    let sched = optimal_gge_schedule(gamma0, h0, n)?;
    run_schedule::<Fermion>(gamma0, &sched, &EquilibrationModel::TimeAverageGGE)
}

pub fn optimal_ta_schedule(rho0: &DenseState, h0: &HermitianMatrix, n: usize) -> Result<Schedule> {
    if rho0.dim() != h0.dim() {
        return Err(Error::DimensionMismatch {
            expected: h0.dim(),
            found: rho0.dim(),
        });
    }
    if h0.dim() > MAX_DENSE_DIM {
        return Err(Error::TooLarge {
            modes: h0.dim(),
            limit: MAX_DENSE_DIM,
        });
    }
    four_phase_schedule(h0, &eigh(h0), &eigh(rho0.rho()), n)
}

/// Optimal protocol under time averaging; the final state tends to the passive rearrangement.
pub fn optimal_ta_protocol(rho0: &DenseState, h0: &HermitianMatrix, n: usize) -> Result<ProtocolRecord<DenseState>> {
    let sched = optimal_ta_schedule(rho0, h0, n)?;
    run_schedule::<Dense>(rho0, &sched, &DenseModel::time_average())
}

fn gibbs_weights(levels: &[f64], beta: f64) -> Vec<f64> {
    let shift = levels.iter().map(|&e| -beta * e).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = levels.iter().map(|&e| (-beta * e - shift).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

fn gibbs_entropy(levels: &[f64], beta: f64) -> f64 {
    gibbs_weights(levels, beta)
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

/// `β* ≥ 0` with `S(exp(−β* H)/Z) = s_target`, if one exists.
pub fn entropy_matched_beta(levels: &[f64], s_target: f64) -> Option<f64> {
    let d = levels.len();
    if d == 0 {
        return None;
    }
    let s_max = (d as f64).ln();
    let ground = cluster_degenerate(levels, DEFAULT_DEGENERACY_TOL).groups[0].len();
    let s_min = (ground as f64).ln();
    if s_target > s_max + 1e-12 || s_target <= s_min + 1e-14 {
        return None;
    }
    if s_target >= s_max {
        return Some(0.0);
    }
    let mut hi = 1.0;
    while gibbs_entropy(levels, hi) > s_target {
        hi *= 2.0;
        if hi > 1e15 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gibbs_entropy(levels, mid) > s_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Outcome of the Gibbs-model optimal protocol.
#[derive(Debug, Clone)]
pub struct GibbsProtocol {
    pub record: ProtocolRecord<DenseState>,
    /// Entropy-matched inverse temperature of `H₀`, when it exists.
    pub beta_star: Option<f64>,
    /// `Tr(ρ₀H₀) − Tr(Gibbs(β*) H₀)`, the `N → ∞` limit of the work.
    pub work_limit: Option<f64>,
}

/// Sorted eigenvalues of `from` move linearly to those of `to` in the
/// eigenbasis of `from`, then the eigenvectors rotate onto those of `to`.
/// No level crossings occur and the spectral spread never closes.
fn sorted_return(from: &HermitianMatrix, to: &HermitianMatrix) -> Result<Trajectory> {
    let es1 = eigh(from);
    let es0 = eigh(to);
    let target = phase_align(&es0.vectors, &es1.vectors);
    let seg1 = Segment::spectral(es1.vectors.clone(), es1.values.clone(), es0.values.clone())?;
    let seg2 = Segment::rotation(es1.vectors, &target, es0.values)?;
    Trajectory::uniform(vec![seg1, seg2])
}

/// `H₀`, `k ln ρ₀`, then `N` steps back to `H₀` along sorted spectra.
pub fn optimal_gibbs_schedule(rho0: &DenseState, h0: &HermitianMatrix, k: f64, n: usize) -> Result<Schedule> {
    if !(k < 0.0) {
        return Err(Error::InvalidArgument(format!("k must be negative, got {k}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if rho0.dim() != h0.dim() {
        return Err(Error::DimensionMismatch {
            expected: h0.dim(),
            found: rho0.dim(),
        });
    }
    let es = eigh(rho0.rho());
    if let Some(&p) = es.values.first() {
        if p < 1e-14 {
            return Err(Error::InvalidState(format!(
                "initial state is singular (smallest eigenvalue {p:.3e}); k ln ρ₀ is undefined"
            )));
        }
    }
    let logs: Vec<f64> = es.values.iter().map(|p| k * p.ln()).collect();
    let h1 = HermitianMatrix::from_spectrum(&es.vectors, &logs);
    let back = sorted_return(&h1, h0)?;
    let mut hams = vec![h0.clone(), h1];
    hams.extend((1..n).map(|i| back.sample(i as f64 / n as f64)));
    hams.push(h0.clone());
    Schedule::from_hamiltonians(hams)
}

/// Quench to `k ln ρ₀` (`k < 0`), so that the first Gibbs equilibration
/// leaves `ρ₀` invariant at `β = −1/k`, then return quasi-statically.
pub fn optimal_gibbs_protocol(rho0: &DenseState, h0: &HermitianMatrix, k: f64, n: usize) -> Result<GibbsProtocol> {
    let sched = optimal_gibbs_schedule(rho0, h0, k, n)?;
    let record = run_schedule::<Dense>(rho0, &sched, &DenseModel::Gibbs)?;
    let levels = eigh(h0).values;
    let beta_star = entropy_matched_beta(&levels, dense::vn_entropy(rho0));
    let work_limit = beta_star.map(|b| {
        let e_star: f64 = levels.iter().zip(gibbs_weights(&levels, b)).map(|(e, p)| e * p).sum();
        rho0.expectation(h0) - e_star
    });
    Ok(GibbsProtocol {
        record,
        beta_star,
        work_limit,
    })
}

/// Candidate Hamiltonians for a restricted first quench.
#[derive(Clone)]
pub enum HamiltonianFamily {
    Set(Vec<HermitianMatrix>),
    /// `build(x)` for `x ∈ [lo, hi]`, scanned on `grid + 1` points, then refined.
    Interval {
        build: Arc<dyn Fn(f64) -> HermitianMatrix + Send + Sync>,
        lo: f64,
        hi: f64,
        grid: usize,
    },
}

impl std::fmt::Debug for HamiltonianFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HamiltonianFamily::Set(v) => write!(f, "Set({} Hamiltonians)", v.len()),
            HamiltonianFamily::Interval { lo, hi, grid, .. } => {
                write!(f, "Interval {{ lo: {lo}, hi: {hi}, grid: {grid} }}")
            }
        }
    }
}

/// Minimiser of the post-Gibbs-equilibration entropy over a family.
#[derive(Debug, Clone)]
pub struct FirstQuenchChoice {
    pub hamiltonian: HermitianMatrix,
    /// Member index for [`HamiltonianFamily::Set`].
    pub index: Option<usize>,
    /// Parameter value for [`HamiltonianFamily::Interval`].
    pub parameter: Option<f64>,
    pub entropy: f64,
}

/// Chooses `argmin_H S(Ω_Gibbs(ρ₀, H))` over the family. Members for which
/// the Gibbs map is undefined are skipped.
pub fn restricted_first_quench<B: Backend>(state: &B::State, family: &HamiltonianFamily) -> Result<FirstQuenchChoice> {
    let objective = |h: &HermitianMatrix| -> f64 {
        let prepared = B::prepare(h);
        B::equilibrate(state, &prepared, &B::gibbs_model())
            .and_then(|(w, _)| B::entropy(&w))
            .unwrap_or(f64::INFINITY)
    };
    match family {
        HamiltonianFamily::Set(members) => {
            let (mut best, mut best_s) = (None, f64::INFINITY);
            for (i, h) in members.iter().enumerate() {
                let s = objective(h);
                if s < best_s {
                    best = Some(i);
                    best_s = s;
                }
            }
            let i = best.ok_or_else(|| Error::InvalidArgument("no admissible Hamiltonian in the family".into()))?;
            Ok(FirstQuenchChoice {
                hamiltonian: members[i].clone(),
                index: Some(i),
                parameter: None,
                entropy: best_s,
            })
        }
        HamiltonianFamily::Interval { build, lo, hi, grid } => {
            if !(hi >= lo) || *grid == 0 {
                return Err(Error::InvalidArgument("empty parameter interval".into()));
            }
            let f = |x: f64| objective(&build(x));
            let xs: Vec<f64> = (0..=*grid).map(|i| lo + (hi - lo) * i as f64 / *grid as f64).collect();
            let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
            let (i, &v) = vals
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .unwrap();
            if !v.is_finite() {
                return Err(Error::InvalidArgument("no admissible Hamiltonian in the family".into()));
            }
            let (mut a, mut b) = (xs[i.saturating_sub(1)], xs[(i + 1).min(*grid)]);
            let r = (5f64.sqrt() - 1.0) / 2.0;
            let mut c = b - r * (b - a);
            let mut d = a + r * (b - a);
            let (mut fc, mut fd) = (f(c), f(d));
            for _ in 0..200 {
                if (b - a).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs())) {
                    break;
                }
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - r * (b - a);
                    fc = f(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + r * (b - a);
                    fd = f(d);
                }
            }
            let xm = 0.5 * (a + b);
            let fm = f(xm);
            let (x, s) = if fm < v { (xm, fm) } else { (xs[i], v) };
            Ok(FirstQuenchChoice {
                hamiltonian: build(x),
                index: None,
                parameter: Some(x),
                entropy: s,
            })
        }
    }
}

/// Two-segment path from `H₀` to `H₁`: the eigenvalues move first, in the
/// eigenbasis of `H₀`, to the spectrum of `H₁` assigned so that the state is
/// passive; then the eigenvectors rotate to those of `H₁`.
///
/// Populations are read from the time average of `rho0` under `H₀`.
pub fn passive_trajectory(rho0: &DenseState, h0: &HermitianMatrix, h1: &HermitianMatrix) -> Result<Trajectory> {
    if rho0.dim() != h0.dim() || h1.dim() != h0.dim() {
        return Err(Error::DimensionMismatch {
            expected: h0.dim(),
            found: if rho0.dim() != h0.dim() { rho0.dim() } else { h1.dim() },
        });
    }
    let d = h0.dim();
    let es0 = eigh(h0);
    let part = cluster_degenerate(&es0.values, DEFAULT_DEGENERACY_TOL);
    let ta = dense::ta_state(rho0, h0, DEFAULT_DEGENERACY_TOL)?;
    let blocks = block_populations(&ta, &es0, &part.groups);
    let mut cols: Vec<(f64, f64, Vec<C64>)> = Vec::with_capacity(d);
    for (g, (pops, vecs)) in part.groups.iter().zip(&blocks) {
        let energy = g.iter().map(|&i| es0.values[i]).sum::<f64>() / g.len() as f64;
        for (j, &p) in pops.iter().enumerate() {
            cols.push((p, energy, vecs.column(j).iter().copied().collect()));
        }
    }
    // Stable: equal populations keep ascending energy order.
    cols.sort_by(|a, b| b.0.total_cmp(&a.0));
    let basis = CMatrix::from_fn(d, d, |i, j| cols[j].2[i]);
    let from: Vec<f64> = cols.iter().map(|c| c.1).collect();
    let es1 = eigh(h1);
    let target = phase_align(&es1.vectors, &basis);
    let seg1 = Segment::spectral(basis.clone(), from, es1.values.clone())?;
    let seg2 = Segment::rotation(basis, &target, es1.values.clone())?;
    Trajectory::uniform(vec![seg1, seg2])
}
