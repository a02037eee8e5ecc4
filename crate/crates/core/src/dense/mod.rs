//! Exact density-matrix back end.
//!
//! Implements the three equilibration maps on `d × d` states, the
//! maximum-entropy dual solver for arbitrary conserved quantities, and
//! passivity tests. The [`fock`] submodule embeds fermionic Gaussian states
//! into their `2ⁿ`-dimensional Fock space for cross-checks.

pub mod fock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{
    cluster_degenerate, eigh, max_asymmetry, CMatrix, EigenSystem, HermitianMatrix,
    DEFAULT_DEGENERACY_TOL, C64,
};
use crate::roots::{solve_decreasing, BetaSolution};

/// Validation threshold for states: Hermiticity, positivity and trace.
pub const STATE_TOL: f64 = 1e-10;
/// `‖(β, λ)‖_∞` beyond which the dual solver gives up.
pub const DUAL_BOUND: f64 = 1e4;
/// Gradient tolerance of the dual solver.
pub const DUAL_GRAD_TOL: f64 = 1e-10;
/// A max-entropy state with an eigenvalue below this is treated as a boundary point.
pub const BOUNDARY_TOL: f64 = 1e-10;
const DUAL_MAX_ITER: usize = 200;

/// A density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    rho: HermitianMatrix,
}

impl DenseState {
    /// Validates Hermiticity, positivity and unit trace at [`STATE_TOL`].
    pub fn new(rho: CMatrix) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(Error::DimensionMismatch {
                expected: rho.nrows(),
                found: rho.ncols(),
            });
        }
        let asym = max_asymmetry(&rho);
        if asym > STATE_TOL {
            return Err(Error::NotHermitian { max_asymmetry: asym });
        }
        let h = HermitianMatrix::hermitian_part(&rho);
        let tr = h.trace();
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let es = eigh(&h);
        if let Some(&p) = es.values.first() {
            if p < -STATE_TOL {
                return Err(Error::InvalidState(format!("negative eigenvalue {p}")));
            }
        }
        Ok(Self { rho: h })
    }

    pub(crate) fn from_hermitian_unchecked(rho: HermitianMatrix) -> Self {
        Self { rho }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            rho: HermitianMatrix::identity(d).scale(1.0 / d as f64),
        }
    }

    /// `|ψ⟩⟨ψ|` for a normalised `ψ`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("state vector has norm² {norm}")));
        }
        let v = DVector::from_column_slice(psi);
        Ok(Self {
            rho: HermitianMatrix::hermitian_part(&(&v * v.adjoint())),
        })
    }

    /// `Σ_k p_k |v_k⟩⟨v_k|` for an orthonormal basis `v` and probabilities `p`.
    pub fn from_spectrum(basis: &CMatrix, probs: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_spectrum(basis, probs).into_matrix())
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_diagonal(probs).into_matrix())
    }

    pub fn rho(&self) -> &HermitianMatrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// `Tr(ρ O)`.
    pub fn expectation(&self, o: &HermitianMatrix) -> f64 {
        self.rho.trace_product(o)
    }

    /// Ascending eigenvalues of `ρ`, clamped at zero.
    pub fn spectrum(&self) -> Vec<f64> {
        eigh(&self.rho).values.into_iter().map(|p| p.max(0.0)).collect()
    }

    /// Smallest eigenvalue above `tol`.
    pub fn is_full_rank(&self, tol: f64) -> bool {
        self.spectrum().first().is_none_or(|&p| p > tol)
    }
}

/// Conserved observables `Q_j` with their target expectation values.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedSet {
    pub observables: Vec<HermitianMatrix>,
    pub targets: Vec<f64>,
}

impl ConservedSet {
    pub fn new(observables: Vec<HermitianMatrix>, targets: Vec<f64>) -> Result<Self> {
        if observables.len() != targets.len() {
            return Err(Error::LengthMismatch {
                expected: observables.len(),
                found: targets.len(),
            });
        }
        if let Some(d) = observables.first().map(|q| q.dim()) {
            if let Some(q) = observables.iter().find(|q| q.dim() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: q.dim(),
                });
            }
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("non-finite conserved target".into()));
        }
        Ok(Self { observables, targets })
    }

    pub fn empty() -> Self {
        Self {
            observables: Vec::new(),
            targets: Vec::new(),
        }
    }

    /// Observables with targets read off from `rho`.
    pub fn measured(observables: Vec<HermitianMatrix>, rho: &DenseState) -> Result<Self> {
        if let Some(q) = observables.iter().find(|q| q.dim() != rho.dim()) {
            return Err(Error::DimensionMismatch {
                expected: rho.dim(),
                found: q.dim(),
            });
        }
        let targets = observables.iter().map(|q| rho.expectation(q)).collect();
        Self::new(observables, targets)
    }

    /// Eigenprojectors of `h`, one per degeneracy group at `tol`.
    pub fn spectral_projectors(h: &HermitianMatrix, tol: f64) -> Vec<HermitianMatrix> {
        let es = eigh(h);
        cluster_degenerate(&es.values, tol)
            .groups
            .iter()
            .map(|g| group_projector(&es, g))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }
}

fn group_projector(es: &EigenSystem, group: &[usize]) -> HermitianMatrix {
    let n = es.dim();
    let sub = CMatrix::from_fn(n, group.len(), |i, j| es.vectors[(i, group[j])]);
    HermitianMatrix::hermitian_part(&(&sub * sub.adjoint()))
}

/// Lagrange multipliers of `exp(−βH + Σ λ_j Q_j) / Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPoint {
    pub beta: f64,
    pub lambdas: Vec<f64>,
}

fn check_dim(rho: &DenseState, h: &HermitianMatrix) -> Result<()> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: rho.dim(),
        });
    }
    Ok(())
}

/// `Σ_k P_k ρ P_k` over the degeneracy projectors of `h` at `tol`.
pub fn ta_state(rho: &DenseState, h: &HermitianMatrix, tol: f64) -> Result<DenseState> {
    check_dim(rho, h)?;
    let es = eigh(h);
    let part = cluster_degenerate(&es.values, tol);
    let v = &es.vectors;
    let mut in_basis = v.adjoint() * rho.rho.matrix() * v;
    let n = h.dim();
    let mut label = vec![0usize; n];
    for (g, group) in part.groups.iter().enumerate() {
        for &i in group {
            label[i] = g;
        }
    }
    for i in 0..n {
        for j in 0..n {
            if label[i] != label[j] {
                in_basis[(i, j)] = C64::new(0.0, 0.0);
            }
        }
    }
    Ok(DenseState {
        rho: HermitianMatrix::hermitian_part(&(v * in_basis * v.adjoint())),
    })
}

fn log_softmax_weights(values: &[f64], scale: f64) -> Vec<f64> {
    let max = values
        .iter()
        .map(|&e| scale * e)
        .fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = values.iter().map(|&e| (scale * e - max).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// `exp(−βH)/Z` for the given spectrum.
fn gibbs_from_eigensystem(es: &EigenSystem, beta: f64) -> DenseState {
    let w = log_softmax_weights(&es.values, -beta);
    DenseState {
        rho: HermitianMatrix::from_spectrum(&es.vectors, &w),
    }
}

/// Inverse temperature for which the Gibbs state of spectrum `levels` has energy `target`.
pub fn solve_beta_dense(levels: &[f64], target: f64) -> Result<BetaSolution> {
    let (lower, upper) = (
        levels.iter().copied().fold(f64::INFINITY, f64::min),
        levels.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let tol = 1e-10 * target.abs().max(1.0);
    if upper - lower <= DEFAULT_DEGENERACY_TOL {
        if (target - lower).abs() <= tol.max(upper - lower) {
            return Ok(BetaSolution {
                beta: 0.0,
                negative_temperature: false,
            });
        }
        return Err(Error::EnergyOutOfRange { target, lower, upper });
    }
    if !(target > lower && target < upper) {
        return Err(Error::EnergyOutOfRange { target, lower, upper });
    }
    let mean = |b: f64| {
        let w = log_softmax_weights(levels, -b);
        levels.iter().zip(&w).map(|(e, p)| e * p).sum::<f64>()
    };
    let deriv = |b: f64| {
        let w = log_softmax_weights(levels, -b);
        let m: f64 = levels.iter().zip(&w).map(|(e, p)| e * p).sum();
        -levels
            .iter()
            .zip(&w)
            .map(|(e, p)| p * (e - m) * (e - m))
            .sum::<f64>()
    };
    solve_decreasing(mean, deriv, target)
}

/// Gibbs state of `h` at the energy of `rho`.
pub fn gibbs_state_dense(rho: &DenseState, h: &HermitianMatrix) -> Result<(DenseState, BetaSolution)> {
    check_dim(rho, h)?;
    let es = eigh(h);
    let sol = solve_beta_dense(&es.values, rho.expectation(h))?;
    Ok((gibbs_from_eigensystem(&es, sol.beta), sol))
}

struct DualEval {
    phi: f64,
    grad: Vec<f64>,
    hess: DMatrix<f64>,
    state: HermitianMatrix,
}

/// Evaluates `φ(x) = ln Tr exp(Σ x_i O_i) − Σ x_i t_i` with its gradient and
/// the exact (Kubo–Mori) Hessian.
fn dual_eval(obs: &[&HermitianMatrix], targets: &[f64], x: &[f64], with_hessian: bool) -> DualEval {
    let d = obs[0].dim();
    let mut k = CMatrix::zeros(d, d);
    for (o, &xi) in obs.iter().zip(x) {
        k += o.matrix() * C64::new(xi, 0.0);
    }
    let es = eigh(&HermitianMatrix::hermitian_part(&k));
    let kmax = es.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = es.values.iter().map(|&e| (e - kmax).exp()).sum();
    let p: Vec<f64> = es.values.iter().map(|&e| (e - kmax).exp() / z).collect();
    let phi = kmax + z.ln() - x.iter().zip(targets).map(|(a, b)| a * b).sum::<f64>();
    let state = HermitianMatrix::from_spectrum(&es.vectors, &p);

    let v = &es.vectors;
    let rotated: Vec<CMatrix> = obs.iter().map(|o| v.adjoint() * o.matrix() * v).collect();
    let means: Vec<f64> = rotated
        .iter()
        .map(|r| (0..d).map(|a| p[a] * r[(a, a)].re).sum())
        .collect();
    let grad: Vec<f64> = means.iter().zip(targets).map(|(m, t)| m - t).collect();

    let q = obs.len();
    let mut hess = DMatrix::<f64>::zeros(q, q);
    if with_hessian {
        // Divided differences of exp over the spectrum of K.
        let mut w = DMatrix::<f64>::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                let gap = es.values[a] - es.values[b];
                w[(a, b)] = if gap.abs() < 1e-12 {
                    0.5 * (p[a] + p[b])
                } else {
                    p[b] * gap.exp_m1() / gap
                };
            }
        }
        for i in 0..q {
            for j in i..q {
                let mut acc = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        acc += w[(a, b)] * (rotated[i][(a, b)] * rotated[j][(b, a)]).re;
                    }
                }
                let h = acc - means[i] * means[j];
                hess[(i, j)] = h;
                hess[(j, i)] = h;
            }
        }
    }
    DualEval {
        phi,
        grad,
        hess,
        state,
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Maximum-entropy state `exp(−βH + Σ λ_j Q_j)/Z` reproducing the energy of
/// `rho` and the targets stored in `q`.
///
/// Damped Newton on the convex dual, initialised at the Gibbs β with `λ = 0`.
/// An empty set reduces to [`gibbs_state_dense`]. Targets whose max-entropy
/// state has an eigenvalue below [`BOUNDARY_TOL`] are rejected as boundary points.
pub fn gge_state_dense(
    rho: &DenseState,
    h: &HermitianMatrix,
    q: &ConservedSet,
) -> Result<(DenseState, DualPoint)> {
    check_dim(rho, h)?;
    if let Some(o) = q.observables.iter().find(|o| o.dim() != h.dim()) {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: o.dim(),
        });
    }
    if q.is_empty() {
        let (state, sol) = gibbs_state_dense(rho, h)?;
        let dual = DualPoint {
            beta: sol.beta,
            lambdas: Vec::new(),
        };
        return Ok((state, dual));
    }
    let e_target = rho.expectation(h);
    let neg_h = h.scale(-1.0);
    let mut obs: Vec<&HermitianMatrix> = vec![&neg_h];
    obs.extend(q.observables.iter());
    let mut targets = vec![-e_target];
    targets.extend(q.targets.iter().copied());

    let es_h = eigh(h);
    let beta0 = solve_beta_dense(&es_h.values, e_target)
        .map(|s| s.beta)
        .unwrap_or(0.0);
    let mut x = vec![0.0; obs.len()];
    x[0] = beta0;

    let mut cur = dual_eval(&obs, &targets, &x, true);
    for _ in 0..DUAL_MAX_ITER {
        let gnorm = inf_norm(&cur.grad);
        if gnorm <= DUAL_GRAD_TOL {
            let min_eig = eigh(&cur.state).values[0];
            if min_eig < BOUNDARY_TOL {
                return Err(Error::BoundaryTarget {
                    min_eigenvalue: min_eig,
                    residual: gnorm,
                });
            }
            let dual = DualPoint {
                beta: x[0],
                lambdas: x[1..].to_vec(),
            };
            return Ok((DenseState::from_hermitian_unchecked(cur.state), dual));
        }
        let step = newton_direction(&cur.hess, &cur.grad);
        let slope: f64 = step.iter().zip(&cur.grad).map(|(a, b)| a * b).sum();
        let (dir, slope) = if slope < 0.0 {
            (step, slope)
        } else {
            let g: Vec<f64> = cur.grad.iter().map(|v| -v).collect();
            let s = -g.iter().map(|v| v * v).sum::<f64>();
            (g, s)
        };
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
            let ev = dual_eval(&obs, &targets, &cand, false);
            if ev.phi <= cur.phi + 1e-4 * t * slope || inf_norm(&ev.grad) < 0.5 * gnorm {
                accepted = Some(cand);
                break;
            }
            t *= 0.5;
        }
        let Some(next) = accepted else {
            return Err(Error::DualNotConverged {
                iterations: DUAL_MAX_ITER,
                residual: gnorm,
            });
        };
        x = next;
        let norm = inf_norm(&x);
        if norm > DUAL_BOUND {
            return Err(Error::DualDivergence {
                norm,
                bound: DUAL_BOUND,
            });
        }
        cur = dual_eval(&obs, &targets, &x, true);
    }
    Err(Error::DualNotConverged {
        iterations: DUAL_MAX_ITER,
        residual: inf_norm(&cur.grad),
    })
}

/// `−H⁺ g` with the pseudo-inverse dropping directions below `1e-12 · max eig`.
fn newton_direction(hess: &DMatrix<f64>, grad: &[f64]) -> Vec<f64> {
    let se = SymmetricEigen::new(hess.clone());
    let top = se.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = 1e-12 * top.max(1e-300);
    let g = DVector::from_column_slice(grad);
    let mut out = DVector::<f64>::zeros(grad.len());
    for k in 0..grad.len() {
        let lam = se.eigenvalues[k];
        if lam > cut {
            let u = se.eigenvectors.column(k);
            out -= u * (u.dot(&g) / lam);
        }
    }
    out.iter().copied().collect()
}

/// `−Tr(ρ ln ρ)` in nats.
pub fn vn_entropy(rho: &DenseState) -> f64 {
    rho.spectrum()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// `S(GGE) − S(TA)`.
pub fn kl_gap(rho: &DenseState, h: &HermitianMatrix, q: &ConservedSet, tol: f64) -> Result<f64> {
    let (gge, _) = gge_state_dense(rho, h, q)?;
    let ta = ta_state(rho, h, tol)?;
    Ok(vn_entropy(&gge) - vn_entropy(&ta))
}

/// Spectra of `ρ` restricted to each degeneracy group of `h`, descending.
pub(crate) fn block_populations(rho: &DenseState, es: &EigenSystem, groups: &[Vec<usize>]) -> Vec<(Vec<f64>, CMatrix)> {
    let n = es.dim();
    groups
        .iter()
        .map(|g| {
            let sub = CMatrix::from_fn(n, g.len(), |i, j| es.vectors[(i, g[j])]);
            let r = HermitianMatrix::hermitian_part(&(sub.adjoint() * rho.rho.matrix() * &sub));
            let inner = eigh(&r);
            let mut vals = inner.values.clone();
            let mut vecs = &sub * &inner.vectors;
            vals.reverse();
            let m = vals.len();
            let flipped = CMatrix::from_fn(n, m, |i, j| vecs[(i, m - 1 - j)]);
            vecs = flipped;
            (vals, vecs)
        })
        .collect()
}

/// True iff `ρ` commutes with `h` within `tol` and populations do not
/// increase with energy (ties unconstrained).
pub fn is_passive(rho: &DenseState, h: &HermitianMatrix, tol: f64) -> bool {
    if rho.dim() != h.dim() {
        return false;
    }
    let r = rho.rho.matrix();
    let comm = r * h.matrix() - h.matrix() * r;
    if comm.norm() > tol {
        return false;
    }
    let es = eigh(h);
    let part = cluster_degenerate(&es.values, DEFAULT_DEGENERACY_TOL);
    let blocks = block_populations(rho, &es, &part.groups);
    blocks.windows(2).all(|w| {
        let low_min = w[0].0.iter().copied().fold(f64::INFINITY, f64::min);
        let high_max = w[1].0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        low_min >= high_max - tol
    })
}

/// `Σ_k r↓_k |e_k⟩⟨e_k|`: the spectrum of `ρ` placed in non-increasing order
/// on the ascending energy eigenbasis of `h`.
pub fn passive_rearrangement(rho: &DenseState, h: &HermitianMatrix) -> Result<DenseState> {
    check_dim(rho, h)?;
    let es = eigh(h);
    let part = cluster_degenerate(&es.values, DEFAULT_DEGENERACY_TOL);
    let blocks = block_populations(rho, &es, &part.groups);
    let n = h.dim();
    let mut basis = CMatrix::zeros(n, n);
    let mut col = 0;
    for (_, vecs) in &blocks {
        for j in 0..vecs.ncols() {
            basis.set_column(col, &vecs.column(j));
            col += 1;
        }
    }
    let mut r = rho.spectrum();
    // Stable sort: equal populations keep their order.
    r.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(DenseState {
        rho: HermitianMatrix::from_spectrum(&basis, &r),
    })
}

/// Size of the lowest degeneracy group of `h`.
pub fn ground_degeneracy(h: &HermitianMatrix, tol: f64) -> usize {
    let es = eigh(h);
    cluster_degenerate(&es.values, tol)
        .groups
        .first()
        .map_or(0, |g| g.len())
}
