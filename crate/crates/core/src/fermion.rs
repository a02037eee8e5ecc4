//! Quadratic fermionic Hamiltonians and Gaussian states.
//!
//! A Hamiltonian `H = Σ_ij c_ij a_i† a_j` is stored through its coefficient
//! matrix `c = A D A†`; normal modes are `η_k = Σ_j A*_jk a_j`. States are
//! described by the correlation matrix `γ_ij = ⟨a_i† a_j⟩`, with mode-basis
//! form `γ_η = Aᵀ γ A*`. Everything here costs `O(n³)` at most.

use crate::error::{Error, Result};
use crate::linalg::{eigh, CMatrix, EigenSystem, HermitianMatrix, C64};

/// Slack on the `[0, 1]` spectrum of a correlation matrix.
pub const SPECTRUM_TOL: f64 = 1e-10;
/// Eigenvalues of `γ` beyond this distance outside `[0, 1]` make the entropy undefined.
pub const ENTROPY_REJECT_TOL: f64 = 1e-6;

/// `H = Σ_ij c_ij a_i† a_j` together with the eigensystem of `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    c: HermitianMatrix,
    eig: EigenSystem,
}

impl QuadraticHamiltonian {
    pub fn new(c: HermitianMatrix) -> Self {
        let eig = eigh(&c);
        Self { c, eig }
    }

    pub fn coefficients(&self) -> &HermitianMatrix {
        &self.c
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        &self.eig
    }

    /// Single-particle energies `ε_k`, ascending.
    pub fn mode_energies(&self) -> &[f64] {
        &self.eig.values
    }

    /// Columns are the mode orbitals `A_{·k}`.
    pub fn modes(&self) -> &CMatrix {
        &self.eig.vectors
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }

    /// Copy with the on-site energy of `site` replaced.
    pub fn with_site_energy(&self, site: usize, value: f64) -> Self {
        let mut m = self.c.matrix().clone();
        m[(site, site)] = C64::new(value, 0.0);
        Self::new(HermitianMatrix::hermitian_part(&m))
    }

    /// `Σ_k ε_k`, the energy of the completely filled band.
    pub fn full_band_energy(&self) -> f64 {
        self.eig.values.iter().sum()
    }
}

/// Nearest-neighbour chain `Σ ε_i a_i†a_i + g Σ (a_i†a_{i+1} + h.c.)`.
pub fn build_chain(n: usize, eps: &[f64], g: f64) -> Result<QuadraticHamiltonian> {
    if n == 0 {
        return Err(Error::InvalidArgument("chain needs at least one site".into()));
    }
    if eps.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: eps.len(),
        });
    }
    let m = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(eps[i], 0.0)
        } else if i.abs_diff(j) == 1 {
            C64::new(g, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(QuadraticHamiltonian::new(HermitianMatrix::hermitian_part(&m)))
}

/// Correlation matrix `γ_ij = ⟨a_i† a_j⟩` of a fermionic state.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    gamma: HermitianMatrix,
}

impl CorrelationMatrix {
    /// Validates that the spectrum lies in `[−1e-10, 1 + 1e-10]`.
    pub fn new(gamma: HermitianMatrix) -> Result<Self> {
        let es = eigh(&gamma);
        if let Some(bad) = es
            .values
            .iter()
            .find(|&&d| !(-SPECTRUM_TOL..=1.0 + SPECTRUM_TOL).contains(&d))
        {
            return Err(Error::InvalidState(format!(
                "correlation matrix eigenvalue {bad} outside [0, 1]"
            )));
        }
        Ok(Self { gamma })
    }

    pub(crate) fn from_hermitian_unchecked(gamma: HermitianMatrix) -> Self {
        Self { gamma }
    }

    pub fn vacuum(n: usize) -> Self {
        Self {
            gamma: HermitianMatrix::zeros(n),
        }
    }

    /// Diagonal `γ` with the given site occupations.
    pub fn from_site_occupations(occ: &[f64]) -> Result<Self> {
        check_occupations(occ)?;
        Ok(Self {
            gamma: HermitianMatrix::from_diagonal(occ),
        })
    }

    /// State diagonal in the mode basis of `h` with populations `p_k`.
    pub fn from_mode_populations(h: &QuadraticHamiltonian, p: &[f64]) -> Result<Self> {
        if p.len() != h.dim() {
            return Err(Error::LengthMismatch {
                expected: h.dim(),
                found: p.len(),
            });
        }
        check_occupations(p)?;
        let eta = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            p.len(),
            p.iter().map(|&x| C64::new(x, 0.0)),
        ));
        Ok(Self::from_mode_basis(h, &eta))
    }

    /// `γ = A* γ_η Aᵀ`.
    pub fn from_mode_basis(h: &QuadraticHamiltonian, gamma_eta: &CMatrix) -> Self {
        let a = h.modes();
        let m = a.conjugate() * gamma_eta * a.transpose();
        Self {
            gamma: HermitianMatrix::hermitian_part(&m),
        }
    }

    /// Block-diagonal composition `γ_self ⊕ γ_other` (uncorrelated subsystems).
    pub fn direct_sum(&self, other: &CorrelationMatrix) -> Self {
        let (n1, n2) = (self.dim(), other.dim());
        let n = n1 + n2;
        let m = CMatrix::from_fn(n, n, |i, j| match (i < n1, j < n1) {
            (true, true) => self.gamma.get(i, j),
            (false, false) => other.gamma.get(i - n1, j - n1),
            _ => C64::new(0.0, 0.0),
        });
        Self {
            gamma: HermitianMatrix::hermitian_part(&m),
        }
    }

    pub fn gamma(&self) -> &HermitianMatrix {
        &self.gamma
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    pub fn site_occupation(&self, site: usize) -> f64 {
        self.gamma.get(site, site).re
    }

    /// Ascending eigenvalues `d_k` of `γ`.
    pub fn spectrum(&self) -> Vec<f64> {
        eigh(&self.gamma).values
    }

    /// `γ_η = Aᵀ γ A*` in the mode basis of `h`.
    pub fn to_mode_basis(&self, h: &QuadraticHamiltonian) -> Result<CMatrix> {
        check_dims(self, h)?;
        let a = h.modes();
        Ok(a.transpose() * self.gamma.matrix() * a.conjugate())
    }

    /// Mode populations `p_k = ⟨η_k† η_k⟩` for the modes of `h`, `O(n²)` per mode.
    pub fn mode_populations(&self, h: &QuadraticHamiltonian) -> Result<Vec<f64>> {
        check_dims(self, h)?;
        let a = h.modes();
        let g = self.gamma.matrix();
        let n = self.dim();
        Ok((0..n)
            .map(|k| {
                // p_k = Σ_ij A_ik γ_ij A*_jk
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..n {
                    let mut row = C64::new(0.0, 0.0);
                    for j in 0..n {
                        row += g[(i, j)] * a[(j, k)].conj();
                    }
                    acc += a[(i, k)] * row;
                }
                acc.re
            })
            .collect())
    }

    /// Natural orbitals: eigenvectors `φ_k` of `γ*` with occupations `d_k`
    /// (ascending), such that `b_k† = Σ_i φ_k(i) a_i†` has `⟨b_k† b_l⟩ = d_k δ_kl`.
    pub fn natural_orbitals(&self) -> EigenSystem {
        let conj = HermitianMatrix::hermitian_part(&self.gamma.matrix().conjugate());
        eigh(&conj)
    }
}

fn check_occupations(occ: &[f64]) -> Result<()> {
    if let Some(bad) = occ
        .iter()
        .find(|&&x| !(-SPECTRUM_TOL..=1.0 + SPECTRUM_TOL).contains(&x))
    {
        return Err(Error::InvalidState(format!("occupation {bad} outside [0, 1]")));
    }
    Ok(())
}

fn check_dims(gamma: &CorrelationMatrix, h: &QuadraticHamiltonian) -> Result<()> {
    if gamma.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: gamma.dim(),
        });
    }
    Ok(())
}

/// Fermi–Dirac factor `1 / (1 + eˣ)`, stable for large `|x|`.
pub fn fermi(x: f64) -> f64 {
    if x >= 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// `H(p) = −p ln p − (1 − p) ln(1 − p)` with `0 ln 0 = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let xlnx = |x: f64| if x <= 0.0 { 0.0 } else { x * x.ln() };
    -xlnx(p) - xlnx(1.0 - p)
}

/// Equilibration map applied after each quench.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EquilibrationModel {
    /// Exact unitary evolution for a fixed time.
    Exact { t: f64 },
    /// Dephasing in the mode basis; for quadratic Hamiltonians the time
    /// average and the mode-number GGE share this correlation matrix.
    TimeAverageGGE,
    /// Gibbs state at the energy-matching inverse temperature.
    Gibbs,
}

/// Gibbs state of a quadratic Hamiltonian: Fermi–Dirac mode occupations.
pub fn gibbs_correlation(h: &QuadraticHamiltonian, beta: f64) -> CorrelationMatrix {
    let p: Vec<f64> = h.mode_energies().iter().map(|&e| fermi(beta * e)).collect();
    let eta = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        p.len(),
        p.iter().map(|&x| C64::new(x, 0.0)),
    ));
    CorrelationMatrix::from_mode_basis(h, &eta)
}

/// `Σ_k ε_k f(β ε_k)`, the Gibbs energy at inverse temperature `beta`.
pub fn gibbs_energy(energies: &[f64], beta: f64) -> f64 {
    energies.iter().map(|&e| e * fermi(beta * e)).sum()
}

fn gibbs_energy_derivative(energies: &[f64], beta: f64) -> f64 {
    -energies
        .iter()
        .map(|&e| {
            let f = fermi(beta * e);
            e * e * f * (1.0 - f)
        })
        .sum::<f64>()
}

pub use crate::roots::BetaSolution;

/// Inverse temperature `β` such that the Gibbs state of `h` has energy `target`.
///
/// The attainable open interval is `(Σ min(ε_k, 0), Σ max(ε_k, 0))`.
pub fn solve_beta(h: &QuadraticHamiltonian, target: f64) -> Result<BetaSolution> {
    solve_beta_for_energies(h.mode_energies(), target)
}

pub fn solve_beta_for_energies(energies: &[f64], target: f64) -> Result<BetaSolution> {
    let lower: f64 = energies.iter().map(|&e| e.min(0.0)).sum();
    let upper: f64 = energies.iter().map(|&e| e.max(0.0)).sum();
    if upper - lower <= 0.0 {
        if target.abs() <= 1e-10 * target.abs().max(1.0) {
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
    crate::roots::solve_decreasing(
        |b| gibbs_energy(energies, b),
        |b| gibbs_energy_derivative(energies, b),
        target,
    )
}

/// `γ(t) = U γ U†` with `U = A* e^{itD} Aᵀ`.
pub fn evolve_exact(
    gamma: &CorrelationMatrix,
    h: &QuadraticHamiltonian,
    t: f64,
) -> Result<CorrelationMatrix> {
    let mut eta = gamma.to_mode_basis(h)?;
    let e = h.mode_energies();
    let n = e.len();
    for k in 0..n {
        for l in 0..n {
            eta[(k, l)] *= C64::from_polar(1.0, t * (e[k] - e[l]));
        }
    }
    Ok(CorrelationMatrix::from_mode_basis(h, &eta))
}

/// `⟨a_site† a_site⟩(t)` under `h` for each time, in `O(n²)` per time point.
pub fn site_occupation_trajectory(
    gamma: &CorrelationMatrix,
    h: &QuadraticHamiltonian,
    site: usize,
    times: &[f64],
) -> Result<Vec<f64>> {
    let eta = gamma.to_mode_basis(h)?;
    let a = h.modes();
    let e = h.mode_energies();
    let n = e.len();
    let mut b = vec![C64::new(0.0, 0.0); n];
    Ok(times
        .iter()
        .map(|&t| {
            // γ_ss(t) = Σ_kl conj(A_sk) e^{itε_k} γ_η[k,l] e^{−itε_l} A_sl
            for k in 0..n {
                b[k] = a[(site, k)].conj() * C64::from_polar(1.0, t * e[k]);
            }
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                let mut row = C64::new(0.0, 0.0);
                for l in 0..n {
                    row += eta[(k, l)] * b[l].conj();
                }
                acc += b[k] * row;
            }
            acc.re
        })
        .collect())
}

/// Keeps only the diagonal of `γ_η`: the mode-number GGE.
pub fn dephase_gge(gamma: &CorrelationMatrix, h: &QuadraticHamiltonian) -> Result<CorrelationMatrix> {
    let eta = gamma.to_mode_basis(h)?;
    let n = eta.nrows();
    let diag = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(eta[(i, i)].re, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(CorrelationMatrix::from_mode_basis(h, &diag))
}

/// Result of an equilibration, with the Gibbs inverse temperature when relevant.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub gamma: CorrelationMatrix,
    pub beta: Option<BetaSolution>,
}

pub fn equilibrate_detailed(
    gamma: &CorrelationMatrix,
    h: &QuadraticHamiltonian,
    model: EquilibrationModel,
) -> Result<Equilibrium> {
    match model {
        EquilibrationModel::Exact { t } => Ok(Equilibrium {
            gamma: evolve_exact(gamma, h, t)?,
            beta: None,
        }),
        EquilibrationModel::TimeAverageGGE => Ok(Equilibrium {
            gamma: dephase_gge(gamma, h)?,
            beta: None,
        }),
        EquilibrationModel::Gibbs => {
            let e = energy(gamma, h)?;
            let sol = solve_beta(h, e)?;
            Ok(Equilibrium {
                gamma: gibbs_correlation(h, sol.beta),
                beta: Some(sol),
            })
        }
    }
}

pub fn equilibrate(
    gamma: &CorrelationMatrix,
    h: &QuadraticHamiltonian,
    model: EquilibrationModel,
) -> Result<CorrelationMatrix> {
    equilibrate_detailed(gamma, h, model).map(|eq| eq.gamma)
}

/// `E = Σ_ij c_ij γ_ij`.
pub fn energy(gamma: &CorrelationMatrix, h: &QuadraticHamiltonian) -> Result<f64> {
    check_dims(gamma, h)?;
    let c = h.coefficients().matrix();
    let g = gamma.gamma().matrix();
    let n = gamma.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += c[(i, j)] * g[(i, j)];
        }
    }
    Ok(acc.re)
}

/// `S = Σ_k H(d_k)` over the eigenvalues of `γ`, in nats.
pub fn entropy_gaussian(gamma: &CorrelationMatrix) -> Result<f64> {
    let d = gamma.spectrum();
    if let Some(bad) = d
        .iter()
        .find(|&&x| !(-ENTROPY_REJECT_TOL..=1.0 + ENTROPY_REJECT_TOL).contains(&x))
    {
        return Err(Error::InvalidState(format!(
            "correlation matrix eigenvalue {bad} outside [0, 1]"
        )));
    }
    Ok(d.iter().map(|&x| binary_entropy(x.clamp(0.0, 1.0))).sum())
}

/// Work cost `E(γ, H_new) − E(γ, H_old)` of an instantaneous quench.
pub fn work_of_quench(
    gamma: &CorrelationMatrix,
    h_old: &QuadraticHamiltonian,
    h_new: &QuadraticHamiltonian,
) -> Result<f64> {
    Ok(energy(gamma, h_new)? - energy(gamma, h_old)?)
}

/// Positive-temperature condition `E ≤ Tr(H)/d`, i.e. `E ≤ Σ_k ε_k / 2`.
pub fn positive_temperature_condition(gamma: &CorrelationMatrix, h: &QuadraticHamiltonian) -> Result<bool> {
    Ok(energy(gamma, h)? <= 0.5 * h.full_band_energy())
}
