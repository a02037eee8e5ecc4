//! Jordan–Wigner embedding of `n` fermionic modes into a `2ⁿ`-dimensional space.
//!
//! Basis state `x` is a bitmask with bit `i` set when site `i` is occupied;
//! `a_{i₁}† ⋯ a_{i_m}† |0⟩ = +|x⟩` for `i₁ < ⋯ < i_m`.

use nalgebra::DMatrix;

use super::DenseState;
use crate::error::{Error, Result};
use crate::fermion::{CorrelationMatrix, QuadraticHamiltonian};
use crate::linalg::{CMatrix, HermitianMatrix, C64};

/// Largest mode count accepted by the dense embedding.
pub const MAX_FOCK_MODES: usize = 12;

fn check_modes(n: usize) -> Result<()> {
    if n > MAX_FOCK_MODES {
        return Err(Error::TooLarge {
            modes: n,
            limit: MAX_FOCK_MODES,
        });
    }
    Ok(())
}

fn parity_below(x: usize, i: usize) -> f64 {
    if (x & ((1usize << i) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `a_i† a_j |x⟩ = sign · |y⟩`, or `None` when it vanishes.
pub fn hop(x: usize, i: usize, j: usize) -> Option<(usize, f64)> {
    if x & (1 << j) == 0 {
        return None;
    }
    let s1 = parity_below(x, j);
    let y = x & !(1 << j);
    if y & (1 << i) != 0 {
        return None;
    }
    let s2 = parity_below(y, i);
    Some((y | (1 << i), s1 * s2))
}

/// `Σ_ij c_ij a_i† a_j` as a `2ⁿ × 2ⁿ` matrix.
pub fn quadratic_form_dense(c: &CMatrix) -> Result<HermitianMatrix> {
    let n = c.nrows();
    check_modes(n)?;
    let d = 1usize << n;
    let mut m = CMatrix::zeros(d, d);
    for x in 0..d {
        for i in 0..n {
            for j in 0..n {
                let cij = c[(i, j)];
                if cij == C64::new(0.0, 0.0) {
                    continue;
                }
                if let Some((y, s)) = hop(x, i, j) {
                    m[(y, x)] += cij * s;
                }
            }
        }
    }
    Ok(HermitianMatrix::hermitian_part(&m))
}

pub fn hamiltonian_to_dense(h: &QuadraticHamiltonian) -> Result<HermitianMatrix> {
    quadratic_form_dense(h.coefficients().matrix())
}

/// Mode number operators `η_k† η_k` of `h`, in the order of its mode energies.
pub fn mode_number_operators(h: &QuadraticHamiltonian) -> Result<Vec<HermitianMatrix>> {
    let a = h.modes();
    (0..h.dim())
        .map(|k| {
            let v = a.column(k);
            quadratic_form_dense(&(v * v.adjoint()))
        })
        .collect()
}

/// `γ_ij = Tr(a_i† a_j ρ)` of an `n`-mode dense state.
pub fn correlation_from_dense(rho: &DenseState, n: usize) -> Result<CorrelationMatrix> {
    check_modes(n)?;
    let d = 1usize << n;
    if rho.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho.dim(),
        });
    }
    let r = rho.rho().matrix();
    let mut g = CMatrix::zeros(n, n);
    for x in 0..d {
        for i in 0..n {
            for j in 0..n {
                if let Some((y, s)) = hop(x, i, j) {
                    g[(i, j)] += r[(x, y)] * s;
                }
            }
        }
    }
    Ok(CorrelationMatrix::from_hermitian_unchecked(
        HermitianMatrix::hermitian_part(&g),
    ))
}

/// The Gaussian state with correlation matrix `gamma` on the full Fock space.
///
/// Built as a product over natural orbitals, with Slater-determinant
/// amplitudes `det Φ[T, S]` in each particle-number sector.
pub fn gaussian_to_dense(gamma: &CorrelationMatrix) -> Result<DenseState> {
    let n = gamma.dim();
    check_modes(n)?;
    let nat = gamma.natural_orbitals();
    let occ: Vec<f64> = nat.values.iter().map(|&p| p.clamp(0.0, 1.0)).collect();
    let phi = &nat.vectors;
    let d = 1usize << n;
    let mut rho = CMatrix::zeros(d, d);
    for m in 0..=n {
        let sets: Vec<usize> = (0..d).filter(|x| x.count_ones() as usize == m).collect();
        let bits = |x: usize| (0..n).filter(move |&i| x & (1 << i) != 0);
        let weights: Vec<f64> = sets
            .iter()
            .map(|&s| {
                (0..n)
                    .map(|k| if s & (1 << k) != 0 { occ[k] } else { 1.0 - occ[k] })
                    .product()
            })
            .collect();
        let len = sets.len();
        let block = DMatrix::<C64>::from_fn(len, len, |t, s| {
            if m == 0 {
                return C64::new(1.0, 0.0);
            }
            let rows: Vec<usize> = bits(sets[t]).collect();
            let cols: Vec<usize> = bits(sets[s]).collect();
            DMatrix::<C64>::from_fn(m, m, |a, b| phi[(rows[a], cols[b])]).determinant()
        });
        let mut scaled = block.clone();
        for (s, &w) in weights.iter().enumerate() {
            scaled.column_mut(s).scale_mut(w);
        }
        let sector = scaled * block.adjoint();
        for (a, &ta) in sets.iter().enumerate() {
            for (b, &tb) in sets.iter().enumerate() {
                rho[(ta, tb)] = sector[(a, b)];
            }
        }
    }
    Ok(DenseState::from_hermitian_unchecked(
        HermitianMatrix::hermitian_part(&rho),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{is_passive, vn_entropy};
    use crate::fermion::{build_chain, energy, entropy_gaussian, gibbs_correlation};
    use crate::linalg::eigh;

    #[test]
    fn hop_signs() {
        // a_1† a_0 |01⟩: remove site 0 (sign +), add site 1 below nothing occupied (sign +).
        assert_eq!(hop(0b01, 1, 0), Some((0b10, 1.0)));
        // a_0† a_1 |10⟩ = +|01⟩
        assert_eq!(hop(0b10, 0, 1), Some((0b01, 1.0)));
        // a_2† a_0 |011⟩: a_0 gives +, then a_2† passes site 1 → −.
        assert_eq!(hop(0b011, 2, 0), Some((0b110, -1.0)));
        assert_eq!(hop(0b11, 1, 0), None);
        assert_eq!(hop(0b10, 1, 1), Some((0b10, 1.0)));
    }

    #[test]
    fn vacuum_embedding() {
        let out = gaussian_to_dense(&CorrelationMatrix::vacuum(1)).unwrap();
        assert!((out.rho().get(0, 0).re - 1.0).abs() < 1e-15);
        assert!(out.rho().get(1, 1).norm() < 1e-15);
    }

    #[test]
    fn three_mode_product_weights() {
        let h = build_chain(3, &[1.0, 2.0, 2.5], 0.0).unwrap();
        let p = [0.4, 0.3, 0.1];
        let gamma = CorrelationMatrix::from_mode_populations(&h, &p).unwrap();
        let rho = gaussian_to_dense(&gamma).unwrap();
        let diag: Vec<f64> = (0..8).map(|x| rho.rho().get(x, x).re).collect();
        assert!((diag[0] - 0.378).abs() < 1e-14);
        assert!((diag[0b011] - 0.4 * 0.3 * 0.9).abs() < 1e-14);
        assert!((diag[0b111] - 0.4 * 0.3 * 0.1).abs() < 1e-14);
        let hd = hamiltonian_to_dense(&h).unwrap();
        assert!(!is_passive(&rho, &hd, 1e-9));
    }

    #[test]
    fn round_trip_and_consistency() {
        let h = build_chain(3, &[0.3, 1.0, 0.6], 0.45).unwrap();
        let occ = CorrelationMatrix::from_site_occupations(&[0.9, 0.2, 0.5]).unwrap();
        let gamma = crate::fermion::evolve_exact(&occ, &h, 1.7).unwrap();
        let rho = gaussian_to_dense(&gamma).unwrap();
        assert!((rho.rho().trace() - 1.0).abs() < 1e-13);
        let back = correlation_from_dense(&rho, 3).unwrap();
        assert!((back.gamma().matrix() - gamma.gamma().matrix()).norm() < 1e-12);
        let hd = hamiltonian_to_dense(&h).unwrap();
        assert!((rho.expectation(&hd) - energy(&gamma, &h).unwrap()).abs() < 1e-12);
        assert!((vn_entropy(&rho) - entropy_gaussian(&gamma).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn many_body_spectrum_is_sums_of_modes() {
        let h = build_chain(3, &[0.2, 1.0, 0.5], 0.3).unwrap();
        let e = h.mode_energies().to_vec();
        let mut sums: Vec<f64> = (0..8usize)
            .map(|x| (0..3).filter(|k| x & (1 << k) != 0).map(|k| e[k]).sum())
            .collect();
        sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let dense = eigh(&hamiltonian_to_dense(&h).unwrap()).values;
        for (a, b) in dense.iter().zip(&sums) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gibbs_embeds_as_thermal_state() {
        let h = build_chain(2, &[1.0, 1.0], 0.1).unwrap();
        let rho = gaussian_to_dense(&gibbs_correlation(&h, 2.0)).unwrap();
        let hd = hamiltonian_to_dense(&h).unwrap();
        let (g, b) = crate::dense::gibbs_state_dense(&rho, &hd).unwrap();
        assert!((b.beta - 2.0).abs() < 1e-8);
        assert!((g.rho().matrix() - rho.rho().matrix()).norm() < 1e-9);
    }

    #[test]
    fn too_many_modes() {
        let g = CorrelationMatrix::vacuum(13);
        assert!(matches!(gaussian_to_dense(&g), Err(Error::TooLarge { .. })));
    }
}
