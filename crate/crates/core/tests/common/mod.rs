#![allow(dead_code)]

use gge_thermo::dense::DenseState;
use gge_thermo::fermion::{CorrelationMatrix, QuadraticHamiltonian};
use gge_thermo::{eigh, CMatrix, HermitianMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize, scale: f64) -> HermitianMatrix {
    let m = CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
    });
    HermitianMatrix::hermitian_part(&m)
}

pub fn random_real_symmetric(rng: &mut impl Rng, n: usize) -> HermitianMatrix {
    let m = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), 0.0));
    HermitianMatrix::hermitian_part(&m)
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    eigh(&random_hermitian(rng, n, 3.0)).vectors
}

pub fn random_probabilities(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

pub fn random_dense_state(rng: &mut impl Rng, d: usize) -> DenseState {
    let p = random_probabilities(rng, d);
    DenseState::from_spectrum(&random_unitary(rng, d), &p).unwrap()
}

/// Gaussian state with spectrum in `[0.02, 0.98]` and random orbitals.
pub fn random_gaussian(rng: &mut impl Rng, n: usize) -> CorrelationMatrix {
    let d: Vec<f64> = (0..n).map(|_| rng.random_range(0.02..0.98)).collect();
    let u = random_unitary(rng, n);
    CorrelationMatrix::new(HermitianMatrix::from_spectrum(&u, &d)).unwrap()
}

pub fn random_quadratic(rng: &mut impl Rng, n: usize) -> QuadraticHamiltonian {
    QuadraticHamiltonian::new(random_hermitian(rng, n, 1.0))
}

/// Eigenvalues by cyclic Jacobi on the real `2n × 2n` embedding
/// `[[Re, −Im], [Im, Re]]`, each eigenvalue appearing twice there.
pub fn jacobi_eigenvalues(h: &HermitianMatrix) -> Vec<f64> {
    let n = h.dim();
    let m = 2 * n;
    let mut a = vec![vec![0.0; m]; m];
    for i in 0..n {
        for j in 0..n {
            let z = h.get(i, j);
            a[i][j] = z.re;
            a[i + n][j + n] = z.re;
            a[i][j + n] = -z.im;
            a[i + n][j] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
    d.sort_by(f64::total_cmp);
    d.into_iter().step_by(2).collect()
}

/// All permutations of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        heap(k - 1, a, out);
        for i in 0..k - 1 {
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
            heap(k - 1, a, out);
        }
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut a, &mut out);
    out
}
