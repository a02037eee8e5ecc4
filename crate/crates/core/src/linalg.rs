//! Hermitian matrices and their spectral decomposition.
//!
//! The eigensolver reduces a complex Hermitian matrix to a real symmetric
//! tridiagonal matrix with Householder reflections (plus a diagonal phase
//! similarity) and then runs the implicit QL iteration with Wilkinson shifts.
//! Eigenvectors are returned with a fixed phase convention so that every
//! downstream computation is bit-reproducible for a given input.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;

/// Absolute tolerance on `|M_ij − conj(M_ji)|` accepted by [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default absolute tolerance used to cluster degenerate eigenvalues.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

/// Tolerance on `‖U†U − 1‖_F` accepted for unitary arguments.
pub const UNITARY_TOL: f64 = 1e-10;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// A complex square matrix equal to its conjugate transpose.
///
/// The stored matrix is exactly Hermitian: construction symmetrises the input
/// after checking that the asymmetry is within [`HERMITIAN_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let max_asymmetry = max_asymmetry(&m);
        if !(max_asymmetry <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian { max_asymmetry });
        }
        Ok(Self::hermitian_part(&m))
    }

    /// `(M + M†) / 2` without any tolerance check. Intended for products such
    /// as `U D U†` that are Hermitian up to round-off.
    pub fn hermitian_part(m: &CMatrix) -> Self {
        assert!(m.is_square(), "hermitian_part of a non-square matrix");
        let n = m.nrows();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        Self { m: out }
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: CMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: CMatrix::identity(n, n),
        }
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self {
            m: CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    C64::new(values[i], 0.0)
                } else {
                    ZERO
                }
            }),
        }
    }

    /// `Σ_k values[k] v_k v_k†` for the columns `v_k` of `basis`.
    pub fn from_spectrum(basis: &CMatrix, values: &[f64]) -> Self {
        let mut scaled = basis.clone();
        for (k, &e) in values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(e);
        }
        Self::hermitian_part(&(scaled * basis.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Tr(self · other)`, real for Hermitian arguments.
    pub fn trace_product(&self, other: &HermitianMatrix) -> f64 {
        trace_product(&self.m, &other.m).re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { m: &self.m * C64::new(s, 0.0) }
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.m[(i, j)].norm() <= tol))
    }

    pub fn eigh(&self) -> EigenSystem {
        eigh(self)
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix { m: &self.m + &rhs.m }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix { m: &self.m - &rhs.m }
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}

/// Largest `|M_ij − conj(M_ji)|` over all index pairs.
pub fn max_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n.min(m.ncols()) {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst || d.is_nan() {
                worst = d;
            }
        }
    }
    worst
}

/// `Tr(A B)` for square matrices of the same size.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `‖U†U − 1‖_F`.
pub fn unitary_deviation(u: &CMatrix) -> f64 {
    let n = u.ncols();
    let g = u.adjoint() * u;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            acc += (g[(i, j)] - target).norm_sqr();
        }
    }
    acc.sqrt()
}

pub fn check_unitary(u: &CMatrix) -> Result<()> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch {
            expected: u.nrows(),
            found: u.ncols(),
        });
    }
    let deviation = unitary_deviation(u);
    if deviation > UNITARY_TOL || deviation.is_nan() {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// Spectral decomposition `M = A diag(values) A†`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    /// Eigenvalues in non-decreasing order.
    pub values: Vec<f64>,
    /// Unitary matrix whose k-th column is the eigenvector of `values[k]`.
    pub vectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `A f(D) A†`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> HermitianMatrix {
        let vals: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        HermitianMatrix::from_spectrum(&self.vectors, &vals)
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.map(|x| x)
    }

    pub fn column(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k).iter().copied().collect()
    }
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
///
/// Each eigenvector is normalised so that its largest-magnitude component
/// (first one, on near ties) is real and positive.
pub fn eigh(m: &HermitianMatrix) -> EigenSystem {
    let n = m.dim();
    if n == 0 {
        return EigenSystem {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let mut a = m.matrix().clone();
    let reflectors = householder_tridiagonalize(&mut a);

    let mut d: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut e = vec![0.0; n];
    let mut phases = vec![ONE; n];
    for k in 0..n.saturating_sub(1) {
        let s = a[(k + 1, k)];
        let r = s.norm();
        e[k] = r;
        phases[k + 1] = if r > 0.0 { phases[k] * (s / r) } else { phases[k] };
    }

    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    // Only non-finite input can exhaust the iteration budget; the result then
    // carries NaNs, which every caller's residual checks reject.
    let _ = tql_implicit(&mut d, &mut e, &mut z, n);

    let mut vecs = CMatrix::from_fn(n, n, |i, j| phases[i] * z[i * n + j]);
    for (k, v) in reflectors.iter().enumerate().rev() {
        if let Some(v) = v {
            apply_reflector_rows(&mut vecs, v, k + 1);
        }
    }
    finish(d, vecs)
}

fn finish(values: Vec<f64>, vecs: CMatrix) -> EigenSystem {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut sorted_vals = Vec::with_capacity(n);
    let mut out = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted_vals.push(values[src]);
        let col = vecs.column(src);
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let phase = column_phase(col.iter().copied());
        let fix = phase.conj() / norm;
        for i in 0..n {
            out[(i, dst)] = col[i] * fix;
        }
    }
    EigenSystem {
        values: sorted_vals,
        vectors: out,
    }
}

/// Unit phase of the largest-magnitude entry (first one on near ties).
fn column_phase<I: Iterator<Item = C64> + Clone>(col: I) -> C64 {
    let max = col.clone().map(|z| z.norm()).fold(0.0f64, f64::max);
    if max == 0.0 {
        return ONE;
    }
    for z in col {
        if z.norm() >= max * (1.0 - 1e-9) {
            return z / z.norm();
        }
    }
    ONE
}

/// Reduces `a` in place to Hermitian tridiagonal form `T = Q† A Q` with
/// `Q = H_0 H_1 ⋯`. Returns the unit Householder vectors; `v_k` acts on rows
/// `k+1..n`.
fn householder_tridiagonalize(a: &mut CMatrix) -> Vec<Option<Vec<C64>>> {
    let n = a.nrows();
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x: Vec<C64> = (0..m).map(|i| a[(k + 1 + i, k)]).collect();
        let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            reflectors.push(None);
            continue;
        }
        let sigma = (x[0].norm_sqr() + tail).sqrt();
        let x0n = x[0].norm();
        let phase = if x0n > 0.0 { x[0] / x0n } else { ONE };
        let alpha = -phase * sigma;
        let mut v = x.clone();
        v[0] -= alpha;
        let vn = (2.0 * sigma * (sigma + x0n)).sqrt();
        for z in v.iter_mut() {
            *z /= vn;
        }

        // B ← B − 2 (v w† + w v†) with p = B v, κ = v† p, w = p − κ v.
        let off = k + 1;
        let mut p = vec![ZERO; m];
        for i in 0..m {
            let mut acc = ZERO;
            for j in 0..m {
                acc += a[(off + i, off + j)] * v[j];
            }
            p[i] = acc;
        }
        let kappa: C64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let w: Vec<C64> = p.iter().zip(&v).map(|(pi, vi)| pi - kappa * vi).collect();
        for i in 0..m {
            for j in 0..m {
                let delta = (v[i] * w[j].conj() + w[i] * v[j].conj()) * 2.0;
                a[(off + i, off + j)] -= delta;
            }
        }
        a[(off, k)] = alpha;
        a[(k, off)] = alpha.conj();
        for i in 1..m {
            a[(off + i, k)] = ZERO;
            a[(k, off + i)] = ZERO;
        }
        reflectors.push(Some(v));
    }
    reflectors
}

/// `M[rows off..] ← (1 − 2 v v†) M[rows off..]`.
fn apply_reflector_rows(mat: &mut CMatrix, v: &[C64], off: usize) {
    let ncols = mat.ncols();
    for j in 0..ncols {
        let mut dot = ZERO;
        for (i, vi) in v.iter().enumerate() {
            dot += vi.conj() * mat[(off + i, j)];
        }
        if dot == ZERO {
            continue;
        }
        let f = dot * 2.0;
        for (i, vi) in v.iter().enumerate() {
            mat[(off + i, j)] -= vi * f;
        }
    }
}

/// Implicit QL iteration on a real symmetric tridiagonal matrix.
///
/// `d` holds the diagonal, `e[i]` couples `i` and `i + 1` (`e[n-1]` unused).
/// Rotations are accumulated into the row-major `z`.
fn tql_implicit(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() < f64::MIN_POSITIVE {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                return Err(Error::EigenNoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let f = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * f;
                    z[k * n + i] = c * z[k * n + i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Groups of indices whose sorted values are chained by gaps `≤ tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyPartition {
    pub groups: Vec<Vec<usize>>,
    pub tol: f64,
}

impl DegeneracyPartition {
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Partition sorted eigenvalues into degenerate clusters.
pub fn cluster_degenerate(values: &[f64], tol: f64) -> DegeneracyPartition {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if v - values[*g.last().unwrap()] <= tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    DegeneracyPartition { groups, tol }
}

/// `U M U†`.
pub fn conjugate(m: &HermitianMatrix, u: &CMatrix) -> Result<HermitianMatrix> {
    if u.nrows() != m.dim() || u.ncols() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: u.nrows(),
        });
    }
    check_unitary(u)?;
    Ok(HermitianMatrix::hermitian_part(&(u * m.matrix() * u.adjoint())))
}

/// Principal logarithm of a unitary matrix, stored in diagonal form so that
/// `U^s = exp(s log U)` is cheap to evaluate along a path.
#[derive(Debug, Clone)]
pub struct UnitaryLog {
    /// Eigenvectors of `U` (columns).
    pub basis: CMatrix,
    /// Eigenphases `θ_k ∈ (−π, π]`, so that `U = V diag(e^{iθ}) V†`.
    pub angles: Vec<f64>,
}

impl UnitaryLog {
    pub fn new(u: &CMatrix) -> Result<Self> {
        check_unitary(u)?;
        let n = u.nrows();
        // U is normal: its Hermitian and anti-Hermitian parts commute. Diagonalise
        // the cosine part, then resolve ±sin pairs inside each cosine cluster.
        let cos_part = HermitianMatrix::hermitian_part(&((u + u.adjoint()) * C64::new(0.5, 0.0)));
        let sin_part = HermitianMatrix::hermitian_part(&((u - u.adjoint()) * C64::new(0.0, -0.5)));
        let es = eigh(&cos_part);
        let partition = cluster_degenerate(&es.values, 1e-10);
        let mut basis = CMatrix::zeros(n, n);
        let mut col = 0;
        for group in &partition.groups {
            let sub = CMatrix::from_fn(n, group.len(), |i, j| es.vectors[(i, group[j])]);
            let restricted =
                HermitianMatrix::hermitian_part(&(sub.adjoint() * sin_part.matrix() * &sub));
            let inner = eigh(&restricted);
            let rotated = &sub * &inner.vectors;
            for j in 0..group.len() {
                basis.set_column(col, &rotated.column(j));
                col += 1;
            }
        }
        let angles = (0..n)
            .map(|k| {
                let v = basis.column(k);
                let uv = u * v;
                let z: C64 = v.iter().zip(uv.iter()).map(|(a, b)| a.conj() * b).sum();
                let theta = z.im.atan2(z.re);
                if theta <= -std::f64::consts::PI + 1e-12 {
                    std::f64::consts::PI
                } else {
                    theta
                }
            })
            .collect();
        Ok(Self { basis, angles })
    }

    /// `exp(s log U)`.
    pub fn power(&self, s: f64) -> CMatrix {
        let mut scaled = self.basis.clone();
        for (k, &t) in self.angles.iter().enumerate() {
            let ph = C64::from_polar(1.0, s * t);
            for z in scaled.column_mut(k).iter_mut() {
                *z *= ph;
            }
        }
        scaled * self.basis.adjoint()
    }

    /// Hermitian generator `G` with `U = exp(i G)`.
    pub fn generator(&self) -> HermitianMatrix {
        HermitianMatrix::from_spectrum(&self.basis, &self.angles)
    }
}

/// `exp(−i t M)` for Hermitian `M`, via its eigensystem.
pub fn unitary_evolution(es: &EigenSystem, t: f64) -> CMatrix {
    let mut scaled = es.vectors.clone();
    for (k, &e) in es.values.iter().enumerate() {
        let ph = C64::from_polar(1.0, -e * t);
        for z in scaled.column_mut(k).iter_mut() {
            *z *= ph;
        }
    }
    scaled * es.vectors.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herm(rows: &[Vec<f64>]) -> HermitianMatrix {
        HermitianMatrix::from_real(rows).unwrap()
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let es = eigh(&HermitianMatrix::identity(2));
        assert_eq!(es.values.len(), 2);
        for v in &es.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!(unitary_deviation(&es.vectors) < 1e-12);
    }

    #[test]
    fn pauli_x_closed_form() {
        let es = eigh(&herm(&[vec![0.0, 1.0], vec![1.0, 0.0]]));
        assert!((es.values[0] + 1.0).abs() < 1e-14);
        assert!((es.values[1] - 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [[r, -r], [r, r]];
        for k in 0..2 {
            for i in 0..2 {
                let z = es.vectors[(i, k)];
                assert!((z.re - expect[k][i]).abs() < 1e-12, "{k} {i} {z}");
                assert!(z.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_site_chain() {
        let es = eigh(&herm(&[vec![1.0, 0.1], vec![0.1, 1.0]]));
        assert!((es.values[0] - 0.9).abs() < 1e-14);
        assert!((es.values[1] - 1.1).abs() < 1e-14);
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        let m = CMatrix::from_fn(4, 4, |i, j| {
            let (i, j) = (i as f64, j as f64);
            if i == j {
                C64::new(i * 0.7 - 1.0, 0.0)
            } else {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                let z = C64::new((a + 2.0 * b).sin(), (a * b + 1.0).cos());
                if i < j {
                    z
                } else {
                    z.conj()
                }
            }
        });
        let h = HermitianMatrix::new(m).unwrap();
        let es = eigh(&h);
        let rec = es.reconstruct();
        let err = (rec.matrix() - h.matrix()).norm();
        assert!(err < 1e-12, "{err}");
        assert!(unitary_deviation(&es.vectors) < 1e-12);
        assert!(es.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_fn(2, 2, |i, j| C64::new((i * 2 + j) as f64, 0.0));
        match HermitianMatrix::new(m) {
            Err(Error::NotHermitian { max_asymmetry }) => assert!((max_asymmetry - 1.0).abs() < 1e-14),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn clustering() {
        let p = cluster_degenerate(&[1.0, 1.0, 2.0], 1e-9);
        assert_eq!(p.groups, vec![vec![0, 1], vec![2]]);
        let p = cluster_degenerate(&[0.9, 1.1], 1e-9);
        assert_eq!(p.groups, vec![vec![0], vec![1]]);
        let p = cluster_degenerate(&[1.0, 1.0 + 1e-12, 2.0], 1e-9);
        assert_eq!(p.groups, vec![vec![0, 1], vec![2]]);
        assert!(cluster_degenerate(&[], 1e-9).is_empty());
    }

    #[test]
    fn conjugate_by_identity_and_permutation() {
        let m = HermitianMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let same = conjugate(&m, &CMatrix::identity(3, 3)).unwrap();
        assert_eq!(same, m);
        let mut perm = CMatrix::zeros(3, 3);
        perm[(0, 2)] = ONE;
        perm[(1, 0)] = ONE;
        perm[(2, 1)] = ONE;
        let out = conjugate(&m, &perm).unwrap();
        let diag: Vec<f64> = (0..3).map(|i| out.get(i, i).re).collect();
        assert_eq!(diag, vec![3.0, 1.0, 2.0]);
    }

    #[test]
    fn conjugate_rejects_bad_input() {
        let m = HermitianMatrix::identity(2);
        assert!(matches!(
            conjugate(&m, &CMatrix::identity(3, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
        let not_unitary = CMatrix::identity(2, 2) * C64::new(2.0, 0.0);
        assert!(matches!(conjugate(&m, &not_unitary), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn unitary_log_of_swap() {
        let mut swap = CMatrix::zeros(2, 2);
        swap[(0, 1)] = ONE;
        swap[(1, 0)] = ONE;
        let lg = UnitaryLog::new(&swap).unwrap();
        let back = lg.power(1.0);
        assert!((back - &swap).norm() < 1e-12);
        let half = lg.power(0.5);
        assert!(unitary_deviation(&half) < 1e-12);
        assert!(((&half * &half) - &swap).norm() < 1e-12);
        let zero = lg.power(0.0);
        assert!((zero - CMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn evolution_is_unitary() {
        let es = eigh(&herm(&[vec![1.0, 0.3], vec![0.3, -0.5]]));
        let u = unitary_evolution(&es, 2.7);
        assert!(unitary_deviation(&u) < 1e-12);
    }
}
