//! Correlation-matrix formulas checked against brute-force `2^n` density matrices.

mod common;

use common::*;
use gge_thermo::dense::fock::{
    correlation_from_dense, gaussian_to_dense, hamiltonian_to_dense, mode_number_operators, quadratic_form_dense,
};
use gge_thermo::dense::{self, ConservedSet};
use gge_thermo::fermion::{self, CorrelationMatrix, EquilibrationModel, QuadraticHamiltonian};
use gge_thermo::protocols::{run_schedule, run_schedule_with, ConservedFn, Dense, DenseModel, Fermion, Schedule};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn gamma_diff(a: &CorrelationMatrix, b: &CorrelationMatrix) -> f64 {
    (a.gamma().matrix() - b.gamma().matrix()).norm()
}

fn random_schedule(seed: u64, n: usize, quenches: usize) -> Schedule {
    let mut r = rng(seed);
    Schedule::from_hamiltonians((0..=quenches).map(|_| random_hermitian(&mut r, n, 1.0)).collect()).unwrap()
}

fn dense_schedule(s: &Schedule) -> Schedule {
    Schedule::from_hamiltonians(s.hamiltonians.iter().map(|h| quadratic_form_dense(h.matrix()).unwrap()).collect())
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_and_entropy(seed in any::<u64>(), n in 1usize..4) {
        let mut r = rng(seed);
        let g = random_gaussian(&mut r, n);
        let h = random_quadratic(&mut r, n);
        let rho = gaussian_to_dense(&g).unwrap();
        let hd = hamiltonian_to_dense(&h).unwrap();
        prop_assert!((fermion::energy(&g, &h).unwrap() - rho.expectation(&hd)).abs() < TOL);
        prop_assert!((fermion::entropy_gaussian(&g).unwrap() - dense::vn_entropy(&rho)).abs() < TOL);
        prop_assert!(gamma_diff(&correlation_from_dense(&rho, n).unwrap(), &g) < TOL);
    }

    #[test]
    fn dephasing_matches_time_average_and_dense_gge(seed in any::<u64>(), n in 1usize..4) {
        let mut r = rng(seed);
        let g = random_gaussian(&mut r, n);
        let h = random_quadratic(&mut r, n);
        let rho = gaussian_to_dense(&g).unwrap();
        let hd = hamiltonian_to_dense(&h).unwrap();
        let deph = fermion::dephase_gge(&g, &h).unwrap();

        let ta = dense::ta_state(&rho, &hd, 1e-9).unwrap();
        prop_assert!(gamma_diff(&correlation_from_dense(&ta, n).unwrap(), &deph) < TOL);

        let q = ConservedSet::measured(mode_number_operators(&h).unwrap(), &rho).unwrap();
        let (gge, _) = dense::gge_state_dense(&rho, &hd, &q).unwrap();
        let expect = gaussian_to_dense(&deph).unwrap();
        prop_assert!((gge.rho().matrix() - expect.rho().matrix()).norm() < 1e-8);
        prop_assert!((dense::vn_entropy(&gge) - fermion::entropy_gaussian(&deph).unwrap()).abs() < TOL);
    }

    #[test]
    fn gibbs_matches(seed in any::<u64>(), n in 1usize..4) {
        let mut r = rng(seed);
        let g = random_gaussian(&mut r, n);
        let h = random_quadratic(&mut r, n);
        let rho = gaussian_to_dense(&g).unwrap();
        let hd = hamiltonian_to_dense(&h).unwrap();
        let eq = fermion::equilibrate_detailed(&g, &h, EquilibrationModel::Gibbs).unwrap();
        let (w, b) = dense::gibbs_state_dense(&rho, &hd).unwrap();
        let fb = eq.beta.unwrap().beta;
        prop_assert!((fb - b.beta).abs() < 1e-8 * fb.abs().max(1.0));
        prop_assert!(gamma_diff(&correlation_from_dense(&w, n).unwrap(), &eq.gamma) < TOL);
    }

    #[test]
    fn exact_evolution_matches(seed in any::<u64>(), n in 1usize..4, t in 0.0f64..20.0) {
        let mut r = rng(seed);
        let g = random_gaussian(&mut r, n);
        let h = random_quadratic(&mut r, n);
        let rho = gaussian_to_dense(&g).unwrap();
        let hd = hamiltonian_to_dense(&h).unwrap();
        let es = gge_thermo::eigh(&hd);
        let u = gge_thermo::linalg::unitary_evolution(&es, t);
        let evolved = dense::DenseState::new(&u * rho.rho().matrix() * u.adjoint()).unwrap();
        let ours = fermion::evolve_exact(&g, &h, t).unwrap();
        prop_assert!(gamma_diff(&correlation_from_dense(&evolved, n).unwrap(), &ours) < TOL);
    }
}

#[test]
fn per_step_work_matches_dense_pipelines() {
    for (seed, n) in [(1u64, 2usize), (2, 3), (3, 3)] {
        let g = random_gaussian(&mut rng(seed + 100), n);
        let rho = gaussian_to_dense(&g).unwrap();
        let s = random_schedule(seed, n, 5);
        let sd = dense_schedule(&s);

        let f_gge = run_schedule::<Fermion>(&g, &s, &EquilibrationModel::TimeAverageGGE).unwrap();
        let d_ta = run_schedule::<Dense>(&rho, &sd, &DenseModel::time_average()).unwrap();
        let ops: Vec<_> = s
            .hamiltonians
            .iter()
            .map(|h| mode_number_operators(&QuadraticHamiltonian::new(h.clone())).unwrap())
            .collect();
        let d_gge = run_schedule_with::<Dense>(&rho, &sd, |m: usize| DenseModel::Gge(ConservedFn::fixed(ops[m].clone())), false)
            .unwrap();
        for (a, (b, c)) in f_gge.steps.iter().zip(d_ta.steps.iter().zip(&d_gge.steps)) {
            assert!((a.work_extracted - b.work_extracted).abs() < TOL);
            assert!((a.work_extracted - c.work_extracted).abs() < TOL);
            assert!((a.entropy - c.entropy).abs() < TOL);
            // Time averaging keeps all many-body correlations: entropy never exceeds the GGE value.
            assert!(b.entropy <= a.entropy + TOL);
        }

        let f_gibbs = run_schedule::<Fermion>(&g, &s, &EquilibrationModel::Gibbs).unwrap();
        let d_gibbs = run_schedule::<Dense>(&rho, &sd, &DenseModel::Gibbs).unwrap();
        for (a, b) in f_gibbs.steps.iter().zip(&d_gibbs.steps) {
            assert!((a.work_extracted - b.work_extracted).abs() < TOL);
            assert!((a.entropy - b.entropy).abs() < TOL);
        }
        assert!((f_gibbs.work - d_gibbs.work).abs() < TOL);
    }
}

#[test]
fn vacuum_is_trivial() {
    let h = fermion::build_chain(3, &[1.0, 0.5, 2.0], 0.3).unwrap();
    let vac = CorrelationMatrix::vacuum(3);
    let rho = gaussian_to_dense(&vac).unwrap();
    assert!((rho.rho().get(0, 0).re - 1.0).abs() < 1e-15);
    assert!(fermion::energy(&vac, &h).unwrap().abs() < 1e-15);
    assert!(dense::vn_entropy(&rho).abs() < 1e-12);
}
