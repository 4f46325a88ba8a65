// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64 as c64;
use proptest::prelude::*;

use spinbath::lindblad::{evolve, jump_operators, EvolveMethod, Lindbladian, Picture, Propagator};
use spinbath::model::{product_gibbs, BathSpec, ChainParams, LindbladModel};
use spinbath::operators::{
    choi_matrix, embed_site, herm_eig, hermiticity_defect, identity, kron, max_abs, max_abs_diff,
    partial_trace_keep, scale, scale_real, trace, vectorize, CMatrix, ChainOperator,
};
use spinbath::sampling::{random_density, random_hermitian, rng_for};
use spinbath::thermo::{entropy_production_closed, entropy_production_def, relative_entropy};

fn hs_inner(a: &CMatrix, b: &CMatrix) -> c64 {
    trace(&(a.adjoint() * b))
}

fn v_form(model: &LindbladModel, x: &CMatrix, picture: Picture) -> CMatrix {
    let fam = jump_operators(model).unwrap();
    let gen = Lindbladian::new(model).unwrap();
    let h = gen.hamiltonian().matrix();
    let i = c64::new(0.0, 1.0);
    let mut out = match picture {
        Picture::Heisenberg => scale(&(h * x - x * h), i),
        Picture::Schrodinger => scale(&(h * x - x * h), -i),
    };
    for v in fam.iter() {
        let v = v.operator.matrix();
        let vd = v.adjoint().to_owned();
        let vv = &vd * v;
        let anti = scale_real(&(&vv * x + x * &vv), 0.5);
        out += match picture {
            Picture::Heisenberg => &vd * x * v - anti,
            Picture::Schrodinger => v * x * &vd - anti,
        };
    }
    out
}

fn model_strategy(max_sites: usize) -> impl Strategy<Value = LindbladModel> {
    (
        1..=max_sites,
        -2.0f64..2.0,
        0.0f64..2.0,
        0.0f64..2.0,
        0.05f64..3.0,
        0.05f64..3.0,
        any::<bool>(),
    )
        .prop_map(|(n, b, jx, jy, beta, beta_p, all)| {
            let params = ChainParams::new(n, b, jx, jy).unwrap();
            if all {
                let baths = (1..=n)
                    .map(|k| BathSpec::new(k, if k % 2 == 1 { beta } else { beta_p }).unwrap())
                    .collect();
                LindbladModel::new(params, baths).unwrap()
            } else {
                LindbladModel::two_bath(params, beta, beta_p).unwrap()
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kron_mixed_product(seed in any::<u64>()) {
        let mut rng = rng_for(seed, 0);
        let (a, b, c, d) = (
            random_hermitian(2, &mut rng),
            random_hermitian(4, &mut rng),
            random_hermitian(2, &mut rng),
            random_hermitian(4, &mut rng),
        );
        let lhs = kron(&a, &b) * kron(&c, &d);
        let rhs = kron(&(&a * &c), &(&b * &d));
        prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-11);
    }

    #[test]
    fn partial_trace_of_product_is_factor(seed in any::<u64>(), n in 1usize..=4, k in 0usize..4) {
        let k = 1 + k % n;
        let mut rng = rng_for(seed, 1);
        let factors: Vec<CMatrix> = (0..n).map(|_| random_density(2, &mut rng)).collect();
        let rho = ChainOperator::new(n, spinbath::operators::kron_all(factors.iter())).unwrap();
        let red = partial_trace_keep(&rho, k).unwrap();
        prop_assert!(max_abs_diff(&red, &factors[k - 1]) < 1e-13);
    }

    #[test]
    fn embedded_expectation_matches_reduced_state(seed in any::<u64>(), n in 1usize..=4, k in 0usize..4) {
        let k = 1 + k % n;
        let mut rng = rng_for(seed, 2);
        let rho = ChainOperator::new(n, random_density(1 << n, &mut rng)).unwrap();
        let a = random_hermitian(2, &mut rng);
        let full = trace(&(rho.matrix() * embed_site(&a, k, n).unwrap().matrix()));
        let red = trace(&(partial_trace_keep(&rho, k).unwrap() * &a));
        prop_assert!((full - red).norm() < 1e-13);
    }

    #[test]
    fn herm_eig_reconstructs(seed in any::<u64>(), d in 1usize..=16) {
        let m = random_hermitian(d, &mut rng_for(seed, 3));
        let e = herm_eig(&m).unwrap();
        prop_assert!(max_abs_diff(&e.reconstruct(), &m) < 1e-12);
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let u = &e.eigenvectors;
        prop_assert!(max_abs_diff(&(u.adjoint() * u), &identity(d)) < 1e-12);
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity(model in model_strategy(4), seed in any::<u64>()) {
        let d = model.dim();
        let rho = ChainOperator::new(model.n_sites(), random_density(d, &mut rng_for(seed, 4))).unwrap();
        let out = Lindbladian::new(&model).unwrap().apply_schrodinger(&rho).unwrap();
        prop_assert!(trace(out.matrix()).norm() < 1e-12);
        prop_assert!(hermiticity_defect(out.matrix()) < 1e-12);
    }

    #[test]
    fn coefficient_form_matches_jump_form(model in model_strategy(4), seed in any::<u64>()) {
        let d = model.dim();
        let mut rng = rng_for(seed, 5);
        let x = spinbath::sampling::ginibre(d, &mut rng);
        let xo = ChainOperator::new(model.n_sites(), x.clone()).unwrap();
        let gen = Lindbladian::new(&model).unwrap();
        for p in [Picture::Heisenberg, Picture::Schrodinger] {
            let a = gen.apply(&xo, p).unwrap();
            prop_assert!(max_abs_diff(a.matrix(), &v_form(&model, &x, p)) < 1e-12);
        }
    }

    #[test]
    fn superoperator_matches_matrix_free(model in model_strategy(4), seed in any::<u64>()) {
        let d = model.dim();
        let rho = ChainOperator::new(model.n_sites(), random_density(d, &mut rng_for(seed, 6))).unwrap();
        let gen = Lindbladian::new(&model).unwrap();
        for p in [Picture::Heisenberg, Picture::Schrodinger] {
            let s = gen.superoperator(p).unwrap();
            let a = s.apply(&rho).unwrap();
            let b = gen.apply(&rho, p).unwrap();
            prop_assert!(max_abs_diff(a.matrix(), b.matrix()) <= 1e-12);
        }
    }

    #[test]
    fn heisenberg_schrodinger_duality(model in model_strategy(4), seed in any::<u64>()) {
        let d = model.dim();
        let mut rng = rng_for(seed, 7);
        let x = ChainOperator::new(model.n_sites(), random_hermitian(d, &mut rng)).unwrap();
        let rho = ChainOperator::new(model.n_sites(), random_density(d, &mut rng)).unwrap();
        let gen = Lindbladian::new(&model).unwrap();
        let lhs = hs_inner(gen.apply_heisenberg(&x).unwrap().matrix(), rho.matrix());
        let rhs = hs_inner(x.matrix(), gen.apply_schrodinger(&rho).unwrap().matrix());
        prop_assert!((lhs - rhs).norm() <= 1e-11);
        // matrix level: Schrödinger matrix is the adjoint of the Heisenberg one
        if model.n_sites() <= 3 {
            let h = gen.superoperator(Picture::Heisenberg).unwrap().matrix;
            let s = gen.superoperator(Picture::Schrodinger).unwrap().matrix;
            prop_assert!(max_abs_diff(&s, &h.adjoint().to_owned()) <= 1e-11);
        }
    }

    #[test]
    fn trace_preservation_row(model in model_strategy(3)) {
        let s = Lindbladian::new(&model).unwrap().superoperator(Picture::Schrodinger).unwrap();
        let vid = vectorize(&identity(model.dim()));
        let dd = vid.len();
        let worst = (0..dd)
            .map(|c| (0..dd).map(|r| vid[r].conj() * s.matrix[(r, c)]).sum::<c64>().norm())
            .fold(0.0, f64::max);
        prop_assert!(worst <= 1e-11);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn propagator_is_completely_positive(model in model_strategy(3), t in 0.001f64..0.5) {
        let gen = Lindbladian::new(&model).unwrap();
        let p = Propagator::new(&gen, t).unwrap();
        let n = model.n_sites();
        let choi = choi_matrix(model.dim(), |e| {
            p.apply(&ChainOperator::new(n, e.clone()).unwrap()).unwrap().into_matrix()
        });
        let h = spinbath::operators::hermitian_part(&choi);
        prop_assert!(herm_eig(&h).unwrap().min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn semigroup_law(model in model_strategy(4), s in 0.0f64..2.0, t in 0.0f64..2.0, seed in any::<u64>()) {
        let rho = ChainOperator::new(model.n_sites(), random_density(model.dim(), &mut rng_for(seed, 8))).unwrap();
        let once = evolve(&model, &rho, s + t, EvolveMethod::ExactExpm, 1e-10).unwrap().state;
        let mid = evolve(&model, &rho, s, EvolveMethod::ExactExpm, 1e-10).unwrap().state;
        let twice = evolve(&model, &mid, t, EvolveMethod::ExactExpm, 1e-8).unwrap().state;
        prop_assert!(max_abs_diff(once.matrix(), twice.matrix()) <= 1e-8);
    }

    #[test]
    fn flow_preserves_states(model in model_strategy(3), seed in any::<u64>()) {
        let rho = ChainOperator::new(model.n_sites(), random_density(model.dim(), &mut rng_for(seed, 9))).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let ev = evolve(&model, &rho, t, EvolveMethod::ExactExpm, 1e-10).unwrap();
            prop_assert!(herm_eig(&spinbath::operators::hermitian_part(ev.state.matrix())).unwrap().min_eigenvalue() >= -1e-9);
            prop_assert!(hermiticity_defect(ev.state.matrix()) <= 1e-12);
            prop_assert!(ev.trace_drift <= 1e-10);
        }
    }

    #[test]
    fn rk_agrees_with_exact(model in model_strategy(3), seed in any::<u64>(), t in 0.1f64..2.0) {
        let tol = 1e-8;
        let rho = ChainOperator::new(model.n_sites(), random_density(model.dim(), &mut rng_for(seed, 10))).unwrap();
        let a = evolve(&model, &rho, t, EvolveMethod::ExactExpm, tol).unwrap().state;
        let b = evolve(&model, &rho, t, EvolveMethod::RkAdaptive, tol).unwrap();
        prop_assert!(max_abs_diff(a.matrix(), b.state.matrix()) <= 10.0 * tol);
        prop_assert!(b.trace_drift <= 10.0 * tol);
    }

    #[test]
    fn relative_entropy_is_monotone_along_equilibrium_flow(n in 1usize..=3, beta in 0.1f64..2.0, seed in any::<u64>()) {
        let model = LindbladModel::two_bath(ChainParams::paper_default(n), beta, beta).unwrap();
        let g = product_gibbs(beta, n).unwrap();
        let rho0 = ChainOperator::new(n, random_density(1 << n, &mut rng_for(seed, 11))).unwrap();
        let gen = Lindbladian::new(&model).unwrap();
        let step = Propagator::new(&gen, 0.2).unwrap();
        let mut rho = rho0;
        let mut prev = relative_entropy(&rho, &g).unwrap();
        prop_assert!(prev <= 1e-12);
        for _ in 0..20 {
            rho = step.apply(&rho).unwrap();
            let s = relative_entropy(&rho, &g).unwrap();
            // nonpositive convention: S rises towards 0
            prop_assert!(s >= prev - 1e-9);
            prev = s;
        }
    }

    #[test]
    fn entropy_production_is_nonnegative(n in 2usize..=3, beta in 0.1f64..2.0, seed in any::<u64>()) {
        let model = LindbladModel::two_bath(ChainParams::paper_default(n), beta, beta).unwrap();
        let g = product_gibbs(beta, n).unwrap();
        let rho = ChainOperator::new(n, random_density(1 << n, &mut rng_for(seed, 12))).unwrap();
        let a = entropy_production_def(&model, &rho, &g).unwrap();
        let b = entropy_production_closed(&model, &rho).unwrap();
        prop_assert!(a.sigma_total >= -1e-10);
        prop_assert!((a.sigma_total - b.sigma_total).abs() <= 1e-9);
        prop_assert!((b.sigma_total - b.per_bath.iter().sum::<f64>()).abs() <= 1e-10);
        prop_assert!(a.per_bath.iter().all(|&x| x >= -1e-10));
    }

    #[test]
    fn equilibrium_generator_kills_product_gibbs(n in 1usize..=5, beta in -3.0f64..3.0, b in -2.0f64..2.0) {
        let params = ChainParams::new(n, b, 1.0, 1.0).unwrap();
        let model = LindbladModel::two_bath(params, beta, beta).unwrap();
        let out = Lindbladian::new(&model).unwrap().apply_schrodinger(&product_gibbs(beta, n).unwrap()).unwrap();
        prop_assert!(max_abs(out.matrix()) <= 1e-11);
    }
}
