use proptest::prelude::*;
use rand::Rng;

use cstar_estimation::algebra::{
    combine, delta_basis, pauli, structure_constants, tensor_elements, AlgebraSpec, Element,
    POSITIVITY_TOL,
};
use cstar_estimation::estimation::{CostFunction, EstimationProblem, Estimator};
use cstar_estimation::linalg;
use cstar_estimation::measurement::{Povm, REGULARITY_TOL};
use cstar_estimation::model::ParametricModel;
use cstar_estimation::random::{self, SeededRng};
use cstar_estimation::state_space::{self, State};

fn specs() -> impl Strategy<Value = AlgebraSpec> {
    prop_oneof![
        Just(AlgebraSpec::matrix(2).unwrap()),
        Just(AlgebraSpec::matrix(3).unwrap()),
        Just(AlgebraSpec::abelian(3).unwrap()),
        Just(AlgebraSpec::new(vec![2, 1]).unwrap()),
        Just(AlgebraSpec::new(vec![1, 2, 2]).unwrap()),
    ]
}

fn rng_of(seed: u64) -> SeededRng {
    random::rng(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adjoint_reverses_products(spec in specs(), seed in any::<u64>()) {
        let mut rng = rng_of(seed);
        let x = random::random_element(&mut rng, &spec);
        let y = random::random_element(&mut rng, &spec);
        let lhs = x.multiply(&y).unwrap().adjoint();
        let rhs = y.adjoint().multiply(&x.adjoint()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn product_splits_into_jordan_and_lie(spec in specs(), seed in any::<u64>()) {
        let mut rng = rng_of(seed);
        let x = random::random_element(&mut rng, &spec);
        let y = random::random_element(&mut rng, &spec);
        let split = x
            .jordan(&y)
            .unwrap()
            .add(&x.lie(&y).unwrap().scale_complex(num_complex::Complex64::i()))
            .unwrap();
        prop_assert!(x.multiply(&y).unwrap().max_abs_diff(&split).unwrap() < 1e-12);
    }

    #[test]
    fn gram_elements_are_positive(spec in specs(), seed in any::<u64>()) {
        let mut rng = rng_of(seed);
        let a = random::random_element(&mut rng, &spec);
        let (positive, _) = a.adjoint().multiply(&a).unwrap().is_positive(POSITIVITY_TOL).unwrap();
        prop_assert!(positive);
    }

    #[test]
    fn tensor_of_positives_is_positive(seed in any::<u64>()) {
        let mut rng = rng_of(seed);
        let a = AlgebraSpec::matrix(2).unwrap();
        let b = AlgebraSpec::new(vec![1, 2]).unwrap();
        let pa = random::random_density(&mut rng, &a).density().clone();
        let pb = random::random_density(&mut rng, &b).density().clone();
        let t = tensor_elements(&[pa, pb]).unwrap();
        prop_assert!(t.is_positive(POSITIVITY_TOL).unwrap().0);
        prop_assert_eq!(t.spec().dim(), a.dim() * b.dim());
    }

    #[test]
    fn group_action_composes_left(spec in specs(), seed in any::<u64>()) {
        let mut rng = rng_of(seed);
        let s = random::random_density(&mut rng, &spec);
        let g1 = random::random_invertible(&mut rng, &spec);
        let g2 = random::random_invertible(&mut rng, &spec);
        let nested = state_space::group_action(&g1, &state_space::group_action(&g2, &s).unwrap()).unwrap();
        let product = state_space::group_action(&g1.multiply(&g2).unwrap(), &s).unwrap();
        prop_assert!(nested.distance(&product).unwrap() < 1e-9);
    }

    #[test]
    fn gradient_pairing_is_covariance(spec in specs(), seed in any::<u64>()) {
        let mut rng = rng_of(seed);
        let s = random::random_density(&mut rng, &spec);
        let a = random::random_hermitian(&mut rng, &spec);
        let b = random::random_hermitian(&mut rng, &spec);
        let v = state_space::gradient_vector(&s, &a).unwrap();
        let lhs = v.pair(&b).unwrap();
        let rhs = s.expect(&a.jordan(&b).unwrap()).unwrap() - s.expect(&a).unwrap() * s.expect(&b).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10 * rhs.abs().max(1.0));
        let w = state_space::gradient_vector(&s, &b).unwrap();
        prop_assert!((state_space::metric(&s, &v, &w).unwrap() - rhs).abs() < 1e-9 * rhs.abs().max(1.0));
    }

    #[test]
    fn sld_round_trip(spec in specs(), seed in any::<u64>(), pure in any::<bool>()) {
        let mut rng = rng_of(seed);
        let s = if pure { random::random_pure(&mut rng, &spec) } else { random::random_density(&mut rng, &spec) };
        let a = random::random_hermitian(&mut rng, &spec);
        let v = state_space::gradient_vector(&s, &a).unwrap();
        let sld = state_space::sld_at_state(&v).unwrap();
        let back = state_space::gradient_vector(&s, &sld.element).unwrap();
        prop_assert!(back.rep().max_abs_diff(v.rep()).unwrap() < 1e-9);
    }

    #[test]
    fn unitary_pushforward_preserves_metric(spec in specs(), seed in any::<u64>()) {
        let mut rng = rng_of(seed);
        let s = random::random_density(&mut rng, &spec);
        let v = state_space::gradient_vector(&s, &random::random_hermitian(&mut rng, &spec)).unwrap();
        let u = random::random_unitary(&mut rng, &spec);
        let moved = state_space::group_action(&u, &s).unwrap();
        let uv = state_space::push_tangent_unitary(&u, &v).unwrap();
        let before = state_space::metric(&s, &v, &v).unwrap();
        let after = state_space::metric(&moved, &uv, &uv).unwrap();
        prop_assert!((before - after).abs() < 1e-8);
    }

    #[test]
    fn geodesics_stay_in_state_space(spec in specs(), seed in any::<u64>(), t in -3.0f64..3.0) {
        let mut rng = rng_of(seed);
        let s = if seed % 2 == 0 { random::random_pure(&mut rng, &spec) } else { random::random_density(&mut rng, &spec) };
        let v = state_space::gradient_vector(&s, &random::random_hermitian(&mut rng, &spec)).unwrap();
        let nu = state_space::geodesic(&v, t).unwrap();
        prop_assert!(nu.density().min_eigenvalue() >= -1e-9);
        prop_assert!((nu.density().trace().re - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn push_forward_is_affine(spec in specs(), seed in any::<u64>(), w in 0.0f64..1.0) {
        let mut rng = rng_of(seed);
        let povm = random::random_povm(&mut rng, &spec, 4).unwrap();
        let s1 = random::random_density(&mut rng, &spec);
        let s2 = random::random_density(&mut rng, &spec);
        let mix = State::from_positive(s1.density().scale(w).add(&s2.density().scale(1.0 - w)).unwrap()).unwrap();
        let p1 = povm.push_forward(&s1).unwrap();
        let p2 = povm.push_forward(&s2).unwrap();
        let pm = povm.push_forward(&mix).unwrap();
        for j in 0..povm.len() {
            prop_assert!((pm.values()[j] - (w * p1.values()[j] + (1.0 - w) * p2.values()[j])).abs() < 1e-12);
        }
    }

    #[test]
    fn lift_is_dual_to_push_forward(spec in specs(), seed in any::<u64>()) {
        let mut rng = rng_of(seed);
        let povm = random::random_povm(&mut rng, &spec, 3).unwrap();
        let s = random::random_density(&mut rng, &spec);
        let f: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let p = povm.push_forward(&s).unwrap();
        let lhs: f64 = p.values().iter().zip(&f).map(|(a, b)| a * b).sum();
        prop_assert!((s.expect(&povm.lift(&f).unwrap()).unwrap() - lhs).abs() < 1e-12);
    }

    #[test]
    fn kadison_defect_is_nonnegative(spec in specs(), seed in any::<u64>(), outcomes in 2usize..7) {
        let mut rng = rng_of(seed);
        let povm = random::random_povm(&mut rng, &spec, outcomes).unwrap();
        let f: Vec<f64> = (0..outcomes).map(|_| rng.random_range(-3.0..3.0)).collect();
        prop_assert!(povm.kadison_defect(&f).unwrap() >= -1e-10);
    }

    #[test]
    fn majorization_holds(seed in any::<u64>(), qutrit in any::<bool>(), outcomes in 2usize..7) {
        let mut rng = rng_of(seed);
        let spec = AlgebraSpec::matrix(if qutrit { 3 } else { 2 }).unwrap();
        let generators = vec![random::random_hermitian(&mut rng, &spec).scale(0.5)];
        let model = ParametricModel::lie_group(generators, random::random_density(&mut rng, &spec), seed % 2 == 0).unwrap();
        let povm = random::random_povm(&mut rng, &spec, outcomes).unwrap();
        let theta = [rng.random_range(-1.0..1.0)];
        let gap = model.quantum_metric(&theta).unwrap() - model.classical_metric(&povm, &theta, REGULARITY_TOL).unwrap();
        prop_assert!(linalg::min_symmetric_eigenvalue(&gap) >= -1e-8);
    }

    #[test]
    fn pullback_matches_state_metric(gamma in 0.1f64..2.0, zeta in 0.1f64..2.0) {
        let model = ParametricModel::qubit_dephasing();
        let g = model.quantum_metric(&[gamma, zeta]).unwrap();
        let s = model.state_at(&[gamma, zeta]).unwrap();
        let t = model.coordinate_tangents(&[gamma, zeta]).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                prop_assert!((state_space::metric(&s, &t[r], &t[c]).unwrap() - g[(r, c)]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn analytic_and_fd_tangents_agree(gamma in 0.1f64..2.0, zeta in 0.1f64..2.0) {
        for model in [ParametricModel::qubit_dephasing(), ParametricModel::qubit_pure()] {
            let theta: Vec<f64> = [gamma, zeta][..model.dim()].to_vec();
            for r in 0..model.dim() {
                let mut dir = vec![0.0; model.dim()];
                dir[r] = 1.0;
                let exact = model.tangent_push(&theta, &dir).unwrap();
                let fd = model.tangent_push_fd(&theta, &dir).unwrap();
                prop_assert!(exact.rep().max_abs_diff(fd.rep()).unwrap() < 1e-6);
            }
        }
    }

    #[test]
    fn skew_lie_models_are_equivariant(gamma in -2.0f64..2.0, zeta in -2.0f64..2.0) {
        let rho0 = State::new(
            cstar_estimation::algebra::pauli_combination([0.5, 0.5, 0.0, 0.0]),
            1e-9,
        ).unwrap();
        let gen = pauli(3).scale(0.5);
        let model = ParametricModel::lie_group(vec![gen.clone()], rho0, true).unwrap();
        let shifted = model.state_at(&[gamma + zeta]).unwrap();
        let u = cstar_estimation::model::lie_exponential(&[gen], &[zeta], true).unwrap();
        let moved = state_space::group_action(&u, &model.state_at(&[gamma]).unwrap()).unwrap();
        prop_assert!(shifted.density().max_abs_diff(moved.density()).unwrap() < 1e-10);
    }

    #[test]
    fn sld_eigenbasis_attains_quantum_metric(seed in any::<u64>()) {
        let mut rng = rng_of(seed);
        let spec = AlgebraSpec::matrix(2).unwrap();
        let generators = vec![random::random_hermitian(&mut rng, &spec).scale(0.5)];
        let model = ParametricModel::lie_group(generators, random::random_density(&mut rng, &spec), true).unwrap();
        let theta = [rng.random_range(-1.0..1.0)];
        let povm = Povm::projective_eigenbasis(&model.sld(&theta, &[1.0]).unwrap().element).unwrap();
        let gq = model.quantum_metric(&theta).unwrap()[(0, 0)];
        let gc = model.classical_metric(&povm, &theta, 0.0).unwrap()[(0, 0)];
        prop_assert!((gq - gc).abs() < 1e-8);
    }

    #[test]
    fn covariance_ignores_cost_scale(theta in 0.05f64..0.95, factor in 0.1f64..10.0) {
        let model = ParametricModel::simplex_affine(2).unwrap();
        let povm = Povm::identity_abelian(2).unwrap();
        let est = Estimator::new(vec![vec![1.0], vec![0.0]]).unwrap();
        let cost = CostFunction::euclidean();
        let scaled = cost.scaled(factor).unwrap();
        let a = EstimationProblem::new(&model, &povm, &cost, &est).unwrap().covariance(&[theta]).unwrap();
        let b = EstimationProblem::new(&model, &povm, &scaled, &est).unwrap().covariance(&[theta]).unwrap();
        prop_assert!((a - b).amax() < 1e-8);
    }

    #[test]
    fn loss_is_the_cost_element_expectation(m1 in 0.05f64..0.95, m2 in 0.05f64..0.95) {
        let model = ParametricModel::simplex_affine(2).unwrap();
        let povm = Povm::identity_abelian(2).unwrap();
        let est = Estimator::new(vec![vec![0.9], vec![0.2]]).unwrap();
        let cost = CostFunction::euclidean();
        let problem = EstimationProblem::new(&model, &povm, &cost, &est).unwrap();
        let element = problem.cost_element(&[m1]).unwrap();
        let expected = model.state_at(&[m2]).unwrap().expect(&element).unwrap();
        prop_assert!((problem.loss(&[m1], &[m2]).unwrap() - expected).abs() < 1e-14);
        prop_assert!(cost.value(&[m1], &[m1]) == 0.0);
    }
}

#[test]
fn structure_constants_reconstruct_products() {
    for basis in [
        delta_basis(3).unwrap(),
        (0..4).map(pauli).collect::<Vec<_>>(),
    ] {
        let sc = structure_constants(&basis).unwrap();
        for j in 0..basis.len() {
            for k in 0..basis.len() {
                let coeffs: Vec<f64> = (0..basis.len()).map(|l| sc.jordan[j][k][l]).collect();
                let rebuilt = combine(&basis, &coeffs).unwrap();
                let direct = basis[j].jordan(&basis[k]).unwrap();
                assert!(rebuilt.max_abs_diff(&direct).unwrap() < 1e-10);
            }
        }
    }
}

#[test]
fn tensor_povms_are_valid() {
    let mut rng = rng_of(5);
    for spec in [
        AlgebraSpec::matrix(2).unwrap(),
        AlgebraSpec::abelian(2).unwrap(),
    ] {
        let povm = random::random_povm(&mut rng, &spec, 3).unwrap();
        for rounds in 1..=3 {
            let power = povm.tensor_power(rounds).unwrap();
            assert_eq!(power.len(), 3usize.pow(rounds as u32));
            assert!(power.validate(POSITIVITY_TOL).passed);
        }
    }
}

#[test]
fn product_povm_factorizes_probabilities() {
    let mut rng = rng_of(6);
    let spec = AlgebraSpec::matrix(2).unwrap();
    let povm = random::random_povm(&mut rng, &spec, 3).unwrap();
    let s = random::random_density(&mut rng, &spec);
    let single = povm.push_forward(&s).unwrap();
    let pair = povm.tensor_power(2).unwrap();
    let product = State::from_positive(s.density().tensor(s.density())).unwrap();
    let joint = pair.push_forward(&product).unwrap();
    for a in 0..3 {
        for b in 0..3 {
            let expected = single.values()[a] * single.values()[b];
            assert!((joint.values()[3 * a + b] - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn multi_round_metric_scales() {
    for model in [
        ParametricModel::qubit_pure(),
        ParametricModel::qubit_dephasing(),
    ] {
        let theta = vec![0.8; model.dim()];
        let base = model.quantum_metric(&theta).unwrap();
        for rounds in [2, 3] {
            let g = model
                .multi_round(rounds)
                .unwrap()
                .quantum_metric(&theta)
                .unwrap();
            assert!((g - base.scale(rounds as f64)).norm() <= 1e-6);
        }
    }
}

#[test]
fn abelian_state_metric_is_fisher_rao() {
    let p = [0.2, 0.5, 0.3];
    let u = [0.1, -0.3, 0.2];
    let s = State::from_probabilities(&p).unwrap();
    let t =
        cstar_estimation::TangentVector::new(s.clone(), Element::diagonal(&u).unwrap()).unwrap();
    let g = state_space::metric(&s, &t, &t).unwrap();
    let oracle: f64 = p.iter().zip(&u).map(|(pj, uj)| uj * uj / pj).sum();
    assert!((g - oracle).abs() < 1e-12);
}
