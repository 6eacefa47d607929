mod common;

use common::*;
use proptest::prelude::*;
use raggio_kit::algebra::{AlgebraElement, FdAlgebra};
use raggio_kit::bell::{self, ChshObservables};
use raggio_kit::entanglement::Decomposition;
use raggio_kit::error::Error;
use raggio_kit::linalg::CMat;
use raggio_kit::states::{self, PureVector, State};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

fn factor_pool() -> Vec<FdAlgebra> {
    vec![
        full(1),
        full(2),
        full(3),
        diag(2),
        diag(3),
        FdAlgebra::from_blocks(vec![2, 1]).unwrap(),
    ]
}

fn two_qubit() -> FdAlgebra {
    FdAlgebra::tensor(&full(2), &full(2))
}

/// `Tr ρ (A₁⊗(B₁+B₂) + A₂⊗(B₁−B₂))` as a dense trace. The operator is laid
/// out in the block order of the tensor algebra, like `ρ`.
fn reference_chsh(rho: &CMat, obs: &ChshObservables) -> f64 {
    let sum = obs.b1.add(&obs.b2).unwrap();
    let diff = obs.b1.sub(&obs.b2).unwrap();
    let op = obs.a1.tensor(&sum).to_dense() + obs.a2.tensor(&diff).to_dense();
    trace(&matmul(rho, &op)).re
}

/// `max(2, 2√M)` from a correlation matrix built entrywise and a Jacobi solve.
fn reference_oracle(rho: &CMat) -> f64 {
    let p = [pauli_x(), pauli_y(), pauli_z()];
    let mut t = [[0.0; 3]; 3];
    for u in 0..3 {
        for v in 0..3 {
            t[u][v] = trace(&matmul(rho, &kron(&p[u], &p[v]))).re;
        }
    }
    let mut ttt = vec![0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            ttt[i * 3 + j] = (0..3).map(|k| t[k][i] * t[k][j]).sum();
        }
    }
    let ev = jacobi_symmetric(ttt, 3);
    (2.0 * (ev[1] + ev[2]).max(0.0).sqrt()).max(2.0)
}

fn random_two_qubit_state(r: &mut ChaCha8Rng) -> State {
    let alg = two_qubit();
    match r.random_range(0..3) {
        0 => State::random_pure(&alg, r),
        1 => State::random_mixed(&alg, r),
        _ => {
            let w = r.random_range(0.0..1.0);
            let pure = State::random_pure(&alg, r);
            State::mixture(&[w, 1.0 - w], &[pure, State::maximally_mixed(&alg)]).unwrap()
        }
    }
}

fn random_decomposition(a: &FdAlgebra, b: &FdAlgebra, r: &mut ChaCha8Rng) -> Decomposition {
    let terms = r.random_range(1..=4);
    let raw: Vec<f64> = (0..terms).map(|_| r.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let pick = |alg: &FdAlgebra, r: &mut ChaCha8Rng| {
        if r.random_bool(0.5) {
            State::random_pure(alg, r)
        } else {
            State::random_mixed(alg, r)
        }
    };
    let a_parts = (0..terms).map(|_| pick(a, r)).collect();
    let b_parts = (0..terms).map(|_| pick(b, r)).collect();
    Decomposition::new(raw.iter().map(|w| w / total).collect(), a_parts, b_parts).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn decomposable_states_obey_the_bound(ia in 0usize..6, ib in 0usize..6, seed in any::<u64>()) {
        let pool = factor_pool();
        let (a, b) = (&pool[ia], &pool[ib]);
        let mut r = rng(seed);
        let s = random_decomposition(a, b, &mut r).reconstruct();
        let rho = s.to_dense();
        for _ in 0..100 {
            let obs = ChshObservables::random(a, b, &mut r);
            let v = bell::chsh_value(&s, &obs).unwrap();
            prop_assert!(v.abs() <= 2.0 + 1e-9, "value {v}");
            prop_assert!((v - reference_chsh(&rho, &obs)).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn see_saw_is_monotone(ia in 0usize..6, ib in 0usize..6, seed in any::<u64>()) {
        let pool = factor_pool();
        let alg = FdAlgebra::tensor(&pool[ia], &pool[ib]);
        let mut r = rng(seed);
        let s = if r.random_bool(0.5) { State::random_pure(&alg, &mut r) } else { State::random_mixed(&alg, &mut r) };
        let b1 = bell::random_observable(&pool[ib], &mut r);
        let b2 = bell::random_observable(&pool[ib], &mut r);
        let run = bell::see_saw(&s, b1, b2, bell::MAX_ITERATIONS, bell::CONVERGENCE_TOL).unwrap();
        for pair in run.history.windows(2) {
            prop_assert!(pair[1] >= pair[0] - 1e-12, "{} then {}", pair[0], pair[1]);
        }
        prop_assert!((run.value - run.history.last().copied().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn optimum_stays_below_tsirelson(ia in 0usize..6, ib in 0usize..6, seed in any::<u64>()) {
        let pool = factor_pool();
        let alg = FdAlgebra::tensor(&pool[ia], &pool[ib]);
        let mut r = rng(seed);
        let s = if r.random_bool(0.5) { State::random_pure(&alg, &mut r) } else { State::random_mixed(&alg, &mut r) };
        let res = bell::chsh_optimize(&s, 4, seed).unwrap();
        prop_assert!(res.value <= TSIRELSON + 1e-6);
        prop_assert!(res.value >= 2.0 - 1e-6);
        let v = bell::chsh_value(&s, &res.observables).unwrap();
        prop_assert!((res.value - v.abs()).abs() <= 1e-9);
        let rebuilt = ChshObservables::new(
            res.observables.a1.clone(),
            res.observables.a2.clone(),
            res.observables.b1.clone(),
            res.observables.b2.clone(),
        );
        prop_assert!(rebuilt.is_ok());
    }
}

#[test]
fn optimizer_agrees_with_closed_form_on_qubits() {
    let mut r = rng(2024);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let s = random_two_qubit_state(&mut r);
        let res = bell::chsh_optimize(&s, bell::DEFAULT_RESTARTS, i).unwrap();
        let oracle = reference_oracle(&s.to_dense());
        assert!((bell::horodecki_two_qubit(&s).unwrap() - oracle).abs() < 1e-9);
        worst = worst.max((res.value - oracle).abs());
    }
    assert!(worst <= 1e-5, "worst disagreement {worst}");
}

#[test]
fn singlet_with_textbook_observables() {
    let m2 = full(2);
    let (x, z) = (pauli_x(), pauli_z());
    let k = std::f64::consts::FRAC_1_SQRT_2;
    let b1 = (&z + &x) * c(-k, 0.0);
    let b2 = (&x - &z) * c(k, 0.0);
    let el = |m: &CMat| AlgebraElement::from_dense(&m2, m).unwrap();
    let obs = ChshObservables::new(el(&z), el(&x), el(&b1), el(&b2)).unwrap();
    let s = states::singlet().to_state();
    let rho = s.to_dense();
    let expected = reference_chsh(&rho, &obs);
    assert!((expected - TSIRELSON).abs() < 1e-12);
    assert!((bell::chsh_value(&s, &obs).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn chsh_value_examples() {
    let alg = two_qubit();
    let (m2, _) = alg.factors().unwrap();
    let mut r = rng(3);
    let s = State::random_mixed(&alg, &mut r);
    let unit = ChshObservables::identity(m2, m2);
    assert!((bell::chsh_value(&s, &unit).unwrap() - 2.0).abs() < 1e-12);

    let b1 = bell::random_observable(m2, &mut r);
    let b2 = b1.scale(c(-1.0, 0.0));
    let a1 = bell::random_observable(m2, &mut r);
    let obs = ChshObservables::new(a1, AlgebraElement::zero(m2), b1, b2).unwrap();
    assert!(bell::chsh_value(&s, &obs).unwrap().abs() < 1e-12);

    let other = ChshObservables::identity(&full(3), m2);
    assert!(matches!(bell::chsh_value(&s, &other), Err(Error::AlgebraMismatch { .. })));
}

#[test]
fn invalid_observables_are_rejected() {
    let m2 = full(2);
    let one = AlgebraElement::identity(&m2);
    let big = one.scale(c(1.5, 0.0));
    assert!(matches!(
        ChshObservables::new(big, one.clone(), one.clone(), one.clone()),
        Err(Error::NormExceeded(_))
    ));
    let nil = AlgebraElement::matrix_unit(&m2, 0, 0, 1).unwrap();
    assert!(matches!(
        ChshObservables::new(nil, one.clone(), one.clone(), one),
        Err(Error::NotSelfAdjoint(_))
    ));
}

#[test]
fn sign_operator_examples() {
    let m2 = full(2);
    let d = AlgebraElement::diagonal(&m2, &[c(2.0, 0.0), c(-3.0, 0.0)]).unwrap();
    let expected = AlgebraElement::diagonal(&m2, &[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
    assert!(max_abs_diff(&bell::sign_operator(&d).unwrap().to_dense(), &expected.to_dense()) < 1e-12);

    let zero = AlgebraElement::zero(&m2);
    let one = AlgebraElement::identity(&m2);
    assert!(max_abs_diff(&bell::sign_operator(&zero).unwrap().to_dense(), &one.to_dense()) < 1e-12);

    let x = AlgebraElement::from_dense(&m2, &pauli_x()).unwrap();
    let sx = bell::sign_operator(&x).unwrap();
    assert!(max_abs_diff(&sx.to_dense(), &pauli_x()) < 1e-12);
    assert!((sx.operator_norm() - 1.0).abs() < 1e-12);

    let nil = AlgebraElement::matrix_unit(&m2, 0, 0, 1).unwrap();
    assert!(matches!(bell::sign_operator(&nil), Err(Error::NotSelfAdjoint(_))));
}

#[test]
fn singlet_reaches_tsirelson() {
    let s = states::singlet().to_state();
    let res = bell::chsh_optimize(&s, 8, 1).unwrap();
    assert!((res.value - TSIRELSON).abs() < 1e-6, "{}", res.value);
    assert!((bell::horodecki_two_qubit(&s).unwrap() - TSIRELSON).abs() < 1e-9);
    assert!((reference_oracle(&s.to_dense()) - TSIRELSON).abs() < 1e-9);
}

#[test]
fn product_states_give_two() {
    let mut r = rng(9);
    for (a, b) in [(full(2), full(2)), (full(3), full(2)), (full(2), diag(3))] {
        for _ in 0..5 {
            let s = State::product(&State::random_pure(&a, &mut r), &State::random_mixed(&b, &mut r));
            let res = bell::chsh_optimize(&s, 8, 4).unwrap();
            assert!((res.value - 2.0).abs() < 1e-6, "{}", res.value);
        }
    }
}

#[test]
fn werner_states_in_the_gap_give_two() {
    for p in [0.5, 0.6] {
        let s = states::werner(p).unwrap();
        assert!(max_abs_diff(&s.to_dense(), &werner_matrix(p)) < 1e-12);
        let res = bell::chsh_optimize(&s, bell::DEFAULT_RESTARTS, 11).unwrap();
        assert!((res.value - 2.0).abs() < 1e-6, "p = {p}: {}", res.value);
        let oracle = reference_oracle(&werner_matrix(p));
        assert!((oracle - 2.0).abs() < 1e-12);
        assert!((2.0 * (2.0 * p * p).sqrt()) < 2.0);
    }
}

#[test]
fn closed_form_examples() {
    let alg = two_qubit();
    let mut r = rng(17);
    let a = PureVector::random(&full(2), &mut r).unwrap();
    let b = PureVector::random(&full(2), &mut r).unwrap();
    let product = PureVector::product(&a, &b).to_state();
    assert!((bell::horodecki_two_qubit(&product).unwrap() - 2.0).abs() < 1e-9);
    let t = bell::correlation_matrix(&product);
    let svd = t.svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    assert!(sv[1] < 1e-9);

    let mixed = State::maximally_mixed(&alg);
    assert!(bell::correlation_matrix(&mixed).norm() < 1e-12);
    assert!((bell::horodecki_two_qubit(&mixed).unwrap() - 2.0).abs() < 1e-12);

    let t = bell::correlation_matrix(&states::singlet().to_state());
    assert!((t + nalgebra::Matrix3::identity()).norm() < 1e-12);

    let wrong = State::maximally_mixed(&FdAlgebra::tensor(&full(2), &full(3)));
    assert!(bell::horodecki_two_qubit(&wrong).is_err());
}

#[test]
fn restarts_must_be_positive() {
    let s = states::singlet().to_state();
    assert!(matches!(bell::chsh_optimize(&s, 0, 1), Err(Error::InvalidArgument(_))));
    let flat = State::maximally_mixed(&full(4));
    assert!(bell::chsh_optimize(&flat, 1, 1).is_err());
}

#[test]
fn optimization_is_deterministic() {
    let mut r = rng(21);
    let s = random_two_qubit_state(&mut r);
    let a = bell::chsh_optimize(&s, 6, 99).unwrap();
    let b = bell::chsh_optimize(&s, 6, 99).unwrap();
    assert_eq!(a, b);
}
