mod common;

use common::*;
use proptest::prelude::*;
use raggio_kit::algebra::{AlgebraElement, Factor, FdAlgebra};
use raggio_kit::error::Error;
use raggio_kit::linalg::CMat;
use raggio_kit::states::{self, PureVector, State};

fn check_valid(s: &State) -> Result<(), TestCaseError> {
    let rho = s.to_dense();
    let herm = max_abs_diff(&rho, &rho.adjoint());
    prop_assert!(herm <= 1e-9, "Hermitian deviation {herm}");
    prop_assert!((trace(&rho).re - 1.0).abs() <= 1e-9);
    let min = min_eigenvalue(&rho);
    prop_assert!(min >= -1e-9, "eigenvalue {min}");
    Ok(())
}

fn factor_dims() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (
        prop::collection::vec(1usize..=3, 1..=2),
        prop::collection::vec(1usize..=3, 1..=2),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn partial_trace_preserves_trace_and_positivity((a, b) in factor_dims(), seed in any::<u64>(), pure in any::<bool>()) {
        let a = FdAlgebra::from_blocks(a).unwrap();
        let b = FdAlgebra::from_blocks(b).unwrap();
        let ab = FdAlgebra::tensor(&a, &b);
        let mut r = rng(seed);
        let s = if pure { State::random_pure(&ab, &mut r) } else { State::random_mixed(&ab, &mut r) };
        check_valid(&s)?;
        for keep in [Factor::A, Factor::B] {
            let red = s.restrict_to_factor(keep).unwrap();
            check_valid(&red)?;
            // ω|_A(x) = ω(x ⊗ 1), and symmetrically
            let (kept, other) = if keep == Factor::A { (&a, &b) } else { (&b, &a) };
            let x = random_element(kept, &mut r);
            let one = AlgebraElement::identity(other);
            let lifted = if keep == Factor::A { x.tensor(&one) } else { one.tensor(&x) };
            let lhs = red.expectation(&x).unwrap();
            let rhs = s.expectation(&lifted).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-9);
        }
    }

    #[test]
    fn partial_trace_matches_index_loops(n in 1usize..=3, m in 1usize..=3, seed in any::<u64>()) {
        let ab = FdAlgebra::tensor(&full(n), &full(m));
        let s = State::random_mixed(&ab, &mut rng(seed));
        let rho = s.to_dense();
        let ra = s.restrict_to_factor(Factor::A).unwrap().to_dense();
        let rb = s.restrict_to_factor(Factor::B).unwrap().to_dense();
        prop_assert!(max_abs_diff(&ra, &partial_trace_b(&rho, n, m)) < 1e-12);
        prop_assert!(max_abs_diff(&rb, &partial_trace_a(&rho, n, m)) < 1e-12);
    }

    #[test]
    fn born_probabilities(n in 1usize..=8, seed in any::<u64>()) {
        let v = PureVector::random(&full(n), &mut rng(seed)).unwrap();
        let p = v.restrict_to_diagonal();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        let rho = v.to_state().to_dense();
        for (i, &pi) in p.iter().enumerate() {
            prop_assert!((pi - rho[(i, i)].re).abs() <= 1e-12);
            let amp = v.amplitudes()[i];
            prop_assert!((pi - (amp.re * amp.re + amp.im * amp.im)).abs() <= 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn constructors_give_valid_states(dims in prop::collection::vec(1usize..=4, 1..=3), seed in any::<u64>()) {
        let alg = FdAlgebra::from_blocks(dims).unwrap();
        let mut r = rng(seed);
        check_valid(&State::random_mixed(&alg, &mut r))?;
        check_valid(&State::random_pure(&alg, &mut r))?;
        check_valid(&State::maximally_mixed(&alg))?;
        let parts = [State::random_mixed(&alg, &mut r), State::random_pure(&alg, &mut r)];
        check_valid(&State::mixture(&[0.3, 0.7], &parts).unwrap())?;
        // round trip through the validating constructor
        let again = State::from_dense(&alg, &parts[0].to_dense()).unwrap();
        prop_assert!(again.trace_distance(&parts[0]).unwrap() < 1e-12);
    }

    #[test]
    fn purity_one_iff_rank_one(n in 1usize..=4, seed in any::<u64>(), mix in 0.0f64..1.0) {
        let alg = full(n);
        let mut r = rng(seed);
        let v = PureVector::random(&alg, &mut r).unwrap().to_state();
        let w = PureVector::random(&alg, &mut r).unwrap().to_state();
        let s = State::mixture(&[mix, 1.0 - mix], &[v, w]).unwrap();
        let ev = hermitian_eigenvalues(&s.to_dense());
        let rank_one = (ev.last().unwrap() - 1.0).abs() <= 1e-9;
        prop_assert_eq!(s.is_pure(), rank_one);
        prop_assert_eq!((s.purity() - 1.0).abs() <= 1e-9, rank_one);
    }

    #[test]
    fn pure_products_are_determined_by_restrictions(n in 1usize..=3, m in 1usize..=3, seed in any::<u64>()) {
        let mut r = rng(seed);
        let u = PureVector::random(&full(n), &mut r).unwrap();
        let v = PureVector::random(&full(m), &mut r).unwrap();
        let s = PureVector::product(&u, &v).to_state();
        let ra = s.restrict_to_factor(Factor::A).unwrap();
        let rb = s.restrict_to_factor(Factor::B).unwrap();
        prop_assert!((ra.purity() - 1.0).abs() < 1e-9 && (rb.purity() - 1.0).abs() < 1e-9);
        let rebuilt = kron(&ra.to_dense(), &rb.to_dense());
        prop_assert!(trace_distance(&rebuilt, &s.to_dense()) <= 1e-9);
    }

    #[test]
    fn product_state_factorizes(n in 1usize..=3, m in 1usize..=3, seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = State::random_mixed(&full(n), &mut r);
        let sigma = State::random_mixed(&full(m), &mut r);
        let w = State::product(&rho, &sigma);
        prop_assert!(max_abs_diff(&w.to_dense(), &kron(&rho.to_dense(), &sigma.to_dense())) < 1e-15);
        let herm = |x: AlgebraElement| x.add(&x.adjoint()).unwrap();
        let x = herm(random_element(&full(n), &mut r));
        let y = herm(random_element(&full(m), &mut r));
        let lhs = w.expectation(&x.tensor(&y)).unwrap();
        let rhs = rho.expectation(&x).unwrap() * sigma.expectation(&y).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9);
        prop_assert!(lhs.im.abs() <= 1e-9);
    }
}

#[test]
fn expectation_examples() {
    let m2 = full(2);
    let z = AlgebraElement::diagonal(&m2, &[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
    let e1 = PureVector::basis(&m2, 0).unwrap().to_state();
    assert!((e1.expectation(&z).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    let mixed = State::maximally_mixed(&m2);
    assert!(mixed.expectation(&z).unwrap().norm() < 1e-15);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = PureVector::new(&m2, vec![c(h, 0.0), c(h, 0.0)]).unwrap().to_state();
    let x = AlgebraElement::from_dense(&m2, &pauli_x()).unwrap();
    // ⟨+|X|+⟩ by hand: (h, h)·(h, h)
    let by_hand = 2.0 * h * h;
    assert!((plus.expectation(&x).unwrap().re - by_hand).abs() < 1e-15);
    assert!((by_hand - 1.0).abs() < 1e-15);
    assert!(matches!(
        e1.expectation(&AlgebraElement::identity(&diag(2))),
        Err(Error::AlgebraMismatch { .. })
    ));
}

#[test]
fn born_examples() {
    let e1 = PureVector::basis(&full(2), 0).unwrap();
    assert_eq!(e1.restrict_to_diagonal(), vec![1.0, 0.0]);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = PureVector::new(&full(2), vec![c(h, 0.0), c(h, 0.0)]).unwrap();
    for p in plus.restrict_to_diagonal() {
        assert!((p - 0.5).abs() < 1e-15);
    }
    let t = 1.0 / 3f64.sqrt();
    let v = PureVector::new(&full(3), vec![c(t, 0.0); 3]).unwrap();
    for p in v.restrict_to_diagonal() {
        assert!((p - t * t).abs() < 1e-15 && (p - 1.0 / 3.0).abs() < 1e-15);
    }
    assert!(matches!(
        PureVector::new(&diag(2), vec![c(1.0, 0.0), c(0.0, 0.0)]),
        Err(Error::UnsupportedShape(_))
    ));
}

#[test]
fn restriction_examples() {
    let singlet = states::singlet().to_state();
    let ra = singlet.restrict_to_factor(Factor::A).unwrap().to_dense();
    let by_hand = partial_trace_b(&singlet.to_dense(), 2, 2);
    assert!(max_abs_diff(&ra, &by_hand) < 1e-15);
    assert!(max_abs_diff(&ra, &(CMat::identity(2, 2) * c(0.5, 0.0))) < 1e-15);

    let mut r = rng(11);
    let rho = State::random_mixed(&full(3), &mut r);
    let sigma = State::random_mixed(&diag(2), &mut r);
    let back = State::product(&rho, &sigma).restrict_to_factor(Factor::A).unwrap();
    assert!(back.trace_distance(&rho).unwrap() < 1e-12);

    let e1 = PureVector::basis(&full(2), 0).unwrap();
    let ee = PureVector::product(&e1, &e1).to_state();
    let rb = ee.restrict_to_factor(Factor::B).unwrap();
    assert!((rb.purity() - 1.0).abs() < 1e-15);
    assert!(rb.trace_distance(&e1.to_state()).unwrap() < 1e-15);

    let unfactored = State::maximally_mixed(&full(4));
    assert!(matches!(
        unfactored.restrict_to_factor(Factor::A),
        Err(Error::MissingFactorization(_))
    ));
}

#[test]
fn product_and_mixture_examples() {
    let m2 = full(2);
    let half = State::maximally_mixed(&m2);
    let quarter = State::product(&half, &half).to_dense();
    assert!(max_abs_diff(&quarter, &(CMat::identity(4, 4) * c(0.25, 0.0))) < 1e-15);

    let e1 = PureVector::basis(&m2, 0).unwrap();
    let e2 = PureVector::basis(&m2, 1).unwrap();
    let prod = State::product(&e1.to_state(), &e2.to_state());
    let direct = PureVector::product(&e1, &e2).to_state();
    assert!(prod.trace_distance(&direct).unwrap() < 1e-15);

    let mix = State::mixture(&[0.5, 0.5], &[e1.to_state(), e2.to_state()]).unwrap();
    assert!(max_abs_diff(&mix.to_dense(), &(CMat::identity(2, 2) * c(0.5, 0.0))) < 1e-15);
    assert!((e1.to_state().purity() - 1.0).abs() < 1e-15);
    for n in 1..=5 {
        let p = State::maximally_mixed(&full(n)).purity();
        assert!((p - 1.0 / n as f64).abs() < 1e-15);
    }
}

#[test]
fn invalid_inputs_name_the_violation() {
    let m2 = full(2);
    let not_herm = CMat::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.3, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
    assert!(matches!(State::from_dense(&m2, &not_herm), Err(Error::NotHermitian(_))));
    let bad_trace = CMat::identity(2, 2);
    assert!(matches!(State::from_dense(&m2, &bad_trace), Err(Error::InvalidTrace(_))));
    let negative = CMat::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
    assert!(matches!(State::from_dense(&m2, &negative), Err(Error::NotPositive(_))));
    let off_block = CMat::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)]);
    assert!(matches!(State::from_dense(&diag(2), &off_block), Err(Error::ShapeMismatch(_))));

    let e = m2.clone();
    let parts = [State::maximally_mixed(&e), State::maximally_mixed(&e)];
    assert!(matches!(State::mixture(&[0.6, 0.6], &parts), Err(Error::InvalidWeights(_))));
    assert!(matches!(State::mixture(&[1.2, -0.2], &parts), Err(Error::InvalidWeights(_))));
    let other = [State::maximally_mixed(&e), State::maximally_mixed(&diag(2))];
    assert!(matches!(State::mixture(&[0.5, 0.5], &other), Err(Error::AlgebraMismatch { .. })));
    assert!(matches!(
        PureVector::new(&m2, vec![c(0.7, 0.0), c(0.7, 0.0)]),
        Err(Error::NotNormalized(_))
    ));
}

#[test]
fn sampling_is_deterministic_given_seed() {
    let alg = FdAlgebra::from_blocks(vec![2, 1, 3]).unwrap();
    let a = State::random_mixed(&alg, &mut rng(42));
    let b = State::random_mixed(&alg, &mut rng(42));
    assert_eq!(a, b);
    let p = State::random_pure(&alg, &mut rng(43));
    let q = State::random_pure(&alg, &mut rng(43));
    assert_eq!(p, q);
}

#[test]
fn tiny_negative_eigenvalues_are_clipped() {
    let m2 = full(2);
    let rho = CMat::from_row_slice(2, 2, &[c(1.0 + 1e-10, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1e-10, 0.0)]);
    let s = State::from_dense(&m2, &rho).unwrap();
    assert!(min_eigenvalue(&s.to_dense()) >= -1e-15);
}
