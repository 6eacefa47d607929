//! The CHSH functional `ω(A₁(B₁+B₂) + A₂(B₁−B₂))` and its maximization over
//! self-adjoint elements of norm at most one.
//!
//! The maximum of a linear functional over the unit ball of self-adjoint
//! elements is attained at a sign operator, so alternating optimization
//! ("see-saw") solves each half exactly: with `B₁, B₂` fixed the best `A_i` is
//! the sign of the partial contraction of `ω` against `B₁ ± B₂`, and vice versa.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{AlgebraElement, FdAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, ONE, ZERO};
use crate::states::{self, State};

pub const SELF_ADJOINT_TOL: f64 = 1e-9;
pub const NORM_TOL: f64 = 1e-9;
/// Eigenvalues with modulus at or below this map to `+1` in [`sign_operator`].
pub const SIGN_TIE_TOL: f64 = 1e-12;
pub const CONVERGENCE_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 500;
pub const DEFAULT_RESTARTS: usize = 16;

/// `A₁, A₂` on the first factor and `B₁, B₂` on the second.
#[derive(Clone, Debug, PartialEq)]
pub struct ChshObservables {
    pub a1: AlgebraElement,
    pub a2: AlgebraElement,
    pub b1: AlgebraElement,
    pub b2: AlgebraElement,
}

impl ChshObservables {
    /// Checks that every element is self-adjoint with norm at most one.
    pub fn new(
        a1: AlgebraElement,
        a2: AlgebraElement,
        b1: AlgebraElement,
        b2: AlgebraElement,
    ) -> Result<Self> {
        a1.owner().ensure_same(a2.owner())?;
        b1.owner().ensure_same(b2.owner())?;
        for x in [&a1, &a2, &b1, &b2] {
            let dev = x.self_adjoint_deviation();
            if dev > SELF_ADJOINT_TOL {
                return Err(Error::NotSelfAdjoint(dev));
            }
            let norm = x.operator_norm();
            if norm > 1.0 + NORM_TOL {
                return Err(Error::NormExceeded(norm));
            }
        }
        Ok(Self { a1, a2, b1, b2 })
    }

    /// All four observables equal to the unit.
    pub fn identity(a: &FdAlgebra, b: &FdAlgebra) -> Self {
        Self {
            a1: AlgebraElement::identity(a),
            a2: AlgebraElement::identity(a),
            b1: AlgebraElement::identity(b),
            b2: AlgebraElement::identity(b),
        }
    }

    /// Random admissible observables: a mix of sign operators and rescaled
    /// Hermitian elements strictly inside the unit ball.
    pub fn random<R: Rng + ?Sized>(a: &FdAlgebra, b: &FdAlgebra, rng: &mut R) -> Self {
        Self {
            a1: random_observable(a, rng),
            a2: random_observable(a, rng),
            b1: random_observable(b, rng),
            b2: random_observable(b, rng),
        }
    }
}

/// Output of [`chsh_optimize`]; `value` is a certified lower bound on the
/// supremum, witnessed by `observables`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChshResult {
    pub value: f64,
    pub observables: ChshObservables,
    pub restarts: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Trajectory of one see-saw run.
#[derive(Clone, Debug)]
pub struct SeeSawRun {
    pub value: f64,
    pub observables: ChshObservables,
    /// Value after each full A/B sweep.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn check_observables(s: &State, obs: &ChshObservables) -> Result<()> {
    let (a, b) = s.owner().require_factors()?;
    a.ensure_same(obs.a1.owner())?;
    b.ensure_same(obs.b1.owner())?;
    Ok(())
}

/// `ω(A₁ ⊗ (B₁+B₂) + A₂ ⊗ (B₁−B₂))`, real part.
pub fn chsh_value(s: &State, obs: &ChshObservables) -> Result<f64> {
    check_observables(s, obs)?;
    obs.a1.owner().ensure_same(obs.a2.owner())?;
    obs.b1.owner().ensure_same(obs.b2.owner())?;
    let (a, b) = s.owner().require_factors()?;
    let sum = obs.b1.add(&obs.b2)?;
    let diff = obs.b1.sub(&obs.b2)?;
    let h1 = states::contract_onto_a(s.blocks(), a, b, Some(&sum));
    let h2 = states::contract_onto_a(s.blocks(), a, b, Some(&diff));
    Ok(pair_value(&obs.a1, &h1) + pair_value(&obs.a2, &h2))
}

fn pair_value(x: &AlgebraElement, h: &[CMat]) -> f64 {
    x.blocks()
        .iter()
        .zip(h)
        .map(|(xb, hb)| linalg::trace_of_product(xb, hb).re)
        .sum()
}

/// Spectral sign of a self-adjoint element; ties near zero go to `+1`.
pub fn sign_operator(h: &AlgebraElement) -> Result<AlgebraElement> {
    let dev = h.self_adjoint_deviation();
    if dev > SELF_ADJOINT_TOL {
        return Err(Error::NotSelfAdjoint(dev));
    }
    Ok(sign_blocks(h.owner(), h.blocks()))
}

fn sign_blocks(owner: &FdAlgebra, blocks: &[CMat]) -> AlgebraElement {
    let signed = blocks
        .iter()
        .map(|b| linalg::spectral_map(b, |x| if x < -SIGN_TIE_TOL { -1.0 } else { 1.0 }))
        .collect();
    AlgebraElement::from_blocks_unchecked(owner, signed)
}

/// See-saw from the given starting `B₁, B₂` until the improvement per sweep
/// drops below `tol` or `max_iterations` sweeps have run.
pub fn see_saw(
    s: &State,
    b1: AlgebraElement,
    b2: AlgebraElement,
    max_iterations: usize,
    tol: f64,
) -> Result<SeeSawRun> {
    let (a, b) = s.owner().require_factors()?;
    b.ensure_same(b1.owner())?;
    b.ensure_same(b2.owner())?;
    let (mut b1, mut b2) = (b1, b2);
    let mut a1 = AlgebraElement::identity(a);
    let mut a2 = AlgebraElement::identity(a);
    let mut history = Vec::new();
    let mut converged = false;
    let mut previous = f64::NEG_INFINITY;
    for _ in 0..max_iterations {
        let h1 = states::contract_onto_a(s.blocks(), a, b, Some(&b1.add(&b2)?));
        let h2 = states::contract_onto_a(s.blocks(), a, b, Some(&b1.sub(&b2)?));
        a1 = sign_blocks(a, &hermitian_blocks(h1));
        a2 = sign_blocks(a, &hermitian_blocks(h2));

        let k1 = hermitian_blocks(states::contract_onto_b(s.blocks(), a, b, Some(&a1.add(&a2)?)));
        let k2 = hermitian_blocks(states::contract_onto_b(s.blocks(), a, b, Some(&a1.sub(&a2)?)));
        b1 = sign_blocks(b, &k1);
        b2 = sign_blocks(b, &k2);
        let value = pair_value(&b1, &k1) + pair_value(&b2, &k2);
        history.push(value);
        if value - previous < tol {
            converged = true;
            break;
        }
        previous = value;
    }
    let observables = ChshObservables { a1, a2, b1, b2 };
    let value = chsh_value(s, &observables)?;
    Ok(SeeSawRun {
        value,
        observables,
        iterations: history.len(),
        history,
        converged,
    })
}

fn hermitian_blocks(blocks: Vec<CMat>) -> Vec<CMat> {
    blocks.iter().map(linalg::hermitian_part).collect()
}

/// Best see-saw value over `restarts` starts. Restart 0 starts from the unit
/// observables (value 2); restart `r` draws random dichotomic `B`'s from the
/// ChaCha stream `r` of `seed`.
pub fn chsh_optimize(s: &State, restarts: usize, seed: u64) -> Result<ChshResult> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let (_, b) = s.owner().require_factors()?;
    let mut best: Option<SeeSawRun> = None;
    for r in 0..restarts {
        let (b1, b2) = if r == 0 {
            (AlgebraElement::identity(b), AlgebraElement::identity(b))
        } else {
            let mut rng = restart_rng(seed, r);
            (random_dichotomic(b, &mut rng), random_dichotomic(b, &mut rng))
        };
        let run = see_saw(s, b1, b2, MAX_ITERATIONS, CONVERGENCE_TOL)?;
        if best.as_ref().is_none_or(|cur| run.value.abs() > cur.value.abs()) {
            best = Some(run);
        }
    }
    let best = best.expect("restarts >= 1");
    Ok(ChshResult {
        value: best.value.abs(),
        observables: best.observables,
        restarts,
        iterations: best.iterations,
        converged: best.converged,
    })
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn random_hermitian<R: Rng + ?Sized>(alg: &FdAlgebra, rng: &mut R) -> AlgebraElement {
    let blocks = alg
        .block_dims()
        .iter()
        .map(|&n| linalg::hermitian_part(&states::gaussian_matrix(n, n, rng)))
        .collect();
    AlgebraElement::from_blocks_unchecked(alg, blocks)
}

fn random_dichotomic<R: Rng + ?Sized>(alg: &FdAlgebra, rng: &mut R) -> AlgebraElement {
    let h = random_hermitian(alg, rng);
    sign_blocks(alg, h.blocks())
}

/// A random self-adjoint element with norm at most one.
pub fn random_observable<R: Rng + ?Sized>(alg: &FdAlgebra, rng: &mut R) -> AlgebraElement {
    let h = random_hermitian(alg, rng);
    if rng.random_bool(0.5) {
        return sign_blocks(alg, h.blocks());
    }
    let norm = h.operator_norm();
    if norm == 0.0 {
        return AlgebraElement::zero(alg);
    }
    let scale = rng.random_range(0.0..=1.0) / norm;
    h.scale(Complex64::from(scale))
}

/// Pauli matrices `σ_x, σ_y, σ_z`.
pub fn pauli() -> [CMat; 3] {
    [
        CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMat::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]),
        CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c(-1.0, 0.0)]),
    ]
}

/// Closed-form CHSH maximum for two qubits: `max(2, 2√M)` with `M` the sum of
/// the two largest eigenvalues of `TᵀT`, `T_uv = ω(σ_u ⊗ σ_v)`.
pub fn horodecki_two_qubit(s: &State) -> Result<f64> {
    let (a, b) = s.owner().require_factors()?;
    if a.block_dims() != [2] || b.block_dims() != [2] {
        return Err(Error::UnsupportedShape(format!(
            "two-qubit oracle needs M2 x M2, got {a} x {b}"
        )));
    }
    let t = correlation_matrix(s);
    let ttt = t.transpose() * t;
    let mut eig: Vec<f64> = nalgebra::SymmetricEigen::new(ttt)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    let m = (eig[0] + eig[1]).max(0.0);
    Ok((2.0 * m.sqrt()).max(2.0))
}

/// `T_uv = ω(σ_u ⊗ σ_v)` for a two-qubit state.
pub fn correlation_matrix(s: &State) -> nalgebra::Matrix3<f64> {
    let p = pauli();
    let rho = &s.blocks()[0];
    nalgebra::Matrix3::from_fn(|u, v| linalg::trace_of_product(rho, &linalg::kron(&p[u], &p[v])).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::PureVector;

    fn m2() -> FdAlgebra {
        FdAlgebra::full(2).unwrap()
    }

    fn el(mat: CMat) -> AlgebraElement {
        AlgebraElement::new(&m2(), vec![mat]).unwrap()
    }

    #[test]
    fn sign_operator_examples() {
        let d = AlgebraElement::diagonal(&m2(), &[c(2.0, 0.0), c(-3.0, 0.0)]).unwrap();
        let sd = sign_operator(&d).unwrap();
        let expected = AlgebraElement::diagonal(&m2(), &[ONE, c(-1.0, 0.0)]).unwrap();
        assert!(sd.sub(&expected).unwrap().max_abs_entry() < 1e-14);
        let z = sign_operator(&AlgebraElement::zero(&m2())).unwrap();
        assert!(z.sub(&AlgebraElement::identity(&m2())).unwrap().max_abs_entry() < 1e-14);
        let x = el(pauli()[0].clone());
        assert!(sign_operator(&x).unwrap().sub(&x).unwrap().max_abs_entry() < 1e-14);
        let bad = el(CMat::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]));
        assert!(matches!(sign_operator(&bad), Err(Error::NotSelfAdjoint(_))));
    }

    #[test]
    fn chsh_value_examples() {
        let sing = states::singlet().to_state();
        let ident = ChshObservables::identity(&m2(), &m2());
        assert!((chsh_value(&sing, &ident).unwrap() - 2.0).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut obs = ChshObservables::random(&m2(), &m2(), &mut rng);
        obs.b2 = obs.b1.scale(c(-1.0, 0.0));
        obs.a2 = AlgebraElement::zero(&m2());
        assert!(chsh_value(&sing, &obs).unwrap().abs() < 1e-14);
    }

    #[test]
    fn observables_are_validated() {
        let big = el(CMat::identity(2, 2) * c(2.0, 0.0));
        let one = AlgebraElement::identity(&m2());
        assert!(matches!(
            ChshObservables::new(big, one.clone(), one.clone(), one.clone()),
            Err(Error::NormExceeded(_))
        ));
        let skew = el(CMat::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]));
        assert!(matches!(
            ChshObservables::new(skew, one.clone(), one.clone(), one),
            Err(Error::NotSelfAdjoint(_))
        ));
    }

    #[test]
    fn horodecki_examples() {
        let sing = states::singlet().to_state();
        let t = correlation_matrix(&sing);
        assert!((t + nalgebra::Matrix3::identity()).norm() < 1e-14);
        assert!((horodecki_two_qubit(&sing).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let e1 = PureVector::basis(&m2(), 0).unwrap();
        let prod = PureVector::product(&e1, &e1).to_state();
        assert!((horodecki_two_qubit(&prod).unwrap() - 2.0).abs() < 1e-12);
        let mixed = State::maximally_mixed(sing.owner());
        assert_eq!(horodecki_two_qubit(&mixed).unwrap(), 2.0);
        let m3 = FdAlgebra::full(3).unwrap();
        let other = State::maximally_mixed(&FdAlgebra::tensor(&m3, &m2()));
        assert!(horodecki_two_qubit(&other).is_err());
    }

    #[test]
    fn optimize_rejects_zero_restarts() {
        let sing = states::singlet().to_state();
        assert!(matches!(chsh_optimize(&sing, 0, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn optimize_singlet_and_products() {
        let sing = states::singlet().to_state();
        let r = chsh_optimize(&sing, 8, 3).unwrap();
        assert!((r.value - 2.0 * 2f64.sqrt()).abs() < 1e-6, "{}", r.value);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let prod = State::product(&State::random_mixed(&m2(), &mut rng), &State::random_mixed(&m2(), &mut rng));
        let r = chsh_optimize(&prod, 16, 3).unwrap();
        assert!((r.value - 2.0).abs() < 1e-6);
    }
}
