//! States as density matrices, block-diagonal over the owning algebra.
//!
//! A state `ω` on `⊕ M_{n_k}` is stored as one positive block per summand with
//! total trace one, so `ω(x) = Σ_k Tr(ρ_k x_k)`. The block traces are the
//! weights the state puts on each summand.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{self, AlgebraElement, Factor, FdAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, ZERO};

/// Max elementwise deviation from Hermiticity accepted for a state.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Eigenvalues in `[-EIGEN_FLOOR, 0)` are clipped to zero on construction.
pub const EIGEN_FLOOR: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-9;
pub const UNIT_NORM_TOL: f64 = 1e-12;
pub const WEIGHT_TOL: f64 = 1e-12;
/// Purity threshold above which a state is treated as pure.
pub const PURITY_TOL: f64 = 1e-9;

/// A positive, trace-one functional on an [`FdAlgebra`].
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    owner: FdAlgebra,
    blocks: Vec<CMat>,
}

impl State {
    /// Validates Hermiticity, positivity and normalization, then clips tiny
    /// negative eigenvalues to zero.
    pub fn new(owner: &FdAlgebra, blocks: Vec<CMat>) -> Result<Self> {
        algebra::check_block_shapes(owner, &blocks)?;
        let herm = blocks
            .iter()
            .map(linalg::hermitian_deviation)
            .fold(0.0, f64::max);
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr: f64 = blocks.iter().map(|b| linalg::trace(b).re).sum();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        let mut cleaned = Vec::with_capacity(blocks.len());
        for b in blocks {
            let (values, vectors) = linalg::eigh(&b);
            let min = values.first().copied().unwrap_or(0.0);
            if min < -EIGEN_FLOOR {
                return Err(Error::NotPositive(min));
            }
            if min < 0.0 {
                let n = values.len();
                let mut scaled = vectors.clone();
                for (k, &v) in values.iter().enumerate() {
                    let v = Complex64::from(v.max(0.0));
                    for r in 0..n {
                        scaled[(r, k)] *= v;
                    }
                }
                cleaned.push(scaled * vectors.adjoint());
            } else {
                cleaned.push(linalg::hermitian_part(&b));
            }
        }
        Ok(Self {
            owner: owner.clone(),
            blocks: cleaned,
        })
    }

    /// Trusted construction for blocks that are positive and normalized by
    /// construction (products, mixtures, partial traces of valid states).
    pub(crate) fn from_blocks_unchecked(owner: &FdAlgebra, blocks: Vec<CMat>) -> Self {
        Self {
            owner: owner.clone(),
            blocks,
        }
    }

    /// From a full density matrix on the representation space; entries outside
    /// the diagonal blocks must vanish.
    pub fn from_dense(owner: &FdAlgebra, rho: &CMat) -> Result<Self> {
        let blocks = algebra::split_blocks(owner, rho, HERMITIAN_TOL)?;
        Self::new(owner, blocks)
    }

    /// The tracial state `1 / total_dim`.
    pub fn maximally_mixed(owner: &FdAlgebra) -> Self {
        let d = owner.total_dim() as f64;
        let blocks = owner
            .block_dims()
            .iter()
            .map(|&n| CMat::identity(n, n) * Complex64::from(1.0 / d))
            .collect();
        Self::from_blocks_unchecked(owner, blocks)
    }

    /// Point evaluation at a one-dimensional block.
    pub fn point(owner: &FdAlgebra, block: usize) -> Result<Self> {
        match owner.block_dims().get(block) {
            Some(1) => {}
            Some(n) => {
                return Err(Error::UnsupportedShape(format!(
                    "point state needs a 1x1 block, block {block} has dimension {n}"
                )))
            }
            None => {
                return Err(Error::InvalidArgument(format!(
                    "block {block} out of range for {owner}"
                )))
            }
        }
        let blocks = owner
            .block_dims()
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let mut b = CMat::zeros(n, n);
                if k == block {
                    b[(0, 0)] = linalg::ONE;
                }
                b
            })
            .collect();
        Ok(Self::from_blocks_unchecked(owner, blocks))
    }

    pub fn owner(&self) -> &FdAlgebra {
        &self.owner
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    /// Weight on each summand; sums to one.
    pub fn block_weights(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| linalg::trace(b).re).collect()
    }

    pub fn to_dense(&self) -> CMat {
        algebra::join_blocks(&self.owner, &self.blocks)
    }

    /// `ω(x) = Tr(ρ x)`.
    pub fn expectation(&self, x: &AlgebraElement) -> Result<Complex64> {
        self.owner.ensure_same(x.owner())?;
        Ok(self
            .blocks
            .iter()
            .zip(x.blocks())
            .map(|(r, b)| linalg::trace_of_product(r, b))
            .sum())
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.iter())
            .map(|z| z.norm_sqr())
            .sum()
    }

    pub fn is_pure(&self) -> bool {
        self.purity() >= 1.0 - PURITY_TOL
    }

    /// Diagonal of the density matrix: the restriction to the diagonal subalgebra.
    pub fn diagonal_probabilities(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|b| b.diagonal().iter().map(|z| z.re).collect::<Vec<_>>())
            .collect()
    }

    /// Min eigenvalue over all blocks.
    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .filter_map(|b| linalg::eigvalsh(b).first().copied())
            .fold(f64::INFINITY, f64::min)
    }

    /// `½ ‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &State) -> Result<f64> {
        self.owner.ensure_same(&other.owner)?;
        Ok(0.5
            * self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(x, y)| linalg::trace_norm_hermitian(&(x - y)))
                .sum::<f64>())
    }

    /// Restriction `ω|_A(x) = ω(x ⊗ 1)` (or `ω|_B`), i.e. the partial trace over
    /// the discarded factor.
    pub fn restrict_to_factor(&self, keep: Factor) -> Result<State> {
        let (a, b) = self.owner.require_factors()?;
        let blocks = match keep {
            Factor::A => contract_onto_a(&self.blocks, a, b, None),
            Factor::B => contract_onto_b(&self.blocks, a, b, None),
        };
        Ok(State::from_blocks_unchecked(
            if keep == Factor::A { a } else { b },
            blocks,
        ))
    }

    /// The product state `ρ ⊗ σ` on `tensor(ρ.owner, σ.owner)`.
    pub fn product(r: &State, s: &State) -> State {
        let owner = FdAlgebra::tensor(&r.owner, &s.owner);
        let blocks = r
            .blocks
            .iter()
            .flat_map(|x| s.blocks.iter().map(move |y| linalg::kron(x, y)))
            .collect();
        State::from_blocks_unchecked(&owner, blocks)
    }

    /// Convex combination `Σ p_i ρ_i`.
    pub fn mixture(weights: &[f64], parts: &[State]) -> Result<State> {
        if weights.len() != parts.len() {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {} states",
                weights.len(),
                parts.len()
            )));
        }
        check_probability_vector(weights)?;
        let owner = &parts[0].owner;
        for p in &parts[1..] {
            owner.ensure_same(&p.owner)?;
        }
        let mut blocks: Vec<CMat> = owner
            .block_dims()
            .iter()
            .map(|&n| CMat::zeros(n, n))
            .collect();
        for (&w, part) in weights.iter().zip(parts) {
            for (acc, b) in blocks.iter_mut().zip(&part.blocks) {
                *acc += b * Complex64::from(w);
            }
        }
        Ok(State::from_blocks_unchecked(owner, blocks))
    }

    /// Hilbert–Schmidt random state: `G G* / Tr(G G*)` for a complex Gaussian
    /// `G` on the representation space, restricted to the algebra's blocks.
    pub fn random_mixed<R: Rng + ?Sized>(owner: &FdAlgebra, rng: &mut R) -> State {
        let d = owner.total_dim();
        let g = gaussian_matrix(d, d, rng);
        let gg = &g * g.adjoint();
        let blocks = algebra::split_blocks(owner, &gg, f64::INFINITY).expect("shape matches");
        let tr: f64 = blocks.iter().map(|b| linalg::trace(b).re).sum();
        let blocks = blocks
            .into_iter()
            .map(|b| linalg::hermitian_part(&b) / Complex64::from(tr))
            .collect();
        State::from_blocks_unchecked(owner, blocks)
    }

    /// A random vector state supported on one block; the block is chosen with
    /// probability proportional to its dimension.
    pub fn random_pure<R: Rng + ?Sized>(owner: &FdAlgebra, rng: &mut R) -> State {
        let pick = rng.random_range(0..owner.total_dim());
        let offsets = owner.block_offsets();
        let block = offsets.iter().rposition(|&off| off <= pick).unwrap_or(0);
        let n = owner.block_dims()[block];
        let psi = normalize(gaussian_vector(n, rng)).expect("nonzero");
        let blocks = owner
            .block_dims()
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                if k == block {
                    linalg::outer(&psi)
                } else {
                    CMat::zeros(m, m)
                }
            })
            .collect();
        State::from_blocks_unchecked(owner, blocks)
    }
}

/// A unit vector in `C^n` for an algebra with a single block `M_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureVector {
    owner: FdAlgebra,
    psi: CVec,
}

impl PureVector {
    pub fn new(owner: &FdAlgebra, psi: Vec<Complex64>) -> Result<Self> {
        Self::check_owner(owner, psi.len())?;
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            owner: owner.clone(),
            psi: CVec::from_vec(psi),
        })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(owner: &FdAlgebra, psi: Vec<Complex64>) -> Result<Self> {
        Self::check_owner(owner, psi.len())?;
        let psi = normalize(CVec::from_vec(psi))?;
        Ok(Self {
            owner: owner.clone(),
            psi,
        })
    }

    fn check_owner(owner: &FdAlgebra, len: usize) -> Result<()> {
        if owner.num_blocks() != 1 {
            return Err(Error::UnsupportedShape(format!(
                "vector states need a single-block algebra, got {owner}"
            )));
        }
        if len != owner.total_dim() {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {len} for algebra {owner} of dimension {}",
                owner.total_dim()
            )));
        }
        Ok(())
    }

    /// Basis vector `e_i`.
    pub fn basis(owner: &FdAlgebra, i: usize) -> Result<Self> {
        let n = owner.total_dim();
        if i >= n {
            return Err(Error::InvalidArgument(format!("basis index {i} >= {n}")));
        }
        let mut psi = vec![ZERO; n];
        psi[i] = linalg::ONE;
        Self::new(owner, psi)
    }

    /// Complex Gaussian vector, normalized.
    pub fn random<R: Rng + ?Sized>(owner: &FdAlgebra, rng: &mut R) -> Result<Self> {
        Self::check_owner(owner, owner.total_dim())?;
        let psi = normalize(gaussian_vector(owner.total_dim(), rng))?;
        Ok(Self {
            owner: owner.clone(),
            psi,
        })
    }

    /// `u ⊗ v` on `tensor(u.owner, v.owner)`.
    pub fn product(u: &PureVector, v: &PureVector) -> PureVector {
        let owner = FdAlgebra::tensor(&u.owner, &v.owner);
        let psi = u.psi.kronecker(&v.psi);
        PureVector { owner, psi }
    }

    pub fn owner(&self) -> &FdAlgebra {
        &self.owner
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.psi.as_slice()
    }

    /// The vector state `A ↦ (ψ, Aψ)` as a density matrix.
    pub fn to_state(&self) -> State {
        State::from_blocks_unchecked(&self.owner, vec![linalg::outer(&self.psi)])
    }

    /// Born probabilities `p(i) = |(e_i, ψ)|²`: the restriction of the vector
    /// state to the diagonal subalgebra.
    pub fn restrict_to_diagonal(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// The singlet `(e₁⊗e₂ − e₂⊗e₁)/√2` on `M₂ ⊗ M₂`.
pub fn singlet() -> PureVector {
    let m2 = FdAlgebra::full(2).expect("n = 2");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PureVector {
        owner: FdAlgebra::tensor(&m2, &m2),
        psi: CVec::from_vec(vec![ZERO, Complex64::from(h), Complex64::from(-h), ZERO]),
    }
}

/// Werner state `p |singlet⟩⟨singlet| + (1 − p) 1/4` on `M₂ ⊗ M₂`.
pub fn werner(p: f64) -> Result<State> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("Werner parameter {p} not in [0, 1]")));
    }
    let s = singlet().to_state();
    let noise = State::maximally_mixed(s.owner());
    State::mixture(&[p, 1.0 - p], &[s, noise])
}

pub(crate) fn check_probability_vector(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidWeights("no weights given".into()));
    }
    if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
        return Err(Error::InvalidWeights(format!("negative weight {w}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

fn normalize(v: CVec) -> Result<CVec> {
    let norm = v.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::InvalidArgument(format!("cannot normalize a vector of norm {norm}")));
    }
    Ok(v / Complex64::from(norm))
}

pub(crate) fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    CVec::from_fn(n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub(crate) fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// `⊕_i Σ_j Tr_B[ρ_ij (1 ⊗ op_j)]`: contraction of a state's blocks on
/// `tensor(a, b)` against an operator on `b` (the unit when `op` is `None`).
pub(crate) fn contract_onto_a(
    blocks: &[CMat],
    a: &FdAlgebra,
    b: &FdAlgebra,
    op: Option<&AlgebraElement>,
) -> Vec<CMat> {
    let nb = b.num_blocks();
    a.block_dims()
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut acc = CMat::zeros(n, n);
            for (j, &m) in b.block_dims().iter().enumerate() {
                let o = op.map(|x| &x.blocks()[j]);
                acc += linalg::contract_second(&blocks[i * nb + j], n, m, o);
            }
            acc
        })
        .collect()
}

/// `⊕_j Σ_i Tr_A[ρ_ij (op_i ⊗ 1)]`.
pub(crate) fn contract_onto_b(
    blocks: &[CMat],
    a: &FdAlgebra,
    b: &FdAlgebra,
    op: Option<&AlgebraElement>,
) -> Vec<CMat> {
    let nb = b.num_blocks();
    b.block_dims()
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let mut acc = CMat::zeros(m, m);
            for (i, &n) in a.block_dims().iter().enumerate() {
                let o = op.map(|x| &x.blocks()[i]);
                acc += linalg::contract_first(&blocks[i * nb + j], n, m, o);
            }
            acc
        })
        .collect()
}
