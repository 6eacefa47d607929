//! Decomposability of states on `A ⊗ B`.
//!
//! Pure states are decided exactly by their Schmidt coefficients. When one
//! factor is commutative every state is decomposable, and [`classical_decompose`]
//! produces the decomposition by conditioning on the classical points. For mixed
//! states on two noncommutative factors a negative partial transpose certifies
//! entanglement; otherwise [`separability_test`] searches for an explicit
//! mixture of product states.
//!
//! States on multi-block factors are handled one tensor block `(i, j)` at a time:
//! a state is decomposable iff each normalized block component is decomposable
//! on `M_{n_i} ⊗ M_{m_j}`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use crate::algebra::{Factor, FdAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, ZERO};
use crate::states::{self, PureVector, State};

/// Schmidt coefficients above this count towards the Schmidt rank.
pub const SCHMIDT_TOL: f64 = 1e-9;
/// Partial-transpose eigenvalues below `-PPT_TOL` certify entanglement.
pub const PPT_TOL: f64 = 1e-9;
/// Conditioning weights at or below this are pruned.
pub const PRUNE_WEIGHT: f64 = 1e-12;
/// Reconstruction error (trace distance) accepted from the product search.
pub const SEARCH_TOL: f64 = 1e-6;
/// Iteration cap for the product search in `2×2` and `2×3`, where PPT states
/// are known to be decomposable.
pub const GUARANTEED_SEARCH_CAP: usize = 2000;

/// `ω = Σ_i p_i ρ_i ⊗ σ_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    weights: Vec<f64>,
    a_parts: Vec<State>,
    b_parts: Vec<State>,
}

impl Decomposition {
    pub fn new(weights: Vec<f64>, a_parts: Vec<State>, b_parts: Vec<State>) -> Result<Self> {
        if weights.len() != a_parts.len() || weights.len() != b_parts.len() {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {} A-parts and {} B-parts",
                weights.len(),
                a_parts.len(),
                b_parts.len()
            )));
        }
        states::check_probability_vector(&weights)?;
        if let Some(w) = weights.iter().find(|w| **w <= 0.0) {
            return Err(Error::InvalidWeights(format!("weight {w} is not strictly positive")));
        }
        for p in &a_parts[1..] {
            a_parts[0].owner().ensure_same(p.owner())?;
        }
        for p in &b_parts[1..] {
            b_parts[0].owner().ensure_same(p.owner())?;
        }
        Ok(Self {
            weights,
            a_parts,
            b_parts,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn a_parts(&self) -> &[State] {
        &self.a_parts
    }

    pub fn b_parts(&self) -> &[State] {
        &self.b_parts
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `Σ_i p_i ρ_i ⊗ σ_i`.
    pub fn reconstruct(&self) -> State {
        let owner = FdAlgebra::tensor(self.a_parts[0].owner(), self.b_parts[0].owner());
        let mut blocks: Vec<CMat> = owner
            .block_dims()
            .iter()
            .map(|&n| CMat::zeros(n, n))
            .collect();
        for ((&w, a), b) in self.weights.iter().zip(&self.a_parts).zip(&self.b_parts) {
            let prod = State::product(a, b);
            for (acc, blk) in blocks.iter_mut().zip(prod.blocks()) {
                *acc += blk * Complex64::from(w);
            }
        }
        State::from_blocks_unchecked(&owner, blocks)
    }
}

/// Outcome of [`separability_test`], with a certificate matching the tag.
#[derive(Clone, Debug, PartialEq)]
pub enum SeparabilityVerdict {
    Separable(Decomposition),
    EntangledPure { reduced_purity: f64 },
    EntangledPpt { min_eigenvalue: f64 },
    Undetermined { budget: usize },
}

impl SeparabilityVerdict {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Separable(_) => "Separable",
            Self::EntangledPure { .. } => "EntangledPure",
            Self::EntangledPpt { .. } => "EntangledPPT",
            Self::Undetermined { .. } => "Undetermined",
        }
    }

    pub fn is_entangled(&self) -> bool {
        matches!(self, Self::EntangledPure { .. } | Self::EntangledPpt { .. })
    }
}

/// Result of the exact pure-state test.
#[derive(Clone, Debug, PartialEq)]
pub struct PureEntanglement {
    pub entangled: bool,
    /// Purity of the restriction to either factor; below one iff entangled.
    pub reduced_purity: f64,
    pub schmidt: Vec<f64>,
}

fn single_block_factors(owner: &FdAlgebra) -> Result<(usize, usize)> {
    let (a, b) = owner.require_factors()?;
    if a.num_blocks() != 1 || b.num_blocks() != 1 {
        return Err(Error::UnsupportedShape(format!(
            "expected two single-block factors, got {a} and {b}"
        )));
    }
    Ok((a.total_dim(), b.total_dim()))
}

/// Schmidt coefficients of a vector on `M_n ⊗ M_m`, nonincreasing.
pub fn schmidt(v: &PureVector) -> Result<Vec<f64>> {
    let (n, m) = single_block_factors(v.owner())?;
    let amp = v.amplitudes();
    let coeff = CMat::from_fn(n, m, |a, b| amp[a * m + b]);
    let mut sv: Vec<f64> = coeff.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

pub fn is_entangled_pure(v: &PureVector) -> Result<PureEntanglement> {
    let schmidt = schmidt(v)?;
    let rank = schmidt.iter().filter(|&&s| s > SCHMIDT_TOL).count();
    let reduced_purity = schmidt.iter().map(|s| s.powi(4)).sum();
    Ok(PureEntanglement {
        entangled: rank > 1,
        reduced_purity,
        schmidt,
    })
}

/// Conditioning decomposition for a state on `A ⊗ B` with a commutative factor.
///
/// With `B` commutative on `m` points: `p_j = ω(1 ⊗ δ_j)`, `σ_j = δ_j` and
/// `ρ_j(x) = ω(x ⊗ δ_j) / p_j`. Otherwise `A` is conditioned on symmetrically.
pub fn classical_decompose(s: &State) -> Result<Decomposition> {
    let (a, b) = s.owner().require_factors()?;
    let nb = b.num_blocks();
    let condition_on_b = b.is_commutative();
    if !condition_on_b && !a.is_commutative() {
        return Err(Error::Precondition(format!(
            "classical decomposition needs a commutative factor, got {a} and {b}"
        )));
    }
    let (classical, quantum) = if condition_on_b { (b, a) } else { (a, b) };
    let mut weights = Vec::new();
    let mut a_parts = Vec::new();
    let mut b_parts = Vec::new();
    for point in 0..classical.num_blocks() {
        let cond: Vec<CMat> = (0..quantum.num_blocks())
            .map(|q| {
                let idx = if condition_on_b { q * nb + point } else { point * nb + q };
                s.blocks()[idx].clone()
            })
            .collect();
        let p: f64 = cond.iter().map(|c| linalg::trace(c).re).sum();
        if p <= PRUNE_WEIGHT {
            continue;
        }
        let cond = cond.into_iter().map(|c| c / Complex64::from(p)).collect();
        let conditional = State::from_blocks_unchecked(quantum, cond);
        let delta = State::point(classical, point)?;
        weights.push(p);
        if condition_on_b {
            a_parts.push(conditional);
            b_parts.push(delta);
        } else {
            a_parts.push(delta);
            b_parts.push(conditional);
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Decomposition::new(weights, a_parts, b_parts)
}

/// Most negative eigenvalue of `(id ⊗ T)(ρ)`, taken over all tensor blocks.
pub fn ppt_check(s: &State) -> Result<f64> {
    let (a, b) = s.owner().require_factors()?;
    let nb = b.num_blocks();
    let mut min = f64::INFINITY;
    for (i, &n) in a.block_dims().iter().enumerate() {
        for (j, &m) in b.block_dims().iter().enumerate() {
            let pt = linalg::partial_transpose_second(&s.blocks()[i * nb + j], n, m);
            if let Some(&v) = linalg::eigvalsh(&pt).first() {
                min = min.min(v);
            }
        }
    }
    Ok(min)
}

/// Decides decomposability of `s`, searching up to `budget` iterations for an
/// explicit decomposition where no exact criterion applies.
pub fn separability_test<R: Rng + ?Sized>(
    s: &State,
    budget: usize,
    rng: &mut R,
) -> Result<SeparabilityVerdict> {
    if budget == 0 {
        return Err(Error::InvalidArgument("iteration budget must be at least 1".into()));
    }
    let (a, b) = s.owner().require_factors()?;
    if a.is_commutative() || b.is_commutative() {
        return Ok(SeparabilityVerdict::Separable(classical_decompose(s)?));
    }

    let nb = b.num_blocks();
    let mut components = Vec::new();
    for (i, &n) in a.block_dims().iter().enumerate() {
        for (j, &m) in b.block_dims().iter().enumerate() {
            let blk = &s.blocks()[i * nb + j];
            let w = linalg::trace(blk).re;
            if w > PRUNE_WEIGHT {
                components.push((i, j, n, m, w, blk / Complex64::from(w)));
            }
        }
    }

    // Exact entanglement certificates first, before any search.
    for (_, _, n, m, _, tau) in &components {
        if *n == 1 || *m == 1 {
            continue;
        }
        if pure_purity(tau) >= 1.0 - states::PURITY_TOL {
            let psi = top_eigenvector(tau);
            let local = FdAlgebra::tensor(&FdAlgebra::full(*n)?, &FdAlgebra::full(*m)?);
            let v = PureVector::normalized(&local, psi.iter().copied().collect())?;
            let pe = is_entangled_pure(&v)?;
            if pe.entangled {
                return Ok(SeparabilityVerdict::EntangledPure {
                    reduced_purity: pe.reduced_purity,
                });
            }
        }
    }
    let min_pt = ppt_check(s)?;
    if min_pt < -PPT_TOL {
        return Ok(SeparabilityVerdict::EntangledPpt {
            min_eigenvalue: min_pt,
        });
    }

    let mut weights = Vec::new();
    let mut a_parts = Vec::new();
    let mut b_parts = Vec::new();
    for (i, j, n, m, w, tau) in components {
        let Some(local) = decompose_block(&tau, n, m, budget, rng) else {
            return Ok(SeparabilityVerdict::Undetermined { budget });
        };
        for (p, alpha, beta) in local {
            weights.push(w * p);
            a_parts.push(embed_in_block(a, i, alpha));
            b_parts.push(embed_in_block(b, j, beta));
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let d = Decomposition::new(weights, a_parts, b_parts)?;
    if d.reconstruct().trace_distance(s)? > SEARCH_TOL {
        return Ok(SeparabilityVerdict::Undetermined { budget });
    }
    Ok(SeparabilityVerdict::Separable(d))
}

/// `Σ_i p_i ρ_i ⊗ σ_i`.
pub fn reconstruct(d: &Decomposition) -> State {
    d.reconstruct()
}

fn pure_purity(tau: &CMat) -> f64 {
    tau.iter().map(|z| z.norm_sqr()).sum()
}

fn top_eigenvector(m: &CMat) -> CVec {
    let (_, vecs) = linalg::eigh(m);
    vecs.column(vecs.ncols() - 1).into_owned()
}

fn embed_in_block(owner: &FdAlgebra, block: usize, local: CMat) -> State {
    let mut local = Some(local);
    let blocks = owner
        .block_dims()
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            if k == block {
                local.take().expect("single use")
            } else {
                CMat::zeros(n, n)
            }
        })
        .collect();
    State::from_blocks_unchecked(owner, blocks)
}

type LocalTerms = Vec<(f64, CMat, CMat)>;

/// Decomposition of a normalized state on `M_n ⊗ M_m` whose partial transpose
/// is positive. Returns `None` when nothing within [`SEARCH_TOL`] is found.
fn decompose_block<R: Rng + ?Sized>(
    tau: &CMat,
    n: usize,
    m: usize,
    budget: usize,
    rng: &mut R,
) -> Option<LocalTerms> {
    if n == 1 || m == 1 {
        let (alpha, beta) = if n == 1 {
            (CMat::identity(1, 1), tau.clone())
        } else {
            (tau.clone(), CMat::identity(1, 1))
        };
        return Some(vec![(1.0, alpha, beta)]);
    }
    if pure_purity(tau) >= 1.0 - states::PURITY_TOL {
        let rho = State::from_blocks_unchecked(
            &FdAlgebra::tensor(&FdAlgebra::full(n).ok()?, &FdAlgebra::full(m).ok()?),
            vec![tau.clone()],
        );
        let alpha = rho.restrict_to_factor(Factor::A).ok()?.blocks()[0].clone();
        let beta = rho.restrict_to_factor(Factor::B).ok()?.blocks()[0].clone();
        let terms = vec![(1.0, alpha, beta)];
        return (local_error(tau, &terms, n, m) <= SEARCH_TOL).then_some(terms);
    }
    let ppt_complete = matches!((n.min(m), n.max(m)), (2, 2) | (2, 3));
    let iterations = if ppt_complete {
        budget.max(GUARANTEED_SEARCH_CAP)
    } else {
        budget
    };
    ProductSearch::new(tau, n, m).run(iterations, rng)
}

fn local_error(tau: &CMat, terms: &LocalTerms, n: usize, m: usize) -> f64 {
    let mut acc = CMat::zeros(n * m, n * m);
    for (p, alpha, beta) in terms {
        acc += linalg::kron(alpha, beta) * Complex64::from(*p);
    }
    0.5 * linalg::trace_norm_hermitian(&(tau - acc))
}

/// Fully corrective Frank–Wolfe over product states, followed by an exact
/// finishing step.
///
/// The target is first shifted away from the maximally mixed state,
/// `σ = (τ − t·1/d) / (1 − t)`, with `t` half of the largest shift that keeps `σ`
/// positive and PPT. Once `σ ≈ Σ w_k π_k` is close enough, the residual plus the
/// reserved mass `t·1/d` is rewritten exactly as a positive combination of
/// products using `1⊗1 ± G⊗H = ½[(1±G)⊗(1+H) + (1∓G)⊗(1−H)]` for `‖G‖, ‖H‖ ≤ 1`.
struct ProductSearch<'a> {
    tau: &'a CMat,
    n: usize,
    m: usize,
    shift: f64,
    target: CMat,
    basis_a: Vec<(CMat, f64)>,
    basis_b: Vec<(CMat, f64)>,
}

impl<'a> ProductSearch<'a> {
    fn new(tau: &'a CMat, n: usize, m: usize) -> Self {
        let d = (n * m) as f64;
        let lam = linalg::eigvalsh(tau)[0];
        let lam_pt = linalg::eigvalsh(&linalg::partial_transpose_second(tau, n, m))[0];
        let shift = (0.5 * d * lam.min(lam_pt)).clamp(0.0, 0.5);
        let mixed = CMat::identity(n * m, n * m) * Complex64::from(1.0 / d);
        let target = (tau - mixed * Complex64::from(shift)) / Complex64::from(1.0 - shift);
        Self {
            tau,
            n,
            m,
            shift,
            target: linalg::hermitian_part(&target),
            basis_a: hermitian_basis(n),
            basis_b: hermitian_basis(m),
        }
    }

    fn run<R: Rng + ?Sized>(&self, iterations: usize, rng: &mut R) -> Option<LocalTerms> {
        let (n, m) = (self.n, self.m);
        let d = n * m;
        let target_vec = DVector::from_vec(linalg::hermitian_to_real(&self.target));
        // Atom 0 is the maximally mixed product state; the others are pure
        // products, kept with their vectors for polishing.
        let mut atoms: Vec<(CMat, CMat)> = vec![(
            CMat::identity(n, n) / Complex64::from(n as f64),
            CMat::identity(m, m) / Complex64::from(m as f64),
        )];
        let mut vectors: Vec<(CVec, CVec)> = vec![(CVec::zeros(n), CVec::zeros(m))];
        let mut columns: Vec<Vec<f64>> = vec![linalg::hermitian_to_real(&linalg::kron(&atoms[0].0, &atoms[0].1))];
        let mut best_plain: Option<(f64, LocalTerms)> = None;
        let mut next_polish = 8;

        for it in 0..iterations {
            let weights = nnls(&columns, &target_vec);
            // drop unused atoms, always keeping the mixed atom
            let keep: Vec<usize> = (0..atoms.len())
                .filter(|&k| k == 0 || weights[k] > 0.0)
                .collect();
            atoms = keep.iter().map(|&k| atoms[k].clone()).collect();
            vectors = keep.iter().map(|&k| vectors[k].clone()).collect();
            columns = keep.iter().map(|&k| columns[k].clone()).collect();
            let weights: Vec<f64> = keep.iter().map(|&k| weights[k]).collect();

            let mut approx = CMat::zeros(d, d);
            for (w, (alpha, beta)) in weights.iter().zip(&atoms) {
                approx += linalg::kron(alpha, beta) * Complex64::from(*w);
            }
            let residual = &self.target - &approx;

            if let Some(terms) = self.finish(&weights, &atoms, &residual) {
                let terms = caratheodory_reduce(terms, n, m);
                if local_error(self.tau, &terms, n, m) <= SEARCH_TOL {
                    return Some(terms);
                }
            }
            if self.shift == 0.0 {
                let plain = self.plain_terms(&weights, &atoms);
                let err = local_error(self.tau, &plain, n, m);
                if err <= SEARCH_TOL {
                    return Some(plain);
                }
                if best_plain.as_ref().is_none_or(|(e, _)| err < *e) {
                    best_plain = Some((err, plain));
                }
            }
            if it + 1 == next_polish || it + 1 == iterations {
                next_polish *= 2;
                match self.polish(&weights, &vectors) {
                    Ok(terms) => return Some(terms),
                    Err(fitted) => {
                        // continue from the fitted products
                        atoms.truncate(1);
                        vectors.truncate(1);
                        columns.truncate(1);
                        for (a, b) in fitted {
                            let atom = (linalg::outer(&a), linalg::outer(&b));
                            columns.push(linalg::hermitian_to_real(&linalg::kron(&atom.0, &atom.1)));
                            atoms.push(atom);
                            vectors.push((a, b));
                        }
                        continue;
                    }
                }
            }

            let (mut value, mut a, mut b) = best_product_direction(&residual, n, m, 3, rng);
            if value <= 1e-15 {
                // alternating maximization can stall; widen the search once
                (value, a, b) = best_product_direction(&residual, n, m, 64, rng);
            }
            if value <= 1e-15 {
                if let Ok(terms) = self.polish(&weights, &vectors) {
                    return Some(terms);
                }
                break;
            }
            let atom = (linalg::outer(&a), linalg::outer(&b));
            columns.push(linalg::hermitian_to_real(&linalg::kron(&atom.0, &atom.1)));
            atoms.push(atom);
            vectors.push((a, b));
        }
        best_plain
            .filter(|(e, _)| *e <= SEARCH_TOL)
            .map(|(_, t)| t)
    }

    /// Refines the current support by fitting `τ` directly with pure products.
    /// The mixed atom, if used, is expanded into basis products.
    /// On failure the fitted product vectors are returned instead.
    fn polish(&self, weights: &[f64], vectors: &[(CVec, CVec)]) -> std::result::Result<LocalTerms, Vec<(CVec, CVec)>> {
        let (n, m) = (self.n, self.m);
        let keep = 1.0 - self.shift;
        let mixed = self.shift + keep * weights[0];
        let mut start = Vec::new();
        if mixed > 0.0 {
            let w = mixed / (n * m) as f64;
            for i in 0..n {
                for j in 0..m {
                    let mut a = CVec::zeros(n);
                    let mut b = CVec::zeros(m);
                    a[i] = linalg::ONE;
                    b[j] = linalg::ONE;
                    start.push((w, a, b));
                }
            }
        }
        for (w, (a, b)) in weights.iter().zip(vectors).skip(1) {
            if *w > 0.0 {
                start.push((keep * w, a.clone(), b.clone()));
            }
        }
        let fitted = fit_pure_products(self.tau, n, m, start);
        let total: f64 = fitted.iter().map(|t| t.0).sum();
        let terms: LocalTerms = fitted
            .iter()
            .map(|(w, a, b)| (w / total, linalg::outer(a), linalg::outer(b)))
            .collect();
        let terms = caratheodory_reduce(terms, n, m);
        if local_error(self.tau, &terms, n, m) <= SEARCH_TOL {
            Ok(terms)
        } else {
            Err(fitted.into_iter().map(|(_, a, b)| (a, b)).collect())
        }
    }

    /// The current approximation alone, renormalized and mixed back with the shift.
    fn plain_terms(&self, weights: &[f64], atoms: &[(CMat, CMat)]) -> LocalTerms {
        let total: f64 = weights.iter().sum();
        weights
            .iter()
            .zip(atoms)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, (alpha, beta))| (w / total, alpha.clone(), beta.clone()))
            .collect()
    }

    /// Exact decomposition of `τ` from the current approximation, if the
    /// reserved identity mass covers the residual.
    fn finish(&self, weights: &[f64], atoms: &[(CMat, CMat)], residual: &CMat) -> Option<LocalTerms> {
        let (n, m) = (self.n, self.m);
        let d = (n * m) as f64;
        let keep = 1.0 - self.shift;
        // coefficient of the operator 1⊗1
        let mut identity_mass = (self.shift + keep * weights[0]) / d;
        let scaled = residual * Complex64::from(keep);
        let mut pending = Vec::new();
        let mut needed = 0.0;
        for (k, (g, g_norm)) in self.basis_a.iter().enumerate() {
            for (l, (h, h_norm)) in self.basis_b.iter().enumerate() {
                let r = linalg::trace_of_product(&scaled, &linalg::kron(g, h)).re;
                if k == 0 && l == 0 {
                    identity_mass += r / d.sqrt();
                    continue;
                }
                let coeff = r * g_norm * h_norm;
                if coeff.abs() > 0.0 {
                    needed += coeff.abs();
                    pending.push((coeff, k, l));
                }
            }
        }
        if identity_mass < needed {
            return None;
        }
        let mut terms: LocalTerms = weights
            .iter()
            .zip(atoms)
            .skip(1)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, (alpha, beta))| (keep * w, alpha.clone(), beta.clone()))
            .collect();
        let one_a = CMat::identity(n, n);
        let one_b = CMat::identity(m, m);
        let leftover = identity_mass - needed;
        if leftover > 0.0 {
            terms.push((leftover * d, one_a.clone() / Complex64::from(n as f64), one_b.clone() / Complex64::from(m as f64)));
        }
        for (coeff, k, l) in pending {
            let (g, g_norm) = &self.basis_a[k];
            let (h, h_norm) = &self.basis_b[l];
            let gu = g / Complex64::from(*g_norm);
            let hu = h / Complex64::from(*h_norm);
            let sign = coeff.signum();
            let half = 0.5 * coeff.abs();
            let pairs = [
                (&one_a + &gu, &one_b + &hu * Complex64::from(sign)),
                (&one_a - &gu, &one_b - &hu * Complex64::from(sign)),
            ];
            for (p, q) in pairs {
                let (tp, tq) = (linalg::trace(&p).re, linalg::trace(&q).re);
                let w = half * tp * tq;
                if w > 1e-300 {
                    terms.push((w, p / Complex64::from(tp), q / Complex64::from(tq)));
                }
            }
        }
        let total: f64 = terms.iter().map(|t| t.0).sum();
        terms.iter_mut().for_each(|t| t.0 /= total);
        Some(terms)
    }
}

/// Orthonormal Hermitian basis of `M_n` (Hilbert–Schmidt), identity first,
/// paired with each element's operator norm.
fn hermitian_basis(n: usize) -> Vec<(CMat, f64)> {
    let mut out = Vec::with_capacity(n * n);
    out.push(CMat::identity(n, n) / Complex64::from((n as f64).sqrt()));
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for p in 0..n {
        for q in (p + 1)..n {
            let mut sym = CMat::zeros(n, n);
            sym[(p, q)] = Complex64::from(h);
            sym[(q, p)] = Complex64::from(h);
            out.push(sym);
            let mut anti = CMat::zeros(n, n);
            anti[(p, q)] = Complex64::new(0.0, -h);
            anti[(q, p)] = Complex64::new(0.0, h);
            out.push(anti);
        }
    }
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        let mut diag = CMat::zeros(n, n);
        for i in 0..k {
            diag[(i, i)] = Complex64::from(1.0 / norm);
        }
        diag[(k, k)] = Complex64::from(-(k as f64) / norm);
        out.push(diag);
    }
    out.into_iter()
        .map(|g| {
            let norm = linalg::spectral_norm(&g);
            (g, norm)
        })
        .collect()
}

/// Product unit vectors `(a, b)` approximately maximizing `⟨a⊗b| R |a⊗b⟩`,
/// by alternating top-eigenvector updates from several starts.
fn best_product_direction<R: Rng + ?Sized>(
    r: &CMat,
    n: usize,
    m: usize,
    random_starts: usize,
    rng: &mut R,
) -> (f64, CVec, CVec) {
    let mut starts = Vec::with_capacity(random_starts + 1);
    // leading eigenvector of R, reshaped, gives a good first guess
    let top = top_eigenvector(r);
    let coeff = CMat::from_fn(n, m, |a, b| top[a * m + b]);
    let svd = coeff.svd(false, true);
    if let Some(vt) = svd.v_t {
        let (best, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (k, &s)| if s > acc.1 { (k, s) } else { acc });
        starts.push(vt.row(best).adjoint().into_owned());
    }
    for _ in 0..random_starts {
        starts.push(states::gaussian_vector(m, rng).normalize());
    }
    let mut best = (f64::MIN, CVec::zeros(n), CVec::zeros(m));
    for mut b in starts {
        let mut a = CVec::zeros(n);
        let mut value = f64::MIN;
        for _ in 0..50 {
            let ma = contract_vector_second(r, n, m, &b);
            a = top_eigenvector(&ma);
            let mb = contract_vector_first(r, n, m, &a);
            let (vals, vecs) = linalg::eigh(&mb);
            b = vecs.column(m - 1).into_owned();
            let new_value = vals[m - 1];
            let done = (new_value - value).abs() <= 1e-13;
            value = new_value;
            if done {
                break;
            }
        }
        if value > best.0 {
            best = (value, a, b);
        }
    }
    best
}

/// `(1 ⊗ b)* R (1 ⊗ b)` as an `n × n` matrix.
fn contract_vector_second(r: &CMat, n: usize, m: usize, b: &CVec) -> CMat {
    CMat::from_fn(n, n, |a, ap| {
        let mut acc = ZERO;
        for x in 0..m {
            for y in 0..m {
                acc += b[x].conj() * r[(a * m + x, ap * m + y)] * b[y];
            }
        }
        acc
    })
}

/// `(a ⊗ 1)* R (a ⊗ 1)` as an `m × m` matrix.
fn contract_vector_first(r: &CMat, n: usize, m: usize, a: &CVec) -> CMat {
    CMat::from_fn(m, m, |b, bp| {
        let mut acc = ZERO;
        for x in 0..n {
            for y in 0..n {
                acc += a[x].conj() * r[(x * m + b, y * m + bp)] * a[y];
            }
        }
        acc
    })
}

/// Levenberg–Marquardt on `‖τ − Σ_k (a_k a_k*) ⊗ (b_k b_k*)‖_F` over the
/// vectors, from weighted unit vectors `(w_k, a_k, b_k)`.
/// Returns weights with unit vectors.
fn fit_pure_products(tau: &CMat, n: usize, m: usize, start: Vec<(f64, CVec, CVec)>) -> Vec<(f64, CVec, CVec)> {
    let d = n * m;
    let k = start.len();
    let per = 2 * (n + m);
    // real parameters: Re a, Im a, Re b, Im b for each term
    let mut params = DVector::zeros(per * k);
    for (t, (w, a, b)) in start.iter().enumerate() {
        let s = w.sqrt().sqrt();
        for i in 0..n {
            params[t * per + i] = s * a[i].re;
            params[t * per + n + i] = s * a[i].im;
        }
        for j in 0..m {
            params[t * per + 2 * n + j] = s * b[j].re;
            params[t * per + 2 * n + m + j] = s * b[j].im;
        }
    }
    let unpack = |p: &DVector<f64>, t: usize| -> (CVec, CVec) {
        let a = CVec::from_fn(n, |i, _| Complex64::new(p[t * per + i], p[t * per + n + i]));
        let b = CVec::from_fn(m, |j, _| Complex64::new(p[t * per + 2 * n + j], p[t * per + 2 * n + m + j]));
        (a, b)
    };
    let residual = |p: &DVector<f64>| -> DVector<f64> {
        let mut acc = tau.clone();
        for t in 0..k {
            let (a, b) = unpack(p, t);
            acc -= linalg::kron(&linalg::outer(&a), &linalg::outer(&b));
        }
        DVector::from_vec(linalg::hermitian_to_real(&acc))
    };

    let mut r = residual(&params);
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    let mut history = Vec::new();
    for it in 0..200 {
        if cost <= 1e-28 || (it >= 20 && cost > 0.5 * history[it - 20]) {
            break;
        }
        history.push(cost);
        // Jacobian of the residual, one column per real parameter
        let mut jac = DMatrix::zeros(d * d, per * k);
        for t in 0..k {
            let (a, b) = unpack(&params, t);
            let (pa, pb) = (linalg::outer(&a), linalg::outer(&b));
            for i in 0..(n + m) {
                let on_a = i < n;
                let len = if on_a { n } else { m };
                let idx = if on_a { i } else { i - n };
                let v = if on_a { &a } else { &b };
                for imag in [false, true] {
                    let mut e = CVec::zeros(len);
                    e[idx] = if imag { Complex64::i() } else { linalg::ONE };
                    let dv = &e * v.adjoint() + v * e.adjoint();
                    let block = if on_a { linalg::kron(&dv, &pb) } else { linalg::kron(&pa, &dv) };
                    let col = linalg::hermitian_to_real(&block);
                    let c = t * per + if on_a { 0 } else { 2 * n } + if imag { len } else { 0 } + idx;
                    for (row, x) in col.into_iter().enumerate() {
                        jac[(row, c)] = -x;
                    }
                }
            }
        }
        // Gauss–Newton with a truncated pseudo-inverse, backtracking; damped
        // steps only when that fails
        let mut improved = false;
        let svd = jac.clone().svd(true, true);
        let cutoff = 1e-10 * svd.singular_values.max();
        if let Ok(gn) = svd.solve(&r, cutoff) {
            let mut alpha = 1.0;
            for _ in 0..8 {
                let trial = &params - &gn * alpha;
                let r_trial = residual(&trial);
                let c_trial = r_trial.norm_squared();
                if c_trial < cost {
                    params = trial;
                    r = r_trial;
                    cost = c_trial;
                    improved = true;
                    break;
                }
                alpha *= 0.5;
            }
        }
        if !improved {
            let jjt = &jac * jac.transpose();
            while mu < 1e12 {
                let mut sys = jjt.clone();
                for i in 0..sys.nrows() {
                    sys[(i, i)] += mu;
                }
                let Some(ch) = sys.cholesky() else {
                    mu *= 10.0;
                    continue;
                };
                let step = -(jac.transpose() * ch.solve(&r));
                let trial = &params + step;
                let r_trial = residual(&trial);
                let c_trial = r_trial.norm_squared();
                if c_trial < cost {
                    params = trial;
                    r = r_trial;
                    cost = c_trial;
                    mu = (mu / 3.0).max(1e-15);
                    improved = true;
                    break;
                }
                mu *= 4.0;
            }
        }
        if !improved {
            break;
        }
    }

    (0..k)
        .filter_map(|t| {
            let (a, b) = unpack(&params, t);
            let (na, nb) = (a.norm(), b.norm());
            let w = (na * nb).powi(2);
            (w > 1e-300).then(|| (w, a / Complex64::from(na), b / Complex64::from(nb)))
        })
        .collect()
}

/// Lawson–Hanson nonnegative least squares: `min ‖A w − t‖, w ≥ 0`, with the
/// columns of `A` given as `cols`.
fn nnls(cols: &[Vec<f64>], target: &DVector<f64>) -> Vec<f64> {
    let k = cols.len();
    let rows = target.len();
    let a = DMatrix::from_fn(rows, k, |r, c| cols[c][r]);
    let gram = a.transpose() * &a;
    let at_t = a.transpose() * target;
    let mut x = vec![0.0; k];
    let mut passive = vec![false; k];
    let tol = 1e-14;
    let solve = |idx: &[usize]| -> Option<DVector<f64>> {
        let g = DMatrix::from_fn(idx.len(), idx.len(), |r, c| gram[(idx[r], idx[c])]);
        let rhs = DVector::from_fn(idx.len(), |r, _| at_t[idx[r]]);
        if let Some(ch) = g.clone().cholesky() {
            let sol = ch.solve(&rhs);
            if sol.iter().all(|v| v.is_finite()) {
                return Some(sol);
            }
        }
        let sub = DMatrix::from_fn(rows, idx.len(), |r, c| a[(r, idx[c])]);
        sub.svd(true, true).solve(target, 1e-14).ok()
    };
    for _ in 0..(3 * k + 10) {
        let xv = DVector::from_column_slice(&x);
        let grad = &at_t - &gram * &xv;
        let pick = (0..k)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
        let Some(j) = pick else { break };
        if grad[j] <= tol {
            break;
        }
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..k).filter(|&i| passive[i]).collect();
            let Some(sol) = solve(&idx) else { return x };
            if sol.iter().all(|&v| v > 0.0) {
                for (c, &i) in idx.iter().enumerate() {
                    x[i] = sol[c];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (c, &i) in idx.iter().enumerate() {
                if sol[c] <= 0.0 {
                    alpha = alpha.min(x[i] / (x[i] - sol[c]));
                }
            }
            for (c, &i) in idx.iter().enumerate() {
                x[i] += alpha * (sol[c] - x[i]);
                if x[i] <= tol {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            if idx.iter().all(|&i| !passive[i]) {
                break;
            }
        }
    }
    x
}

/// Reduces a convex combination of product states to at most `d²` terms
/// (Carathéodory), keeping the represented state fixed.
fn caratheodory_reduce(mut terms: LocalTerms, n: usize, m: usize) -> LocalTerms {
    let d = n * m;
    let cap = d * d;
    let vecs: Vec<Vec<f64>> = terms
        .iter()
        .map(|(_, alpha, beta)| linalg::hermitian_to_real(&linalg::kron(alpha, beta)))
        .collect();
    let mut vecs = vecs;
    while terms.len() > cap {
        let k = cap + 1;
        let a = DMatrix::from_fn(cap, k, |r, c| vecs[c][r]);
        let gram = a.transpose() * &a;
        let eig = SymmetricEigen::new(gram);
        let (min_idx, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        let mut v: Vec<f64> = eig.eigenvectors.column(min_idx).iter().copied().collect();
        if v.iter().all(|&x| x <= 0.0) {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let mut alpha = f64::INFINITY;
        let mut drop = 0;
        for (i, &vi) in v.iter().enumerate() {
            if vi > 1e-12 && terms[i].0 / vi < alpha {
                alpha = terms[i].0 / vi;
                drop = i;
            }
        }
        if !alpha.is_finite() {
            break;
        }
        for (i, &vi) in v.iter().enumerate() {
            terms[i].0 = (terms[i].0 - alpha * vi).max(0.0);
        }
        terms[drop].0 = 0.0;
        let mut i = 0;
        while i < terms.len() {
            if terms[i].0 <= 0.0 {
                terms.remove(i);
                vecs.remove(i);
            } else {
                i += 1;
            }
        }
    }
    let total: f64 = terms.iter().map(|t| t.0).sum();
    terms.iter_mut().for_each(|t| t.0 /= total);
    terms
}
