//! Finite-dimensional *-algebras in multi-matrix form `M_{n_1} ⊕ … ⊕ M_{n_k}`.
//!
//! Every finite-dimensional C*-algebra is isomorphic to such a direct sum, so an
//! algebra is fully described by its ordered block dimensions. Tensor products are
//! built with the Kronecker construction and remember their two factors, which is
//! what restrictions and partial contractions need later on.
//!
//! Elements of a tensor product `A ⊗ B` are stored block by block: block `(i, j)`
//! (lexicographic order) acts on `C^{n_i} ⊗ C^{m_j}` with Kronecker indexing.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ONE, ZERO};

/// Commutator tolerance used by [`commutes_on_generators`].
pub const COMMUTATOR_TOL: f64 = 1e-12;

#[derive(Debug, PartialEq, Eq, Hash)]
struct AlgebraInner {
    block_dims: Vec<usize>,
    factors: Option<(FdAlgebra, FdAlgebra)>,
}

/// A finite-dimensional *-algebra `⊕_k M_{n_k}(C)`.
///
/// Cloning is cheap; equality is structural and includes the recorded tensor
/// factorization, so `M2 ⊗ M2` and `M4` are different algebras.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FdAlgebra {
    inner: Arc<AlgebraInner>,
}

/// Which side of a tensor product to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Factor {
    A,
    B,
}

impl FdAlgebra {
    /// Direct sum of full matrix blocks with the given dimensions.
    pub fn from_blocks(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::EmptyAlgebra);
        }
        if let Some(&bad) = block_dims.iter().find(|&&d| d == 0) {
            return Err(Error::InvalidDimension(bad));
        }
        Ok(Self::unchecked(block_dims, None))
    }

    fn unchecked(block_dims: Vec<usize>, factors: Option<(FdAlgebra, FdAlgebra)>) -> Self {
        Self {
            inner: Arc::new(AlgebraInner { block_dims, factors }),
        }
    }

    /// `M_n(C)`.
    pub fn full(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        Ok(Self::unchecked(vec![n], None))
    }

    /// `D_m(C)`, the diagonal matrices, i.e. functions on `m` points.
    pub fn commutative(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDimension(0));
        }
        Ok(Self::unchecked(vec![1; m], None))
    }

    /// Tensor product; block dimensions are all `n_i * m_j` in lexicographic order.
    pub fn tensor(a: &FdAlgebra, b: &FdAlgebra) -> Self {
        let dims = a
            .block_dims()
            .iter()
            .flat_map(|&n| b.block_dims().iter().map(move |&m| n * m))
            .collect();
        Self::unchecked(dims, Some((a.clone(), b.clone())))
    }

    /// Direct sum; the result carries no tensor factorization.
    pub fn direct_sum(a: &FdAlgebra, b: &FdAlgebra) -> Self {
        let mut dims = a.block_dims().to_vec();
        dims.extend_from_slice(b.block_dims());
        Self::unchecked(dims, None)
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.inner.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.inner.block_dims.len()
    }

    /// Dimension of the representation space, `Σ n_i`.
    pub fn total_dim(&self) -> usize {
        self.inner.block_dims.iter().sum()
    }

    /// Dimension of the algebra as a vector space, `Σ n_i²`.
    pub fn algebra_dim(&self) -> usize {
        self.inner.block_dims.iter().map(|n| n * n).sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.inner.block_dims.iter().all(|&d| d == 1)
    }

    pub fn factors(&self) -> Option<(&FdAlgebra, &FdAlgebra)> {
        self.inner.factors.as_ref().map(|(a, b)| (a, b))
    }

    pub(crate) fn require_factors(&self) -> Result<(&FdAlgebra, &FdAlgebra)> {
        self.factors()
            .ok_or_else(|| Error::MissingFactorization(self.to_string()))
    }

    /// Offset of each block on the representation space.
    pub fn block_offsets(&self) -> Vec<usize> {
        self.inner
            .block_dims
            .iter()
            .scan(0, |acc, &d| {
                let off = *acc;
                *acc += d;
                Some(off)
            })
            .collect()
    }

    pub(crate) fn ensure_same(&self, other: &FdAlgebra) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch {
                expected: self.to_string(),
                found: other.to_string(),
            })
        }
    }
}

impl fmt::Display for FdAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((a, b)) = self.factors() {
            let wrap = |x: &FdAlgebra| {
                let s = x.to_string();
                if s.contains('+') {
                    format!("({s})")
                } else {
                    s
                }
            };
            return write!(f, "{}x{}", wrap(a), wrap(b));
        }
        let dims = self.block_dims();
        let mut parts = Vec::new();
        let mut i = 0;
        while i < dims.len() {
            if dims[i] == 1 {
                let start = i;
                while i < dims.len() && dims[i] == 1 {
                    i += 1;
                }
                parts.push(format!("D{}", i - start));
            } else {
                parts.push(format!("M{}", dims[i]));
                i += 1;
            }
        }
        write!(f, "{}", parts.join("+"))
    }
}

/// Shorthand grammar: `M<n>` full block, `D<n>` commutative, `+` direct sum,
/// `x` tensor product (binds tighter than `+`), parentheses for grouping.
impl FromStr for FdAlgebra {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut parser = ShorthandParser { chars, pos: 0 };
        let alg = parser.sum()?;
        if parser.pos != parser.chars.len() {
            return Err(Error::Parse(format!(
                "unexpected '{}' at position {} in algebra shorthand {s:?}",
                parser.chars[parser.pos], parser.pos
            )));
        }
        Ok(alg)
    }
}

struct ShorthandParser {
    chars: Vec<char>,
    pos: usize,
}

impl ShorthandParser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<FdAlgebra> {
        let mut acc = self.product()?;
        while self.peek() == Some('+') {
            self.pos += 1;
            let rhs = self.product()?;
            acc = FdAlgebra::direct_sum(&acc, &rhs);
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<FdAlgebra> {
        let mut acc = self.atom()?;
        while matches!(self.peek(), Some('x') | Some('X') | Some('⊗')) {
            self.pos += 1;
            let rhs = self.atom()?;
            acc = FdAlgebra::tensor(&acc, &rhs);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<FdAlgebra> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(Error::Parse("missing ')' in algebra shorthand".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(kind @ ('M' | 'm' | 'D' | 'd')) => {
                self.pos += 1;
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let digits: String = self.chars[start..self.pos].iter().collect();
                let n: usize = digits.parse().map_err(|_| {
                    Error::Parse(format!("expected a dimension after '{kind}' in algebra shorthand"))
                })?;
                if kind.eq_ignore_ascii_case(&'M') {
                    FdAlgebra::full(n)
                } else {
                    FdAlgebra::commutative(n)
                }
            }
            Some(other) => Err(Error::Parse(format!(
                "unexpected '{other}' in algebra shorthand (expected M<n>, D<n> or '(')"
            ))),
            None => Err(Error::Parse("algebra shorthand ended early".into())),
        }
    }
}

/// Exhaustive commutator check on the matrix units of every block.
///
/// Agrees with [`FdAlgebra::is_commutative`]; kept separate so the structural
/// answer can be cross-checked by direct matrix computation.
pub fn commutes_on_generators(alg: &FdAlgebra) -> bool {
    let mut units = Vec::new();
    for (block, &n) in alg.block_dims().iter().enumerate() {
        for p in 0..n {
            for q in 0..n {
                units.push(AlgebraElement::matrix_unit(alg, block, p, q).expect("in range"));
            }
        }
    }
    for (i, x) in units.iter().enumerate() {
        for y in &units[i + 1..] {
            let xy = x.multiply(y).expect("same owner");
            let yx = y.multiply(x).expect("same owner");
            if xy.sub(&yx).expect("same owner").max_abs_entry() > COMMUTATOR_TOL {
                return false;
            }
        }
    }
    true
}

/// A block-diagonal element of an [`FdAlgebra`].
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    owner: FdAlgebra,
    blocks: Vec<CMat>,
}

impl AlgebraElement {
    pub fn new(owner: &FdAlgebra, blocks: Vec<CMat>) -> Result<Self> {
        check_block_shapes(owner, &blocks)?;
        Ok(Self {
            owner: owner.clone(),
            blocks,
        })
    }

    pub(crate) fn from_blocks_unchecked(owner: &FdAlgebra, blocks: Vec<CMat>) -> Self {
        Self {
            owner: owner.clone(),
            blocks,
        }
    }

    pub fn identity(owner: &FdAlgebra) -> Self {
        let blocks = owner
            .block_dims()
            .iter()
            .map(|&n| CMat::identity(n, n))
            .collect();
        Self::from_blocks_unchecked(owner, blocks)
    }

    pub fn zero(owner: &FdAlgebra) -> Self {
        let blocks = owner
            .block_dims()
            .iter()
            .map(|&n| CMat::zeros(n, n))
            .collect();
        Self::from_blocks_unchecked(owner, blocks)
    }

    /// Matrix unit `E_{pq}` of the given block.
    pub fn matrix_unit(owner: &FdAlgebra, block: usize, p: usize, q: usize) -> Result<Self> {
        let n = *owner.block_dims().get(block).ok_or_else(|| {
            Error::InvalidArgument(format!("block {block} out of range for {owner}"))
        })?;
        if p >= n || q >= n {
            return Err(Error::InvalidArgument(format!(
                "matrix unit ({p},{q}) out of range for block of size {n}"
            )));
        }
        let mut x = Self::zero(owner);
        x.blocks[block][(p, q)] = ONE;
        Ok(x)
    }

    /// Builds an element from a full `total_dim × total_dim` matrix, which must
    /// vanish outside the diagonal blocks.
    pub fn from_dense(owner: &FdAlgebra, dense: &CMat) -> Result<Self> {
        let blocks = split_blocks(owner, dense, 0.0)?;
        Ok(Self::from_blocks_unchecked(owner, blocks))
    }

    /// Element acting diagonally on the representation space.
    pub fn diagonal(owner: &FdAlgebra, values: &[Complex64]) -> Result<Self> {
        if values.len() != owner.total_dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} diagonal entries for representation dimension {}",
                values.len(),
                owner.total_dim()
            )));
        }
        let mut dense = CMat::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            dense[(i, i)] = v;
        }
        Self::from_dense(owner, &dense)
    }

    pub fn owner(&self) -> &FdAlgebra {
        &self.owner
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn to_dense(&self) -> CMat {
        join_blocks(&self.owner, &self.blocks)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_blocks_unchecked(
            &self.owner,
            self.blocks.iter().map(|b| b.adjoint()).collect(),
        )
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.owner.ensure_same(&other.owner)?;
        Ok(Self::from_blocks_unchecked(
            &self.owner,
            self.blocks
                .iter()
                .zip(&other.blocks)
                .map(|(x, y)| x * y)
                .collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.owner.ensure_same(&other.owner)?;
        Ok(Self::from_blocks_unchecked(
            &self.owner,
            self.blocks
                .iter()
                .zip(&other.blocks)
                .map(|(x, y)| x + y)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.owner.ensure_same(&other.owner)?;
        Ok(Self::from_blocks_unchecked(
            &self.owner,
            self.blocks
                .iter()
                .zip(&other.blocks)
                .map(|(x, y)| x - y)
                .collect(),
        ))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_blocks_unchecked(
            &self.owner,
            self.blocks.iter().map(|b| b * factor).collect(),
        )
    }

    /// Largest singular value over all blocks.
    pub fn operator_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::spectral_norm)
            .fold(0.0, f64::max)
    }

    pub fn self_adjoint_deviation(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::hermitian_deviation)
            .fold(0.0, f64::max)
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.self_adjoint_deviation() <= tol
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `self ⊗ other` as an element of `tensor(self.owner, other.owner)`.
    pub fn tensor(&self, other: &Self) -> Self {
        let owner = FdAlgebra::tensor(&self.owner, &other.owner);
        let blocks = self
            .blocks
            .iter()
            .flat_map(|x| other.blocks.iter().map(move |y| linalg::kron(x, y)))
            .collect();
        Self::from_blocks_unchecked(&owner, blocks)
    }
}

pub(crate) fn check_block_shapes(owner: &FdAlgebra, blocks: &[CMat]) -> Result<()> {
    if blocks.len() != owner.num_blocks() {
        return Err(Error::ShapeMismatch(format!(
            "{} blocks given for algebra {owner} with {} blocks",
            blocks.len(),
            owner.num_blocks()
        )));
    }
    for (k, (b, &n)) in blocks.iter().zip(owner.block_dims()).enumerate() {
        if b.nrows() != n || b.ncols() != n {
            return Err(Error::ShapeMismatch(format!(
                "block {k} is {}x{}, expected {n}x{n}",
                b.nrows(),
                b.ncols()
            )));
        }
    }
    Ok(())
}

/// Splits a dense matrix into the diagonal blocks of `owner`, rejecting entries
/// outside the blocks larger than `tol`.
pub(crate) fn split_blocks(owner: &FdAlgebra, dense: &CMat, tol: f64) -> Result<Vec<CMat>> {
    let d = owner.total_dim();
    if dense.nrows() != d || dense.ncols() != d {
        return Err(Error::ShapeMismatch(format!(
            "matrix is {}x{}, algebra {owner} acts on dimension {d}",
            dense.nrows(),
            dense.ncols()
        )));
    }
    let offsets = owner.block_offsets();
    let mut block_of = vec![0usize; d];
    for (k, (&off, &n)) in offsets.iter().zip(owner.block_dims()).enumerate() {
        block_of[off..off + n].fill(k);
    }
    for r in 0..d {
        for c in 0..d {
            if block_of[r] != block_of[c] && dense[(r, c)].norm() > tol {
                return Err(Error::ShapeMismatch(format!(
                    "entry ({r},{c}) = {} lies outside the diagonal blocks of {owner}",
                    dense[(r, c)]
                )));
            }
        }
    }
    Ok(offsets
        .iter()
        .zip(owner.block_dims())
        .map(|(&off, &n)| dense.view((off, off), (n, n)).into_owned())
        .collect())
}

pub(crate) fn join_blocks(owner: &FdAlgebra, blocks: &[CMat]) -> CMat {
    let d = owner.total_dim();
    let mut dense = CMat::from_element(d, d, ZERO);
    for (off, b) in owner.block_offsets().into_iter().zip(blocks) {
        let n = b.nrows();
        dense.view_mut((off, off), (n, n)).copy_from(b);
    }
    dense
}
