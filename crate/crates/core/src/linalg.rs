//! Dense complex matrix helpers shared by the algebra, state and optimization code.
//!
//! Matrices on a bipartite space `C^n ⊗ C^m` use the Kronecker index `a * m + b`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(m + m*) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Largest elementwise modulus of `m - m*`.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    eigh(m).0
}

/// `V diag(f(λ)) V*` for the Hermitian part of `m`.
pub fn spectral_map(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (values, vectors) = eigh(m);
    let n = values.len();
    let mut scaled = vectors.clone();
    for (k, &v) in values.iter().enumerate() {
        let fv = f(v);
        for r in 0..n {
            scaled[(r, k)] *= fv;
        }
    }
    scaled * vectors.adjoint()
}

/// Largest singular value, via the top eigenvalue of `m* m`.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    eigvalsh(&gram).last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMat) -> f64 {
    eigvalsh(m).iter().map(|v| v.abs()).sum()
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr(a b)` without forming the product.
pub fn trace_of_product(a: &CMat, b: &CMat) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `Tr_B[rho (1 ⊗ op)]` for `rho` on `C^n ⊗ C^m`; returns an `n × n` matrix.
pub fn contract_second(rho: &CMat, n: usize, m: usize, op: Option<&CMat>) -> CMat {
    let mut out = CMat::zeros(n, n);
    for a in 0..n {
        for ap in 0..n {
            let mut acc = ZERO;
            for b in 0..m {
                match op {
                    None => acc += rho[(a * m + b, ap * m + b)],
                    Some(op) => {
                        for bp in 0..m {
                            acc += rho[(a * m + b, ap * m + bp)] * op[(bp, b)];
                        }
                    }
                }
            }
            out[(a, ap)] = acc;
        }
    }
    out
}

/// `Tr_A[rho (op ⊗ 1)]` for `rho` on `C^n ⊗ C^m`; returns an `m × m` matrix.
pub fn contract_first(rho: &CMat, n: usize, m: usize, op: Option<&CMat>) -> CMat {
    let mut out = CMat::zeros(m, m);
    for b in 0..m {
        for bp in 0..m {
            let mut acc = ZERO;
            for a in 0..n {
                match op {
                    None => acc += rho[(a * m + b, a * m + bp)],
                    Some(op) => {
                        for ap in 0..n {
                            acc += rho[(a * m + b, ap * m + bp)] * op[(ap, a)];
                        }
                    }
                }
            }
            out[(b, bp)] = acc;
        }
    }
    out
}

/// Transpose on the second tensor factor.
pub fn partial_transpose_second(rho: &CMat, n: usize, m: usize) -> CMat {
    CMat::from_fn(n * m, n * m, |r, col| {
        let (a, b) = (r / m, r % m);
        let (ap, bp) = (col / m, col % m);
        rho[(a * m + bp, ap * m + b)]
    })
}

/// Rank-one projector `|v><v|`.
pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// Real vectorisation of a Hermitian matrix with `<x, y>_HS = vec(x) · vec(y)`.
pub fn hermitian_to_real(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n);
    let root2 = std::f64::consts::SQRT_2;
    for i in 0..n {
        out.push(m[(i, i)].re);
        for j in (i + 1)..n {
            out.push(root2 * m[(i, j)].re);
            out.push(root2 * m[(i, j)].im);
        }
    }
    out
}

/// Frobenius norm.
pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
