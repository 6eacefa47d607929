//! Reference computations for the integration tests, written independently of
//! the library's numerics: plain index loops and a Jacobi eigenvalue solver.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use raggio_kit::algebra::{AlgebraElement, FdAlgebra};
use raggio_kit::linalg::CMat;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn full(n: usize) -> FdAlgebra {
    FdAlgebra::full(n).unwrap()
}

pub fn diag(m: usize) -> FdAlgebra {
    FdAlgebra::commutative(m).unwrap()
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(n, n, |_, _| gaussian(rng))
}

pub fn random_element(owner: &FdAlgebra, rng: &mut ChaCha8Rng) -> AlgebraElement {
    let blocks = owner.block_dims().iter().map(|&n| random_matrix(n, rng)).collect();
    AlgebraElement::new(owner, blocks).unwrap()
}

/// Eigenvalues of a real symmetric matrix (row-major), ascending, by cyclic Jacobi.
pub fn jacobi_symmetric(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    let total: f64 = a.iter().map(|x| x * x).sum();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += a[p * n + q] * a[p * n + q];
                }
            }
        }
        if off <= 1e-30 * total {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = cs * akp - sn * akq;
                    a[k * n + q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = cs * apk - sn * aqk;
                    a[q * n + k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Eigenvalues of a Hermitian matrix, ascending, via the real embedding
/// `[[Re, -Im], [Im, Re]]` whose spectrum repeats each eigenvalue twice.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let n = h.nrows();
    let m = 2 * n;
    let mut a = vec![0.0; m * m];
    for r in 0..n {
        for col in 0..n {
            let z = 0.5 * (h[(r, col)] + h[(col, r)].conj());
            a[r * m + col] = z.re;
            a[r * m + col + n] = -z.im;
            a[(r + n) * m + col] = z.im;
            a[(r + n) * m + col + n] = z.re;
        }
    }
    jacobi_symmetric(a, m).into_iter().step_by(2).collect()
}

pub fn min_eigenvalue(h: &CMat) -> f64 {
    hermitian_eigenvalues(h)[0]
}

/// Largest singular value, as the square root of the top eigenvalue of `x* x`.
pub fn operator_norm(x: &CMat) -> f64 {
    let n = x.ncols();
    let mut g = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = c(0.0, 0.0);
            for k in 0..x.nrows() {
                acc += x[(k, i)].conj() * x[(k, j)];
            }
            g[(i, j)] = acc;
        }
    }
    hermitian_eigenvalues(&g).last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    let mut out = CMat::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// `Tr_B` of an operator on `C^n ⊗ C^m`.
pub fn partial_trace_b(rho: &CMat, n: usize, m: usize) -> CMat {
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = c(0.0, 0.0);
            for k in 0..m {
                acc += rho[(i * m + k, j * m + k)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// `Tr_A` of an operator on `C^n ⊗ C^m`.
pub fn partial_trace_a(rho: &CMat, n: usize, m: usize) -> CMat {
    let mut out = CMat::zeros(m, m);
    for k in 0..m {
        for l in 0..m {
            let mut acc = c(0.0, 0.0);
            for i in 0..n {
                acc += rho[(i * m + k, i * m + l)];
            }
            out[(k, l)] = acc;
        }
    }
    out
}

/// Transpose on the second factor of `C^n ⊗ C^m`.
pub fn partial_transpose_b(rho: &CMat, n: usize, m: usize) -> CMat {
    let mut out = CMat::zeros(n * m, n * m);
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[(i * m + k, j * m + l)] = rho[(i * m + l, j * m + k)];
                }
            }
        }
    }
    out
}

pub fn trace(x: &CMat) -> Complex64 {
    (0..x.nrows()).map(|i| x[(i, i)]).sum()
}

pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    let mut out = CMat::zeros(a.nrows(), b.ncols());
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut acc = c(0.0, 0.0);
            for k in 0..a.ncols() {
                acc += a[(i, k)] * b[(k, j)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Half the sum of absolute eigenvalues of `a − b` (both Hermitian).
pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    0.5 * hermitian_eigenvalues(&(a - b)).iter().map(|x| x.abs()).sum::<f64>()
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// Werner density matrix `p |s⟩⟨s| + (1 − p) 1/4` written out entrywise.
pub fn werner_matrix(p: f64) -> CMat {
    let q = (1.0 - p) / 4.0;
    let mut rho = CMat::zeros(4, 4);
    rho[(0, 0)] = c(q, 0.0);
    rho[(3, 3)] = c(q, 0.0);
    rho[(1, 1)] = c(q + p / 2.0, 0.0);
    rho[(2, 2)] = c(q + p / 2.0, 0.0);
    rho[(1, 2)] = c(-p / 2.0, 0.0);
    rho[(2, 1)] = c(-p / 2.0, 0.0);
    rho
}
