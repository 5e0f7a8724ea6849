//! Lanczos eigensolver with full reorthogonalization for the lowest
//! eigenpairs of a Hermitian operator given as a matvec closure.

use std::ops::{Add, AddAssign, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Field over which Krylov vectors live.
pub trait KrylovScalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + AddAssign + Send + Sync + 'static
{
    fn zero() -> Self;
    fn from_re(v: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn norm_sqr(self) -> f64;
}

impl KrylovScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_re(v: f64) -> Self {
        v
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
}

impl KrylovScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_re(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
}

pub fn dot<T: KrylovScalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.conj() * *y)
}

pub fn norm<T: KrylovScalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy<T: KrylovScalar>(alpha: T, x: &[T], y: &mut [T]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * *xi);
}

fn scale<T: KrylovScalar>(x: &mut [T], s: f64) {
    let s = T::from_re(s);
    x.iter_mut().for_each(|v| *v = *v * s);
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Number of lowest eigenpairs wanted.
    pub n_eigen: usize,
    /// Krylov subspace size per cycle.
    pub max_krylov: usize,
    /// Number of restart cycles.
    pub max_restarts: usize,
    /// Residual norm target for each wanted pair.
    pub tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { n_eigen: 1, max_krylov: 120, max_restarts: 20, tol: 1e-10 }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair<T> {
    pub value: f64,
    pub vector: Vec<T>,
    /// Estimated residual `|A v - value v|`.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct LanczosResult<T> {
    pub pairs: Vec<EigenPair<T>>,
    pub converged: bool,
    pub matvecs: usize,
}

/// Lowest eigenpairs of the operator `apply` (writes `A x` into the second
/// argument), starting from `start`.
///
/// Each cycle builds a fully reorthogonalized Krylov basis; restarts seed the
/// next cycle with the sum of the current Ritz vectors.
pub fn lanczos<T, F>(mut apply: F, start: &[T], opts: &LanczosOptions) -> LanczosResult<T>
where
    T: KrylovScalar,
    F: FnMut(&[T], &mut [T]),
{
    let dim = start.len();
    let mut v0 = start.to_vec();
    let nrm = norm(&v0);
    assert!(nrm > 0.0, "Lanczos start vector must be non-zero");
    scale(&mut v0, 1.0 / nrm);
    let wanted = opts.n_eigen.max(1).min(dim);
    let krylov_cap = opts.max_krylov.max(wanted + 1).min(dim);
    let mut matvecs = 0;
    let mut best: Option<Vec<EigenPair<T>>> = None;

    for _cycle in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<T>> = vec![v0.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut w = vec![T::zero(); dim];
        let mut exhausted = false;
        let mut scale_est: f64 = 0.0;
        loop {
            let j = basis.len() - 1;
            apply(&basis[j], &mut w);
            matvecs += 1;
            let alpha = dot(&basis[j], &w).re();
            alphas.push(alpha);
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &w);
                    axpy(T::from_re(0.0) - c, b, &mut w);
                }
            }
            let beta = norm(&w);
            scale_est = scale_est.max(alpha.abs()).max(beta);
            // breakdown: the Krylov space is invariant up to rounding
            let tiny = beta <= 1e-10 * scale_est.max(1e-300);
            let m = alphas.len();
            let check = m >= wanted && (m % 5 == 0 || m == krylov_cap || tiny);
            if tiny {
                exhausted = true;
            }
            if check || exhausted {
                let (vals, vecs) = tridiagonal_eigen(&alphas, &betas);
                let ok = (0..wanted.min(m)).all(|k| (beta * vecs[(m - 1, k)]).abs() < opts.tol);
                if (ok && m >= wanted) || exhausted || m >= krylov_cap {
                    let pairs = ritz_pairs(&basis, &vals, &vecs, beta, wanted.min(m));
                    let converged = ok || exhausted;
                    if converged {
                        return LanczosResult { pairs, converged: true, matvecs };
                    }
                    // restart from the combined Ritz vectors
                    let mut next = vec![T::zero(); dim];
                    for p in &pairs {
                        axpy(T::from_re(1.0), &p.vector, &mut next);
                    }
                    let nn = norm(&next);
                    scale(&mut next, 1.0 / nn);
                    v0 = next;
                    best = Some(pairs);
                    break;
                }
            }
            betas.push(beta);
            let mut next = w.clone();
            scale(&mut next, 1.0 / beta);
            basis.push(next);
        }
    }
    LanczosResult { pairs: best.unwrap_or_default(), converged: false, matvecs }
}

fn tridiagonal_eigen(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alphas.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

fn ritz_pairs<T: KrylovScalar>(
    basis: &[Vec<T>],
    vals: &[f64],
    vecs: &DMatrix<f64>,
    beta: f64,
    count: usize,
) -> Vec<EigenPair<T>> {
    let m = vals.len();
    let dim = basis[0].len();
    (0..count)
        .map(|k| {
            let mut v = vec![T::zero(); dim];
            for (i, b) in basis.iter().take(m).enumerate() {
                axpy(T::from_re(vecs[(i, k)]), b, &mut v);
            }
            let n = norm(&v);
            scale(&mut v, 1.0 / n);
            EigenPair { value: vals[k], vector: v, residual: (beta * vecs[(m - 1, k)]).abs() }
        })
        .collect()
}
