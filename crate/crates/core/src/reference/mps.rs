//! Open-boundary matrix product states with real site tensors `(Dl, 2, Dr)`.

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayD, IxDyn};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tensor::{permute, tensordot};
use crate::error::{QidaError, Result};
use crate::state::{DenseState, DENSE_QUBIT_CAP};

#[derive(Clone, Debug)]
pub struct Mps {
    pub sites: Vec<ArrayD<f64>>,
}

pub(crate) fn to_dmatrix(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub(crate) fn from_dmatrix(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

fn as_matrix(t: &ArrayD<f64>, rows: usize) -> Array2<f64> {
    let cols = t.len() / rows;
    Array2::from_shape_vec((rows, cols), t.iter().copied().collect()).expect("size")
}

fn ones2() -> ArrayD<f64> {
    ArrayD::from_elem(IxDyn(&[1, 1]), 1.0)
}

impl Mps {
    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites.iter().take(self.sites.len().saturating_sub(1)).map(|s| s.shape()[2]).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Product state; `up[k]` selects |0> at site `k`.
    pub fn product(up: &[bool]) -> Self {
        let sites = up
            .iter()
            .map(|&u| {
                let mut t = ArrayD::zeros(IxDyn(&[1, 2, 1]));
                t[[0, if u { 0 } else { 1 }, 0]] = 1.0;
                t
            })
            .collect();
        Mps { sites }
    }

    /// Normalized `(|a> + sign |b>)` for two orthogonal product states, bond dimension 2.
    pub fn product_pair(a: &[bool], b: &[bool], sign: f64) -> Result<Self> {
        if a.len() != b.len() || a.len() < 2 {
            return Err(QidaError::DimensionMismatch { expected: a.len(), got: b.len() });
        }
        let n = a.len();
        let idx = |u: bool| if u { 0 } else { 1 };
        let mut sites = Vec::with_capacity(n);
        for k in 0..n {
            let (dl, dr) = (if k == 0 { 1 } else { 2 }, if k == n - 1 { 1 } else { 2 });
            let mut t = ArrayD::zeros(IxDyn(&[dl, 2, dr]));
            if k == 0 {
                t[[0, idx(a[k]), 0]] = 1.0;
                t[[0, idx(b[k]), 1]] += 1.0;
            } else if k == n - 1 {
                t[[0, idx(a[k]), 0]] = 1.0;
                t[[1, idx(b[k]), 0]] += sign;
            } else {
                t[[0, idx(a[k]), 0]] = 1.0;
                t[[1, idx(b[k]), 1]] = 1.0;
            }
            sites.push(t);
        }
        let mut m = Mps { sites };
        m.right_canonicalize();
        Ok(m)
    }

    /// Random state with bond dimension at most `chi`, right-canonical.
    pub fn random(n: usize, chi: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sites = Vec::with_capacity(n);
        for k in 0..n {
            let dl = max_dim(k, n).min(chi);
            let dr = max_dim(k + 1, n).min(chi);
            let t = ArrayD::from_shape_fn(IxDyn(&[dl, 2, dr]), |_| rng.random_range(-1.0..1.0));
            sites.push(t);
        }
        let mut m = Mps { sites };
        m.right_canonicalize();
        m
    }

    /// Brings sites `1..n` into right-canonical form and normalizes site 0.
    pub fn right_canonicalize(&mut self) {
        let n = self.sites.len();
        for k in (1..n).rev() {
            let (dl, dr) = (self.sites[k].shape()[0], self.sites[k].shape()[2]);
            let m = to_dmatrix(&as_matrix(&self.sites[k], dl));
            let qr = m.transpose().qr();
            let q = qr.q(); // (2 dr, r)
            let r = qr.r(); // (r, dl)
            let rank = q.ncols();
            let qt = from_dmatrix(&q.transpose());
            self.sites[k] = ArrayD::from_shape_vec(IxDyn(&[rank, 2, dr]), qt.iter().copied().collect()).expect("size");
            let rt = from_dmatrix(&r.transpose()).into_dyn(); // (dl, rank)
            self.sites[k - 1] = tensordot(&self.sites[k - 1], &rt, &[2], &[0]);
        }
        let nrm = self.sites[0].iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 0.0 {
            self.sites[0].mapv_inplace(|x| x / nrm);
        }
    }

    pub fn norm(&self) -> f64 {
        let mut l = ones2();
        for a in &self.sites {
            l = transfer_left(&l, a);
        }
        l[[0, 0]].sqrt()
    }

    pub fn to_dense(&self) -> Result<DenseState> {
        let n = self.sites.len();
        if n > DENSE_QUBIT_CAP {
            return Err(QidaError::DimensionCap { n_qubits: n, limit: DENSE_QUBIT_CAP });
        }
        let mut v = as_matrix(&self.sites[0], 2); // (2, D1), Dl = 1
        for a in &self.sites[1..] {
            let dl = a.shape()[0];
            let am = as_matrix(a, dl);
            let p = v.dot(&am); // (M, 2 Dr)
            let rows = p.nrows() * 2;
            v = Array2::from_shape_vec((rows, p.len() / rows), p.iter().copied().collect()).expect("size");
        }
        let amps: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        DenseState::from_amplitudes(amps)
    }

    fn right_envs(&self) -> Vec<ArrayD<f64>> {
        let n = self.sites.len();
        let mut r = vec![ones2(); n + 1];
        for k in (0..n).rev() {
            r[k] = transfer_right(&r[k + 1], &self.sites[k]);
        }
        r
    }

    fn left_envs(&self) -> Vec<ArrayD<f64>> {
        let n = self.sites.len();
        let mut l = vec![ones2(); n + 1];
        for k in 0..n {
            l[k + 1] = transfer_left(&l[k], &self.sites[k]);
        }
        l
    }

    /// Single-site reduced density matrix, trace normalized.
    pub fn rdm_single(&self, i: usize) -> Result<[[f64; 2]; 2]> {
        self.check_site(i)?;
        let l = self.left_envs();
        let r = self.right_envs();
        let y = open_site(&l[i], &self.sites[i]); // (sb, sk, b, k)
        let z = tensordot(&y, &r[i + 1], &[2, 3], &[0, 1]); // (sb, sk)
        let tr = z[[0, 0]] + z[[1, 1]];
        let mut out = [[0.0; 2]; 2];
        for (a, row) in out.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = z[[b, a]] / tr;
            }
        }
        Ok(out)
    }

    /// Two-site reduced density matrix with basis index `2 s_i + s_j`.
    pub fn rdm_pair(&self, i: usize, j: usize) -> Result<[[f64; 4]; 4]> {
        self.check_site(i)?;
        self.check_site(j)?;
        if i == j {
            return Err(QidaError::SameSite(i));
        }
        let (i, j, swapped) = if i < j { (i, j, false) } else { (j, i, true) };
        let l = self.left_envs();
        let r = self.right_envs();
        self.rdm_pair_with(i, j, &l[i], &r[j + 1], swapped)
    }

    fn rdm_pair_with(&self, i: usize, j: usize, l: &ArrayD<f64>, r: &ArrayD<f64>, swapped: bool) -> Result<[[f64; 4]; 4]> {
        let mut e = open_site(l, &self.sites[i]);
        for k in i + 1..j {
            let a = &self.sites[k];
            let x = tensordot(&e, a, &[3], &[0]); // (sb, sk, b, s, k')
            let y = tensordot(&x, a, &[2, 3], &[0, 1]); // (sb, sk, k', b')
            e = permute(&y, &[0, 1, 3, 2]);
        }
        let a = &self.sites[j];
        let x = tensordot(&e, a, &[3], &[0]); // (sb, sk, b, tk, k')
        let y = tensordot(&x, a, &[2], &[0]); // (sb, sk, tk, k', tb, b')
        let z = tensordot(&y, r, &[5, 3], &[0, 1]); // (sb, sk, tk, tb)
        let mut out = [[0.0; 4]; 4];
        let mut tr = 0.0;
        for sk in 0..2 {
            for tk in 0..2 {
                for sb in 0..2 {
                    for tb in 0..2 {
                        let (row, col) = if swapped { (2 * tk + sk, 2 * tb + sb) } else { (2 * sk + tk, 2 * sb + tb) };
                        out[row][col] = z[[sb, sk, tk, tb]];
                    }
                }
                tr += z[[sk, sk, tk, tk]];
            }
        }
        if tr.abs() < 1e-300 || !tr.is_finite() {
            return Err(QidaError::BadTrace(tr));
        }
        out.iter_mut().flatten().for_each(|v| *v /= tr);
        Ok(out)
    }

    /// All pair density matrices `(i, j)` with `i < j`, sharing environments.
    pub fn all_pair_rdms(&self) -> Result<Vec<((usize, usize), [[f64; 4]; 4])>> {
        let n = self.sites.len();
        let l = self.left_envs();
        let r = self.right_envs();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(((i, j), self.rdm_pair_with(i, j, &l[i], &r[j + 1], false)?));
            }
        }
        Ok(out)
    }

    fn check_site(&self, q: usize) -> Result<()> {
        if q >= self.sites.len() {
            return Err(QidaError::QubitOutOfRange { qubit: q, n_qubits: self.sites.len() });
        }
        Ok(())
    }
}

fn max_dim(bond: usize, n: usize) -> usize {
    let e = bond.min(n - bond).min(30) as u32;
    1usize << e
}

/// `L'(b', k') = sum A(b, s, b') L(b, k) A(k, s, k')`.
pub(crate) fn transfer_left(l: &ArrayD<f64>, a: &ArrayD<f64>) -> ArrayD<f64> {
    let x = tensordot(l, a, &[1], &[0]); // (b, s, k')
    tensordot(a, &x, &[0, 1], &[0, 1]) // (b', k')
}

/// `R'(b, k) = sum A(b, s, b') R(b', k') A(k, s, k')`.
pub(crate) fn transfer_right(r: &ArrayD<f64>, a: &ArrayD<f64>) -> ArrayD<f64> {
    let x = tensordot(a, r, &[2], &[1]); // (k, s, b')
    tensordot(a, &x, &[1, 2], &[1, 2]) // (b, k)
}

fn open_site(l: &ArrayD<f64>, a: &ArrayD<f64>) -> ArrayD<f64> {
    let x = tensordot(l, a, &[1], &[0]); // (b, sk, k')
    let y = tensordot(a, &x, &[0], &[0]); // (sb, b', sk, k')
    permute(&y, &[0, 2, 1, 3])
}
