//! Von Neumann entropies and pairwise quantum mutual information.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{QidaError, Result};
use crate::reference::mps::Mps;
use crate::state::DenseState;

const TRACE_TOL: f64 = 1e-8;

/// Entropy in bits of a spectrum; tiny or negative eigenvalues contribute nothing.
pub fn entropy_from_eigenvalues(eigs: &[f64]) -> f64 {
    eigs.iter().filter(|&&p| p > 1e-14).map(|&p| -p * p.log2()).sum::<f64>().max(0.0)
}

pub fn entropy_2x2(rho: &Matrix2<Complex64>) -> Result<f64> {
    check_trace(rho.trace())?;
    let e = SymmetricEigen::new(*rho).eigenvalues;
    Ok(entropy_from_eigenvalues(e.as_slice()))
}

pub fn entropy_4x4(rho: &Matrix4<Complex64>) -> Result<f64> {
    check_trace(rho.trace())?;
    let e = SymmetricEigen::new(*rho).eigenvalues;
    Ok(entropy_from_eigenvalues(e.as_slice()))
}

fn check_trace(t: Complex64) -> Result<()> {
    if (t.re - 1.0).abs() > TRACE_TOL || t.im.abs() > TRACE_TOL || !t.re.is_finite() {
        return Err(QidaError::BadTrace(t.re));
    }
    Ok(())
}

/// Source of one- and two-site reduced density matrices.
pub trait PairMarginals: Sync {
    fn n_sites(&self) -> usize;
    fn rdm1(&self, i: usize) -> Result<Matrix2<Complex64>>;
    /// Basis index `2 s_i + s_j`.
    fn rdm2(&self, i: usize, j: usize) -> Result<Matrix4<Complex64>>;

    fn all_rdm2(&self) -> Result<Vec<((usize, usize), Matrix4<Complex64>)>> {
        let n = self.n_sites();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        pairs.into_par_iter().map(|(i, j)| Ok(((i, j), self.rdm2(i, j)?))).collect()
    }
}

impl PairMarginals for DenseState {
    fn n_sites(&self) -> usize {
        self.n_qubits()
    }

    fn rdm1(&self, i: usize) -> Result<Matrix2<Complex64>> {
        let n = self.n_qubits();
        if i >= n {
            return Err(QidaError::QubitOutOfRange { qubit: i, n_qubits: n });
        }
        let m = 1usize << (n - 1 - i);
        let a = self.amplitudes();
        let mut rho = Matrix2::<Complex64>::zeros();
        for b in (0..a.len()).filter(|b| b & m == 0) {
            let (x, y) = (a[b], a[b | m]);
            rho[(0, 0)] += x * x.conj();
            rho[(0, 1)] += x * y.conj();
            rho[(1, 1)] += y * y.conj();
        }
        rho[(1, 0)] = rho[(0, 1)].conj();
        Ok(rho)
    }

    fn rdm2(&self, i: usize, j: usize) -> Result<Matrix4<Complex64>> {
        let n = self.n_qubits();
        for q in [i, j] {
            if q >= n {
                return Err(QidaError::QubitOutOfRange { qubit: q, n_qubits: n });
            }
        }
        if i == j {
            return Err(QidaError::SameSite(i));
        }
        let (mi, mj) = (1usize << (n - 1 - i), 1usize << (n - 1 - j));
        let a = self.amplitudes();
        let mut rho = Matrix4::<Complex64>::zeros();
        for b in (0..a.len()).filter(|b| b & (mi | mj) == 0) {
            let v = [a[b], a[b | mj], a[b | mi], a[b | mi | mj]];
            for r in 0..4 {
                for c in r..4 {
                    rho[(r, c)] += v[r] * v[c].conj();
                }
            }
        }
        for r in 0..4 {
            for c in 0..r {
                rho[(r, c)] = rho[(c, r)].conj();
            }
        }
        Ok(rho)
    }
}

impl PairMarginals for Mps {
    fn n_sites(&self) -> usize {
        Mps::n_sites(self)
    }

    fn rdm1(&self, i: usize) -> Result<Matrix2<Complex64>> {
        let r = self.rdm_single(i)?;
        Ok(Matrix2::from_fn(|a, b| Complex64::new(r[a][b], 0.0)))
    }

    fn rdm2(&self, i: usize, j: usize) -> Result<Matrix4<Complex64>> {
        let r = self.rdm_pair(i, j)?;
        Ok(Matrix4::from_fn(|a, b| Complex64::new(r[a][b], 0.0)))
    }

    fn all_rdm2(&self) -> Result<Vec<((usize, usize), Matrix4<Complex64>)>> {
        Ok(self
            .all_pair_rdms()?
            .into_iter()
            .map(|(p, r)| (p, Matrix4::from_fn(|a, b| Complex64::new(r[a][b], 0.0))))
            .collect())
    }
}

pub fn single_site_entropies<P: PairMarginals + ?Sized>(p: &P) -> Vec<f64> {
    (0..p.n_sites())
        .map(|i| p.rdm1(i).and_then(|r| entropy_2x2(&r)).unwrap_or(f64::NAN))
        .collect()
}

/// Symmetric mutual-information matrix with zero diagonal, in bits.
#[derive(Clone, Debug, PartialEq)]
pub struct QmiMatrix {
    pub n: usize,
    pub values: Vec<f64>,
    pub entropies: Vec<f64>,
}

impl QmiMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn max_offdiag(&self) -> f64 {
        (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .fold(0.0, f64::max)
    }

    /// Copy scaled so that the largest entry is 1.
    pub fn normalized(&self) -> QmiMatrix {
        let m = self.max_offdiag();
        let values = if m > 0.0 { self.values.iter().map(|v| v / m).collect() } else { self.values.clone() };
        QmiMatrix { n: self.n, values, entropies: self.entropies.clone() }
    }

    /// Pairs `(i, j, value)` with `i < j`.
    pub fn pairs(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n).flat_map(|i| (i + 1..self.n).map(move |j| (i, j))).map(|(i, j)| (i, j, self.get(i, j))).collect()
    }

    /// CSV with a `n=<N>` header line followed by `N` comma-separated rows.
    pub fn to_csv(&self) -> String {
        let mut s = format!("n={}\n", self.n);
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format!("{:.17e}", self.get(i, j))).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<QmiMatrix> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines.next().ok_or_else(|| QidaError::Parse("empty QMI file".into()))?;
        let n: usize = head
            .trim()
            .strip_prefix("n=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| QidaError::Parse(format!("bad QMI header `{head}`")))?;
        let mut values = Vec::with_capacity(n * n);
        for line in lines {
            for tok in line.split(',') {
                values.push(tok.trim().parse::<f64>().map_err(|e| QidaError::Parse(format!("QMI entry `{tok}`: {e}")))?);
            }
        }
        if values.len() != n * n {
            return Err(QidaError::Parse(format!("QMI file has {} entries, expected {}", values.len(), n * n)));
        }
        Ok(QmiMatrix { n, values, entropies: Vec::new() })
    }
}

/// `I_ij = S_i + S_j - S_ij` for every pair.
pub fn qmi_matrix<P: PairMarginals + ?Sized>(p: &P) -> Result<QmiMatrix> {
    let n = p.n_sites();
    let entropies = (0..n).map(|i| entropy_2x2(&p.rdm1(i)?)).collect::<Result<Vec<_>>>()?;
    let mut values = vec![0.0; n * n];
    for ((i, j), rho) in p.all_rdm2()? {
        let sij = entropy_4x4(&rho)?;
        let v = (entropies[i] + entropies[j] - sij).max(0.0);
        values[i * n + j] = v;
        values[j * n + i] = v;
    }
    Ok(QmiMatrix { n, values, entropies })
}
