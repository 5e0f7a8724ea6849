use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QidaError, Result};

/// Maximum qubit count accepted by dense routines.
pub const DENSE_QUBIT_CAP: usize = 24;

/// Full statevector, qubit 0 as the most significant index bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl DenseState {
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amplitudes }
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QidaError::Invalid(format!("amplitude count {len} is not a power of two")));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > DENSE_QUBIT_CAP {
            return Err(QidaError::DimensionCap { n_qubits, limit: DENSE_QUBIT_CAP });
        }
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_amplitudes(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Product of single-qubit states given per qubit as (amp0, amp1).
    pub fn product(factors: &[[Complex64; 2]]) -> Self {
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for f in factors {
            amps = amps.iter().flat_map(|a| [a * f[0], a * f[1]]).collect();
        }
        Self { n_qubits: factors.len(), amplitudes: amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &DenseState) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|<self|other>|`, insensitive to global phase.
    pub fn overlap(&self, other: &DenseState) -> f64 {
        self.inner(other).norm()
    }
}
