//! Dense statevector simulation of parameterized circuits.

pub mod circuit;
pub mod gates;
pub mod gradient;

pub use circuit::{apply_gate, run_circuit, run_gates, AnsatzCircuit, Gate};
pub use gates::{fswap, so4_decomposition, so4_unitary};
pub use gradient::energy_and_gradient;

use crate::error::{QidaError, Result};
use crate::pauli::PauliHamiltonian;
use crate::state::DenseState;

/// `<state|H|state>` via matrix-free Pauli action.
pub fn expectation(h: &PauliHamiltonian, state: &DenseState) -> Result<f64> {
    if h.n_qubits != state.n_qubits() {
        return Err(QidaError::DimensionMismatch { expected: h.n_qubits, got: state.n_qubits() });
    }
    Ok(h.compile().expectation(state.amplitudes()))
}

/// Analytic gradient of `<H>` with respect to every circuit parameter.
pub fn gradient(
    h: &PauliHamiltonian,
    circuit: &AnsatzCircuit,
    params: &[f64],
    initial: &DenseState,
) -> Result<Vec<f64>> {
    energy_and_gradient(&h.compile(), circuit, params, initial).map(|(_, g)| g)
}
