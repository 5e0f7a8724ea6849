//! Reverse-sweep (adjoint) differentiation of `<psi(theta)|H|psi(theta)>`.

use num_complex::Complex64;

use super::circuit::{apply_inverse_unchecked, bit, so4_params, AnsatzCircuit, Gate};
use super::gates::{self, Mat2};
use crate::error::{QidaError, Result};
use crate::pauli::{CompiledPauli, Pauli};
use crate::state::DenseState;

fn pauli_of(g: &Gate) -> Option<(usize, Pauli)> {
    match *g {
        Gate::Rx { qubit, .. } => Some((qubit, Pauli::X)),
        Gate::Ry { qubit, .. } => Some((qubit, Pauli::Y)),
        Gate::Rz { qubit, .. } => Some((qubit, Pauli::Z)),
        _ => None,
    }
}

/// `<lambda| sigma_q |psi>`.
fn sandwich_1q(lambda: &[Complex64], psi: &[Complex64], n: usize, q: usize, m: &Mat2) -> Complex64 {
    let mask = bit(n, q);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..psi.len() {
        if i & mask == 0 {
            let j = i | mask;
            let (a, b) = (psi[i], psi[j]);
            acc += lambda[i].conj() * (m[0][0] * a + m[0][1] * b);
            acc += lambda[j].conj() * (m[1][0] * a + m[1][1] * b);
        }
    }
    acc
}

/// Energy and gradient with one forward and one backward pass.
pub fn energy_and_gradient(
    h: &CompiledPauli,
    circuit: &AnsatzCircuit,
    params: &[f64],
    initial: &DenseState,
) -> Result<(f64, Vec<f64>)> {
    if params.len() != circuit.n_params {
        return Err(QidaError::ParamLength { expected: circuit.n_params, got: params.len() });
    }
    if initial.n_qubits() != circuit.n_qubits || h.n_qubits() != circuit.n_qubits {
        return Err(QidaError::DimensionMismatch { expected: circuit.n_qubits, got: initial.n_qubits() });
    }
    let n = circuit.n_qubits;
    let psi_out = super::run_circuit(circuit, params, initial)?;
    let mut psi = psi_out.into_amplitudes();
    let energy = h.expectation(&psi);
    let mut lambda = vec![Complex64::new(0.0, 0.0); psi.len()];
    h.apply(&psi, &mut lambda);

    let mut grad = vec![0.0; circuit.n_params];
    for g in circuit.gates.iter().rev() {
        match g {
            Gate::Cnot { .. } => {
                apply_inverse_unchecked(&mut psi, n, g, params);
                apply_inverse_unchecked(&mut lambda, n, g, params);
            }
            Gate::So4 { qubits: (a, b), slots } => {
                apply_inverse_unchecked(&mut psi, n, g, params);
                let derivs = gates::so4_derivatives(&so4_params(slots, params));
                let (am, bm) = (bit(n, *a), bit(n, *b));
                let mut acc = [0.0; 6];
                for i in 0..psi.len() {
                    if i & am == 0 && i & bm == 0 {
                        let idx = [i, i | bm, i | am, i | am | bm];
                        let v = idx.map(|k| psi[k]);
                        let w = idx.map(|k| lambda[k]);
                        for (p, d) in derivs.iter().enumerate() {
                            let mut s = Complex64::new(0.0, 0.0);
                            for r in 0..4 {
                                let dv = v[0] * d[r][0] + v[1] * d[r][1] + v[2] * d[r][2] + v[3] * d[r][3];
                                s += w[r].conj() * dv;
                            }
                            acc[p] += s.re;
                        }
                    }
                }
                for (p, s) in slots.iter().enumerate() {
                    grad[*s] += 2.0 * acc[p];
                }
                apply_inverse_unchecked(&mut lambda, n, g, params);
            }
            rot => {
                let (q, p) = pauli_of(rot).expect("rotation gate");
                let slot = rot.slots()[0];
                // dU/dt = (-i/2) sigma U, so dE/dt = Im <lambda|sigma|psi_after>
                let z = sandwich_1q(&lambda, &psi, n, q, &p.matrix());
                grad[slot] += z.im;
                apply_inverse_unchecked(&mut psi, n, rot, params);
                apply_inverse_unchecked(&mut lambda, n, rot, params);
            }
        }
    }
    Ok((energy, grad))
}
