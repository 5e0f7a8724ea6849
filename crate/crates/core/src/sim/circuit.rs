use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gates::{self, Mat2, RealMat4};
use crate::error::{QidaError, Result};
use crate::state::DenseState;

/// One gate with references into a shared parameter vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "UPPERCASE")]
pub enum Gate {
    Rx { qubit: usize, slot: usize },
    Ry { qubit: usize, slot: usize },
    Rz { qubit: usize, slot: usize },
    Cnot { control: usize, target: usize },
    So4 { qubits: (usize, usize), slots: [usize; 6] },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Rx { qubit, .. } | Gate::Ry { qubit, .. } | Gate::Rz { qubit, .. } => vec![qubit],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::So4 { qubits, .. } => vec![qubits.0, qubits.1],
        }
    }

    pub fn slots(&self) -> Vec<usize> {
        match *self {
            Gate::Rx { slot, .. } | Gate::Ry { slot, .. } | Gate::Rz { slot, .. } => vec![slot],
            Gate::Cnot { .. } => Vec::new(),
            Gate::So4 { slots, .. } => slots.to_vec(),
        }
    }

    /// CNOT-equivalent cost in the elementary gate model.
    pub fn cnot_cost(&self) -> usize {
        match self {
            Gate::Cnot { .. } => 1,
            Gate::So4 { .. } => 2,
            _ => 0,
        }
    }
}

/// Parameterized circuit with layer bookkeeping.
///
/// `layer_gates[l]` is the gate range of ansatz layer `l` and
/// `layer_params[l]` the parameter slots it owns; the parameter ranges
/// partition `0..n_params`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzCircuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub layer_gates: Vec<Range<usize>>,
    pub layer_params: Vec<Range<usize>>,
    pub n_params: usize,
}

impl AnsatzCircuit {
    pub fn empty(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new(), layer_gates: Vec::new(), layer_params: Vec::new(), n_params: 0 }
    }

    pub fn n_layers(&self) -> usize {
        self.layer_gates.len()
    }

    /// Opens a new layer; subsequent pushes belong to it.
    pub fn begin_layer(&mut self) {
        let g = self.gates.len();
        let p = self.n_params;
        self.layer_gates.push(g..g);
        self.layer_params.push(p..p);
    }

    fn new_slot(&mut self) -> usize {
        self.n_params += 1;
        if let Some(r) = self.layer_params.last_mut() {
            r.end = self.n_params;
        }
        self.n_params - 1
    }

    fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
        if let Some(r) = self.layer_gates.last_mut() {
            r.end = self.gates.len();
        }
    }

    pub fn push_rx(&mut self, qubit: usize) {
        let slot = self.new_slot();
        self.push(Gate::Rx { qubit, slot });
    }

    pub fn push_ry(&mut self, qubit: usize) {
        let slot = self.new_slot();
        self.push(Gate::Ry { qubit, slot });
    }

    pub fn push_rz(&mut self, qubit: usize) {
        let slot = self.new_slot();
        self.push(Gate::Rz { qubit, slot });
    }

    pub fn push_cnot(&mut self, control: usize, target: usize) {
        self.push(Gate::Cnot { control, target });
    }

    pub fn push_so4(&mut self, a: usize, b: usize) {
        let mut slots = [0; 6];
        slots.iter_mut().for_each(|s| *s = self.new_slot());
        self.push(Gate::So4 { qubits: (a, b), slots });
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().map(Gate::cnot_cost).sum()
    }

    /// Checks slot ranges, slot coverage and qubit ranges.
    pub fn validate(&self) -> Result<()> {
        let mut used = vec![false; self.n_params];
        for g in &self.gates {
            for q in g.qubits() {
                if q >= self.n_qubits {
                    return Err(QidaError::QubitOutOfRange { qubit: q, n_qubits: self.n_qubits });
                }
            }
            if let Gate::Cnot { control, target } = g {
                if control == target {
                    return Err(QidaError::SameSite(*control));
                }
            }
            if let Gate::So4 { qubits: (a, b), .. } = g {
                if a == b {
                    return Err(QidaError::SameSite(*a));
                }
            }
            for s in g.slots() {
                if s >= self.n_params {
                    return Err(QidaError::Invalid(format!("slot {s} beyond {} parameters", self.n_params)));
                }
                used[s] = true;
            }
        }
        if let Some(s) = used.iter().position(|u| !u) {
            return Err(QidaError::Invalid(format!("parameter slot {s} is never used")));
        }
        let mut next = 0;
        for r in &self.layer_params {
            if r.start != next {
                return Err(QidaError::Invalid("layer parameter ranges do not partition the vector".into()));
            }
            next = r.end;
        }
        if !self.layer_params.is_empty() && next != self.n_params {
            return Err(QidaError::Invalid("layer parameter ranges do not cover the vector".into()));
        }
        Ok(())
    }

    /// Circuit made of the first `layers` layers.
    pub fn truncated(&self, layers: usize) -> AnsatzCircuit {
        let layers = layers.min(self.n_layers());
        if layers == 0 {
            return AnsatzCircuit::empty(self.n_qubits);
        }
        let g_end = self.layer_gates[layers - 1].end;
        let p_end = self.layer_params[layers - 1].end;
        AnsatzCircuit {
            n_qubits: self.n_qubits,
            gates: self.gates[..g_end].to_vec(),
            layer_gates: self.layer_gates[..layers].to_vec(),
            layer_params: self.layer_params[..layers].to_vec(),
            n_params: p_end,
        }
    }
}

#[inline]
pub(crate) fn bit(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

pub(crate) fn apply_1q(amps: &mut [Complex64], n: usize, q: usize, m: &Mat2) {
    let mask = bit(n, q);
    for i in 0..amps.len() {
        if i & mask == 0 {
            let j = i | mask;
            let (a, b) = (amps[i], amps[j]);
            amps[i] = m[0][0] * a + m[0][1] * b;
            amps[j] = m[1][0] * a + m[1][1] * b;
        }
    }
}

pub(crate) fn apply_cnot(amps: &mut [Complex64], n: usize, control: usize, target: usize) {
    let (cm, tm) = (bit(n, control), bit(n, target));
    for i in 0..amps.len() {
        if i & cm != 0 && i & tm == 0 {
            amps.swap(i, i | tm);
        }
    }
}

/// Applies a real 4x4 matrix with `a` as the more significant local qubit.
pub(crate) fn apply_2q_real(amps: &mut [Complex64], n: usize, a: usize, b: usize, m: &RealMat4) {
    let (am, bm) = (bit(n, a), bit(n, b));
    for i in 0..amps.len() {
        if i & am == 0 && i & bm == 0 {
            let idx = [i, i | bm, i | am, i | am | bm];
            let v = idx.map(|k| amps[k]);
            for (r, &k) in idx.iter().enumerate() {
                amps[k] = v[0] * m[r][0] + v[1] * m[r][1] + v[2] * m[r][2] + v[3] * m[r][3];
            }
        }
    }
}

pub(crate) fn so4_params(slots: &[usize; 6], params: &[f64]) -> [f64; 6] {
    slots.map(|s| params[s])
}

pub(crate) fn transpose4(m: &RealMat4) -> RealMat4 {
    let mut t = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            t[i][j] = m[j][i];
        }
    }
    t
}

fn check_gate(gate: &Gate, n: usize, params: &[f64]) -> Result<()> {
    for q in gate.qubits() {
        if q >= n {
            return Err(QidaError::QubitOutOfRange { qubit: q, n_qubits: n });
        }
    }
    for s in gate.slots() {
        if s >= params.len() {
            return Err(QidaError::ParamLength { expected: s + 1, got: params.len() });
        }
    }
    Ok(())
}

pub(crate) fn apply_unchecked(amps: &mut [Complex64], n: usize, gate: &Gate, params: &[f64]) {
    match *gate {
        Gate::Rx { qubit, slot } => apply_1q(amps, n, qubit, &gates::rx(params[slot])),
        Gate::Ry { qubit, slot } => apply_1q(amps, n, qubit, &gates::ry(params[slot])),
        Gate::Rz { qubit, slot } => apply_1q(amps, n, qubit, &gates::rz(params[slot])),
        Gate::Cnot { control, target } => apply_cnot(amps, n, control, target),
        Gate::So4 { qubits: (a, b), slots } => {
            apply_2q_real(amps, n, a, b, &gates::so4_unitary(&so4_params(&slots, params)))
        }
    }
}

/// Inverse of [`apply_unchecked`].
pub(crate) fn apply_inverse_unchecked(amps: &mut [Complex64], n: usize, gate: &Gate, params: &[f64]) {
    match *gate {
        Gate::Rx { qubit, slot } => apply_1q(amps, n, qubit, &gates::rx(-params[slot])),
        Gate::Ry { qubit, slot } => apply_1q(amps, n, qubit, &gates::ry(-params[slot])),
        Gate::Rz { qubit, slot } => apply_1q(amps, n, qubit, &gates::rz(-params[slot])),
        Gate::Cnot { control, target } => apply_cnot(amps, n, control, target),
        Gate::So4 { qubits: (a, b), slots } => {
            let u = gates::so4_unitary(&so4_params(&slots, params));
            apply_2q_real(amps, n, a, b, &transpose4(&u))
        }
    }
}

/// Applies one gate in place.
pub fn apply_gate(state: &mut DenseState, gate: &Gate, params: &[f64]) -> Result<()> {
    let n = state.n_qubits();
    check_gate(gate, n, params)?;
    apply_unchecked(state.amplitudes_mut(), n, gate, params);
    Ok(())
}

/// Runs the whole circuit on `initial`.
pub fn run_circuit(circuit: &AnsatzCircuit, params: &[f64], initial: &DenseState) -> Result<DenseState> {
    if params.len() != circuit.n_params {
        return Err(QidaError::ParamLength { expected: circuit.n_params, got: params.len() });
    }
    if initial.n_qubits() != circuit.n_qubits {
        return Err(QidaError::DimensionMismatch { expected: circuit.n_qubits, got: initial.n_qubits() });
    }
    run_gates(&circuit.gates, params, initial)
}

/// Runs an arbitrary gate slice on `initial`.
pub fn run_gates(gates: &[Gate], params: &[f64], initial: &DenseState) -> Result<DenseState> {
    let n = initial.n_qubits();
    for g in gates {
        check_gate(g, n, params)?;
    }
    let mut state = initial.clone();
    for g in gates {
        apply_unchecked(state.amplitudes_mut(), n, g, params);
    }
    Ok(state)
}
