//! Shared inputs for the kernel benchmarks.

use qida_core::ansatz::{compose, AnsatzKind};
use qida_core::layers::{build_layers, FinesseRatio, LayerPlan};
use qida_core::lattice::{build_heisenberg, LatticeSpec};
use qida_core::reference::{lattice_reference, BackendKind};
use qida_core::{AnsatzCircuit, DenseState, PauliHamiltonian};

pub struct Fixture {
    pub spec: LatticeSpec,
    pub hamiltonian: PauliHamiltonian,
    pub reference: DenseState,
    pub plan: LayerPlan,
    pub so4: AnsatzCircuit,
    pub cx: AnsatzCircuit,
}

/// Hamiltonian, exact reference state, layer plan and both QIDA circuits.
pub fn fixture(rows: usize, cols: usize) -> Fixture {
    let spec = LatticeSpec::new(rows, cols);
    let hamiltonian = build_heisenberg(&spec).expect("lattice");
    let reference = lattice_reference(&spec, &BackendKind::Exact, 64).expect("reference");
    let plan = build_layers(&reference.qmi().expect("qmi").normalized(), &FinesseRatio::default_tenths()).expect("plan");
    Fixture {
        so4: compose(AnsatzKind::QidaSo4, &plan).expect("so4"),
        cx: compose(AnsatzKind::QidaCx, &plan).expect("cx"),
        reference: reference.dense().expect("dense"),
        spec,
        hamiltonian,
        plan,
    }
}

/// Deterministic angles in `[0, 2pi)`.
pub fn angles(n: usize) -> Vec<f64> {
    (0..n).map(|k| (k as f64 * 0.618_033_988_75).fract() * std::f64::consts::TAU).collect()
}
