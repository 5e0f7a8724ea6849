//! Mutual-information driven ansatz construction and layered VQE for
//! Heisenberg lattices.

pub mod ansatz;
pub mod error;
pub mod lanczos;
pub mod lattice;
pub mod layers;
pub mod metrics;
pub mod optim;
pub mod pauli;
pub mod qmi;
pub mod reference;
pub mod sim;
pub mod state;
pub mod vqe;

pub use error::{QidaError, Result};
pub use lattice::{build_heisenberg, lattice_edges, neel_energy, LatticeSpec};
pub use pauli::{CompiledPauli, Pauli, PauliHamiltonian, PauliString};
pub use qmi::{qmi_matrix, QmiMatrix};
pub use reference::{exact_ground_state, BackendKind, GroundState};
pub use sim::{AnsatzCircuit, Gate};
pub use state::DenseState;
