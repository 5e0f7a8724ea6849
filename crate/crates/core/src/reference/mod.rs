//! Classical reference solvers: exact diagonalization and DMRG.

pub mod cache;
pub mod dmrg;
pub mod exact;
pub mod mpo;
pub mod mps;
pub mod tensor;

pub use dmrg::{dmrg, DmrgConfig, DmrgInit, DmrgResult};
pub use exact::{exact_ground_state, exact_ground_state_with, reference_state, ExactConfig, GroundState, ReferenceState};
pub use mpo::{build_mpo, Mpo};
pub use mps::Mps;

use crate::error::Result;
use crate::lattice::{build_heisenberg, LatticeSpec};
use crate::qmi::{qmi_matrix, QmiMatrix};
use crate::state::DenseState;

/// Largest lattice handled by the exact backend when none is requested.
pub const EXACT_AUTO_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum BackendKind {
    /// Exact up to [`EXACT_AUTO_LIMIT`] sites, DMRG beyond.
    #[default]
    Auto,
    Exact,
    Dmrg,
}

impl std::str::FromStr for BackendKind {
    type Err = crate::error::QidaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(Self::Auto),
            "exact" => Ok(Self::Exact),
            "dmrg" => Ok(Self::Dmrg),
            _ => Err(crate::error::QidaError::Parse(format!("unknown backend `{s}`"))),
        }
    }
}

/// Reference state in whichever representation the backend produced.
#[derive(Clone, Debug)]
pub enum ReferenceRepr {
    Dense(DenseState),
    Mps(Mps),
}

#[derive(Clone, Debug)]
pub struct LatticeReference {
    pub energy: f64,
    pub repr: ReferenceRepr,
    pub backend: &'static str,
    /// Size of the near-degenerate ground manifold (exact backend only).
    pub manifold_dim: usize,
}

impl LatticeReference {
    pub fn qmi(&self) -> Result<QmiMatrix> {
        match &self.repr {
            ReferenceRepr::Dense(s) => qmi_matrix(s),
            ReferenceRepr::Mps(m) => qmi_matrix(m),
        }
    }

    pub fn dense(&self) -> Result<DenseState> {
        match &self.repr {
            ReferenceRepr::Dense(s) => Ok(s.clone()),
            ReferenceRepr::Mps(m) => m.to_dense(),
        }
    }
}

/// DMRG seeded from Néel-type product states.
///
/// With zero field and an even site count the Hamiltonian commutes with a
/// global spin flip; both flip-symmetric combinations of the two Néel states
/// are run and the lower energy kept, which separates ground states from
/// nearly degenerate partners of opposite flip parity. Otherwise a single
/// Néel product start is used, which stays in its magnetization sector.
pub fn lattice_dmrg(spec: &LatticeSpec, chi: usize) -> Result<DmrgResult> {
    let h = build_heisenberg(spec)?;
    let mpo = build_mpo(&h)?;
    let neel = spec.neel_pattern();
    let base = DmrgConfig { chi, ..DmrgConfig::default() };
    if spec.field == 0.0 && spec.n_sites() % 2 == 0 {
        let anti: Vec<bool> = neel.iter().map(|u| !u).collect();
        let mut best: Option<DmrgResult> = None;
        for sign in [1.0, -1.0] {
            let cfg = DmrgConfig { init: DmrgInit::ProductPair { a: neel.clone(), b: anti.clone(), sign }, ..base.clone() };
            let r = dmrg(&mpo, &cfg)?;
            if best.as_ref().is_none_or(|b| r.energy < b.energy) {
                best = Some(r);
            }
        }
        Ok(best.expect("two runs"))
    } else {
        dmrg(&mpo, &DmrgConfig { init: DmrgInit::Product(neel), ..base })
    }
}

/// Reference state for mutual-information maps.
pub fn lattice_reference(spec: &LatticeSpec, backend: &BackendKind, chi: usize) -> Result<LatticeReference> {
    let use_exact = match backend {
        BackendKind::Exact => true,
        BackendKind::Dmrg => false,
        BackendKind::Auto => spec.n_sites() <= EXACT_AUTO_LIMIT,
    };
    if use_exact {
        let h = build_heisenberg(spec)?;
        let r = reference_state(&h, &ExactConfig::default())?;
        Ok(LatticeReference { energy: r.energy, repr: ReferenceRepr::Dense(r.state), backend: "exact", manifold_dim: r.manifold_dim })
    } else {
        let r = lattice_dmrg(spec, chi)?;
        Ok(LatticeReference { energy: r.energy, repr: ReferenceRepr::Mps(r.mps), backend: "dmrg", manifold_dim: 1 })
    }
}
