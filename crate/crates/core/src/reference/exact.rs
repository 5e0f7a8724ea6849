//! Exact ground states by sector-resolved diagonalization.
//!
//! When the Hamiltonian conserves total magnetization each sector is solved
//! separately; the reported ground state lives in a single sector. Sectors
//! whose minima agree within the degeneracy tolerance are resolved in favour
//! of the larger number of up spins.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{QidaError, Result};
use crate::lanczos::{lanczos, norm, LanczosOptions};
use crate::pauli::{CompiledPauli, PauliHamiltonian};
use crate::qmi::single_site_entropies;
use crate::state::DenseState;

#[derive(Clone, Debug)]
pub struct ExactConfig {
    /// Largest qubit count accepted.
    pub max_qubits: usize,
    /// Below this qubit count sectors are diagonalized densely.
    pub dense_below: usize,
    /// Energy window defining a (quasi-)degenerate ground manifold.
    pub degeneracy_tol: f64,
    pub seed: u64,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self { max_qubits: 14, dense_below: 10, degeneracy_tol: 1e-4, seed: 0x5eed }
    }
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub state: DenseState,
    /// `|H v - E v|` measured on the returned vector.
    pub residual: f64,
    /// Number of up spins (qubits in |0>) of the sector, if sector-resolved.
    pub n_up: Option<usize>,
}

/// Lowest eigenpairs of one sector (or the full space).
#[derive(Clone, Debug)]
pub struct SectorSpectrum {
    pub n_up: Option<usize>,
    pub levels: Vec<(f64, DenseState)>,
}

fn sector_members(n: usize, n_up: Option<usize>) -> Vec<usize> {
    match n_up {
        None => (0..1usize << n).collect(),
        Some(up) => (0..1usize << n).filter(|b| b.count_ones() as usize == n - up).collect(),
    }
}

fn residual(h: &CompiledPauli, v: &[Complex64], e: f64) -> f64 {
    let mut hv = vec![Complex64::new(0.0, 0.0); v.len()];
    h.apply(v, &mut hv);
    hv.iter().zip(v).map(|(a, b)| (a - b * e).norm_sqr()).sum::<f64>().sqrt()
}

fn solve_sector(h: &CompiledPauli, members: &[usize], k: usize, cfg: &ExactConfig, n_up: Option<usize>) -> SectorSpectrum {
    let n = h.n_qubits();
    let dim = 1usize << n;
    let k = k.min(members.len());
    if n < cfg.dense_below || members.len() <= 64 {
        // dense sector matrix
        let m = members.len();
        let mut local = vec![usize::MAX; dim];
        members.iter().enumerate().for_each(|(i, &b)| local[b] = i);
        let mut mat = DMatrix::<Complex64>::zeros(m, m);
        let mut e = vec![Complex64::new(0.0, 0.0); dim];
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        for (c, &b) in members.iter().enumerate() {
            e[b] = Complex64::new(1.0, 0.0);
            h.apply(&e, &mut col);
            e[b] = Complex64::new(0.0, 0.0);
            for (r, &bb) in members.iter().enumerate() {
                mat[(r, c)] = col[bb];
            }
        }
        let eig = SymmetricEigen::new(mat);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let levels = order
            .iter()
            .take(k)
            .map(|&idx| {
                let mut amps = vec![Complex64::new(0.0, 0.0); dim];
                for (r, &b) in members.iter().enumerate() {
                    amps[b] = eig.eigenvectors[(r, idx)];
                }
                let mut s = DenseState::from_amplitudes(amps).expect("power of two");
                s.normalize();
                (eig.eigenvalues[idx], s)
            })
            .collect();
        return SectorSpectrum { n_up, levels };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (members.len() as u64) << 8 ^ n_up.unwrap_or(99) as u64);
    let mut start = vec![Complex64::new(0.0, 0.0); dim];
    for &b in members {
        start[b] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
    }
    let opts = LanczosOptions {
        n_eigen: k,
        max_krylov: members.len().min(400),
        max_restarts: 30,
        tol: 1e-11,
    };
    let res = lanczos(|x: &[Complex64], y: &mut [Complex64]| h.apply(x, y), &start, &opts);
    let levels = res
        .pairs
        .into_iter()
        .map(|p| {
            let mut v = p.vector;
            let nv = norm(&v);
            v.iter_mut().for_each(|a| *a /= nv);
            (p.value, DenseState::from_amplitudes(v).expect("power of two"))
        })
        .collect();
    SectorSpectrum { n_up, levels }
}

/// Lowest `per_sector` levels of every magnetization sector (or the full space).
pub fn sector_spectra(h: &PauliHamiltonian, per_sector: usize, cfg: &ExactConfig) -> Result<Vec<SectorSpectrum>> {
    let n = h.n_qubits;
    if n > cfg.max_qubits {
        return Err(QidaError::DimensionCap { n_qubits: n, limit: cfg.max_qubits });
    }
    let compiled = h.compile();
    let sectors: Vec<Option<usize>> =
        if h.conserves_magnetization() { (0..=n).map(Some).collect() } else { vec![None] };
    Ok(sectors
        .into_iter()
        .map(|s| solve_sector(&compiled, &sector_members(n, s), per_sector, cfg, s))
        .collect())
}

fn pick_sector(spectra: Vec<SectorSpectrum>, tol: f64) -> SectorSpectrum {
    let e_min = spectra.iter().map(|s| s.levels[0].0).fold(f64::INFINITY, f64::min);
    spectra
        .into_iter()
        .filter(|s| s.levels[0].0 <= e_min + tol)
        .max_by_key(|s| s.n_up.unwrap_or(0))
        .expect("at least one sector")
}

/// Lowest eigenvalue and a unit-norm eigenvector.
pub fn exact_ground_state(h: &PauliHamiltonian) -> Result<GroundState> {
    exact_ground_state_with(h, &ExactConfig::default())
}

pub fn exact_ground_state_with(h: &PauliHamiltonian, cfg: &ExactConfig) -> Result<GroundState> {
    let chosen = pick_sector(sector_spectra(h, 1, cfg)?, cfg.degeneracy_tol);
    let (energy, state) = chosen.levels.into_iter().next().expect("non-empty sector");
    let residual = residual(&h.compile(), state.amplitudes(), energy);
    Ok(GroundState { energy, state, residual, n_up: chosen.n_up })
}

/// Reference state used for mutual-information maps.
#[derive(Clone, Debug)]
pub struct ReferenceState {
    pub energy: f64,
    pub state: DenseState,
    /// Number of levels found inside the degeneracy window.
    pub manifold_dim: usize,
    pub n_up: Option<usize>,
}

/// Ground state, or for a quasi-degenerate ground manifold the combination
/// of its two lowest levels with the smallest total single-site entropy.
pub fn reference_state(h: &PauliHamiltonian, cfg: &ExactConfig) -> Result<ReferenceState> {
    let chosen = pick_sector(sector_spectra(h, 2, cfg)?, cfg.degeneracy_tol);
    let e0 = chosen.levels[0].0;
    let manifold: Vec<&(f64, DenseState)> =
        chosen.levels.iter().filter(|(e, _)| *e <= e0 + cfg.degeneracy_tol).collect();
    if manifold.len() < 2 {
        return Ok(ReferenceState { energy: e0, state: chosen.levels[0].1.clone(), manifold_dim: 1, n_up: chosen.n_up });
    }
    let (a, b) = (&manifold[0].1, &manifold[1].1);
    let state = least_entangled_combination(a, b);
    let energy = h.compile().expectation(state.amplitudes());
    Ok(ReferenceState { energy, state, manifold_dim: manifold.len(), n_up: chosen.n_up })
}

fn combine(a: &DenseState, b: &DenseState, theta: f64, phase: f64) -> DenseState {
    let (s, c) = theta.sin_cos();
    let w = Complex64::from_polar(s, phase);
    let amps = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x * c + y * w).collect();
    let mut st = DenseState::from_amplitudes(amps).expect("same length");
    st.normalize();
    st
}

fn total_site_entropy(s: &DenseState) -> f64 {
    single_site_entropies(s).iter().sum()
}

/// Minimizes the summed single-site entropy over `cos t |a> + e^{ip} sin t |b>`.
pub fn least_entangled_combination(a: &DenseState, b: &DenseState) -> DenseState {
    let phases = [0.0, std::f64::consts::FRAC_PI_2];
    let steps = 180;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for &p in &phases {
        for k in 0..steps {
            let t = std::f64::consts::PI * k as f64 / steps as f64;
            let f = total_site_entropy(&combine(a, b, t, p));
            if f < best.0 - 1e-12 {
                best = (f, t, p);
            }
        }
    }
    // golden-section refinement in theta around the grid optimum
    let width = std::f64::consts::PI / steps as f64;
    let (mut lo, mut hi) = (best.1 - width, best.1 + width);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let f = |t: f64| total_site_entropy(&combine(a, b, t, best.2));
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let t = 0.5 * (lo + hi);
    combine(a, b, t, best.2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_heisenberg, LatticeSpec};

    #[test]
    fn single_bond_singlet() {
        let h = build_heisenberg(&LatticeSpec::new(1, 2)).unwrap();
        let gs = exact_ground_state(&h).unwrap();
        assert!((gs.energy + 0.75).abs() < 1e-12);
        assert!(gs.residual < 1e-10);
        let a = gs.state.amplitudes();
        assert!((a[1].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        assert!((a[1] + a[2]).norm() < 1e-10);
    }

    #[test]
    fn odd_lattice_prefers_up_sector() {
        let h = build_heisenberg(&LatticeSpec::new(1, 3)).unwrap();
        let gs = exact_ground_state(&h).unwrap();
        assert_eq!(gs.n_up, Some(2));
    }

    #[test]
    fn dimension_cap() {
        let h = build_heisenberg(&LatticeSpec::new(3, 5)).unwrap();
        assert!(matches!(exact_ground_state(&h), Err(QidaError::DimensionCap { .. })));
    }

    #[test]
    fn transposed_lattices_share_spectrum() {
        let a = exact_ground_state(&build_heisenberg(&LatticeSpec::new(2, 4)).unwrap()).unwrap();
        let b = exact_ground_state(&build_heisenberg(&LatticeSpec::new(4, 2)).unwrap()).unwrap();
        assert!((a.energy - b.energy).abs() < 1e-10);
    }

    #[test]
    fn ising_limit_matches_diagonal_minimum() {
        let spec = LatticeSpec::new(2, 3).with_anisotropy(0.0);
        let h = build_heisenberg(&spec).unwrap();
        let c = h.compile();
        let min_diag = (0..1usize << 6).map(|b| c.diagonal_element(b)).fold(f64::INFINITY, f64::min);
        assert!((min_diag - crate::lattice::neel_energy(&spec).unwrap()).abs() < 1e-12);
        let gs = exact_ground_state(&h).unwrap();
        assert!((gs.energy - min_diag).abs() < 1e-10);
    }
}
