//! Open-boundary rectangular Heisenberg lattices.

use serde::{Deserialize, Serialize};

use crate::error::{QidaError, Result};
use crate::pauli::{Pauli, PauliHamiltonian, PauliString};

/// Rectangular lattice with row-major site labels (`site = r * cols + c`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub rows: usize,
    pub cols: usize,
    /// Spin coupling J.
    #[serde(default = "one")]
    pub coupling: f64,
    /// External field h along z.
    #[serde(default)]
    pub field: f64,
    /// XY anisotropy Δ.
    #[serde(default = "one")]
    pub anisotropy: f64,
}

fn one() -> f64 {
    1.0
}

impl LatticeSpec {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, coupling: 1.0, field: 0.0, anisotropy: 1.0 }
    }

    pub fn with_field(mut self, h: f64) -> Self {
        self.field = h;
        self
    }

    pub fn with_anisotropy(mut self, delta: f64) -> Self {
        self.anisotropy = delta;
        self
    }

    pub fn with_coupling(mut self, j: f64) -> Self {
        self.coupling = j;
        self
    }

    pub fn n_sites(&self) -> usize {
        self.rows * self.cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || self.n_sites() < 2 {
            return Err(QidaError::InvalidLattice(format!(
                "{}x{} has fewer than 2 sites",
                self.rows, self.cols
            )));
        }
        for (name, v) in [("J", self.coupling), ("h", self.field), ("delta", self.anisotropy)] {
            if !v.is_finite() {
                return Err(QidaError::InvalidLattice(format!("{name} is not finite")));
            }
        }
        Ok(())
    }

    /// Short label such as `3x4` or `3x4,h=2`.
    pub fn label(&self) -> String {
        let mut s = format!("{}x{}", self.rows, self.cols);
        if self.coupling != 1.0 {
            s.push_str(&format!(",J={}", self.coupling));
        }
        if self.field != 0.0 {
            s.push_str(&format!(",h={}", self.field));
        }
        if self.anisotropy != 1.0 {
            s.push_str(&format!(",delta={:.4}", self.anisotropy));
        }
        s
    }

    /// Stable key used for on-disk caching.
    pub fn canonical_key(&self) -> String {
        format!(
            "rows={};cols={};J={:e};h={:e};delta={:e};boundary=open",
            self.rows, self.cols, self.coupling, self.field, self.anisotropy
        )
    }

    /// Néel pattern: site is up (`true`, qubit |0>) when `r + c` is even.
    pub fn neel_pattern(&self) -> Vec<bool> {
        (0..self.n_sites())
            .map(|s| (s / self.cols + s % self.cols) % 2 == 0)
            .collect()
    }
}

/// Horizontal and vertical nearest-neighbour pairs `(i, j)` with `i < j`.
pub fn lattice_edges(spec: &LatticeSpec) -> Result<Vec<(usize, usize)>> {
    spec.validate()?;
    let mut edges = Vec::with_capacity(spec.rows * (spec.cols - 1) + (spec.rows - 1) * spec.cols);
    for r in 0..spec.rows {
        for c in 0..spec.cols {
            let s = r * spec.cols + c;
            if c + 1 < spec.cols {
                edges.push((s, s + 1));
            }
            if r + 1 < spec.rows {
                edges.push((s, s + spec.cols));
            }
        }
    }
    edges.sort_unstable();
    Ok(edges)
}

/// `H = J/4 sum_<ij> [Δ(XX + YY) + ZZ] - h/2 sum_i Z`.
pub fn build_heisenberg(spec: &LatticeSpec) -> Result<PauliHamiltonian> {
    let edges = lattice_edges(spec)?;
    let n = spec.n_sites();
    let quarter = spec.coupling / 4.0;
    let mut h = PauliHamiltonian::new(n);
    for &(i, j) in &edges {
        h.add(PauliString::sparse(n, quarter * spec.anisotropy, &[(i, Pauli::X), (j, Pauli::X)]))?;
        h.add(PauliString::sparse(n, quarter * spec.anisotropy, &[(i, Pauli::Y), (j, Pauli::Y)]))?;
        h.add(PauliString::sparse(n, quarter, &[(i, Pauli::Z), (j, Pauli::Z)]))?;
    }
    if spec.field != 0.0 {
        for s in 0..n {
            h.add(PauliString::sparse(n, -spec.field / 2.0, &[(s, Pauli::Z)]))?;
        }
    }
    Ok(h)
}

/// Energy of the alternating up/down product state.
pub fn neel_energy(spec: &LatticeSpec) -> Result<f64> {
    let edges = lattice_edges(spec)?;
    let pattern = spec.neel_pattern();
    let up = pattern.iter().filter(|&&u| u).count() as f64;
    let down = pattern.len() as f64 - up;
    let bonds = -(spec.coupling / 4.0) * edges.len() as f64;
    let field = if spec.field == 0.0 { 0.0 } else { -(spec.field / 2.0) * (up - down) };
    Ok(bonds + field)
}

/// Computational basis index of the Néel state (qubit 0 most significant, up = 0).
pub fn neel_basis_index(spec: &LatticeSpec) -> usize {
    let n = spec.n_sites();
    spec.neel_pattern()
        .iter()
        .enumerate()
        .filter(|(_, &up)| !up)
        .fold(0usize, |acc, (q, _)| acc | 1 << (n - 1 - q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_counts() {
        assert_eq!(lattice_edges(&LatticeSpec::new(3, 4)).unwrap().len(), 17);
        assert_eq!(lattice_edges(&LatticeSpec::new(2, 6)).unwrap().len(), 16);
        assert_eq!(lattice_edges(&LatticeSpec::new(3, 3)).unwrap().len(), 12);
        assert_eq!(lattice_edges(&LatticeSpec::new(1, 2)).unwrap(), vec![(0, 1)]);
    }

    #[test]
    fn rejects_single_site() {
        assert!(lattice_edges(&LatticeSpec::new(1, 1)).is_err());
        assert!(lattice_edges(&LatticeSpec::new(0, 4)).is_err());
    }

    #[test]
    fn term_counts_and_coefficients() {
        let h = build_heisenberg(&LatticeSpec::new(3, 4)).unwrap();
        assert_eq!(h.len(), 51);
        assert!(h.terms.iter().all(|t| t.coefficient == 0.25));

        let h = build_heisenberg(&LatticeSpec::new(3, 4).with_field(2.0)).unwrap();
        assert_eq!(h.len(), 63);
        let field: Vec<_> = h.terms.iter().filter(|t| t.support().len() == 1).collect();
        assert_eq!(field.len(), 12);
        assert!(field.iter().all(|t| t.coefficient == -1.0));

        let h = build_heisenberg(&LatticeSpec::new(3, 4).with_anisotropy(0.1)).unwrap();
        for t in &h.terms {
            let s = t.support();
            let expected = if s[0].1 == Pauli::Z { 0.25 } else { 0.025 };
            assert!((t.coefficient - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn every_term_has_at_most_two_sites() {
        let h = build_heisenberg(&LatticeSpec::new(2, 3).with_field(0.7)).unwrap();
        assert!(h.terms.iter().all(|t| (1..=2).contains(&t.support().len())));
    }

    #[test]
    fn neel_energies() {
        assert_eq!(neel_energy(&LatticeSpec::new(3, 3)).unwrap(), -3.0);
        assert_eq!(neel_energy(&LatticeSpec::new(2, 6)).unwrap(), -4.0);
        assert_eq!(neel_energy(&LatticeSpec::new(3, 4)).unwrap(), -4.25);
        assert_eq!(neel_energy(&LatticeSpec::new(3, 4).with_field(2.0)).unwrap(), -4.25);
    }

    #[test]
    fn zz_coefficients_sum_to_edge_weight() {
        let spec = LatticeSpec::new(3, 4).with_coupling(1.3).with_anisotropy(0.4);
        let h = build_heisenberg(&spec).unwrap();
        let zz: f64 = h
            .terms
            .iter()
            .filter(|t| t.support().iter().all(|(_, p)| *p == Pauli::Z) && t.support().len() == 2)
            .map(|t| t.coefficient)
            .sum();
        assert!((zz - 17.0 * 1.3 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn neel_index_alternates() {
        // 1x4: up down up down -> 0101
        assert_eq!(neel_basis_index(&LatticeSpec::new(1, 4)), 0b0101);
        // 2x2: sites 0,3 up; 1,2 down -> 0110
        assert_eq!(neel_basis_index(&LatticeSpec::new(2, 2)), 0b0110);
    }
}
