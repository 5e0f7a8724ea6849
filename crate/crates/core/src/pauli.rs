//! Pauli-string Hamiltonians and their matrix-free action on statevectors.
//!
//! Amplitude indexing is big-endian in the qubit label: qubit 0 is the most
//! significant bit of the basis index.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QidaError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A real-weighted tensor product of single-qubit Paulis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    pub coefficient: f64,
    pub ops: Vec<Pauli>,
}

impl PauliString {
    pub fn new(coefficient: f64, ops: Vec<Pauli>) -> Self {
        Self { coefficient, ops }
    }

    /// Builds a string that is the identity everywhere except at `sites`.
    pub fn sparse(n_qubits: usize, coefficient: f64, sites: &[(usize, Pauli)]) -> Self {
        let mut ops = vec![Pauli::I; n_qubits];
        for &(q, p) in sites {
            ops[q] = p;
        }
        Self { coefficient, ops }
    }

    /// Non-identity positions in increasing order.
    pub fn support(&self) -> Vec<(usize, Pauli)> {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .map(|(q, p)| (q, *p))
            .collect()
    }

    pub fn label(&self) -> String {
        self.ops.iter().map(|p| p.symbol()).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+} {}", self.coefficient, self.label())
    }
}

/// Weighted sum of Pauli strings with duplicate strings merged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliHamiltonian {
    pub n_qubits: usize,
    pub terms: Vec<PauliString>,
}

impl PauliHamiltonian {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, terms: Vec::new() }
    }

    /// Adds a term, summing coefficients if the same string is already present.
    pub fn add(&mut self, term: PauliString) -> Result<()> {
        if term.ops.len() != self.n_qubits {
            return Err(QidaError::DimensionMismatch { expected: self.n_qubits, got: term.ops.len() });
        }
        if !term.coefficient.is_finite() {
            return Err(QidaError::Invalid(format!("non-finite coefficient in {}", term.label())));
        }
        if let Some(t) = self.terms.iter_mut().find(|t| t.ops == term.ops) {
            t.coefficient += term.coefficient;
        } else {
            self.terms.push(term);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Compiles the sum into bit-mask form for repeated application.
    pub fn compile(&self) -> CompiledPauli {
        CompiledPauli::new(self)
    }

    /// Dense matrix (row-major), only meant for small validation sizes.
    pub fn to_dense(&self) -> Result<Vec<Vec<Complex64>>> {
        if self.n_qubits > 12 {
            return Err(QidaError::DimensionCap { n_qubits: self.n_qubits, limit: 12 });
        }
        let dim = 1usize << self.n_qubits;
        let compiled = self.compile();
        let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        let mut e = vec![Complex64::new(0.0, 0.0); dim];
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        for c in 0..dim {
            e.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            e[c] = Complex64::new(1.0, 0.0);
            compiled.apply(&e, &mut col);
            for r in 0..dim {
                m[r][c] = col[r];
            }
        }
        Ok(m)
    }

    /// True when every term commutes with the total Z magnetization.
    ///
    /// Each group of strings sharing an X/Y footprint must annihilate every
    /// basis state whose flip would change the number of up spins.
    pub fn conserves_magnetization(&self) -> bool {
        let compiled = self.compile();
        compiled.groups.iter().all(|g| {
            let x = g.xmask;
            if x.count_ones() % 2 == 1 {
                return false;
            }
            let relevant = g.phases.iter().fold(x, |acc, &(z, _)| acc | z);
            let sites: Vec<u32> = (0..64).filter(|k| relevant >> k & 1 == 1).collect();
            if sites.len() > 20 {
                return false;
            }
            let half = x.count_ones();
            (0u64..(1u64 << sites.len())).all(|pattern| {
                let mut b = 0u64;
                for (t, s) in sites.iter().enumerate() {
                    if pattern >> t & 1 == 1 {
                        b |= 1 << s;
                    }
                }
                // flipping x preserves the up count only when half its bits are set
                2 * (b & x).count_ones() == half || g.amplitude(b).norm() < 1e-14
            })
        })
    }
}

/// Strings sharing the same flip pattern, stored as (z-mask, weight) pairs.
#[derive(Clone, Debug)]
struct FlipGroup {
    xmask: u64,
    phases: Vec<(u64, Complex64)>,
}

impl FlipGroup {
    #[inline]
    fn amplitude(&self, b: u64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(z, c) in &self.phases {
            if (b & z).count_ones() & 1 == 1 {
                acc -= c;
            } else {
                acc += c;
            }
        }
        acc
    }
}

/// Bit-mask form of a Pauli sum: P = i^{#Y} X^x Z^z.
#[derive(Clone, Debug)]
pub struct CompiledPauli {
    n_qubits: usize,
    diagonal_terms: Vec<(u64, f64)>,
    diagonal: Option<Vec<f64>>,
    groups: Vec<FlipGroup>,
}

const DIAGONAL_CACHE_QUBITS: usize = 20;

impl CompiledPauli {
    fn new(h: &PauliHamiltonian) -> Self {
        let n = h.n_qubits;
        let mut by_x: BTreeMap<u64, Vec<(u64, Complex64)>> = BTreeMap::new();
        for t in &h.terms {
            let mut x = 0u64;
            let mut z = 0u64;
            let mut ny = 0u32;
            for (q, p) in t.ops.iter().enumerate() {
                let bit = 1u64 << (n - 1 - q);
                match p {
                    Pauli::I => {}
                    Pauli::X => x |= bit,
                    Pauli::Z => z |= bit,
                    Pauli::Y => {
                        x |= bit;
                        z |= bit;
                        ny += 1;
                    }
                }
            }
            let phase = match ny % 4 {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            };
            by_x.entry(x).or_default().push((z, phase * t.coefficient));
        }
        let diagonal_terms: Vec<(u64, f64)> = by_x
            .remove(&0)
            .unwrap_or_default()
            .into_iter()
            .map(|(z, c)| (z, c.re))
            .collect();
        let diagonal = (n <= DIAGONAL_CACHE_QUBITS).then(|| {
            (0..1u64 << n)
                .map(|b| diag_value(&diagonal_terms, b))
                .collect()
        });
        let groups = by_x
            .into_iter()
            .map(|(xmask, phases)| FlipGroup { xmask, phases })
            .collect();
        Self { n_qubits: n, diagonal_terms, diagonal, groups }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    #[inline]
    fn diag_at(&self, b: usize) -> f64 {
        match &self.diagonal {
            Some(d) => d[b],
            None => diag_value(&self.diagonal_terms, b as u64),
        }
    }

    /// Diagonal matrix element for a computational basis state.
    pub fn diagonal_element(&self, b: usize) -> f64 {
        self.diag_at(b)
    }

    /// `out = H psi`.
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(psi.len(), self.dim());
        for (b, (o, a)) in out.iter_mut().zip(psi).enumerate() {
            *o = a * self.diag_at(b);
        }
        for g in &self.groups {
            let x = g.xmask as usize;
            for (b, a) in psi.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                out[b ^ x] += g.amplitude(b as u64) * a;
            }
        }
    }

    /// `<psi|H|psi>`, real part only (H is Hermitian).
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let mut e = 0.0;
        for (b, a) in psi.iter().enumerate() {
            e += self.diag_at(b) * a.norm_sqr();
        }
        for g in &self.groups {
            let x = g.xmask as usize;
            let mut acc = Complex64::new(0.0, 0.0);
            for (b, a) in psi.iter().enumerate() {
                acc += psi[b ^ x].conj() * g.amplitude(b as u64) * a;
            }
            e += acc.re;
        }
        e
    }
}

#[inline]
fn diag_value(terms: &[(u64, f64)], b: u64) -> f64 {
    terms
        .iter()
        .map(|&(z, c)| if (b & z).count_ones() & 1 == 1 { -c } else { c })
        .sum()
}
