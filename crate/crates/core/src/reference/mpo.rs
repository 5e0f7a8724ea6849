//! Matrix product operators built from Pauli sums with at most two-site terms.

use std::collections::BTreeMap;

use ndarray::{ArrayD, IxDyn};

use crate::error::{QidaError, Result};
use crate::pauli::{Pauli, PauliHamiltonian};

/// Site tensors with axes `(w_left, w_right, s_out, s_in)`.
#[derive(Clone, Debug)]
pub struct Mpo {
    pub sites: Vec<ArrayD<f64>>,
}

impl Mpo {
    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites.iter().take(self.sites.len().saturating_sub(1)).map(|w| w.shape()[1]).collect()
    }
}

// Real factor of each Pauli; Y = i * [[0, -1], [1, 0]].
fn real_op(p: Pauli) -> [[f64; 2]; 2] {
    match p {
        Pauli::I => [[1.0, 0.0], [0.0, 1.0]],
        Pauli::X => [[0.0, 1.0], [1.0, 0.0]],
        Pauli::Y => [[0.0, -1.0], [1.0, 0.0]],
        Pauli::Z => [[1.0, 0.0], [0.0, -1.0]],
    }
}

const FINAL: usize = 0;
const INITIAL: usize = 1;

/// Builds an MPO for a Hamiltonian whose terms act on at most two sites and
/// have real matrix elements (an even number of Y factors).
pub fn build_mpo(h: &PauliHamiltonian) -> Result<Mpo> {
    let n = h.n_qubits;
    if n < 2 {
        return Err(QidaError::InvalidLattice("MPO needs at least 2 sites".into()));
    }
    struct Two {
        i: usize,
        pi: Pauli,
        j: usize,
        pj: Pauli,
        c: f64,
    }
    let mut singles: Vec<(usize, Pauli, f64)> = Vec::new();
    let mut constant = 0.0;
    let mut twos: Vec<Two> = Vec::new();
    for t in &h.terms {
        let sup = t.support();
        let n_y = sup.iter().filter(|(_, p)| *p == Pauli::Y).count();
        if sup.len() > 2 || n_y % 2 == 1 {
            return Err(QidaError::UnsupportedTerm(t.label()));
        }
        let c = if n_y == 2 { -t.coefficient } else { t.coefficient };
        match sup.as_slice() {
            [] => constant += c,
            [(q, p)] => singles.push((*q, *p, c)),
            [(a, pa), (b, pb)] => twos.push(Two { i: *a.min(b), pi: if a < b { *pa } else { *pb }, j: *a.max(b), pj: if a < b { *pb } else { *pa }, c }),
            _ => unreachable!(),
        }
    }

    // channel (start site, operator) -> last site it reaches
    let mut reach: BTreeMap<(usize, u8), usize> = BTreeMap::new();
    for t in &twos {
        let e = reach.entry((t.i, t.pi as u8)).or_insert(t.j);
        *e = (*e).max(t.j);
    }
    // bond k sits between sites k and k+1
    let bond_channels: Vec<Vec<(usize, u8)>> = (0..n - 1)
        .map(|k| reach.iter().filter(|(&(i, _), &e)| i <= k && k < e).map(|(&ch, _)| ch).collect())
        .collect();
    let index_on = |k: usize, ch: (usize, u8)| -> usize {
        2 + bond_channels[k].iter().position(|&c| c == ch).expect("channel active on bond")
    };

    let ident = real_op(Pauli::I);
    let mut sites = Vec::with_capacity(n);
    for k in 0..n {
        let wl = if k == 0 { 1 } else { 2 + bond_channels[k - 1].len() };
        let wr = if k == n - 1 { 1 } else { 2 + bond_channels[k].len() };
        // boundary rows/columns: the left edge only has INITIAL, the right edge only FINAL
        let row = |w: usize| -> Option<usize> {
            if k == 0 {
                (w == INITIAL).then_some(0)
            } else {
                Some(w)
            }
        };
        let col = |w: usize| -> Option<usize> {
            if k == n - 1 {
                (w == FINAL).then_some(0)
            } else {
                Some(w)
            }
        };
        let mut w = ArrayD::<f64>::zeros(IxDyn(&[wl, wr, 2, 2]));
        let mut put = |r: usize, c: usize, op: &[[f64; 2]; 2], coef: f64| {
            if let (Some(r), Some(c)) = (row(r), col(c)) {
                for a in 0..2 {
                    for b in 0..2 {
                        w[[r, c, a, b]] += coef * op[a][b];
                    }
                }
            }
        };
        put(FINAL, FINAL, &ident, 1.0);
        put(INITIAL, INITIAL, &ident, 1.0);
        if k == 0 && constant != 0.0 {
            put(INITIAL, FINAL, &ident, constant);
        }
        for &(q, p, c) in &singles {
            if q == k {
                put(INITIAL, FINAL, &real_op(p), c);
            }
        }
        // channels opening here
        for (&(i, p), _) in reach.iter().filter(|(&(i, _), _)| i == k) {
            let p = pauli_from(p);
            put(INITIAL, index_on(k, (i, p as u8)), &real_op(p), 1.0);
        }
        if k > 0 {
            for &ch in &bond_channels[k - 1] {
                let r = index_on(k - 1, ch);
                if reach[&ch] > k {
                    put(r, index_on(k, ch), &ident, 1.0);
                }
                for t in twos.iter().filter(|t| t.j == k && (t.i, t.pi as u8) == ch) {
                    put(r, FINAL, &real_op(t.pj), t.c);
                }
            }
        }
        sites.push(w);
    }
    Ok(Mpo { sites })
}

fn pauli_from(tag: u8) -> Pauli {
    [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][tag as usize]
}

/// Dense real matrix of the MPO (small systems only).
pub fn mpo_to_dense(mpo: &Mpo) -> Vec<Vec<f64>> {
    let n = mpo.n_sites();
    let dim = 1usize << n;
    let mut out = vec![vec![0.0; dim]; dim];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            let mut vecw = vec![1.0];
            for (k, w) in mpo.sites.iter().enumerate() {
                let a = (r >> (n - 1 - k)) & 1;
                let b = (c >> (n - 1 - k)) & 1;
                let wr = w.shape()[1];
                let mut next = vec![0.0; wr];
                for (l, x) in vecw.iter().enumerate() {
                    if *x == 0.0 {
                        continue;
                    }
                    for (m, y) in next.iter_mut().enumerate() {
                        *y += x * w[[l, m, a, b]];
                    }
                }
                vecw = next;
            }
            *v = vecw[0];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_heisenberg, LatticeSpec};
    use crate::pauli::PauliString;

    fn check(h: &PauliHamiltonian) {
        let mpo = build_mpo(h).unwrap();
        let dense = h.to_dense().unwrap();
        let m = mpo_to_dense(&mpo);
        for (r, row) in dense.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                assert!(v.im.abs() < 1e-14);
                assert!((v.re - m[r][c]).abs() < 1e-12, "({r},{c})");
            }
        }
    }

    #[test]
    fn heisenberg_mpo_matches_dense() {
        check(&build_heisenberg(&LatticeSpec::new(2, 3).with_field(0.7).with_anisotropy(0.3)).unwrap());
        check(&build_heisenberg(&LatticeSpec::new(3, 3)).unwrap());
    }

    #[test]
    fn long_range_and_constant() {
        let mut h = PauliHamiltonian::new(5);
        h.add(PauliString::sparse(5, 0.5, &[(0, Pauli::Z), (4, Pauli::X)])).unwrap();
        h.add(PauliString::sparse(5, -1.5, &[(1, Pauli::Y), (3, Pauli::Y)])).unwrap();
        h.add(PauliString::sparse(5, 0.25, &[])).unwrap();
        h.add(PauliString::sparse(5, 2.0, &[(2, Pauli::X)])).unwrap();
        check(&h);
    }

    #[test]
    fn rejects_complex_terms() {
        let mut h = PauliHamiltonian::new(3);
        h.add(PauliString::sparse(3, 1.0, &[(0, Pauli::Y)])).unwrap();
        assert!(matches!(build_mpo(&h), Err(QidaError::UnsupportedTerm(_))));
        let mut h = PauliHamiltonian::new(3);
        h.add(PauliString::sparse(3, 1.0, &[(0, Pauli::X), (1, Pauli::X), (2, Pauli::X)])).unwrap();
        assert!(build_mpo(&h).is_err());
    }

    #[test]
    fn bond_dimension_is_compact() {
        let mpo = build_mpo(&build_heisenberg(&LatticeSpec::new(3, 4)).unwrap()).unwrap();
        assert!(mpo.bond_dims().into_iter().max().unwrap() <= 2 + 3 * 4);
    }
}
