//! Two-site DMRG on real MPS/MPO tensors.

use nalgebra::DMatrix;
use ndarray::{ArrayD, IxDyn};

use super::mpo::Mpo;
use super::mps::Mps;
use super::tensor::{permute, tensordot};
use crate::error::{QidaError, Result};
use crate::lanczos::{lanczos, LanczosOptions};

#[derive(Clone, Debug)]
pub enum DmrgInit {
    /// Random right-canonical MPS with the given seed.
    Random { seed: u64 },
    /// Product state; `true` is |0>.
    Product(Vec<bool>),
    /// `(|a> + sign |b>)/sqrt(2)` for two product states.
    ProductPair { a: Vec<bool>, b: Vec<bool>, sign: f64 },
}

#[derive(Clone, Debug)]
pub struct DmrgConfig {
    pub chi: usize,
    pub max_sweeps: usize,
    /// Energy change between sweeps below which the run is converged.
    pub energy_tol: f64,
    /// Discarded singular values below this are dropped.
    pub svd_cutoff: f64,
    pub init: DmrgInit,
    /// Bond dimension of a random start.
    pub chi_init: usize,
    pub krylov: usize,
    pub local_tol: f64,
}

impl Default for DmrgConfig {
    fn default() -> Self {
        Self {
            chi: 64,
            max_sweeps: 30,
            energy_tol: 1e-10,
            svd_cutoff: 1e-12,
            init: DmrgInit::Random { seed: 7 },
            chi_init: 8,
            krylov: 40,
            local_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DmrgResult {
    pub energy: f64,
    pub mps: Mps,
    pub sweeps: usize,
    pub converged: bool,
    /// Energy after each full sweep.
    pub sweep_energies: Vec<f64>,
    /// Largest discarded weight seen in the last sweep.
    pub truncation: f64,
}

fn ones3() -> ArrayD<f64> {
    ArrayD::from_elem(IxDyn(&[1, 1, 1]), 1.0)
}

// L: (bra, w, ket)
fn grow_left(l: &ArrayD<f64>, a: &ArrayD<f64>, w: &ArrayD<f64>) -> ArrayD<f64> {
    let x = tensordot(l, a, &[2], &[0]); // (a', w, s, b)
    let y = tensordot(&x, w, &[1, 2], &[0, 3]); // (a', b, w', s')
    let z = tensordot(&y, a, &[0, 3], &[0, 1]); // (b, w', b')
    permute(&z, &[2, 1, 0])
}

// R: (bra, w, ket)
fn grow_right(r: &ArrayD<f64>, a: &ArrayD<f64>, w: &ArrayD<f64>) -> ArrayD<f64> {
    let x = tensordot(a, r, &[2], &[2]); // (a, s, b', w)
    let y = tensordot(&x, w, &[1, 3], &[3, 1]); // (a, b', wl, s')
    let z = tensordot(&y, a, &[1, 3], &[2, 1]); // (a, wl, a')
    permute(&z, &[2, 1, 0])
}

fn apply_eff(l: &ArrayD<f64>, w1: &ArrayD<f64>, w2: &ArrayD<f64>, r: &ArrayD<f64>, theta: &ArrayD<f64>) -> ArrayD<f64> {
    let t1 = tensordot(l, theta, &[2], &[0]); // (a', w, s1, s2, b)
    let t2 = tensordot(&t1, w1, &[1, 2], &[0, 3]); // (a', s2, b, w1, s1')
    let t3 = tensordot(&t2, w2, &[3, 1], &[0, 3]); // (a', b, s1', w2, s2')
    tensordot(&t3, r, &[3, 1], &[1, 2]) // (a', s1', s2', b')
}

struct Split {
    left: ArrayD<f64>,
    right: ArrayD<f64>,
    discarded: f64,
}

/// SVD of `theta (Dl, 2, 2, Dr)`; singular values go to the right when
/// `absorb_right`, otherwise to the left.
fn split(theta: &ArrayD<f64>, chi: usize, cutoff: f64, absorb_right: bool) -> Split {
    let s = theta.shape().to_vec();
    let (dl, dr) = (s[0], s[3]);
    let m = DMatrix::from_row_slice(dl * 2, 2 * dr, &theta.iter().copied().collect::<Vec<_>>());
    let svd = m.svd(true, true);
    let u = svd.u.expect("u");
    let vt = svd.v_t.expect("v_t");
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let total: f64 = sv.iter().map(|x| x * x).sum();
    let mut keep: Vec<usize> = order.iter().copied().filter(|&k| sv[k] > cutoff).take(chi).collect();
    if keep.is_empty() {
        keep.push(order[0]);
    }
    let kept: f64 = keep.iter().map(|&k| sv[k] * sv[k]).sum();
    let norm = kept.sqrt();
    let d = keep.len();
    let mut left = ArrayD::zeros(IxDyn(&[dl, 2, d]));
    let mut right = ArrayD::zeros(IxDyn(&[d, 2, dr]));
    for (c, &k) in keep.iter().enumerate() {
        let sk = sv[k] / norm;
        let (fl, fr) = if absorb_right { (1.0, sk) } else { (sk, 1.0) };
        for row in 0..dl * 2 {
            left[[row / 2, row % 2, c]] = u[(row, k)] * fl;
        }
        for col in 0..2 * dr {
            right[[c, col / dr, col % dr]] = vt[(k, col)] * fr;
        }
    }
    Split { left, right, discarded: (total - kept).max(0.0) / total.max(f64::MIN_POSITIVE) }
}

fn initial_mps(n: usize, cfg: &DmrgConfig) -> Result<Mps> {
    let m = match &cfg.init {
        DmrgInit::Random { seed } => Mps::random(n, cfg.chi_init.min(cfg.chi).max(1), *seed),
        DmrgInit::Product(up) => {
            let mut m = Mps::product(up);
            m.right_canonicalize();
            m
        }
        DmrgInit::ProductPair { a, b, sign } => Mps::product_pair(a, b, *sign)?,
    };
    if m.n_sites() != n {
        return Err(QidaError::DimensionMismatch { expected: n, got: m.n_sites() });
    }
    Ok(m)
}

/// Ground state of `mpo` by two-site sweeps.
pub fn dmrg(mpo: &Mpo, cfg: &DmrgConfig) -> Result<DmrgResult> {
    let n = mpo.n_sites();
    if n < 2 {
        return Err(QidaError::InvalidLattice("DMRG needs at least 2 sites".into()));
    }
    if cfg.chi == 0 {
        return Err(QidaError::Invalid("chi must be positive".into()));
    }
    let mut mps = initial_mps(n, cfg)?;
    let w = &mpo.sites;
    let mut lenv = vec![ones3(); n + 1];
    let mut renv = vec![ones3(); n + 1];
    for k in (2..n).rev() {
        renv[k] = grow_right(&renv[k + 1], &mps.sites[k], &w[k]);
    }

    let opts = LanczosOptions { n_eigen: 1, max_krylov: cfg.krylov, max_restarts: 50, tol: cfg.local_tol };
    let mut energy = f64::INFINITY;
    let mut history = Vec::new();
    let mut converged = false;
    let mut truncation = 0.0;
    let mut sweeps = 0;

    let local = |k: usize, mps: &Mps, lenv: &[ArrayD<f64>], renv: &[ArrayD<f64>]| -> Result<(f64, ArrayD<f64>)> {
        let theta = tensordot(&mps.sites[k], &mps.sites[k + 1], &[2], &[0]);
        let shape = theta.shape().to_vec();
        let start: Vec<f64> = theta.iter().copied().collect();
        let (l, r) = (&lenv[k], &renv[k + 2]);
        let res = lanczos(
            |x: &[f64], y: &mut [f64]| {
                let t = ArrayD::from_shape_vec(IxDyn(&shape), x.to_vec()).expect("shape");
                let out = apply_eff(l, &w[k], &w[k + 1], r, &t);
                y.iter_mut().zip(out.iter()).for_each(|(a, b)| *a = *b);
            },
            &start,
            &opts,
        );
        let pair = res.pairs.into_iter().next().ok_or_else(|| QidaError::Divergence("local eigensolver".into()))?;
        if !pair.value.is_finite() {
            return Err(QidaError::Divergence("non-finite local energy".into()));
        }
        Ok((pair.value, ArrayD::from_shape_vec(IxDyn(&shape), pair.vector).expect("shape")))
    };

    for sweep in 0..cfg.max_sweeps {
        sweeps = sweep + 1;
        let mut trunc: f64 = 0.0;
        let mut e = 0.0;
        for k in 0..n - 1 {
            let (ek, theta) = local(k, &mps, &lenv, &renv)?;
            e = ek;
            let sp = split(&theta, cfg.chi, cfg.svd_cutoff, true);
            trunc = trunc.max(sp.discarded);
            mps.sites[k] = sp.left;
            mps.sites[k + 1] = sp.right;
            lenv[k + 1] = grow_left(&lenv[k], &mps.sites[k], &w[k]);
        }
        for k in (0..n - 1).rev() {
            let (ek, theta) = local(k, &mps, &lenv, &renv)?;
            e = ek;
            let sp = split(&theta, cfg.chi, cfg.svd_cutoff, false);
            trunc = trunc.max(sp.discarded);
            mps.sites[k] = sp.left;
            mps.sites[k + 1] = sp.right;
            renv[k + 1] = grow_right(&renv[k + 2], &mps.sites[k + 1], &w[k + 1]);
        }
        truncation = trunc;
        history.push(e);
        let delta = (energy - e).abs();
        energy = e;
        if delta < cfg.energy_tol {
            converged = true;
            break;
        }
    }
    Ok(DmrgResult { energy, mps, sweeps, converged, sweep_energies: history, truncation })
}
