//! Small dense-tensor helpers on top of `ndarray`.

use ndarray::{Array2, ArrayD, IxDyn};

/// Contracts axes `ax_a` of `a` with axes `ax_b` of `b`. The result carries
/// the free axes of `a` followed by the free axes of `b`, in original order.
pub fn tensordot(a: &ArrayD<f64>, b: &ArrayD<f64>, ax_a: &[usize], ax_b: &[usize]) -> ArrayD<f64> {
    assert_eq!(ax_a.len(), ax_b.len());
    let free_a: Vec<usize> = (0..a.ndim()).filter(|i| !ax_a.contains(i)).collect();
    let free_b: Vec<usize> = (0..b.ndim()).filter(|i| !ax_b.contains(i)).collect();
    for (&i, &j) in ax_a.iter().zip(ax_b) {
        assert_eq!(a.shape()[i], b.shape()[j], "contracted dimensions differ");
    }
    let k: usize = ax_a.iter().map(|&i| a.shape()[i]).product();
    let m: usize = free_a.iter().map(|&i| a.shape()[i]).product();
    let n: usize = free_b.iter().map(|&i| b.shape()[i]).product();

    let perm_a: Vec<usize> = free_a.iter().chain(ax_a).copied().collect();
    let perm_b: Vec<usize> = ax_b.iter().chain(&free_b).copied().collect();
    let am = to_matrix(a, &perm_a, m, k);
    let bm = to_matrix(b, &perm_b, k, n);
    let c = am.dot(&bm);

    let shape: Vec<usize> = free_a.iter().map(|&i| a.shape()[i]).chain(free_b.iter().map(|&i| b.shape()[i])).collect();
    c.into_shape_with_order(IxDyn(&shape)).expect("contiguous product")
}

fn to_matrix(t: &ArrayD<f64>, perm: &[usize], rows: usize, cols: usize) -> Array2<f64> {
    let p = t.view().permuted_axes(IxDyn(perm));
    let data: Vec<f64> = p.iter().copied().collect();
    Array2::from_shape_vec((rows, cols), data).expect("size matches")
}

/// Returns a standard-layout copy with axes permuted.
pub fn permute(t: &ArrayD<f64>, perm: &[usize]) -> ArrayD<f64> {
    let p = t.view().permuted_axes(IxDyn(perm));
    let shape = p.shape().to_vec();
    ArrayD::from_shape_vec(IxDyn(&shape), p.iter().copied().collect()).expect("size matches")
}

pub fn reshape(t: &ArrayD<f64>, shape: &[usize]) -> ArrayD<f64> {
    let data: Vec<f64> = t.iter().copied().collect();
    ArrayD::from_shape_vec(IxDyn(shape), data).expect("size matches")
}
