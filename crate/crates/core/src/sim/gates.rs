//! Gate matrices: single-qubit rotations, CNOT, and the six-parameter SO(4)
//! entangler.
//!
//! Rotations follow `R_a(t) = exp(-i t sigma_a / 2)`. The SO(4) gate is the
//! magic-basis image of `A (x) B` with `A = Rz(a1) Ry(t1) Rz(b1)` and
//! `B = Rz(a2) Ry(t2) Rz(b2)`. The magic basis is produced by
//! `Q = CNOT(1->0) . (I (x) Ry(pi/2)) . (Rz(pi/2) (x) Rz(pi/2))`, giving
//! `U = Q^dag (A (x) B) Q`, two CNOTs and twelve one-qubit gates.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

pub type Mat2 = [[Complex64; 2]; 2];
pub type Mat4 = [[Complex64; 4]; 4];
pub type RealMat4 = [[f64; 4]; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn rx(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    let m = Complex64::new(0.0, -s);
    [[Complex64::new(c, 0.0), m], [m, Complex64::new(c, 0.0)]]
}

pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[Complex64::new(c, 0.0), Complex64::new(-s, 0.0)], [Complex64::new(s, 0.0), Complex64::new(c, 0.0)]]
}

pub fn rz(theta: f64) -> Mat2 {
    let h = theta / 2.0;
    [[Complex64::from_polar(1.0, -h), ZERO], [ZERO, Complex64::from_polar(1.0, h)]]
}

fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut r = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

pub fn mul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut r = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            r[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    r
}

pub fn dagger4(a: &Mat4) -> Mat4 {
    let mut r = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            r[i][j] = a[j][i].conj();
        }
    }
    r
}

/// `a (x) b` with `a` acting on the first (more significant) qubit.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut r = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            r[i][j] = a[i >> 1][j >> 1] * b[i & 1][j & 1];
        }
    }
    r
}

pub fn identity4() -> Mat4 {
    let mut r = [[ZERO; 4]; 4];
    (0..4).for_each(|i| r[i][i] = ONE);
    r
}

/// CNOT with the first qubit as control.
pub fn cnot_first_control() -> Mat4 {
    let mut r = [[ZERO; 4]; 4];
    r[0][0] = ONE;
    r[1][1] = ONE;
    r[2][3] = ONE;
    r[3][2] = ONE;
    r
}

/// CNOT with the second qubit as control.
pub fn cnot_second_control() -> Mat4 {
    let mut r = [[ZERO; 4]; 4];
    r[0][0] = ONE;
    r[1][3] = ONE;
    r[2][2] = ONE;
    r[3][1] = ONE;
    r
}

/// Fermionic swap.
pub fn fswap() -> RealMat4 {
    [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, -1.0]]
}

fn identity2() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

fn magic() -> Mat4 {
    let s = kron(&rz(FRAC_PI_2), &rz(FRAC_PI_2));
    let r = kron(&identity2(), &ry(FRAC_PI_2));
    mul4(&cnot_second_control(), &mul4(&r, &s))
}

fn su2(alpha: f64, theta: f64, beta: f64) -> Mat2 {
    mul2(&rz(alpha), &mul2(&ry(theta), &rz(beta)))
}

fn conjugate(local: &Mat4) -> RealMat4 {
    let q = magic();
    let u = mul4(&dagger4(&q), &mul4(local, &q));
    let mut r = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            r[i][j] = u[i][j].re;
        }
    }
    r
}

/// SO(4) entangler for `params = [a1, t1, b1, a2, t2, b2]`.
pub fn so4_unitary(params: &[f64; 6]) -> RealMat4 {
    let a = su2(params[0], params[1], params[2]);
    let b = su2(params[3], params[4], params[5]);
    conjugate(&kron(&a, &b))
}

/// Partial derivatives of [`so4_unitary`] with respect to each parameter.
pub fn so4_derivatives(params: &[f64; 6]) -> [RealMat4; 6] {
    let half_i = Complex64::new(0.0, -0.5);
    let scale = |m: Mat2, pauli_z: bool| -> Mat2 {
        // (-i/2) sigma . m, sigma is Z or Y
        let mut r = [[ZERO; 2]; 2];
        for j in 0..2 {
            if pauli_z {
                r[0][j] = half_i * m[0][j];
                r[1][j] = -half_i * m[1][j];
            } else {
                // Y = [[0,-i],[i,0]]
                r[0][j] = half_i * Complex64::new(0.0, -1.0) * m[1][j];
                r[1][j] = half_i * Complex64::new(0.0, 1.0) * m[0][j];
            }
        }
        r
    };
    let derivs = |al: f64, th: f64, be: f64| -> [Mat2; 3] {
        let (za, yt, zb) = (rz(al), ry(th), rz(be));
        [
            mul2(&scale(za, true), &mul2(&yt, &zb)),
            mul2(&za, &mul2(&scale(yt, false), &zb)),
            mul2(&za, &mul2(&yt, &scale(zb, true))),
        ]
    };
    let a = su2(params[0], params[1], params[2]);
    let b = su2(params[3], params[4], params[5]);
    let da = derivs(params[0], params[1], params[2]);
    let db = derivs(params[3], params[4], params[5]);
    [
        conjugate(&kron(&da[0], &b)),
        conjugate(&kron(&da[1], &b)),
        conjugate(&kron(&da[2], &b)),
        conjugate(&kron(&a, &db[0])),
        conjugate(&kron(&a, &db[1])),
        conjugate(&kron(&a, &db[2])),
    ]
}

/// One step of the elementary SO(4) circuit on a two-qubit register.
#[derive(Clone, Debug)]
pub enum Elementary {
    OneQubit { qubit: usize, matrix: Mat2 },
    Cnot { control: usize, target: usize },
}

/// The 14-gate circuit realising [`so4_unitary`]: 12 one-qubit gates, 2 CNOTs.
pub fn so4_decomposition(params: &[f64; 6]) -> Vec<Elementary> {
    use Elementary::*;
    let s = rz(FRAC_PI_2);
    let sdg = rz(-FRAC_PI_2);
    let r = ry(FRAC_PI_2);
    let rdg = ry(-FRAC_PI_2);
    vec![
        OneQubit { qubit: 0, matrix: s },
        OneQubit { qubit: 1, matrix: s },
        OneQubit { qubit: 1, matrix: r },
        Cnot { control: 1, target: 0 },
        OneQubit { qubit: 0, matrix: rz(params[2]) },
        OneQubit { qubit: 0, matrix: ry(params[1]) },
        OneQubit { qubit: 0, matrix: rz(params[0]) },
        OneQubit { qubit: 1, matrix: rz(params[5]) },
        OneQubit { qubit: 1, matrix: ry(params[4]) },
        OneQubit { qubit: 1, matrix: rz(params[3]) },
        Cnot { control: 1, target: 0 },
        OneQubit { qubit: 1, matrix: rdg },
        OneQubit { qubit: 0, matrix: sdg },
        OneQubit { qubit: 1, matrix: sdg },
    ]
}

/// Multiplies out an elementary two-qubit sequence (applied in list order).
pub fn compose_elementary(seq: &[Elementary]) -> Mat4 {
    seq.iter().fold(identity4(), |acc, g| {
        let m = match g {
            Elementary::OneQubit { qubit: 0, matrix } => kron(matrix, &identity2()),
            Elementary::OneQubit { matrix, .. } => kron(&identity2(), matrix),
            Elementary::Cnot { control: 0, .. } => cnot_first_control(),
            Elementary::Cnot { .. } => cnot_second_control(),
        };
        mul4(&m, &acc)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_params(rng: &mut ChaCha8Rng) -> [f64; 6] {
        let mut p = [0.0; 6];
        p.iter_mut().for_each(|v| *v = rng.random_range(-7.0..7.0));
        p
    }

    fn det4(m: &RealMat4) -> f64 {
        let a = nalgebra::Matrix4::from_fn(|i, j| m[i][j]);
        a.determinant()
    }

    #[test]
    fn zero_parameters_give_identity() {
        let u = so4_unitary(&[0.0; 6]);
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((u[i][j] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn so4_membership_for_random_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = random_params(&mut rng);
            let u = so4_unitary(&p);
            let local = kron(&su2(p[0], p[1], p[2]), &su2(p[3], p[4], p[5]));
            let q = magic();
            let full = mul4(&dagger4(&q), &mul4(&local, &q));
            for row in &full {
                for v in row {
                    assert!(v.im.abs() < 1e-12, "imaginary part leaked");
                }
            }
            for i in 0..4 {
                for j in 0..4 {
                    let dot: f64 = (0..4).map(|k| u[k][i] * u[k][j]).sum();
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - e).abs() < 1e-10);
                }
            }
            assert!((det4(&u) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn decomposition_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let p = random_params(&mut rng);
            let seq = so4_decomposition(&p);
            let cnots = seq.iter().filter(|g| matches!(g, Elementary::Cnot { .. })).count();
            assert_eq!(cnots, 2);
            assert_eq!(seq.len() - cnots, 12);
            let u1 = so4_unitary(&p);
            let u2 = compose_elementary(&seq);
            let tr: Complex64 = (0..4).flat_map(|i| (0..4).map(move |k| (i, k))).map(|(i, k)| u1[k][i] * u2[k][i]).sum();
            assert!((tr.norm() - 4.0).abs() < 1e-8);
        }
    }

    #[test]
    fn fswap_is_special_orthogonal() {
        let f = fswap();
        assert!((det4(&f) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_params(&mut rng);
        let d = so4_derivatives(&p);
        let h = 1e-6;
        for k in 0..6 {
            let mut pp = p;
            let mut pm = p;
            pp[k] += h;
            pm[k] -= h;
            let (up, um) = (so4_unitary(&pp), so4_unitary(&pm));
            for i in 0..4 {
                for j in 0..4 {
                    let fd = (up[i][j] - um[i][j]) / (2.0 * h);
                    assert!((fd - d[k][i][j]).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn continuity_smoke() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let p = random_params(&mut rng);
            let mut q = p;
            let mut dn = 0.0;
            for v in q.iter_mut() {
                let d = rng.random_range(-1e-4..1e-4);
                *v += d;
                dn += d * d;
            }
            let (a, b) = (so4_unitary(&p), so4_unitary(&q));
            let diff: f64 = (0..16).map(|k| (a[k / 4][k % 4] - b[k / 4][k % 4]).powi(2)).sum::<f64>().sqrt();
            assert!(diff <= 10.0 * dn.sqrt());
        }
    }
}
