use num_complex::Complex64;
use proptest::prelude::*;
use qida_core::ansatz::{compose, AnsatzKind};
use qida_core::layers::{build_layers, FinesseRatio, LayerPlan};
use qida_core::lattice::{build_heisenberg, LatticeSpec};
use qida_core::metrics::{aqe, rqe, summarize};
use qida_core::pauli::{Pauli, PauliHamiltonian, PauliString};
use qida_core::qmi::{qmi_matrix, QmiMatrix};
use qida_core::sim::{energy_and_gradient, run_circuit, run_gates, so4_unitary};
use qida_core::state::DenseState;

fn state_strategy(n: usize) -> impl Strategy<Value = DenseState> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n)
        .prop_filter("non-zero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|v| {
            let mut s = DenseState::from_amplitudes(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap();
            s.normalize();
            s
        })
}

fn qmi_strategy(n: usize) -> impl Strategy<Value = QmiMatrix> {
    prop::collection::vec(0.01f64..1.0, n * (n - 1) / 2).prop_map(move |upper| {
        let mut values = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                values[i * n + j] = upper[k];
                values[j * n + i] = upper[k];
                k += 1;
            }
        }
        QmiMatrix { n, values, entropies: vec![] }.normalized()
    })
}

fn pauli() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn so4_is_special_orthogonal(p in prop::array::uniform6(-7.0f64..7.0)) {
        let u = so4_unitary(&p);
        for r in 0..4 {
            for c in 0..4 {
                let dot: f64 = (0..4).map(|k| u[k][r] * u[k][c]).sum();
                let want = if r == c { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-10);
            }
        }
        let m = nalgebra::Matrix4::from_fn(|r, c| u[r][c]);
        prop_assert!((m.determinant() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn qmi_is_symmetric_and_bounded(s in state_strategy(4)) {
        let q = qmi_matrix(&s).unwrap();
        for i in 0..4 {
            prop_assert_eq!(q.get(i, i), 0.0);
            prop_assert!(q.entropies[i] >= -1e-12 && q.entropies[i] <= 1.0 + 1e-9);
            for j in 0..4 {
                prop_assert_eq!(q.get(i, j), q.get(j, i));
                prop_assert!(q.get(i, j) >= 0.0);
                if i != j {
                    prop_assert!(q.get(i, j) <= 2.0 * q.entropies[i].min(q.entropies[j]) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn product_states_carry_no_mutual_information(angles in prop::collection::vec(0.0f64..6.3, 5)) {
        let factors: Vec<[Complex64; 2]> = angles.iter().map(|t| [Complex64::new(t.cos(), 0.0), Complex64::new(0.0, t.sin())]).collect();
        let q = qmi_matrix(&DenseState::product(&factors)).unwrap();
        prop_assert!(q.max_offdiag() < 1e-9);
    }

    #[test]
    fn layer_plans_are_valid_and_round_trip(q in qmi_strategy(7)) {
        let plan = build_layers(&q, &FinesseRatio::default_tenths()).unwrap();
        plan.validate().unwrap();
        prop_assert!(plan.qida_layers.iter().all(|l| !l.is_empty()));
        prop_assert_eq!(plan.closure_layers.len(), 1);
        let back = LayerPlan::from_text(&plan.to_text()).unwrap();
        prop_assert_eq!(back.canonical(), plan.canonical());
    }

    #[test]
    fn cnot_count_follows_layer_sizes(q in qmi_strategy(6)) {
        let plan = build_layers(&q, &FinesseRatio::default_tenths()).unwrap();
        let sizes: Vec<usize> = plan.qida_layers.iter().chain(&plan.closure_layers).map(Vec::len).collect();
        let cx = compose(AnsatzKind::QidaCx, &plan).unwrap();
        prop_assert_eq!(cx.cnot_count(), sizes[0] + 2 * sizes[1..].iter().sum::<usize>());
        let so4 = compose(AnsatzKind::QidaSo4, &plan).unwrap();
        prop_assert_eq!(so4.cnot_count(), 2 * sizes.iter().sum::<usize>());
    }

    #[test]
    fn later_layers_are_identity_at_zero(q in qmi_strategy(5), s in state_strategy(5)) {
        let plan = build_layers(&q, &FinesseRatio::default_tenths()).unwrap();
        for kind in [AnsatzKind::QidaCx, AnsatzKind::QidaSo4] {
            let c = compose(kind, &plan).unwrap();
            let zeros = vec![0.0; c.n_params];
            let out = run_gates(&c.gates[c.layer_gates[0].end..], &zeros, &s).unwrap();
            prop_assert!(out.overlap(&s) > 1.0 - 1e-10);
        }
    }

    #[test]
    fn circuits_preserve_norm(q in qmi_strategy(5), seed in any::<u64>()) {
        let plan = build_layers(&q, &FinesseRatio::default_tenths()).unwrap();
        let c = compose(AnsatzKind::QidaSo4, &plan).unwrap();
        let params: Vec<f64> = (0..c.n_params).map(|k| ((seed.wrapping_add(k as u64) % 1000) as f64) * 0.0123).collect();
        let out = run_circuit(&c, &params, &DenseState::zero(5)).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energies_respect_the_ground_state(params in prop::collection::vec(-3.2f64..3.2, 32)) {
        let spec = LatticeSpec::new(2, 2);
        let h = build_heisenberg(&spec).unwrap();
        let e0 = qida_core::exact_ground_state(&h).unwrap().energy;
        let c = qida_core::ansatz::compose_ladder(4, 7).unwrap();
        let (e, _) = energy_and_gradient(&h.compile(), &c, &params[..c.n_params], &DenseState::zero(4)).unwrap();
        prop_assert!(e >= e0 - 1e-10);
    }

    #[test]
    fn pauli_hamiltonians_are_hermitian(
        terms in prop::collection::vec((-2.0f64..2.0, prop::collection::vec(pauli(), 3)), 1..6)
    ) {
        let mut h = PauliHamiltonian::new(3);
        for (c, ops) in terms {
            h.add(PauliString::new(c, ops)).unwrap();
        }
        let m = h.to_dense().unwrap();
        for r in 0..8 {
            for c in 0..8 {
                prop_assert!((m[r][c] - m[c][r].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn metric_identities(
        e_exact in -20.0f64..-1.0,
        gap in 0.1f64..5.0,
        frac in prop::collection::vec(0.0f64..1.0, 2..12),
    ) {
        let e_neel = e_exact + gap;
        prop_assert_eq!(rqe(e_exact, e_exact, e_neel).unwrap(), 100.0);
        prop_assert_eq!(rqe(e_neel, e_exact, e_neel).unwrap(), 0.0);
        prop_assert!((aqe(e_exact, e_exact).unwrap() - 100.0).abs() < 1e-12);
        let energies: Vec<f64> = frac.iter().map(|f| e_exact + f * gap).collect();
        let s = summarize("L", "A", &energies, e_exact, e_neel, 0).unwrap();
        prop_assert!((s.maed - s.med * 100.0 / e_exact.abs()).abs() < 1e-9);
        prop_assert!(s.e_best <= s.e_avg + 1e-12);
        prop_assert!(s.aqe_best >= s.aqe_avg - 1e-9);
        prop_assert!(s.med >= 0.0 && s.e_std >= 0.0);
    }
}
