//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::time::Instant;

use num_complex::Complex64;
use qida_core::ansatz::{compose, compose_ladder, AnsatzKind};
use qida_core::layers::{build_layers, merge_layers, FinesseRatio, LayerPlan};
use qida_core::lattice::{build_heisenberg, neel_energy, LatticeSpec};
use qida_core::metrics::{rqe, summarize, MetricSummary};
use qida_core::qmi::{qmi_matrix, QmiMatrix};
use qida_core::reference::{exact_ground_state, lattice_dmrg, lattice_reference, BackendKind};
use qida_core::sim::{energy_and_gradient, run_gates, so4_unitary};
use qida_core::state::DenseState;
use qida_core::vqe::{batch_runs, PhaseKind, RunSpec, VqeConfig, VqeRunRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok { Ok(msg) } else { Err(msg) }
}

fn systems() -> Vec<(&'static str, LatticeSpec, f64, Vec<Vec<usize>>)> {
    vec![
        ("3x3", LatticeSpec::new(3, 3), -4.749327, vec![]),
        ("2x6", LatticeSpec::new(2, 6), -6.603472, vec![vec![0, 1, 2]]),
        ("3x4", LatticeSpec::new(3, 4), -6.691680, vec![]),
        ("3x4_h2", LatticeSpec::new(3, 4).with_field(2.0), -9.508473, vec![]),
        ("3x4_delta2over3", LatticeSpec::new(3, 4).with_anisotropy(2.0 / 3.0), -5.338751, vec![]),
        ("3x4_delta0.1", LatticeSpec::new(3, 4).with_anisotropy(0.1), -4.272670, vec![]),
    ]
}

fn plan_for(spec: &LatticeSpec, merge: &[Vec<usize>]) -> LayerPlan {
    let q = lattice_reference(spec, &BackendKind::Exact, 64).unwrap().qmi().unwrap().normalized();
    let plan = build_layers(&q, &FinesseRatio::default_tenths()).unwrap();
    if merge.is_empty() { plan } else { merge_layers(&plan, merge, false).unwrap() }
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> DenseState {
    let amps = (0..1usize << n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let mut s = DenseState::from_amplitudes(amps).unwrap();
    s.normalize();
    s
}

fn max_diff(a: &DenseState, b: &DenseState) -> f64 {
    a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn c1_exact() -> Check {
    let mut worst = 0.0f64;
    for (name, spec, want, _) in systems() {
        let gs = exact_ground_state(&build_heisenberg(&spec).unwrap()).map_err(|e| format!("{name}: {e}"))?;
        let d = (gs.energy - want).abs();
        if d >= 1e-5 {
            return Err(format!("{name}: {} vs {want}", gs.energy));
        }
        worst = worst.max(d);
    }
    Ok(format!("max |dE| = {worst:.1e}"))
}

fn c2_neel() -> Check {
    let got: Vec<f64> = [(3, 3), (2, 6), (3, 4)].iter().map(|&(r, c)| neel_energy(&LatticeSpec::new(r, c)).unwrap()).collect();
    ensure(got == [-3.0, -4.0, -4.25], format!("{got:?}"))
}

fn c3_dmrg() -> Check {
    let mut msg = Vec::new();
    for (name, spec, _, _) in systems().into_iter().filter(|s| s.1.n_sites() == 12) {
        let t = Instant::now();
        let ex = exact_ground_state(&build_heisenberg(&spec).unwrap()).unwrap();
        let res = lattice_dmrg(&spec, 64).map_err(|e| format!("{name}: {e}"))?;
        let ov = res.mps.to_dense().unwrap().overlap(&ex.state);
        let de = (res.energy - ex.energy).abs();
        let secs = t.elapsed().as_secs_f64();
        if de >= 1e-6 || ov < 1.0 - 1e-5 || secs > 60.0 {
            return Err(format!("{name}: dE {de:.1e}, overlap {ov}, {secs:.1}s"));
        }
        msg.push(format!("{name} dE={de:.0e}"));
    }
    Ok(msg.join(", "))
}

fn qmi_well_formed(q: &QmiMatrix) -> bool {
    let n = q.n;
    (0..n).all(|i| {
        q.get(i, i) == 0.0
            && (0..n).all(|j| {
                let v = q.get(i, j);
                let bound = 2.0 * q.entropies[i].min(q.entropies[j]) + 1e-9;
                v == q.get(j, i) && v >= 0.0 && (i == j || v <= bound)
            })
    })
}

fn c4_qmi() -> Check {
    let spec = LatticeSpec::new(3, 3);
    let dense = lattice_reference(&spec, &BackendKind::Exact, 64).unwrap().qmi().unwrap();
    let mps = lattice_dmrg(&spec, 64).unwrap().mps;
    let from_mps = qmi_matrix(&mps).unwrap();
    let diff = dense.values.iter().zip(&from_mps.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(diff <= 1e-6 && qmi_well_formed(&dense) && qmi_well_formed(&from_mps), format!("max entry diff {diff:.1e}"))
}

fn c5_layers() -> Check {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");
    for (name, spec, _, merge) in systems() {
        let plan = plan_for(&spec, &merge);
        let golden = std::fs::read_to_string(format!("{dir}/{name}.layers")).unwrap();
        if plan.canonical().to_text() != golden {
            return Err(format!("{name} differs from golden"));
        }
        if name == "3x4" && !(plan.qida_layers[2].contains(&(4, 5)) && plan.qida_layers[2].contains(&(5, 9))) {
            return Err("3x4 layer 3 lacks [4,5] or [5,9]".into());
        }
    }
    Ok("6 systems match".into())
}

fn c6_cnots(plans: &[(String, LayerPlan)]) -> Check {
    let mut got = vec![
        compose_ladder(9, 4).unwrap().cnot_count(),
        compose_ladder(9, 5).unwrap().cnot_count(),
        compose_ladder(12, 4).unwrap().cnot_count(),
        compose_ladder(12, 5).unwrap().cnot_count(),
        compose_ladder(12, 6).unwrap().cnot_count(),
    ];
    for kind in [AnsatzKind::QidaCx, AnsatzKind::QidaSo4] {
        got.extend(plans.iter().map(|(_, p)| compose(kind, p).unwrap().cnot_count()));
    }
    let want = [32, 40, 44, 55, 66, 32, 48, 52, 50, 52, 46, 40, 54, 56, 54, 56, 54];
    ensure(got == want, format!("{} values: {got:?}", got.len()))
}

fn c7_identity(plans: &[(String, LayerPlan)], runs: &[VqeRunRecord]) -> Check {
    let zero = so4_unitary(&[0.0; 6]);
    let so4_err = (0..4).flat_map(|r| (0..4).map(move |c| (r, c))).map(|(r, c)| (zero[r][c] - if r == c { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max);
    if so4_err != 0.0 {
        return Err(format!("so4_unitary(0) off identity by {so4_err:e}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for (_, plan) in plans {
        for kind in [AnsatzKind::QidaCx, AnsatzKind::QidaSo4] {
            let c = compose(kind, plan).unwrap();
            let zeros = vec![0.0; c.n_params];
            for _ in 0..100 {
                let psi = random_state(c.n_qubits, &mut rng);
                for l in 1..c.n_layers() {
                    let out = run_gates(&c.gates[c.layer_gates[l].clone()], &zeros, &psi).unwrap();
                    worst = worst.max(max_diff(&out, &psi));
                }
            }
        }
    }
    if worst > 1e-10 {
        return Err(format!("zero layer error {worst:.1e}"));
    }
    // first point of every new-layer phase equals the end of the previous phase
    let mut append = 0.0f64;
    for r in runs {
        for w in r.phases.windows(2) {
            if w[1].kind == PhaseKind::Layer {
                append = append.max((r.trajectory[w[1].start] - r.trajectory[w[0].end - 1]).abs());
            }
        }
    }
    ensure(append <= 1e-9, format!("layer error {worst:.1e}, append shift {append:.1e}"))
}

fn c8_gradient(plan_3x3: &LayerPlan) -> Check {
    let h = build_heisenberg(&LatticeSpec::new(3, 3)).unwrap().compile();
    let c = compose(AnsatzKind::QidaSo4, plan_3x3).unwrap();
    let init = DenseState::zero(9);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let step = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mut x: Vec<f64> = (0..c.n_params).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let (_, g) = energy_and_gradient(&h, &c, &x, &init).unwrap();
        for k in 0..x.len() {
            let x0 = x[k];
            x[k] = x0 + step;
            let fp = energy_and_gradient(&h, &c, &x, &init).unwrap().0;
            x[k] = x0 - step;
            let fm = energy_and_gradient(&h, &c, &x, &init).unwrap().0;
            x[k] = x0;
            worst = worst.max((g[k] - (fp - fm) / (2.0 * step)).abs());
        }
    }
    ensure(worst <= 1e-6, format!("max component error {worst:.1e} over {} params", c.n_params))
}

struct Batches {
    so4: MetricSummary,
    cx: MetricSummary,
    ladder: MetricSummary,
    runs: Vec<VqeRunRecord>,
    e_exact: f64,
}

fn vqe_batches(plan: &LayerPlan) -> Batches {
    let spec = LatticeSpec::new(3, 4);
    let ham = build_heisenberg(&spec).unwrap();
    let e_exact = exact_ground_state(&ham).unwrap().energy;
    let e_neel = neel_energy(&spec).unwrap();
    let cfg = VqeConfig::default();
    let mut all = Vec::new();
    let mut summary = |kind: AnsatzKind| {
        let runs = batch_runs(&ham, &RunSpec::Plan { plan: plan.clone(), kind }, 10, 0, &cfg).unwrap();
        let energies: Vec<f64> = runs.iter().map(|r| r.energy).collect();
        let s = summarize("3x4", &kind.to_string(), &energies, e_exact, e_neel, runs[0].cnot_count).unwrap();
        all.extend(runs);
        s
    };
    let so4 = summary(AnsatzKind::QidaSo4);
    let cx = summary(AnsatzKind::QidaCx);
    let ladder = summary(AnsatzKind::Ladder { depth: 5 });
    Batches { so4, cx, ladder, runs: all, e_exact }
}

fn c9_statistics(b: &Batches) -> Check {
    let failed = b.runs.iter().filter(|r| !r.succeeded()).count();
    let a = b.so4.aqe_avg >= 93.0 && b.so4.aqe_best >= 94.5;
    let bb = b.cx.aqe_avg >= 91.5;
    let c = b.ladder.aqe_avg <= 90.0 && b.so4.rqe_avg - b.ladder.rqe_avg >= 10.0;
    let d = b.cx.med <= 0.05;
    let msg = format!(
        "(a) SO4 AQE {:.3}/{:.3} {} (b) CX AQE {:.3} {} (c) ladder AQE {:.3}, RQE gap {:.1} {} (d) CX MED {:.1e} {}",
        b.so4.aqe_avg,
        b.so4.aqe_best,
        mark(a),
        b.cx.aqe_avg,
        mark(bb),
        b.ladder.aqe_avg,
        b.so4.rqe_avg - b.ladder.rqe_avg,
        mark(c),
        b.cx.med,
        mark(d),
    );
    ensure(failed == 0 && a && bb && c && d, msg)
}

fn mark(ok: bool) -> &'static str {
    if ok { "ok" } else { "FAIL" }
}

fn c10_variational(b: &Batches) -> Check {
    let points: usize = b.runs.iter().map(|r| r.trajectory.len()).sum();
    let bad = b.runs.iter().flat_map(|r| &r.trajectory).filter(|&&e| !(e >= b.e_exact - 1e-9)).count();
    ensure(bad == 0, format!("{bad} violations in {points} points"))
}

fn c11_metrics(b: &Batches) -> Check {
    let maed_err = [&b.so4, &b.cx, &b.ladder].iter().map(|s| (s.maed - s.med * 100.0 / b.e_exact.abs()).abs()).fold(0.0, f64::max);
    let e_neel = neel_energy(&LatticeSpec::new(3, 4)).unwrap();
    let ends = rqe(b.e_exact, b.e_exact, e_neel).unwrap() == 100.0 && rqe(e_neel, b.e_exact, e_neel).unwrap() == 0.0;
    ensure(maed_err <= 1e-9 && ends, format!("MAED identity error {maed_err:.1e}, RQE endpoints exact: {ends}"))
}

fn main() {
    // `cargo test -- --list` and similar probes pass flags; nothing to list here
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut failures = 0;
    let mut report = |id: usize, title: &str, r: Check, t: Instant| {
        let (tag, msg) = match r {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failures += 1;
                ("FAIL", m)
            }
        };
        println!("criterion {id:>2} {tag} {title}: {msg} [{:.1}s]", t.elapsed().as_secs_f64());
    };

    let t = Instant::now();
    report(1, "exact energies", c1_exact(), t);
    let t = Instant::now();
    report(2, "Neel energies", c2_neel(), t);
    let t = Instant::now();
    report(3, "DMRG vs exact", c3_dmrg(), t);
    let t = Instant::now();
    report(4, "QMI from MPS vs dense", c4_qmi(), t);
    let t = Instant::now();
    report(5, "layer plans", c5_layers(), t);

    let plans: Vec<(String, LayerPlan)> = systems().into_iter().map(|(n, s, _, m)| (n.to_string(), plan_for(&s, &m))).collect();
    let t = Instant::now();
    report(6, "CNOT counts", c6_cnots(&plans), t);

    let t = Instant::now();
    let batches = vqe_batches(&plans[2].1);
    let vqe_time = t;
    let t = Instant::now();
    report(7, "identity initialization", c7_identity(&plans, &batches.runs), t);
    let t = Instant::now();
    report(8, "gradient vs finite differences", c8_gradient(&plans[0].1), t);
    report(9, "VQE statistics on 3x4", c9_statistics(&batches), vqe_time);
    let t = Instant::now();
    report(10, "variational bound", c10_variational(&batches), t);
    let t = Instant::now();
    report(11, "metric identities", c11_metrics(&batches), t);

    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
