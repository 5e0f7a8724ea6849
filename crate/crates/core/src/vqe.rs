//! Single VQE runs, the iterative layer-by-layer schedule and seeded batches.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{compose, AnsatzKind};
use crate::error::{QidaError, Result};
use crate::layers::LayerPlan;
use crate::optim::{bfgs_observed, BfgsConfig, StopReason};
use crate::pauli::{CompiledPauli, PauliHamiltonian};
use crate::sim::{energy_and_gradient, run_circuit, AnsatzCircuit, Gate};
use crate::state::DenseState;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// |0...0>
    #[default]
    Zero,
    /// Computational basis state with the given index.
    Basis(usize),
}

impl InitialState {
    pub fn state(&self, n_qubits: usize) -> Result<DenseState> {
        match *self {
            InitialState::Zero => Ok(DenseState::zero(n_qubits)),
            InitialState::Basis(b) if b < 1usize << n_qubits => Ok(DenseState::basis(n_qubits, b)),
            InitialState::Basis(b) => Err(QidaError::Invalid(format!("basis index {b} too large for {n_qubits} qubits"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VqeConfig {
    pub optimizer: BfgsConfig,
    /// Optional iteration cap for relaxation phases only.
    pub relax_max_iter: Option<usize>,
    pub initial: InitialState,
}

impl Default for VqeConfig {
    fn default() -> Self {
        Self { optimizer: BfgsConfig::default(), relax_max_iter: None, initial: InitialState::Zero }
    }
}

#[derive(Clone, Debug)]
pub struct VqeOutcome {
    pub energy: f64,
    pub params: Vec<f64>,
    /// Energy at the start and after each optimizer iteration.
    pub trajectory: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: StopReason,
}

/// Minimizes `<H>` over the circuit parameters from `init`.
pub fn vqe(h: &CompiledPauli, circuit: &AnsatzCircuit, init: &[f64], initial: &DenseState, cfg: &BfgsConfig) -> Result<VqeOutcome> {
    if init.len() != circuit.n_params {
        return Err(QidaError::ParamLength { expected: circuit.n_params, got: init.len() });
    }
    let mut f = |x: &[f64]| energy_and_gradient(h, circuit, x, initial);
    let r = bfgs_observed(&mut f, init, cfg, |_, _| {})?;
    Ok(VqeOutcome { energy: r.f, params: r.x, trajectory: r.trajectory, iterations: r.iterations, evaluations: r.evaluations, stop: r.stop })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    /// Plain optimization of a whole circuit.
    Full,
    /// Only the newest layer's parameters move.
    Layer,
    /// All parameters move after a layer was added.
    Relax,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseSpan {
    /// 1-based layer the phase belongs to.
    pub layer: usize,
    pub kind: PhaseKind,
    /// Half-open range into the trajectory.
    pub start: usize,
    pub end: usize,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: StopReason,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VqeRunRecord {
    pub run_id: usize,
    pub seed: u64,
    pub ansatz: String,
    pub energy: f64,
    pub params: Vec<f64>,
    pub trajectory: Vec<f64>,
    pub phases: Vec<PhaseSpan>,
    pub iterations: usize,
    pub evaluations: usize,
    pub cnot_count: usize,
    /// Set when the run aborted; the trajectory is then partial.
    pub error: Option<String>,
}

impl VqeRunRecord {
    fn new(run_id: usize, seed: u64, ansatz: String, cnot_count: usize) -> Self {
        Self {
            run_id,
            seed,
            ansatz,
            energy: f64::NAN,
            params: Vec::new(),
            trajectory: Vec::new(),
            phases: Vec::new(),
            iterations: 0,
            evaluations: 0,
            cnot_count,
            error: None,
        }
    }

    pub fn succeeded(&self) -> bool {
        self.error.is_none() && self.energy.is_finite()
    }

    fn push_phase(&mut self, layer: usize, kind: PhaseKind, out: &VqeOutcome) {
        let start = self.trajectory.len();
        self.trajectory.extend_from_slice(&out.trajectory);
        self.iterations += out.iterations;
        self.evaluations += out.evaluations;
        self.phases.push(PhaseSpan { layer, kind, start, end: self.trajectory.len(), iterations: out.iterations, evaluations: out.evaluations, stop: out.stop });
        self.energy = out.energy;
    }

    /// Phase label of every trajectory point.
    pub fn point_phases(&self) -> Vec<String> {
        let mut out = vec![String::new(); self.trajectory.len()];
        for p in &self.phases {
            let label = match p.kind {
                PhaseKind::Full => "full".to_string(),
                PhaseKind::Layer => format!("layer{}", p.layer),
                PhaseKind::Relax => format!("relax{}", p.layer),
            };
            out[p.start..p.end].iter_mut().for_each(|s| s.clone_from(&label));
        }
        out
    }
}

/// Generator for a run's random draws, keyed by seed and layer.
pub fn layer_rng(seed: u64, layer: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(layer as u64);
    rng
}

fn uniform_angles(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
}

/// The gates of layer `l` with parameter slots shifted to start at zero.
fn layer_circuit(circuit: &AnsatzCircuit, l: usize) -> AnsatzCircuit {
    let off = circuit.layer_params[l].start;
    let gates: Vec<Gate> = circuit.gates[circuit.layer_gates[l].clone()]
        .iter()
        .map(|g| match g.clone() {
            Gate::Rx { qubit, slot } => Gate::Rx { qubit, slot: slot - off },
            Gate::Ry { qubit, slot } => Gate::Ry { qubit, slot: slot - off },
            Gate::Rz { qubit, slot } => Gate::Rz { qubit, slot: slot - off },
            Gate::So4 { qubits, slots } => Gate::So4 { qubits, slots: slots.map(|s| s - off) },
            g => g,
        })
        .collect();
    let np = circuit.layer_params[l].len();
    AnsatzCircuit { n_qubits: circuit.n_qubits, layer_gates: vec![0..gates.len()], layer_params: vec![0..np], gates, n_params: np }
}

/// Layer-by-layer schedule: layer 1 from random angles in `[0, 2pi)`; each
/// later layer starts at zero, is optimized alone with earlier parameters
/// frozen, then all parameters are relaxed together.
pub fn iterative_layered_vqe(h: &CompiledPauli, circuit: &AnsatzCircuit, run_id: usize, seed: u64, label: &str, cfg: &VqeConfig) -> VqeRunRecord {
    let mut rec = VqeRunRecord::new(run_id, seed, label.to_string(), circuit.cnot_count());
    if let Err(e) = layered_inner(h, circuit, seed, cfg, &mut rec) {
        rec.error = Some(e.to_string());
    }
    rec
}

fn layered_inner(h: &CompiledPauli, circuit: &AnsatzCircuit, seed: u64, cfg: &VqeConfig, rec: &mut VqeRunRecord) -> Result<()> {
    let initial = cfg.initial.state(circuit.n_qubits)?;
    let n_layers = circuit.n_layers();
    if n_layers == 0 {
        return Err(QidaError::EmptyPlan);
    }
    let first = circuit.truncated(1);
    let init = uniform_angles(&mut layer_rng(seed, 0), first.n_params);
    let out = vqe(h, &first, &init, &initial, &cfg.optimizer)?;
    rec.push_phase(1, if n_layers == 1 { PhaseKind::Full } else { PhaseKind::Layer }, &out);
    let mut params = out.params;

    let relax_cfg = BfgsConfig { max_iter: cfg.relax_max_iter.unwrap_or(cfg.optimizer.max_iter), ..cfg.optimizer.clone() };
    for l in 1..n_layers {
        let prefix = run_circuit(&circuit.truncated(l), &params, &initial)?;
        let new_layer = layer_circuit(circuit, l);
        let zeros = vec![0.0; new_layer.n_params];
        let out = vqe(h, &new_layer, &zeros, &prefix, &cfg.optimizer)?;
        rec.push_phase(l + 1, PhaseKind::Layer, &out);
        params.extend_from_slice(&out.params);

        let upto = circuit.truncated(l + 1);
        let out = vqe(h, &upto, &params, &initial, &relax_cfg)?;
        rec.push_phase(l + 1, PhaseKind::Relax, &out);
        params = out.params;
    }
    rec.params = params;
    Ok(())
}

/// One optimization of the whole circuit from random angles.
pub fn single_vqe(h: &CompiledPauli, circuit: &AnsatzCircuit, run_id: usize, seed: u64, label: &str, cfg: &VqeConfig) -> VqeRunRecord {
    let mut rec = VqeRunRecord::new(run_id, seed, label.to_string(), circuit.cnot_count());
    let res = cfg.initial.state(circuit.n_qubits).and_then(|initial| {
        let init = uniform_angles(&mut layer_rng(seed, 0), circuit.n_params);
        vqe(h, circuit, &init, &initial, &cfg.optimizer)
    });
    match res {
        Ok(out) => {
            rec.push_phase(circuit.n_layers().max(1), PhaseKind::Full, &out);
            rec.params = out.params;
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// What a batch runs.
#[derive(Clone, Debug)]
pub enum RunSpec {
    /// Iterative schedule over a layer plan (QIDA flavours) or a single
    /// optimization (ladder).
    Plan { plan: LayerPlan, kind: AnsatzKind },
    Circuit { circuit: AnsatzCircuit, label: String },
}

/// `n_runs` independent runs with seeds `base_seed + k`, in parallel.
pub fn batch_runs(h: &PauliHamiltonian, spec: &RunSpec, n_runs: usize, base_seed: u64, cfg: &VqeConfig) -> Result<Vec<VqeRunRecord>> {
    if n_runs == 0 {
        return Err(QidaError::Invalid("n_runs must be at least 1".into()));
    }
    let compiled = h.compile();
    let (circuit, label, layered) = match spec {
        RunSpec::Plan { plan, kind } => (compose(*kind, plan)?, kind.to_string(), !matches!(kind, AnsatzKind::Ladder { .. })),
        RunSpec::Circuit { circuit, label } => (circuit.clone(), label.clone(), false),
    };
    if circuit.n_qubits != h.n_qubits {
        return Err(QidaError::DimensionMismatch { expected: h.n_qubits, got: circuit.n_qubits });
    }
    Ok((0..n_runs)
        .into_par_iter()
        .map(|k| {
            let seed = base_seed.wrapping_add(k as u64);
            if layered {
                iterative_layered_vqe(&compiled, &circuit, k, seed, &label, cfg)
            } else {
                single_vqe(&compiled, &circuit, k, seed, &label, cfg)
            }
        })
        .collect())
}

pub fn records_to_jsonl(records: &[VqeRunRecord]) -> Result<String> {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r)?);
        s.push('\n');
    }
    Ok(s)
}

pub fn records_from_jsonl(text: &str) -> Result<Vec<VqeRunRecord>> {
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect()
}

/// `ansatz,run_id,seed,iteration,energy,phase` rows for every trajectory point.
pub fn trajectories_csv(records: &[VqeRunRecord]) -> String {
    let mut s = String::from("ansatz,run_id,seed,iteration,energy,phase\n");
    for r in records {
        for (i, (e, p)) in r.trajectory.iter().zip(r.point_phases()).enumerate() {
            let _ = writeln!(s, "{},{},{},{},{:.15e},{}", r.ansatz, r.run_id, r.seed, i, e, p);
        }
    }
    s
}
