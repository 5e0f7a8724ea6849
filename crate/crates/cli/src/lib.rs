//! Experiment configuration and the reference, QMI, layers, VQE and report pipeline.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use qida_core::ansatz::{compose, AnsatzKind};
use qida_core::layers::{build_layers_with, merge_layers, FinesseRatio, LayerOptions, LayerPlan};
use qida_core::lattice::{build_heisenberg, lattice_edges, neel_basis_index, neel_energy, LatticeSpec};
use qida_core::metrics::{summaries_csv, summarize, MetricSummary};
use qida_core::optim::BfgsConfig;
use qida_core::qmi::QmiMatrix;
use qida_core::reference::{exact_ground_state, lattice_reference, BackendKind, LatticeReference};
use qida_core::vqe::{batch_runs, records_from_jsonl, records_to_jsonl, trajectories_csv, InitialState, RunSpec, VqeConfig, VqeRunRecord};
use qida_core::QidaError;
use serde::{Deserialize, Serialize};

/// Largest lattice for which `ham` also reports the exact energy.
pub const HAM_EXACT_LIMIT: usize = 14;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    SelfCheck(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::SelfCheck(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::SelfCheck(v) => write!(f, "self-check failed:\n  {}", v.join("\n  ")),
        }
    }
}

impl std::error::Error for CliError {}

impl From<QidaError> for CliError {
    fn from(e: QidaError) -> Self {
        match e {
            QidaError::InvalidLattice(_)
            | QidaError::InvalidFinesse(_)
            | QidaError::MergeConflict(_)
            | QidaError::Parse(_)
            | QidaError::Invalid(_)
            | QidaError::DimensionCap { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    /// `auto`, `exact` or `dmrg`.
    #[serde(default = "default_backend")]
    pub backend: String,
    #[serde(default = "default_chi")]
    pub chi: usize,
}

fn default_backend() -> String {
    "auto".into()
}

fn default_chi() -> usize {
    64
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self { backend: default_backend(), chi: default_chi() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayersConfig {
    #[serde(default = "default_start")]
    pub start: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    /// Explicit thresholds; overrides `start`/`step`.
    #[serde(default)]
    pub thresholds: Option<Vec<f64>>,
    /// Groups of 0-based layer indices to merge.
    #[serde(default)]
    pub merge: Vec<Vec<usize>>,
    #[serde(default)]
    pub allow_overlap: bool,
    #[serde(default = "default_closure")]
    pub closure_layers: usize,
}

fn default_start() -> f64 {
    0.9
}

fn default_step() -> f64 {
    0.1
}

fn default_closure() -> usize {
    1
}

impl Default for LayersConfig {
    fn default() -> Self {
        Self { start: 0.9, step: 0.1, thresholds: None, merge: vec![], allow_overlap: false, closure_layers: 1 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_ansatze")]
    pub ansatze: Vec<String>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    /// `zero` or `neel`.
    #[serde(default = "default_initial")]
    pub initial_state: String,
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub relax_max_iter: Option<usize>,
}

fn default_ansatze() -> Vec<String> {
    vec!["QIDA-SO4".into(), "QIDA-CX".into()]
}

fn default_runs() -> usize {
    10
}

fn default_initial() -> String {
    "zero".into()
}

fn default_grad_tol() -> f64 {
    1e-6
}

fn default_max_iter() -> usize {
    10_000
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            ansatze: default_ansatze(),
            runs: default_runs(),
            seed: 0,
            initial_state: default_initial(),
            grad_tol: default_grad_tol(),
            max_iter: default_max_iter(),
            relax_max_iter: None,
        }
    }
}

/// Thresholds checked with `--self-check`. Maps are keyed by ansatz label.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub e_exact: Option<f64>,
    pub e_neel: Option<f64>,
    #[serde(default = "default_energy_tol")]
    pub energy_tol: f64,
    #[serde(default)]
    pub cnot: BTreeMap<String, usize>,
    #[serde(default)]
    pub aqe_avg_min: BTreeMap<String, f64>,
    #[serde(default)]
    pub aqe_best_min: BTreeMap<String, f64>,
    #[serde(default)]
    pub aqe_avg_max: BTreeMap<String, f64>,
    #[serde(default)]
    pub med_max: BTreeMap<String, f64>,
}

fn default_energy_tol() -> f64 {
    1e-5
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: Option<String>,
    pub out: Option<PathBuf>,
    pub lattice: LatticeSpec,
    #[serde(default)]
    pub reference: ReferenceConfig,
    #[serde(default)]
    pub layers: LayersConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub expected: Option<Expected>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.lattice.validate()?;
        if self.run.runs == 0 {
            return Err(CliError::Config("run.runs must be at least 1".into()));
        }
        if self.run.ansatze.is_empty() {
            return Err(CliError::Config("run.ansatze is empty".into()));
        }
        self.kinds()?;
        self.backend()?;
        self.finesse()?;
        self.initial_state()?;
        if self.reference.chi == 0 {
            return Err(CliError::Config("reference.chi must be positive".into()));
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.lattice.label())
    }

    pub fn kinds(&self) -> CliResult<Vec<AnsatzKind>> {
        self.run.ansatze.iter().map(|s| s.parse::<AnsatzKind>().map_err(CliError::from)).collect()
    }

    pub fn backend(&self) -> CliResult<BackendKind> {
        Ok(self.reference.backend.parse()?)
    }

    pub fn finesse(&self) -> CliResult<FinesseRatio> {
        Ok(match &self.layers.thresholds {
            Some(t) => FinesseRatio::new(t.clone())?,
            None => FinesseRatio::uniform(self.layers.start, self.layers.step)?,
        })
    }

    pub fn initial_state(&self) -> CliResult<InitialState> {
        match self.run.initial_state.to_ascii_lowercase().as_str() {
            "zero" => Ok(InitialState::Zero),
            "neel" => Ok(InitialState::Basis(neel_basis_index(&self.lattice))),
            other => Err(CliError::Config(format!("unknown initial_state `{other}`"))),
        }
    }

    pub fn vqe_config(&self) -> CliResult<VqeConfig> {
        Ok(VqeConfig {
            optimizer: BfgsConfig { grad_tol: self.run.grad_tol, max_iter: self.run.max_iter, ..BfgsConfig::default() },
            relax_max_iter: self.run.relax_max_iter,
            initial: self.initial_state()?,
        })
    }
}

/// Summary of the Hamiltonian for one lattice.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HamReport {
    pub lattice: String,
    pub n_qubits: usize,
    pub n_terms: usize,
    pub edges: Vec<(usize, usize)>,
    pub e_neel: f64,
    pub e_exact: Option<f64>,
}

impl fmt::Display for HamReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lattice  {}", self.lattice)?;
        writeln!(f, "qubits   {}", self.n_qubits)?;
        writeln!(f, "terms    {}", self.n_terms)?;
        let edges: Vec<String> = self.edges.iter().map(|(i, j)| format!("{i}-{j}")).collect();
        writeln!(f, "edges    {} [{}]", self.edges.len(), edges.join(" "))?;
        writeln!(f, "E_neel   {:.6}", self.e_neel)?;
        match self.e_exact {
            Some(e) => writeln!(f, "E_exact  {e:.6}"),
            None => writeln!(f, "E_exact  (skipped, more than {HAM_EXACT_LIMIT} qubits)"),
        }
    }
}

/// Energies stored next to run records so reports can be rebuilt later.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMeta {
    pub name: String,
    pub lattice: String,
    pub e_exact: f64,
    pub e_neel: f64,
    pub reference_backend: String,
    pub reference_energy: f64,
}

pub struct RunOutput {
    pub summaries: Vec<MetricSummary>,
    pub records: Vec<VqeRunRecord>,
    pub plan: LayerPlan,
    pub meta: RunMeta,
}

/// One configured experiment writing into `out`.
pub struct Experiment {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
}

impl Experiment {
    pub fn new(cfg: ExperimentConfig, out: PathBuf) -> Self {
        Self { cfg, out }
    }

    fn write(&self, file: &str, contents: &str) -> CliResult<PathBuf> {
        fs::create_dir_all(&self.out).map_err(|e| io_err(&self.out, e))?;
        let path = self.out.join(file);
        fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
        Ok(path)
    }

    pub fn ham(&self) -> CliResult<HamReport> {
        let spec = &self.cfg.lattice;
        let h = build_heisenberg(spec)?;
        let e_exact = if spec.n_sites() <= HAM_EXACT_LIMIT { Some(exact_ground_state(&h)?.energy) } else { None };
        let report = HamReport {
            lattice: spec.label(),
            n_qubits: spec.n_sites(),
            n_terms: h.len(),
            edges: lattice_edges(spec)?,
            e_neel: neel_energy(spec)?,
            e_exact,
        };
        self.write("ham.json", &to_json(&report)?)?;
        Ok(report)
    }

    pub fn reference(&self) -> CliResult<LatticeReference> {
        Ok(lattice_reference(&self.cfg.lattice, &self.cfg.backend()?, self.cfg.reference.chi)?)
    }

    /// Writes `qmi.csv` (raw) and `qmi_normalized.csv`; returns the normalized matrix.
    pub fn qmi(&self, reference: &LatticeReference) -> CliResult<QmiMatrix> {
        let raw = reference.qmi()?;
        let norm = raw.normalized();
        self.write("qmi.csv", &raw.to_csv())?;
        self.write("qmi_normalized.csv", &norm.to_csv())?;
        Ok(norm)
    }

    pub fn layers(&self, qmi: &QmiMatrix) -> CliResult<LayerPlan> {
        let opts = LayerOptions { closure_layers: self.cfg.layers.closure_layers, ..LayerOptions::default() };
        let mut plan = build_layers_with(qmi, &self.cfg.finesse()?, &opts)?;
        if !self.cfg.layers.merge.is_empty() {
            plan = merge_layers(&plan, &self.cfg.layers.merge, self.cfg.layers.allow_overlap)?;
        }
        plan.validate()?;
        self.write("layers.txt", &plan.to_text())?;
        Ok(plan)
    }

    /// Full pipeline: reference, QMI, layers, VQE batches and summary.
    pub fn run(&self) -> CliResult<RunOutput> {
        let spec = &self.cfg.lattice;
        let h = build_heisenberg(spec)?;
        let reference = self.reference()?;
        let qmi = self.qmi(&reference)?;
        let plan = self.layers(&qmi)?;
        // the exact energy anchors the metrics; DMRG stands in when exact is out of reach
        let e_exact = if spec.n_sites() <= HAM_EXACT_LIMIT { exact_ground_state(&h)?.energy } else { reference.energy };
        let meta = RunMeta {
            name: self.cfg.name(),
            lattice: spec.label(),
            e_exact,
            e_neel: neel_energy(spec)?,
            reference_backend: reference.backend.to_string(),
            reference_energy: reference.energy,
        };
        let vqe_cfg = self.cfg.vqe_config()?;
        let mut records = Vec::new();
        let mut summaries = Vec::new();
        for kind in self.cfg.kinds()? {
            let runs = batch_runs(&h, &RunSpec::Plan { plan: plan.clone(), kind }, self.cfg.run.runs, self.cfg.run.seed, &vqe_cfg)?;
            summaries.push(summarize_records(&meta, &kind.to_string(), &runs)?);
            records.extend(runs);
        }
        self.write("runs.jsonl", &records_to_jsonl(&records)?)?;
        self.write("trajectories.csv", &trajectories_csv(&records))?;
        self.write("summary.csv", &summaries_csv(&summaries))?;
        self.write("meta.json", &to_json(&meta)?)?;
        Ok(RunOutput { summaries, records, plan, meta })
    }

    /// Threshold violations against the `[expected]` table; empty when none.
    pub fn self_check(&self, ham: Option<&HamReport>, run: Option<&RunOutput>) -> CliResult<Vec<String>> {
        let Some(exp) = &self.cfg.expected else {
            return Ok(vec![]);
        };
        let mut bad = Vec::new();
        let mut energy = |label: &str, got: Option<f64>, want: Option<f64>| {
            if let (Some(g), Some(w)) = (got, want) {
                if (g - w).abs() > exp.energy_tol {
                    bad.push(format!("{label} {g:.8} differs from expected {w:.8}"));
                }
            }
        };
        energy("E_exact", ham.and_then(|h| h.e_exact).or(run.map(|r| r.meta.e_exact)), exp.e_exact);
        energy("E_neel", ham.map(|h| h.e_neel).or(run.map(|r| r.meta.e_neel)), exp.e_neel);
        if let Some(run) = run {
            for (label, want) in &exp.cnot {
                let kind: AnsatzKind = label.parse()?;
                let got = compose(kind, &run.plan)?.cnot_count();
                if got != *want {
                    bad.push(format!("{label} uses {got} CNOTs, expected {want}"));
                }
            }
            let find = |label: &str| -> CliResult<Option<&MetricSummary>> {
                let kind: AnsatzKind = label.parse()?;
                Ok(run.summaries.iter().find(|s| s.ansatz == kind.to_string()))
            };
            let checks: [(&BTreeMap<String, f64>, &str, fn(&MetricSummary) -> f64, bool); 4] = [
                (&exp.aqe_avg_min, "mean AQE", |s| s.aqe_avg, true),
                (&exp.aqe_best_min, "best AQE", |s| s.aqe_best, true),
                (&exp.aqe_avg_max, "mean AQE", |s| s.aqe_avg, false),
                (&exp.med_max, "MED", |s| s.med, false),
            ];
            for (map, what, get, is_min) in checks {
                for (label, bound) in map {
                    let Some(s) = find(label)? else {
                        bad.push(format!("{label} was not run"));
                        continue;
                    };
                    let v = get(s);
                    if (is_min && v < *bound) || (!is_min && v > *bound) {
                        let rel = if is_min { "below" } else { "above" };
                        bad.push(format!("{label} {what} {v:.6} is {rel} {bound}"));
                    }
                }
            }
            let failed: Vec<String> = run.records.iter().filter(|r| !r.succeeded()).map(|r| format!("{} run {}", r.ansatz, r.run_id)).collect();
            if !failed.is_empty() {
                bad.push(format!("failed runs: {}", failed.join(", ")));
            }
        }
        Ok(bad)
    }
}

fn summarize_records(meta: &RunMeta, ansatz: &str, runs: &[VqeRunRecord]) -> CliResult<MetricSummary> {
    let ok: Vec<&VqeRunRecord> = runs.iter().filter(|r| r.succeeded()).collect();
    if ok.is_empty() {
        let why = runs.iter().find_map(|r| r.error.clone()).unwrap_or_default();
        return Err(CliError::Numerical(format!("every {ansatz} run failed: {why}")));
    }
    let energies: Vec<f64> = ok.iter().map(|r| r.energy).collect();
    Ok(summarize(&meta.lattice, ansatz, &energies, meta.e_exact, meta.e_neel, ok[0].cnot_count)?)
}

fn to_json<T: Serialize>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| CliError::Numerical(e.to_string()))
}

/// Rebuilds summaries from run directories holding `meta.json` and
/// `runs.jsonl`; one row per (lattice, ansatz) in input order.
pub fn report(dirs: &[PathBuf]) -> CliResult<Vec<MetricSummary>> {
    if dirs.is_empty() {
        return Err(CliError::Config("no run directories given".into()));
    }
    let mut rows = Vec::new();
    for dir in dirs {
        let meta_path = dir.join("meta.json");
        let text = fs::read_to_string(&meta_path).map_err(|e| io_err(&meta_path, e))?;
        let meta: RunMeta = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", meta_path.display())))?;
        let runs_path = dir.join("runs.jsonl");
        let text = fs::read_to_string(&runs_path).map_err(|e| io_err(&runs_path, e))?;
        let records = records_from_jsonl(&text).map_err(|e| CliError::Config(format!("{}: {e}", runs_path.display())))?;
        if records.is_empty() {
            return Err(CliError::Config(format!("{} holds no records", runs_path.display())));
        }
        let mut labels: Vec<&str> = Vec::new();
        for r in &records {
            if !labels.contains(&r.ansatz.as_str()) {
                labels.push(&r.ansatz);
            }
        }
        for label in labels {
            let batch: Vec<VqeRunRecord> = records.iter().filter(|r| r.ansatz == label).cloned().collect();
            rows.push(summarize_records(&meta, label, &batch)?);
        }
    }
    Ok(rows)
}
