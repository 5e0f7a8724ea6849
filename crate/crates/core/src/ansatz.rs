//! Circuits built from layer plans: CNOT entanglers, SO(4) entanglers and
//! the heuristic ladder baseline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{QidaError, Result};
use crate::layers::{LayerPlan, Pair};
use crate::sim::AnsatzCircuit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    QidaCx,
    QidaSo4,
    Ladder { depth: usize },
}

impl fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnsatzKind::QidaCx => write!(f, "QIDA-CX"),
            AnsatzKind::QidaSo4 => write!(f, "QIDA-SO4"),
            AnsatzKind::Ladder { depth } => write!(f, "Ladder-{depth}"),
        }
    }
}

impl FromStr for AnsatzKind {
    type Err = QidaError;

    /// Accepts `cx`, `so4`, `ladder:<d>` and the display forms.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase().replace('_', "-");
        match t.as_str() {
            "cx" | "qida-cx" => Ok(AnsatzKind::QidaCx),
            "so4" | "qida-so4" => Ok(AnsatzKind::QidaSo4),
            _ => {
                let d = t
                    .strip_prefix("ladder:")
                    .or_else(|| t.strip_prefix("ladder-"))
                    .ok_or_else(|| QidaError::Parse(format!("unknown ansatz `{s}`")))?;
                let depth: usize = d.parse().map_err(|_| QidaError::Parse(format!("bad ladder depth in `{s}`")))?;
                if depth == 0 {
                    return Err(QidaError::Parse("ladder depth must be at least 1".into()));
                }
                Ok(AnsatzKind::Ladder { depth })
            }
        }
    }
}

/// `Ry` column and CNOT chain, `d` times, then a closing `Ry` column.
/// Each repetition is one layer; the closing column joins the last one.
pub fn compose_ladder(n: usize, d: usize) -> Result<AnsatzCircuit> {
    if n < 2 || d == 0 {
        return Err(QidaError::Invalid(format!("ladder needs n >= 2 and d >= 1, got n={n}, d={d}")));
    }
    let mut c = AnsatzCircuit::empty(n);
    for _ in 0..d {
        c.begin_layer();
        (0..n).for_each(|q| c.push_ry(q));
        (1..n).for_each(|q| c.push_cnot(q - 1, q));
    }
    (0..n).for_each(|q| c.push_ry(q));
    Ok(c)
}

/// Non-empty layers with each pair as `(min, max)`, sorted lexicographically.
/// Gates that share a qubit do not commute, so the order is fixed here rather
/// than inherited from the QMI ranking.
fn layers_of(plan: &LayerPlan) -> Result<Vec<Vec<Pair>>> {
    let all: Vec<Vec<Pair>> = plan
        .qida_layers
        .iter()
        .chain(&plan.closure_layers)
        .filter(|l| !l.is_empty())
        .map(|l| {
            let mut l: Vec<Pair> = l.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect();
            l.sort_unstable();
            l
        })
        .collect();
    if all.is_empty() {
        return Err(QidaError::EmptyPlan);
    }
    Ok(all)
}

/// First layer: `Ry` column then one CNOT per pair. Later layers are
/// V-shaped: `Ry` column, CNOTs, `Ry` column, CNOTs reversed, `Ry` column.
pub fn compose_qida_cx(plan: &LayerPlan) -> Result<AnsatzCircuit> {
    let n = plan.n_qubits;
    let layers = layers_of(plan)?;
    let mut c = AnsatzCircuit::empty(n);
    for (l, pairs) in layers.into_iter().enumerate() {
        c.begin_layer();
        (0..n).for_each(|q| c.push_ry(q));
        pairs.iter().for_each(|&(i, j)| c.push_cnot(i, j));
        if l > 0 {
            (0..n).for_each(|q| c.push_ry(q));
            pairs.iter().rev().for_each(|&(i, j)| c.push_cnot(i, j));
            (0..n).for_each(|q| c.push_ry(q));
        }
    }
    c.validate()?;
    Ok(c)
}

/// One SO(4) gate per pair in every layer.
pub fn compose_qida_so4(plan: &LayerPlan) -> Result<AnsatzCircuit> {
    let layers = layers_of(plan)?;
    let mut c = AnsatzCircuit::empty(plan.n_qubits);
    for pairs in layers {
        c.begin_layer();
        pairs.iter().for_each(|&(i, j)| c.push_so4(i, j));
    }
    c.validate()?;
    Ok(c)
}

/// Builds the requested flavour; ladders ignore the plan except for its size.
pub fn compose(kind: AnsatzKind, plan: &LayerPlan) -> Result<AnsatzCircuit> {
    match kind {
        AnsatzKind::QidaCx => compose_qida_cx(plan),
        AnsatzKind::QidaSo4 => compose_qida_so4(plan),
        AnsatzKind::Ladder { depth } => compose_ladder(plan.n_qubits, depth),
    }
}

pub fn cnot_count(circuit: &AnsatzCircuit) -> usize {
    circuit.cnot_count()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitSummary {
    pub kind: String,
    pub n_qubits: usize,
    pub n_params: usize,
    pub n_layers: usize,
    pub cnot_count: usize,
    pub layer_gate_ranges: Vec<(usize, usize)>,
    pub layer_param_ranges: Vec<(usize, usize)>,
    pub gates: Vec<crate::sim::Gate>,
}

pub fn summarize(kind: AnsatzKind, circuit: &AnsatzCircuit) -> CircuitSummary {
    CircuitSummary {
        kind: kind.to_string(),
        n_qubits: circuit.n_qubits,
        n_params: circuit.n_params,
        n_layers: circuit.n_layers(),
        cnot_count: circuit.cnot_count(),
        layer_gate_ranges: circuit.layer_gates.iter().map(|r| (r.start, r.end)).collect(),
        layer_param_ranges: circuit.layer_params.iter().map(|r| (r.start, r.end)).collect(),
        gates: circuit.gates.clone(),
    }
}
