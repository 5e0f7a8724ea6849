//! Partition of qubit pairs into entangling layers by descending mutual-information bands.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QidaError, Result};
use crate::qmi::QmiMatrix;

/// Strictly decreasing thresholds in `(0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinesseRatio {
    thresholds: Vec<f64>,
}

impl FinesseRatio {
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(QidaError::InvalidFinesse("no thresholds".into()));
        }
        for t in &thresholds {
            if !(*t > 0.0 && *t <= 1.0) {
                return Err(QidaError::InvalidFinesse(format!("threshold {t} outside (0, 1]")));
            }
        }
        if thresholds.windows(2).any(|w| w[1] >= w[0]) {
            return Err(QidaError::InvalidFinesse("thresholds must strictly decrease".into()));
        }
        Ok(Self { thresholds })
    }

    /// `start, start - step, ...` while positive. Values are computed as
    /// `start - k * step` and rounded to 12 decimals to avoid drift.
    pub fn uniform(start: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(QidaError::InvalidFinesse(format!("step {step} must be positive")));
        }
        let mut t = Vec::new();
        let mut k = 0u32;
        loop {
            let v = ((start - f64::from(k) * step) * 1e12).round() / 1e12;
            if v <= 1e-12 {
                break;
            }
            t.push(v);
            k += 1;
        }
        Self::new(t)
    }

    /// `0.9, 0.8, ..., 0.1`.
    pub fn default_tenths() -> Self {
        Self::uniform(0.9, 0.1).expect("valid")
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }
}

#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), components: n }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        self.components -= 1;
        true
    }

    pub fn components(&self) -> usize {
        self.components
    }
}

pub type Pair = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerPlan {
    pub n_qubits: usize,
    pub qida_layers: Vec<Vec<Pair>>,
    pub closure_layers: Vec<Vec<Pair>>,
}

/// Nearest-neighbour chain `(0,1), (1,2), ...`.
pub fn ladder_layer(n: usize) -> Vec<Pair> {
    (1..n).map(|k| (k - 1, k)).collect()
}

/// When accepted pairs become visible to the connectivity test.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommitMode {
    /// Against the graph as it was when the layer started.
    #[default]
    Snapshot,
    /// Each accepted pair is added to the graph immediately.
    Immediate,
}

#[derive(Clone, Debug)]
pub struct LayerOptions {
    pub closure_layers: usize,
    pub commit: CommitMode,
}

impl Default for LayerOptions {
    fn default() -> Self {
        Self { closure_layers: 1, commit: CommitMode::Snapshot }
    }
}

/// Builds the layer plan from a max-normalized QMI matrix.
///
/// Bands are `[t0, 1]` followed by `[t_m, t_{m-1})`. A pair joins a layer when
/// its endpoints lie in different components of the graph as it stood when
/// the layer started; accepted edges are committed once the layer closes.
pub fn build_layers(qmi: &QmiMatrix, finesse: &FinesseRatio) -> Result<LayerPlan> {
    build_layers_with(qmi, finesse, &LayerOptions::default())
}

pub fn build_layers_with(qmi: &QmiMatrix, finesse: &FinesseRatio, opts: &LayerOptions) -> Result<LayerPlan> {
    let n = qmi.n;
    if n < 2 {
        return Err(QidaError::Invalid("layer builder needs at least 2 qubits".into()));
    }
    if qmi.values.len() != n * n {
        return Err(QidaError::DimensionMismatch { expected: n * n, got: qmi.values.len() });
    }
    let mut graph = UnionFind::new(n);
    let mut free: BTreeSet<usize> = (0..n).collect();
    let mut layers: Vec<Vec<Pair>> = Vec::new();
    let th = finesse.thresholds();

    for m in 0..th.len() {
        if free.is_empty() && graph.components() == 1 {
            break;
        }
        let lo = th[m];
        let in_band = |v: f64| if m == 0 { v >= lo } else { v >= lo && v < th[m - 1] };
        let mut cands: Vec<(f64, usize, usize)> = qmi.pairs().into_iter().filter(|&(_, _, v)| in_band(v)).map(|(i, j, v)| (v, i, j)).collect();
        cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut snapshot = graph.clone();
        let layer: Vec<Pair> = cands
            .into_iter()
            .filter(|&(_, i, j)| match opts.commit {
                CommitMode::Snapshot => snapshot.find(i) != snapshot.find(j),
                CommitMode::Immediate => snapshot.union(i, j),
            })
            .map(|(_, i, j)| (i, j))
            .collect();
        if layer.is_empty() {
            continue;
        }
        for &(i, j) in &layer {
            graph.union(i, j);
            free.remove(&i);
            free.remove(&j);
        }
        layers.push(layer);
    }

    if !(free.is_empty() && graph.components() == 1) {
        return Err(QidaError::ThresholdsExhausted { uncovered: free.into_iter().collect(), components: graph.components() });
    }
    let plan = LayerPlan { n_qubits: n, qida_layers: layers, closure_layers: vec![ladder_layer(n); opts.closure_layers] };
    plan.validate()?;
    Ok(plan)
}

/// Pairs with `I_ij >= mu`, no connectivity filter.
pub fn single_threshold_qida(qmi: &QmiMatrix, mu: f64) -> Vec<Pair> {
    qmi.pairs()
        .into_iter()
        .filter(|&(_, _, v)| if mu == 0.0 { v > 0.0 } else { v >= mu })
        .map(|(i, j, _)| (i, j))
        .collect()
}

/// Concatenates each group of QIDA layers into one. Groups must be disjoint;
/// the merged layer takes the position of its first member.
pub fn merge_layers(plan: &LayerPlan, groups: &[Vec<usize>], allow_overlap: bool) -> Result<LayerPlan> {
    let mut owner: Vec<Option<usize>> = vec![None; plan.qida_layers.len()];
    for (g, group) in groups.iter().enumerate() {
        if group.is_empty() {
            return Err(QidaError::MergeConflict(format!("group {g} is empty")));
        }
        for &l in group {
            let slot = owner.get_mut(l).ok_or_else(|| QidaError::MergeConflict(format!("layer {l} does not exist")))?;
            if slot.is_some() {
                return Err(QidaError::MergeConflict(format!("layer {l} listed twice")));
            }
            *slot = Some(g);
        }
        if !allow_overlap {
            let mut seen = BTreeSet::new();
            for &l in group {
                for &(i, j) in &plan.qida_layers[l] {
                    for q in [i, j] {
                        if !seen.insert(q) {
                            return Err(QidaError::MergeConflict(format!("qubit {q} appears in more than one merged layer")));
                        }
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    for (l, layer) in plan.qida_layers.iter().enumerate() {
        match owner[l] {
            None => out.push(layer.clone()),
            Some(g) if groups[g].iter().min() == Some(&l) => {
                let mut members = groups[g].clone();
                members.sort_unstable();
                out.push(members.iter().flat_map(|&m| plan.qida_layers[m].iter().copied()).collect());
            }
            Some(_) => {}
        }
    }
    Ok(LayerPlan { n_qubits: plan.n_qubits, qida_layers: out, closure_layers: plan.closure_layers.clone() })
}

impl LayerPlan {
    pub fn all_pairs(&self) -> impl Iterator<Item = &Pair> {
        self.qida_layers.iter().chain(&self.closure_layers).flatten()
    }

    pub fn n_qida_pairs(&self) -> usize {
        self.qida_layers.iter().map(Vec::len).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits;
        let mut seen = BTreeSet::new();
        for layer in &self.qida_layers {
            for &(i, j) in layer {
                if i >= j || j >= n {
                    return Err(QidaError::Invalid(format!("bad pair {i}-{j} for {n} qubits")));
                }
                if !seen.insert((i, j)) {
                    return Err(QidaError::Invalid(format!("pair {i}-{j} repeated")));
                }
            }
        }
        let mut uf = UnionFind::new(n);
        for &(i, j) in self.all_pairs() {
            if i >= n || j >= n {
                return Err(QidaError::QubitOutOfRange { qubit: i.max(j), n_qubits: n });
            }
            uf.union(i, j);
        }
        if uf.components() != 1 {
            return Err(QidaError::Invalid("layer plan does not connect all qubits".into()));
        }
        Ok(())
    }

    /// Same plan with each layer's pairs sorted.
    pub fn canonical(&self) -> LayerPlan {
        let sort = |ls: &Vec<Vec<Pair>>| ls.iter().map(|l| { let mut l = l.clone(); l.sort_unstable(); l }).collect();
        LayerPlan { n_qubits: self.n_qubits, qida_layers: sort(&self.qida_layers), closure_layers: sort(&self.closure_layers) }
    }

    /// Text form: `# n_qubits=N`, one QIDA layer per line, `# closure`, closure layers.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<LayerPlan> {
        let mut n = None;
        let mut qida = Vec::new();
        let mut closure = Vec::new();
        let mut in_closure = false;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("n_qubits=") {
                    n = Some(v.parse::<usize>().map_err(|e| QidaError::Parse(format!("n_qubits: {e}")))?);
                } else if rest == "closure" {
                    in_closure = true;
                }
                continue;
            }
            let layer = line
                .split_whitespace()
                .map(|tok| {
                    let (a, b) = tok.split_once('-').ok_or_else(|| QidaError::Parse(format!("bad pair `{tok}`")))?;
                    let p = |s: &str| s.parse::<usize>().map_err(|e| QidaError::Parse(format!("bad pair `{tok}`: {e}")));
                    Ok((p(a)?, p(b)?))
                })
                .collect::<Result<Vec<Pair>>>()?;
            if in_closure { closure.push(layer) } else { qida.push(layer) }
        }
        let n_qubits = n.ok_or_else(|| QidaError::Parse("missing `# n_qubits=` line".into()))?;
        Ok(LayerPlan { n_qubits, qida_layers: qida, closure_layers: closure })
    }
}

impl fmt::Display for LayerPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let line = |l: &Vec<Pair>| l.iter().map(|(i, j)| format!("{i}-{j}")).collect::<Vec<_>>().join(" ");
        writeln!(f, "# n_qubits={}", self.n_qubits)?;
        for l in &self.qida_layers {
            writeln!(f, "{}", line(l))?;
        }
        writeln!(f, "# closure")?;
        for l in &self.closure_layers {
            writeln!(f, "{}", line(l))?;
        }
        Ok(())
    }
}
