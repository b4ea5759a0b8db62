//! Conversion of read-once quantum formulas into classical read-once
//! formulas of the same size and depth.
//!
//! The recursion works top-down. At each multi-input gate `Φ` (with its
//! trailing single-qubit chain `Ψ`) it enumerates the states each input
//! wire can carry, decides which wires the node's target function depends
//! on, relabels those wire states as bits, and extracts the classical gate
//! `R` with a depth-one realization certifying it. Each child is then
//! recursed on with the bit labelling as its new target.
//!
//! Two modes share the recursion:
//! - exact: a dependent wire carries exactly two pure orthogonal states and
//!   a unitary basis change turns them into `|0⟩`, `|1⟩`;
//! - bounded: the states on a dependent wire must split into two clusters
//!   at least `2 − δ` apart, and representatives of each cluster are fed
//!   through the gate.
//!
//! Wires the target ignores are kept as children with a constant target, so
//! the classical formula has exactly the input's shape.

use serde_json::{json, Value};
use thiserror::Error;

use crate::ir::{
    bits_index, cformula_to_json, index_bits, qformula_to_json, to_json_string, validate_read_once, CFormula,
    FormulaShape, QFormula, QNode, TruthTable,
};
use crate::qlinalg::{
    is_classical_state, orthogonal_pure_pair_basis, trace_distance, Channel, Cx, DensityMatrix, LinalgError, Mat, Tolerances,
};
use crate::scalar::Real;
use crate::simulate::{reachable_states_indexed, truth_table, IndexedStates, SimError, StateSet};

/// Widest gate the engine accepts.
pub const MAX_GATE_ARITY: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DequantizeError {
    #[error("NotReadOnce: variable {0} labels more than one leaf")]
    NotReadOnce(usize),
    #[error("NonClassicalFormulaOutput: the formula output is not classical on input {assignment:?}")]
    NonClassicalFormulaOutput { assignment: Vec<bool> },
    #[error("StructureViolation at gate {path:?}{}: {reason}", wire_suffix(*.wire))]
    StructureViolation {
        path: Vec<usize>,
        wire: Option<usize>,
        reason: String,
    },
    #[error("SeparationViolated at gate {path:?}{}: separation {separation} below {required}", wire_suffix(*.wire))]
    SeparationViolated {
        path: Vec<usize>,
        wire: Option<usize>,
        separation: f64,
        required: f64,
    },
    #[error("NotSeparable: states form {components} clusters, expected 2")]
    NotSeparable { components: usize },
    #[error("TooManyVariables: {count} variables exceed the limit of {limit}")]
    TooManyVariables { count: usize, limit: usize },
    #[error("gate at {path:?} has arity {arity}, above the limit of {limit}")]
    GateTooWide { path: Vec<usize>, arity: usize, limit: usize },
    #[error("error budget {0} must lie in [0, 2)")]
    BadBudget(f64),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Sim(SimError),
}

fn wire_suffix(wire: Option<usize>) -> String {
    wire.map_or_else(String::new, |w| format!(" wire {w}"))
}

impl From<SimError> for DequantizeError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::TooManyVariables { count, limit } => Self::TooManyVariables { count, limit },
            SimError::Linalg(l) => Self::Linalg(l),
            other => Self::Sim(other),
        }
    }
}

/// Allowed bounded-error slack `δ ∈ [0, 2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorBudget<T> {
    delta: T,
}

impl<T: Real> ErrorBudget<T> {
    pub fn new(delta: T) -> Result<Self, DequantizeError> {
        if delta >= T::zero() && delta < T::of(2.0) {
            Ok(Self { delta })
        } else {
            Err(DequantizeError::BadBudget(delta.to_f64_lossless()))
        }
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// Minimum accepted cross-cluster distance, `2 − δ − eps_num`.
    pub fn threshold(&self, tol: &Tolerances<T>) -> T {
        T::of(2.0) - self.delta - tol.eps_num
    }
}

/// How a certificate's realization must reproduce its table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Acceptance<T> {
    /// Every output is the classical state of the table entry.
    Exact,
    /// Outputs round to the table entry and the two output classes stay
    /// `2 − δ` apart.
    Separated { delta: T },
}

/// What the engine did with one input wire of a gate.
#[derive(Clone, Debug, PartialEq)]
pub enum WirePlan<T> {
    /// Two orthogonal pure states; `basis_change` maps them to `|0⟩, |1⟩`.
    Dependent { basis_change: Mat<T> },
    /// Two clusters; bit `b` is represented by `representatives[b]`.
    Separated { representatives: [DensityMatrix<T>; 2] },
    /// The gate ignores this wire; it is fed `fixed_state`.
    Independent { fixed_state: DensityMatrix<T> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateCertificate<T> {
    /// Depth-one formula over leaves `0..arity`.
    pub realization: QFormula<T>,
    pub acceptance: Acceptance<T>,
    pub wires: Vec<WirePlan<T>>,
}

impl<T: Real> GateCertificate<T> {
    pub fn arity(&self) -> usize {
        match &self.realization.node {
            QNode::Leaf(_) => 1,
            QNode::Gate(g) => g.children.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DequantizeOutput<T> {
    pub cformula: CFormula,
    /// One entry per gate of `cformula`, keyed by its child-index path, in preorder.
    pub certificates: Vec<(Vec<usize>, GateCertificate<T>)>,
    pub size: usize,
    pub depth: usize,
}

impl<T: Real> DequantizeOutput<T> {
    pub fn to_json(&self) -> Value {
        json!({
            "cformula": cformula_to_json(&self.cformula),
            "certificates": self.certificates.iter().map(|(path, c)| json!({
                "path": path,
                "acceptance": match c.acceptance {
                    Acceptance::Exact => json!("exact"),
                    Acceptance::Separated { delta } => json!({ "separated": delta.to_f64_lossless() }),
                },
                "realization": qformula_to_json(&c.realization),
            })).collect::<Vec<_>>(),
            "size": self.size,
            "depth": self.depth,
        })
    }

    pub fn to_json_string(&self) -> String {
        to_json_string(&self.to_json())
    }

    /// Runs [`certify_gate`] on every certificate against its emitted table.
    pub fn certificates_valid(&self, tol: &Tolerances<T>) -> bool {
        let gates = self.cformula.gates();
        gates.len() == self.certificates.len()
            && gates
                .iter()
                .zip(&self.certificates)
                .all(|((p, table), (q, cert))| p == q && certify_gate(cert, table, tol))
    }
}

/// True iff the realization reproduces `table` on every classical input
/// under the certificate's acceptance rule.
pub fn certify_gate<T: Real>(cert: &GateCertificate<T>, table: &TruthTable, tol: &Tolerances<T>) -> bool {
    let m = cert.arity();
    if m != table.arity() {
        return false;
    }
    let mut outputs = Vec::with_capacity(1 << m);
    for b in 0..1usize << m {
        match crate::simulate::eval_qformula(&cert.realization, &index_bits(b, m)) {
            Ok(rho) => outputs.push(rho),
            Err(_) => return false,
        }
    }
    match cert.acceptance {
        Acceptance::Exact => outputs
            .iter()
            .enumerate()
            .all(|(b, rho)| is_classical_state(rho, tol) == Some(table.get(b))),
        Acceptance::Separated { delta } => {
            let half = T::of(0.5);
            if !outputs.iter().enumerate().all(|(b, rho)| (rho.prob_one() >= half) == table.get(b)) {
                return false;
            }
            let required = T::of(2.0) - delta - tol.eps_num;
            (0..outputs.len()).all(|i| {
                (0..outputs.len()).all(|j| {
                    table.get(i) || !table.get(j) || trace_distance(&outputs[i], &outputs[j]).is_ok_and(|d| d >= required)
                })
            })
        }
    }
}

/// Result of clustering a state set at separation `2 − δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct StatePartition<T> {
    pub zero: StateSet<T>,
    pub one: StateSet<T>,
    /// Cluster bit of each input state; the cluster holding state 0 is bit 0.
    pub labels: Vec<bool>,
    /// Smallest distance between the two clusters.
    pub separation: T,
}

/// Connected components of the graph joining states closer than `2 − δ`
/// (less `eps_num`); succeeds iff there are exactly two.
pub fn partition_states<T: Real>(
    p: &StateSet<T>,
    budget: &ErrorBudget<T>,
    tol: &Tolerances<T>,
) -> Result<StatePartition<T>, DequantizeError> {
    let n = p.len();
    let threshold = budget.threshold(tol);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut dist = vec![T::zero(); n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = trace_distance(&p.states[i], &p.states[j])?;
            dist[i * n + j] = d;
            dist[j * n + i] = d;
            if d < threshold {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    let mut distinct = roots.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != 2 {
        return Err(DequantizeError::NotSeparable {
            components: distinct.len(),
        });
    }
    let labels: Vec<bool> = roots.iter().map(|&r| r != roots[0]).collect();
    let mut separation = T::infinity();
    for i in 0..n {
        for j in 0..n {
            if !labels[i] && labels[j] {
                separation = separation.min(dist[i * n + j]);
            }
        }
    }
    let subset = |bit: bool| {
        let keep: Vec<usize> = (0..n).filter(|&i| labels[i] == bit).collect();
        StateSet {
            vars: p.vars.clone(),
            states: keep.iter().map(|&i| p.states[i].clone()).collect(),
            witnesses: keep.iter().map(|&i| p.witnesses[i].clone()).collect(),
        }
    };
    Ok(StatePartition {
        zero: subset(false),
        one: subset(true),
        labels,
        separation,
    })
}

#[derive(Clone, Copy)]
enum Mode<T> {
    Exact,
    Bounded(ErrorBudget<T>),
}

struct Engine<'a, T> {
    mode: Mode<T>,
    tol: &'a Tolerances<T>,
    certificates: Vec<(Vec<usize>, GateCertificate<T>)>,
}

/// Folds every one-input gate into its child's output chain.
fn fold_unary<T: Real>(f: &QFormula<T>) -> Result<QFormula<T>, DequantizeError> {
    match &f.node {
        QNode::Leaf(_) => Ok(f.clone()),
        QNode::Gate(g) if g.children.len() == 1 => {
            let mut inner = fold_unary(&g.children[0])?;
            if let Some(p) = &g.pre[0] {
                inner = inner.append_out(p);
            }
            inner = inner.append_out(&g.channel);
            if let Some(o) = &f.out {
                inner = inner.append_out(o);
            }
            Ok(inner)
        }
        QNode::Gate(g) => {
            let mut g = g.clone();
            g.children = g.children.iter().map(fold_unary).collect::<Result<_, _>>()?;
            Ok(QFormula {
                node: QNode::Gate(g),
                out: f.out.clone(),
            })
        }
    }
}

fn check_arity<T>(f: &QFormula<T>, path: &mut Vec<usize>) -> Result<(), DequantizeError> {
    if let QNode::Gate(g) = &f.node {
        if g.children.len() > MAX_GATE_ARITY {
            return Err(DequantizeError::GateTooWide {
                path: path.clone(),
                arity: g.children.len(),
                limit: MAX_GATE_ARITY,
            });
        }
        for (k, c) in g.children.iter().enumerate() {
            path.push(k);
            check_arity(c, path)?;
            path.pop();
        }
    }
    Ok(())
}

fn preflight<T: Real>(f: &QFormula<T>) -> Result<QFormula<T>, DequantizeError> {
    f.validate().map_err(|e| DequantizeError::Internal(e.to_string()))?;
    if !validate_read_once(f) {
        let mut seen = std::collections::BTreeSet::new();
        let dup = f.leaf_vars().into_iter().find(|v| !seen.insert(*v)).expect("duplicate exists");
        return Err(DequantizeError::NotReadOnce(dup));
    }
    check_arity(f, &mut Vec::new())?;
    let vars = f.variables();
    if vars.len() > crate::simulate::MAX_ENUM_VARS {
        return Err(DequantizeError::TooManyVariables {
            count: vars.len(),
            limit: crate::simulate::MAX_ENUM_VARS,
        });
    }
    fold_unary(f)
}

fn finish<T: Real>(
    f: &QFormula<T>,
    cformula: CFormula,
    certificates: Vec<(Vec<usize>, GateCertificate<T>)>,
    tol: &Tolerances<T>,
) -> Result<DequantizeOutput<T>, DequantizeError> {
    let (size, depth) = f.size_and_depth();
    if cformula.size_and_depth() != (size, depth) {
        return Err(DequantizeError::Internal(format!(
            "shape changed from {:?} to {:?}",
            (size, depth),
            cformula.size_and_depth()
        )));
    }
    let out = DequantizeOutput {
        cformula,
        certificates,
        size,
        depth,
    };
    if !out.certificates_valid(tol) {
        return Err(DequantizeError::Internal("an emitted certificate does not validate".into()));
    }
    Ok(out)
}

/// Exact dequantization of a read-once formula with classical outputs.
pub fn dequantize_exact<T: Real>(f: &QFormula<T>, tol: &Tolerances<T>) -> Result<DequantizeOutput<T>, DequantizeError> {
    let g = preflight(f)?;
    let tt = truth_table(&g, tol)?;
    if !tt.classical {
        let vars = tt.vars.clone();
        let bad = (0..1usize << vars.len())
            .find(|&i| {
                let x = crate::simulate::assignment(&vars, i);
                crate::simulate::eval_qformula(&g, &x)
                    .map(|rho| is_classical_state(&rho, tol).is_none())
                    .unwrap_or(true)
            })
            .unwrap_or(0);
        return Err(DequantizeError::NonClassicalFormulaOutput {
            assignment: crate::simulate::assignment(&vars, bad),
        });
    }
    let mut engine = Engine {
        mode: Mode::Exact,
        tol,
        certificates: Vec::new(),
    };
    let cformula = engine.build(&g, &tt.table, &mut Vec::new())?;
    finish(f, cformula, engine.certificates, tol)
}

/// Bounded-error dequantization: the target is inferred by rounding the
/// acceptance probability at 1/2 and must be `2 − δ` separated.
pub fn dequantize_bounded<T: Real>(
    f: &QFormula<T>,
    budget: &ErrorBudget<T>,
    tol: &Tolerances<T>,
) -> Result<DequantizeOutput<T>, DequantizeError> {
    let g = preflight(f)?;
    let root = reachable_states_indexed(&g, tol)?;
    let half = T::of(0.5);
    let state_bit: Vec<bool> = root.set.states.iter().map(|s| s.prob_one() >= half).collect();
    let bits: Vec<bool> = root.index.iter().map(|&i| state_bit[i]).collect();
    let target = TruthTable::new(root.set.vars.len(), bits).expect("2^n entries");

    let mut separation = T::infinity();
    for (i, a) in root.set.states.iter().enumerate() {
        for (j, b) in root.set.states.iter().enumerate() {
            if !state_bit[i] && state_bit[j] {
                separation = separation.min(trace_distance(a, b)?);
            }
        }
    }
    let required = budget.threshold(tol);
    if separation < required {
        return Err(DequantizeError::SeparationViolated {
            path: Vec::new(),
            wire: None,
            separation: separation.to_f64_lossless(),
            required: required.to_f64_lossless(),
        });
    }

    let mut engine = Engine {
        mode: Mode::Bounded(*budget),
        tol,
        certificates: Vec::new(),
    };
    let cformula = engine.build(&g, &target, &mut Vec::new())?;
    finish(f, cformula, engine.certificates, tol)
}

/// Unitary whose first row is `v†`, i.e. mapping `v` to `|0⟩`; with `flip`
/// it maps `v` to `|1⟩` instead.
fn orienting_unitary<T: Real>(v: [Cx<T>; 2], flip: bool) -> Mat<T> {
    let w = [-v[1].conj(), v[0].conj()];
    let (r0, r1) = if flip { (w, v) } else { (v, w) };
    let mut u = Mat::zeros(2, 2);
    for j in 0..2 {
        u.set(0, j, r0[j].conj());
        u.set(1, j, r1[j].conj());
    }
    u
}

struct Wire<T> {
    plan: WirePlan<T>,
    pre: Channel<T>,
    child: QFormula<T>,
    child_target: TruthTable,
    /// Position of each child variable among the node's variables.
    positions: Vec<usize>,
    /// Index into `states` of the state standing for bit 0 and bit 1.
    reps: [usize; 2],
    states: IndexedStates<T>,
}

impl<T: Real> Engine<'_, T> {
    fn structure(path: &[usize], wire: Option<usize>, reason: impl Into<String>) -> DequantizeError {
        DequantizeError::StructureViolation {
            path: path.to_vec(),
            wire,
            reason: reason.into(),
        }
    }

    fn wire_input(&self, wire: &Wire<T>, bit: bool) -> Result<DensityMatrix<T>, DequantizeError> {
        Ok(wire.pre.apply(&DensityMatrix::basis(bit))?)
    }

    fn build(&mut self, f: &QFormula<T>, target: &TruthTable, path: &mut Vec<usize>) -> Result<CFormula, DequantizeError> {
        match &f.node {
            QNode::Leaf(v) => self.build_leaf(f, *v, target, path),
            QNode::Gate(_) => self.build_gate(f, target, path),
        }
    }

    fn build_leaf(
        &mut self,
        f: &QFormula<T>,
        var: usize,
        target: &TruthTable,
        path: &[usize],
    ) -> Result<CFormula, DequantizeError> {
        if target.bits() == [false, true] {
            return Ok(CFormula::Leaf(var));
        }
        let psi = f.out.clone().unwrap_or_else(|| Channel::identity(1));
        let (out, acceptance) = match self.mode {
            Mode::Exact => (psi, Acceptance::Exact),
            Mode::Bounded(budget) => {
                let rho = psi.apply(&DensityMatrix::basis(false))?;
                let w = orienting_unitary(rho.principal_eigenvector(), target.get(0));
                (psi.then(&Channel::unitary(w, self.tol)?)?, Acceptance::Separated { delta: budget.delta() })
            }
        };
        let realization = QFormula::gate(out, vec![QFormula::leaf(0)]).expect("one-input gate");
        self.certificates.push((
            path.to_vec(),
            GateCertificate {
                realization,
                acceptance,
                wires: Vec::new(),
            },
        ));
        Ok(CFormula::gate(target.clone(), vec![CFormula::Leaf(var)]).expect("arity 1"))
    }

    fn build_gate(&mut self, f: &QFormula<T>, target: &TruthTable, path: &mut Vec<usize>) -> Result<CFormula, DequantizeError> {
        let QNode::Gate(gate) = &f.node else { unreachable!() };
        let tol = self.tol;
        let node_vars = f.variables();
        let n = node_vars.len();
        let m = gate.children.len();
        let psi = f.out.clone().unwrap_or_else(|| Channel::identity(1));

        let mut wires = Vec::with_capacity(m);
        for (k, child) in gate.children.iter().enumerate() {
            let sk = match &gate.pre[k] {
                Some(p) => child.append_out(p),
                None => child.clone(),
            };
            let states = reachable_states_indexed(&sk, tol)?;
            let positions: Vec<usize> = states
                .set
                .vars
                .iter()
                .map(|v| node_vars.binary_search(v).expect("child vars are node vars"))
                .collect();
            let dependent = positions.iter().any(|&p| target.depends_on(p));
            let nk = states.set.vars.len();
            let wire = if !dependent {
                let fixed = states.set.states[0].clone();
                Wire {
                    pre: Channel::preparation(&fixed),
                    plan: WirePlan::Independent { fixed_state: fixed },
                    child: sk.append_out(&Channel::preparation(&DensityMatrix::basis(false))),
                    child_target: TruthTable::constant(nk, false),
                    positions,
                    reps: [0, 0],
                    states,
                }
            } else {
                match self.mode {
                    Mode::Exact => {
                        if states.set.len() != 2 {
                            return Err(Self::structure(
                                path,
                                Some(k),
                                format!("{} distinct states on a dependent wire", states.set.len()),
                            ));
                        }
                        let u = orthogonal_pure_pair_basis(&states.set.states[0], &states.set.states[1], tol)
                            .map_err(|e| Self::structure(path, Some(k), e.to_string()))?;
                        let bits = states.index.iter().map(|&i| i == 1).collect();
                        Wire {
                            pre: Channel::unitary(u.adjoint(), tol)?,
                            child: sk.append_out(&Channel::unitary(u.clone(), tol)?),
                            plan: WirePlan::Dependent { basis_change: u },
                            child_target: TruthTable::new(nk, bits).expect("2^n entries"),
                            positions,
                            reps: [0, 1],
                            states,
                        }
                    }
                    Mode::Bounded(budget) => {
                        let part = partition_states(&states.set, &budget, tol).map_err(|e| match e {
                            DequantizeError::NotSeparable { .. } => DequantizeError::SeparationViolated {
                                path: path.clone(),
                                wire: Some(k),
                                separation: separation_of(&states.set).to_f64_lossless(),
                                required: budget.threshold(tol).to_f64_lossless(),
                            },
                            other => other,
                        })?;
                        let bits = states.index.iter().map(|&i| part.labels[i]).collect();
                        let reps = [part.zero.states[0].clone(), part.one.states[0].clone()];
                        let first_one = part.labels.iter().position(|&l| l).expect("two clusters");
                        Wire {
                            pre: Channel::controlled_preparation(&reps[0], &reps[1]),
                            plan: WirePlan::Separated { representatives: reps },
                            child: sk,
                            child_target: TruthTable::new(nk, bits).expect("2^n entries"),
                            positions,
                            reps: [0, first_one],
                            states,
                        }
                    }
                }
            };
            wires.push(wire);
        }

        let mut r_bits = Vec::with_capacity(1 << m);
        let mut outputs = Vec::with_capacity(1 << m);
        for b in 0..1usize << m {
            let bb = index_bits(b, m);
            let inputs = wires
                .iter()
                .zip(&bb)
                .map(|(w, &bit)| self.wire_input(w, bit))
                .collect::<Result<Vec<_>, _>>()?;
            let out = psi.apply(&gate.channel.apply(&DensityMatrix::tensor_all(inputs.iter()))?)?;
            let bit = match self.mode {
                Mode::Exact => is_classical_state(&out, tol).ok_or_else(|| {
                    Self::structure(path, None, format!("gate output on pattern {b} is not classical"))
                })?,
                Mode::Bounded(_) => {
                    let mut bits = vec![false; n];
                    for (w, &bit) in wires.iter().zip(&bb) {
                        let witness = &w.states.set.witnesses[w.reps[usize::from(bit)]];
                        for (&p, &x) in w.positions.iter().zip(witness) {
                            bits[p] = x;
                        }
                    }
                    target.get(bits_index(&bits))
                }
            };
            r_bits.push(bit);
            outputs.push(out);
        }
        let r = TruthTable::new(m, r_bits).expect("2^m entries");

        for x in 0..1usize << n {
            let xb = index_bits(x, n);
            let labels: Vec<bool> = wires
                .iter()
                .map(|w| {
                    let local: Vec<bool> = w.positions.iter().map(|&p| xb[p]).collect();
                    w.child_target.get(bits_index(&local))
                })
                .collect();
            if r.eval(&labels) != target.get(x) {
                let reason = format!("extracted gate disagrees with the target on node input {x}");
                return Err(Self::structure(path, None, reason));
            }
        }

        let (out, acceptance) = match self.mode {
            Mode::Exact => (psi.clone(), Acceptance::Exact),
            Mode::Bounded(budget) => {
                let w = orienting_unitary(outputs[0].principal_eigenvector(), r.get(0));
                (psi.then(&Channel::unitary(w, tol)?)?, Acceptance::Separated { delta: budget.delta() })
            }
        };
        let realization = QFormula::gate_with_pre(
            gate.channel.clone(),
            wires.iter().map(|w| Some(w.pre.clone())).collect(),
            (0..m).map(QFormula::leaf).collect(),
        )
        .expect("shape copied from the input gate")
        .with_out(Some(out));
        self.certificates.push((
            path.clone(),
            GateCertificate {
                realization,
                acceptance,
                wires: wires.iter().map(|w| w.plan.clone()).collect(),
            },
        ));

        let mut children = Vec::with_capacity(m);
        for (k, w) in wires.into_iter().enumerate() {
            path.push(k);
            children.push(self.build(&w.child, &w.child_target, path)?);
            path.pop();
        }
        CFormula::gate(r, children).map_err(|e| DequantizeError::Internal(e.to_string()))
    }
}

/// Largest pairwise distance in a set, reported when clustering fails.
fn separation_of<T: Real>(p: &StateSet<T>) -> T {
    let mut best = T::zero();
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if let Ok(d) = trace_distance(&p.states[i], &p.states[j]) {
                best = best.max(d);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genrand::{add_noise, haar_unitary, obfuscate, rng_from_seed, GenConfig};

    type F = QFormula<f64>;

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn xor_gate(children: Vec<F>) -> F {
        QFormula::gate(Channel::classical(2, &[false, true, true, false]), children).unwrap()
    }

    fn obfuscated_xor() -> F {
        let t = tol();
        let u = haar_unitary::<f64>(&mut rng_from_seed(7), 2);
        let uc = Channel::unitary(u.clone(), &t).unwrap();
        let ud = u.adjoint();
        let gate = Channel::classical(2, &[false, true, true, false]).after_unitary(&ud.kron(&ud)).unwrap();
        QFormula::gate(gate, vec![F::leaf(0).append_out(&uc), F::leaf(1).append_out(&uc)]).unwrap()
    }

    fn same_function(a: &CFormula, q: &F) -> bool {
        truth_table(a, &tol()).unwrap().table == truth_table(q, &tol()).unwrap().table
    }

    #[test]
    fn classical_xor_keeps_shape() {
        let f = xor_gate(vec![F::leaf(0), F::leaf(1)]);
        let out = dequantize_exact(&f, &tol()).unwrap();
        assert_eq!((out.size, out.depth), (1, 1));
        assert!(same_function(&out.cformula, &f));
        assert!(out.certificates_valid(&tol()));
    }

    #[test]
    fn obfuscated_xor_is_recovered() {
        let f = obfuscated_xor();
        let out = dequantize_exact(&f, &tol()).unwrap();
        assert_eq!((out.size, out.depth), (1, 1));
        assert_eq!(truth_table(&out.cformula, &tol()).unwrap().table, TruthTable::parity(2));
        let (_, cert) = &out.certificates[0];
        assert!(certify_gate(cert, out.cformula.gates()[0].1, &tol()));
    }

    #[test]
    fn obfuscated_parity_of_three() {
        let p = |c| CFormula::gate(TruthTable::parity(2), c).unwrap();
        let c = p(vec![p(vec![CFormula::Leaf(0), CFormula::Leaf(1)]), CFormula::Leaf(2)]);
        let q = obfuscate::<f64>(&c, &GenConfig { seed: 3, ..GenConfig::default() }).unwrap();
        let out = dequantize_exact(&q, &tol()).unwrap();
        assert_eq!((out.size, out.depth), (2, 2));
        assert_eq!(truth_table(&out.cformula, &tol()).unwrap().table, TruthTable::parity(3));
    }

    #[test]
    fn read_many_is_rejected() {
        let f = xor_gate(vec![F::leaf(0), F::leaf(0)]);
        assert_eq!(dequantize_exact(&f, &tol()), Err(DequantizeError::NotReadOnce(0)));
    }

    #[test]
    fn non_classical_output_is_rejected() {
        let f = F::leaf(0).append_out(&Channel::unitary(Mat::hadamard(), &tol()).unwrap());
        assert!(matches!(
            dequantize_exact(&f, &tol()),
            Err(DequantizeError::NonClassicalFormulaOutput { .. })
        ));
    }

    fn set(states: Vec<DensityMatrix<f64>>) -> StateSet<f64> {
        let witnesses = (0..states.len()).map(|_| Vec::new()).collect();
        StateSet {
            vars: Vec::new(),
            states,
            witnesses,
        }
    }

    #[test]
    fn partition_examples() {
        let t = tol();
        let b = ErrorBudget::new(0.1).unwrap();
        let p = partition_states(&set(vec![DensityMatrix::basis(false), DensityMatrix::basis(true)]), &b, &t).unwrap();
        assert_eq!(p.labels, vec![false, true]);
        assert!((p.separation - 2.0).abs() < 1e-12);

        let r = partition_states(&set(vec![DensityMatrix::basis(false), DensityMatrix::plus()]), &b, &t);
        assert_eq!(r, Err(DequantizeError::NotSeparable { components: 1 }));

        let zero = DensityMatrix::<f64>::basis(false);
        let weak = Channel::depolarizing(0.01).apply(&zero).unwrap();
        let strong = Channel::depolarizing(0.02).apply(&zero).unwrap();
        // Distances to |1⟩: 2 − p for strength p.
        assert!((trace_distance(&weak, &DensityMatrix::basis(true)).unwrap() - 1.99).abs() < 1e-12);
        let p = partition_states(&set(vec![weak, strong, DensityMatrix::basis(true)]), &b, &t).unwrap();
        assert_eq!(p.labels, vec![false, false, true]);
        assert_eq!((p.zero.len(), p.one.len()), (2, 1));
        assert!((p.separation - 1.98).abs() < 1e-12);
    }

    #[test]
    fn budget_range() {
        assert!(ErrorBudget::new(0.0).is_ok());
        assert!(ErrorBudget::new(2.0).is_err());
        assert!(ErrorBudget::new(-0.1).is_err());
    }

    #[test]
    fn bounded_at_zero_budget_matches_exact() {
        let f = obfuscated_xor();
        let exact = dequantize_exact(&f, &tol()).unwrap();
        let bounded = dequantize_bounded(&f, &ErrorBudget::new(0.0).unwrap(), &tol()).unwrap();
        assert_eq!(
            truth_table(&exact.cformula, &tol()).unwrap().table,
            truth_table(&bounded.cformula, &tol()).unwrap().table
        );
        assert!(bounded.certificates_valid(&tol()));
    }

    #[test]
    fn light_noise_is_tolerated_heavy_noise_is_not() {
        let f = obfuscated_xor();
        let b = ErrorBudget::new(0.1).unwrap();
        let light = dequantize_bounded(&add_noise(&f, 0.005), &b, &tol()).unwrap();
        assert_eq!(truth_table(&light.cformula, &tol()).unwrap().table, TruthTable::parity(2));
        assert!(light.certificates_valid(&tol()));

        // Each wire flips with probability q = 0.15, so the XOR output is
        // 1 with probability 2q(1 − q) or q² + (1 − q)², distance 2(1 − 2q)².
        let expected = 2.0 * (1.0f64 - 2.0 * 0.15).powi(2);
        match dequantize_bounded(&add_noise(&f, 0.3), &b, &tol()) {
            Err(DequantizeError::SeparationViolated { separation, .. }) => assert!((separation - expected).abs() < 1e-9),
            other => panic!("expected SeparationViolated, got {other:?}"),
        }
    }

    #[test]
    fn certificate_checks() {
        let t = tol();
        let out = dequantize_exact(&obfuscated_xor(), &t).unwrap();
        let table = out.cformula.gates()[0].1.clone();
        let (_, cert) = &out.certificates[0];
        assert!(certify_gate(cert, &table, &t));

        let mut bad = cert.clone();
        if let QNode::Gate(g) = &mut bad.realization.node {
            let mut kraus = g.channel.kraus().to_vec();
            let v = kraus[0].get(0, 0);
            kraus[0].set(0, 0, v + Cx::new(1e-2, 0.0));
            g.channel = Channel::from_kraus_unchecked(2, kraus).unwrap();
        }
        assert!(!certify_gate(&bad, &table, &t));

        let identity = GateCertificate {
            realization: QFormula::gate(Channel::identity(1), vec![F::leaf(0)]).unwrap(),
            acceptance: Acceptance::Exact,
            wires: Vec::new(),
        };
        let not = TruthTable::new(1, vec![true, false]).unwrap();
        assert!(!certify_gate(&identity, &not, &t));
        assert!(certify_gate(&identity, &TruthTable::new(1, vec![false, true]).unwrap(), &t));
    }

    #[test]
    fn output_json_shape() {
        let out = dequantize_exact(&obfuscated_xor(), &tol()).unwrap();
        let v = out.to_json();
        assert_eq!(v["size"], 1);
        assert_eq!(v["certificates"][0]["acceptance"], "exact");
        assert!(v["certificates"][0]["path"].as_array().unwrap().is_empty());
    }
}
