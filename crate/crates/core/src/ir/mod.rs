//! Intermediate representations: quantum formulas, classical formulas,
//! boolean circuits and one-qubit programs.
//!
//! Single-qubit channels live on wires (`pre` per gate input and `out` per
//! node) rather than as tree nodes, so size and depth only ever count
//! the multi-input gates.

mod json;
mod truth_table;

use std::collections::BTreeSet;

use thiserror::Error;

pub use json::{
    circuit_from_json, circuit_to_json, cformula_from_json, cformula_to_json, channel_from_json, channel_to_json,
    mat_from_json, mat_to_json, parse_circuit, parse_cformula, parse_document, parse_program, parse_qformula,
    program_from_json, program_to_json, qformula_from_json, qformula_to_json, serialize_circuit,
    serialize_cformula, serialize_program, serialize_qformula, to_json_string, IrDocument,
};
pub use truth_table::{bits_index, index_bits, TruthTable};

use crate::qlinalg::{Channel, LinalgError, Mat, Tolerances};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IrError {
    #[error("{path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("{path}: {source}")]
    Linalg {
        path: String,
        #[source]
        source: LinalgError,
    },
    #[error("{path}: gate has {inputs} inputs but {children} children")]
    Arity {
        path: String,
        inputs: usize,
        children: usize,
    },
    #[error("invalid JSON: {0}")]
    Json(String),
}

impl IrError {
    pub(crate) fn schema(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Self::Schema {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn linalg(path: impl Into<String>, source: LinalgError) -> Self {
        Self::Linalg {
            path: path.into(),
            source,
        }
    }
}

/// Structural queries shared by quantum and classical formulas.
pub trait FormulaShape {
    /// Leaf variables in depth-first, left-to-right order (with repeats).
    fn leaf_vars(&self) -> Vec<usize>;

    /// `(size, depth)` counting only gates with two or more inputs.
    fn size_and_depth(&self) -> (usize, usize);

    /// Sorted distinct variables.
    fn variables(&self) -> Vec<usize> {
        self.leaf_vars().into_iter().collect::<BTreeSet<_>>().into_iter().collect()
    }
}

/// True iff no variable labels two leaves.
pub fn validate_read_once<F: FormulaShape + ?Sized>(f: &F) -> bool {
    let mut seen = BTreeSet::new();
    f.leaf_vars().into_iter().all(|v| seen.insert(v))
}

/// A node of a quantum formula together with the single-qubit channel on
/// its output wire.
#[derive(Clone, Debug, PartialEq)]
pub struct QFormula<T> {
    pub node: QNode<T>,
    pub out: Option<Channel<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum QNode<T> {
    Leaf(usize),
    Gate(QGate<T>),
}

/// A gate with one output qubit. `pre[k]` acts on the wire from `children[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QGate<T> {
    pub channel: Channel<T>,
    pub pre: Vec<Option<Channel<T>>>,
    pub children: Vec<QFormula<T>>,
}

impl<T: Real> QFormula<T> {
    pub fn leaf(var: usize) -> Self {
        Self {
            node: QNode::Leaf(var),
            out: None,
        }
    }

    /// Gate without wire channels; checks arity and the single output qubit.
    pub fn gate(channel: Channel<T>, children: Vec<QFormula<T>>) -> Result<Self, IrError> {
        let pre = vec![None; children.len()];
        Self::gate_with_pre(channel, pre, children)
    }

    pub fn gate_with_pre(
        channel: Channel<T>,
        pre: Vec<Option<Channel<T>>>,
        children: Vec<QFormula<T>>,
    ) -> Result<Self, IrError> {
        let f = Self {
            node: QNode::Gate(QGate { channel, pre, children }),
            out: None,
        };
        f.validate_shallow("$")?;
        Ok(f)
    }

    /// Replaces the output channel.
    pub fn with_out(mut self, out: Option<Channel<T>>) -> Self {
        self.out = out;
        self
    }

    /// Composes `ch` after whatever already sits on the output wire.
    pub fn append_out(&self, ch: &Channel<T>) -> Self {
        let out = match &self.out {
            Some(existing) => existing.then(ch).expect("single-qubit channels compose"),
            None => ch.clone(),
        };
        Self {
            node: self.node.clone(),
            out: Some(out),
        }
    }

    /// Checks every structural invariant in the tree.
    pub fn validate(&self) -> Result<(), IrError> {
        self.validate_at("$")
    }

    fn validate_at(&self, path: &str) -> Result<(), IrError> {
        self.validate_shallow(path)?;
        if let QNode::Gate(g) = &self.node {
            for (k, c) in g.children.iter().enumerate() {
                c.validate_at(&format!("{path}.children[{k}]"))?;
            }
        }
        Ok(())
    }

    fn validate_shallow(&self, path: &str) -> Result<(), IrError> {
        let single = |ch: &Channel<T>, p: &str| {
            if ch.in_qubits() == 1 && ch.out_qubits() == 1 {
                Ok(())
            } else {
                Err(IrError::schema(
                    p,
                    format!("expected a 1->1 channel, got {}->{}", ch.in_qubits(), ch.out_qubits()),
                ))
            }
        };
        if let Some(o) = &self.out {
            single(o, &format!("{path}.out"))?;
        }
        if let QNode::Gate(g) = &self.node {
            if g.children.is_empty() {
                return Err(IrError::schema(path, "gate without children"));
            }
            if g.channel.in_qubits() != g.children.len() {
                return Err(IrError::Arity {
                    path: path.to_string(),
                    inputs: g.channel.in_qubits(),
                    children: g.children.len(),
                });
            }
            if g.channel.out_qubits() != 1 {
                return Err(IrError::schema(
                    format!("{path}.channel"),
                    format!("formula gates output one qubit, got {}", g.channel.out_qubits()),
                ));
            }
            if g.pre.len() != g.children.len() {
                return Err(IrError::schema(
                    format!("{path}.pre"),
                    format!("{} pre channels for {} children", g.pre.len(), g.children.len()),
                ));
            }
            for (k, p) in g.pre.iter().enumerate() {
                if let Some(p) = p {
                    single(p, &format!("{path}.pre[{k}]"))?;
                }
            }
        }
        Ok(())
    }

    /// Depth counted as in [`FormulaShape::size_and_depth`]; a convenience.
    pub fn depth(&self) -> usize {
        self.size_and_depth().1
    }

    pub fn cast<U: Real>(&self) -> QFormula<U> {
        QFormula {
            node: match &self.node {
                QNode::Leaf(v) => QNode::Leaf(*v),
                QNode::Gate(g) => QNode::Gate(QGate {
                    channel: g.channel.cast(),
                    pre: g.pre.iter().map(|p| p.as_ref().map(Channel::cast)).collect(),
                    children: g.children.iter().map(QFormula::cast).collect(),
                }),
            },
            out: self.out.as_ref().map(Channel::cast),
        }
    }
}

impl<T: Real> FormulaShape for QFormula<T> {
    fn leaf_vars(&self) -> Vec<usize> {
        let mut out = Vec::new();
        fn walk<T>(f: &QFormula<T>, out: &mut Vec<usize>) {
            match &f.node {
                QNode::Leaf(v) => out.push(*v),
                QNode::Gate(g) => g.children.iter().for_each(|c| walk(c, out)),
            }
        }
        walk(self, &mut out);
        out
    }

    fn size_and_depth(&self) -> (usize, usize) {
        match &self.node {
            QNode::Leaf(_) => (0, 0),
            QNode::Gate(g) => {
                let (size, depth) = g
                    .children
                    .iter()
                    .map(FormulaShape::size_and_depth)
                    .fold((0, 0), |(s, d), (cs, cd)| (s + cs, d.max(cd)));
                let counted = usize::from(g.children.len() >= 2);
                (size + counted, depth + counted)
            }
        }
    }
}

/// Classical formula over truth-table gates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CFormula {
    Leaf(usize),
    Gate { table: TruthTable, children: Vec<CFormula> },
}

impl CFormula {
    pub fn gate(table: TruthTable, children: Vec<CFormula>) -> Result<Self, IrError> {
        if table.arity() != children.len() || children.is_empty() {
            return Err(IrError::Arity {
                path: "$".into(),
                inputs: table.arity(),
                children: children.len(),
            });
        }
        Ok(Self::Gate { table, children })
    }

    /// Evaluates on an assignment indexed by variable; `None` if a leaf
    /// variable is out of range.
    pub fn eval(&self, x: &[bool]) -> Option<bool> {
        match self {
            CFormula::Leaf(v) => x.get(*v).copied(),
            CFormula::Gate { table, children } => {
                let mut idx = 0usize;
                for c in children {
                    idx = (idx << 1) | usize::from(c.eval(x)?);
                }
                Some(table.get(idx))
            }
        }
    }

    /// Every gate with its path of child indices from the root, preorder.
    pub fn gates(&self) -> Vec<(Vec<usize>, &TruthTable)> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a CFormula, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a TruthTable)>) {
            if let CFormula::Gate { table, children } = f {
                out.push((path.clone(), table));
                for (k, c) in children.iter().enumerate() {
                    path.push(k);
                    walk(c, path, out);
                    path.pop();
                }
            }
        }
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// Lifts to a quantum formula whose gates are classical permutation channels.
    pub fn to_qformula<T: Real>(&self) -> QFormula<T> {
        match self {
            CFormula::Leaf(v) => QFormula::leaf(*v),
            CFormula::Gate { table, children } => {
                let ch = Channel::classical(table.arity(), table.bits());
                QFormula::gate(ch, children.iter().map(CFormula::to_qformula).collect())
                    .expect("arity matches by construction")
            }
        }
    }
}

impl FormulaShape for CFormula {
    fn leaf_vars(&self) -> Vec<usize> {
        let mut out = Vec::new();
        fn walk(f: &CFormula, out: &mut Vec<usize>) {
            match f {
                CFormula::Leaf(v) => out.push(*v),
                CFormula::Gate { children, .. } => children.iter().for_each(|c| walk(c, out)),
            }
        }
        walk(self, &mut out);
        out
    }

    fn size_and_depth(&self) -> (usize, usize) {
        match self {
            CFormula::Leaf(_) => (0, 0),
            CFormula::Gate { children, .. } => {
                let (size, depth) = children
                    .iter()
                    .map(FormulaShape::size_and_depth)
                    .fold((0, 0), |(s, d), (cs, cd)| (s + cs, d.max(cd)));
                let counted = usize::from(children.len() >= 2);
                (size + counted, depth + counted)
            }
        }
    }
}

/// Fanin-2 AND/OR circuit with NOT, as a tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoolCircuit {
    Var(usize),
    Not(Box<BoolCircuit>),
    And(Box<BoolCircuit>, Box<BoolCircuit>),
    Or(Box<BoolCircuit>, Box<BoolCircuit>),
}

impl BoolCircuit {
    pub fn var(v: usize) -> Self {
        Self::Var(v)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Self) -> Self {
        Self::Not(Box::new(c))
    }

    pub fn and(a: Self, b: Self) -> Self {
        Self::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Self, b: Self) -> Self {
        Self::Or(Box::new(a), Box::new(b))
    }

    /// Maximum number of AND/OR gates on a root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            Self::Var(_) => 0,
            Self::Not(c) => c.depth(),
            Self::And(a, b) | Self::Or(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn eval(&self, x: &[bool]) -> Option<bool> {
        Some(match self {
            Self::Var(v) => *x.get(*v)?,
            Self::Not(c) => !c.eval(x)?,
            Self::And(a, b) => a.eval(x)? & b.eval(x)?,
            Self::Or(a, b) => a.eval(x)? | b.eval(x)?,
        })
    }

    pub fn variables(&self) -> Vec<usize> {
        let mut set = BTreeSet::new();
        fn walk(c: &BoolCircuit, set: &mut BTreeSet<usize>) {
            match c {
                BoolCircuit::Var(v) => {
                    set.insert(*v);
                }
                BoolCircuit::Not(c) => walk(c, set),
                BoolCircuit::And(a, b) | BoolCircuit::Or(a, b) => {
                    walk(a, set);
                    walk(b, set);
                }
            }
        }
        walk(self, &mut set);
        set.into_iter().collect()
    }

    /// Rewrites every `Or(a, b)` as `Not(And(Not a, Not b))`.
    pub fn without_or(&self) -> Self {
        match self {
            Self::Var(v) => Self::Var(*v),
            Self::Not(c) => Self::not(c.without_or()),
            Self::And(a, b) => Self::and(a.without_or(), b.without_or()),
            Self::Or(a, b) => Self::not(Self::and(Self::not(a.without_or()), Self::not(b.without_or()))),
        }
    }
}

/// One item of a one-qubit program.
#[derive(Clone, Debug, PartialEq)]
pub enum OqpItem<T> {
    SingleQubit(Mat<T>),
    ControlledX(usize),
}

/// Single qubit starting in `|0⟩`, driven by unitaries and input-controlled X.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct OneQubitProgram<T> {
    items: Vec<OqpItem<T>>,
}

impl<T: Real> OneQubitProgram<T> {
    pub fn new(items: Vec<OqpItem<T>>, tol: &Tolerances<T>) -> Result<Self, IrError> {
        for (i, it) in items.iter().enumerate() {
            if let OqpItem::SingleQubit(u) = it {
                if u.rows() != 2 || u.cols() != 2 {
                    return Err(IrError::schema(format!("$.items[{i}].u"), "expected a 2x2 matrix"));
                }
                if !u.is_unitary(tol.eps_num) {
                    return Err(IrError::linalg(format!("$.items[{i}].u"), LinalgError::NotUnitary));
                }
            }
        }
        Ok(Self { items })
    }

    pub(crate) fn from_items_unchecked(items: Vec<OqpItem<T>>) -> Self {
        Self { items }
    }

    pub fn items(&self) -> &[OqpItem<T>] {
        &self.items
    }

    /// Number of controlled-X items.
    pub fn length(&self) -> usize {
        self.items
            .iter()
            .filter(|i| matches!(i, OqpItem::ControlledX(_)))
            .count()
    }

    pub fn variables(&self) -> Vec<usize> {
        self.items
            .iter()
            .filter_map(|i| match i {
                OqpItem::ControlledX(v) => Some(*v),
                OqpItem::SingleQubit(_) => None,
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor_gate() -> Channel<f64> {
        Channel::classical(2, TruthTable::parity(2).bits())
    }

    #[test]
    fn read_once_examples() {
        let t = xor_gate();
        let ro = QFormula::gate(t.clone(), vec![QFormula::leaf(0), QFormula::leaf(1)]).unwrap();
        assert!(validate_read_once(&ro));
        let rm = QFormula::gate(t, vec![QFormula::leaf(0), QFormula::leaf(0)]).unwrap();
        assert!(!validate_read_once(&rm));
        assert!(validate_read_once(&CFormula::Leaf(3)));
    }

    #[test]
    fn size_and_depth_examples() {
        assert_eq!(QFormula::<f64>::leaf(0).size_and_depth(), (0, 0));
        let h = Channel::unitary(Mat::hadamard(), &Tolerances::default()).unwrap();
        let f = QFormula::gate_with_pre(
            xor_gate(),
            vec![Some(h.clone()), Some(h.clone())],
            vec![QFormula::leaf(0), QFormula::leaf(1)],
        )
        .unwrap()
        .with_out(Some(h));
        assert_eq!(f.size_and_depth(), (1, 1));

        let x = TruthTable::parity(2);
        let g = |a, b| CFormula::gate(x.clone(), vec![a, b]).unwrap();
        let bal = g(g(CFormula::Leaf(0), CFormula::Leaf(1)), g(CFormula::Leaf(2), CFormula::Leaf(3)));
        assert_eq!(bal.size_and_depth(), (3, 2));
        let not = CFormula::gate("10".parse().unwrap(), vec![bal.clone()]).unwrap();
        assert_eq!(not.size_and_depth(), (3, 2));
    }

    #[test]
    fn circuit_depth_examples() {
        use BoolCircuit as B;
        assert_eq!(B::var(0).depth(), 0);
        assert_eq!(B::not(B::var(0)).depth(), 0);
        assert_eq!(B::and(B::var(0), B::or(B::var(1), B::var(2))).depth(), 2);
        let c = B::or(B::var(0), B::not(B::var(1)));
        let d = c.without_or();
        assert_eq!(d.depth(), c.depth());
        for x in 0..4 {
            let bits = index_bits(x, 2);
            assert_eq!(c.eval(&bits), d.eval(&bits));
        }
    }

    #[test]
    fn gate_arity_is_checked() {
        let err = QFormula::gate(xor_gate(), vec![QFormula::leaf(0)]).unwrap_err();
        assert!(matches!(err, IrError::Arity { inputs: 2, children: 1, .. }));
        assert!(CFormula::gate(TruthTable::parity(3), vec![CFormula::Leaf(0)]).is_err());
    }

    #[test]
    fn program_rejects_non_unitary() {
        let t = Tolerances::<f64>::default();
        let bad = Mat::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(OneQubitProgram::new(vec![OqpItem::SingleQubit(bad)], &t).is_err());
        let p = OneQubitProgram::new(
            vec![OqpItem::ControlledX(2), OqpItem::SingleQubit(Mat::hadamard()), OqpItem::ControlledX(0)],
            &t,
        )
        .unwrap();
        assert_eq!(p.length(), 2);
        assert_eq!(p.variables(), vec![0, 2]);
    }
}
