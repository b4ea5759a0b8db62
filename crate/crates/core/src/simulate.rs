//! Exhaustive classical-input evaluation of every IR form.
//!
//! Assignments are bit vectors indexed by variable. Enumerations run over the
//! sorted distinct variables of an object, big-endian, and are parallelized
//! with rayon; results are always collected in assignment order.

use rayon::prelude::*;
use thiserror::Error;

use crate::ir::{index_bits, BoolCircuit, CFormula, FormulaShape, OneQubitProgram, OqpItem, QFormula, QNode, TruthTable};
use crate::qlinalg::{is_classical_state, trace_distance, DensityMatrix, LinalgError, Mat, Tolerances};
use crate::scalar::Real;

/// Largest number of variables any enumeration will visit.
pub const MAX_ENUM_VARS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("variable {0} is not assigned")]
    UnassignedVariable(usize),
    #[error("{count} variables exceed the enumeration limit of {limit}")]
    TooManyVariables { count: usize, limit: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn bit(x: &[bool], v: usize) -> Result<bool, SimError> {
    x.get(v).copied().ok_or(SimError::UnassignedVariable(v))
}

/// Output state of a quantum formula: children first, then each wire's
/// `pre`, the gate channel, and finally the node's `out`.
pub fn eval_qformula<T: Real>(f: &QFormula<T>, x: &[bool]) -> Result<DensityMatrix<T>, SimError> {
    let state = match &f.node {
        QNode::Leaf(v) => DensityMatrix::basis(bit(x, *v)?),
        QNode::Gate(g) => {
            let mut inputs = Vec::with_capacity(g.children.len());
            for (child, pre) in g.children.iter().zip(&g.pre) {
                let s = eval_qformula(child, x)?;
                inputs.push(match pre {
                    Some(p) => p.apply(&s)?,
                    None => s,
                });
            }
            g.channel.apply(&DensityMatrix::tensor_all(inputs.iter()))?
        }
    };
    Ok(match &f.out {
        Some(o) => o.apply(&state)?,
        None => state,
    })
}

pub fn eval_cformula(f: &CFormula, x: &[bool]) -> Result<bool, SimError> {
    match f {
        CFormula::Leaf(v) => bit(x, *v),
        CFormula::Gate { table, children } => {
            let mut idx = 0usize;
            for c in children {
                idx = (idx << 1) | usize::from(eval_cformula(c, x)?);
            }
            Ok(table.get(idx))
        }
    }
}

pub fn eval_circuit(c: &BoolCircuit, x: &[bool]) -> Result<bool, SimError> {
    Ok(match c {
        BoolCircuit::Var(v) => bit(x, *v)?,
        BoolCircuit::Not(a) => !eval_circuit(a, x)?,
        BoolCircuit::And(a, b) => eval_circuit(a, x)? & eval_circuit(b, x)?,
        BoolCircuit::Or(a, b) => eval_circuit(a, x)? | eval_circuit(b, x)?,
    })
}

/// Product of the program's matrices in time order (later items on the left).
pub fn net_unitary<T: Real>(p: &OneQubitProgram<T>, x: &[bool]) -> Result<Mat<T>, SimError> {
    let mut u = Mat::identity(2);
    for item in p.items() {
        match item {
            OqpItem::SingleQubit(m) => u = m * &u,
            OqpItem::ControlledX(v) => {
                if bit(x, *v)? {
                    u = &Mat::pauli_x() * &u;
                }
            }
        }
    }
    Ok(u)
}

/// `U_net |0⟩⟨0| U_net†`.
pub fn eval_oqp<T: Real>(p: &OneQubitProgram<T>, x: &[bool]) -> Result<DensityMatrix<T>, SimError> {
    let u = net_unitary(p, x)?;
    let psi = u.column(0);
    Ok(DensityMatrix::pure(&psi)?)
}

/// Result of one evaluation: a bit for classical objects, a qubit otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum SimOutput<T> {
    Bit(bool),
    State(DensityMatrix<T>),
}

/// Anything that can be run on a classical assignment.
pub trait Simulable: Sync {
    type Scalar: Real;

    /// Sorted distinct variables read by the object.
    fn sim_vars(&self) -> Vec<usize>;

    fn simulate(&self, x: &[bool]) -> Result<SimOutput<Self::Scalar>, SimError>;
}

impl<T: Real> Simulable for QFormula<T> {
    type Scalar = T;

    fn sim_vars(&self) -> Vec<usize> {
        self.variables()
    }

    fn simulate(&self, x: &[bool]) -> Result<SimOutput<T>, SimError> {
        eval_qformula(self, x).map(SimOutput::State)
    }
}

impl<T: Real> Simulable for OneQubitProgram<T> {
    type Scalar = T;

    fn sim_vars(&self) -> Vec<usize> {
        self.variables()
    }

    fn simulate(&self, x: &[bool]) -> Result<SimOutput<T>, SimError> {
        eval_oqp(self, x).map(SimOutput::State)
    }
}

impl Simulable for CFormula {
    type Scalar = f64;

    fn sim_vars(&self) -> Vec<usize> {
        self.variables()
    }

    fn simulate(&self, x: &[bool]) -> Result<SimOutput<f64>, SimError> {
        eval_cformula(self, x).map(SimOutput::Bit)
    }
}

impl Simulable for BoolCircuit {
    type Scalar = f64;

    fn sim_vars(&self) -> Vec<usize> {
        self.variables()
    }

    fn simulate(&self, x: &[bool]) -> Result<SimOutput<f64>, SimError> {
        eval_circuit(self, x).map(SimOutput::Bit)
    }
}

/// Full assignment vector for entry `index` of an enumeration over `vars`.
pub fn assignment(vars: &[usize], index: usize) -> Vec<bool> {
    let len = vars.iter().max().map_or(0, |m| m + 1);
    let mut x = vec![false; len];
    for (v, b) in vars.iter().zip(index_bits(index, vars.len())) {
        x[*v] = b;
    }
    x
}

fn guard(count: usize) -> Result<(), SimError> {
    if count > MAX_ENUM_VARS {
        Err(SimError::TooManyVariables {
            count,
            limit: MAX_ENUM_VARS,
        })
    } else {
        Ok(())
    }
}

/// Evaluates `f` on every assignment over `vars`, in order.
pub fn enumerate<R, F>(vars: &[usize], f: F) -> Result<Vec<R>, SimError>
where
    R: Send,
    F: Fn(&[bool]) -> Result<R, SimError> + Sync,
{
    guard(vars.len())?;
    (0..1usize << vars.len())
        .into_par_iter()
        .map(|i| f(&assignment(vars, i)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthTableResult {
    /// Table input `k` is variable `vars[k]`.
    pub vars: Vec<usize>,
    pub table: TruthTable,
    /// Whether every output was a computational-basis state.
    pub classical: bool,
}

/// Exhaustive truth table. Quantum outputs that fail the classical test are
/// rounded (`⟨1|ρ|1⟩ ≥ 1/2` reads as 1) and mark the result non-classical.
pub fn truth_table<F: Simulable + ?Sized>(f: &F, tol: &Tolerances<F::Scalar>) -> Result<TruthTableResult, SimError> {
    let vars = f.sim_vars();
    let half = <F::Scalar as Real>::of(0.5);
    let outs = enumerate(&vars, |x| {
        Ok(match f.simulate(x)? {
            SimOutput::Bit(b) => (b, true),
            SimOutput::State(rho) => match is_classical_state(&rho, tol) {
                Some(b) => (b, true),
                None => (rho.prob_one() >= half, false),
            },
        })
    })?;
    let classical = outs.iter().all(|&(_, c)| c);
    let bits = outs.into_iter().map(|(b, _)| b).collect();
    Ok(TruthTableResult {
        table: TruthTable::new(vars.len(), bits).expect("2^n entries"),
        vars,
        classical,
    })
}

/// Distinct output states of a formula over all its inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSet<T> {
    /// Variables of the enumerated formula; witnesses are aligned to them.
    pub vars: Vec<usize>,
    pub states: Vec<DensityMatrix<T>>,
    /// `witnesses[i]` is the first assignment (in enumeration order) reaching `states[i]`.
    pub witnesses: Vec<Vec<bool>>,
}

impl<T: Real> StateSet<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Full assignment vector for witness `i`.
    pub fn witness_assignment(&self, i: usize) -> Vec<bool> {
        let len = self.vars.iter().max().map_or(0, |m| m + 1);
        let mut x = vec![false; len];
        for (v, b) in self.vars.iter().zip(&self.witnesses[i]) {
            x[*v] = *b;
        }
        x
    }
}

/// Reachable states plus, for each assignment over `vars`, the index of the
/// state it reaches.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexedStates<T> {
    pub set: StateSet<T>,
    pub index: Vec<usize>,
}

/// Enumerates and deduplicates (trace distance ≤ `eps_dedup`) the outputs of `f`.
pub fn reachable_states<T: Real>(f: &QFormula<T>, tol: &Tolerances<T>) -> Result<StateSet<T>, SimError> {
    reachable_states_indexed(f, tol).map(|r| r.set)
}

pub fn reachable_states_indexed<T: Real>(f: &QFormula<T>, tol: &Tolerances<T>) -> Result<IndexedStates<T>, SimError> {
    let vars = f.variables();
    let outputs = enumerate(&vars, |x| eval_qformula(f, x))?;
    let mut states: Vec<DensityMatrix<T>> = Vec::new();
    let mut witnesses = Vec::new();
    let mut index = Vec::with_capacity(outputs.len());
    for (i, rho) in outputs.into_iter().enumerate() {
        let mut found = None;
        for (j, s) in states.iter().enumerate() {
            if trace_distance(s, &rho)? <= tol.eps_dedup {
                found = Some(j);
                break;
            }
        }
        index.push(match found {
            Some(j) => j,
            None => {
                states.push(rho);
                witnesses.push(index_bits(i, vars.len()));
                states.len() - 1
            }
        });
    }
    Ok(IndexedStates {
        set: StateSet {
            vars,
            states,
            witnesses,
        },
        index,
    })
}
