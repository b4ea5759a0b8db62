//! Compiler from AND/OR/NOT circuits to one-qubit programs, and the
//! F₂-affineness test separating them from formulas over NOT and PARITY.
//!
//! A compiled program for circuit `C` has net unitary `φ(x)·X^{C(x)}`, so
//! starting from `|0⟩` it ends in `|C(x)⟩` up to a global phase. A depth-`d`
//! circuit compiles to at most `4^d` controlled-X items.
//!
//! A program reads each variable many times. Dropping the read-once
//! restriction from formulas therefore changes what they can compute. Over
//! single-qubit gates and CNOT, a read-once formula dequantizes to one over
//! NOT, XOR and constants, whose functions all pass [`affine_check`]. A
//! four-item program already computes AND, which fails it. So the
//! dequantization in [`crate::dequantize`] depends on the read-once
//! structure and cannot extend to read-many formulas.

use serde_json::{json, Value};
use thiserror::Error;

pub use crate::simulate::net_unitary;

use crate::ir::{BoolCircuit, OneQubitProgram, OqpItem, TruthTable};
use crate::qlinalg::{Mat, Tolerances};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OqpError {
    #[error("matrix is not a unitary of the expected size")]
    NotUnitary,
    #[error("shapes differ: {0}x{0} vs {1}x{1}")]
    ShapeMismatch(usize, usize),
}

/// Fixed single-qubit matrices used by the compiler.
#[derive(Clone, Debug, PartialEq)]
pub struct GateConstants<T> {
    /// `(X + Y)/√2`.
    pub v: Mat<T>,
    /// `(X + H)/√(2 + √2)`.
    pub r: Mat<T>,
    pub x: Mat<T>,
    pub y: Mat<T>,
    pub z: Mat<T>,
    pub h: Mat<T>,
}

impl<T: Real> Default for GateConstants<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> GateConstants<T> {
    pub fn new() -> Self {
        let (x, y, h) = (Mat::pauli_x(), Mat::pauli_y(), Mat::hadamard());
        let v = (&x + &y).scale_real(T::FRAC_1_SQRT_2());
        let two = T::of(2.0);
        let r = (&x + &h).scale_real(T::one() / (two + two.sqrt()).sqrt());
        Self {
            v,
            r,
            x,
            y,
            z: Mat::pauli_z(),
            h,
        }
    }

    /// `V² = I`, `VXV = Y`, `VYV = X`, `R² = I`, `RXR = H`, `RHR = X`.
    pub fn verify(&self, tol: T) -> bool {
        let i = Mat::identity(2);
        let sandwich = |a: &Mat<T>, b: &Mat<T>| &(a * b) * a;
        (&self.v * &self.v).approx_eq(&i, tol)
            && sandwich(&self.v, &self.x).approx_eq(&self.y, tol)
            && sandwich(&self.v, &self.y).approx_eq(&self.x, tol)
            && (&self.r * &self.r).approx_eq(&i, tol)
            && sandwich(&self.r, &self.x).approx_eq(&self.h, tol)
            && sandwich(&self.r, &self.h).approx_eq(&self.x, tol)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompileReport<T> {
    pub program: OneQubitProgram<T>,
    pub source_depth: usize,
    pub length: usize,
    /// `4^depth`.
    pub bound: u128,
}

impl<T: Real> CompileReport<T> {
    pub fn to_json(&self) -> Value {
        json!({ "length": self.length, "depth": self.source_depth, "bound": self.bound as u64 })
    }
}

/// Appends an item, multiplying consecutive single-qubit matrices together.
fn push<T: Real>(items: &mut Vec<OqpItem<T>>, item: OqpItem<T>) {
    if let (Some(OqpItem::SingleQubit(prev)), OqpItem::SingleQubit(next)) = (items.last_mut(), &item) {
        *prev = next * prev;
        return;
    }
    items.push(item);
}

fn extend<T: Real>(items: &mut Vec<OqpItem<T>>, more: &[OqpItem<T>]) {
    for it in more {
        push(items, it.clone());
    }
}

fn lower<T: Real>(c: &BoolCircuit, k: &GateConstants<T>) -> Vec<OqpItem<T>> {
    match c {
        BoolCircuit::Var(v) => vec![OqpItem::ControlledX(*v)],
        BoolCircuit::Not(a) => {
            let mut out = lower(a, k);
            push(&mut out, OqpItem::SingleQubit(k.x.clone()));
            out
        }
        BoolCircuit::And(a, b) => {
            let first = lower(a, k);
            let second = lower(b, k);
            let mut wrapped = vec![OqpItem::SingleQubit(k.r.clone())];
            extend(&mut wrapped, &second);
            push(&mut wrapped, OqpItem::SingleQubit(k.r.clone()));

            let mut out = vec![OqpItem::SingleQubit(k.v.clone())];
            extend(&mut out, &wrapped);
            extend(&mut out, &first);
            extend(&mut out, &wrapped);
            extend(&mut out, &first);
            push(&mut out, OqpItem::SingleQubit(k.v.clone()));
            out
        }
        BoolCircuit::Or(..) => lower(&c.without_or(), k),
    }
}

/// Compiles `c`; OR gates are first rewritten with De Morgan's law.
pub fn compile<T: Real>(c: &BoolCircuit) -> CompileReport<T> {
    let k = GateConstants::new();
    let program = OneQubitProgram::from_items_unchecked(lower(&c.without_or(), &k));
    let depth = c.depth();
    CompileReport {
        length: program.length(),
        program,
        source_depth: depth,
        bound: 4u128.saturating_pow(depth as u32),
    }
}

/// Whether `a = φ·b` for a unit scalar `φ`, tested as `|tr(a†b)| = dim`.
pub fn up_to_phase_equal<T: Real>(a: &Mat<T>, b: &Mat<T>, tol: &Tolerances<T>) -> Result<bool, OqpError> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(OqpError::ShapeMismatch(a.rows(), b.rows()));
    }
    if !a.is_unitary(tol.eps_num) || !b.is_unitary(tol.eps_num) {
        return Err(OqpError::NotUnitary);
    }
    let overlap = (&a.adjoint() * b).trace().norm();
    Ok((overlap - T::of(a.rows() as f64)).abs() <= tol.eps_num)
}

/// Algebraic normal form coefficients; entry `s` is the coefficient of the
/// monomial over the inputs whose bits are set in `s` (big-endian).
pub fn algebraic_normal_form(t: &TruthTable) -> Vec<bool> {
    let mut c = t.bits().to_vec();
    let n = c.len();
    let mut step = 1;
    while step < n {
        for i in 0..n {
            if i & step != 0 {
                c[i] ^= c[i ^ step];
            }
        }
        step <<= 1;
    }
    c
}

/// True iff the function has degree at most one over F₂.
pub fn affine_check(t: &TruthTable) -> bool {
    algebraic_normal_form(t)
        .iter()
        .enumerate()
        .all(|(s, &coef)| !coef || s.count_ones() <= 1)
}

/// `X^bit` as a matrix.
pub fn x_power<T: Real>(bit: bool) -> Mat<T> {
    if bit {
        Mat::pauli_x()
    } else {
        Mat::identity(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::index_bits;
    use crate::qlinalg::Cx;
    use crate::simulate::{eval_circuit, eval_oqp, truth_table};
    use BoolCircuit as B;

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    #[test]
    fn constants_satisfy_identities() {
        assert!(GateConstants::<f64>::new().verify(1e-12));
        assert!(GateConstants::<f32>::new().verify(1e-5));
    }

    #[test]
    fn compile_examples() {
        assert_eq!(compile::<f64>(&B::var(0)).length, 1);

        let and = B::and(B::var(0), B::var(1));
        let rep = compile::<f64>(&and);
        assert_eq!((rep.length, rep.bound, rep.source_depth), (4, 4, 1));
        let tt = truth_table(&rep.program, &tol()).unwrap();
        assert!(tt.classical);
        assert_eq!(tt.table, TruthTable::and(2));

        let c = B::or(B::and(B::var(0), B::var(1)), B::var(2));
        let rep = compile::<f64>(&c);
        assert!(rep.length <= 16);
        for x in 0..8 {
            let bits = index_bits(x, 3);
            let rho = eval_oqp(&rep.program, &bits).unwrap();
            let expect = eval_circuit(&c, &bits).unwrap();
            assert!((rho.prob_one() - f64::from(u8::from(expect))).abs() < 1e-9);
        }
    }

    #[test]
    fn not_preserves_length_and_singles_are_merged() {
        let c = B::and(B::var(0), B::var(1));
        let n = B::not(B::not(c.clone()));
        assert_eq!(compile::<f64>(&n).length, compile::<f64>(&c).length);
        let items = compile::<f64>(&n).program.items().to_vec();
        for w in items.windows(2) {
            assert!(!matches!(w, [OqpItem::SingleQubit(_), OqpItem::SingleQubit(_)]));
        }
    }

    #[test]
    fn net_unitary_examples() {
        let t = tol();
        let p = OneQubitProgram::new(vec![OqpItem::ControlledX(0)], &t).unwrap();
        assert!(net_unitary(&p, &[true]).unwrap().approx_eq(&Mat::pauli_x(), 0.0));
        assert!(net_unitary(&OneQubitProgram::<f64>::default(), &[]).unwrap().approx_eq(&Mat::identity(2), 0.0));
        let and = compile::<f64>(&B::and(B::var(0), B::var(1))).program;
        let u = net_unitary(&and, &[true, true]).unwrap();
        assert!(up_to_phase_equal(&u, &Mat::pauli_x(), &t).unwrap());
    }

    #[test]
    fn phase_equality_examples() {
        let t = tol();
        let x = Mat::<f64>::pauli_x();
        let ix = x.scale(Cx::new(0.0, 1.0));
        assert!(up_to_phase_equal(&x, &ix, &t).unwrap());
        assert!(!up_to_phase_equal(&x, &Mat::hadamard(), &t).unwrap());
        let y = Mat::<f64>::pauli_y();
        assert!(up_to_phase_equal(&y.scale(Cx::new(0.0, -1.0)), &y.scale(Cx::new(0.0, 1.0)), &t).unwrap());
        let bad = Mat::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert_eq!(up_to_phase_equal(&bad, &x, &t), Err(OqpError::NotUnitary));
    }

    #[test]
    fn affine_examples() {
        assert!(affine_check(&TruthTable::parity(3)));
        assert!(!affine_check(&TruthTable::and(2)));
        assert!(affine_check(&TruthTable::constant(2, true)));
        assert!(affine_check(&TruthTable::from_fn(3, |x| !x[0] ^ x[2])));
        let anf = algebraic_normal_form(&TruthTable::and(2));
        assert_eq!(anf, vec![false, false, false, true]);
    }
}
