//! The traced Toffoli channel and the classical gates it yields when
//! dressed with single-qubit channels.
//!
//! Qubits `0..m−1` are controls and qubit `m−1` is the target; the controls
//! are traced out, leaving an `m → 1` channel.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use num_traits::One;
use thiserror::Error;

use crate::ir::{index_bits, TruthTable};
use crate::qlinalg::{
    is_classical_state, trace_distance, Channel, Cx, DensityMatrix, LinalgError, Mat, Tolerances,
};
use crate::scalar::Real;

pub const MIN_ARITY: usize = 2;
pub const MAX_ARITY: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ToffoliError {
    #[error("Toffoli arity {0} outside {MIN_ARITY}..={MAX_ARITY}")]
    ArityOutOfRange(usize),
    #[error("expected {expected} single-qubit channels or states, got {found}")]
    WrongInputCount { expected: usize, found: usize },
    #[error("expected a single-qubit channel or state at position {0}")]
    NotSingleQubit(usize),
    #[error("NonClassicalOutput: output on input {input:?} is not a basis state")]
    NonClassicalOutput { input: Vec<bool> },
    #[error("internal consistency failure: closed-form output differs from the channel by {0}")]
    IdentityViolated(f64),
    #[error("internal consistency failure: table {0} is not in the Toffoli family")]
    NotInFamily(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn check_arity(m: usize) -> Result<(), ToffoliError> {
    if (MIN_ARITY..=MAX_ARITY).contains(&m) {
        Ok(())
    } else {
        Err(ToffoliError::ArityOutOfRange(m))
    }
}

/// Classical Toffoli function `(x₁ ∧ … ∧ x_{m−1}) ⊕ x_m`.
pub fn toffoli_table(m: usize) -> TruthTable {
    TruthTable::from_fn(m, |x| x[..m - 1].iter().all(|&b| b) ^ x[m - 1])
}

/// Kraus operators `|t ⊕ AND(c)⟩⟨c, t|` for every control pattern `c`.
pub fn toffoli_channel<T: Real>(m: usize) -> Result<Channel<T>, ToffoliError> {
    check_arity(m)?;
    let kraus = (0..1usize << (m - 1))
        .map(|c| {
            let fire = c == (1 << (m - 1)) - 1;
            let mut k = Mat::zeros(2, 1 << m);
            for t in 0..2usize {
                k.set(t ^ usize::from(fire), (c << 1) | t, Cx::one());
            }
            k
        })
        .collect();
    Ok(Channel::from_kraus_unchecked(m, kraus)?)
}

/// Closed-form check of the traced Toffoli on product inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct ToffoliAnalysis<T> {
    pub m: usize,
    /// `⟨1|ρ_i|1⟩` for each control.
    pub weights: Vec<T>,
    /// Product of the control weights.
    pub a: T,
    /// `a·XρX + (1−a)·ρ`.
    pub predicted_output: DensityMatrix<T>,
    pub actual_output: DensityMatrix<T>,
}

pub fn verify_output_identity<T: Real>(
    controls: &[DensityMatrix<T>],
    target: &DensityMatrix<T>,
    tol: &Tolerances<T>,
) -> Result<ToffoliAnalysis<T>, ToffoliError> {
    let m = controls.len() + 1;
    check_arity(m)?;
    for (i, c) in controls.iter().chain(std::iter::once(target)).enumerate() {
        if c.dim() != 2 {
            return Err(ToffoliError::NotSingleQubit(i));
        }
    }
    let weights: Vec<T> = controls.iter().map(DensityMatrix::prob_one).collect();
    let a = weights.iter().fold(T::one(), |acc, &w| acc * w);
    let x = Mat::pauli_x();
    let flipped = target.mat().conjugate_by(&x)?;
    let predicted = DensityMatrix::from_mat_unchecked(&flipped.scale_real(a) + &target.mat().scale_real(T::one() - a));
    let input = DensityMatrix::tensor_all(controls.iter().chain(std::iter::once(target)));
    let actual = toffoli_channel::<T>(m)?.apply(&input)?;
    let gap = trace_distance(&predicted, &actual)?;
    if gap > tol.eps_num {
        return Err(ToffoliError::IdentityViolated(gap.to_f64_lossless()));
    }
    Ok(ToffoliAnalysis {
        m,
        weights,
        a,
        predicted_output: predicted,
        actual_output: actual,
    })
}

/// The single-bit gates: identity, NOT and the two constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SingleBitGate {
    Identity,
    Not,
    Const0,
    Const1,
}

impl SingleBitGate {
    pub const ALL: [SingleBitGate; 4] = [Self::Identity, Self::Not, Self::Const0, Self::Const1];

    pub fn apply(self, b: bool) -> bool {
        match self {
            Self::Identity => b,
            Self::Not => !b,
            Self::Const0 => false,
            Self::Const1 => true,
        }
    }

    /// The gate as a single-qubit channel.
    pub fn to_channel<T: Real>(self) -> Channel<T> {
        match self {
            Self::Identity => Channel::identity(1),
            Self::Not => Channel::from_kraus_unchecked(1, vec![Mat::pauli_x()]).expect("2x2"),
            Self::Const0 => Channel::preparation(&DensityMatrix::basis(false)),
            Self::Const1 => Channel::preparation(&DensityMatrix::basis(true)),
        }
    }
}

fn build_family(m: usize) -> BTreeSet<TruthTable> {
    let base = toffoli_table(m);
    let mut out = BTreeSet::new();
    let combos = 4usize.pow(m as u32 + 1);
    for code in 0..combos {
        let gate = |slot: usize| SingleBitGate::ALL[(code >> (2 * slot)) & 3];
        let post = gate(m);
        out.insert(TruthTable::from_fn(m, |x| {
            let y: Vec<bool> = x.iter().enumerate().map(|(i, &b)| gate(i).apply(b)).collect();
            post.apply(base.eval(&y))
        }));
    }
    out
}

/// Tables reachable from the `m`-bit Toffoli by single-bit gates on every
/// input and on the output.
pub fn enumerate_f_tof(m: usize) -> Result<&'static BTreeSet<TruthTable>, ToffoliError> {
    static CACHE: [OnceLock<BTreeSet<TruthTable>>; MAX_ARITY + 1] = [const { OnceLock::new() }; MAX_ARITY + 1];
    check_arity(m)?;
    Ok(CACHE[m].get_or_init(|| build_family(m)))
}

/// Table computed by `post ∘ Φ^Tof_m ∘ (⊗ pre_i)` on classical inputs,
/// which must lie in the Toffoli family.
pub fn classify_depth_one<T: Real>(
    pre: &[Channel<T>],
    post: &Channel<T>,
    m: usize,
    tol: &Tolerances<T>,
) -> Result<TruthTable, ToffoliError> {
    check_arity(m)?;
    if pre.len() != m {
        return Err(ToffoliError::WrongInputCount {
            expected: m,
            found: pre.len(),
        });
    }
    for (i, c) in pre.iter().chain(std::iter::once(post)).enumerate() {
        if c.in_qubits() != 1 || c.out_qubits() != 1 {
            return Err(ToffoliError::NotSingleQubit(i));
        }
    }
    let tof = toffoli_channel::<T>(m)?;
    let mut bits = Vec::with_capacity(1 << m);
    for x in 0..1usize << m {
        let xb = index_bits(x, m);
        let inputs = pre
            .iter()
            .zip(&xb)
            .map(|(c, &b)| c.apply(&DensityMatrix::basis(b)))
            .collect::<Result<Vec<_>, _>>()?;
        let out = post.apply(&tof.apply(&DensityMatrix::tensor_all(inputs.iter()))?)?;
        bits.push(is_classical_state(&out, tol).ok_or(ToffoliError::NonClassicalOutput { input: xb })?);
    }
    let table = TruthTable::new(m, bits).expect("2^m entries");
    if !enumerate_f_tof(m)?.contains(&table) {
        return Err(ToffoliError::NotInFamily(table.to_bit_string()));
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    type D = DensityMatrix<f64>;

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    #[test]
    fn channel_examples() {
        let t = tol();
        let c2 = toffoli_channel::<f64>(2).unwrap();
        assert!(c2.completeness_deviation() < 1e-15);
        let out = c2.apply(&D::basis(true).tensor(&D::basis(false))).unwrap();
        assert_eq!(is_classical_state(&out, &t), Some(true));

        let rho = D::pure(&[Cx::new(0.6, 0.0), Cx::new(0.0, 0.8)]).unwrap();
        let c3 = toffoli_channel::<f64>(3).unwrap();
        let on = c3.apply(&D::basis(true).tensor(&D::basis(true)).tensor(&rho)).unwrap();
        let flipped = rho.mat().conjugate_by(&Mat::pauli_x()).unwrap();
        assert!(on.mat().approx_eq(&flipped, 1e-14));
        let off = c3.apply(&D::basis(false).tensor(&D::basis(false)).tensor(&rho)).unwrap();
        assert!(off.mat().approx_eq(rho.mat(), 1e-14));

        assert!(matches!(toffoli_channel::<f64>(1), Err(ToffoliError::ArityOutOfRange(1))));
        assert!(matches!(toffoli_channel::<f64>(7), Err(ToffoliError::ArityOutOfRange(7))));
    }

    #[test]
    fn identity_examples() {
        let t = tol();
        let rho = D::pure(&[Cx::new(0.6, 0.0), Cx::new(0.0, 0.8)]).unwrap();
        let r = verify_output_identity(&[D::plus(), D::plus()], &rho, &t).unwrap();
        assert!((r.a - 0.25).abs() < 1e-15);
        let r = verify_output_identity(&[D::basis(true), D::basis(true)], &rho, &t).unwrap();
        assert!((r.a - 1.0).abs() < 1e-15);
        let r = verify_output_identity(&[D::basis(false), D::plus()], &rho, &t).unwrap();
        assert_eq!(r.a, 0.0);
        assert!(r.actual_output.mat().approx_eq(rho.mat(), 1e-14));
    }

    #[test]
    fn family_membership() {
        let f2 = enumerate_f_tof(2).unwrap();
        assert!(f2.contains(&TruthTable::parity(2)));
        assert!(f2.contains(&"1001".parse().unwrap()));
        assert!(!f2.contains(&TruthTable::and(2)));
        for m in 2..=4 {
            assert!(enumerate_f_tof(m).unwrap().len() <= 4usize.pow(m as u32 + 1));
        }
        assert!(enumerate_f_tof(3).unwrap().contains(&toffoli_table(3)));
    }

    #[test]
    fn classification_examples() {
        let t = tol();
        let id = Channel::<f64>::identity(1);
        let table = classify_depth_one(&[id.clone(), id.clone(), id.clone()], &id, 3, &t).unwrap();
        assert_eq!(table, toffoli_table(3));

        let not = SingleBitGate::Not.to_channel::<f64>();
        let table = classify_depth_one(&[id.clone(), not], &id, 2, &t).unwrap();
        assert_eq!(table, TruthTable::from_fn(2, |x| x[0] ^ !x[1]));

        let plus = Channel::preparation(&D::plus());
        assert!(matches!(
            classify_depth_one(&[plus, id.clone()], &id, 2, &t),
            Err(ToffoliError::NonClassicalOutput { .. })
        ));
    }

    #[test]
    fn family_members_round_trip_through_classification() {
        let t = tol();
        for m in 2..=3 {
            for code in 0..4usize.pow(m as u32 + 1) {
                let gate = |slot: usize| SingleBitGate::ALL[(code >> (2 * slot)) & 3];
                let pre: Vec<Channel<f64>> = (0..m).map(|i| gate(i).to_channel()).collect();
                let table = classify_depth_one(&pre, &gate(m).to_channel(), m, &t).unwrap();
                assert!(enumerate_f_tof(m).unwrap().contains(&table));
            }
        }
    }
}
