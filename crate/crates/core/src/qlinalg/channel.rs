use num_traits::{One, Zero};

use super::eigen::eigendecomposition_2x2;
use super::mat::{Cx, Mat};
use super::state::{DensityMatrix, Tolerances};
use super::LinalgError;
use crate::scalar::Real;

/// Completely positive trace-preserving map in Kraus form.
///
/// Each Kraus operator is `2^out × 2^in`. Completeness `Σ K†K = I` is checked
/// by [`Channel::new`]; complete positivity holds by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel<T> {
    in_qubits: usize,
    out_qubits: usize,
    kraus: Vec<Mat<T>>,
}

impl<T: Real> Channel<T> {
    /// Validated constructor. `out_qubits` is read off the Kraus shapes.
    pub fn new(in_qubits: usize, kraus: Vec<Mat<T>>, tol: &Tolerances<T>) -> Result<Self, LinalgError> {
        let ch = Self::with_shape(in_qubits, kraus)?;
        let dev = ch.completeness_deviation();
        if dev > tol.eps_num {
            return Err(LinalgError::NotTracePreserving(dev.to_f64_lossless()));
        }
        Ok(ch)
    }

    /// Shape-checked constructor that skips the completeness test.
    pub fn from_kraus_unchecked(in_qubits: usize, kraus: Vec<Mat<T>>) -> Result<Self, LinalgError> {
        Self::with_shape(in_qubits, kraus)
    }

    fn with_shape(in_qubits: usize, kraus: Vec<Mat<T>>) -> Result<Self, LinalgError> {
        let first = kraus.first().ok_or(LinalgError::NoKraus)?;
        let din = 1usize << in_qubits;
        let dout = first.rows();
        if !dout.is_power_of_two() {
            return Err(LinalgError::NotPowerOfTwo(dout));
        }
        for k in &kraus {
            if k.cols() != din {
                return Err(LinalgError::DimensionMismatch {
                    expected: din,
                    found: k.cols(),
                });
            }
            if k.rows() != dout {
                return Err(LinalgError::DimensionMismatch {
                    expected: dout,
                    found: k.rows(),
                });
            }
        }
        Ok(Self {
            in_qubits,
            out_qubits: dout.trailing_zeros() as usize,
            kraus,
        })
    }

    /// Largest entrywise deviation of `Σ K†K` from the identity.
    pub fn completeness_deviation(&self) -> T {
        let din = 1usize << self.in_qubits;
        let mut acc = Mat::zeros(din, din);
        for k in &self.kraus {
            acc = &acc + &(&k.adjoint() * k);
        }
        acc.max_abs_diff(&Mat::identity(din))
    }

    pub fn identity(qubits: usize) -> Self {
        Self {
            in_qubits: qubits,
            out_qubits: qubits,
            kraus: vec![Mat::identity(1 << qubits)],
        }
    }

    /// `ρ ↦ UρU†`. The matrix must be unitary within `tol.eps_num`.
    pub fn unitary(u: Mat<T>, tol: &Tolerances<T>) -> Result<Self, LinalgError> {
        if !u.is_square() || !u.rows().is_power_of_two() {
            return Err(LinalgError::NotSquare {
                rows: u.rows(),
                cols: u.cols(),
            });
        }
        if !u.is_unitary(tol.eps_num) {
            return Err(LinalgError::NotUnitary);
        }
        let q = u.rows().trailing_zeros() as usize;
        Ok(Self {
            in_qubits: q,
            out_qubits: q,
            kraus: vec![u],
        })
    }

    /// Single-qubit depolarizing channel `ρ ↦ (1−p)ρ + p·I/2`.
    pub fn depolarizing(p: T) -> Self {
        let four = T::of(4.0);
        let scale = |c: T, m: Mat<T>| m.scale_real(c.sqrt());
        let mut kraus = vec![scale(T::one() - T::of(3.0) * p / four, Mat::identity(2))];
        if p > T::zero() {
            for m in [Mat::pauli_x(), Mat::pauli_y(), Mat::pauli_z()] {
                kraus.push(scale(p / four, m));
            }
        }
        Self {
            in_qubits: 1,
            out_qubits: 1,
            kraus,
        }
    }

    /// Single-qubit channel that discards its input and emits `state`.
    pub fn preparation(state: &DensityMatrix<T>) -> Self {
        Self::controlled_preparation(state, state)
    }

    /// Single-qubit channel sending `|0⟩⟨0| ↦ on_zero` and `|1⟩⟨1| ↦ on_one`
    /// (measuring in the computational basis first).
    pub fn controlled_preparation(on_zero: &DensityMatrix<T>, on_one: &DensityMatrix<T>) -> Self {
        assert!(on_zero.dim() == 2 && on_one.dim() == 2);
        let mut kraus = Vec::new();
        for (bit, state) in [on_zero, on_one].into_iter().enumerate() {
            for (lambda, v) in eigendecomposition_2x2(state.mat()) {
                if lambda <= T::zero() {
                    continue;
                }
                let s = lambda.sqrt();
                let mut k = Mat::zeros(2, 2);
                k.set(0, bit, v[0] * s);
                k.set(1, bit, v[1] * s);
                kraus.push(k);
            }
        }
        Self {
            in_qubits: 1,
            out_qubits: 1,
            kraus,
        }
    }

    /// Classical `m → 1` gate: `|x⟩ ↦ |f(x)⟩` with Kraus operators `|f(x)⟩⟨x|`.
    /// `table[x]` uses big-endian input order (wire 0 most significant).
    pub fn classical(arity: usize, table: &[bool]) -> Self {
        assert_eq!(table.len(), 1 << arity);
        let kraus = table
            .iter()
            .enumerate()
            .map(|(x, &fx)| {
                let mut k = Mat::zeros(2, 1 << arity);
                k.set(usize::from(fx), x, Cx::one());
                k
            })
            .collect();
        Self {
            in_qubits: arity,
            out_qubits: 1,
            kraus,
        }
    }

    pub fn in_qubits(&self) -> usize {
        self.in_qubits
    }

    pub fn out_qubits(&self) -> usize {
        self.out_qubits
    }

    pub fn kraus(&self) -> &[Mat<T>] {
        &self.kraus
    }

    /// `Σᵢ Kᵢ ρ Kᵢ†`.
    pub fn apply(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>, LinalgError> {
        let din = 1usize << self.in_qubits;
        if rho.dim() != din {
            return Err(LinalgError::DimensionMismatch {
                expected: din,
                found: rho.dim(),
            });
        }
        let dout = 1usize << self.out_qubits;
        let mut out = Mat::zeros(dout, dout);
        for k in &self.kraus {
            out = &out + &(&(k * rho.mat()) * &k.adjoint());
        }
        Ok(DensityMatrix::from_mat_unchecked(out))
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &Self) -> Result<Self, LinalgError> {
        if after.in_qubits != self.out_qubits {
            return Err(LinalgError::DimensionMismatch {
                expected: self.out_qubits,
                found: after.in_qubits,
            });
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * after.kraus.len());
        for a in &after.kraus {
            for k in &self.kraus {
                let p = a * k;
                if p.entries().iter().any(|z| !z.is_zero()) {
                    kraus.push(p);
                }
            }
        }
        if kraus.is_empty() {
            kraus.push(Mat::zeros(1 << after.out_qubits, 1 << self.in_qubits));
        }
        Ok(Self {
            in_qubits: self.in_qubits,
            out_qubits: after.out_qubits,
            kraus,
        })
    }

    /// Precomposes with the unitary `u` on the input: `ρ ↦ Φ(uρu†)`.
    pub fn after_unitary(&self, u: &Mat<T>) -> Result<Self, LinalgError> {
        let din = 1usize << self.in_qubits;
        if u.rows() != din || u.cols() != din {
            return Err(LinalgError::DimensionMismatch {
                expected: din,
                found: u.rows(),
            });
        }
        Ok(Self {
            in_qubits: self.in_qubits,
            out_qubits: self.out_qubits,
            kraus: self.kraus.iter().map(|k| k * u).collect(),
        })
    }

    /// Superoperator matrix `Σ K ⊗ K̄` acting on row-major vectorized states.
    pub fn superoperator(&self) -> Mat<T> {
        let dout = 1usize << self.out_qubits;
        let din = 1usize << self.in_qubits;
        let mut s = Mat::zeros(dout * dout, din * din);
        for k in &self.kraus {
            let conj = Mat::from_vec(
                k.rows(),
                k.cols(),
                k.entries().iter().map(|z| z.conj()).collect(),
            )
            .expect("same shape");
            s = &s + &k.kron(&conj);
        }
        s
    }

    pub fn cast<U: Real>(&self) -> Channel<U> {
        Channel {
            in_qubits: self.in_qubits,
            out_qubits: self.out_qubits,
            kraus: self.kraus.iter().map(Mat::cast).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::trace_distance;

    type C = Channel<f64>;
    type D = DensityMatrix<f64>;

    #[test]
    fn kraus_completeness_is_enforced() {
        let t = Tolerances::default();
        let mut k = Mat::<f64>::identity(2);
        k.set(0, 0, Cx::new(1.0 + 1e-3, 0.0));
        assert!(matches!(C::new(1, vec![k], &t), Err(LinalgError::NotTracePreserving(_))));
        assert!(C::new(1, vec![Mat::hadamard()], &t).is_ok());
        assert!(matches!(C::new(2, vec![Mat::hadamard()], &t), Err(LinalgError::DimensionMismatch { .. })));
        assert!(matches!(C::new(1, vec![], &t), Err(LinalgError::NoKraus)));
    }

    #[test]
    fn apply_examples() {
        let rho = D::plus();
        assert_eq!(C::identity(1).apply(&rho).unwrap(), rho);
        let full = C::depolarizing(1.0).apply(&D::basis(false)).unwrap();
        assert!(full.mat().approx_eq(D::maximally_mixed(1).mat(), 1e-15));
        // CNOT target with the control traced out.
        let cnot = C::classical(2, &[false, true, true, false]);
        let out = cnot.apply(&D::basis(true).tensor(&D::basis(false))).unwrap();
        assert!(out.mat().approx_eq(D::basis(true).mat(), 1e-15));
        assert!(cnot.apply(&rho).is_err());
    }

    #[test]
    fn preparation_ignores_input() {
        let t = Tolerances::default();
        let target = D::pure(&[Cx::new(0.6, 0.0), Cx::new(0.0, 0.8)]).unwrap();
        let prep = C::preparation(&target);
        assert!(prep.completeness_deviation() < 1e-14);
        for input in [D::basis(false), D::basis(true), D::plus()] {
            let out = prep.apply(&input).unwrap();
            assert!(trace_distance(&out, &target).unwrap() < 1e-12);
        }
        let cp = C::controlled_preparation(&D::plus(), &D::maximally_mixed(1));
        assert!(C::new(1, cp.kraus().to_vec(), &t).is_ok());
        assert!(cp.apply(&D::basis(true)).unwrap().mat().approx_eq(D::maximally_mixed(1).mat(), 1e-14));
    }

    #[test]
    fn composition_and_superoperator_agree() {
        let h = C::unitary(Mat::hadamard(), &Tolerances::default()).unwrap();
        let chain = h.then(&C::depolarizing(0.3)).unwrap();
        let rho = D::basis(false);
        let direct = C::depolarizing(0.3).apply(&h.apply(&rho).unwrap()).unwrap();
        assert!(chain.apply(&rho).unwrap().mat().approx_eq(direct.mat(), 1e-14));

        let s = chain.superoperator();
        let v = s.mul_vec(rho.mat().entries());
        let via = Mat::from_vec(2, 2, v).unwrap();
        assert!(via.approx_eq(direct.mat(), 1e-14));
    }
}
