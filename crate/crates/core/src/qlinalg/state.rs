use num_traits::One;

use super::eigen::{hermitian_eigenvalues, principal_eigenpair_2x2, trace_norm};
use super::mat::{Cx, Mat};
use super::LinalgError;
use crate::scalar::Real;

/// Numerical slack used throughout the crate.
///
/// `eps_num` bounds round-off, `eps_dedup` is the trace-distance radius under
/// which two states are considered the same, and `eps_classical` is the
/// distance from a basis state under which a qubit counts as classical.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<T> {
    pub eps_num: T,
    pub eps_dedup: T,
    pub eps_classical: T,
}

impl<T: Real> Tolerances<T> {
    pub fn new(eps_num: T, eps_dedup: T, eps_classical: T) -> Result<Self, LinalgError> {
        let t = Self {
            eps_num,
            eps_dedup,
            eps_classical,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), LinalgError> {
        let ok = self.eps_num > T::zero()
            && self.eps_num <= self.eps_classical
            && self.eps_classical <= self.eps_dedup
            && self.eps_dedup <= T::of(1e-3);
        if ok {
            Ok(())
        } else {
            Err(LinalgError::BadTolerances(format!(
                "need 0 < eps_num <= eps_classical <= eps_dedup <= 1e-3, got {} / {} / {}",
                self.eps_num, self.eps_classical, self.eps_dedup
            )))
        }
    }
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        let (n, d, c) = T::DEFAULT_TOLERANCES;
        Self {
            eps_num: T::of(n),
            eps_dedup: T::of(d),
            eps_classical: T::of(c),
        }
    }
}

/// Positive semidefinite, unit-trace matrix on a power-of-two dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    mat: Mat<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, unit trace and the eigenvalue floor `-eps_num`.
    pub fn new(mat: Mat<T>, tol: &Tolerances<T>) -> Result<Self, LinalgError> {
        if !mat.is_square() {
            return Err(LinalgError::NotSquare {
                rows: mat.rows(),
                cols: mat.cols(),
            });
        }
        if !mat.rows().is_power_of_two() {
            return Err(LinalgError::NotPowerOfTwo(mat.rows()));
        }
        if !mat.is_hermitian(tol.eps_num) {
            return Err(LinalgError::NotHermitian);
        }
        let tr = mat.trace();
        if (tr.re - T::one()).abs() > tol.eps_num || tr.im.abs() > tol.eps_num {
            return Err(LinalgError::NotUnitTrace(tr.re.to_f64_lossless()));
        }
        let min = hermitian_eigenvalues(&mat)[0];
        if min < -tol.eps_num {
            return Err(LinalgError::NotPositive(min.to_f64_lossless()));
        }
        Ok(Self { mat })
    }

    /// Wraps a matrix already known to be a valid state (a channel output,
    /// a tensor product of states). Only the shape is checked.
    pub fn from_mat_unchecked(mat: Mat<T>) -> Self {
        debug_assert!(mat.is_square() && mat.rows().is_power_of_two());
        Self { mat }
    }

    /// `|b⟩⟨b|` on one qubit.
    pub fn basis(bit: bool) -> Self {
        Self::basis_state(1, usize::from(bit))
    }

    /// Computational basis projector `|index⟩⟨index|` on `qubits` qubits.
    pub fn basis_state(qubits: usize, index: usize) -> Self {
        let dim = 1usize << qubits;
        assert!(index < dim);
        let mut m = Mat::zeros(dim, dim);
        m.set(index, index, Cx::one());
        Self { mat: m }
    }

    /// `|ψ⟩⟨ψ|` for a ket, normalized here.
    pub fn pure(ket: &[Cx<T>]) -> Result<Self, LinalgError> {
        if !ket.len().is_power_of_two() {
            return Err(LinalgError::NotPowerOfTwo(ket.len()));
        }
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm <= T::epsilon() {
            return Err(LinalgError::RankDeficient);
        }
        let v: Vec<_> = ket.iter().map(|z| z / norm).collect();
        Ok(Self { mat: Mat::outer(&v, &v) })
    }

    pub fn plus() -> Self {
        Self {
            mat: Mat::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]),
        }
    }

    pub fn minus() -> Self {
        Self {
            mat: Mat::from_real(2, 2, &[0.5, -0.5, -0.5, 0.5]),
        }
    }

    pub fn maximally_mixed(qubits: usize) -> Self {
        let dim = 1usize << qubits;
        Self {
            mat: Mat::identity(dim).scale_real(T::one() / T::of(dim as f64)),
        }
    }

    pub fn mat(&self) -> &Mat<T> {
        &self.mat
    }

    pub fn into_mat(self) -> Mat<T> {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn entry(&self, i: usize, j: usize) -> Cx<T> {
        self.mat.get(i, j)
    }

    /// `⟨1|ρ|1⟩` for a single qubit: the probability of measuring 1.
    pub fn prob_one(&self) -> T {
        assert_eq!(self.dim(), 2);
        self.mat.get(1, 1).re
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> T {
        self.mat
            .matmul(&self.mat)
            .expect("square matrix")
            .trace()
            .re
    }

    /// `Tr(ρσ)`, the overlap `|⟨ψ|φ⟩|²` when both are pure.
    pub fn overlap(&self, other: &Self) -> Result<T, LinalgError> {
        Ok(self.mat.matmul(&other.mat)?.trace().re)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.kron(&other.mat),
        }
    }

    /// Tensor product in iteration order; the first factor is the most
    /// significant qubit. An empty iterator yields the 1×1 state `[1]`.
    pub fn tensor_all<'a, I>(states: I) -> Self
    where
        I: IntoIterator<Item = &'a Self>,
    {
        states
            .into_iter()
            .fold(Self { mat: Mat::identity(1) }, |acc, s| acc.tensor(s))
    }

    /// Reduced state on the qubits listed in `keep` (index 0 is the most
    /// significant qubit). Output qubits follow ascending index order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self, LinalgError> {
        let n = self.num_qubits();
        if keep.is_empty() {
            return Err(LinalgError::EmptyKeep);
        }
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&q) = keep.iter().find(|&&q| q >= n) {
            return Err(LinalgError::QubitOutOfRange { qubit: q, qubits: n });
        }
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let place = |bits_keep: usize, bits_traced: usize| -> usize {
            let mut idx = 0usize;
            for (pos, &q) in keep.iter().enumerate() {
                if (bits_keep >> (keep.len() - 1 - pos)) & 1 == 1 {
                    idx |= 1 << (n - 1 - q);
                }
            }
            for (pos, &q) in traced.iter().enumerate() {
                if (bits_traced >> (traced.len() - 1 - pos)) & 1 == 1 {
                    idx |= 1 << (n - 1 - q);
                }
            }
            idx
        };
        let kd = 1usize << keep.len();
        let td = 1usize << traced.len();
        let mut out = Mat::zeros(kd, kd);
        for i in 0..kd {
            for j in 0..kd {
                let s: Cx<T> = (0..td).map(|t| self.mat.get(place(i, t), place(j, t))).sum();
                out.set(i, j, s);
            }
        }
        Ok(Self { mat: out })
    }

    /// Principal eigenvector of a single-qubit state.
    pub fn principal_eigenvector(&self) -> [Cx<T>; 2] {
        principal_eigenpair_2x2(&self.mat).1
    }

    pub fn cast<U: Real>(&self) -> DensityMatrix<U> {
        DensityMatrix { mat: self.mat.cast() }
    }
}

/// Trace norm `‖a − b‖₁`, ranging over `[0, 2]`.
pub fn trace_distance<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> Result<T, LinalgError> {
    if a.dim() != b.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(trace_norm(&(a.mat() - b.mat())))
}

/// `Some(bit)` when the qubit is within `eps_classical` of `|bit⟩⟨bit|`.
pub fn is_classical_state<T: Real>(rho: &DensityMatrix<T>, tol: &Tolerances<T>) -> Option<bool> {
    if rho.dim() != 2 {
        return None;
    }
    for bit in [false, true] {
        let d = trace_distance(rho, &DensityMatrix::basis(bit)).ok()?;
        if d <= tol.eps_classical {
            return Some(bit);
        }
    }
    None
}

/// Unitary `U` with `U r1 U† = |0⟩⟨0|` and `U r2 U† = |1⟩⟨1|`.
///
/// The rows of `U` are the principal eigenvectors of `r1` and `r2`, the
/// second orthonormalized against the first so `U` is exactly unitary.
pub fn orthogonal_pure_pair_basis<T: Real>(
    r1: &DensityMatrix<T>,
    r2: &DensityMatrix<T>,
    tol: &Tolerances<T>,
) -> Result<Mat<T>, LinalgError> {
    for (which, r) in [(1u8, r1), (2u8, r2)] {
        if r.dim() != 2 {
            return Err(LinalgError::DimensionMismatch {
                expected: 2,
                found: r.dim(),
            });
        }
        let p = r.purity();
        if p < T::one() - tol.eps_num {
            return Err(LinalgError::NotPure {
                which,
                purity: p.to_f64_lossless(),
            });
        }
    }
    let ov = r1.overlap(r2)?;
    if ov > tol.eps_num {
        return Err(LinalgError::NotOrthogonal(ov.to_f64_lossless()));
    }
    let psi = r1.principal_eigenvector();
    let phi = r2.principal_eigenvector();
    let proj = psi[0].conj() * phi[0] + psi[1].conj() * phi[1];
    let mut w = [phi[0] - proj * psi[0], phi[1] - proj * psi[1]];
    let n = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
    w = [w[0] / n, w[1] / n];
    let mut u = Mat::zeros(2, 2);
    for j in 0..2 {
        u.set(0, j, psi[j].conj());
        u.set(1, j, w[j].conj());
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    type D = DensityMatrix<f64>;

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    #[test]
    fn trace_distance_examples() {
        let zero = D::basis(false);
        let one = D::basis(true);
        assert!((trace_distance(&zero, &one).unwrap() - 2.0).abs() < 1e-15);
        assert!(trace_distance(&zero, &zero).unwrap().abs() < 1e-15);
        // |0⟩⟨0| - |+⟩⟨+| = [[1/2,-1/2],[-1/2,-1/2]] has eigenvalues ±1/√2.
        let d = trace_distance(&zero, &D::plus()).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
        assert!(trace_distance(&zero, &D::maximally_mixed(2)).is_err());
    }

    #[test]
    fn validation() {
        let t = tol();
        assert!(D::new(Mat::from_real(2, 2, &[0.5, 0.0, 0.0, 0.5]), &t).is_ok());
        assert!(matches!(
            D::new(Mat::from_real(2, 2, &[1.5, 0.0, 0.0, -0.5]), &t),
            Err(LinalgError::NotPositive(_))
        ));
        assert!(matches!(
            D::new(Mat::from_real(2, 2, &[0.5, 0.1, 0.0, 0.5]), &t),
            Err(LinalgError::NotHermitian)
        ));
        assert!(matches!(
            D::new(Mat::from_real(2, 2, &[0.6, 0.0, 0.0, 0.6]), &t),
            Err(LinalgError::NotUnitTrace(_))
        ));
        assert!(D::new(Mat::identity(3), &t).is_err());
    }

    #[test]
    fn partial_trace_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = D::pure(&[Cx::new(s, 0.0), Cx::new(0.0, 0.0), Cx::new(0.0, 0.0), Cx::new(s, 0.0)]).unwrap();
        let red = bell.partial_trace(&[0]).unwrap();
        assert!(red.mat().approx_eq(D::maximally_mixed(1).mat(), 1e-15));

        let prod = D::plus().tensor(&D::basis(true));
        assert!(prod.partial_trace(&[0]).unwrap().mat().approx_eq(D::plus().mat(), 1e-15));
        assert!(prod.partial_trace(&[1]).unwrap().mat().approx_eq(D::basis(true).mat(), 1e-15));

        let ten = D::basis_state(2, 0b10);
        assert_eq!(ten.partial_trace(&[1]).unwrap(), D::basis(false));
        assert_eq!(ten.partial_trace(&[0]).unwrap(), D::basis(true));

        assert!(matches!(ten.partial_trace(&[]), Err(LinalgError::EmptyKeep)));
        assert!(matches!(
            ten.partial_trace(&[2]),
            Err(LinalgError::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn classical_state_detection() {
        let t = tol();
        assert_eq!(is_classical_state(&D::basis(true), &t), Some(true));
        assert_eq!(is_classical_state(&D::basis(false), &t), Some(false));
        assert_eq!(is_classical_state(&D::maximally_mixed(1), &t), None);
        assert_eq!(is_classical_state(&D::plus(), &t), None);
    }

    #[test]
    fn pair_basis_examples() {
        let t = tol();
        let u = orthogonal_pure_pair_basis(&D::basis(false), &D::basis(true), &t).unwrap();
        for i in 0..2 {
            assert!((u.get(i, i).norm() - 1.0).abs() < 1e-15);
        }
        let u = orthogonal_pure_pair_basis(&D::plus(), &D::minus(), &t).unwrap();
        let h = Mat::hadamard();
        for j in 0..2 {
            // rows of U (columns of U†) agree with H up to a phase
            let c: Cx<f64> = (0..2).map(|i| u.get(j, i).conj() * h.get(j, i)).sum();
            assert!((c.norm() - 1.0).abs() < 1e-12);
        }
        assert!(D::plus().mat().conjugate_by(&u).unwrap().approx_eq(D::basis(false).mat(), 1e-12));
        assert!(matches!(
            orthogonal_pure_pair_basis(&D::basis(false), &D::plus(), &t),
            Err(LinalgError::NotOrthogonal(_))
        ));
        assert!(matches!(
            orthogonal_pure_pair_basis(&D::maximally_mixed(1), &D::basis(true), &t),
            Err(LinalgError::NotPure { which: 1, .. })
        ));
    }
}
