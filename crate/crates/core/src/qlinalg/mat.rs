use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use super::LinalgError;
use crate::scalar::Real;

/// Complex scalar.
pub type Cx<T> = Complex<T>;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Cx::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Cx::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Cx<T>>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<Cx<T>>>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::Ragged);
        }
        Self::from_vec(r, c, rows.into_iter().flatten().collect())
    }

    /// Builds a matrix from real entries, convenient for literals.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Self {
            rows,
            cols,
            data: entries.iter().map(|&v| Cx::new(T::of(v), T::zero())).collect(),
        }
    }

    /// Outer product `|v⟩⟨w|`.
    pub fn outer(v: &[Cx<T>], w: &[Cx<T>]) -> Self {
        let mut m = Self::zeros(v.len(), w.len());
        for (i, a) in v.iter().enumerate() {
            for (j, b) in w.iter().enumerate() {
                m.data[i * w.len() + j] = a * b.conj();
            }
        }
        m
    }

    pub fn pauli_x() -> Self {
        Self::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn pauli_y() -> Self {
        let i = Cx::new(T::zero(), T::one());
        Self {
            rows: 2,
            cols: 2,
            data: vec![Cx::zero(), -i, i, Cx::zero()],
        }
    }

    pub fn pauli_z() -> Self {
        Self::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    pub fn hadamard() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real(2, 2, &[s, s, s, -s])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cx<T> {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Cx<T>) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Cx<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Cx<T>> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let rrow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(rrow) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    /// Kronecker product `self ⊗ rhs`; `self` indexes the more significant qubits.
    pub fn kron(&self, rhs: &Self) -> Self {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out.data[(i * rhs.rows + k) * cols + j * rhs.cols + l] = a * rhs.get(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, c: Cx<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: T) -> Self {
        self.scale(Cx::new(c, T::zero()))
    }

    pub fn trace(&self) -> Cx<T> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self, LinalgError> {
        u.matmul(self)?.matmul(&u.adjoint())
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.max_abs_diff(other) <= tol
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square() && self.approx_eq(&self.adjoint(), tol)
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.is_square()
            && self
                .adjoint()
                .matmul(self)
                .map(|p| p.approx_eq(&Self::identity(self.rows), tol))
                .unwrap_or(false)
    }

    /// QR factorization by modified Gram-Schmidt. `Q` has orthonormal columns,
    /// `R` is upper triangular with the Gram-Schmidt norms on its diagonal.
    pub fn qr(&self) -> Result<(Self, Self), LinalgError> {
        let (m, n) = (self.rows, self.cols);
        let mut q = self.clone();
        let mut r = Self::zeros(n, n);
        for j in 0..n {
            for k in 0..j {
                let proj: Cx<T> = (0..m).map(|i| q.get(i, k).conj() * q.get(i, j)).sum();
                r.set(k, j, proj);
                for i in 0..m {
                    let v = q.get(i, j) - proj * q.get(i, k);
                    q.set(i, j, v);
                }
            }
            let norm = (0..m).map(|i| q.get(i, j).norm_sqr()).sum::<T>().sqrt();
            if norm <= T::epsilon() {
                return Err(LinalgError::RankDeficient);
            }
            r.set(j, j, Cx::new(norm, T::zero()));
            for i in 0..m {
                let v = q.get(i, j) / norm;
                q.set(i, j, v);
            }
        }
        Ok((q, r))
    }

    /// Converts the scalar type, e.g. `f64` to `f32`.
    pub fn cast<U: Real>(&self) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| Cx::new(U::of(z.re.to_f64_lossless()), U::of(z.im.to_f64_lossless())))
                .collect(),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                let z = &self.data[i * self.cols + j];
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:.4?}{:+.4?}i", z.re, z.im)?;
            }
        }
        write!(f, "]")
    }
}

fn check_same_shape<T>(a: &Mat<T>, b: &Mat<T>) {
    assert_eq!(
        (a.rows, a.cols),
        (b.rows, b.cols),
        "elementwise op on mismatched shapes"
    );
}

impl<T: Real> Add for &Mat<T> {
    type Output = Mat<T>;
    fn add(self, rhs: &Mat<T>) -> Mat<T> {
        check_same_shape(self, rhs);
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &Mat<T> {
    type Output = Mat<T>;
    fn sub(self, rhs: &Mat<T>) -> Mat<T> {
        check_same_shape(self, rhs);
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> Neg for &Mat<T> {
    type Output = Mat<T>;
    fn neg(self) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }
}

/// Panics on inner-dimension mismatch; use [`Mat::matmul`] for a checked product.
impl<T: Real> Mul for &Mat<T> {
    type Output = Mat<T>;
    fn mul(self, rhs: &Mat<T>) -> Mat<T> {
        self.matmul(rhs).expect("matrix product dimension mismatch")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = Mat<f64>;

    #[test]
    fn pauli_algebra() {
        let x = M::pauli_x();
        let y = M::pauli_y();
        let z = M::pauli_z();
        let i = Cx::new(0.0, 1.0);
        assert!((&x * &y).approx_eq(&z.scale(i), 1e-15));
        assert!((&x * &x).approx_eq(&M::identity(2), 1e-15));
        let h = M::hadamard();
        assert!(h.conjugate_by(&h).unwrap().approx_eq(&h, 1e-15));
        assert!(x.conjugate_by(&h).unwrap().approx_eq(&z, 1e-15));
        assert!(h.is_unitary(1e-15) && h.is_hermitian(1e-15));
    }

    #[test]
    fn kron_ordering_is_big_endian() {
        // |1⟩ ⊗ |0⟩ = |10⟩ = basis index 2
        let one = M::from_real(2, 1, &[0.0, 1.0]);
        let zero = M::from_real(2, 1, &[1.0, 0.0]);
        let v = one.kron(&zero);
        assert_eq!(v.column(0)[2], Cx::new(1.0, 0.0));
        assert_eq!(v.rows(), 4);
    }

    #[test]
    fn qr_reconstructs() {
        let a = M::from_rows(vec![
            vec![Cx::new(1.0, 0.5), Cx::new(-0.3, 2.0)],
            vec![Cx::new(0.2, -1.0), Cx::new(0.7, 0.1)],
        ])
        .unwrap();
        let (q, r) = a.qr().unwrap();
        assert!(q.is_unitary(1e-12));
        assert!((&q * &r).approx_eq(&a, 1e-12));
        assert!(r.get(1, 0).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(M::from_vec(2, 2, vec![Cx::zero(); 3]).is_err());
        assert!(M::from_rows(vec![vec![Cx::zero()], vec![]]).is_err());
        assert!(M::from_vec(1, 1, vec![Cx::new(f64::NAN, 0.0)]).is_err());
        assert!(M::zeros(2, 3).matmul(&M::zeros(2, 3)).is_err());
    }
}
