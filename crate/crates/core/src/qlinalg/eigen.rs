//! Hermitian eigensolvers: closed form for 2×2, cyclic Jacobi otherwise.

use num_traits::Zero;

use super::mat::{Cx, Mat};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// The matrix is assumed Hermitian; only its Hermitian part is used.
pub fn hermitian_eigenvalues<T: Real>(h: &Mat<T>) -> Vec<T> {
    assert!(h.is_square(), "eigenvalues need a square matrix");
    let n = h.rows();
    match n {
        0 => Vec::new(),
        1 => vec![h.get(0, 0).re],
        2 => {
            let (lo, hi) = eig2(h);
            vec![lo, hi]
        }
        _ => {
            // H = A + iB embeds as the real symmetric [[A, -B], [B, A]], whose
            // spectrum is that of H with every eigenvalue doubled.
            let m = 2 * n;
            let mut s = vec![T::zero(); m * m];
            for i in 0..n {
                for j in 0..n {
                    let z = (h.get(i, j) + h.get(j, i).conj()) / T::of(2.0);
                    s[i * m + j] = z.re;
                    s[(i + n) * m + j + n] = z.re;
                    s[i * m + j + n] = -z.im;
                    s[(i + n) * m + j] = z.im;
                }
            }
            let mut all = jacobi_symmetric(&mut s, m);
            all.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
            all.into_iter().step_by(2).collect()
        }
    }
}

fn eig2<T: Real>(h: &Mat<T>) -> (T, T) {
    let two = T::of(2.0);
    let a = h.get(0, 0).re;
    let d = h.get(1, 1).re;
    let b = (h.get(0, 1) + h.get(1, 0).conj()) / two;
    let mean = (a + d) / two;
    let half_gap = (((a - d) / two).powi(2) + b.norm_sqr()).sqrt();
    (mean - half_gap, mean + half_gap)
}

/// Largest eigenvalue and a unit eigenvector for a 2×2 Hermitian matrix.
pub fn principal_eigenpair_2x2<T: Real>(h: &Mat<T>) -> (T, [Cx<T>; 2]) {
    assert!(h.rows() == 2 && h.cols() == 2);
    let (_, lambda) = eig2(h);
    let a = h.get(0, 0).re;
    let d = h.get(1, 1).re;
    let b = (h.get(0, 1) + h.get(1, 0).conj()) / T::of(2.0);
    let real = |v: T| Cx::new(v, T::zero());
    let first = [b, real(lambda - a)];
    let second = [real(lambda - d), b.conj()];
    let n1 = first[0].norm_sqr() + first[1].norm_sqr();
    let n2 = second[0].norm_sqr() + second[1].norm_sqr();
    let (v, n) = if n1 >= n2 { (first, n1) } else { (second, n2) };
    if n <= T::epsilon() * T::epsilon() {
        // Degenerate spectrum: every vector is an eigenvector.
        return (lambda, [real(T::one()), Cx::zero()]);
    }
    let n = n.sqrt();
    (lambda, [v[0] / n, v[1] / n])
}

/// Spectral decomposition of a 2×2 Hermitian matrix as `[(λ_hi, v_hi), (λ_lo, v_lo)]`
/// with orthonormal eigenvectors.
pub fn eigendecomposition_2x2<T: Real>(h: &Mat<T>) -> [(T, [Cx<T>; 2]); 2] {
    let (lo, _) = eig2(h);
    let (hi, v) = principal_eigenpair_2x2(h);
    let w = [-v[1].conj(), v[0].conj()];
    [(hi, v), (lo, w)]
}

/// Cyclic Jacobi on a dense real symmetric `m×m` matrix stored row-major.
/// Returns the (unsorted) diagonal after convergence.
fn jacobi_symmetric<T: Real>(s: &mut [T], m: usize) -> Vec<T> {
    let idx = |i: usize, j: usize| i * m + j;
    let scale: T = s.iter().map(|v| *v * *v).sum::<T>().sqrt().max(T::min_positive_value());
    let tol = T::epsilon() * scale;
    for _ in 0..MAX_SWEEPS {
        let off: T = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| s[idx(i, j)] * s[idx(i, j)])
            .sum::<T>()
            .sqrt();
        if off <= tol {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = s[idx(p, q)];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = s[idx(p, p)];
                let aqq = s[idx(q, q)];
                let theta = (aqq - app) / (T::of(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let sn = t * c;
                for k in 0..m {
                    let akp = s[idx(k, p)];
                    let akq = s[idx(k, q)];
                    s[idx(k, p)] = c * akp - sn * akq;
                    s[idx(k, q)] = sn * akp + c * akq;
                }
                for k in 0..m {
                    let apk = s[idx(p, k)];
                    let aqk = s[idx(q, k)];
                    s[idx(p, k)] = c * apk - sn * aqk;
                    s[idx(q, k)] = sn * apk + c * aqk;
                }
            }
        }
    }
    (0..m).map(|i| s[idx(i, i)]).collect()
}

/// Sum of absolute eigenvalues of a Hermitian matrix (its trace norm).
pub fn trace_norm<T: Real>(h: &Mat<T>) -> T {
    hermitian_eigenvalues(h).into_iter().map(T::abs).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_matches_jacobi_on_diagonalizable_4x4() {
        // Hermitian 4x4 built as U diag(λ) U† with a known spectrum.
        let h = Mat::<f64>::hadamard();
        let u = h.kron(&Mat::identity(2));
        let mut d = Mat::<f64>::zeros(4, 4);
        for (i, l) in [-1.5, 0.25, 0.5, 2.0].iter().enumerate() {
            d.set(i, i, Cx::new(*l, 0.0));
        }
        let phase = Mat::from_rows(vec![
            vec![Cx::new(1.0, 0.0), Cx::zero(), Cx::zero(), Cx::zero()],
            vec![Cx::zero(), Cx::new(0.0, 1.0), Cx::zero(), Cx::zero()],
            vec![Cx::zero(), Cx::zero(), Cx::new(0.6, 0.8), Cx::zero()],
            vec![Cx::zero(), Cx::zero(), Cx::zero(), Cx::new(1.0, 0.0)],
        ])
        .unwrap();
        let w = &u * &phase;
        let m = d.conjugate_by(&w).unwrap();
        let ev = hermitian_eigenvalues(&m);
        for (a, b) in ev.iter().zip([-1.5, 0.25, 0.5, 2.0]) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn principal_vector_of_plus_state() {
        let s = 0.5;
        let plus = Mat::<f64>::from_real(2, 2, &[s, s, s, s]);
        let (l, v) = principal_eigenpair_2x2(&plus);
        assert!((l - 1.0).abs() < 1e-15);
        assert!((v[0].norm() - v[1].norm()).abs() < 1e-15);
        let diag = Mat::<f64>::from_real(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let (_, v) = principal_eigenpair_2x2(&diag);
        assert!((v[1].norm() - 1.0).abs() < 1e-15);
    }
}
