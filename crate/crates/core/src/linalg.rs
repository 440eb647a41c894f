//! Dense symmetric positive-definite algebra for the handful of fixed
//! effects the trend models carry (p <= 4). Row-major `Vec<F>` storage.

use crate::scalar::Real;

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<F> {
    n: usize,
    lower: Vec<F>,
}

impl<F: Real> Cholesky<F> {
    /// Factor `a` (n x n, row-major). Returns `None` when a pivot is not
    /// positive relative to the diagonal scale, i.e. the matrix is singular
    /// or indefinite to working precision.
    pub fn factor(a: &[F], n: usize) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        let scale = (0..n)
            .map(|i| a[i * n + i].abs())
            .fold(F::zero(), F::max);
        if scale <= F::zero() || !scale.is_finite() {
            return None;
        }
        let tol = scale * F::epsilon() * F::of_usize(n.max(1)) * F::of(16.0);
        let mut l = vec![F::zero(); n * n];
        for j in 0..n {
            let mut d = a[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > tol) {
                return None;
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in (j + 1)..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Some(Self { n, lower: l })
    }

    pub fn solve(&self, b: &[F]) -> Vec<F> {
        let n = self.n;
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[k * n + i] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        y
    }

    pub fn inverse(&self) -> Vec<F> {
        let n = self.n;
        let mut inv = vec![F::zero(); n * n];
        let mut e = vec![F::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = F::zero());
            e[j] = F::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        inv
    }

    /// Natural log of the determinant of the factored matrix.
    pub fn ln_det(&self) -> F {
        let n = self.n;
        (0..n)
            .map(|i| self.lower[i * n + i].ln())
            .sum::<F>()
            * F::of(2.0)
    }
}
