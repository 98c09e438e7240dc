//! Dense symmetric factorization for exact Gaussian sampling.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath;

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    l: Vec<f64>, // row-major, upper part unused
}

/// Diagonal jitter added once if the plain factorization fails.
pub const CHOLESKY_JITTER: f64 = 1e-12;

impl CholeskyFactor {
    /// Factors `a` (row-major `n x n`, only the lower triangle is read).
    ///
    /// If plain factorization hits a non-positive pivot, one retry with
    /// `CHOLESKY_JITTER` on the diagonal is attempted before giving up.
    pub fn new(a: &[f64], n: usize, hurst_for_error: f64) -> Result<Self> {
        assert_eq!(a.len(), n * n, "matrix buffer size mismatch");
        match Self::factor(a, n, 0.0) {
            Some(l) => Ok(CholeskyFactor { n, l }),
            None => match Self::factor(a, n, CHOLESKY_JITTER) {
                Some(l) => Ok(CholeskyFactor { n, l }),
                None => Err(Error::NotPositiveDefinite {
                    size: n,
                    hurst: hurst_for_error,
                    detail: "non-positive pivot after jitter retry".to_string(),
                }),
            },
        }
    }

    fn factor(a: &[f64], n: usize, jitter: f64) -> Option<Vec<f64>> {
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a[j * n + j] + jitter;
            let row_j = j * n;
            for k in 0..j {
                d -= l[row_j + k] * l[row_j + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let pivot = fmath::sqrt(d);
            l[row_j + j] = pivot;
            for i in (j + 1)..n {
                let row_i = i * n;
                let mut s = a[row_i + j];
                for k in 0..j {
                    s -= l[row_i + k] * l[row_j + k];
                }
                l[row_i + j] = s / pivot;
            }
        }
        Some(l)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    /// `out = L * z`, turning iid standard normals into a correlated draw.
    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        assert_eq!(z.len(), self.n);
        assert_eq!(out.len(), self.n);
        for i in 0..self.n {
            let row = &self.l[i * self.n..i * self.n + i + 1];
            let mut acc = 0.0;
            for (lik, zk) in row.iter().zip(z[..=i].iter()) {
                acc += lik * zk;
            }
            out[i] = acc;
        }
    }
}
