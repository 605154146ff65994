//! Small linear-algebra kernels: sorted symmetric eigenvalues for jets,
//! banded LU without pivoting for monotone (Z-matrix) systems, and a dense
//! principal-eigenvalue oracle.

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};

use crate::operators::MAX_DIM;

/// Eigenvalues of the leading `n x n` block of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &[[f64; MAX_DIM]; MAX_DIM], n: usize) -> [f64; MAX_DIM] {
    let mut out = [0.0; MAX_DIM];
    match n {
        0 => {}
        1 => out[0] = m[0][0],
        2 => {
            let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
            let mean = 0.5 * (a + c);
            let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            out[0] = mean - rad;
            out[1] = mean + rad;
        }
        _ => {
            let mat = Matrix3::from_fn(|i, j| m[i][j]);
            let ev = SymmetricEigen::new(mat).eigenvalues;
            out.copy_from_slice(ev.as_slice());
            out.sort_by(|a, b| a.total_cmp(b));
        }
    }
    out
}

/// Square banded matrix with `bw` sub- and super-diagonals.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    /// Row-major band storage: entry (i, j) lives at `i * (2bw+1) + (j + bw - i)`.
    data: Vec<f64>,
}

/// Outcome of a no-pivot LU factorization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Factorization {
    /// Every pivot was strictly positive.
    PositivePivots,
    /// A pivot at the given row was `<= 0` (or non-finite).
    NonPositivePivot { row: usize, pivot: f64 },
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandMatrix { n, bw, data: vec![0.0; n * (2 * bw + 1)] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i.abs_diff(j) <= self.bw);
        i * (2 * self.bw + 1) + (j + self.bw - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i.abs_diff(j) > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// In-place LU without pivoting (Doolittle); `L` has unit diagonal.
    ///
    /// For a Z-matrix, all pivots are positive exactly when the matrix is a
    /// nonsingular M-matrix, so the outcome doubles as that test. Stops at the
    /// first non-positive pivot.
    pub fn factor_in_place(&mut self) -> Factorization {
        let (n, bw) = (self.n, self.bw);
        for k in 0..n {
            let pivot = self.data[self.idx(k, k)];
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Factorization::NonPositivePivot { row: k, pivot };
            }
            let last = (k + bw).min(n - 1);
            for i in k + 1..=last {
                let lik_idx = self.idx(i, k);
                let lik = self.data[lik_idx] / pivot;
                if lik == 0.0 {
                    continue;
                }
                self.data[lik_idx] = lik;
                for j in k + 1..=last {
                    let ukj = self.data[self.idx(k, j)];
                    if ukj != 0.0 {
                        let ij = self.idx(i, j);
                        self.data[ij] -= lik * ukj;
                    }
                }
            }
        }
        Factorization::PositivePivots
    }

    /// Solves `LU x = b` after a successful [`factor_in_place`](Self::factor_in_place).
    pub fn solve_factored(&self, b: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let first = i.saturating_sub(bw);
            let mut s = b[i];
            for j in first..i {
                s -= self.data[self.idx(i, j)] * b[j];
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let last = (i + bw).min(n - 1);
            let mut s = b[i];
            for j in i + 1..=last {
                s -= self.data[self.idx(i, j)] * b[j];
            }
            b[i] = s / self.data[self.idx(i, i)];
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.bw);
                let hi = (i + self.bw).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }
}

/// Smallest real part among the eigenvalues of a dense real matrix.
pub fn min_real_eigenvalue(m: DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_sorted_ascending() {
        let mut m = [[0.0; MAX_DIM]; MAX_DIM];
        m[0][0] = 3.0;
        m[1][1] = -1.0;
        m[0][1] = 2.0;
        m[1][0] = 2.0;
        let ev = sym_eigenvalues(&m, 2);
        // trace 2, det -7 -> 1 +- sqrt(8)
        assert!((ev[0] - (1.0 - 8f64.sqrt())).abs() < 1e-14);
        assert!((ev[1] - (1.0 + 8f64.sqrt())).abs() < 1e-14);
        m[2][2] = 0.5;
        let ev3 = sym_eigenvalues(&m, 3);
        assert!(ev3[0] <= ev3[1] && ev3[1] <= ev3[2]);
        assert!((ev3[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn banded_lu_solves_tridiagonal_laplacian() {
        let n = 50;
        let mut a = BandMatrix::zeros(n, 1);
        for i in 0..n {
            a.set(i, i, 2.0);
            if i > 0 {
                a.set(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.set(i, i + 1, -1.0);
            }
        }
        let orig = a.clone();
        assert_eq!(a.factor_in_place(), Factorization::PositivePivots);
        let mut x = vec![1.0; n];
        a.solve_factored(&mut x);
        let back = orig.mul_vec(&x);
        for v in back {
            assert!((v - 1.0).abs() < 1e-10);
        }
        // discrete solution of -u'' = 1 is non-negative
        assert!(x.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn non_m_matrix_reports_non_positive_pivot() {
        let mut a = BandMatrix::zeros(3, 1);
        for i in 0..3 {
            a.set(i, i, 2.0 - 3.0);
        }
        assert!(matches!(a.factor_in_place(), Factorization::NonPositivePivot { row: 0, .. }));
    }

    #[test]
    fn dense_oracle_matches_known_spectrum() {
        // second difference on 10 interior nodes: eigenvalues 2 - 2cos(k pi / 11)
        let n = 10;
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                2.0
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        });
        let expected = 2.0 - 2.0 * (std::f64::consts::PI / 11.0).cos();
        assert!((min_real_eigenvalue(m) - expected).abs() < 1e-10);
    }
}
