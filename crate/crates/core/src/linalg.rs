//! Small dense routines on `ndarray` matrices: Cholesky factorization and
//! the inverse of a symmetric positive-definite matrix built on it.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Lower-triangular `L` with `L Lᵀ = a`.
///
/// Only the lower triangle of `a` is read. Fails with `NotPositiveDefinite`
/// when a pivot is not strictly positive.
pub fn cholesky_lower(a: ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.ncols(),
        });
    }
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut diag = a[[j, j]];
        for k in 0..j {
            diag -= l[[j, k]] * l[[j, k]];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(Error::NotPositiveDefinite {
                pivot: j,
                value: diag,
            });
        }
        let ljj = diag.sqrt();
        l[[j, j]] = ljj;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / ljj;
        }
    }
    Ok(l)
}

/// Solves `L Lᵀ x = b` given the Cholesky factor `L`.
pub fn cholesky_solve(l: ArrayView2<f64>, b: ArrayView1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut y = b.to_owned();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    y
}

/// Inverse of a symmetric positive-definite matrix. The result is
/// symmetrized so that `inv[i][j]` and `inv[j][i]` agree bitwise.
pub fn spd_inverse(a: ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let l = cholesky_lower(a)?;
    let mut inv = Array2::<f64>::zeros((n, n));
    let mut e = Array1::<f64>::zeros(n);
    for j in 0..n {
        e.fill(0.0);
        e[j] = 1.0;
        let col = cholesky_solve(l.view(), e.view());
        inv.column_mut(j).assign(&col);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (inv[[i, j]] + inv[[j, i]]);
            inv[[i, j]] = avg;
            inv[[j, i]] = avg;
        }
    }
    Ok(inv)
}

/// Copy of `a` with row and column `skip` removed.
pub fn drop_index(a: ArrayView2<f64>, skip: usize) -> Array2<f64> {
    let n = a.nrows();
    let keep: Vec<usize> = (0..n).filter(|&k| k != skip).collect();
    Array2::from_shape_fn((n - 1, n - 1), |(r, c)| a[[keep[r], keep[c]]])
}

pub fn max_abs_diff(a: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn identity_factor_is_identity() {
        let l = cholesky_lower(Array2::<f64>::eye(4).view()).unwrap();
        assert_eq!(l, Array2::<f64>::eye(4));
    }

    #[test]
    fn two_by_two_factor() {
        let sigma = array![[4.0, 2.0], [2.0, 5.0]];
        let l = cholesky_lower(sigma.view()).unwrap();
        assert_eq!(l, array![[2.0, 0.0], [1.0, 2.0]]);
        assert!(max_abs_diff(l.dot(&l.t()).view(), sigma.view()) < 1e-10);
    }

    #[test]
    fn indefinite_matrix_rejected() {
        let sigma = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(matches!(
            cholesky_lower(sigma.view()),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn inverse_of_tridiagonal() {
        let theta = array![[2.0, -1.0], [-1.0, 2.0]];
        let sigma = spd_inverse(theta.view()).unwrap();
        let expected = array![[2.0, 1.0], [1.0, 2.0]] / 3.0;
        assert!(max_abs_diff(sigma.view(), expected.view()) < 1e-15);
    }

    #[test]
    fn drop_index_removes_row_and_column() {
        let a = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]];
        assert_eq!(drop_index(a.view(), 1), array![[1.0, 3.0], [7.0, 9.0]]);
    }
}
