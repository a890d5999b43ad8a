//! Small dense solves for ALS normal equations.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{GtdError, Result};
use crate::tensor::Matrix;

/// Relative diagonal jitter added to every normal-equation system.
pub const JITTER: f64 = 1e-12;

pub(crate) fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(m.rows(), m.cols(), m.data())
}

pub(crate) fn from_na(m: &DMatrix<f64>) -> Matrix {
    Matrix::from_col_major(m.nrows(), m.ncols(), m.as_slice().to_vec())
        .expect("nalgebra storage is consistent")
}

pub(crate) fn jitter_for(trace: f64, size: usize) -> f64 {
    JITTER * trace / size as f64
}

/// Solves `(gram + (ridge + jitter)·I) X = rhs` for symmetric positive
/// semidefinite `gram`, where `jitter = 1e-12·trace(gram)/n`.
///
/// Cholesky is tried first, followed by one refinement step toward the
/// system without jitter. If the shifted system is still not positive
/// definite (e.g. an all-zero Gram with no ridge) the minimum-norm solution
/// is returned through a truncated eigendecomposition.
pub fn solve_regularized(gram: &Matrix, rhs: &Matrix, ridge: f64) -> Result<Matrix> {
    let n = gram.rows();
    if gram.cols() != n || rhs.rows() != n {
        return Err(GtdError::shape(format!(
            "normal equations {}x{} with rhs {}x{}",
            gram.rows(),
            gram.cols(),
            rhs.rows(),
            rhs.cols()
        )));
    }
    let trace: f64 = (0..n).map(|i| gram.get(i, i)).sum();
    let shift = ridge + jitter_for(trace, n);
    let mut a = to_na(gram);
    for i in 0..n {
        a[(i, i)] += shift;
    }
    let b = to_na(rhs);
    let x = match a.clone().cholesky() {
        Some(chol) => {
            let x = chol.solve(&b);
            let mut target = to_na(gram);
            for i in 0..n {
                target[(i, i)] += ridge;
            }
            let r = &b - target * &x;
            x + chol.solve(&r)
        }
        None => pinv_solve(a, &b),
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(GtdError::Numerical(
            "regularized normal equations produced non-finite values".into(),
        ));
    }
    Ok(from_na(&x))
}

fn pinv_solve(a: DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(a);
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = top * 1e-14;
    let qtb = eig.eigenvectors.transpose() * b;
    let mut scaled = qtb;
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        let inv = if lam > cutoff && lam > 0.0 { 1.0 / lam } else { 0.0 };
        scaled.row_mut(i).scale_mut(inv);
    }
    &eig.eigenvectors * scaled
}

/// Symmetric eigendecomposition `g = Q Λ Qᵀ` as (eigenvalues, Q).
pub(crate) fn sym_eigen(g: &Matrix) -> (Vec<f64>, Matrix) {
    let eig = SymmetricEigen::new(to_na(g));
    (eig.eigenvalues.as_slice().to_vec(), from_na(&eig.eigenvectors))
}
