use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result};

pub type DenseMatrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Largest dimension accepted by the dense eigen/QR diagnostics.
pub const DENSE_LIMIT: usize = 500;

pub fn is_finite(a: &DenseMatrix) -> bool {
    a.iter().all(|v| v.is_finite())
}

fn symmetric_eigen(a: &DenseMatrix) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "expected square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !is_finite(a) {
        return Err(Error::NonFinite("dense matrix"));
    }
    // symmetrize so round-off asymmetry does not leak into the eigenvectors
    let sym = (a + a.transpose()) * 0.5;
    Ok(SymmetricEigen::new(sym))
}

/// Orthonormal basis of the numerical kernel of a symmetric matrix: the
/// eigenvectors with `|λ| ≤ tol · max|λ|`. Returns an `n × 0` matrix when the
/// matrix is numerically nonsingular.
pub fn nullspace_basis(a: &DenseMatrix, tol: f64) -> Result<DenseMatrix> {
    let n = a.nrows();
    let eig = symmetric_eigen(a)?;
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut idx: Vec<usize> = (0..n)
        .filter(|&k| eig.eigenvalues[k].abs() <= tol * lmax || lmax == 0.0)
        .collect();
    idx.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .abs()
            .total_cmp(&eig.eigenvalues[j].abs())
            .then(i.cmp(&j))
    });
    let mut q = DenseMatrix::zeros(n, idx.len());
    for (c, &k) in idx.iter().enumerate() {
        q.set_column(c, &eig.eigenvectors.column(k));
    }
    Ok(q)
}

/// Numerical rank from a column-pivoted QR: number of diagonal entries of
/// `R` with `|r_kk| ≥ tol · |r_00|`. Pivoted QR rather than an SVD because the
/// nalgebra SVD occasionally returns wrong factors for rank-deficient input.
pub fn rank(a: &DenseMatrix, tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let r = a.clone().col_piv_qr().r();
    let d: Vec<f64> = (0..r.nrows().min(r.ncols()))
        .map(|k| r[(k, k)].abs())
        .collect();
    let dmax = d.iter().fold(0.0f64, |m, v| m.max(*v));
    if dmax == 0.0 {
        return 0;
    }
    d.iter().filter(|&&v| v >= tol * dmax).count()
}

/// Smallest eigenvalue of the symmetric part of `a`.
pub fn min_symmetric_eigenvalue(a: &DenseMatrix) -> Result<f64> {
    let eig = symmetric_eigen(a)?;
    Ok(eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

/// Moore–Penrose pseudo-inverse of a symmetric matrix by eigendecomposition,
/// discarding eigenvalues with `|λ| ≤ tol · max|λ|`.
pub fn symmetric_pinv(a: &DenseMatrix, tol: f64) -> Result<DenseMatrix> {
    let eig = symmetric_eigen(a)?;
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let n = a.nrows();
    let mut out = DenseMatrix::zeros(n, n);
    for k in 0..n {
        let l = eig.eigenvalues[k];
        if l.abs() > tol * lmax && l != 0.0 {
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) / l;
        }
    }
    Ok(out)
}
