//! Linear algebra used throughout the crate.
//!
//! Sparse storage is CSR ([`CsrMatrix`]). Direct solves go through
//! [`SparseLu`], a left-looking LU with threshold partial pivoting and a
//! minimum-degree column ordering. The pseudo-inverse of a singular mass
//! matrix is never formed; [`RestrictedSpdSolver`] applies it to right-hand
//! sides living on the conductive support.
//!
//! Dense matrices are `nalgebra` types. Eigen- and singular-value routines are
//! only meant for desk-scale diagnostics; see [`DENSE_LIMIT`].

mod dense;
mod lu;
pub mod mtx;
mod ordering;
mod sparse;

pub use dense::{
    is_finite, min_symmetric_eigenvalue, nullspace_basis, rank, symmetric_pinv, DenseMatrix,
    Vector, DENSE_LIMIT,
};
pub use lu::{Pivoting, RestrictedSpdSolver, SparseLu, SINGULAR_PIVOT_RTOL};
pub use ordering::minimum_degree;
pub use sparse::CsrMatrix;

/// Applies the pseudo-inverse of a symmetric `m` to `b`, assuming `m` is SPD
/// on `support` and decoupled from the rest.
pub fn restricted_spd_solve(
    m: &CsrMatrix,
    b: &[f64],
    support: &[usize],
) -> crate::Result<Vec<f64>> {
    RestrictedSpdSolver::new(m, support)?.solve(b)
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
