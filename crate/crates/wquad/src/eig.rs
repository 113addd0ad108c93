//! Dense generalized symmetric-definite eigensolver for the assembled
//! pencils, used by the validation studies.

use crate::assemble::SparseMatrix;
use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Hard cap on the densified problem size.
pub const DENSE_CAP: usize = 4096;

/// Smallest `count` eigenvalues of K x = lambda M x, ascending.
///
/// Both matrices must be symmetric with Dirichlet rows/columns already
/// eliminated, and M positive definite. The reduction runs through a
/// Cholesky factorization of K when K is itself positive definite and
/// solves for the reciprocals 1/lambda; that keeps the relative accuracy
/// of the small eigenvalues at the machine-epsilon level instead of
/// eps * lambda_max. When K is only semidefinite the M-side reduction is
/// used instead.
pub fn solve_generalized_eig(k: &SparseMatrix, m: &SparseMatrix, count: usize) -> Result<Vec<f64>> {
    let n = k.n();
    if m.n() != n {
        return Err(Error::Config("pencil dimension mismatch".into()));
    }
    if n > DENSE_CAP {
        return Err(Error::DimensionCap { n, cap: DENSE_CAP });
    }
    let kd = k.to_dense();
    let md = m.to_dense();
    let eig = generalized_eigenvalues(&kd, &md)?;
    Ok(eig.into_iter().take(count.min(n)).collect())
}

/// Dense variant used internally by the studies.
pub fn generalized_eigenvalues(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = k.nrows();
    if let Some(chol_k) = k.clone().cholesky() {
        // C = L_K^{-1} M L_K^{-T}; its eigenvalues are 1/lambda
        let mut c = m.clone();
        chol_k.l().solve_lower_triangular_mut(&mut c);
        c.transpose_mut();
        chol_k.l().solve_lower_triangular_mut(&mut c);
        symmetrize(&mut c);
        let mut mu: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
        if mu.iter().any(|&v| v <= 0.0) {
            return Err(Error::NotPositiveDefinite("mass matrix".into()));
        }
        mu.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(mu.into_iter().map(|v| 1.0 / v).collect())
    } else {
        // fall back to the M-side reduction
        let chol_m = m
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("mass matrix".into()))?;
        let mut c = k.clone();
        chol_m.l().solve_lower_triangular_mut(&mut c);
        c.transpose_mut();
        chol_m.l().solve_lower_triangular_mut(&mut c);
        symmetrize(&mut c);
        let mut lam: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
        lam.sort_by(|a, b| a.partial_cmp(b).unwrap());
        debug_assert_eq!(lam.len(), n);
        Ok(lam)
    }
}

fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemble::SparseMatrix;
    use approx::assert_abs_diff_eq;

    fn identity_sparse(n: usize) -> SparseMatrix {
        let mut m = SparseMatrix::with_stencil(&[n], 1);
        for i in 0..n {
            m.add(i, i, 1.0);
        }
        m
    }

    #[test]
    fn identity_pencil() {
        let k = identity_sparse(8);
        let m = identity_sparse(8);
        let lam = solve_generalized_eig(&k, &m, 8).unwrap();
        for v in lam {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn diagonal_pencil() {
        let mut k = identity_sparse(4);
        for i in 0..4 {
            k.add(i, i, i as f64); // diag 1,2,3,4
        }
        let mut m = identity_sparse(4);
        for i in 0..4 {
            m.add(i, i, 1.0); // diag 2
        }
        let lam = solve_generalized_eig(&k, &m, 4).unwrap();
        for (i, v) in lam.iter().enumerate() {
            assert_abs_diff_eq!(*v, (i as f64 + 1.0) / 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn indefinite_mass_is_reported() {
        let k = identity_sparse(4);
        let mut m = SparseMatrix::with_stencil(&[4], 1);
        for i in 0..4 {
            m.add(i, i, -1.0);
        }
        assert!(matches!(
            solve_generalized_eig(&k, &m, 4),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn dimension_cap_enforced() {
        let n = DENSE_CAP + 1;
        let k = identity_sparse(n);
        let m = identity_sparse(n);
        assert!(matches!(
            solve_generalized_eig(&k, &m, 1),
            Err(Error::DimensionCap { .. })
        ));
    }
}
