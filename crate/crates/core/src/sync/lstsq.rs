//! Minimum-norm least-squares helpers for the translation solves.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Minimum-norm solution of the normal equations `A^T A x = A^T b` via a
/// symmetric eigendecomposition with a relative cutoff; null-space
/// directions (the translational gauge) receive zero coefficients.
pub fn symmetric_pinv_solve(
    ata: &DMatrix<f64>,
    atb: &DVector<f64>,
    rel_cutoff: f64,
) -> Result<DVector<f64>> {
    let eig = nalgebra::linalg::SymmetricEigen::try_new(ata.clone(), 1e-13, 0)
        .ok_or(Error::EigSolverFailure)?;
    let max_ev = eig.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    if max_ev == 0.0 {
        return Ok(DVector::zeros(atb.len()));
    }
    let proj = eig.eigenvectors.transpose() * atb;
    let mut coeff = DVector::zeros(atb.len());
    for k in 0..atb.len() {
        let ev = eig.eigenvalues[k];
        if ev.abs() > rel_cutoff * max_ev {
            coeff[k] = proj[k] / ev;
        }
    }
    Ok(&eig.eigenvectors * coeff)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_solve_singular_system_min_norm() {
        // x1 - x2 = 1 has a one-dimensional null space; the min-norm answer
        // is (0.5, -0.5)
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let b = DVector::from_vec(vec![1.0]);
        let x = symmetric_pinv_solve(&(a.transpose() * &a), &(a.transpose() * b), 1e-12).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn pinv_solve_full_rank_matches_direct() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 2.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let ata = a.transpose() * &a;
        let atb = a.transpose() * b;
        let x = symmetric_pinv_solve(&ata, &atb, 1e-12).unwrap();
        let direct = ata.clone().lu().solve(&atb).unwrap();
        assert!((x - direct).norm() < 1e-10);
    }
}
