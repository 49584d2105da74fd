//! Nearest-orthogonal projection via the SVD.

use crate::error::{Error, Result};
use crate::group::Rotation;
use nalgebra::DMatrix;

/// Nearest orthogonal (or special-orthogonal) matrix in the Frobenius norm.
///
/// Plain polar factor `U V^T` of the SVD; when `special`, a negative
/// determinant is repaired by flipping the sign of the singular vector of
/// the smallest singular value, which is the Frobenius-optimal fix.
pub fn project_to_rotation(a: &DMatrix<f64>, special: bool) -> Result<Rotation> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "projection input must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().ok_or(Error::EigSolverFailure)?;
    let v_t = svd.v_t.as_ref().ok_or(Error::EigSolverFailure)?;
    let sv = &svd.singular_values;
    let (mut smax, mut smin, mut imin) = (0.0_f64, f64::INFINITY, 0usize);
    for (i, s) in sv.iter().enumerate() {
        if *s > smax {
            smax = *s;
        }
        if *s < smin {
            smin = *s;
            imin = i;
        }
    }
    if smax == 0.0 || smin <= 1e-12 * smax {
        return Err(Error::RankDeficient {
            ratio: if smax == 0.0 { 0.0 } else { smin / smax },
        });
    }
    let mut r = u * v_t;
    if special && r.determinant() < 0.0 {
        let mut u_fix = u.clone();
        for i in 0..u_fix.nrows() {
            u_fix[(i, imin)] = -u_fix[(i, imin)];
        }
        r = u_fix * v_t;
    }
    Rotation::new(r, special)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{rand_rotation, seeded_rng};
    use rand::Rng;

    #[test]
    fn projection_fixes_feasible_point() {
        let mut rng = seeded_rng(41);
        let r = rand_rotation(4, true, &mut rng);
        let p = project_to_rotation(r.matrix(), true).unwrap();
        assert!((p.matrix() - r.matrix()).norm() < 1e-13);
    }

    #[test]
    fn polar_factor_of_spd_is_identity() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 1.0]));
        let p = project_to_rotation(&a, true).unwrap();
        assert!((p.matrix() - DMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn projection_tracks_small_perturbations() {
        let mut rng = seeded_rng(42);
        for _ in 0..20 {
            let r = rand_rotation(3, true, &mut rng);
            let eps = 1e-4;
            let noise = DMatrix::from_fn(3, 3, |_, _| eps * (rng.random::<f64>() - 0.5));
            let p = project_to_rotation(&(r.matrix() + noise), true).unwrap();
            assert!((p.matrix() - r.matrix()).norm() < 10.0 * eps);
        }
    }

    #[test]
    fn projection_is_frobenius_optimal() {
        let mut rng = seeded_rng(43);
        for _ in 0..100 {
            let a = DMatrix::from_fn(3, 3, |_, _| 2.0 * rng.random::<f64>() - 1.0);
            let p = match project_to_rotation(&a, true) {
                Ok(p) => p,
                Err(Error::RankDeficient { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            let dist = (&a - p.matrix()).norm();
            for _ in 0..50 {
                let r = rand_rotation(3, true, &mut rng);
                assert!(dist <= (&a - r.matrix()).norm() + 1e-12);
            }
        }
    }

    #[test]
    fn det_fix_lands_in_so() {
        let mut rng = seeded_rng(44);
        for _ in 0..50 {
            let mut a = DMatrix::from_fn(3, 3, |_, _| rng.random::<f64>());
            if a.determinant() > 0.0 {
                let col = a.column(0).clone_owned();
                a.set_column(0, &(-col));
            }
            let p = project_to_rotation(&a, true).unwrap();
            assert!(p.matrix().determinant() > 0.0);
            // still optimal among SO(3) samples
            let dist = (&a - p.matrix()).norm();
            for _ in 0..20 {
                let r = rand_rotation(3, true, &mut rng);
                assert!(dist <= (&a - r.matrix()).norm() + 1e-12);
            }
        }
    }

    #[test]
    fn rank_deficient_input_errors() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            project_to_rotation(&a, false),
            Err(Error::RankDeficient { .. })
        ));
    }
}
