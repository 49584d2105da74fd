//! Principal matrix logarithms: a Schur-based logarithm for orthogonal
//! matrices and an inverse scaling-and-squaring logarithm for the
//! homogeneous SE representation.

use crate::error::{Error, Result};
use crate::group::{RigidMotion, Rotation};
use nalgebra::DMatrix;

/// Rotation angles closer to pi than this raise `AngleAtPi`.
const PI_MARGIN: f64 = 1e-8;

/// Principal logarithm of an orthogonal matrix via its real Schur form.
///
/// The Schur form of an orthogonal matrix is block diagonal with 2x2
/// rotation blocks and 1x1 blocks equal to +-1; the log rotates each
/// block angle back into the algebra. Fails with `AngleAtPi` when any
/// block angle is within 1e-8 of pi (eigenvalue -1: the cut locus).
pub fn orth_log(r: &Rotation) -> Result<DMatrix<f64>> {
    let n = r.dim();
    let schur = nalgebra::linalg::Schur::try_new(r.matrix().clone(), 1e-14, 0)
        .ok_or(Error::EigSolverFailure)?;
    let (q, t) = schur.unpack();

    let mut log_t = DMatrix::zeros(n, n);
    let mut i = 0;
    while i < n {
        let is_pair = i + 1 < n && t[(i + 1, i)].abs() > 1e-12;
        if is_pair {
            // 2x2 rotation block [c s; -s c] up to roundoff
            let theta = t[(i + 1, i)].atan2(t[(i, i)]);
            if theta.abs() > std::f64::consts::PI - PI_MARGIN {
                return Err(Error::AngleAtPi);
            }
            log_t[(i, i + 1)] = -theta;
            log_t[(i + 1, i)] = theta;
            i += 2;
        } else {
            if (t[(i, i)] + 1.0).abs() <= PI_MARGIN {
                return Err(Error::AngleAtPi);
            }
            // eigenvalue +1: log contribution is zero
            i += 1;
        }
    }

    let s = &q * log_t * q.transpose();
    // exact skew-symmetry by construction
    Ok((&s - s.transpose()) * 0.5)
}

/// Principal logarithm of the homogeneous representation of a rigid motion,
/// by inverse scaling and squaring: repeated matrix square roots until the
/// iterate is close to I, then a truncated log series, then rescaling.
pub fn se_log(g: &RigidMotion) -> Result<DMatrix<f64>> {
    // reject rotation angles at pi before iterating
    orth_log(&g.mu)?;
    mat_log_iss(&g.homogeneous())
}

/// Inverse scaling-and-squaring log for matrices with no eigenvalues on the
/// closed negative real axis.
fn mat_log_iss(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::identity(n, n);
    let mut x = a.clone();
    let mut k = 0u32;
    while (&x - &eye).norm() > 0.1 {
        x = sqrtm_db(&x)?;
        k += 1;
        if k > 60 {
            return Err(Error::EigSolverFailure);
        }
    }
    let e = &x - &eye;
    // log(I + E) = E - E^2/2 + E^3/3 - ...; ||E|| <= 0.1 so 18 terms suffice
    let mut term = e.clone();
    let mut acc = e.clone();
    for m in 2..=18 {
        term = &term * &e;
        let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
        acc += &term * (sign / m as f64);
    }
    Ok(acc * 2f64.powi(k as i32))
}

/// Principal matrix square root by the Denman-Beavers iteration.
fn sqrtm_db(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::identity(n, n);
    for _ in 0..60 {
        let y_inv = y.clone().try_inverse().ok_or(Error::EigSolverFailure)?;
        let z_inv = z.clone().try_inverse().ok_or(Error::EigSolverFailure)?;
        let y_next = (&y + z_inv) * 0.5;
        let z_next = (&z + y_inv) * 0.5;
        let delta = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if delta < 1e-15 * y.norm().max(1.0) {
            return Ok(y);
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{mat_exp, skew_embed, TangentP};
    use crate::testutil::{rand_skew, seeded_rng};
    use nalgebra::DVector;
    use rand::Rng;

    #[test]
    fn orth_log_identity_is_zero() {
        let s = orth_log(&Rotation::identity(4, true)).unwrap();
        assert!(s.norm() < 1e-14);
    }

    #[test]
    fn orth_log_planar_rotation() {
        let theta: f64 = 0.7;
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()],
        );
        let s = orth_log(&Rotation::new(m, true).unwrap()).unwrap();
        assert!((s[(1, 0)].abs() - 0.7).abs() < 1e-12);
        assert!((s[(0, 1)] + s[(1, 0)]).abs() < 1e-14);
        assert!(s[(0, 0)].abs() < 1e-14);
    }

    #[test]
    fn orth_log_roundtrip_small_generator() {
        let mut rng = seeded_rng(31);
        for _ in 0..50 {
            let s = rand_skew(4, 0.2, &mut rng);
            let r = Rotation::new(mat_exp(&s), true).unwrap();
            let s_back = orth_log(&r).unwrap();
            assert!((s_back - s).norm() < 1e-10);
        }
    }

    #[test]
    fn orth_log_roundtrip_up_to_pi() {
        let mut rng = seeded_rng(32);
        for _ in 0..200 {
            let mut s = rand_skew(3, 1.0, &mut rng);
            let ang = s.complex_eigenvalues().iter().map(|c| c.im.abs()).fold(0.0, f64::max);
            if ang > std::f64::consts::PI - 0.1 {
                s *= (std::f64::consts::PI - 0.1) / ang;
            }
            let r = Rotation::new(mat_exp(&s), true).unwrap();
            let back = mat_exp(&orth_log(&r).unwrap());
            assert!((back - r.matrix()).norm() < 1e-9);
        }
    }

    #[test]
    fn orth_log_angle_at_pi_errors() {
        let m = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]);
        let r = Rotation::new(m, true).unwrap();
        assert!(matches!(orth_log(&r), Err(Error::AngleAtPi)));
    }

    #[test]
    fn se_log_identity_and_pure_translation() {
        let id = RigidMotion::identity(3);
        assert!(se_log(&id).unwrap().norm() < 1e-12);

        // nilpotent case: log equals the first series term exactly
        let b = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let g = RigidMotion::new(Rotation::identity(3, true), b.clone()).unwrap();
        let l = se_log(&g).unwrap();
        for i in 0..3 {
            assert!((l[(i, 3)] - b[i]).abs() < 1e-12);
            for j in 0..3 {
                assert!(l[(i, j)].abs() < 1e-12);
            }
        }
        assert!(l.row(3).iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn se_log_roundtrip_random_motion() {
        let mut rng = seeded_rng(33);
        for _ in 0..50 {
            let s = rand_skew(3, 0.5, &mut rng);
            let mu = Rotation::new(mat_exp(&s), true).unwrap();
            let b = DVector::from_fn(3, |_, _| 2.0 * rng.random::<f64>() - 1.0);
            let g = RigidMotion::new(mu, b).unwrap();
            let l = se_log(&g).unwrap();
            assert!((mat_exp(&l) - g.homogeneous()).norm() < 1e-9);
        }
    }

    #[test]
    fn se_log_agrees_with_algebra_embed_for_skew_generators() {
        // exp of an se(d) algebra element round-trips through se_log
        let mut rng = seeded_rng(34);
        let s = rand_skew(3, 0.4, &mut rng);
        let mut gen = DMatrix::zeros(4, 4);
        gen.view_mut((0, 0), (3, 3)).copy_from(&s);
        gen[(0, 3)] = 0.3;
        gen[(1, 3)] = -0.7;
        let h = mat_exp(&gen);
        let mu = Rotation::new(h.view((0, 0), (3, 3)).into_owned(), true).unwrap();
        let b = DVector::from_vec(vec![h[(0, 3)], h[(1, 3)], h[(2, 3)]]);
        let g = RigidMotion::new(mu, b).unwrap();
        assert!((se_log(&g).unwrap() - gen).norm() < 1e-10);
    }

    #[test]
    fn se_log_rejects_angle_pi() {
        let m = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]);
        let g = RigidMotion::new(
            Rotation::new(m, true).unwrap(),
            DVector::from_vec(vec![1.0, 0.0]),
        )
        .unwrap();
        assert!(matches!(se_log(&g), Err(Error::AngleAtPi)));
    }

    /// skew helper for tangent vectors with angle below pi
    #[test]
    fn exp_log_consistency_with_rank2_skew() {
        let b = DVector::from_vec(vec![0.4, 0.1, -0.3]);
        let s = skew_embed(&TangentP::Se(b));
        let r = Rotation::new(mat_exp(&s), true).unwrap();
        assert!((orth_log(&r).unwrap() - s).norm() < 1e-11);
    }
}
