//! Matrix exponentials: the closed-form rank-2 Rodrigues formula for the
//! SE embedding and a general Padé(13) scaling-and-squaring fallback.

use crate::error::Result;
use crate::group::{skew_embed, Rotation, TangentP};
use nalgebra::DMatrix;

/// Padé(13,13) numerator coefficients (Higham 2005, eq. 10.33).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Scaling threshold for the order-13 approximant (Higham, Table 10.2).
const THETA13: f64 = 5.371920351148152;

/// Principal matrix exponential by scaling-and-squaring with the diagonal
/// Padé(13) approximant.
pub fn mat_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(a.is_square(), "mat_exp requires a square matrix");
    let n = a.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }

    // 1-norm (max column sum) drives the scaling.
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let s = if norm1 > THETA13 {
        (norm1 / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let a = a / 2f64.powi(s as i32);

    let eye = DMatrix::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let w1 = &a6 * PADE13[13] + &a4 * PADE13[11] + &a2 * PADE13[9];
    let w2 = &w1 * &a6 + &a6 * PADE13[7] + &a4 * PADE13[5] + &a2 * PADE13[3] + &eye * PADE13[1];
    let u = &a * w2;
    let v1 = &a6 * PADE13[12] + &a4 * PADE13[10] + &a2 * PADE13[8];
    let v = &v1 * &a6 + &a6 * PADE13[6] + &a4 * PADE13[4] + &a2 * PADE13[2] + &eye * PADE13[0];

    let num = &v + &u;
    let den = &v - &u;
    let mut r = den
        .lu()
        .solve(&num)
        .expect("Pade denominator is singular; input matrix is pathological");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Closed-form exponential of the rank-2 skew embedding of an SE tangent:
/// `I + sin(theta) P + (1 - cos(theta)) P^2` with `theta = ||b||`.
pub fn rodrigues_exp(t: &TangentP) -> Result<Rotation> {
    let b = match t {
        TangentP::Se(b) => b,
        TangentP::Mmg(_) => {
            return Err(crate::error::Error::DimensionMismatch(
                "rodrigues_exp applies to the SE tangent only".into(),
            ))
        }
    };
    let n = b.len() + 1;
    let theta = b.norm();
    if theta == 0.0 {
        return Ok(Rotation::identity(n, true));
    }
    let p = skew_embed(&TangentP::Se(b / theta));
    let p2 = &p * &p;
    let m = DMatrix::identity(n, n) + p * theta.sin() + p2 * (1.0 - theta.cos());
    Rotation::new(m, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::seeded_rng;
    use nalgebra::DVector;
    use rand::Rng;

    /// 20-term truncated power series of exp; independent oracle for small norms.
    fn series_exp(a: &DMatrix<f64>, terms: usize) -> DMatrix<f64> {
        let n = a.nrows();
        let mut acc = DMatrix::identity(n, n);
        let mut term = DMatrix::identity(n, n);
        for k in 1..=terms {
            term = &term * a / k as f64;
            acc += &term;
        }
        acc
    }

    #[test]
    fn mat_exp_zero_is_identity() {
        let e = mat_exp(&DMatrix::zeros(3, 3));
        assert_eq!(e, DMatrix::identity(3, 3));
    }

    #[test]
    fn mat_exp_diagonal() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        let e = mat_exp(&a);
        assert!((e[(0, 0)] - 1f64.exp()).abs() < 1e-14);
        assert!((e[(1, 1)] - 2f64.exp()).abs() < 1e-13);
        assert!(e[(0, 1)].abs() < 1e-15 && e[(1, 0)].abs() < 1e-15);
    }

    #[test]
    fn mat_exp_large_norm_uses_scaling() {
        // norm above theta_13 exercises the squaring phase
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![8.0, -8.0, 3.0]));
        let e = mat_exp(&a);
        assert!((e[(0, 0)] - 8f64.exp()).abs() / 8f64.exp() < 1e-13);
        assert!((e[(1, 1)] - (-8f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn rodrigues_zero_is_identity() {
        let r = rodrigues_exp(&TangentP::Se(DVector::zeros(3))).unwrap();
        assert_eq!(r.matrix(), &DMatrix::identity(4, 4));
    }

    #[test]
    fn rodrigues_planar_quarter_turn() {
        // d = 1, b = pi/2 rotates the east pole to the north pole
        let b = DVector::from_vec(vec![std::f64::consts::FRAC_PI_2]);
        let r = rodrigues_exp(&TangentP::Se(b.clone())).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!((r.matrix() - expected).norm() < 1e-15);
        let oracle = series_exp(&skew_embed(&TangentP::Se(b)), 20);
        assert!((r.matrix() - oracle).norm() < 1e-12);
    }

    #[test]
    fn rodrigues_matches_series_oracle_unit_norm() {
        let mut rng = seeded_rng(21);
        for _ in 0..50 {
            let mut b = DVector::from_fn(3, |_, _| rng.random::<f64>() - 0.5);
            b /= b.norm();
            let r = rodrigues_exp(&TangentP::Se(b.clone())).unwrap();
            let oracle = series_exp(&skew_embed(&TangentP::Se(b)), 20);
            assert!((r.matrix() - oracle).norm() < 1e-12);
        }
    }

    #[test]
    fn rodrigues_agrees_with_mat_exp_up_to_pi() {
        // exponential consistency across the whole injectivity range
        let mut rng = seeded_rng(22);
        for _ in 0..1000 {
            let mut b = DVector::from_fn(3, |_, _| rng.random::<f64>() - 0.5);
            let theta = rng.random::<f64>() * (std::f64::consts::PI - 1e-6);
            b *= theta / b.norm();
            let r = rodrigues_exp(&TangentP::Se(b.clone())).unwrap();
            let e = mat_exp(&skew_embed(&TangentP::Se(b)));
            assert!((r.matrix() - e).norm() < 1e-11);
        }
    }

    #[test]
    fn mat_exp_equals_rodrigues_on_rank2_skew() {
        let b = DVector::from_vec(vec![1.0, 0.5, 0.2]);
        let r = rodrigues_exp(&TangentP::Se(b.clone())).unwrap();
        let e = mat_exp(&skew_embed(&TangentP::Se(b)));
        assert!((r.matrix() - e).norm() < 1e-12);
    }
}
