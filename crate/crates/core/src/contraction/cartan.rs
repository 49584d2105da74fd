//! Group-level Cartan decompositions `Q = exp(p) k`.
//!
//! For SO(d+1) the decomposition is closed-form: the last column of Q pins
//! the angle and axis of the exp factor. For O(d+l) the factor is found by
//! minimizing the masked objective `||U1 exp(-p) Q U2||_F^2` over the
//! tangent space, with gradient descent and a backtracking line search.

use crate::error::{Error, Result};
use crate::group::{mat_exp, project_to_rotation, rodrigues_exp, skew_embed, Rotation, TangentP};
use nalgebra::{DMatrix, DVector};

/// The factors of `Q = exp(skew_embed(p)) k`, with `p` pre-scaling.
#[derive(Debug, Clone)]
pub struct CartanFactors {
    pub p: TangentP,
    /// The K part: a d x d rotation (SE case) or a (d+l) block-diagonal
    /// orthogonal matrix (MMG case).
    pub k: Rotation,
    pub opt: Option<OptDiagnostics>,
}

/// Convergence record of the optimization-based decomposition.
#[derive(Debug, Clone, Copy)]
pub struct OptDiagnostics {
    pub iterations: usize,
    /// First iteration at which the objective dropped below 1e-16.
    pub iterations_to_tol: usize,
    pub objective: f64,
}

/// Closed-form Cartan decomposition of a special orthogonal matrix of order
/// d+1: `theta = arccos(Q[d,d])`, `b = (theta/sin theta) Q[0..d, d]`.
pub fn cartan_decompose_so(q: &Rotation) -> Result<CartanFactors> {
    let n = q.dim();
    if n < 2 {
        return Err(Error::DimensionMismatch(
            "decomposition needs order >= 2".into(),
        ));
    }
    let d = n - 1;
    let m = q.matrix();
    let corner = m[(d, d)].clamp(-1.0, 1.0);
    if m[(d, d)] <= -1.0 + 1e-9 {
        return Err(Error::BoundaryOfInjectivity);
    }
    let theta = corner.acos();
    let b = if theta < 1e-12 {
        DVector::zeros(d)
    } else {
        let scale = theta / theta.sin();
        DVector::from_fn(d, |i, _| scale * m[(i, d)])
    };
    let p_exp = rodrigues_exp(&TangentP::Se(b.clone()))?;
    let k_full = p_exp.transpose().compose(q)?;
    let k = Rotation::new(k_full.matrix().view((0, 0), (d, d)).into_owned(), true)?;
    Ok(CartanFactors {
        p: TangentP::Se(b),
        k,
        opt: None,
    })
}

/// Objective of the masked decomposition: squared Frobenius norm of the
/// block of `exp(-S) Q` that must vanish for the product to lie in K.
/// The masks select the off-diagonal l x d block (rows d.., columns ..d).
fn masked_objective(s: &DMatrix<f64>, q: &DMatrix<f64>, d: usize, l: usize) -> f64 {
    let e = mat_exp(&(-s)) * q;
    e.view((d, 0), (l, d)).norm_squared()
}

/// Gradient of the masked objective with respect to the d x l tangent matrix,
/// computed through the Frechet derivative of the exponential (evaluated by
/// exponentiating the doubled block matrix [S G; 0 S]).
fn masked_gradient(s: &DMatrix<f64>, q: &DMatrix<f64>, d: usize, l: usize) -> DMatrix<f64> {
    let n = d + l;
    let e = mat_exp(&(-s)) * q;
    let a = e.view((d, 0), (l, d)).into_owned();
    // G = U1^T A (Q U2)^T with U1 selecting rows d.., U2 selecting columns ..d
    let mut u1t_a = DMatrix::zeros(n, d);
    u1t_a.view_mut((d, 0), (l, d)).copy_from(&a);
    let q_cols = q.view((0, 0), (n, d)).into_owned();
    let g = u1t_a * q_cols.transpose();

    // W = Dexp(S)[G] via the doubled matrix
    let mut doubled = DMatrix::zeros(2 * n, 2 * n);
    doubled.view_mut((0, 0), (n, n)).copy_from(s);
    doubled.view_mut((n, n), (n, n)).copy_from(s);
    doubled.view_mut((0, n), (n, n)).copy_from(&g);
    let w = mat_exp(&doubled).view((0, n), (n, n)).into_owned();

    let w_tr = w.view((0, d), (d, l)).into_owned();
    let w_bl = w.view((d, 0), (l, d)).into_owned();
    -2.0 * (w_tr - w_bl.transpose())
}

/// Optimization-based Cartan decomposition for O(d+l): minimizes the masked
/// objective from `p = 0` by gradient descent with backtracking, stopping
/// once the objective is at the numerical floor or after 200 iterations.
pub fn cartan_decompose_opt(q: &Rotation, d: usize, l: usize) -> Result<CartanFactors> {
    if q.dim() != d + l {
        return Err(Error::DimensionMismatch(format!(
            "order {} does not match d + l = {}",
            q.dim(),
            d + l
        )));
    }
    let qm = q.matrix();
    let mut b = DMatrix::<f64>::zeros(d, l);
    let mut s = DMatrix::<f64>::zeros(d + l, d + l);
    let mut f = masked_objective(&s, qm, d, l);
    let mut iterations = 0;
    let mut iterations_to_tol = 0;
    const MAX_ITER: usize = 200;
    const FLOOR: f64 = 1e-22;
    const TOL: f64 = 1e-16;

    while f > FLOOR && iterations < MAX_ITER {
        let grad = masked_gradient(&s, qm, d, l);
        let gnorm2 = grad.norm_squared();
        if gnorm2 < 1e-30 {
            break;
        }
        // Armijo backtracking from t = 0.5 (the objective is near-quadratic
        // with Hessian ~ 2I close to the optimum)
        let mut t = 0.5;
        let mut accepted = false;
        for _ in 0..40 {
            let b_try = &b - t * &grad;
            let s_try = skew_embed(&TangentP::Mmg(b_try.clone()));
            let f_try = masked_objective(&s_try, qm, d, l);
            if f_try <= f - 1e-4 * t * gnorm2 {
                b = b_try;
                s = s_try;
                f = f_try;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        if accepted {
            if f > TOL {
                iterations_to_tol = iterations + 1;
            }
        } else {
            break;
        }
    }

    if f > 1e-10 {
        return Err(Error::NoConvergence { objective: f });
    }

    let e = mat_exp(&(-&s)) * qm;
    let mu = project_to_rotation(&e.view((0, 0), (d, d)).into_owned(), false)?;
    let eta = project_to_rotation(&e.view((d, d), (l, l)).into_owned(), false)?;
    let mut k = DMatrix::zeros(d + l, d + l);
    k.view_mut((0, 0), (d, d)).copy_from(mu.matrix());
    k.view_mut((d, d), (l, l)).copy_from(eta.matrix());
    Ok(CartanFactors {
        p: TangentP::Mmg(b),
        k: Rotation::new(k, false)?,
        opt: Some(OptDiagnostics {
            iterations,
            iterations_to_tol,
            objective: f,
        }),
    })
}
