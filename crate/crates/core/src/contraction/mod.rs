//! Compactification maps between Cartan motion groups and their compact
//! associates: the contraction `psi` (group-level, via the exponential) and
//! the polar-decomposition projection `phi` (matrix-level, SE only), with
//! exact inverses through Cartan decompositions.

mod cartan;

pub use cartan::{cartan_decompose_opt, cartan_decompose_so, CartanFactors, OptDiagnostics};

use crate::error::{Error, Result};
use crate::group::{
    mat_exp, rodrigues_exp, skew_embed, Element, MmgElement, RigidMotion, Rotation, TangentP,
};
use nalgebra::DMatrix;

/// Convergence radius constant of the Zassenhaus product: the multiplicative
/// defect bound needs `||v1|| + ||v2|| <= 0.59 * lambda`.
pub const ZASSENHAUS_RADIUS: f64 = 0.59;

/// Which compactification map to probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Psi,
    Phi,
}

/// Tag for the source group of a compact image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Se { d: usize },
    Mmg { d: usize, l: usize },
}

/// The image of a motion-group element in the compact group, together with
/// the contraction parameter that produced it.
#[derive(Debug, Clone)]
pub struct CompactImage {
    pub q: Rotation,
    pub lambda: f64,
    pub source_kind: SourceKind,
}

impl CompactImage {
    pub fn new(q: Rotation, lambda: f64, source_kind: SourceKind) -> Result<Self> {
        if lambda < 1.0 {
            return Err(Error::LambdaTooSmall(format!(
                "lambda = {lambda} but the contraction family is restricted to [1, inf)"
            )));
        }
        let want = match source_kind {
            SourceKind::Se { d } => d + 1,
            SourceKind::Mmg { d, l } => d + l,
        };
        if q.dim() != want {
            return Err(Error::DimensionMismatch(format!(
                "compact image order {} does not match source kind (expected {})",
                q.dim(),
                want
            )));
        }
        Ok(CompactImage {
            q,
            lambda,
            source_kind,
        })
    }
}

/// Embeds a rotation of K into the compact group: blockdiag(mu, 1) for SE,
/// blockdiag(mu, eta) for MMG.
pub fn embed_se_rotation(mu: &Rotation) -> Rotation {
    let d = mu.dim();
    let mut m = DMatrix::identity(d + 1, d + 1);
    m.view_mut((0, 0), (d, d)).copy_from(mu.matrix());
    Rotation::new(m, true).expect("block embedding preserves orthogonality")
}

pub fn embed_mmg_rotation(mu: &Rotation, eta: &Rotation) -> Rotation {
    let (d, l) = (mu.dim(), eta.dim());
    let mut m = DMatrix::zeros(d + l, d + l);
    m.view_mut((0, 0), (d, d)).copy_from(mu.matrix());
    m.view_mut((d, d), (l, l)).copy_from(eta.matrix());
    Rotation::new(m, false).expect("block embedding preserves orthogonality")
}

/// The contraction map `exp(v/lambda) k` into the compact group.
pub fn psi(g: &Element, lambda: f64) -> Result<CompactImage> {
    if lambda < 1.0 {
        return Err(Error::LambdaTooSmall(format!(
            "lambda = {lambda} but the contraction family is restricted to [1, inf)"
        )));
    }
    match g {
        Element::Se(g) => {
            let p = rodrigues_exp(&TangentP::Se(&g.b / lambda))?;
            let q = p.compose(&embed_se_rotation(&g.mu))?;
            CompactImage::new(q, lambda, SourceKind::Se { d: g.dim() })
        }
        Element::Mmg(g) => {
            let s = skew_embed(&TangentP::Mmg(&g.b_mat / lambda));
            let p = Rotation::new(mat_exp(&s), false)?;
            let q = p.compose(&embed_mmg_rotation(&g.mu, &g.eta))?;
            let (d, l) = g.dims();
            CompactImage::new(q, lambda, SourceKind::Mmg { d, l })
        }
        Element::Rot(_) => Err(Error::DimensionMismatch(
            "psi applies to motion-group elements only".into(),
        )),
    }
}

/// Inverse contraction: Cartan-decompose the compact element and rescale the
/// tangent part by lambda.
pub fn psi_inverse(c: &CompactImage) -> Result<Element> {
    match c.source_kind {
        SourceKind::Se { .. } => {
            let factors = cartan_decompose_so(&c.q)?;
            let b = match factors.p {
                TangentP::Se(b) => b,
                TangentP::Mmg(_) => unreachable!("SO decomposition yields an SE tangent"),
            };
            Ok(Element::Se(RigidMotion::new(factors.k, b * c.lambda)?))
        }
        SourceKind::Mmg { d, l } => {
            let factors = cartan_decompose_opt(&c.q, d, l)?;
            let b = match factors.p {
                TangentP::Mmg(b) => b,
                TangentP::Se(_) => unreachable!("MMG decomposition yields a matrix tangent"),
            };
            let mu = Rotation::new(factors.k.matrix().view((0, 0), (d, d)).into_owned(), false)?;
            let eta = Rotation::new(factors.k.matrix().view((d, d), (l, l)).into_owned(), false)?;
            Ok(Element::Mmg(MmgElement::new(mu, eta, b * c.lambda)?))
        }
    }
}

/// The polar-decomposition projection of an SE element: the closed-form
/// orthogonal factor of `[mu b/lambda; 0 1]`.
pub fn phi(g: &RigidMotion, lambda: f64) -> Result<CompactImage> {
    if lambda < 1.0 {
        return Err(Error::LambdaTooSmall(format!(
            "lambda = {lambda} but the projection family is restricted to [1, inf)"
        )));
    }
    let d = g.dim();
    let nb = g.b.norm();
    let q = if nb == 0.0 {
        embed_se_rotation(&g.mu)
    } else {
        let tau = 1.0 / (4.0 + nb * nb / (lambda * lambda)).sqrt();
        let bhat = &g.b / nb;
        let mut m = DMatrix::zeros(d + 1, d + 1);
        let top_left =
            (DMatrix::identity(d, d) + (2.0 * tau - 1.0) * (&bhat * bhat.transpose()))
                * g.mu.matrix();
        m.view_mut((0, 0), (d, d)).copy_from(&top_left);
        let bt_mu = (g.b.transpose() * g.mu.matrix()).transpose();
        for i in 0..d {
            m[(i, d)] = tau / lambda * g.b[i];
            m[(d, i)] = -tau / lambda * bt_mu[i];
        }
        m[(d, d)] = 2.0 * tau;
        Rotation::new(m, true)?
    };
    CompactImage::new(q, lambda, SourceKind::Se { d })
}

/// Inverts the polar projection by reading tau off the corner entry and
/// undoing the rank-one stretch with a Sherman-Morrison step.
pub fn phi_inverse(c: &CompactImage) -> Result<RigidMotion> {
    let d = match c.source_kind {
        SourceKind::Se { d } => d,
        SourceKind::Mmg { .. } => {
            return Err(Error::DimensionMismatch(
                "phi_inverse applies to SE images only".into(),
            ))
        }
    };
    let q = c.q.matrix();
    let corner = q[(d, d)];
    if corner <= 0.0 || corner > 1.0 + 1e-12 {
        return Err(Error::NotInImage);
    }
    let tau = corner / 2.0;
    let lambda = c.lambda;
    let mut b = nalgebra::DVector::zeros(d);
    for i in 0..d {
        b[i] = lambda / tau * q[(i, d)];
    }
    let top = q.view((0, 0), (d, d)).into_owned();
    let mu_raw = if b.norm() == 0.0 {
        top
    } else {
        let bhat = &b / b.norm();
        let cc = 2.0 * tau - 1.0;
        // (I + c bb^T)^{-1} = I - c/(1+c) bb^T, with 1 + c = 2 tau > 0
        let inv = DMatrix::identity(d, d) - (cc / (1.0 + cc)) * (&bhat * bhat.transpose());
        inv * top
    };
    let mu = crate::group::project_to_rotation(&mu_raw, true).map_err(|_| Error::NotInImage)?;
    let g = RigidMotion::new(mu, b)?;
    // structural consistency: the input must reproduce under phi
    let back = phi(&g, lambda)?;
    if (back.q.matrix() - q).norm() > 1e-6 {
        return Err(Error::NotInImage);
    }
    Ok(g)
}

/// Frobenius multiplicativity defect of the selected map on a pair:
/// `||Map(g1 g2) - Map(g1) Map(g2)||_F`.
pub fn homomorphism_residual(
    g1: &Element,
    g2: &Element,
    lambda: f64,
    map_kind: MapKind,
) -> Result<f64> {
    match map_kind {
        MapKind::Psi => {
            let (v1, v2) = (g1.v_part_norm(), g2.v_part_norm());
            if v1 + v2 > ZASSENHAUS_RADIUS * lambda {
                return Err(Error::RadiusViolated);
            }
            let q12 = psi(&g1.compose(g2)?, lambda)?;
            let q1 = psi(g1, lambda)?;
            let q2 = psi(g2, lambda)?;
            Ok((q12.q.matrix() - q1.q.matrix() * q2.q.matrix()).norm())
        }
        MapKind::Phi => {
            let (a, b) = match (g1, g2) {
                (Element::Se(a), Element::Se(b)) => (a, b),
                _ => {
                    return Err(Error::DimensionMismatch(
                        "phi residual applies to SE pairs only".into(),
                    ))
                }
            };
            let q12 = phi(&a.compose(b)?, lambda)?;
            let q1 = phi(a, lambda)?;
            let q2 = phi(b, lambda)?;
            Ok((q12.q.matrix() - q1.q.matrix() * q2.q.matrix()).norm())
        }
    }
}
