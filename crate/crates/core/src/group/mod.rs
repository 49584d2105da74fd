//! Matrix-group primitives: rotations, rigid motions, matrix-motion-group
//! elements, and the tangent pieces of their Cartan decompositions.
//!
//! All types are immutable values; every operation is pure.

mod expm;
mod logm;
mod project;

pub use expm::{mat_exp, rodrigues_exp};
pub use logm::{orth_log, se_log};
pub use project::project_to_rotation;

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Construction tolerance for orthogonality, `||R^T R - I||_F`.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// A d x d orthogonal matrix, optionally constrained to determinant +1.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    m: DMatrix<f64>,
    special: bool,
}

impl Rotation {
    /// Validates orthogonality (and the determinant sign when `special`).
    pub fn new(m: DMatrix<f64>, special: bool) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "rotation must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let d = m.nrows();
        let defect = (m.transpose() * &m - DMatrix::identity(d, d)).norm();
        if defect > ORTHOGONALITY_TOL {
            return Err(Error::NotOrthogonal { defect });
        }
        if special {
            let det = m.determinant();
            if det <= 0.0 {
                return Err(Error::NegativeDeterminant { det });
            }
        }
        Ok(Rotation { m, special })
    }

    pub fn identity(d: usize, special: bool) -> Self {
        Rotation {
            m: DMatrix::identity(d, d),
            special,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn is_special(&self) -> bool {
        self.special
    }

    /// The inverse rotation (transpose).
    pub fn transpose(&self) -> Rotation {
        Rotation {
            m: self.m.transpose(),
            special: self.special,
        }
    }

    /// Product of two rotations of the same order.
    pub fn compose(&self, other: &Rotation) -> Result<Rotation> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "rotation orders {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Rotation::new(&self.m * &other.m, self.special && other.special)
    }
}

/// An SE(d) element (mu, b): rotation plus translation.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidMotion {
    pub mu: Rotation,
    pub b: DVector<f64>,
}

impl RigidMotion {
    pub fn new(mu: Rotation, b: DVector<f64>) -> Result<Self> {
        if !mu.is_special() {
            return Err(Error::NegativeDeterminant {
                det: mu.matrix().determinant(),
            });
        }
        if mu.dim() != b.len() {
            return Err(Error::DimensionMismatch(format!(
                "rotation order {} vs translation length {}",
                mu.dim(),
                b.len()
            )));
        }
        Ok(RigidMotion { mu, b })
    }

    pub fn identity(d: usize) -> Self {
        RigidMotion {
            mu: Rotation::identity(d, true),
            b: DVector::zeros(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// Homogeneous (d+1) x (d+1) representation [mu b; 0 1].
    pub fn homogeneous(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut h = DMatrix::identity(d + 1, d + 1);
        h.view_mut((0, 0), (d, d)).copy_from(self.mu.matrix());
        for i in 0..d {
            h[(i, d)] = self.b[i];
        }
        h
    }

    /// Group law (mu1 mu2, b1 + mu1 b2).
    pub fn compose(&self, other: &RigidMotion) -> Result<RigidMotion> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "SE dims {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        RigidMotion::new(
            self.mu.compose(&other.mu)?,
            &self.b + self.mu.matrix() * &other.b,
        )
    }

    /// Group inverse (mu^T, -mu^T b).
    pub fn inverse(&self) -> RigidMotion {
        let mt = self.mu.transpose();
        let b = -(mt.matrix() * &self.b);
        RigidMotion { mu: mt, b }
    }
}

/// A matrix-motion-group element (mu, eta, B) in (O(d) x O(l)) acting on d x l matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MmgElement {
    pub mu: Rotation,
    pub eta: Rotation,
    pub b_mat: DMatrix<f64>,
}

impl MmgElement {
    pub fn new(mu: Rotation, eta: Rotation, b_mat: DMatrix<f64>) -> Result<Self> {
        if b_mat.nrows() != mu.dim() || b_mat.ncols() != eta.dim() {
            return Err(Error::DimensionMismatch(format!(
                "B is {}x{} but (mu, eta) have orders ({}, {})",
                b_mat.nrows(),
                b_mat.ncols(),
                mu.dim(),
                eta.dim()
            )));
        }
        Ok(MmgElement { mu, eta, b_mat })
    }

    pub fn identity(d: usize, l: usize) -> Self {
        MmgElement {
            mu: Rotation::identity(d, false),
            eta: Rotation::identity(l, false),
            b_mat: DMatrix::zeros(d, l),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.mu.dim(), self.eta.dim())
    }

    /// Group law (mu1 mu2, eta1 eta2, mu1 B2 eta1^T + B1).
    pub fn compose(&self, other: &MmgElement) -> Result<MmgElement> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch(format!(
                "MMG dims {:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        let b = self.mu.matrix() * &other.b_mat * self.eta.matrix().transpose() + &self.b_mat;
        MmgElement::new(self.mu.compose(&other.mu)?, self.eta.compose(&other.eta)?, b)
    }

    /// Group inverse (mu^T, eta^T, -mu^T B eta).
    pub fn inverse(&self) -> MmgElement {
        let b = -(self.mu.matrix().transpose() * &self.b_mat * self.eta.matrix());
        MmgElement {
            mu: self.mu.transpose(),
            eta: self.eta.transpose(),
            b_mat: b,
        }
    }
}

/// The p-part of a Cartan decomposition: a translation vector (SE case)
/// or a d x l matrix (MMG case), prior to any lambda scaling.
#[derive(Debug, Clone, PartialEq)]
pub enum TangentP {
    Se(DVector<f64>),
    Mmg(DMatrix<f64>),
}

impl TangentP {
    /// Euclidean norm of the underlying vector or matrix.
    pub fn norm(&self) -> f64 {
        match self {
            TangentP::Se(b) => b.norm(),
            TangentP::Mmg(b) => b.norm(),
        }
    }

    /// Order of the skew embedding (d+1 or d+l).
    pub fn embed_dim(&self) -> usize {
        match self {
            TangentP::Se(b) => b.len() + 1,
            TangentP::Mmg(b) => b.nrows() + b.ncols(),
        }
    }

    pub fn scale(&self, s: f64) -> TangentP {
        match self {
            TangentP::Se(b) => TangentP::Se(b * s),
            TangentP::Mmg(b) => TangentP::Mmg(b * s),
        }
    }
}

/// Skew embedding of a tangent element: [0 b; -b^T 0] or [0 B; -B^T 0].
pub fn skew_embed(t: &TangentP) -> DMatrix<f64> {
    match t {
        TangentP::Se(b) => {
            let d = b.len();
            let mut s = DMatrix::zeros(d + 1, d + 1);
            for i in 0..d {
                s[(i, d)] = b[i];
                s[(d, i)] = -b[i];
            }
            s
        }
        TangentP::Mmg(b) => {
            let (d, l) = (b.nrows(), b.ncols());
            let mut s = DMatrix::zeros(d + l, d + l);
            for i in 0..d {
                for j in 0..l {
                    s[(i, d + j)] = b[(i, j)];
                    s[(d + j, i)] = -b[(i, j)];
                }
            }
            s
        }
    }
}

/// A group element of any of the supported groups; what measurement graphs carry.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Se(RigidMotion),
    Mmg(MmgElement),
    Rot(Rotation),
}

impl Element {
    pub fn compose(&self, other: &Element) -> Result<Element> {
        match (self, other) {
            (Element::Se(a), Element::Se(b)) => Ok(Element::Se(a.compose(b)?)),
            (Element::Mmg(a), Element::Mmg(b)) => Ok(Element::Mmg(a.compose(b)?)),
            (Element::Rot(a), Element::Rot(b)) => Ok(Element::Rot(a.compose(b)?)),
            _ => Err(Error::DimensionMismatch(
                "cannot compose elements of different groups".into(),
            )),
        }
    }

    pub fn inverse(&self) -> Element {
        match self {
            Element::Se(g) => Element::Se(g.inverse()),
            Element::Mmg(g) => Element::Mmg(g.inverse()),
            Element::Rot(r) => Element::Rot(r.transpose()),
        }
    }

    /// Norm of the translational (p) part; zero for pure rotations.
    pub fn v_part_norm(&self) -> f64 {
        match self {
            Element::Se(g) => g.b.norm(),
            Element::Mmg(g) => g.b_mat.norm(),
            Element::Rot(_) => 0.0,
        }
    }
}

/// Hybrid metric: compact parts under the Frobenius norm of their orthogonal
/// representation, linear parts under the Euclidean norm.
pub fn hybrid_distance(g1: &Element, g2: &Element) -> Result<f64> {
    Ok(hybrid_distance_sq(g1, g2)?.sqrt())
}

/// Squared hybrid metric; the summand of the synchronization cost.
pub fn hybrid_distance_sq(g1: &Element, g2: &Element) -> Result<f64> {
    match (g1, g2) {
        (Element::Se(a), Element::Se(b)) => {
            if a.dim() != b.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "SE dims {} vs {}",
                    a.dim(),
                    b.dim()
                )));
            }
            Ok((a.mu.matrix() - b.mu.matrix()).norm_squared() + (&a.b - &b.b).norm_squared())
        }
        (Element::Mmg(a), Element::Mmg(b)) => {
            if a.dims() != b.dims() {
                return Err(Error::DimensionMismatch(format!(
                    "MMG dims {:?} vs {:?}",
                    a.dims(),
                    b.dims()
                )));
            }
            Ok((a.mu.matrix() - b.mu.matrix()).norm_squared()
                + (a.eta.matrix() - b.eta.matrix()).norm_squared()
                + (&a.b_mat - &b.b_mat).norm_squared())
        }
        (Element::Rot(a), Element::Rot(b)) => {
            if a.dim() != b.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "rotation orders {} vs {}",
                    a.dim(),
                    b.dim()
                )));
            }
            Ok((a.matrix() - b.matrix()).norm_squared())
        }
        _ => Err(Error::DimensionMismatch(
            "hybrid distance requires elements of the same group".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{rand_mmg, rand_rigid_motion, rand_rotation, seeded_rng};
    use rand::Rng;

    #[test]
    fn skew_embed_zero_vector() {
        let s = skew_embed(&TangentP::Se(DVector::zeros(3)));
        assert_eq!(s, DMatrix::zeros(4, 4));
    }

    #[test]
    fn skew_embed_basis_vector() {
        let b = DVector::from_vec(vec![1.0, 0.0]);
        let s = skew_embed(&TangentP::Se(b));
        let expected =
            DMatrix::from_row_slice(3, 3, &[0., 0., 1., 0., 0., 0., -1., 0., 0.]);
        assert_eq!(s, expected);
    }

    #[test]
    fn skew_embed_mmg_block() {
        let b = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        let s = skew_embed(&TangentP::Mmg(b));
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[0., 1., 2., -1., 0., 0., -2., 0., 0.],
        );
        assert_eq!(s, expected);
        assert_eq!(s.transpose(), -s.clone());
    }

    #[test]
    fn rotation_rejects_non_orthogonal() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(
            Rotation::new(m, false),
            Err(Error::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn rotation_rejects_reflection_when_special() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(Rotation::new(m.clone(), false).is_ok());
        assert!(matches!(
            Rotation::new(m, true),
            Err(Error::NegativeDeterminant { .. })
        ));
    }

    #[test]
    fn se_compose_identity_and_translations() {
        let mut rng = seeded_rng(11);
        let g = rand_rigid_motion(3, &mut rng);
        let id = RigidMotion::identity(3);
        let gi = g.compose(&id).unwrap();
        assert!((gi.mu.matrix() - g.mu.matrix()).norm() < 1e-15);
        assert!((&gi.b - &g.b).norm() < 1e-15);

        let t1 = RigidMotion::new(
            Rotation::identity(3, true),
            DVector::from_vec(vec![1.0, 2.0, 3.0]),
        )
        .unwrap();
        let t2 = RigidMotion::new(
            Rotation::identity(3, true),
            DVector::from_vec(vec![0.5, -1.0, 0.25]),
        )
        .unwrap();
        let t12 = t1.compose(&t2).unwrap();
        assert_eq!(t12.b, &t1.b + &t2.b);
    }

    #[test]
    fn compose_inverse_is_identity() {
        let mut rng = seeded_rng(12);
        for _ in 0..20 {
            let g = rand_rigid_motion(3, &mut rng);
            let e = g.compose(&g.inverse()).unwrap();
            assert!((e.homogeneous() - DMatrix::identity(4, 4)).norm() < 1e-12);

            let m = rand_mmg(4, 3, &mut rng);
            let e = m.compose(&m.inverse()).unwrap();
            assert!((e.mu.matrix() - DMatrix::identity(4, 4)).norm() < 1e-12);
            assert!((e.eta.matrix() - DMatrix::identity(3, 3)).norm() < 1e-12);
            assert!(e.b_mat.norm() < 1e-12);
        }
    }

    #[test]
    fn group_axioms_associativity() {
        let mut rng = seeded_rng(13);
        for _ in 0..20 {
            let (a, b, c) = (
                rand_rigid_motion(3, &mut rng),
                rand_rigid_motion(3, &mut rng),
                rand_rigid_motion(3, &mut rng),
            );
            let left = a.compose(&b).unwrap().compose(&c).unwrap();
            let right = a.compose(&b.compose(&c).unwrap()).unwrap();
            assert!((left.homogeneous() - right.homogeneous()).norm() < 1e-12);

            let (a, b, c) = (
                rand_mmg(4, 3, &mut rng),
                rand_mmg(4, 3, &mut rng),
                rand_mmg(4, 3, &mut rng),
            );
            let left = a.compose(&b).unwrap().compose(&c).unwrap();
            let right = a.compose(&b.compose(&c).unwrap()).unwrap();
            assert!((left.b_mat - right.b_mat).norm() < 1e-12);
            assert!((left.mu.matrix() - right.mu.matrix()).norm() < 1e-12);
            assert!((left.eta.matrix() - right.eta.matrix()).norm() < 1e-12);
        }
    }

    #[test]
    fn hybrid_distance_axioms() {
        let mut rng = seeded_rng(14);
        let g = Element::Se(rand_rigid_motion(3, &mut rng));
        assert_eq!(hybrid_distance(&g, &g).unwrap(), 0.0);

        // compact parts equal: distance reduces to the translation norm
        let b = DVector::from_fn(3, |_, _| rng.random::<f64>());
        let id = Element::Se(RigidMotion::identity(3));
        let tr = Element::Se(
            RigidMotion::new(Rotation::identity(3, true), b.clone()).unwrap(),
        );
        assert!((hybrid_distance(&id, &tr).unwrap() - b.norm()).abs() < 1e-15);

        // triangle inequality on random triples
        for _ in 0..100 {
            let (x, y, z) = (
                Element::Se(rand_rigid_motion(3, &mut rng)),
                Element::Se(rand_rigid_motion(3, &mut rng)),
                Element::Se(rand_rigid_motion(3, &mut rng)),
            );
            let (dxy, dyz, dxz) = (
                hybrid_distance(&x, &y).unwrap(),
                hybrid_distance(&y, &z).unwrap(),
                hybrid_distance(&x, &z).unwrap(),
            );
            assert!(dxz <= dxy + dyz + 1e-12);
        }
    }

    #[test]
    fn hybrid_distance_rejects_mixed_groups() {
        let mut rng = seeded_rng(15);
        let a = Element::Se(rand_rigid_motion(3, &mut rng));
        let b = Element::Rot(rand_rotation(3, true, &mut rng));
        assert!(hybrid_distance(&a, &b).is_err());
    }
}
