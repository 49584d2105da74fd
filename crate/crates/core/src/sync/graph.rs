//! The measurement graph and solver output types.

use crate::error::{Error, Result};
use crate::group::{Element, MmgElement, RigidMotion, Rotation};

/// Which group a graph (or solution) lives over, with its dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Se { d: usize },
    Mmg { d: usize, l: usize },
    So { d: usize },
    O { d: usize },
}

impl GroupKind {
    pub fn matches(&self, g: &Element) -> bool {
        match (self, g) {
            (GroupKind::Se { d }, Element::Se(m)) => m.dim() == *d,
            (GroupKind::Mmg { d, l }, Element::Mmg(m)) => m.dims() == (*d, *l),
            (GroupKind::So { d }, Element::Rot(r)) => r.dim() == *d && r.is_special(),
            (GroupKind::O { d }, Element::Rot(r)) => r.dim() == *d,
            _ => false,
        }
    }

    pub fn identity(&self) -> Element {
        match *self {
            GroupKind::Se { d } => Element::Se(RigidMotion::identity(d)),
            GroupKind::Mmg { d, l } => Element::Mmg(MmgElement::identity(d, l)),
            GroupKind::So { d } => Element::Rot(Rotation::identity(d, true)),
            GroupKind::O { d } => Element::Rot(Rotation::identity(d, false)),
        }
    }
}

/// A weighted measurement edge: i < j, weight w >= 0, and the measured ratio
/// g ~ g_i g_j^{-1}.
#[derive(Debug, Clone)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
    pub g: Element,
}

/// An undirected measurement graph over one group. Vertices are 0-based
/// internally; construction validates edge indices, uniqueness, element
/// kinds, and connectivity through positive-weight edges.
#[derive(Debug, Clone)]
pub struct MeasurementGraph {
    n: usize,
    group: GroupKind,
    edges: Vec<Edge>,
}

impl MeasurementGraph {
    pub fn new(n: usize, group: GroupKind, edges: Vec<Edge>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGraph("need at least two vertices".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for e in &edges {
            if e.i >= e.j || e.j >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) violates i < j <= n",
                    e.i + 1,
                    e.j + 1
                )));
            }
            if !seen.insert((e.i, e.j)) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    e.i + 1,
                    e.j + 1
                )));
            }
            if e.w < 0.0 || !e.w.is_finite() {
                return Err(Error::InvalidGraph("weights must be finite and >= 0".into()));
            }
            if !group.matches(&e.g) {
                return Err(Error::InvalidGraph(
                    "edge element does not match the graph group".into(),
                ));
            }
        }
        let g = MeasurementGraph { n, group, edges };
        if !g.is_connected() {
            return Err(Error::GraphDisconnected);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn group(&self) -> GroupKind {
        self.group
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Connectivity through edges with strictly positive weight.
    fn is_connected(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            if e.w > 0.0 {
                let (a, b) = (find(&mut parent, e.i), find(&mut parent, e.j));
                parent[a] = b;
            }
        }
        let root = find(&mut parent, 0);
        (1..self.n).all(|i| find(&mut parent, i) == root)
    }

    /// Largest translational-part norm over the edges (zero for compact groups).
    pub fn max_v_norm(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.g.v_part_norm())
            .fold(0.0, f64::max)
    }

    /// The weighted Eq-style synchronization objective of a candidate list
    /// of estimates: sum of w_ij d_H(g_i g_j^{-1}, g_ij)^2.
    pub fn objective(&self, estimates: &[Element]) -> Result<f64> {
        if estimates.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "{} estimates for {} vertices",
                estimates.len(),
                self.n
            )));
        }
        let mut total = 0.0;
        for e in &self.edges {
            let ratio = estimates[e.i].compose(&estimates[e.j].inverse())?;
            total += e.w * crate::group::hybrid_distance_sq(&ratio, &e.g)?;
        }
        Ok(total)
    }
}

/// Solver diagnostics attached to a solution.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    /// Value of the weighted synchronization objective at the estimates.
    pub residual: f64,
    pub wall_ms: f64,
    pub solver: String,
    /// Gap between the d-th and (d+1)-th eigenvalues of the normalized
    /// measurement operator, when a spectral solve was involved.
    pub eigengap: Option<f64>,
}

/// A synchronization solution: one estimate per vertex plus diagnostics.
#[derive(Debug, Clone)]
pub struct SyncSolution {
    pub estimates: Vec<Element>,
    pub lambda_used: Option<f64>,
    pub diagnostics: Diagnostics,
}
