//! Spectral synchronization over compact orthogonal groups: top eigenvectors
//! of the degree-normalized block measurement matrix, rounded blockwise to
//! the group.

use crate::error::{Error, Result};
use crate::group::{project_to_rotation, Element, Rotation};
use crate::sync::{GroupKind, MeasurementGraph};
use nalgebra::DMatrix;

pub(crate) struct SpectralOutput {
    pub rotations: Vec<Rotation>,
    pub eigengap: f64,
}

/// Synchronization over SO(d) or O(d) by the eigenvector method.
///
/// Builds the block matrix M (M_ij = w_ij R_ij, M_ii = I, M_ji = M_ij^T)
/// with weights normalized by their mean, extracts the top-d eigenvectors of
/// D^{-1/2} M D^{-1/2}, rescales by D^{-1/2}, and rounds each d x d block to
/// the group. Estimates are gauge-fixed so the first one is the identity.
pub fn spectral_sync_compact(graph: &MeasurementGraph) -> Result<Vec<Rotation>> {
    Ok(spectral_with_gap(graph)?.rotations)
}

pub(crate) fn spectral_with_gap(graph: &MeasurementGraph) -> Result<SpectralOutput> {
    let (d, special) = match graph.group() {
        GroupKind::So { d } => (d, true),
        GroupKind::O { d } => (d, false),
        _ => {
            return Err(Error::DimensionMismatch(
                "spectral_sync_compact expects a graph over SO(d) or O(d)".into(),
            ))
        }
    };
    let n = graph.n();

    // mean-weight normalization keeps H = D^{-1} M invariant under uniform
    // weight rescaling while w_ii stays 1
    let positive: Vec<f64> = graph
        .edges()
        .iter()
        .filter(|e| e.w > 0.0)
        .map(|e| e.w)
        .collect();
    let wbar = if positive.is_empty() {
        1.0
    } else {
        positive.iter().sum::<f64>() / positive.len() as f64
    };

    let size = d * n;
    let mut m = DMatrix::<f64>::zeros(size, size);
    let mut deg = vec![1.0_f64; n]; // w_ii = 1
    for e in graph.edges() {
        let r = match &e.g {
            Element::Rot(r) => r,
            _ => unreachable!("graph kind validated at construction"),
        };
        let w = e.w / wbar;
        let block = r.matrix() * w;
        m.view_mut((d * e.i, d * e.j), (d, d)).copy_from(&block);
        m.view_mut((d * e.j, d * e.i), (d, d))
            .copy_from(&block.transpose());
        deg[e.i] += w;
        deg[e.j] += w;
    }
    for i in 0..n {
        m.view_mut((d * i, d * i), (d, d))
            .copy_from(&DMatrix::identity(d, d));
    }

    let dinv_sqrt: Vec<f64> = deg.iter().map(|x| 1.0 / x.sqrt()).collect();
    for i in 0..size {
        for j in 0..size {
            m[(i, j)] *= dinv_sqrt[i / d] * dinv_sqrt[j / d];
        }
    }
    // enforce exact symmetry against accumulation order
    let m = (&m + m.transpose()) * 0.5;

    let eig = nalgebra::linalg::SymmetricEigen::try_new(m, 1e-13, 0)
        .ok_or(Error::EigSolverFailure)?;
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigengap = eig.eigenvalues[order[d - 1]] - eig.eigenvalues[order[d]];

    // mu = D^{-1/2} U, blocks of d rows
    let mut mu = DMatrix::<f64>::zeros(size, d);
    for (col, &idx) in order.iter().take(d).enumerate() {
        for row in 0..size {
            mu[(row, col)] = eig.eigenvectors[(row, idx)] * dinv_sqrt[row / d];
        }
    }

    if special {
        // a reflected eigenbasis would make every block determinant negative;
        // flip one column so the blockwise special projection stays consistent sign_sum
        let sign_sum: f64 = (0..n)
            .map(|i| mu.view((d * i, 0), (d, d)).determinant().signum())
            .sum();
        if sign_sum < 0.0 {
            for row in 0..size {
                mu[(row, d - 1)] = -mu[(row, d - 1)];
            }
        }
    }

    let mut est: Vec<Rotation> = Vec::with_capacity(n);
    for i in 0..n {
        let block = mu.view((d * i, 0), (d, d)).into_owned();
        est.push(project_to_rotation(&block, special)?);
    }
    let gauge = est[0].transpose();
    let rotations = est
        .into_iter()
        .map(|r| r.compose(&gauge))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralOutput {
        rotations,
        eigengap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sync::Edge;
    use crate::testutil::{rand_rotation, seeded_rng};

    fn clean_full_graph(truth: &[Rotation], special: bool) -> MeasurementGraph {
        let n = truth.len();
        let d = truth[0].dim();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push(Edge {
                    i,
                    j,
                    w: 1.0,
                    g: Element::Rot(truth[i].compose(&truth[j].transpose()).unwrap()),
                });
            }
        }
        let kind = if special {
            GroupKind::So { d }
        } else {
            GroupKind::O { d }
        };
        MeasurementGraph::new(n, kind, edges).unwrap()
    }

    fn rot_mse(est: &[Rotation], truth: &[Rotation], special: bool) -> f64 {
        // optimal gauge: polar factor of sum est_i^T truth_i
        let d = truth[0].dim();
        let mut a = DMatrix::<f64>::zeros(d, d);
        for (e, t) in est.iter().zip(truth) {
            a += e.matrix().transpose() * t.matrix();
        }
        let g = project_to_rotation(&a, special).unwrap();
        est.iter()
            .zip(truth)
            .map(|(e, t)| (e.matrix() * g.matrix() - t.matrix()).norm_squared())
            .sum::<f64>()
            / truth.len() as f64
    }

    #[test]
    fn noise_free_full_graph_is_exact() {
        let mut rng = seeded_rng(81);
        let truth: Vec<Rotation> = (0..10).map(|_| rand_rotation(3, true, &mut rng)).collect();
        let est = spectral_sync_compact(&clean_full_graph(&truth, true)).unwrap();
        assert!(rot_mse(&est, &truth, true) < 1e-12);
        assert!((est[0].matrix() - DMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn noise_free_o_d_graph_is_exact() {
        let mut rng = seeded_rng(82);
        let truth: Vec<Rotation> = (0..8).map(|_| rand_rotation(4, false, &mut rng)).collect();
        let est = spectral_sync_compact(&clean_full_graph(&truth, false)).unwrap();
        assert!(rot_mse(&est, &truth, false) < 1e-12);
    }

    #[test]
    fn two_vertices_single_edge_spanning_tree() {
        let mut rng = seeded_rng(83);
        let r = rand_rotation(3, true, &mut rng);
        let graph = MeasurementGraph::new(
            2,
            GroupKind::So { d: 3 },
            vec![Edge {
                i: 0,
                j: 1,
                w: 1.0,
                g: Element::Rot(r.clone()),
            }],
        )
        .unwrap();
        let est = spectral_sync_compact(&graph).unwrap();
        assert!((est[0].matrix() - DMatrix::identity(3, 3)).norm() < 1e-10);
        assert!((est[1].matrix() - r.transpose().matrix()).norm() < 1e-10);
    }

    #[test]
    fn uniform_weight_doubling_is_invariant() {
        let mut rng = seeded_rng(84);
        let truth: Vec<Rotation> = (0..8).map(|_| rand_rotation(3, true, &mut rng)).collect();
        let n = truth.len();
        // a noisy-ish graph: perturb each measurement slightly
        let mut edges1 = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let noise = crate::group::mat_exp(&crate::testutil::rand_skew(3, 0.05, &mut rng));
                let g = truth[i]
                    .compose(&Rotation::new(noise, true).unwrap())
                    .unwrap()
                    .compose(&truth[j].transpose())
                    .unwrap();
                edges1.push(Edge {
                    i,
                    j,
                    w: 1.5,
                    g: Element::Rot(g),
                });
            }
        }
        let mut edges2 = edges1.clone();
        for e in &mut edges2 {
            e.w *= 2.0;
        }
        let g1 = MeasurementGraph::new(n, GroupKind::So { d: 3 }, edges1).unwrap();
        let g2 = MeasurementGraph::new(n, GroupKind::So { d: 3 }, edges2).unwrap();
        let e1 = spectral_sync_compact(&g1).unwrap();
        let e2 = spectral_sync_compact(&g2).unwrap();
        for (a, b) in e1.iter().zip(&e2) {
            assert!((a.matrix() - b.matrix()).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_weight_edge_equals_deleted_edge() {
        let mut rng = seeded_rng(85);
        let truth: Vec<Rotation> = (0..6).map(|_| rand_rotation(3, true, &mut rng)).collect();
        let full = clean_full_graph(&truth, true);
        let mut with_zero: Vec<Edge> = full.edges().to_vec();
        let mut without: Vec<Edge> = Vec::new();
        for (k, e) in with_zero.iter_mut().enumerate() {
            if k == 3 {
                e.w = 0.0;
            } else {
                without.push(e.clone());
            }
        }
        let ga = MeasurementGraph::new(6, GroupKind::So { d: 3 }, with_zero).unwrap();
        let gb = MeasurementGraph::new(6, GroupKind::So { d: 3 }, without).unwrap();
        let ea = spectral_sync_compact(&ga).unwrap();
        let eb = spectral_sync_compact(&gb).unwrap();
        for (a, b) in ea.iter().zip(&eb) {
            assert!((a.matrix() - b.matrix()).norm() < 1e-12);
        }
    }
}
