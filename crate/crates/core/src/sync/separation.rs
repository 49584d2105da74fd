//! Separation baselines: synchronize the compact parts spectrally, then
//! solve the linear parts as a least-squares problem with the estimated
//! rotations plugged in.

use crate::error::{Error, Result};
use crate::group::{Element, MmgElement, RigidMotion, Rotation};
use crate::sync::lstsq::symmetric_pinv_solve;
use crate::sync::spectral::spectral_with_gap;
use crate::sync::{Diagnostics, Edge, GroupKind, MeasurementGraph, SyncSolution};
use nalgebra::{DMatrix, DVector};
use std::time::Instant;

const PINV_CUTOFF: f64 = 1e-10;

/// Separation method for SE(d): spectral rotations, then the minimum-norm
/// solution of the stacked translation system
/// `sum w_ij || b_i - mu_i mu_j^T b_j - b_ij ||^2`.
pub fn separation_sync(graph: &MeasurementGraph) -> Result<SyncSolution> {
    let start = Instant::now();
    let d = match graph.group() {
        GroupKind::Se { d } => d,
        _ => {
            return Err(Error::DimensionMismatch(
                "separation_sync expects an SE(d) graph".into(),
            ))
        }
    };
    let n = graph.n();

    let rot_edges = graph
        .edges()
        .iter()
        .map(|e| {
            let g = match &e.g {
                Element::Se(g) => g,
                _ => unreachable!(),
            };
            Ok(Edge {
                i: e.i,
                j: e.j,
                w: e.w,
                g: Element::Rot(g.mu.clone()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rot_graph = MeasurementGraph::new(n, GroupKind::So { d }, rot_edges)?;
    let out = spectral_with_gap(&rot_graph)?;
    let mus = out.rotations;

    // normal equations over the stacked translations
    let size = n * d;
    let mut ata = DMatrix::<f64>::zeros(size, size);
    let mut atb = DVector::<f64>::zeros(size);
    let eye = DMatrix::<f64>::identity(d, d);
    for e in graph.edges() {
        let g = match &e.g {
            Element::Se(g) => g,
            _ => unreachable!(),
        };
        let c = mus[e.i].matrix() * mus[e.j].matrix().transpose();
        let (bi, bj) = (d * e.i, d * e.j);
        let w = e.w;
        add_block(&mut ata, bi, bi, &(&eye * w));
        add_block(&mut ata, bj, bj, &(&c.transpose() * &c * w));
        add_block(&mut ata, bi, bj, &(-&c * w));
        add_block(&mut ata, bj, bi, &(-&c.transpose() * w));
        for r in 0..d {
            atb[bi + r] += w * g.b[r];
        }
        let ctb = c.transpose() * &g.b;
        for r in 0..d {
            atb[bj + r] -= w * ctb[r];
        }
    }
    let bs = symmetric_pinv_solve(&ata, &atb, PINV_CUTOFF)?;

    let mut estimates: Vec<Element> = (0..n)
        .map(|i| {
            let b = DVector::from_fn(d, |r, _| bs[d * i + r]);
            Ok(Element::Se(RigidMotion::new(mus[i].clone(), b)?))
        })
        .collect::<Result<Vec<_>>>()?;
    gauge_fix_first(&mut estimates)?;

    let residual = graph.objective(&estimates)?;
    Ok(SyncSolution {
        estimates,
        lambda_used: None,
        diagnostics: Diagnostics {
            residual,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            solver: "separation".into(),
            eigengap: Some(out.eigengap),
        },
    })
}

/// Which translational residual the MMG separation minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmgResidualForm {
    /// `B_i - mu_i mu_j^T B_j eta_j eta_i^T - B_ij`; vanishes on clean data
    /// under the group law.
    GroupLaw,
    /// The literal printed objective `B_ij eta_j + mu_i mu_j^T B_j + B_i`;
    /// does not vanish on clean data, kept for comparison.
    Printed,
}

/// Separation method for MMG(d, l): two independent spectral syncs on the
/// orthogonal parts, then a minimum-norm least-squares solve for the B parts.
pub fn separation_sync_mmg(graph: &MeasurementGraph) -> Result<SyncSolution> {
    separation_sync_mmg_with_residual(graph, MmgResidualForm::GroupLaw)
}

pub fn separation_sync_mmg_with_residual(
    graph: &MeasurementGraph,
    form: MmgResidualForm,
) -> Result<SyncSolution> {
    let start = Instant::now();
    let (d, l) = match graph.group() {
        GroupKind::Mmg { d, l } => (d, l),
        _ => {
            return Err(Error::DimensionMismatch(
                "separation_sync_mmg expects an MMG(d, l) graph".into(),
            ))
        }
    };
    let n = graph.n();

    let part = |pick_mu: bool, order: usize| -> Result<Vec<Rotation>> {
        let edges = graph
            .edges()
            .iter()
            .map(|e| {
                let g = match &e.g {
                    Element::Mmg(g) => g,
                    _ => unreachable!(),
                };
                let r = if pick_mu { g.mu.clone() } else { g.eta.clone() };
                Ok(Edge {
                    i: e.i,
                    j: e.j,
                    w: e.w,
                    g: Element::Rot(r),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let g = MeasurementGraph::new(n, GroupKind::O { d: order }, edges)?;
        Ok(spectral_with_gap(&g)?.rotations)
    };
    let mus = part(true, d)?;
    let etas = part(false, l)?;

    // vectorized (column-major) normal equations over the B parts
    let dl = d * l;
    let size = n * dl;
    let mut ata = DMatrix::<f64>::zeros(size, size);
    let mut atb = DVector::<f64>::zeros(size);
    let eye = DMatrix::<f64>::identity(dl, dl);
    for e in graph.edges() {
        let g = match &e.g {
            Element::Mmg(g) => g,
            _ => unreachable!(),
        };
        let c = mus[e.i].matrix() * mus[e.j].matrix().transpose();
        let w = e.w;
        let (bi, bj) = (dl * e.i, dl * e.j);
        // rhs and the coefficient of B_j depend on the residual form
        let (k, rhs) = match form {
            MmgResidualForm::GroupLaw => {
                let eta = etas[e.j].matrix() * etas[e.i].matrix().transpose();
                // vec(C B E) = (E^T (x) C) vec(B)
                (-(eta.transpose().kronecker(&c)), g.b_mat.clone())
            }
            MmgResidualForm::Printed => {
                let rhs = -(&g.b_mat * etas[e.j].matrix());
                (DMatrix::identity(l, l).kronecker(&c), rhs)
            }
        };
        add_block(&mut ata, bi, bi, &(&eye * w));
        add_block(&mut ata, bj, bj, &(k.transpose() * &k * w));
        add_block(&mut ata, bi, bj, &(&k * w));
        add_block(&mut ata, bj, bi, &(k.transpose() * w));
        let rhs_vec = vec_col_major(&rhs);
        for r in 0..dl {
            atb[bi + r] += w * rhs_vec[r];
        }
        let ktb = k.transpose() * &rhs_vec;
        for r in 0..dl {
            atb[bj + r] += w * ktb[r];
        }
    }
    let bs = symmetric_pinv_solve(&ata, &atb, PINV_CUTOFF)?;

    let mut estimates: Vec<Element> = (0..n)
        .map(|i| {
            let b = DMatrix::from_fn(d, l, |r, c2| bs[dl * i + c2 * d + r]);
            Ok(Element::Mmg(MmgElement::new(
                mus[i].clone(),
                etas[i].clone(),
                b,
            )?))
        })
        .collect::<Result<Vec<_>>>()?;
    gauge_fix_first(&mut estimates)?;

    let residual = graph.objective(&estimates)?;
    Ok(SyncSolution {
        estimates,
        lambda_used: None,
        diagnostics: Diagnostics {
            residual,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            solver: match form {
                MmgResidualForm::GroupLaw => "separation-mmg".into(),
                MmgResidualForm::Printed => "separation-mmg-printed".into(),
            },
            eigengap: None,
        },
    })
}

fn add_block(m: &mut DMatrix<f64>, row: usize, col: usize, block: &DMatrix<f64>) {
    let mut view = m.view_mut((row, col), (block.nrows(), block.ncols()));
    view += block;
}

fn vec_col_major(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// Right-multiplies every estimate by the inverse of the first, making the
/// gauge deterministic.
pub(crate) fn gauge_fix_first(estimates: &mut [Element]) -> Result<()> {
    let g0 = estimates[0].inverse();
    for e in estimates.iter_mut() {
        *e = e.compose(&g0)?;
    }
    Ok(())
}
