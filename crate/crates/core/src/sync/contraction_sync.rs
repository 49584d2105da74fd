//! The contraction pipeline: map measurements into the compact group, solve
//! rotation synchronization there, search a global alignment of the form
//! exp(v), and map the aligned estimates back.

use crate::contraction::{psi, psi_inverse, CompactImage, SourceKind};
use crate::error::{Error, Result};
use crate::group::{mat_exp, skew_embed, Element, Rotation, TangentP};
use crate::sync::spectral::spectral_with_gap;
use crate::sync::{Diagnostics, Edge, GroupKind, MeasurementGraph, SyncSolution};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use std::sync::Arc;
use std::time::Instant;

/// A synchronization solver over the compact group, pluggable into the
/// contraction pipeline (e.g. robust solvers supplied by a caller).
pub trait CompactSolver: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, graph: &MeasurementGraph) -> Result<Vec<Rotation>>;
}

/// Which compact solver the pipeline uses.
#[derive(Clone)]
pub enum CompactSolverChoice {
    Spectral,
    Plugin(Arc<dyn CompactSolver>),
}

impl CompactSolverChoice {
    fn name(&self) -> String {
        match self {
            CompactSolverChoice::Spectral => "spectral".into(),
            CompactSolverChoice::Plugin(p) => format!("plugin:{}", p.name()),
        }
    }
}

/// Contraction parameter: fixed by the caller or picked by grid search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice {
    Auto,
    Fixed(f64),
}

/// Default number of lambda evaluations for the automatic grid search.
pub const DEFAULT_LAMBDA_BUDGET: usize = 8;

/// Default alignment budget per tangent dimension.
pub const ALIGN_BUDGET_PER_DIM: usize = 50;

/// Edge count above which the alignment objective is subsampled.
const ALIGN_SUBSAMPLE_EDGES: usize = 2000;

fn tangent_dim(kind: GroupKind) -> Result<usize> {
    match kind {
        GroupKind::Se { d } => Ok(d),
        GroupKind::Mmg { d, l } => Ok(d * l),
        _ => Err(Error::DimensionMismatch(
            "contraction applies to SE(d) and MMG(d, l) graphs".into(),
        )),
    }
}

/// Default alignment budget for a graph's tangent dimension.
pub fn default_align_budget(kind: GroupKind) -> usize {
    tangent_dim(kind).map(|m| ALIGN_BUDGET_PER_DIM * m).unwrap_or(0)
}

fn source_kind(kind: GroupKind) -> Result<SourceKind> {
    match kind {
        GroupKind::Se { d } => Ok(SourceKind::Se { d }),
        GroupKind::Mmg { d, l } => Ok(SourceKind::Mmg { d, l }),
        _ => Err(Error::DimensionMismatch(
            "contraction applies to SE(d) and MMG(d, l) graphs".into(),
        )),
    }
}

fn tangent_from_coords(kind: GroupKind, x: &[f64]) -> TangentP {
    match kind {
        GroupKind::Se { d } => TangentP::Se(DVector::from_row_slice(&x[..d])),
        GroupKind::Mmg { d, l } => TangentP::Mmg(DMatrix::from_row_slice(d, l, &x[..d * l])),
        _ => unreachable!(),
    }
}

/// Back-maps aligned compact estimates; None when any factor leaves the
/// decomposable neighborhood.
fn back_map(
    compact: &[Rotation],
    align: &DMatrix<f64>,
    lambda: f64,
    kind: SourceKind,
) -> Option<Vec<Element>> {
    let mut out = Vec::with_capacity(compact.len());
    for q in compact {
        let aligned = q.matrix() * align;
        let rot = Rotation::new(aligned, q.is_special()).ok()?;
        let image = CompactImage::new(rot, lambda, kind).ok()?;
        out.push(psi_inverse(&image).ok()?);
    }
    Some(out)
}

fn alignment_objective(
    estimates: &[Element],
    graph: &MeasurementGraph,
    subsample: Option<&[usize]>,
) -> Result<f64> {
    let mut total = 0.0;
    let eval_edge = |e: &Edge| -> Result<f64> {
        let ratio = estimates[e.i].compose(&estimates[e.j].inverse())?;
        Ok(e.w * crate::group::hybrid_distance_sq(&ratio, &e.g)?)
    };
    match subsample {
        Some(idx) => {
            for &k in idx {
                total += eval_edge(&graph.edges()[k])?;
            }
        }
        None => {
            for e in graph.edges() {
                total += eval_edge(e)?;
            }
        }
    }
    Ok(total)
}

/// Searches a global alignment exp(v), v in the tangent space, minimizing
/// the weighted hybrid-metric fit of the back-mapped estimates against the
/// measurements. Coordinate-wise pattern search with shrinking steps, capped
/// at `budget` objective evaluations; never returns a v worse than zero.
pub fn optimize_global_alignment(
    compact_estimates: &[Rotation],
    graph: &MeasurementGraph,
    lambda: f64,
    budget: usize,
) -> TangentP {
    let kind = graph.group();
    let m = match tangent_dim(kind) {
        Ok(m) => m,
        Err(_) => return TangentP::Se(DVector::zeros(0)),
    };
    let zero = tangent_from_coords(kind, &vec![0.0; m]);
    if budget == 0 {
        return zero;
    }
    let src = match source_kind(kind) {
        Ok(s) => s,
        Err(_) => return zero,
    };

    // bootstrapped edge subsample keeps each evaluation bounded on dense graphs
    let subsample: Option<Vec<usize>> = if graph.edges().len() > ALIGN_SUBSAMPLE_EDGES {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x616c69676e);
        let mut idx: Vec<usize> = (0..graph.edges().len()).collect();
        idx.shuffle(&mut rng);
        idx.truncate(ALIGN_SUBSAMPLE_EDGES);
        Some(idx)
    } else {
        None
    };

    let eval = |coords: &[f64]| -> f64 {
        let t = tangent_from_coords(kind, coords);
        let align = mat_exp(&skew_embed(&t));
        match back_map(compact_estimates, &align, lambda, src) {
            Some(est) => alignment_objective(&est, graph, subsample.as_deref())
                .unwrap_or(f64::INFINITY),
            None => f64::INFINITY,
        }
    };

    let mut v = vec![0.0_f64; m];
    let mut f = eval(&v);
    let mut evals = 1usize;
    if !f.is_finite() {
        return zero;
    }
    let mut step = 0.1_f64;
    while evals < budget && step > 1e-7 {
        let mut improved = false;
        'sweep: for k in 0..m {
            for s in [step, -step] {
                if evals >= budget {
                    break 'sweep;
                }
                let mut cand = v.clone();
                cand[k] += s;
                let fc = eval(&cand);
                evals += 1;
                if fc < f {
                    v = cand;
                    f = fc;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    tangent_from_coords(kind, &v)
}

/// Synchronization over SE(d) or MMG(d, l) via group contraction
/// (compactify, solve, align, back-map).
pub fn contraction_sync(
    graph: &MeasurementGraph,
    lambda: LambdaChoice,
    solver: &CompactSolverChoice,
    align_budget: usize,
) -> Result<SyncSolution> {
    let start = Instant::now();
    let lambda = match lambda {
        LambdaChoice::Fixed(l) => {
            validate_lambda(graph, l)?;
            l
        }
        LambdaChoice::Auto => choose_lambda(graph, DEFAULT_LAMBDA_BUDGET, solver, align_budget)?,
    };
    let (estimates, eigengap) = contraction_estimates(graph, lambda, solver, align_budget)?;
    let residual = graph.objective(&estimates)?;
    Ok(SyncSolution {
        estimates,
        lambda_used: Some(lambda),
        diagnostics: Diagnostics {
            residual,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            solver: format!("contraction-{}", solver.name()),
            eigengap,
        },
    })
}

fn validate_lambda(graph: &MeasurementGraph, lambda: f64) -> Result<()> {
    if lambda < 1.0 {
        return Err(Error::LambdaTooSmall(format!(
            "lambda = {lambda} < 1"
        )));
    }
    let vmax = graph.max_v_norm();
    if vmax / lambda >= std::f64::consts::PI {
        return Err(Error::LambdaTooSmall(format!(
            "max translational norm {vmax} over lambda {lambda} leaves the injectivity radius"
        )));
    }
    Ok(())
}

fn contraction_estimates(
    graph: &MeasurementGraph,
    lambda: f64,
    solver: &CompactSolverChoice,
    align_budget: usize,
) -> Result<(Vec<Element>, Option<f64>)> {
    let kind = graph.group();
    let src = source_kind(kind)?;
    let (compact_kind, order) = match src {
        SourceKind::Se { d } => (GroupKind::So { d: d + 1 }, d + 1),
        SourceKind::Mmg { d, l } => (GroupKind::O { d: d + l }, d + l),
    };

    let compact_edges = graph
        .edges()
        .iter()
        .map(|e| {
            Ok(Edge {
                i: e.i,
                j: e.j,
                w: e.w,
                g: Element::Rot(psi(&e.g, lambda)?.q),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let compact_graph = MeasurementGraph::new(graph.n(), compact_kind, compact_edges)?;

    let (mut qs, eigengap) = match solver {
        CompactSolverChoice::Spectral => {
            let out = spectral_with_gap(&compact_graph)?;
            (out.rotations, Some(out.eigengap))
        }
        CompactSolverChoice::Plugin(p) => {
            let qs = p.solve(&compact_graph)?;
            if qs.len() != graph.n() {
                return Err(Error::PluginInvalid(format!(
                    "returned {} elements for {} vertices",
                    qs.len(),
                    graph.n()
                )));
            }
            if qs.iter().any(|q| q.dim() != order) {
                return Err(Error::PluginInvalid(format!(
                    "returned elements of wrong order (expected {order})"
                )));
            }
            (qs, None)
        }
    };

    // gauge so the first compact estimate is the identity; this keeps every
    // Q_i within the decomposable neighborhood for edges inside the radius
    let g0 = qs[0].transpose();
    for q in qs.iter_mut() {
        *q = q.compose(&g0)?;
    }

    let v = optimize_global_alignment(&qs, graph, lambda, align_budget);
    let align = mat_exp(&skew_embed(&v));
    let estimates = back_map(&qs, &align, lambda, src).ok_or(Error::LambdaTooSmall(
        "aligned compact estimates left the decomposable neighborhood".into(),
    ))?;
    Ok((estimates, eigengap))
}

/// Grid-searches lambda over its admissible range.
///
/// The lower bound is (2 / 0.59) times the largest translational norm so the
/// injectivity and convergence-radius conditions both hold; the upper bound
/// scales that by a median-based linear-SNR estimate of the translations.
/// Evaluates the full pipeline at `budget` log-spaced values and returns the
/// lambda minimizing the measurement-fit objective.
pub fn choose_lambda(
    graph: &MeasurementGraph,
    budget: usize,
    solver: &CompactSolverChoice,
    align_budget: usize,
) -> Result<f64> {
    if budget == 0 {
        return Err(Error::LambdaTooSmall("lambda budget must be >= 1".into()));
    }
    let vmax = graph.max_v_norm();
    if vmax <= f64::EPSILON {
        return Ok(1.0); // pure-rotation data: any lambda is exact
    }
    let lam_min = (2.0 / crate::contraction::ZASSENHAUS_RADIUS * vmax).max(1.0);

    let mut norms: Vec<f64> = graph.edges().iter().map(|e| e.g.v_part_norm()).collect();
    norms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let med = norms[norms.len() / 2];
    let mad = {
        let mut dev: Vec<f64> = norms.iter().map(|x| (x - med).abs()).collect();
        dev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        dev[dev.len() / 2]
    };
    let snr_est = (med / mad.max(1e-6 * med + f64::MIN_POSITIVE)).min(1e6);
    let lam_max = lam_min * snr_est.max(4.0);

    if budget == 1 {
        return Ok((lam_min * lam_max).sqrt());
    }

    let mut best: Option<(f64, f64)> = None;
    for k in 0..budget {
        let t = k as f64 / (budget - 1) as f64;
        let lam = (lam_min.ln() + t * (lam_max.ln() - lam_min.ln())).exp();
        let (estimates, _) = contraction_estimates(graph, lam, solver, align_budget)?;
        let obj = graph.objective(&estimates)?;
        if best.map_or(true, |(_, b)| obj < b) {
            best = Some((lam, obj));
        }
    }
    Ok(best.expect("budget >= 1").0)
}
