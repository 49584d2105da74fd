//! Ground-truth sampling and the multiplicative noise model
//! `g_ij = g_i N_ij g_j^{-1}` with outliers and missing data.

use crate::error::{Error, Result};
use crate::group::{
    mat_exp, project_to_rotation, Element, MmgElement, RigidMotion, Rotation,
};
use crate::harness::metrics::{snr_db, SnrBreakdown};
use crate::sync::{Edge, GroupKind, MeasurementGraph};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// Parameters of the synthetic measurement model.
#[derive(Debug, Clone)]
pub struct NoiseSpec {
    /// Std-dev of the wrapped Gaussian on the compact part's algebra.
    pub sigma_rot: f64,
    /// Std-dev of the Gaussian on the linear part.
    pub sigma_trans: f64,
    /// Fraction of kept edges replaced by outliers.
    pub outlier_rate: f64,
    /// Fraction of all n-choose-2 measurements that are available.
    pub p: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_rot >= 0.0 && self.sigma_trans >= 0.0) {
            return Err(Error::ConfigInvalid("sigmas must be >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.outlier_rate) {
            return Err(Error::ConfigInvalid("outlier_rate must be in [0, 1)".into()));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::ConfigInvalid("p must be in (0, 1]".into()));
        }
        Ok(())
    }

    /// Connectivity plausibility: a sample of p * C(n, 2) edges needs at
    /// least n - 1 edges to connect n vertices.
    pub fn connectivity_plausible(&self, n: usize) -> bool {
        let total = (n * (n - 1) / 2) as f64;
        (self.p * total).round() >= (n - 1) as f64
    }
}

fn uniform_matrix(r: usize, c: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random::<f64>())
}

fn sample_rotation(d: usize, special: bool, rng: &mut impl Rng) -> Rotation {
    loop {
        if let Ok(r) = project_to_rotation(&uniform_matrix(d, d, rng), special) {
            return r;
        }
    }
}

fn gaussian_rotation(d: usize, special: bool, rng: &mut impl Rng) -> Rotation {
    loop {
        let a = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
        if let Ok(r) = project_to_rotation(&a, special) {
            return r;
        }
    }
}

/// Deterministic synthetic ground truth: rotations are projections of
/// uniform [0,1] matrices, translations are uniform over [0,2].
pub fn sample_ground_truth(n: usize, kind: GroupKind, seed: u64) -> Result<Vec<Element>> {
    if n < 2 {
        return Err(Error::ConfigInvalid("need n >= 2 ground-truth elements".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(match kind {
            GroupKind::Se { d } => {
                let mu = sample_rotation(d, true, &mut rng);
                let b = DVector::from_fn(d, |_, _| 2.0 * rng.random::<f64>());
                Element::Se(RigidMotion::new(mu, b)?)
            }
            GroupKind::Mmg { d, l } => {
                let mu = sample_rotation(d, false, &mut rng);
                let eta = sample_rotation(l, false, &mut rng);
                let b = uniform_matrix(d, l, &mut rng);
                Element::Mmg(MmgElement::new(mu, eta, b)?)
            }
            GroupKind::So { d } => Element::Rot(sample_rotation(d, true, &mut rng)),
            GroupKind::O { d } => Element::Rot(sample_rotation(d, false, &mut rng)),
        });
    }
    Ok(out)
}

/// Largest rotation angle of a skew generator (its spectral norm).
fn skew_angle(s: &DMatrix<f64>) -> f64 {
    s.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |a, &b| a.max(b))
}

/// Wrapped Gaussian on the rotation group: Gaussian entries on the algebra,
/// redrawn while the angle reaches pi.
pub(crate) fn wrapped_gaussian_rotation(
    d: usize,
    sigma: f64,
    special: bool,
    rng: &mut impl Rng,
) -> Rotation {
    if sigma == 0.0 {
        return Rotation::identity(d, special);
    }
    loop {
        let mut s = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in (i + 1)..d {
                let x: f64 = StandardNormal.sample(rng);
                s[(i, j)] = sigma * x;
                s[(j, i)] = -sigma * x;
            }
        }
        if skew_angle(&s) < std::f64::consts::PI {
            return Rotation::new(mat_exp(&s), special)
                .expect("exponential of skew is orthogonal");
        }
    }
}

fn noise_element(kind: GroupKind, spec: &NoiseSpec, rng: &mut impl Rng) -> Result<Element> {
    Ok(match kind {
        GroupKind::Se { d } => {
            let mu = wrapped_gaussian_rotation(d, spec.sigma_rot, true, rng);
            let a = DVector::from_fn(d, |_, _| {
                let x: f64 = StandardNormal.sample(rng);
                spec.sigma_trans * x
            });
            Element::Se(RigidMotion::new(mu, a)?)
        }
        GroupKind::Mmg { d, l } => {
            let mu = wrapped_gaussian_rotation(d, spec.sigma_rot, false, rng);
            let eta = wrapped_gaussian_rotation(l, spec.sigma_rot, false, rng);
            let a = DMatrix::from_fn(d, l, |_, _| {
                let x: f64 = StandardNormal.sample(rng);
                spec.sigma_trans * x
            });
            Element::Mmg(MmgElement::new(mu, eta, a)?)
        }
        GroupKind::So { d } => {
            Element::Rot(wrapped_gaussian_rotation(d, spec.sigma_rot, true, rng))
        }
        GroupKind::O { d } => {
            Element::Rot(wrapped_gaussian_rotation(d, spec.sigma_rot, false, rng))
        }
    })
}

fn outlier_element(kind: GroupKind, rng: &mut impl Rng) -> Result<Element> {
    Ok(match kind {
        GroupKind::Se { d } => {
            let mu = gaussian_rotation(d, true, rng);
            let b = DVector::from_fn(d, |_, _| rng.random::<f64>());
            Element::Se(RigidMotion::new(mu, b)?)
        }
        GroupKind::Mmg { d, l } => {
            let mu = gaussian_rotation(d, false, rng);
            let eta = gaussian_rotation(l, false, rng);
            let b = uniform_matrix(d, l, rng);
            Element::Mmg(MmgElement::new(mu, eta, b)?)
        }
        GroupKind::So { d } => Element::Rot(gaussian_rotation(d, true, rng)),
        GroupKind::O { d } => Element::Rot(gaussian_rotation(d, false, rng)),
    })
}

fn group_kind_of(truth: &[Element]) -> Result<GroupKind> {
    match &truth[0] {
        Element::Se(g) => Ok(GroupKind::Se { d: g.dim() }),
        Element::Mmg(g) => {
            let (d, l) = g.dims();
            Ok(GroupKind::Mmg { d, l })
        }
        Element::Rot(r) => Ok(if r.is_special() {
            GroupKind::So { d: r.dim() }
        } else {
            GroupKind::O { d: r.dim() }
        }),
    }
}

/// Generates a measurement graph from ground truth per the multiplicative
/// model: sample round(p * C(n,2)) edges (resampling until connected, at
/// most 100 times), contaminate each with `g_i N_ij g_j^{-1}`, replace a
/// fraction with outliers, and report the realized SNR over the genuine
/// edges. Unit weights throughout.
pub fn make_measurements(
    truth: &[Element],
    spec: &NoiseSpec,
) -> Result<(MeasurementGraph, SnrBreakdown)> {
    spec.validate()?;
    if truth.len() < 2 {
        return Err(Error::ConfigInvalid("need at least two elements".into()));
    }
    let n = truth.len();
    let kind = group_kind_of(truth)?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);

    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    let m = ((spec.p * pairs.len() as f64).round() as usize).clamp(1, pairs.len());

    let mut selected: Option<Vec<(usize, usize)>> = None;
    for _ in 0..100 {
        let mut shuffled = pairs.clone();
        shuffled.shuffle(&mut rng);
        shuffled.truncate(m);
        if connected(n, &shuffled) {
            shuffled.sort_unstable();
            selected = Some(shuffled);
            break;
        }
    }
    let selected = selected.ok_or(Error::ConnectivityFailure { attempts: 100 })?;

    let mut edges = Vec::with_capacity(m);
    let mut noises = Vec::with_capacity(m);
    let mut clean_ratios = Vec::with_capacity(m);
    for &(i, j) in &selected {
        let noise = noise_element(kind, spec, &mut rng)?;
        let clean = truth[i].compose(&truth[j].inverse())?;
        let g = truth[i].compose(&noise)?.compose(&truth[j].inverse())?;
        edges.push(Edge { i, j, w: 1.0, g });
        noises.push(noise);
        clean_ratios.push(clean);
    }

    let n_out = (spec.outlier_rate * m as f64).round() as usize;
    let mut outlier_idx: Vec<usize> = (0..m).collect();
    outlier_idx.shuffle(&mut rng);
    outlier_idx.truncate(n_out);
    for &k in &outlier_idx {
        edges[k].g = outlier_element(kind, &mut rng)?;
    }

    // SNR over genuine (non-outlier) edges only
    let outlier_set: std::collections::HashSet<usize> = outlier_idx.into_iter().collect();
    let mut sig = Vec::new();
    let mut noi = Vec::new();
    for k in 0..m {
        if !outlier_set.contains(&k) {
            sig.push(clean_ratios[k].clone());
            noi.push(noises[k].clone());
        }
    }
    let snr = match snr_db(&sig, &noi) {
        Ok(b) => b,
        Err(Error::AllNoiseFree) => SnrBreakdown {
            snr_db: None,
            excluded_zero_noise: sig.len(),
            outliers: n_out,
        },
        Err(e) => return Err(e),
    };
    let snr = SnrBreakdown {
        outliers: n_out,
        ..snr
    };

    Ok((MeasurementGraph::new(n, kind, edges)?, snr))
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(i, j) in edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        parent[a] = b;
    }
    let root = find(&mut parent, 0);
    (1..n).all(|i| find(&mut parent, i) == root)
}

/// Bisects a common noise scale until the realized SNR hits the target;
/// rotation and translation noise keep the caller's relative weights.
/// Returns (sigma_rot, sigma_trans).
pub fn calibrate_sigma_for_snr(
    truth: &[Element],
    p: f64,
    rot_weight: f64,
    trans_weight: f64,
    target_db: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    if rot_weight <= 0.0 && trans_weight <= 0.0 {
        return Err(Error::ConfigInvalid(
            "at least one noise weight must be positive".into(),
        ));
    }
    let snr_of = |s: f64| -> Result<f64> {
        let spec = NoiseSpec {
            sigma_rot: s * rot_weight,
            sigma_trans: s * trans_weight,
            outlier_rate: 0.0,
            p,
            seed,
        };
        let (_, b) = make_measurements(truth, &spec)?;
        Ok(b.snr_db.unwrap_or(f64::INFINITY))
    };
    let (mut lo, mut hi) = (1e-4_f64, 8.0_f64);
    for _ in 0..40 {
        let mid = (lo * hi).sqrt();
        if snr_of(mid)? > target_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = (lo * hi).sqrt();
    Ok((s * rot_weight, s * trans_weight))
}
