//! Shared random-element helpers for the unit tests.

use crate::group::{project_to_rotation, MmgElement, RigidMotion, Rotation};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn seeded_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub fn rand_rotation(d: usize, special: bool, rng: &mut impl Rng) -> Rotation {
    loop {
        let a = DMatrix::from_fn(d, d, |_, _| rng.random::<f64>());
        if let Ok(r) = project_to_rotation(&a, special) {
            return r;
        }
    }
}

pub fn rand_rigid_motion(d: usize, rng: &mut impl Rng) -> RigidMotion {
    let mu = rand_rotation(d, true, rng);
    let b = DVector::from_fn(d, |_, _| 2.0 * rng.random::<f64>());
    RigidMotion::new(mu, b).unwrap()
}

pub fn rand_mmg(d: usize, l: usize, rng: &mut impl Rng) -> MmgElement {
    let mu = rand_rotation(d, false, rng);
    let eta = rand_rotation(l, false, rng);
    let b = DMatrix::from_fn(d, l, |_, _| rng.random::<f64>());
    MmgElement::new(mu, eta, b).unwrap()
}

pub fn rand_skew(d: usize, sigma: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in (i + 1)..d {
            let x: f64 = StandardNormal.sample(rng);
            s[(i, j)] = sigma * x;
            s[(j, i)] = -sigma * x;
        }
    }
    s
}
