//! Synthetic-experiment harness: ground-truth sampling, the multiplicative
//! noise model with outliers and missing data, SNR and MSE metrics, and the
//! spectral-gap condition estimator.

mod gapcheck;
mod metrics;
mod sample;

pub use gapcheck::{spectral_gap_condition, GapCondition};
pub use metrics::{mse, snr_db, SnrBreakdown};
pub use sample::{
    calibrate_sigma_for_snr, make_measurements, sample_ground_truth, NoiseSpec,
};

/// One row of a sweep: everything needed to reproduce and evaluate a trial.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub method: String,
    pub group: String,
    pub n: usize,
    pub d: usize,
    pub l: Option<usize>,
    pub p: f64,
    pub snr_db: f64,
    pub outlier_rate: f64,
    pub lambda: Option<f64>,
    pub trial: usize,
    pub seed: u64,
    pub mse: f64,
    pub runtime_ms: f64,
    pub error: Option<String>,
}

/// Splitmix-style derivation of independent substream seeds from a base
/// seed and stream indices; stable across platforms.
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut x = base
        .wrapping_mul(0x9e3779b97f4a7c15)
        .wrapping_add(a.wrapping_mul(0xbf58476d1ce4e5b9))
        .wrapping_add(b.wrapping_mul(0x94d049bb133111eb));
    for _ in 0..3 {
        x ^= x >> 30;
        x = x.wrapping_mul(0xbf58476d1ce4e5b9);
        x ^= x >> 27;
        x = x.wrapping_mul(0x94d049bb133111eb);
        x ^= x >> 31;
    }
    x
}
