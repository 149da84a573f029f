//! Exact Monte Carlo for both models, and the estimators that compare
//! samples with analytic predictions.

mod continuous;
mod discrete;
mod estimators;
mod export;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use continuous::{simulate_continuous, ContinuousSampler};
pub use discrete::{simulate_discrete, DiscreteMode, DiscreteSampler};
pub use estimators::{
    continuous_identity_check, discrete_identity_check, empirical_laplace, fit_tail, ks_critical_value, ks_two_sample, pairwise_sum,
    prefactor_ratio, survival_curve, IdentityCheck, LaplaceEstimate, LaplaceGuard, SurvivalPoint, TailFit,
    TailWindow, MIN_TAIL_COUNT,
};
pub use export::{read_sample_file, write_sample_file, write_sidecar, write_survival_csv, SampleMetadata};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    /// W at the stopping time of a continuous model.
    StoppedWT,
    /// Stationary W of a discrete model.
    StationaryW,
    /// Draws from a named distribution.
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub n_paths: u64,
    pub seed: u64,
    pub model_digest: String,
    pub kind: SampleKind,
    /// Number of draws taken at a reset step (discrete models only).
    pub resets: Option<u64>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn reset_fraction(&self) -> Option<f64> {
        self.resets.map(|r| r as f64 / self.values.len() as f64)
    }
}

/// Independent stream `index` under a root seed.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `f` once per path on its own stream, on `workers` threads
/// (0 picks the rayon default). Output order follows the path index, so
/// results do not depend on the worker count.
pub fn run_paths<T, F>(n: u64, seed: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidModel(format!("thread pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(|i| f(&mut stream_rng(seed, i))).collect())
}

/// n draws of a closure, one stream per draw.
pub fn sample_direct<F>(n: u64, seed: u64, workers: usize, label: &str, f: F) -> Result<SampleSet>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let values = run_paths(n, seed, workers, |rng| Ok(f(rng)))?;
    Ok(SampleSet { values, n_paths: n, seed, model_digest: label.to_string(), kind: SampleKind::Direct, resets: None })
}

pub(crate) fn pick(cdf: &[f64], u: f64) -> usize {
    let total = *cdf.last().expect("nonempty cdf");
    let x = u * total;
    cdf.partition_point(|&c| c <= x).min(cdf.len() - 1)
}
