use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{pick, run_paths, stream_rng, SampleKind, SampleSet};
use crate::error::{Error, Result};
use crate::models::DiscreteModel;
use crate::transforms::Distribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscreteMode {
    /// Exact stationary draws through the regenerative structure.
    Regenerative,
    /// One long trajectory after a burn-in.
    LongRun,
}

/// Stationary sampler for a discrete model.
///
/// A stationary draw sits `k` steps after the latest reset with probability
/// proportional to the chance of surviving `k` steps from a reset, which is
/// what selecting a cycle by its length and a uniform position inside it
/// amounts to. Given `k`, the path since the reset is drawn from the chain
/// conditioned to survive `k` steps, using the survival vectors h_j = Q^j 1
/// with Q = Pi . Upsilon.
#[derive(Debug, Clone)]
pub struct DiscreteSampler {
    n: usize,
    q: Vec<Vec<f64>>,
    increments: Vec<Vec<Distribution>>,
    initial: Vec<f64>,
    // h[j][m]: probability of surviving j steps from state m
    h: Vec<Vec<f64>>,
    age_cdf: Vec<f64>,
}

const TABLE_CAP: usize = 5_000_000;
const TAIL_CUTOFF: f64 = 1e-17;

impl DiscreteSampler {
    pub fn new(model: &DiscreteModel) -> Result<Self> {
        let n = model.size();
        let q: Vec<Vec<f64>> =
            (0..n).map(|m| (0..n).map(|k| model.pi[m][k] * model.upsilon[m][k]).collect()).collect();
        let mut h = vec![vec![1.0; n]];
        let survive = |hj: &[f64]| -> f64 { (0..n).map(|m| model.initial_law[m] * hj[m]).sum() };
        let mut ages = vec![survive(&h[0])];
        let mut total = ages[0];
        loop {
            let last = h.last().unwrap();
            let next: Vec<f64> = (0..n).map(|m| (0..n).map(|k| q[m][k] * last[k]).sum()).collect();
            let s = survive(&next);
            h.push(next);
            ages.push(s);
            total += s;
            if s <= TAIL_CUTOFF * total {
                break;
            }
            if h.len() > TABLE_CAP {
                return Err(Error::SurvivalTableOverflow(TABLE_CAP));
            }
        }
        let age_cdf = ages
            .iter()
            .scan(0.0, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect();
        Ok(DiscreteSampler { n, q, increments: model.increments.clone(), initial: model.initial_law.clone(), h, age_cdf })
    }

    /// Expected number of steps from one reset to the next.
    pub fn mean_cycle_length(&self) -> f64 {
        *self.age_cdf.last().unwrap()
    }

    /// Stationary probability that a step is a reset.
    pub fn reset_probability(&self) -> f64 {
        1.0 / self.mean_cycle_length()
    }

    /// One stationary draw; the flag marks a draw taken at a reset.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, bool) {
        let k = pick(&self.age_cdf, rng.random());
        let weights: Vec<f64> = (0..self.n).map(|m| self.initial[m] * self.h[k][m]).collect();
        let mut j = pick(&cumsum(&weights), rng.random());
        let mut w = 0.0;
        for t in 0..k {
            let left = k - t - 1;
            let weights: Vec<f64> = (0..self.n).map(|c| self.q[j][c] * self.h[left][c]).collect();
            let next = pick(&cumsum(&weights), rng.random());
            w += self.increments[j][next].sample(rng);
            j = next;
        }
        (w, k == 0)
    }

    /// A single trajectory: burn-in, then `steps` consecutive values.
    pub fn long_run<R: Rng + ?Sized>(&self, rng: &mut R, steps: u64) -> Result<(Vec<f64>, u64)> {
        const FIRST_RESET_CAP: u64 = 100_000_000;
        const PILOT_CYCLES: u64 = 100;
        let init = cumsum(&self.initial);
        let rows: Vec<Vec<f64>> = self.q.iter().map(|r| cumsum(r)).collect();
        let mut j = pick(&init, rng.random());
        let mut w = 0.0;
        let step = |j: &mut usize, w: &mut f64, rng: &mut R| -> bool {
            let u: f64 = rng.random();
            let row = &rows[*j];
            if u < row[self.n - 1] {
                let next = row.partition_point(|&c| c <= u).min(self.n - 1);
                *w += self.increments[*j][next].sample(rng);
                *j = next;
                false
            } else {
                *w = 0.0;
                *j = pick(&init, rng.random());
                true
            }
        };

        let mut t = 0;
        while !step(&mut j, &mut w, rng) {
            t += 1;
            if t >= FIRST_RESET_CAP {
                return Err(Error::NoReset(FIRST_RESET_CAP));
            }
        }
        let (mut cycles, mut pilot_steps) = (0u64, 0u64);
        while cycles < PILOT_CYCLES {
            pilot_steps += 1;
            if step(&mut j, &mut w, rng) {
                cycles += 1;
            }
            if pilot_steps >= FIRST_RESET_CAP {
                return Err(Error::NoReset(FIRST_RESET_CAP));
            }
        }
        let burn = (10.0 * pilot_steps as f64 / cycles as f64).ceil() as u64;
        for _ in pilot_steps.min(burn)..burn {
            step(&mut j, &mut w, rng);
        }

        let mut out = Vec::with_capacity(steps as usize);
        let mut resets = 0;
        for _ in 0..steps {
            if step(&mut j, &mut w, rng) {
                resets += 1;
            }
            out.push(w);
        }
        Ok((out, resets))
    }
}

fn cumsum(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

pub fn simulate_discrete(
    model: &DiscreteModel,
    n_paths: u64,
    seed: u64,
    workers: usize,
    mode: DiscreteMode,
    model_digest: &str,
) -> Result<SampleSet> {
    let sampler = DiscreteSampler::new(model)?;
    let (values, resets) = match mode {
        DiscreteMode::Regenerative => {
            let draws = run_paths(n_paths, seed, workers, |rng| Ok(sampler.draw(rng)))?;
            let resets = draws.iter().filter(|d| d.1).count() as u64;
            (draws.into_iter().map(|d| d.0).collect(), resets)
        }
        DiscreteMode::LongRun => sampler.long_run(&mut stream_rng(seed, 0), n_paths)?,
    };
    Ok(SampleSet {
        values,
        n_paths,
        seed,
        model_digest: model_digest.to_string(),
        kind: SampleKind::StationaryW,
        resets: Some(resets),
    })
}
