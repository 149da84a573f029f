use rand::Rng;
use rand_distr::{Distribution as _, Exp};

use super::{pick, run_paths, SampleKind, SampleSet};
use crate::error::{Error, Result};
use crate::models::ContinuousModel;
use crate::transforms::{Distribution, LevySpec};

/// Event-driven sampler of W at the stopping time.
#[derive(Debug, Clone)]
pub struct ContinuousSampler {
    levy: Vec<LevySpec>,
    jumps: Vec<Vec<Distribution>>,
    lambda: Vec<f64>,
    // total event rate per state
    rate: Vec<f64>,
    // cumulative transition rates per state
    moves: Vec<Vec<f64>>,
    initial: Vec<f64>,
    max_events: u64,
}

fn cumulative(xs: impl Iterator<Item = f64>) -> Vec<f64> {
    xs.scan(0.0, |acc, x| {
        *acc += x;
        Some(*acc)
    })
    .collect()
}

impl ContinuousSampler {
    pub fn new(model: &ContinuousModel) -> Result<Self> {
        let n = model.size();
        let pi = &model.pi;
        let moves: Vec<Vec<f64>> =
            (0..n).map(|m| cumulative((0..n).map(|k| if k == m { 0.0 } else { pi[m][k] }))).collect();
        let rate: Vec<f64> = (0..n).map(|m| moves[m][n - 1] + model.lambda[m]).collect();
        Ok(ContinuousSampler {
            levy: model.levy.clone(),
            jumps: model.jump_table(),
            lambda: model.lambda.clone(),
            rate,
            moves,
            initial: cumulative(model.initial_law.iter().copied()),
            max_events: 100_000_000,
        })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        Ok(self.draw_with_state(rng)?.0)
    }

    /// W at the stopping time and the (0-based) state in which it stopped.
    pub fn draw_with_state<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, usize)> {
        let mut j = pick(&self.initial, rng.random());
        let mut w = 0.0;
        for _ in 0..self.max_events {
            let r = self.rate[j];
            if !(r > 0.0) {
                return Err(Error::ZeroEventRate(j + 1));
            }
            let tau = Exp::new(r).expect("positive rate").sample(rng);
            w += self.levy[j].sample_increment(rng, tau)?;
            if rng.random::<f64>() * r < self.lambda[j] {
                return Ok((w, j));
            }
            let k = pick(&self.moves[j], rng.random());
            w += self.jumps[j][k].sample(rng);
            j = k;
        }
        Err(Error::InvalidModel(format!("no stop after {} events", self.max_events)))
    }
}

pub fn simulate_continuous(
    model: &ContinuousModel,
    n_paths: u64,
    seed: u64,
    workers: usize,
    model_digest: &str,
) -> Result<SampleSet> {
    let sampler = ContinuousSampler::new(model)?;
    let values = run_paths(n_paths, seed, workers, |rng| sampler.draw(rng))?;
    Ok(SampleSet {
        values,
        n_paths,
        seed,
        model_digest: model_digest.to_string(),
        kind: SampleKind::StoppedWT,
        resets: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::stream_rng;

    #[test]
    fn deterministic_drift_gives_exponential_time() {
        let m = ContinuousModel {
            pi: vec![vec![0.0]],
            lambda: vec![1.0],
            initial_law: vec![1.0],
            levy: vec![LevySpec::gaussian(1.0, 0.0)],
            jumps: Vec::new(),
        };
        let s = simulate_continuous(&m, 200_000, 3, 2, "t").unwrap();
        let mean = s.values.iter().sum::<f64>() / s.len() as f64;
        // W_T = T ~ Exp(1), standard error 1/sqrt(n)
        assert!((mean - 1.0).abs() < 4.0 / (s.len() as f64).sqrt());
        assert!(s.values.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn chain_stops_in_last_state() {
        let m = ContinuousModel {
            pi: vec![vec![-1.0, 1.0], vec![0.0, 0.0]],
            lambda: vec![0.0, 1.0],
            initial_law: vec![1.0, 0.0],
            levy: vec![LevySpec::gaussian(0.0, 1.0); 2],
            jumps: Vec::new(),
        };
        let s = ContinuousSampler::new(&m).unwrap();
        for i in 0..2000 {
            assert_eq!(s.draw_with_state(&mut stream_rng(9, i)).unwrap().1, 1);
        }
    }

    #[test]
    fn unreachable_stop_is_an_error() {
        let m = ContinuousModel {
            pi: vec![vec![-1.0, 1.0], vec![0.0, 0.0]],
            lambda: vec![1.0, 0.0],
            initial_law: vec![0.0, 1.0],
            levy: vec![LevySpec::gaussian(0.0, 1.0); 2],
            jumps: Vec::new(),
        };
        let s = ContinuousSampler::new(&m).unwrap();
        assert!(matches!(s.draw(&mut stream_rng(1, 0)), Err(Error::ZeroEventRate(2))));
    }
}
