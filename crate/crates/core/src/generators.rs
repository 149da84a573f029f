//! Random model families used by property tests, examples and the
//! acceptance suite.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::models::{ContinuousModel, DiscreteModel, GaussianChain};
use crate::transforms::{Distribution, LevySpec};

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn gaussian_at_root<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> (f64, f64, f64) {
    let mu = uniform(rng, -0.1, 1.0);
    let sigma2 = uniform(rng, 0.5, 2.0);
    (mu, sigma2, mu * alpha + 0.5 * sigma2 * alpha * alpha)
}

/// Gaussian chain of `n` states. With `ties`, a random nonempty subset of
/// states shares the smallest per-state root alpha*; the other states get
/// roots at least 10% larger.
pub fn random_gaussian_chain<R: Rng + ?Sized>(rng: &mut R, n: usize, ties: bool) -> GaussianChain {
    assert!(n >= 1);
    let alpha_star = uniform(rng, 0.5, 2.0);
    let mut tied = vec![false; n];
    if ties {
        let k = rng.random_range(1..=n);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(rng);
        for &i in &idx[..k] {
            tied[i] = true;
        }
    } else {
        tied[rng.random_range(0..n)] = true;
    }
    let mut chain = GaussianChain { mu: vec![], sigma2: vec![], theta: vec![], lambda: vec![] };
    for (i, &t) in tied.iter().enumerate() {
        let alpha = if t { alpha_star } else { alpha_star * uniform(rng, 1.1, 2.0) };
        let (mu, s2, c) = gaussian_at_root(rng, alpha);
        chain.mu.push(mu);
        chain.sigma2.push(s2);
        if i + 1 < n {
            let theta = c * uniform(rng, 0.3, 1.0);
            chain.theta.push(theta);
            chain.lambda.push(c - theta);
        } else {
            chain.lambda.push(c);
        }
    }
    chain
}

fn random_jump<R: Rng + ?Sized>(rng: &mut R) -> Distribution {
    match rng.random_range(0..4) {
        0 => Distribution::Unit,
        1 => Distribution::ConstantShift { shift: uniform(rng, -1.0, 1.0) },
        2 => Distribution::ExponentialRight { rate: uniform(rng, 1.0, 4.0) },
        _ => Distribution::Gaussian { mean: uniform(rng, -0.5, 0.5), variance: uniform(rng, 0.1, 1.0) },
    }
}

fn initial_law<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| uniform(rng, 0.1, 1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

/// Continuous model with a random sparse generator, positive stopping
/// intensities, Gaussian exponents and a mix of transition jumps.
pub fn random_continuous_model<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ContinuousModel {
    let mut pi = vec![vec![0.0; n]; n];
    let mut jumps = vec![vec![Distribution::Unit; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(0.6) {
                pi[i][j] = uniform(rng, 0.1, 2.0);
                jumps[i][j] = random_jump(rng);
            }
        }
        pi[i][i] = -pi[i].iter().sum::<f64>();
    }
    ContinuousModel {
        pi,
        lambda: (0..n).map(|_| uniform(rng, 0.2, 1.5)).collect(),
        initial_law: initial_law(rng, n),
        levy: (0..n).map(|_| LevySpec::gaussian(uniform(rng, -1.0, 1.0), uniform(rng, 0.2, 2.0))).collect(),
        jumps,
    }
}

/// Continuous model whose chain is irreducible (every off-diagonal rate
/// positive), without jumps.
pub fn random_irreducible_model<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ContinuousModel {
    let mut pi = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                pi[i][j] = uniform(rng, 0.1, 2.0);
            }
        }
        pi[i][i] = -pi[i].iter().sum::<f64>();
    }
    ContinuousModel {
        pi,
        lambda: (0..n).map(|_| uniform(rng, 0.2, 1.5)).collect(),
        initial_law: initial_law(rng, n),
        levy: (0..n).map(|_| LevySpec::gaussian(uniform(rng, -1.0, 1.0), uniform(rng, 0.2, 2.0))).collect(),
        jumps: Vec::new(),
    }
}

/// Discrete model with a random stochastic matrix, survival probabilities
/// in [0.3, 0.95] and Gaussian or exponential increments.
pub fn random_discrete_model<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DiscreteModel {
    let mut pi = vec![vec![0.0; n]; n];
    for row in pi.iter_mut() {
        for x in row.iter_mut() {
            if rng.random_bool(0.7) {
                *x = uniform(rng, 0.1, 1.0);
            }
        }
        if row.iter().all(|&x| x == 0.0) {
            let k = rng.random_range(0..n);
            row[k] = 1.0;
        }
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
    let upsilon = (0..n).map(|_| (0..n).map(|_| uniform(rng, 0.3, 0.95)).collect()).collect();
    let increments = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    if rng.random_bool(0.5) {
                        Distribution::Gaussian { mean: uniform(rng, -1.0, 1.0), variance: uniform(rng, 0.1, 1.0) }
                    } else {
                        Distribution::ExponentialRight { rate: uniform(rng, 0.5, 3.0) }
                    }
                })
                .collect()
        })
        .collect();
    DiscreteModel { pi, upsilon, initial_law: initial_law(rng, n), increments }
}

/// Reducible continuous model with classes listed in topological order,
/// each of one or two states. Tied classes share the root alpha* of their
/// diagonal block; the others have larger block roots, so the basic classes
/// at alpha* are exactly the tied ones.
///
/// Within a class both states carry the same Gaussian exponent and the
/// same total exit rate to later classes and stopping, and their mutual
/// moves carry no jump, which makes the block root available in closed
/// form.
pub fn random_reducible_tied<R: Rng + ?Sized>(rng: &mut R, classes: usize) -> (ContinuousModel, f64) {
    assert!(classes >= 1);
    let alpha_star = uniform(rng, 0.5, 1.5);
    let sizes: Vec<usize> = (0..classes).map(|_| rng.random_range(1..=2)).collect();
    let mut tied: Vec<bool> = (0..classes).map(|_| rng.random_bool(0.6)).collect();
    if !tied.iter().any(|&t| t) {
        let k = rng.random_range(0..classes);
        tied[k] = true;
    }
    let starts: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, &s| {
            let out = *acc;
            *acc += s;
            Some(out)
        })
        .collect();
    let n: usize = sizes.iter().sum();
    let mut pi = vec![vec![0.0; n]; n];
    let mut jumps = vec![vec![Distribution::Unit; n]; n];
    let mut lambda = vec![0.0; n];
    let mut levy = vec![LevySpec::gaussian(0.0, 1.0); n];
    for c in 0..classes {
        let alpha = if tied[c] { alpha_star } else { alpha_star * uniform(rng, 1.2, 2.0) };
        let (mu, s2, exit) = gaussian_at_root(rng, alpha);
        let later: Vec<usize> = (starts[c] + sizes[c]..n).collect();
        let targets: Vec<usize> = later.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
        let inner = uniform(rng, 0.5, 2.0);
        for m in starts[c]..starts[c] + sizes[c] {
            levy[m] = LevySpec::gaussian(mu, s2);
            let outward = if targets.is_empty() { 0.0 } else { exit * uniform(rng, 0.3, 0.9) };
            lambda[m] = exit - outward;
            for &t in &targets {
                pi[m][t] = outward / targets.len() as f64;
                jumps[m][t] = match rng.random_range(0..3) {
                    0 => Distribution::Unit,
                    1 => Distribution::ConstantShift { shift: uniform(rng, -1.0, 1.0) },
                    _ => Distribution::ExponentialRight { rate: uniform(rng, 8.0, 12.0) },
                };
            }
            if sizes[c] == 2 {
                let other = if m == starts[c] { m + 1 } else { starts[c] };
                pi[m][other] = inner;
            }
            pi[m][m] = -(pi[m].iter().sum::<f64>());
        }
    }
    let model = ContinuousModel { pi, lambda, initial_law: initial_law(rng, n), levy, jumps };
    (model, alpha_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::stream_rng;

    #[test]
    fn chains_have_the_constructed_root() {
        let mut rng = stream_rng(4, 0);
        for _ in 0..50 {
            let n = rng.random_range(1..=5);
            let c = random_gaussian_chain(&mut rng, n, true);
            let cf = c.closed_form().unwrap();
            assert!(cf.d_alpha >= 1);
            assert!(c.to_model().unwrap().validate().valid);
        }
    }

    #[test]
    fn random_models_validate() {
        let mut rng = stream_rng(5, 0);
        for n in 1..=4 {
            assert!(random_continuous_model(&mut rng, n).validate().valid);
            assert!(random_irreducible_model(&mut rng, n).validate().valid);
            assert!(random_discrete_model(&mut rng, n).validate().valid);
        }
    }

    #[test]
    fn reducible_tied_root_is_alpha_star() {
        let mut rng = stream_rng(6, 0);
        for _ in 0..20 {
            let m = rng.random_range(1..=4);
            let (model, alpha) = random_reducible_tied(&mut rng, m);
            let rep = model.analyze().unwrap();
            let found = rep.upper.alpha.unwrap();
            assert!((found - alpha).abs() < 1e-8 * alpha, "{found} vs {alpha}");
        }
    }
}
