#![allow(dead_code)]

use erlang_tails::io::{ModelSpec, SpecFile};
use erlang_tails::models::{ContinuousModel, DiscreteModel, GaussianChain};
use erlang_tails::transforms::{Distribution, LevySpec};

pub fn reed() -> ContinuousModel {
    ContinuousModel {
        pi: vec![vec![0.0]],
        lambda: vec![1.0],
        initial_law: vec![1.0],
        levy: vec![LevySpec::gaussian(0.0, 2.0)],
        jumps: Vec::new(),
    }
}

/// Two-state chain 1 -> 2, zero drift, variance 2, stopping only in state 2.
/// theta = 1 gives equal per-state rates (alpha = 1, d = 2).
pub fn chain(theta: f64) -> GaussianChain {
    GaussianChain { mu: vec![0.0, 0.0], sigma2: vec![2.0, 2.0], theta: vec![theta], lambda: vec![0.0, 1.0] }
}

/// Three states with the middle one strictly slower than the other two.
pub fn three_state() -> ContinuousModel {
    let e = Distribution::ExponentialRight { rate: 3.0 };
    let u = Distribution::Unit;
    ContinuousModel {
        pi: vec![vec![-2.0, 1.0, 1.0], vec![0.0, -1.0, 1.0], vec![0.0, 0.0, 0.0]],
        lambda: vec![0.0, 0.0, 1.0],
        initial_law: vec![1.0, 0.0, 0.0],
        levy: vec![LevySpec::gaussian(0.0, 4.0), LevySpec::gaussian(0.0, 1.0), LevySpec::gaussian(0.0, 2.0)],
        jumps: vec![vec![u, e, u], vec![u; 3], vec![u; 3]],
    }
}

pub fn discrete_irreducible() -> DiscreteModel {
    let g = |mean, variance| Distribution::Gaussian { mean, variance };
    DiscreteModel {
        pi: vec![vec![0.5, 0.5], vec![0.3, 0.7]],
        upsilon: vec![vec![0.9, 0.8], vec![0.7, 0.85]],
        initial_law: vec![0.5, 0.5],
        increments: vec![
            vec![g(0.3, 1.0), Distribution::ExponentialRight { rate: 2.0 }],
            vec![g(-0.2, 0.5), g(0.5, 0.8)],
        ],
    }
}

pub fn discrete_reducible() -> DiscreteModel {
    DiscreteModel {
        pi: vec![vec![0.7, 0.3], vec![0.0, 1.0]],
        upsilon: vec![vec![0.9, 0.9], vec![0.8, 0.8]],
        initial_law: vec![1.0, 0.0],
        increments: vec![
            vec![Distribution::ExponentialRight { rate: 1.5 }, Distribution::ConstantShift { shift: 1.0 }],
            vec![Distribution::Unit, Distribution::Gaussian { mean: 0.4, variance: 1.0 }],
        ],
    }
}

pub fn spec_json(model: ModelSpec) -> String {
    SpecFile::new(model).to_json().unwrap()
}
