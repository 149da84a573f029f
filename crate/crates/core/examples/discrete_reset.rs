//! Discrete model with resets: both sampling modes, the reset fraction and
//! the transform identity at a few points.
//!
//! cargo run --release --example discrete_reset

use erlang_tails::models::DiscreteModel;
use erlang_tails::pencil::transform_value;
use erlang_tails::simulator::{
    discrete_identity_check, ks_critical_value, ks_two_sample, simulate_discrete, DiscreteMode, DiscreteSampler,
    LaplaceGuard,
};
use erlang_tails::transforms::Distribution;
use num_complex::Complex64;

fn main() -> erlang_tails::Result<()> {
    let g = |mean, variance| Distribution::Gaussian { mean, variance };
    let m = DiscreteModel {
        pi: vec![vec![0.5, 0.5], vec![0.3, 0.7]],
        upsilon: vec![vec![0.9, 0.8], vec![0.7, 0.85]],
        initial_law: vec![0.5, 0.5],
        increments: vec![
            vec![g(0.3, 1.0), Distribution::ExponentialRight { rate: 2.0 }],
            vec![g(-0.2, 0.5), g(0.5, 0.8)],
        ],
    };
    let r = m.analyze()?;
    let sampler = DiscreteSampler::new(&m)?;
    println!("alpha {:?} d {:?}, beta {:?} d {:?}", r.upper.alpha, r.upper.d_alpha, r.lower.beta, r.lower.d_beta);
    println!("mean cycle {:.4}, reset probability {:.4}", sampler.mean_cycle_length(), sampler.reset_probability());

    let n = 200_000;
    let reg = simulate_discrete(&m, n, 7, 0, DiscreteMode::Regenerative, "example")?;
    let long = simulate_discrete(&m, n, 8, 0, DiscreteMode::LongRun, "example")?;
    println!("reset fraction: regenerative {:?}, long run {:?}", reg.reset_fraction(), long.reset_fraction());
    let d = ks_two_sample(&reg.values, &long.values);
    println!("KS distance {d:.5} (critical {:.5} at 0.001)", ks_critical_value(n as usize, n as usize, 1e-3));

    let p = m.pencil()?;
    let ones = vec![1.0; 2];
    let guard = LaplaceGuard::new(r.upper.alpha, r.lower.beta);
    let a = r.upper.alpha.unwrap_or(1.0);
    for s in [0.25 * a, 0.5 * a] {
        let gz = transform_value(&p, Complex64::new(s, 0.0), &m.initial_law, &ones)?.re;
        let c = discrete_identity_check(&reg, s, gz, guard)?;
        println!("s {s:.4}: empirical {:.5} predicted {:.5} z {:.2}", c.empirical, c.predicted, c.z_score());
    }
    Ok(())
}
