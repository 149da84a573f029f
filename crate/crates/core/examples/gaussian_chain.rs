//! A chain of Brownian phases: closed-form rates against the pencil analysis.
//!
//! cargo run --example gaussian_chain
//! cargo run --example gaussian_chain -- --spec > chain.json

use erlang_tails::io::{ModelSpec, SpecFile};
use erlang_tails::models::GaussianChain;

fn main() -> erlang_tails::Result<()> {
    let chains = [
        ("tied", GaussianChain { mu: vec![0.0, 0.0], sigma2: vec![2.0, 2.0], theta: vec![1.0], lambda: vec![0.0, 1.0] }),
        ("distinct", GaussianChain { mu: vec![0.0, 0.0], sigma2: vec![2.0, 2.0], theta: vec![3.0], lambda: vec![0.0, 1.0] }),
        (
            "three phases",
            GaussianChain {
                mu: vec![0.5, -0.2, 0.1],
                sigma2: vec![1.0, 1.5, 0.8],
                theta: vec![1.2, 0.7],
                lambda: vec![0.3, 0.0, 0.9],
            },
        ),
    ];
    if std::env::args().any(|a| a == "--spec") {
        let model = chains[0].1.to_model()?;
        println!("{}", SpecFile::new(ModelSpec::Continuous(model)).to_json()?);
        return Ok(());
    }
    for (name, chain) in chains {
        let cf = chain.closed_form()?;
        let r = chain.to_model()?.analyze()?;
        println!("{name}");
        println!("  closed form  alpha {:.9} d {}  beta {:.9} d {}", cf.alpha, cf.d_alpha, cf.beta, cf.d_beta);
        println!(
            "  pencil       alpha {:.9} d {}  beta {:.9} d {}",
            r.upper.alpha.unwrap_or(f64::NAN),
            r.upper.d_alpha.unwrap_or(0),
            r.lower.beta.unwrap_or(f64::NAN),
            r.lower.d_beta.unwrap_or(0)
        );
    }
    Ok(())
}
