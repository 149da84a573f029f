//! Residue of A(z)^-1 at a simple root, in closed form and from a contour
//! integral.
//!
//! cargo run --example residue

use erlang_tails::models::GaussianChain;
use erlang_tails::pencil::{laurent_coefficient, residue_simple, Contraction, PoleOptions};

fn main() -> erlang_tails::Result<()> {
    // distinct rates and a positive return rate keep A(alpha) irreducible
    let chain = GaussianChain { mu: vec![0.2, -0.1], sigma2: vec![1.0, 2.0], theta: vec![1.5], lambda: vec![0.0, 1.0] };
    let mut model = chain.to_model()?;
    model.pi[1][0] = 0.5;
    model.pi[1][1] = -0.5;
    let alpha = model.analyze()?.upper.alpha.expect("upper root");
    let p = model.pencil()?;
    let res = residue_simple(&p, alpha, &PoleOptions::default())?;
    let c = laurent_coefficient(&p, alpha, Contraction::Entrywise, 1, 1e-2, 64)?;
    println!("alpha {alpha:.9}");
    println!("closed-form residue {res:.6}");
    println!("contour coefficient {:.6}", c.map(|z| z.re));
    Ok(())
}
