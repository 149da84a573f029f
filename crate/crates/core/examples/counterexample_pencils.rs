//! Pencils where the chain count and the true pole order part ways, and the
//! verdict the pole analysis gives each of them.
//!
//! cargo run --example counterexample_pencils

use erlang_tails::fixtures::{
    counterexample_baseline, counterexample_bottom_left, counterexample_mixed, counterexample_top_left,
};
use erlang_tails::pencil::{laurent_probe, pole_order, Contraction, PoleOptions, ProbeOptions};

fn main() -> erlang_tails::Result<()> {
    let opts = PoleOptions::default();
    let cases = [
        ("baseline", counterexample_baseline()),
        ("z^2 bottom left", counterexample_bottom_left()),
        ("z^2 top left", counterexample_top_left()),
        ("mixed slopes", counterexample_mixed()),
    ];
    for (name, p) in cases {
        let rep = pole_order(&p, 0.0, None, &opts)?;
        let probe = laurent_probe(&p, 0.0, Contraction::Entrywise, &ProbeOptions::default())?;
        println!(
            "{name:16} chain {} numeric order {} ({:.3}) sign {:?} verdict {:?}",
            rep.d, probe.order, probe.order_estimate, rep.sign_status, rep.verdict
        );
    }
    Ok(())
}
