//! Eigenvalue index against longest chain on random reducible matrices.
//!
//! cargo run --release --example rothblum_fuzz -- [instances] [seed]

use erlang_tails::fuzz::{run_fuzz, FuzzConfig};

fn main() -> erlang_tails::Result<()> {
    let mut args = std::env::args().skip(1);
    let instances: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(500);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = FuzzConfig::default();
    let records = run_fuzz(instances, seed, &cfg, 0)?;
    let mut by_length = std::collections::BTreeMap::<usize, usize>::new();
    for r in &records {
        *by_length.entry(r.chain_length).or_default() += 1;
    }
    let agree = records.iter().filter(|r| r.agree).count();
    println!("{agree} of {} instances agree", records.len());
    for (len, count) in by_length {
        println!("  chain length {len}: {count} instances");
    }
    for r in records.iter().filter(|r| !r.agree) {
        println!("  disagreement: {r:?}");
    }
    Ok(())
}
