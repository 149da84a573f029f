//! Simulates W at the stopping time of a two-phase chain and fits its upper
//! tail, next to the analytic rate and order.
//!
//! cargo run --release --example stopped_process_simulation -- [paths] [seed]

use erlang_tails::models::GaussianChain;
use erlang_tails::simulator::{fit_tail, simulate_continuous, survival_curve, TailWindow};

fn main() -> erlang_tails::Result<()> {
    let mut args = std::env::args().skip(1);
    let paths: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(2_000_000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let chain = GaussianChain { mu: vec![0.0, 0.0], sigma2: vec![2.0, 2.0], theta: vec![1.0], lambda: vec![0.0, 1.0] };
    let model = chain.to_model()?;
    let r = model.analyze()?;
    let samples = simulate_continuous(&model, paths, seed, 0, "two-phase chain")?;
    println!("analytic alpha {:?} d {:?}", r.upper.alpha, r.upper.d_alpha);
    match fit_tail(&samples.values, TailWindow::default()) {
        Ok(fit) => println!(
            "fit on [{:.3}, {:.3}]: alpha {:.4} log-w coefficient {:.3} d {}",
            fit.window[0], fit.window[1], fit.alpha_hat, fit.log_w_coefficient, fit.d_hat
        ),
        Err(e) => println!("no fit: {e}"),
    }
    for p in survival_curve(&samples.values, 12) {
        let exact = (-p.w).exp() * (p.w + 2.0) / 4.0;
        println!("  w {:8.3}  S {:.3e}  exact {:.3e}", p.w, p.survival, if p.w > 0.0 { exact } else { f64::NAN });
    }
    Ok(())
}
