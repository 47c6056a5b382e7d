//! Walks the correlation ratio from its minimum (-1, perfectly opposed
//! halves) to its maximum (n-1, identical nodes) by flipping signs one
//! coordinate at a time, measuring every decoder by Monte Carlo at each
//! step. Prints a compact table showing where each decoder wins.
//!
//! Run with: cargo run --example correlation_sweep

use corrmean::tasks::sweep::{r2r1_sweep, SweepConfig};

fn main() -> corrmean::Result<()> {
    let cfg = SweepConfig {
        nodes: 4,
        dim: 16,
        k: 2,
        trials: 4000,
        seed: 0,
    };
    let points = r2r1_sweep(&cfg)?;

    println!(
        "n={} d={} k={} trials={}",
        cfg.nodes, cfg.dim, cfg.k, cfg.trials
    );
    println!(
        "{:>6} {:>7} {:>10} {:>12} {:>12} {:>12}  winner",
        "config", "rho", "rand_k", "spatial_max", "spatial_avg", "spatial_opt"
    );
    for chunk in points.chunks(4).step_by(4) {
        let mse: Vec<f64> = chunk.iter().map(|p| p.mse_hat).collect();
        let winner = chunk
            .iter()
            .min_by(|a, b| a.mse_hat.partial_cmp(&b.mse_hat).unwrap())
            .unwrap();
        println!(
            "{:>6} {:>7.2} {:>10.4} {:>12.4} {:>12.4} {:>12.4}  {}",
            chunk[0].config_index, chunk[0].rho, mse[0], mse[1], mse[2], mse[3], winner.estimator
        );
    }

    println!();
    println!("reading the table:");
    println!("  rho < 0: boosting multiply-hit coordinates hurts; the optimal");
    println!("           table even zeroes the estimate at rho = -1.");
    println!("  rho = 0: plain rand_k scaling is already optimal.");
    println!("  rho > 0: hit-count scaling pays, max-style at rho = n-1.");
    println!("  spatial_avg never trails both of the fixed tables.");
    Ok(())
}
