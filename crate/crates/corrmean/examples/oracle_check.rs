//! Pits the closed-form MSE expressions against ground truth computed two
//! independent ways: exhaustive enumeration of every encoder outcome
//! (exact, small instances only) and seeded Monte Carlo with standard
//! errors (any size). This is the same machinery the `verify` subcommand
//! runs across a whole grid.
//!
//! Run with: cargo run --example oracle_check

use corrmean::analytics::{mse_rand_k, mse_spatial};
use corrmean::estimate::DecoderSpec;
use corrmean::oracle::{enumerate_exact, monte_carlo, DEFAULT_PATTERN_LIMIT};
use corrmean::sparsify::EncoderSpec;
use corrmean::types::TFunctionSpec;
use corrmean::{rng, DenseVector};

fn main() -> corrmean::Result<()> {
    let (n, d, k) = (3usize, 4usize, 2usize);
    let mut stream = rng::stream(11, "example.oracle");
    let vectors: Vec<DenseVector> = (0..n)
        .map(|_| {
            DenseVector::new(
                (0..d)
                    .map(|_| rand::Rng::gen_range(&mut stream, -1.0..1.0))
                    .collect(),
            )
            .unwrap()
        })
        .collect();

    println!("instance: n={n} d={d} k={k}");
    for (label, decoder, analytic) in [
        (
            "rand_k",
            DecoderSpec::RandK,
            mse_rand_k(&vectors, k)?,
        ),
        (
            "spatial_max",
            DecoderSpec::Spatial(TFunctionSpec::spatial_max(n)),
            mse_spatial(&vectors, k, &TFunctionSpec::spatial_max(n))?,
        ),
    ] {
        let exact = enumerate_exact(&vectors, k, &decoder)?;
        let max_bias = exact
            .bias
            .values()
            .iter()
            .fold(0.0f64, |m, b| m.max(b.abs()));
        println!();
        println!("{label}:");
        println!("  closed form        {analytic:.12}");
        println!(
            "  enumeration        {:.12}   ({} outcome patterns, max |bias| {:.1e})",
            exact.mse, exact.patterns, max_bias
        );
        let mc = monte_carlo(&vectors, &EncoderSpec::rand_k(k), &decoder, 200_000, 5)?;
        let sigmas = (mc.mse_hat - analytic).abs() / mc.stderr;
        println!(
            "  monte carlo        {:.12} +- {:.1e}   ({sigmas:.2} standard errors off)",
            mc.mse_hat, mc.stderr
        );
    }

    println!();
    println!(
        "enumeration is exact but costs C(d,k)^n = {} patterns here;",
        enumerate_exact(&vectors, k, &DecoderSpec::RandK)?.patterns
    );
    println!("the guard refuses instances past {DEFAULT_PATTERN_LIMIT} patterns,");
    println!("where seeded Monte Carlo takes over.");
    Ok(())
}
