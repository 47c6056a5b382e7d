//! Correlation sweep: starting from half all-positive and half
//! all-negative unit vectors, signs flip one coordinate of one negative
//! node at a time, walking the correlation ratio from -1 up to n - 1.
//! Each configuration measures every decoder family by Monte Carlo on a
//! shared set of encodings.

use crate::analytics::correlation_summary;
use crate::error::{Error, Result};
use crate::estimate::DecoderSpec;
use crate::oracle::monte_carlo_multi;
use crate::rng::derive_seed;
use crate::sparsify::EncoderSpec;
use crate::tasks::clamp_rho;
use crate::types::{DenseVector, TFunctionSpec};

#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    pub nodes: usize,
    pub dim: usize,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
}

/// One measured (configuration, estimator) pair.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub config_index: usize,
    pub rho: f64,
    pub estimator: &'static str,
    pub mse_hat: f64,
    pub stderr: f64,
}

/// Runs the sweep and returns four points (one per estimator) for each
/// of the 1 + d * n/2 sign configurations, in configuration order.
pub fn r2r1_sweep(cfg: &SweepConfig) -> Result<Vec<SweepPoint>> {
    if cfg.nodes == 0 || cfg.nodes % 2 != 0 {
        return Err(Error::Config(format!(
            "sweep needs an even positive node count, got {}",
            cfg.nodes
        )));
    }
    if cfg.dim == 0 {
        return Err(Error::Empty("sweep dimension"));
    }
    if cfg.k == 0 || cfg.k > cfg.dim {
        return Err(Error::Budget {
            k: cfg.k,
            d: cfg.dim,
        });
    }
    if cfg.trials == 0 {
        return Err(Error::Empty("trial count"));
    }

    let n = cfg.nodes;
    let d = cfg.dim;
    let a = 1.0 / (d as f64).sqrt();
    let mut values: Vec<Vec<f64>> = (0..n)
        .map(|i| vec![if i < n / 2 { a } else { -a }; d])
        .collect();

    let total_configs = 1 + d * (n / 2);
    let mut points = Vec::with_capacity(4 * total_configs);
    measure(cfg, 0, &values, &mut points)?;
    let mut config_index = 0;
    for j in 0..d {
        for i in n / 2..n {
            values[i][j] = a;
            config_index += 1;
            measure(cfg, config_index, &values, &mut points)?;
        }
    }
    Ok(points)
}

fn measure(
    cfg: &SweepConfig,
    config_index: usize,
    values: &[Vec<f64>],
    points: &mut Vec<SweepPoint>,
) -> Result<()> {
    let vectors: Vec<DenseVector> = values
        .iter()
        .map(|v| DenseVector::new(v.clone()))
        .collect::<Result<_>>()?;
    let rho = correlation_summary(&vectors)?
        .rho
        .expect("sweep vectors keep unit norm");
    let decoders = [
        DecoderSpec::RandK,
        DecoderSpec::Spatial(TFunctionSpec::spatial_max(cfg.nodes)),
        DecoderSpec::Spatial(TFunctionSpec::spatial_avg(cfg.nodes)),
        DecoderSpec::Spatial(TFunctionSpec::spatial_opt(
            cfg.nodes,
            clamp_rho(rho, cfg.nodes),
        )),
    ];
    let estimates = monte_carlo_multi(
        &vectors,
        &EncoderSpec::rand_k(cfg.k),
        &decoders,
        cfg.trials,
        derive_seed(cfg.seed, &format!("sweep.{config_index}")),
    )?;
    for (decoder, estimate) in decoders.iter().zip(estimates) {
        points.push(SweepPoint {
            config_index,
            rho,
            estimator: decoder.label(),
            mse_hat: estimate.mse_hat,
            stderr: estimate.stderr,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walks_from_full_cancellation_to_identical_vectors() {
        let cfg = SweepConfig {
            nodes: 2,
            dim: 2,
            k: 1,
            trials: 200,
            seed: 5,
        };
        let points = r2r1_sweep(&cfg).unwrap();
        assert_eq!(points.len(), 4 * 3);
        assert_eq!(points[0].rho, -1.0);
        let last = points.last().unwrap();
        assert!((last.rho - 1.0).abs() < 1e-12);
        let labels: Vec<&str> = points[..4].iter().map(|p| p.estimator).collect();
        assert_eq!(
            labels,
            ["rand_k", "spatial_max", "spatial_avg", "spatial_opt"]
        );
        // At full cancellation the tuned decoder returns the zero vector
        // and the true mean is exactly zero, so its error vanishes.
        assert_eq!(points[3].mse_hat, 0.0);
    }

    #[test]
    fn sweep_is_deterministic_in_the_seed() {
        let cfg = SweepConfig {
            nodes: 2,
            dim: 2,
            k: 1,
            trials: 100,
            seed: 9,
        };
        let a = r2r1_sweep(&cfg).unwrap();
        let b = r2r1_sweep(&cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.mse_hat.to_bits(), y.mse_hat.to_bits());
            assert_eq!(x.stderr.to_bits(), y.stderr.to_bits());
        }
        let other = SweepConfig { seed: 10, ..cfg };
        let c = r2r1_sweep(&other).unwrap();
        assert!(a.iter().zip(&c).any(|(x, y)| x.mse_hat != y.mse_hat));
    }

    #[test]
    fn odd_node_count_is_rejected() {
        let cfg = SweepConfig {
            nodes: 3,
            dim: 2,
            k: 1,
            trials: 10,
            seed: 0,
        };
        assert!(matches!(r2r1_sweep(&cfg), Err(Error::Config(_))));
    }
}
