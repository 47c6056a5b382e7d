//! Distributed power iteration: nodes hold data shards, each round sends
//! a sparsified covariance-vector product, and the server normalizes the
//! decoded mean to form the next eigenvector iterate.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::analytics::correlation_summary;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::sparsify::EncoderSpec;
use crate::tasks::{Aggregator, TaskDecoder};
use crate::types::{mean_vector, DenseVector, RoundMetrics};

/// Power iteration run settings. `normalize_node_updates` makes nodes
/// send unit-scaled products instead of raw ones; the default protocol
/// sends raw products and normalizes only at the server.
#[derive(Debug, Clone)]
pub struct PowerIterationConfig {
    pub k: usize,
    pub rounds: usize,
    pub seed: u64,
    pub encoder: EncoderSpec,
    pub decoder: TaskDecoder,
    pub normalize_node_updates: bool,
}

/// Per-node covariance matrices (1/m) X^T X.
fn node_covariances(parts: &[Dataset]) -> Result<Vec<DMatrix<f64>>> {
    let first = parts.first().ok_or(Error::Empty("data partitions"))?;
    let d = first.dim();
    parts
        .iter()
        .map(|part| {
            if part.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: part.dim(),
                });
            }
            let m = part.len();
            let x = DMatrix::from_fn(m, d, |r, c| part.rows()[r].values()[c]);
            Ok(x.transpose() * &x / m as f64)
        })
        .collect()
}

/// Unit principal eigenvector of a symmetric matrix by dense eigensolve.
fn principal_eigenvector(a: &DMatrix<f64>) -> DenseVector {
    let eigen = nalgebra::SymmetricEigen::new(a.clone());
    let top = eigen.eigenvalues.argmax().0;
    let column = eigen.eigenvectors.column(top);
    let norm = column.norm();
    DenseVector::new(column.iter().map(|v| v / norm).collect()).expect("unit eigenvector")
}

fn uniform_vector<R: Rng>(d: usize, stream: &mut R) -> DenseVector {
    DenseVector::new((0..d).map(|_| stream.gen_range(0.0..1.0)).collect())
        .expect("finite uniform draws")
}

/// Runs compressed power iteration and reports one metrics row per
/// round: task_loss is the sign-invariant subspace error 1 - <v, v*>^2
/// against the dense-eigensolve principal eigenvector, est_mse the
/// realized squared decoding error, r2_over_r1 the correlation of the
/// round's node products.
pub fn power_iteration_sim(
    cfg: &PowerIterationConfig,
    parts: &[Dataset],
) -> Result<Vec<RoundMetrics>> {
    run(cfg, parts, true)
}

/// Uncompressed reference: identical trajectory except the server
/// averages the exact node products. With k = d and the Rand-k
/// encoder/decoder pair the compressed run matches this bit for bit.
pub fn power_iteration_reference(
    cfg: &PowerIterationConfig,
    parts: &[Dataset],
) -> Result<Vec<RoundMetrics>> {
    run(cfg, parts, false)
}

fn run(cfg: &PowerIterationConfig, parts: &[Dataset], compressed: bool) -> Result<Vec<RoundMetrics>> {
    if cfg.rounds == 0 {
        return Err(Error::Config("rounds must be at least 1".into()));
    }
    if compressed && !cfg.decoder.compatible_with(&cfg.encoder) {
        return Err(Error::Incompatible(format!(
            "{} decoder cannot read {} messages",
            cfg.decoder.label(),
            cfg.encoder.label()
        )));
    }
    let covs = node_covariances(parts)?;
    let n = covs.len();
    let d = covs[0].nrows();
    let mut global = DMatrix::zeros(d, d);
    for c in &covs {
        global += c;
    }
    global /= n as f64;
    let v_star = principal_eigenvector(&global);

    let mut v = uniform_vector(d, &mut rng::stream(cfg.seed, "init"));
    let mut aggregator = compressed.then(|| Aggregator::new(cfg.decoder, n, d, cfg.k));
    let mut metrics = Vec::with_capacity(cfg.rounds);

    for t in 1..=cfg.rounds {
        let v_dense = DVector::from_column_slice(v.values());
        let updates: Vec<DenseVector> = covs
            .iter()
            .map(|c| {
                let mut u = c * &v_dense;
                if cfg.normalize_node_updates {
                    let norm = u.norm();
                    if norm > 0.0 {
                        u /= norm;
                    }
                }
                DenseVector::new(u.iter().copied().collect())
            })
            .collect::<Result<_>>()?;
        let rho = correlation_summary(&updates)?.rho;
        let true_mean = mean_vector(&updates)?;

        let estimate = match aggregator.as_mut() {
            Some(agg) => {
                let messages = updates
                    .iter()
                    .enumerate()
                    .map(|(i, u)| {
                        let mut stream =
                            rng::stream(cfg.seed, &format!("round.{t}.node.{i}"));
                        cfg.encoder.encode(u, &mut stream)
                    })
                    .collect::<Result<Vec<_>>>()?;
                agg.decode_round(&messages, rho)?
            }
            None => true_mean.clone(),
        };
        let est_mse = estimate.dist_sq(&true_mean);

        let norm_sq = estimate.norm_sq();
        if norm_sq == 0.0 {
            eprintln!("power iteration round {t}: zero mean estimate, re-randomizing");
            v = uniform_vector(d, &mut rng::stream(cfg.seed, &format!("round.{t}.reinit")));
        } else {
            let norm = norm_sq.sqrt();
            v = DenseVector::new(estimate.values().iter().map(|x| x / norm).collect())?;
        }

        let align = v.dot(&v_star);
        metrics.push(RoundMetrics {
            round: t,
            task_loss: 1.0 - align * align,
            est_mse,
            r2_over_r1: rho.unwrap_or(f64::NAN),
            extra: Vec::new(),
        });
    }
    Ok(metrics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_gaussian_mixture;

    fn mixture_parts(n: usize, rows_per_node: usize, d: usize, seed: u64) -> Vec<Dataset> {
        let data = synth_gaussian_mixture(n * rows_per_node, d, 3, 6.0, seed).unwrap();
        crate::data::split_iid(&data, n, seed).unwrap()
    }

    fn config(k: usize, rounds: usize, decoder: TaskDecoder) -> PowerIterationConfig {
        PowerIterationConfig {
            k,
            rounds,
            seed: 17,
            encoder: EncoderSpec::rand_k(k),
            decoder,
            normalize_node_updates: false,
        }
    }

    #[test]
    fn lossless_budget_matches_reference_bitwise() {
        let parts = mixture_parts(4, 20, 8, 3);
        let cfg = config(8, 12, TaskDecoder::RandK);
        let sim = power_iteration_sim(&cfg, &parts).unwrap();
        let reference = power_iteration_reference(&cfg, &parts).unwrap();
        for (a, b) in sim.iter().zip(&reference) {
            assert_eq!(a.task_loss.to_bits(), b.task_loss.to_bits());
            assert_eq!(a.est_mse, 0.0);
            assert_eq!(a.r2_over_r1.to_bits(), b.r2_over_r1.to_bits());
        }
    }

    #[test]
    fn lossless_budget_converges_to_principal_eigenvector() {
        let parts = mixture_parts(3, 30, 6, 5);
        let cfg = config(6, 60, TaskDecoder::RandK);
        let metrics = power_iteration_sim(&cfg, &parts).unwrap();
        assert!(metrics.last().unwrap().task_loss < 1e-9);
        // Loss decays geometrically once past the first few rounds.
        assert!(metrics[40].task_loss <= metrics[10].task_loss);
    }

    #[test]
    fn identical_data_pins_correlation_to_n_minus_1() {
        let data = synth_gaussian_mixture(30, 5, 2, 4.0, 9).unwrap();
        let parts = vec![data.clone(), data.clone(), data];
        let cfg = config(2, 4, TaskDecoder::SpatialMax);
        let metrics = power_iteration_sim(&cfg, &parts).unwrap();
        for row in &metrics {
            assert!((row.r2_over_r1 - 2.0).abs() < 1e-9, "rho = {}", row.r2_over_r1);
        }
    }

    #[test]
    fn determinism_and_seed_sensitivity() {
        let parts = mixture_parts(3, 10, 6, 11);
        let cfg = config(2, 5, TaskDecoder::SpatialAvg);
        let a = power_iteration_sim(&cfg, &parts).unwrap();
        let b = power_iteration_sim(&cfg, &parts).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.task_loss.to_bits(), y.task_loss.to_bits());
            assert_eq!(x.est_mse.to_bits(), y.est_mse.to_bits());
        }
        let other = PowerIterationConfig { seed: 18, ..cfg };
        let c = power_iteration_sim(&other, &parts).unwrap();
        assert_ne!(a[0].est_mse.to_bits(), c[0].est_mse.to_bits());
    }

    #[test]
    fn incompatible_pairing_is_rejected() {
        let parts = mixture_parts(2, 10, 4, 1);
        let mut cfg = config(2, 2, TaskDecoder::SpatialMax);
        cfg.encoder = EncoderSpec::top_k(2);
        assert!(matches!(
            power_iteration_sim(&cfg, &parts),
            Err(Error::Incompatible(_))
        ));
    }
}
