//! Distributed Lloyd clustering: nodes assign local points and send
//! sparsified per-cluster means; the server averages them weighted by
//! exact (uncompressed) local counts and moves the centers.

use crate::analytics::correlation_summary;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::sparsify::EncoderSpec;
use crate::tasks::{Aggregator, TaskDecoder};
use crate::types::{weighted_mean_vector, DenseVector, RoundMetrics, SparseMessage};

#[derive(Debug, Clone)]
pub struct KMeansConfig {
    pub k: usize,
    pub clusters: usize,
    pub rounds: usize,
    pub seed: u64,
    pub encoder: EncoderSpec,
    pub decoder: TaskDecoder,
}

/// Index of the nearest center, lowest index on ties.
fn nearest_center(x: &DenseVector, centers: &[DenseVector]) -> usize {
    let mut best = 0;
    let mut best_dist = x.dist_sq(&centers[0]);
    for (c, center) in centers.iter().enumerate().skip(1) {
        let dist = x.dist_sq(center);
        if dist < best_dist {
            best = c;
            best_dist = dist;
        }
    }
    best
}

/// Local Lloyd statistics for one node: per-cluster mean and count.
fn local_updates(
    part: &Dataset,
    centers: &[DenseVector],
) -> (Vec<DenseVector>, Vec<usize>) {
    let clusters = centers.len();
    let d = centers[0].dim();
    let mut sums = vec![vec![0.0; d]; clusters];
    let mut counts = vec![0usize; clusters];
    for row in part.rows() {
        let c = nearest_center(row, centers);
        counts[c] += 1;
        for (a, v) in sums[c].iter_mut().zip(row.values()) {
            *a += v;
        }
    }
    let means = sums
        .into_iter()
        .zip(&counts)
        .map(|(mut sum, &count)| {
            if count > 0 {
                for v in &mut sum {
                    *v /= count as f64;
                }
            }
            DenseVector::new(sum).expect("finite cluster mean")
        })
        .collect();
    (means, counts)
}

/// Mean squared distance from every row to its nearest center.
fn clustering_loss(parts: &[Dataset], centers: &[DenseVector]) -> f64 {
    let mut total = 0.0;
    let mut rows = 0usize;
    for part in parts {
        for row in part.rows() {
            total += row.dist_sq(&centers[nearest_center(row, centers)]);
            rows += 1;
        }
    }
    total / rows as f64
}

/// Runs compressed distributed Lloyd clustering. task_loss is the mean
/// squared distance to the nearest center after the round's update;
/// est_mse and r2_over_r1 average over the clusters that received any
/// points (rho over those where it is defined).
pub fn kmeans_sim(cfg: &KMeansConfig, parts: &[Dataset]) -> Result<Vec<RoundMetrics>> {
    run(cfg, parts, true)
}

/// Uncompressed reference: identical trajectory except centers move to
/// the exact count-weighted mean of the node cluster means.
pub fn kmeans_reference(cfg: &KMeansConfig, parts: &[Dataset]) -> Result<Vec<RoundMetrics>> {
    run(cfg, parts, false)
}

fn run(cfg: &KMeansConfig, parts: &[Dataset], compressed: bool) -> Result<Vec<RoundMetrics>> {
    if cfg.rounds == 0 {
        return Err(Error::Config("rounds must be at least 1".into()));
    }
    if cfg.clusters == 0 {
        return Err(Error::Empty("cluster count"));
    }
    if compressed && !cfg.decoder.compatible_with(&cfg.encoder) {
        return Err(Error::Incompatible(format!(
            "{} decoder cannot read {} messages",
            cfg.decoder.label(),
            cfg.encoder.label()
        )));
    }
    let first = parts.first().ok_or(Error::Empty("data partitions"))?;
    let d = first.dim();
    for part in parts {
        if part.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: part.dim(),
            });
        }
    }
    let n = parts.len();
    let total_rows: usize = parts.iter().map(Dataset::len).sum();
    if cfg.clusters > total_rows {
        return Err(Error::Config(format!(
            "{} clusters need at least that many data points, have {total_rows}",
            cfg.clusters
        )));
    }

    // Centers start at randomly chosen data points (distinct positions in
    // the node-order concatenation of the shards).
    let pooled: Vec<&DenseVector> = parts.iter().flat_map(|p| p.rows().iter()).collect();
    let mut picks = rand::seq::index::sample(
        &mut rng::stream(cfg.seed, "centers"),
        total_rows,
        cfg.clusters,
    )
    .into_vec();
    picks.sort_unstable();
    let mut centers: Vec<DenseVector> = picks.iter().map(|&i| pooled[i].clone()).collect();

    let mut aggregators: Vec<Aggregator> = (0..cfg.clusters)
        .map(|_| Aggregator::new(cfg.decoder, n, d, cfg.k))
        .collect();
    let mut metrics = Vec::with_capacity(cfg.rounds);

    for t in 1..=cfg.rounds {
        let locals: Vec<(Vec<DenseVector>, Vec<usize>)> =
            parts.iter().map(|p| local_updates(p, &centers)).collect();

        // Every node encodes every cluster mean in ascending cluster
        // order from its single round stream, so the draw sequence does
        // not depend on which clusters end up empty elsewhere.
        let encoded: Vec<Vec<SparseMessage>> = if compressed {
            locals
                .iter()
                .enumerate()
                .map(|(i, (means, _))| {
                    let mut stream = rng::stream(cfg.seed, &format!("round.{t}.node.{i}"));
                    means
                        .iter()
                        .map(|mean| cfg.encoder.encode(mean, &mut stream))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };

        let mut mse_sum = 0.0;
        let mut mse_count = 0usize;
        let mut rho_sum = 0.0;
        let mut rho_count = 0usize;
        for c in 0..cfg.clusters {
            let weight_total: usize = locals.iter().map(|(_, counts)| counts[c]).sum();
            if weight_total == 0 {
                continue;
            }
            let wfracs: Vec<f64> = locals
                .iter()
                .map(|(_, counts)| counts[c] as f64 / weight_total as f64)
                .collect();
            let means: Vec<DenseVector> =
                locals.iter().map(|(m, _)| m[c].clone()).collect();
            let rho = correlation_summary(&means)?.rho;
            let truth = weighted_mean_vector(&means, &wfracs)?;
            let estimate = if compressed {
                let messages: Vec<SparseMessage> =
                    encoded.iter().map(|per_node| per_node[c].clone()).collect();
                aggregators[c].decode_round_weighted(&messages, &wfracs, rho)?
            } else {
                truth.clone()
            };
            mse_sum += estimate.dist_sq(&truth);
            mse_count += 1;
            if let Some(r) = rho {
                rho_sum += r;
                rho_count += 1;
            }
            centers[c] = estimate;
        }

        metrics.push(RoundMetrics {
            round: t,
            task_loss: clustering_loss(parts, &centers),
            est_mse: mse_sum / mse_count as f64,
            r2_over_r1: if rho_count > 0 {
                rho_sum / rho_count as f64
            } else {
                f64::NAN
            },
            extra: Vec::new(),
        });
    }
    Ok(metrics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{split_iid, synth_gaussian_mixture};

    fn config(k: usize, clusters: usize, rounds: usize, decoder: TaskDecoder) -> KMeansConfig {
        KMeansConfig {
            k,
            clusters,
            rounds,
            seed: 23,
            encoder: EncoderSpec::rand_k(k),
            decoder,
        }
    }

    #[test]
    fn single_node_lossless_run_is_exact_lloyd() {
        let data = synth_gaussian_mixture(60, 4, 3, 5.0, 2).unwrap();
        let parts = vec![data];
        let metrics = kmeans_sim(&config(4, 3, 15, TaskDecoder::RandK), &parts).unwrap();
        for w in metrics.windows(2) {
            assert!(
                w[1].task_loss <= w[0].task_loss + 1e-12,
                "loss rose: {} -> {}",
                w[0].task_loss,
                w[1].task_loss
            );
        }
        for row in &metrics {
            assert_eq!(row.est_mse, 0.0);
        }
    }

    #[test]
    fn two_point_masses_converge_within_two_rounds() {
        let mass = |v: f64, count: usize| -> Vec<DenseVector> {
            (0..count)
                .map(|_| DenseVector::new(vec![v, v]).unwrap())
                .collect()
        };
        let mut rows = mass(5.0, 4);
        rows.extend(mass(-5.0, 4));
        let labels = vec![0; 4].into_iter().chain(vec![1; 4]).collect();
        let data = Dataset::new(rows, labels).unwrap();
        let parts = vec![data];
        let metrics = kmeans_sim(&config(2, 2, 2, TaskDecoder::RandK), &parts).unwrap();
        assert_eq!(metrics[1].task_loss, 0.0);
    }

    #[test]
    fn lossless_budget_matches_reference_bitwise() {
        let data = synth_gaussian_mixture(90, 6, 3, 4.0, 7).unwrap();
        let parts = split_iid(&data, 3, 7).unwrap();
        let cfg = config(6, 3, 10, TaskDecoder::RandK);
        let sim = kmeans_sim(&cfg, &parts).unwrap();
        let reference = kmeans_reference(&cfg, &parts).unwrap();
        for (a, b) in sim.iter().zip(&reference) {
            assert_eq!(a.task_loss.to_bits(), b.task_loss.to_bits());
            assert_eq!(a.est_mse, 0.0);
        }
    }

    #[test]
    fn compressed_run_is_deterministic() {
        let data = synth_gaussian_mixture(80, 8, 4, 4.0, 13).unwrap();
        let parts = split_iid(&data, 4, 13).unwrap();
        let cfg = config(2, 4, 6, TaskDecoder::Temporal { shared: false });
        let a = kmeans_sim(&cfg, &parts).unwrap();
        let b = kmeans_sim(&cfg, &parts).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.task_loss.to_bits(), y.task_loss.to_bits());
            assert_eq!(x.est_mse.to_bits(), y.est_mse.to_bits());
        }
    }

    #[test]
    fn unequal_node_sizes_use_count_weights() {
        // One node holds 3 of the 4 points of cluster 0; at k = d the
        // decoded center must be the count-weighted mean, not the plain
        // node average.
        let rows_a = vec![
            DenseVector::new(vec![1.0, 0.0]).unwrap(),
            DenseVector::new(vec![3.0, 0.0]).unwrap(),
            DenseVector::new(vec![5.0, 0.0]).unwrap(),
        ];
        let rows_b = vec![DenseVector::new(vec![-1.0, 0.0]).unwrap()];
        let part_a = Dataset::new(rows_a, vec![0, 0, 0]).unwrap();
        let part_b = Dataset::new(rows_b, vec![0]).unwrap();
        let metrics = kmeans_sim(
            &config(2, 1, 1, TaskDecoder::RandK),
            &[part_a, part_b],
        )
        .unwrap();
        // Weighted mean of all four points is 2.0; the node-average mean
        // would be (3 + -1)/2 = 1.0. Loss identifies which one we hit.
        let expected = [1.0f64, 3.0, 5.0, -1.0]
            .iter()
            .map(|v| (v - 2.0) * (v - 2.0))
            .sum::<f64>()
            / 4.0;
        assert!((metrics[0].task_loss - expected).abs() < 1e-12);
    }
}
