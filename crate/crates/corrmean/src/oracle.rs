//! Ground-truth machinery: exact expectations by exhaustive enumeration of
//! encoder outcomes, and seeded Monte Carlo with confidence intervals.
//!
//! Both paths are deterministic. Enumeration iterates outcome tuples with
//! a per-node odometer (node 0 slowest) and divides by the total weight
//! once at the end. Monte Carlo derives one rng stream per trial from the
//! (seed, trial) pair and reduces fixed-size chunks in chunk order, so the
//! result is independent of worker-thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimate::DecoderSpec;
use crate::rng;
use crate::sparsify::{self, EncoderKind, EncoderSpec};
use crate::types::{mean_vector, DenseVector, SparseMessage};

/// Largest enumerable outcome-tuple count before the combinatorial guard
/// trips and Monte Carlo is the only option.
pub const DEFAULT_PATTERN_LIMIT: u64 = 10_000_000;

/// Trials per Monte Carlo reduction chunk; fixed so the chunk boundaries
/// (and therefore the floating-point reduction order) never depend on the
/// worker count.
const MC_CHUNK: usize = 512;

/// Exact expectation results: per-coordinate bias of the decoder and its
/// mean squared error, plus the number of outcome tuples enumerated.
#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub bias: DenseVector,
    pub mse: f64,
    pub patterns: u64,
}

/// Monte Carlo results: average of the decoded estimates with its
/// per-coordinate standard error, and the MSE estimate with its standard
/// error. Standard errors are NaN at a single trial.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub mean_estimate: DenseVector,
    pub est_stderr: Vec<f64>,
    pub mse_hat: f64,
    pub stderr: f64,
}

fn combinations(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if c[i] < d - k + i {
                break;
            }
        }
        c[i] += 1;
        for j in i + 1..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// Every message one node's encoder can emit, with its probability weight.
/// Weights need not be normalized; enumeration divides by their total.
pub fn node_outcomes(
    x: &DenseVector,
    encoder: &EncoderSpec,
) -> Result<Vec<(SparseMessage, f64)>> {
    let d = x.dim();
    let k = encoder.k();
    match encoder.kind() {
        EncoderKind::RandK => {
            if k == 0 || k > d {
                return Err(Error::Budget { k, d });
            }
            combinations(d, k)
                .into_iter()
                .map(|idx| {
                    let values = idx.iter().map(|&j| x.values()[j]).collect();
                    Ok((SparseMessage::new(d, idx, values)?, 1.0))
                })
                .collect()
        }
        EncoderKind::TopK => Ok(vec![(sparsify::top_k_encode(x, k)?, 1.0)]),
        EncoderKind::Wangni => {
            let probs = sparsify::wangni_probabilities(x, k)?;
            let support: Vec<usize> = (0..d).filter(|&j| probs[j] > 0.0).collect();
            let mut out = Vec::with_capacity(1 << support.len());
            for mask in 0u64..(1u64 << support.len()) {
                let mut idx = Vec::new();
                let mut val = Vec::new();
                let mut weight = 1.0;
                for (bit, &j) in support.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        idx.push(j);
                        val.push(x.values()[j] / probs[j]);
                        weight *= probs[j];
                    } else {
                        weight *= 1.0 - probs[j];
                    }
                }
                out.push((SparseMessage::new(d, idx, val)?, weight));
            }
            Ok(out)
        }
        EncoderKind::Induced => {
            let k_top = encoder.induced_top_budget()?;
            let k_rand = k - k_top;
            let top = sparsify::top_k_encode(x, k_top)?;
            let mut residual = x.values().to_vec();
            for &j in top.indices() {
                residual[j] = 0.0;
            }
            let scale = d as f64 / k_rand as f64;
            combinations(d, k_rand)
                .into_iter()
                .map(|picks| {
                    let vals: Vec<f64> =
                        picks.iter().map(|&j| scale * residual[j]).collect();
                    let merged = merge_into(d, &top, &picks, &vals)?;
                    Ok((merged, 1.0))
                })
                .collect()
        }
    }
}

fn merge_into(
    d: usize,
    left: &SparseMessage,
    right_idx: &[usize],
    right_val: &[f64],
) -> Result<SparseMessage> {
    let mut indices = Vec::with_capacity(left.len() + right_idx.len());
    let mut values = Vec::with_capacity(left.len() + right_idx.len());
    let (li, lv) = (left.indices(), left.values());
    let (mut a, mut b) = (0usize, 0usize);
    while a < li.len() || b < right_idx.len() {
        if b >= right_idx.len() || (a < li.len() && li[a] < right_idx[b]) {
            indices.push(li[a]);
            values.push(lv[a]);
            a += 1;
        } else if a >= li.len() || right_idx[b] < li[a] {
            indices.push(right_idx[b]);
            values.push(right_val[b]);
            b += 1;
        } else {
            indices.push(li[a]);
            values.push(lv[a] + right_val[b]);
            a += 1;
            b += 1;
        }
    }
    SparseMessage::new(d, indices, values)
}

fn check_compat(encoder: &EncoderSpec, decoder: &DecoderSpec) -> Result<()> {
    if decoder.requires_raw() && !encoder.emits_raw_values() {
        return Err(Error::Incompatible(format!(
            "decoder {} needs raw values; encoder {} pre-scales",
            decoder.label(),
            encoder.label()
        )));
    }
    Ok(())
}

/// Exact bias and MSE of `decoder` under Rand-k encoding with budget `k`,
/// by enumerating all C(d,k)^n sampling patterns (guarded at
/// `DEFAULT_PATTERN_LIMIT`).
pub fn enumerate_exact(
    vectors: &[DenseVector],
    k: usize,
    decoder: &DecoderSpec,
) -> Result<Enumeration> {
    enumerate_encoder(
        vectors,
        &EncoderSpec::rand_k(k),
        decoder,
        DEFAULT_PATTERN_LIMIT,
    )
}

/// Exact bias and MSE for any encoder/decoder pair, enumerating the full
/// product of per-node outcome lists up to `limit` tuples.
pub fn enumerate_encoder(
    vectors: &[DenseVector],
    encoder: &EncoderSpec,
    decoder: &DecoderSpec,
    limit: u64,
) -> Result<Enumeration> {
    if vectors.is_empty() {
        return Err(Error::Empty("no vectors"));
    }
    check_compat(encoder, decoder)?;
    let outcomes: Vec<Vec<(SparseMessage, f64)>> = vectors
        .iter()
        .map(|x| node_outcomes(x, encoder))
        .collect::<Result<_>>()?;
    let mut patterns: u128 = 1;
    for list in &outcomes {
        patterns = patterns.saturating_mul(list.len() as u128);
    }
    if patterns > limit as u128 {
        return Err(Error::EnumerationTooLarge {
            patterns: patterns as f64,
            limit: limit as f64,
        });
    }
    let n = vectors.len();
    let k = encoder.k();
    let x_bar = mean_vector(vectors)?;
    let d = x_bar.dim();

    let mut idx = vec![0usize; n];
    let mut current: Vec<SparseMessage> =
        outcomes.iter().map(|list| list[0].0.clone()).collect();
    let mut sum_est = vec![0.0; d];
    let mut sum_err = 0.0;
    let mut total_weight = 0.0;
    loop {
        let weight: f64 = idx
            .iter()
            .zip(&outcomes)
            .map(|(&i, list)| list[i].1)
            .product();
        let estimate = decoder.decode(&current, k)?;
        for (s, e) in sum_est.iter_mut().zip(estimate.values()) {
            *s += weight * e;
        }
        sum_err += weight * estimate.dist_sq(&x_bar);
        total_weight += weight;

        // Odometer step, last node fastest.
        let mut node = n;
        loop {
            if node == 0 {
                let bias: Vec<f64> = sum_est
                    .iter()
                    .zip(x_bar.values())
                    .map(|(s, m)| s / total_weight - m)
                    .collect();
                return Ok(Enumeration {
                    bias: DenseVector::new(bias)?,
                    mse: sum_err / total_weight,
                    patterns: patterns as u64,
                });
            }
            node -= 1;
            idx[node] += 1;
            if idx[node] < outcomes[node].len() {
                current[node] = outcomes[node][idx[node]].0.clone();
                break;
            }
            idx[node] = 0;
            current[node] = outcomes[node][0].0.clone();
        }
    }
}

struct ChunkPartial {
    sum_est: Vec<Vec<f64>>,
    sum_est_sq: Vec<Vec<f64>>,
    sum_err: Vec<f64>,
    sum_err_sq: Vec<f64>,
}

/// Seeded Monte Carlo estimate of decoder bias/MSE; `trials` independent
/// rounds of encoding all nodes and decoding once.
pub fn monte_carlo(
    vectors: &[DenseVector],
    encoder: &EncoderSpec,
    decoder: &DecoderSpec,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    let mut results = monte_carlo_multi(
        vectors,
        encoder,
        std::slice::from_ref(decoder),
        trials,
        seed,
    )?;
    Ok(results.remove(0))
}

/// Monte Carlo for several decoders sharing the same encoded draws, so
/// per-point decoder comparisons see identical sampling randomness.
pub fn monte_carlo_multi(
    vectors: &[DenseVector],
    encoder: &EncoderSpec,
    decoders: &[DecoderSpec],
    trials: usize,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    if vectors.is_empty() {
        return Err(Error::Empty("no vectors"));
    }
    if decoders.is_empty() {
        return Err(Error::Empty("no decoders"));
    }
    if trials == 0 {
        return Err(Error::Empty("trials"));
    }
    for decoder in decoders {
        check_compat(encoder, decoder)?;
    }
    let x_bar = mean_vector(vectors)?;
    let d = x_bar.dim();
    let k = encoder.k();
    let chunks = trials.div_ceil(MC_CHUNK);

    let partials: Vec<Result<ChunkPartial>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * MC_CHUNK;
            let hi = ((chunk + 1) * MC_CHUNK).min(trials);
            let mut part = ChunkPartial {
                sum_est: vec![vec![0.0; d]; decoders.len()],
                sum_est_sq: vec![vec![0.0; d]; decoders.len()],
                sum_err: vec![0.0; decoders.len()],
                sum_err_sq: vec![0.0; decoders.len()],
            };
            let mut messages = Vec::with_capacity(vectors.len());
            for trial in lo..hi {
                let mut stream = rng::stream(seed, &format!("mc.{trial}"));
                messages.clear();
                for x in vectors {
                    messages.push(encoder.encode(x, &mut stream)?);
                }
                for (which, decoder) in decoders.iter().enumerate() {
                    let estimate = decoder.decode(&messages, k)?;
                    let err = estimate.dist_sq(&x_bar);
                    part.sum_err[which] += err;
                    part.sum_err_sq[which] += err * err;
                    for (j, e) in estimate.values().iter().enumerate() {
                        part.sum_est[which][j] += e;
                        part.sum_est_sq[which][j] += e * e;
                    }
                }
            }
            Ok(part)
        })
        .collect();

    let mut sum_est = vec![vec![0.0; d]; decoders.len()];
    let mut sum_est_sq = vec![vec![0.0; d]; decoders.len()];
    let mut sum_err = vec![0.0; decoders.len()];
    let mut sum_err_sq = vec![0.0; decoders.len()];
    for partial in partials {
        let partial = partial?;
        for which in 0..decoders.len() {
            sum_err[which] += partial.sum_err[which];
            sum_err_sq[which] += partial.sum_err_sq[which];
            for j in 0..d {
                sum_est[which][j] += partial.sum_est[which][j];
                sum_est_sq[which][j] += partial.sum_est_sq[which][j];
            }
        }
    }

    let nt = trials as f64;
    (0..decoders.len())
        .map(|which| {
            let mse_hat = sum_err[which] / nt;
            let stderr = if trials < 2 {
                f64::NAN
            } else {
                let var = (sum_err_sq[which] - nt * mse_hat * mse_hat) / (nt - 1.0);
                (var.max(0.0) / nt).sqrt()
            };
            let mean: Vec<f64> = sum_est[which].iter().map(|s| s / nt).collect();
            let est_stderr: Vec<f64> = if trials < 2 {
                vec![f64::NAN; d]
            } else {
                (0..d)
                    .map(|j| {
                        let var =
                            (sum_est_sq[which][j] - nt * mean[j] * mean[j]) / (nt - 1.0);
                        (var.max(0.0) / nt).sqrt()
                    })
                    .collect()
            };
            Ok(McEstimate {
                mean_estimate: DenseVector::new(mean)?,
                est_stderr,
                mse_hat,
                stderr,
            })
        })
        .collect()
}
