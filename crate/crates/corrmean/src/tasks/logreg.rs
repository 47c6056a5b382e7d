//! Distributed multinomial logistic regression: nodes send sparsified
//! mini-batch softmax cross-entropy gradients of the flattened weight
//! matrix and the server applies the decoded mean as a gradient step.

use rand::seq::index::sample;

use crate::analytics::correlation_summary;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::sparsify::EncoderSpec;
use crate::tasks::{Aggregator, TaskDecoder};
use crate::types::{mean_vector, DenseVector, RoundMetrics};

#[derive(Debug, Clone)]
pub struct LogRegConfig {
    pub k: usize,
    pub rounds: usize,
    pub seed: u64,
    pub eta: f64,
    pub batch: usize,
    pub classes: usize,
    pub encoder: EncoderSpec,
    pub decoder: TaskDecoder,
}

/// Class scores of one sample under class-major flattened weights
/// w[c * features + f].
fn logits(w: &[f64], x: &[f64], classes: usize) -> Vec<f64> {
    let features = x.len();
    (0..classes)
        .map(|c| {
            let row = &w[c * features..(c + 1) * features];
            row.iter().zip(x).map(|(wf, xf)| wf * xf).sum()
        })
        .collect()
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    m + z.iter().map(|&v| (v - m).exp()).sum::<f64>().ln()
}

/// Mean cross-entropy over the rows of every part.
fn global_loss(w: &[f64], parts: &[Dataset], classes: usize) -> f64 {
    let mut total = 0.0;
    let mut rows = 0usize;
    for part in parts {
        for (x, &y) in part.rows().iter().zip(part.labels()) {
            let z = logits(w, x.values(), classes);
            total += log_sum_exp(&z) - z[y];
            rows += 1;
        }
    }
    total / rows as f64
}

/// Fraction of rows whose top score lands on the true class (lowest
/// class index on ties).
fn accuracy(w: &[f64], data: &Dataset, classes: usize) -> f64 {
    let mut hits = 0usize;
    for (x, &y) in data.rows().iter().zip(data.labels()) {
        let z = logits(w, x.values(), classes);
        let mut best = 0;
        for (c, &v) in z.iter().enumerate().skip(1) {
            if v > z[best] {
                best = c;
            }
        }
        if best == y {
            hits += 1;
        }
    }
    hits as f64 / data.len() as f64
}

/// Mini-batch gradient of the mean cross-entropy at one node.
fn batch_gradient(w: &[f64], part: &Dataset, batch: &[usize], classes: usize) -> DenseVector {
    let features = part.dim();
    let mut grad = vec![0.0; w.len()];
    for &idx in batch {
        let x = part.rows()[idx].values();
        let y = part.labels()[idx];
        let z = logits(w, x, classes);
        let lse = log_sum_exp(&z);
        for c in 0..classes {
            let p = (z[c] - lse).exp();
            let residual = if c == y { p - 1.0 } else { p };
            let row = &mut grad[c * features..(c + 1) * features];
            for (g, xf) in row.iter_mut().zip(x) {
                *g += residual * xf;
            }
        }
    }
    let b = batch.len() as f64;
    for g in &mut grad {
        *g /= b;
    }
    DenseVector::new(grad).expect("finite gradient")
}

/// Runs compressed distributed training. task_loss is the global
/// training cross-entropy after the round's step; est_mse the realized
/// squared decoding error of the mean gradient; r2_over_r1 the gradient
/// correlation; a held-out set adds a test_acc column. Aborts with a
/// divergence error when the loss passes 1000 times its initial value.
pub fn logreg_sim(
    cfg: &LogRegConfig,
    parts: &[Dataset],
    test: Option<&Dataset>,
) -> Result<Vec<RoundMetrics>> {
    run(cfg, parts, test, true)
}

/// Uncompressed reference: identical trajectory except the server
/// averages the exact node gradients.
pub fn logreg_reference(
    cfg: &LogRegConfig,
    parts: &[Dataset],
    test: Option<&Dataset>,
) -> Result<Vec<RoundMetrics>> {
    run(cfg, parts, test, false)
}

fn run(
    cfg: &LogRegConfig,
    parts: &[Dataset],
    test: Option<&Dataset>,
    compressed: bool,
) -> Result<Vec<RoundMetrics>> {
    if cfg.rounds == 0 {
        return Err(Error::Config("rounds must be at least 1".into()));
    }
    if cfg.classes < 2 {
        return Err(Error::Config("need at least 2 classes".into()));
    }
    if !(cfg.eta.is_finite() && cfg.eta > 0.0) {
        return Err(Error::Config(format!(
            "learning rate must be positive, got {}",
            cfg.eta
        )));
    }
    if cfg.batch == 0 {
        return Err(Error::Empty("batch size"));
    }
    if compressed && !cfg.decoder.compatible_with(&cfg.encoder) {
        return Err(Error::Incompatible(format!(
            "{} decoder cannot read {} messages",
            cfg.decoder.label(),
            cfg.encoder.label()
        )));
    }
    let first = parts.first().ok_or(Error::Empty("data partitions"))?;
    let features = first.dim();
    for part in parts {
        if part.dim() != features {
            return Err(Error::DimensionMismatch {
                expected: features,
                found: part.dim(),
            });
        }
    }
    for labels in parts
        .iter()
        .map(Dataset::labels)
        .chain(test.map(Dataset::labels))
    {
        if let Some(&bad) = labels.iter().find(|&&l| l >= cfg.classes) {
            return Err(Error::Data(format!(
                "label {bad} out of range for {} classes",
                cfg.classes
            )));
        }
    }

    let n = parts.len();
    let d_model = features * cfg.classes;
    let mut w = vec![0.0; d_model];
    let initial = global_loss(&w, parts, cfg.classes);
    let mut aggregator = compressed.then(|| Aggregator::new(cfg.decoder, n, d_model, cfg.k));
    let mut metrics = Vec::with_capacity(cfg.rounds);

    for t in 1..=cfg.rounds {
        let mut gradients = Vec::with_capacity(n);
        let mut messages = Vec::with_capacity(n);
        for (i, part) in parts.iter().enumerate() {
            let mut stream = rng::stream(cfg.seed, &format!("round.{t}.node.{i}"));
            let batch: Vec<usize> = if cfg.batch >= part.len() {
                (0..part.len()).collect()
            } else {
                let mut picks = sample(&mut stream, part.len(), cfg.batch).into_vec();
                picks.sort_unstable();
                picks
            };
            let grad = batch_gradient(&w, part, &batch, cfg.classes);
            if compressed {
                messages.push(cfg.encoder.encode(&grad, &mut stream)?);
            }
            gradients.push(grad);
        }
        let rho = correlation_summary(&gradients)?.rho;
        let true_mean = mean_vector(&gradients)?;
        let estimate = match aggregator.as_mut() {
            Some(agg) => agg.decode_round(&messages, rho)?,
            None => true_mean.clone(),
        };
        let est_mse = estimate.dist_sq(&true_mean);

        for (wj, gj) in w.iter_mut().zip(estimate.values()) {
            *wj -= cfg.eta * gj;
        }

        let task_loss = global_loss(&w, parts, cfg.classes);
        if !task_loss.is_finite() || task_loss > 1e3 * initial {
            return Err(Error::Diverged {
                round: t,
                loss: task_loss,
                initial,
            });
        }
        let extra = match test {
            Some(holdout) => vec![(
                "test_acc".to_string(),
                accuracy(&w, holdout, cfg.classes),
            )],
            None => Vec::new(),
        };
        metrics.push(RoundMetrics {
            round: t,
            task_loss,
            est_mse,
            r2_over_r1: rho.unwrap_or(f64::NAN),
            extra,
        });
    }
    Ok(metrics)
}
