//! Quadratic consensus case study: node objectives F_i(w) =
//! (1/2)||w - e_i||^2 pull toward per-node targets, gradient descent on
//! the decoded mean gradient converges to the target average, and the
//! contraction envelope (1 - eta)^t G bounds the distance when the
//! learning rate respects the temporal decoder's guarantee.

use crate::analytics::{correlation_summary, eta_bound};
use crate::data::synth_case_study_targets;
use crate::error::{Error, Result};
use crate::rng;
use crate::sparsify::EncoderSpec;
use crate::tasks::{Aggregator, TaskDecoder};
use crate::types::{mean_vector, DenseVector, RoundMetrics};

/// Case-study settings; `eta: None` uses the contraction bound itself.
#[derive(Debug, Clone)]
pub struct QuadraticConfig {
    pub nodes: usize,
    pub dim: usize,
    pub k: usize,
    pub rounds: usize,
    pub seed: u64,
    pub eta: Option<f64>,
    pub encoder: EncoderSpec,
    pub decoder: TaskDecoder,
}

/// Runs the compressed case study. Each metrics row records task_loss =
/// ||w_t - w*||^2 after the round's step, the realized est_mse of the
/// decoded mean gradient, the gradient correlation, and the envelope
/// value for that round. The second return is the full envelope
/// [G, (1-eta)G, (1-eta)^2 G, ...], index aligned with round number.
pub fn quadratic_case_study(cfg: &QuadraticConfig) -> Result<(Vec<RoundMetrics>, Vec<f64>)> {
    run(cfg, true)
}

/// Uncompressed reference: exact gradient descent on the same targets.
pub fn quadratic_reference(cfg: &QuadraticConfig) -> Result<(Vec<RoundMetrics>, Vec<f64>)> {
    run(cfg, false)
}

fn run(cfg: &QuadraticConfig, compressed: bool) -> Result<(Vec<RoundMetrics>, Vec<f64>)> {
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
    let targets = synth_case_study_targets(cfg.nodes, cfg.dim, cfg.seed)?;
    let w_star = mean_vector(&targets)?;
    let bound = eta_bound(cfg.nodes, cfg.dim, cfg.k)?;
    let eta = cfg.eta.unwrap_or(bound);
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::Config(format!(
            "learning rate must be positive, got {eta}"
        )));
    }
    if eta > bound {
        eprintln!(
            "quadratic case study: eta {eta} exceeds the contraction bound {bound}; \
             the envelope guarantee does not apply"
        );
    }

    // G = ||w_0 - w*||^2 + (1/n) sum_i ||grad F_i(w*)||^2 with w_0 = 0.
    let drift: f64 = targets.iter().map(|e| w_star.dist_sq(e)).sum::<f64>()
        / cfg.nodes as f64;
    let g_constant = w_star.norm_sq() + drift;
    let envelope: Vec<f64> = (0..=cfg.rounds)
        .map(|t| (1.0 - eta).powi(t as i32) * g_constant)
        .collect();

    let mut w = vec![0.0; cfg.dim];
    let mut aggregator =
        compressed.then(|| Aggregator::new(cfg.decoder, cfg.nodes, cfg.dim, cfg.k));
    let mut metrics = Vec::with_capacity(cfg.rounds);

    for t in 1..=cfg.rounds {
        let gradients: Vec<DenseVector> = targets
            .iter()
            .map(|e| {
                DenseVector::new(
                    w.iter().zip(e.values()).map(|(wj, ej)| wj - ej).collect(),
                )
            })
            .collect::<Result<_>>()?;
        let rho = correlation_summary(&gradients)?.rho;
        let true_mean = mean_vector(&gradients)?;
        let estimate = match aggregator.as_mut() {
            Some(agg) => {
                let messages = gradients
                    .iter()
                    .enumerate()
                    .map(|(i, grad)| {
                        let mut stream =
                            rng::stream(cfg.seed, &format!("round.{t}.node.{i}"));
                        cfg.encoder.encode(grad, &mut stream)
                    })
                    .collect::<Result<Vec<_>>>()?;
                agg.decode_round(&messages, rho)?
            }
            None => true_mean.clone(),
        };
        let est_mse = estimate.dist_sq(&true_mean);

        for (wj, gj) in w.iter_mut().zip(estimate.values()) {
            *wj -= eta * gj;
        }
        let task_loss: f64 = w
            .iter()
            .zip(w_star.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();

        metrics.push(RoundMetrics {
            round: t,
            task_loss,
            est_mse,
            r2_over_r1: rho.unwrap_or(f64::NAN),
            extra: vec![("envelope".to_string(), envelope[t])],
        });
    }
    Ok((metrics, envelope))
}
