//! Round-based task simulations over the encode/decode protocol: power
//! iteration, Lloyd clustering, softmax regression, the quadratic case
//! study, and the correlation sweep. Rounds run strictly in sequence;
//! every random draw comes from a labeled stream of the master seed, so
//! a run is a pure function of its configuration.

pub mod kmeans;
pub mod logreg;
pub mod power_iteration;
pub mod quadratic;
pub mod sweep;

use crate::error::Result;
use crate::estimate;
use crate::sparsify::EncoderSpec;
use crate::types::{DenseVector, ServerMemory, SparseMessage, TFunctionSpec};

/// Decoder selection for a task run. `SpatialOpt` re-tunes its scaling
/// function to each round's measured correlation; `Temporal` carries
/// server memory across rounds, per node or as one shared vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskDecoder {
    RandK,
    Prescaled,
    SpatialMax,
    SpatialAvg,
    SpatialOpt,
    Temporal { shared: bool },
}

impl TaskDecoder {
    /// Whether this decoder needs raw coordinate values on the wire.
    pub fn requires_raw(self) -> bool {
        !matches!(self, TaskDecoder::Prescaled)
    }

    /// True when the encoder's wire format matches what this decoder
    /// expects: raw values for the Rand-k family, pre-scaled values for
    /// the pass-through decoder.
    pub fn compatible_with(self, encoder: &EncoderSpec) -> bool {
        self.requires_raw() == encoder.emits_raw_values()
    }

    pub fn label(self) -> &'static str {
        match self {
            TaskDecoder::RandK => "rand_k",
            TaskDecoder::Prescaled => "prescaled",
            TaskDecoder::SpatialMax => "spatial_max",
            TaskDecoder::SpatialAvg => "spatial_avg",
            TaskDecoder::SpatialOpt => "spatial_opt",
            TaskDecoder::Temporal { shared: false } => "temporal",
            TaskDecoder::Temporal { shared: true } => "temporal_shared",
        }
    }
}

/// Clamps a measured correlation ratio into the attainable [-1, n-1]
/// range; rounding can spill a hair past either end and the optimally
/// tuned scaling function rejects out-of-range values.
pub fn clamp_rho(rho: f64, n: usize) -> f64 {
    rho.clamp(-1.0, (n - 1) as f64)
}

/// Server-side decoding state for one mean-estimation slot: the decoder
/// kind, the round budget, and any memory carried across rounds.
#[derive(Debug, Clone)]
pub struct Aggregator {
    decoder: TaskDecoder,
    n: usize,
    k: usize,
    memory: Option<ServerMemory>,
}

impl Aggregator {
    pub fn new(decoder: TaskDecoder, n: usize, d: usize, k: usize) -> Self {
        let memory = match decoder {
            TaskDecoder::Temporal { shared: false } => {
                Some(ServerMemory::per_node_zeros(n, d))
            }
            TaskDecoder::Temporal { shared: true } => Some(ServerMemory::shared_zeros(d)),
            _ => None,
        };
        Self {
            decoder,
            n,
            k,
            memory,
        }
    }

    pub fn decoder(&self) -> TaskDecoder {
        self.decoder
    }

    /// Current memory snapshot, if this decoder keeps one.
    pub fn memory(&self) -> Option<&ServerMemory> {
        self.memory.as_ref()
    }

    /// Decodes one round's messages into a mean estimate, then applies
    /// the decoder's memory update. `rho` tunes the correlation-aware
    /// decoder (falling back to plain Rand-k decoding when undefined)
    /// and is ignored by the others.
    pub fn decode_round(
        &mut self,
        messages: &[SparseMessage],
        rho: Option<f64>,
    ) -> Result<DenseVector> {
        match self.decoder {
            TaskDecoder::RandK => estimate::decode_rand_k(messages, self.k),
            TaskDecoder::Prescaled => estimate::decode_prescaled(messages),
            TaskDecoder::SpatialMax => estimate::decode_rand_k_spatial(
                messages,
                self.k,
                &TFunctionSpec::spatial_max(self.n),
            ),
            TaskDecoder::SpatialAvg => estimate::decode_rand_k_spatial(
                messages,
                self.k,
                &TFunctionSpec::spatial_avg(self.n),
            ),
            TaskDecoder::SpatialOpt => match rho {
                Some(r) => estimate::decode_rand_k_spatial(
                    messages,
                    self.k,
                    &TFunctionSpec::spatial_opt(self.n, clamp_rho(r, self.n)),
                ),
                None => estimate::decode_rand_k(messages, self.k),
            },
            TaskDecoder::Temporal { shared } => {
                let memory = self.memory.as_ref().expect("temporal aggregator holds memory");
                let estimate_vec = estimate::decode_rand_k_temporal(messages, self.k, memory)?;
                let memory = self.memory.as_mut().expect("temporal aggregator holds memory");
                if shared {
                    estimate::memory_update_shared(memory, &estimate_vec)?;
                } else {
                    estimate::memory_update_per_node(memory, messages)?;
                }
                Ok(estimate_vec)
            }
        }
    }

    /// Weighted variant of `decode_round`; `wfracs` are non-negative
    /// node weight fractions summing to 1 (or all zero).
    pub fn decode_round_weighted(
        &mut self,
        messages: &[SparseMessage],
        wfracs: &[f64],
        rho: Option<f64>,
    ) -> Result<DenseVector> {
        match self.decoder {
            TaskDecoder::RandK => estimate::decode_rand_k_weighted(messages, self.k, wfracs),
            TaskDecoder::Prescaled => estimate::decode_prescaled_weighted(messages, wfracs),
            TaskDecoder::SpatialMax => estimate::decode_rand_k_spatial_weighted(
                messages,
                self.k,
                &TFunctionSpec::spatial_max(self.n),
                wfracs,
            ),
            TaskDecoder::SpatialAvg => estimate::decode_rand_k_spatial_weighted(
                messages,
                self.k,
                &TFunctionSpec::spatial_avg(self.n),
                wfracs,
            ),
            TaskDecoder::SpatialOpt => match rho {
                Some(r) => estimate::decode_rand_k_spatial_weighted(
                    messages,
                    self.k,
                    &TFunctionSpec::spatial_opt(self.n, clamp_rho(r, self.n)),
                    wfracs,
                ),
                None => estimate::decode_rand_k_weighted(messages, self.k, wfracs),
            },
            TaskDecoder::Temporal { shared } => {
                let memory = self.memory.as_ref().expect("temporal aggregator holds memory");
                let estimate_vec =
                    estimate::decode_rand_k_temporal_weighted(messages, self.k, memory, wfracs)?;
                let memory = self.memory.as_mut().expect("temporal aggregator holds memory");
                if shared {
                    estimate::memory_update_shared(memory, &estimate_vec)?;
                } else {
                    estimate::memory_update_per_node(memory, messages)?;
                }
                Ok(estimate_vec)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::types::mean_vector;
    use rand::Rng as _;

    fn dv(values: &[f64]) -> DenseVector {
        DenseVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn compatibility_matrix() {
        let raw = EncoderSpec::rand_k(2);
        let scaled = EncoderSpec::wangni(2);
        assert!(TaskDecoder::RandK.compatible_with(&raw));
        assert!(TaskDecoder::SpatialAvg.compatible_with(&raw));
        assert!(TaskDecoder::Temporal { shared: true }.compatible_with(&raw));
        assert!(!TaskDecoder::Prescaled.compatible_with(&raw));
        assert!(TaskDecoder::Prescaled.compatible_with(&scaled));
        assert!(!TaskDecoder::SpatialMax.compatible_with(&scaled));
    }

    #[test]
    fn clamp_rho_guards_both_ends() {
        assert_eq!(clamp_rho(-1.0000000001, 4), -1.0);
        assert_eq!(clamp_rho(3.0000000001, 4), 3.0);
        assert_eq!(clamp_rho(1.5, 4), 1.5);
    }

    #[test]
    fn temporal_aggregator_updates_memory_between_rounds() {
        let vectors = [dv(&[2.0, 4.0]), dv(&[6.0, 8.0])];
        let encoder = EncoderSpec::rand_k(2);
        let mut agg = Aggregator::new(TaskDecoder::Temporal { shared: false }, 2, 2, 2);
        let mut stream = rng::stream(0, "test");
        let messages: Vec<_> = vectors
            .iter()
            .map(|x| encoder.encode(x, &mut stream).unwrap())
            .collect();
        let est = agg.decode_round(&messages, None).unwrap();
        let mean = mean_vector(&vectors).unwrap();
        // k = d with zero memory reduces to the plain mean.
        assert_eq!(est.values(), mean.values());
        // Full-budget messages write the exact node vectors into memory.
        let mem = agg.memory().unwrap();
        assert_eq!(mem.node_view(0).values(), vectors[0].values());
        assert_eq!(mem.node_view(1).values(), vectors[1].values());
    }

    #[test]
    fn shared_temporal_memory_holds_last_estimate() {
        let vectors = [dv(&[2.0, 4.0]), dv(&[6.0, 8.0])];
        let encoder = EncoderSpec::rand_k(2);
        let mut agg = Aggregator::new(TaskDecoder::Temporal { shared: true }, 2, 2, 2);
        let mut stream = rng::stream(1, "test");
        let messages: Vec<_> = vectors
            .iter()
            .map(|x| encoder.encode(x, &mut stream).unwrap())
            .collect();
        let est = agg.decode_round(&messages, None).unwrap();
        assert_eq!(agg.memory().unwrap().node_view(1).values(), est.values());
    }

    #[test]
    fn opt_decoder_without_rho_matches_plain_decoding() {
        let vectors = [dv(&[1.0, 2.0, 3.0]), dv(&[-1.0, 0.5, 2.0])];
        let encoder = EncoderSpec::rand_k(2);
        let mut stream = rng::stream(3, "test");
        let messages: Vec<_> = vectors
            .iter()
            .map(|x| encoder.encode(x, &mut stream).unwrap())
            .collect();
        let mut opt = Aggregator::new(TaskDecoder::SpatialOpt, 2, 3, 2);
        let mut plain = Aggregator::new(TaskDecoder::RandK, 2, 3, 2);
        let a = opt.decode_round(&messages, None).unwrap();
        let b = plain.decode_round(&messages, None).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn weighted_and_unweighted_agree_at_uniform_weights() {
        let vectors = [dv(&[1.0, -2.0, 0.5, 3.0]), dv(&[0.25, 1.0, -1.0, 2.0])];
        let encoder = EncoderSpec::rand_k(2);
        for decoder in [
            TaskDecoder::RandK,
            TaskDecoder::SpatialMax,
            TaskDecoder::SpatialAvg,
            TaskDecoder::SpatialOpt,
            TaskDecoder::Temporal { shared: false },
        ] {
            let mut stream = rng::stream(9, "test");
            let messages: Vec<_> = vectors
                .iter()
                .map(|x| encoder.encode(x, &mut stream).unwrap())
                .collect();
            let rho = Some(stream.gen_range(-0.5..0.5));
            let mut a = Aggregator::new(decoder, 2, 4, 2);
            let mut b = Aggregator::new(decoder, 2, 4, 2);
            let plain = a.decode_round(&messages, rho).unwrap();
            let weighted = b.decode_round_weighted(&messages, &[0.5, 0.5], rho).unwrap();
            for (x, y) in plain.values().iter().zip(weighted.values()) {
                assert!((x - y).abs() < 1e-12, "{} differs", decoder.label());
            }
        }
    }
}
