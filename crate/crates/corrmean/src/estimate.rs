//! Server-side decoders: plain Rand-k averaging, the hit-count-aware
//! spatial family, the memory-based temporal decoder, and pass-through
//! averaging for pre-scaled encoders.
//!
//! Every decoder folds its scaling into each term (acc += factor * value)
//! and divides by n once at the end, in ascending node order. That makes
//! the spatial decoder with T identically 1 bit-identical to the plain
//! Rand-k decoder, and the temporal decoder with zero memory bit-identical
//! as well.

use crate::binom;
use crate::error::{Error, Result};
use crate::types::{hit_counts, DenseVector, ServerMemory, SparseMessage, TFunctionSpec};

/// The unbiasedness constant of a spatial decoder, with the degenerate
/// zero-estimator flag for T functions that vanish somewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaBar {
    pub value: f64,
    pub degenerate: bool,
}

/// Normalization constant for a spatial family member: the inverse of
/// sum_{m=1..n} (p / T(m)) Pr[M = m | one node sampled the coordinate],
/// where M - 1 is Binomial(n-1, p) and p = k/d.
///
/// A T that vanishes at some m makes the sum diverge; the decoder then
/// outputs the zero vector, reported here as value 0 with the flag set.
pub fn beta_bar(t: &TFunctionSpec, k: usize, d: usize) -> Result<BetaBar> {
    beta_bar_for(&t.values(), k, d)
}

/// `beta_bar` over an explicit table [T(1), ..., T(n)].
pub fn beta_bar_for(t_values: &[f64], k: usize, d: usize) -> Result<BetaBar> {
    if t_values.is_empty() {
        return Err(Error::Empty("T table"));
    }
    if k == 0 || k > d {
        return Err(Error::Budget { k, d });
    }
    if t_values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidTFunction);
    }
    if t_values.contains(&0.0) {
        return Ok(BetaBar {
            value: 0.0,
            degenerate: true,
        });
    }
    if t_values.iter().all(|&v| v == 1.0) {
        // The sum telescopes to p exactly; keep d/k bit-exact.
        return Ok(BetaBar {
            value: d as f64 / k as f64,
            degenerate: false,
        });
    }
    let n = t_values.len();
    let pmf = binom::pmf(n - 1, k, d)?;
    let p = k as f64 / d as f64;
    let inv: f64 = (0..n).map(|m| p * pmf[m] / t_values[m]).sum();
    Ok(BetaBar {
        value: 1.0 / inv,
        degenerate: false,
    })
}

fn common_dim(messages: &[SparseMessage]) -> Result<usize> {
    let first = messages.first().ok_or(Error::Empty("no messages"))?;
    let d = first.dim();
    for m in messages {
        if m.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.dim(),
            });
        }
    }
    Ok(d)
}

/// Plain Rand-k decoding: x_hat = (1/n)(d/k) sum_i h_i, absent
/// coordinates contributing zero.
pub fn decode_rand_k(messages: &[SparseMessage], k: usize) -> Result<DenseVector> {
    let d = common_dim(messages)?;
    if k == 0 || k > d {
        return Err(Error::Budget { k, d });
    }
    let scale = d as f64 / k as f64;
    let n = messages.len() as f64;
    let mut acc = vec![0.0; d];
    for msg in messages {
        for (j, v) in msg.entries() {
            acc[j] += scale * v;
        }
    }
    for a in &mut acc {
        *a /= n;
    }
    DenseVector::new(acc)
}

/// Pass-through average for encoders that pre-scale their values
/// (Wangni, Induced): x_hat = (1/n) sum_i h_i.
pub fn decode_prescaled(messages: &[SparseMessage]) -> Result<DenseVector> {
    let d = common_dim(messages)?;
    let n = messages.len() as f64;
    let mut acc = vec![0.0; d];
    for msg in messages {
        for (j, v) in msg.entries() {
            acc[j] += v;
        }
    }
    for a in &mut acc {
        *a /= n;
    }
    DenseVector::new(acc)
}

/// Spatial decoding: x_hat_j = (1/n)(beta_bar / T(M_j)) sum_i h_ij.
/// Coordinates nobody sent decode to zero; a degenerate beta_bar decodes
/// everything to zero.
pub fn decode_rand_k_spatial(
    messages: &[SparseMessage],
    k: usize,
    t: &TFunctionSpec,
) -> Result<DenseVector> {
    let d = common_dim(messages)?;
    if k == 0 || k > d {
        return Err(Error::Budget { k, d });
    }
    if t.n() != messages.len() {
        return Err(Error::NodeCount {
            expected: t.n(),
            found: messages.len(),
        });
    }
    let beta = beta_bar(t, k, d)?;
    if beta.degenerate {
        return Ok(DenseVector::zeros(d));
    }
    let counts = hit_counts(d, messages)?;
    // factors[m] multiplies every value of a coordinate hit m times.
    let mut factors = vec![0.0; t.n() + 1];
    for (m, f) in factors.iter_mut().enumerate().skip(1) {
        *f = beta.value / t.evaluate(m);
    }
    let n = messages.len() as f64;
    let mut acc = vec![0.0; d];
    for msg in messages {
        for (j, v) in msg.entries() {
            acc[j] += factors[counts.counts()[j]] * v;
        }
    }
    for a in &mut acc {
        *a /= n;
    }
    DenseVector::new(acc)
}

/// Temporal decoding: per node, unsent coordinates fill in from memory and
/// sent coordinates apply the unbiased correction
/// b_ij + (d/k)(x_ij - b_ij); the results are averaged.
pub fn decode_rand_k_temporal(
    messages: &[SparseMessage],
    k: usize,
    memory: &ServerMemory,
) -> Result<DenseVector> {
    let d = common_dim(messages)?;
    if k == 0 || k > d {
        return Err(Error::Budget { k, d });
    }
    if memory.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: memory.dim(),
        });
    }
    if let Some(count) = memory.node_count() {
        if count != messages.len() {
            return Err(Error::NodeCount {
                expected: count,
                found: messages.len(),
            });
        }
    }
    let scale = d as f64 / k as f64;
    let n = messages.len() as f64;
    let mut acc = vec![0.0; d];
    let mut filled = vec![0.0; d];
    for (i, msg) in messages.iter().enumerate() {
        let b = memory.node_view(i).values();
        filled.copy_from_slice(b);
        for (j, v) in msg.entries() {
            filled[j] = b[j] + scale * (v - b[j]);
        }
        for (a, h) in acc.iter_mut().zip(&filled) {
            *a += h;
        }
    }
    for a in &mut acc {
        *a /= n;
    }
    DenseVector::new(acc)
}

/// Writes each sent value into that node's memory slot; untouched
/// coordinates keep their old value. Raw Rand-k messages carry exact node
/// entries, so this stores x_ij itself.
pub fn memory_update_per_node(
    memory: &mut ServerMemory,
    messages: &[SparseMessage],
) -> Result<()> {
    let d = memory.dim();
    match memory {
        ServerMemory::Shared { .. } => Err(Error::MemoryMode {
            required: "per_node",
            found: "shared",
        }),
        ServerMemory::PerNode { vectors } => {
            if vectors.len() != messages.len() {
                return Err(Error::NodeCount {
                    expected: vectors.len(),
                    found: messages.len(),
                });
            }
            for msg in messages {
                if msg.dim() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: msg.dim(),
                    });
                }
            }
            for (vec, msg) in vectors.iter_mut().zip(messages) {
                let slot = vec.values_mut();
                for (j, v) in msg.entries() {
                    slot[j] = v;
                }
            }
            Ok(())
        }
    }
}

/// Replaces the shared memory vector with the round's mean estimate.
pub fn memory_update_shared(memory: &mut ServerMemory, mean_estimate: &DenseVector) -> Result<()> {
    match memory {
        ServerMemory::PerNode { .. } => Err(Error::MemoryMode {
            required: "shared",
            found: "per_node",
        }),
        ServerMemory::Shared { vector } => {
            if vector.dim() != mean_estimate.dim() {
                return Err(Error::DimensionMismatch {
                    expected: vector.dim(),
                    found: mean_estimate.dim(),
                });
            }
            *vector = mean_estimate.clone();
            Ok(())
        }
    }
}

fn check_weights(wfracs: &[f64], n: usize) -> Result<()> {
    if wfracs.len() != n {
        return Err(Error::NodeCount {
            expected: n,
            found: wfracs.len(),
        });
    }
    if wfracs.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::BadWeights);
    }
    Ok(())
}

/// Weighted Rand-k decoding with weight fractions summing to 1:
/// x_hat = (d/k) sum_i wfrac_i h_i. Used when node contributions carry
/// data-count weights (cluster updates).
pub fn decode_rand_k_weighted(
    messages: &[SparseMessage],
    k: usize,
    wfracs: &[f64],
) -> Result<DenseVector> {
    let d = common_dim(messages)?;
    if k == 0 || k > d {
        return Err(Error::Budget { k, d });
    }
    check_weights(wfracs, messages.len())?;
    let scale = d as f64 / k as f64;
    let mut acc = vec![0.0; d];
    for (msg, &w) in messages.iter().zip(wfracs) {
        for (j, v) in msg.entries() {
            acc[j] += scale * (w * v);
        }
    }
    DenseVector::new(acc)
}

/// Weighted pass-through average: x_hat = sum_i wfrac_i h_i.
pub fn decode_prescaled_weighted(
    messages: &[SparseMessage],
    wfracs: &[f64],
) -> Result<DenseVector> {
    let d = common_dim(messages)?;
    check_weights(wfracs, messages.len())?;
    let mut acc = vec![0.0; d];
    for (msg, &w) in messages.iter().zip(wfracs) {
        for (j, v) in msg.entries() {
            acc[j] += w * v;
        }
    }
    DenseVector::new(acc)
}

/// Weighted spatial decoding:
/// x_hat_j = (beta_bar / T(M_j)) sum_i wfrac_i h_ij.
/// Zero-weight nodes still sample and therefore still count toward M_j.
pub fn decode_rand_k_spatial_weighted(
    messages: &[SparseMessage],
    k: usize,
    t: &TFunctionSpec,
    wfracs: &[f64],
) -> Result<DenseVector> {
    let d = common_dim(messages)?;
    if k == 0 || k > d {
        return Err(Error::Budget { k, d });
    }
    if t.n() != messages.len() {
        return Err(Error::NodeCount {
            expected: t.n(),
            found: messages.len(),
        });
    }
    check_weights(wfracs, messages.len())?;
    let beta = beta_bar(t, k, d)?;
    if beta.degenerate {
        return Ok(DenseVector::zeros(d));
    }
    let counts = hit_counts(d, messages)?;
    let mut factors = vec![0.0; t.n() + 1];
    for (m, f) in factors.iter_mut().enumerate().skip(1) {
        *f = beta.value / t.evaluate(m);
    }
    let mut acc = vec![0.0; d];
    for (msg, &w) in messages.iter().zip(wfracs) {
        for (j, v) in msg.entries() {
            acc[j] += factors[counts.counts()[j]] * (w * v);
        }
    }
    DenseVector::new(acc)
}

/// Weighted temporal decoding: x_hat = sum_i wfrac_i h'_i with the same
/// per-node fill-in as the unweighted decoder.
pub fn decode_rand_k_temporal_weighted(
    messages: &[SparseMessage],
    k: usize,
    memory: &ServerMemory,
    wfracs: &[f64],
) -> Result<DenseVector> {
    let d = common_dim(messages)?;
    if k == 0 || k > d {
        return Err(Error::Budget { k, d });
    }
    if memory.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: memory.dim(),
        });
    }
    if let Some(count) = memory.node_count() {
        if count != messages.len() {
            return Err(Error::NodeCount {
                expected: count,
                found: messages.len(),
            });
        }
    }
    check_weights(wfracs, messages.len())?;
    let scale = d as f64 / k as f64;
    let mut acc = vec![0.0; d];
    let mut filled = vec![0.0; d];
    for (i, (msg, &w)) in messages.iter().zip(wfracs).enumerate() {
        let b = memory.node_view(i).values();
        filled.copy_from_slice(b);
        for (j, v) in msg.entries() {
            filled[j] = b[j] + scale * (v - b[j]);
        }
        for (a, h) in acc.iter_mut().zip(&filled) {
            *a += w * h;
        }
    }
    DenseVector::new(acc)
}

/// Which decoder the server runs; spatial carries its T function, temporal
/// carries the memory snapshot it reads.
#[derive(Debug, Clone, PartialEq)]
pub enum DecoderSpec {
    RandK,
    Prescaled,
    Spatial(TFunctionSpec),
    Temporal(ServerMemory),
}

impl DecoderSpec {
    /// Runs the decoder; `k` is the common Rand-k budget (ignored by the
    /// pass-through decoder).
    pub fn decode(&self, messages: &[SparseMessage], k: usize) -> Result<DenseVector> {
        match self {
            DecoderSpec::RandK => decode_rand_k(messages, k),
            DecoderSpec::Prescaled => decode_prescaled(messages),
            DecoderSpec::Spatial(t) => decode_rand_k_spatial(messages, k, t),
            DecoderSpec::Temporal(memory) => decode_rand_k_temporal(messages, k, memory),
        }
    }

    /// True when the decoder needs raw coordinate values on the wire.
    pub fn requires_raw(&self) -> bool {
        !matches!(self, DecoderSpec::Prescaled)
    }

    pub fn label(&self) -> &'static str {
        match self {
            DecoderSpec::RandK => "rand_k",
            DecoderSpec::Prescaled => "prescaled",
            DecoderSpec::Spatial(t) => t.label(),
            DecoderSpec::Temporal(_) => "temporal",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::mean_vector;

    fn dv(values: &[f64]) -> DenseVector {
        DenseVector::new(values.to_vec()).unwrap()
    }

    fn msg(d: usize, idx: &[usize], val: &[f64]) -> SparseMessage {
        SparseMessage::new(d, idx.to_vec(), val.to_vec()).unwrap()
    }

    #[test]
    fn rand_k_decode_arithmetic() {
        // (1/2) * 2 * ([4,0] + [0,2]) = [4,2].
        let msgs = [msg(2, &[0], &[4.0]), msg(2, &[1], &[2.0])];
        let out = decode_rand_k(&msgs, 1).unwrap();
        assert_eq!(out.values(), &[4.0, 2.0]);
    }

    #[test]
    fn rand_k_decode_full_budget_is_exact_mean() {
        let msgs = [
            msg(2, &[0, 1], &[1.0, 3.0]),
            msg(2, &[0, 1], &[5.0, -1.0]),
        ];
        let out = decode_rand_k(&msgs, 2).unwrap();
        assert_eq!(out.values(), &[3.0, 1.0]);
    }

    #[test]
    fn rand_k_decode_single_node_two_outcomes() {
        // x=[1,1], k=1: outcomes [2,0] and [0,2], expectation [1,1].
        let a = decode_rand_k(&[msg(2, &[0], &[1.0])], 1).unwrap();
        let b = decode_rand_k(&[msg(2, &[1], &[1.0])], 1).unwrap();
        assert_eq!(a.values(), &[2.0, 0.0]);
        assert_eq!(b.values(), &[0.0, 2.0]);
        let mean = [
            (a.values()[0] + b.values()[0]) / 2.0,
            (a.values()[1] + b.values()[1]) / 2.0,
        ];
        assert_eq!(mean, [1.0, 1.0]);
    }

    #[test]
    fn rand_k_decode_errors() {
        assert!(matches!(decode_rand_k(&[], 1), Err(Error::Empty(_))));
        let msgs = [msg(2, &[0], &[1.0]), msg(3, &[0], &[1.0])];
        assert!(matches!(
            decode_rand_k(&msgs, 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn prescaled_decode_cases() {
        let one = decode_prescaled(&[msg(2, &[0, 1], &[3.0, 4.0])]).unwrap();
        assert_eq!(one.values(), &[3.0, 4.0]);

        let disjoint = decode_prescaled(&[msg(2, &[0], &[3.0]), msg(2, &[1], &[4.0])]).unwrap();
        assert_eq!(disjoint.values(), &[1.5, 2.0]);

        let empty = decode_prescaled(&[msg(2, &[], &[]), msg(2, &[], &[])]).unwrap();
        assert_eq!(empty.values(), &[0.0, 0.0]);
    }

    #[test]
    fn beta_bar_flat_t_is_exact() {
        for (k, d) in [(1usize, 2usize), (3, 7), (10, 100), (1, 10_000)] {
            let t = TFunctionSpec::rand_k(5);
            let b = beta_bar(&t, k, d).unwrap();
            assert_eq!(b.value, d as f64 / k as f64);
            assert!(!b.degenerate);
        }
    }

    #[test]
    fn beta_bar_hand_value() {
        // n=2, p=1/2, T(m)=m: inverse = 0.5*(0.5/1) + 0.5*(0.5/2) = 0.375.
        let t = TFunctionSpec::spatial_max(2);
        let b = beta_bar(&t, 1, 2).unwrap();
        assert!((b.value - 8.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn beta_bar_degenerate_at_rho_minus_one() {
        for n in [2usize, 3, 6] {
            let t = TFunctionSpec::spatial_opt(n, -1.0);
            let b = beta_bar(&t, 1, 2).unwrap();
            assert_eq!(b.value, 0.0);
            assert!(b.degenerate);
        }
    }

    #[test]
    fn beta_bar_rejects_bad_tables() {
        assert!(matches!(
            beta_bar_for(&[1.0, -0.5], 1, 2),
            Err(Error::InvalidTFunction)
        ));
        assert!(matches!(
            beta_bar_for(&[1.0, f64::NAN], 1, 2),
            Err(Error::InvalidTFunction)
        ));
        assert!(matches!(beta_bar_for(&[], 1, 2), Err(Error::Empty(_))));
        assert!(matches!(
            beta_bar_for(&[1.0], 0, 2),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn spatial_decode_flat_t_bit_matches_rand_k() {
        let msgs = [
            msg(3, &[0, 2], &[1.25, -0.5]),
            msg(3, &[0, 1], &[0.3, 7.0]),
            msg(3, &[1, 2], &[-2.0, 0.125]),
        ];
        let plain = decode_rand_k(&msgs, 2).unwrap();
        let spatial =
            decode_rand_k_spatial(&msgs, 2, &TFunctionSpec::rand_k(3)).unwrap();
        assert_eq!(plain.values(), spatial.values());
    }

    #[test]
    fn spatial_decode_hand_example() {
        // Both nodes send coordinate 0 (values 1 and 3), T(m)=m, n=2, k=1,
        // d=2: beta_bar = 8/3, M_0 = 2, so x_hat_0 = (1/2)(8/3/2)(4) = 8/3.
        let msgs = [msg(2, &[0], &[1.0]), msg(2, &[0], &[3.0])];
        let out = decode_rand_k_spatial(&msgs, 1, &TFunctionSpec::spatial_max(2)).unwrap();
        assert!((out.values()[0] - 8.0 / 3.0).abs() < 1e-14);
        assert_eq!(out.values()[1], 0.0);
    }

    #[test]
    fn spatial_decode_degenerate_returns_zero() {
        let msgs = [msg(2, &[0], &[1.0]), msg(2, &[1], &[3.0])];
        let out =
            decode_rand_k_spatial(&msgs, 1, &TFunctionSpec::spatial_opt(2, -1.0)).unwrap();
        assert_eq!(out.values(), &[0.0, 0.0]);
    }

    #[test]
    fn spatial_decode_checks_node_count() {
        let msgs = [msg(2, &[0], &[1.0])];
        assert!(matches!(
            decode_rand_k_spatial(&msgs, 1, &TFunctionSpec::spatial_max(2)),
            Err(Error::NodeCount { .. })
        ));
    }

    #[test]
    fn temporal_decode_zero_memory_equals_rand_k() {
        let msgs = [
            msg(3, &[0, 2], &[1.25, -0.5]),
            msg(3, &[1, 2], &[0.3, 7.0]),
        ];
        let mem = ServerMemory::per_node_zeros(2, 3);
        let plain = decode_rand_k(&msgs, 2).unwrap();
        let temporal = decode_rand_k_temporal(&msgs, 2, &mem).unwrap();
        assert_eq!(plain.values(), temporal.values());
    }

    #[test]
    fn temporal_decode_perfect_memory_recovers_mean() {
        let xs = [dv(&[1.0, 2.0, 3.0]), dv(&[-1.0, 0.5, 2.0])];
        let mem = ServerMemory::per_node(xs.to_vec()).unwrap();
        // Arbitrary sampling pattern; values are the true entries.
        let msgs = [msg(3, &[1], &[2.0]), msg(3, &[0], &[-1.0])];
        let out = decode_rand_k_temporal(&msgs, 1, &mem).unwrap();
        let mean = mean_vector(&xs).unwrap();
        assert_eq!(out.values(), mean.values());
    }

    #[test]
    fn temporal_decode_two_outcome_example() {
        // n=1, d=2, k=1, x=[1,1], b=[1,0].
        let mem = ServerMemory::per_node(vec![dv(&[1.0, 0.0])]).unwrap();
        let coord0 = decode_rand_k_temporal(&[msg(2, &[0], &[1.0])], 1, &mem).unwrap();
        assert_eq!(coord0.values(), &[1.0, 0.0]);
        let coord1 = decode_rand_k_temporal(&[msg(2, &[1], &[1.0])], 1, &mem).unwrap();
        assert_eq!(coord1.values(), &[1.0, 2.0]);
        // Each outcome misses x_bar = [1,1] by squared error 1, matching
        // (d/k - 1) * ||x - b||^2 = 1 * 1.
    }

    #[test]
    fn temporal_decode_shared_memory() {
        let mem = ServerMemory::shared(dv(&[1.0, 1.0]));
        let msgs = [msg(2, &[0], &[2.0]), msg(2, &[1], &[3.0])];
        // Node 0: [1 + 2(2-1), 1] = [3,1]; node 1: [1, 1 + 2(3-1)] = [1,5].
        let out = decode_rand_k_temporal(&msgs, 1, &mem).unwrap();
        assert_eq!(out.values(), &[2.0, 3.0]);
    }

    #[test]
    fn temporal_decode_node_count_mismatch() {
        let mem = ServerMemory::per_node_zeros(3, 2);
        let msgs = [msg(2, &[0], &[1.0])];
        assert!(matches!(
            decode_rand_k_temporal(&msgs, 1, &mem),
            Err(Error::NodeCount { .. })
        ));
    }

    #[test]
    fn memory_update_per_node_rules() {
        let mut mem = ServerMemory::per_node(vec![dv(&[1.0, 1.0, 1.0])]).unwrap();
        memory_update_per_node(&mut mem, &[msg(3, &[1], &[9.0])]).unwrap();
        assert_eq!(mem.node_view(0).values(), &[1.0, 9.0, 1.0]);

        // Sending everything replaces the slot; sending nothing keeps it.
        memory_update_per_node(&mut mem, &[msg(3, &[0, 1, 2], &[4.0, 5.0, 6.0])]).unwrap();
        assert_eq!(mem.node_view(0).values(), &[4.0, 5.0, 6.0]);
        memory_update_per_node(&mut mem, &[msg(3, &[], &[])]).unwrap();
        assert_eq!(mem.node_view(0).values(), &[4.0, 5.0, 6.0]);

        let mut shared = ServerMemory::shared_zeros(3);
        assert!(matches!(
            memory_update_per_node(&mut shared, &[msg(3, &[], &[])]),
            Err(Error::MemoryMode { .. })
        ));
    }

    #[test]
    fn memory_update_shared_rules() {
        let mut mem = ServerMemory::shared_zeros(2);
        memory_update_shared(&mut mem, &dv(&[0.5, -0.5])).unwrap();
        assert_eq!(mem.node_view(0).values(), &[0.5, -0.5]);

        let mut per_node = ServerMemory::per_node_zeros(1, 2);
        assert!(matches!(
            memory_update_shared(&mut per_node, &dv(&[1.0, 2.0])),
            Err(Error::MemoryMode { .. })
        ));
    }

    #[test]
    fn weighted_decoders_match_uniform_weights() {
        let msgs = [
            msg(3, &[0, 2], &[1.25, -0.5]),
            msg(3, &[0, 1], &[0.3, 7.0]),
        ];
        let wf = [0.5, 0.5];
        let plain = decode_rand_k(&msgs, 2).unwrap();
        let weighted = decode_rand_k_weighted(&msgs, 2, &wf).unwrap();
        for (a, b) in plain.values().iter().zip(weighted.values()) {
            assert!((a - b).abs() < 1e-15);
        }
        let t = TFunctionSpec::spatial_max(2);
        let sp = decode_rand_k_spatial(&msgs, 2, &t).unwrap();
        let spw = decode_rand_k_spatial_weighted(&msgs, 2, &t, &wf).unwrap();
        for (a, b) in sp.values().iter().zip(spw.values()) {
            assert!((a - b).abs() < 1e-15);
        }
        let mem = ServerMemory::per_node(vec![dv(&[0.1, 0.2, 0.3]), dv(&[1.0, 0.0, 0.0])])
            .unwrap();
        let tp = decode_rand_k_temporal(&msgs, 2, &mem).unwrap();
        let tpw = decode_rand_k_temporal_weighted(&msgs, 2, &mem, &wf).unwrap();
        for (a, b) in tp.values().iter().zip(tpw.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn weighted_spatial_counts_zero_weight_nodes() {
        // The zero-weight node still raises M_0 to 2, changing T(M_0).
        let msgs = [msg(2, &[0], &[1.0]), msg(2, &[0], &[5.0])];
        let t = TFunctionSpec::spatial_max(2);
        let beta = beta_bar(&t, 1, 2).unwrap().value;
        let out = decode_rand_k_spatial_weighted(&msgs, 1, &t, &[1.0, 0.0]).unwrap();
        // factor = beta / T(2) applied to weight 1 * value 1.
        assert!((out.values()[0] - beta / 2.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_decoders_reject_bad_weights() {
        let msgs = [msg(2, &[0], &[1.0])];
        assert!(matches!(
            decode_rand_k_weighted(&msgs, 1, &[-0.1]),
            Err(Error::BadWeights)
        ));
        assert!(matches!(
            decode_prescaled_weighted(&msgs, &[0.5, 0.5]),
            Err(Error::NodeCount { .. })
        ));
    }

    #[test]
    fn decoder_spec_dispatch() {
        let msgs = [msg(2, &[0], &[4.0]), msg(2, &[1], &[2.0])];
        assert_eq!(
            DecoderSpec::RandK.decode(&msgs, 1).unwrap().values(),
            &[4.0, 2.0]
        );
        assert_eq!(
            DecoderSpec::Prescaled.decode(&msgs, 1).unwrap().values(),
            &[2.0, 1.0]
        );
        let spatial = DecoderSpec::Spatial(TFunctionSpec::spatial_avg(2));
        assert_eq!(spatial.label(), "spatial_avg");
        assert!(spatial.requires_raw());
        assert!(!DecoderSpec::Prescaled.requires_raw());
        let temporal = DecoderSpec::Temporal(ServerMemory::per_node_zeros(2, 2));
        assert_eq!(temporal.label(), "temporal");
        assert!(temporal.decode(&msgs, 1).is_ok());
    }
}
