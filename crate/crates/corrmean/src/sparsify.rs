//! Node-side encoders producing a SparseMessage from a DenseVector.
//!
//! Rand-k sends raw values; the decoder applies all scaling, which is what
//! lets hit-count-aware decoding rescale per coordinate. Wangni and the
//! induced compressor send pre-scaled values because their per-coordinate
//! probabilities are known only encoder-side; their paired decoder is the
//! plain pass-through average.

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::types::{DenseVector, SparseMessage};

/// Which encoder a node runs, with its coordinate budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncoderKind {
    RandK,
    TopK,
    Wangni,
    Induced,
}

/// Encoder selection plus budget. For Induced, `induced_top_fraction` fixes
/// the split between the deterministic and random stages.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderSpec {
    kind: EncoderKind,
    k: usize,
    induced_top_fraction: f64,
}

impl EncoderSpec {
    pub fn rand_k(k: usize) -> Self {
        Self {
            kind: EncoderKind::RandK,
            k,
            induced_top_fraction: 0.0,
        }
    }

    pub fn top_k(k: usize) -> Self {
        Self {
            kind: EncoderKind::TopK,
            k,
            induced_top_fraction: 0.0,
        }
    }

    pub fn wangni(k: usize) -> Self {
        Self {
            kind: EncoderKind::Wangni,
            k,
            induced_top_fraction: 0.0,
        }
    }

    /// Induced compressor with top budget round(fraction * k). Both stages
    /// must be nonempty: 1 <= k_top <= k - 1.
    pub fn induced(k: usize, induced_top_fraction: f64) -> Result<Self> {
        if !(induced_top_fraction > 0.0 && induced_top_fraction < 1.0) {
            return Err(Error::Config(format!(
                "induced_top_fraction must lie in (0,1), got {induced_top_fraction}"
            )));
        }
        let spec = Self {
            kind: EncoderKind::Induced,
            k,
            induced_top_fraction,
        };
        spec.induced_top_budget()?;
        Ok(spec)
    }

    pub fn kind(&self) -> EncoderKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The deterministic-stage budget k_top for the Induced kind.
    pub fn induced_top_budget(&self) -> Result<usize> {
        let k_top = (self.induced_top_fraction * self.k as f64).round() as usize;
        if k_top < 1 || k_top + 1 > self.k {
            return Err(Error::Config(format!(
                "induced split k_top={k_top} leaves no room in budget k={}; need 1 <= k_top <= k-1",
                self.k
            )));
        }
        Ok(k_top)
    }

    /// True when messages carry raw coordinate values the spatial and
    /// temporal decoders can rescale; only Rand-k qualifies.
    pub fn emits_raw_values(&self) -> bool {
        self.kind == EncoderKind::RandK
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            EncoderKind::RandK => "rand_k",
            EncoderKind::TopK => "top_k",
            EncoderKind::Wangni => "wangni",
            EncoderKind::Induced => "induced",
        }
    }

    /// Runs the selected encoder on one node vector.
    pub fn encode<R: Rng>(&self, x: &DenseVector, rng: &mut R) -> Result<SparseMessage> {
        match self.kind {
            EncoderKind::RandK => rand_k_encode(x, self.k, rng),
            EncoderKind::TopK => top_k_encode(x, self.k),
            EncoderKind::Wangni => wangni_encode(x, self.k, rng),
            EncoderKind::Induced => induced_encode(x, self, rng),
        }
    }
}

fn check_budget(k: usize, d: usize) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::Budget { k, d });
    }
    Ok(())
}

/// Keeps k coordinates drawn uniformly without replacement; values are the
/// raw entries (scaling is a decoder concern).
pub fn rand_k_encode<R: Rng>(x: &DenseVector, k: usize, rng: &mut R) -> Result<SparseMessage> {
    let d = x.dim();
    check_budget(k, d)?;
    let mut indices = sample(rng, d, k).into_vec();
    indices.sort_unstable();
    let values = indices.iter().map(|&j| x.values()[j]).collect();
    SparseMessage::new(d, indices, values)
}

/// Keeps the k largest-magnitude coordinates, ties broken by lower index.
/// Values are raw; the scheme is biased and pairs with the pass-through
/// decoder only inside the induced compressor.
pub fn top_k_encode(x: &DenseVector, k: usize) -> Result<SparseMessage> {
    let d = x.dim();
    check_budget(k, d)?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_unstable_by(|&a, &b| {
        let ma = x.values()[a].abs();
        let mb = x.values()[b].abs();
        mb.partial_cmp(&ma).expect("finite by invariant").then(a.cmp(&b))
    });
    let mut indices: Vec<usize> = order[..k].to_vec();
    indices.sort_unstable();
    let values = indices.iter().map(|&j| x.values()[j]).collect();
    SparseMessage::new(d, indices, values)
}

/// Per-coordinate keep probabilities of the magnitude-proportional scheme:
/// start p_j = min(1, k |x_j| / sum|x|), then repeatedly pin saturated
/// coordinates at 1 and rescale the rest so the probabilities sum to k.
/// Zero coordinates get probability 0. All-zero input gets all zeros.
pub fn wangni_probabilities(x: &DenseVector, k: usize) -> Result<Vec<f64>> {
    let d = x.dim();
    check_budget(k, d)?;
    let abs: Vec<f64> = x.values().iter().map(|v| v.abs()).collect();
    if abs.iter().all(|&a| a == 0.0) {
        return Ok(vec![0.0; d]);
    }
    let mut saturated = vec![false; d];
    // Saturation is monotone, so at most d passes are ever needed.
    for _ in 0..d {
        let rem = k - saturated.iter().filter(|&&s| s).count();
        let s: f64 = abs
            .iter()
            .zip(&saturated)
            .filter(|(_, &sat)| !sat)
            .map(|(&a, _)| a)
            .sum();
        if rem == 0 || s == 0.0 {
            break;
        }
        let mut newly = false;
        for j in 0..d {
            if !saturated[j] && abs[j] > 0.0 && rem as f64 * abs[j] >= s {
                saturated[j] = true;
                newly = true;
            }
        }
        if !newly {
            break;
        }
    }
    let rem = k - saturated.iter().filter(|&&s| s).count();
    let s: f64 = abs
        .iter()
        .zip(&saturated)
        .filter(|(_, &sat)| !sat)
        .map(|(&a, _)| a)
        .sum();
    let probs = (0..d)
        .map(|j| {
            if saturated[j] {
                1.0
            } else if abs[j] > 0.0 && rem > 0 && s > 0.0 {
                (rem as f64 * abs[j] / s).min(1.0)
            } else {
                0.0
            }
        })
        .collect();
    Ok(probs)
}

/// Keeps coordinate j independently with probability p_j and sends the
/// pre-scaled value x_j / p_j, so a plain average of messages is unbiased.
/// Expected message size is k; the realized size varies.
pub fn wangni_encode<R: Rng>(x: &DenseVector, k: usize, rng: &mut R) -> Result<SparseMessage> {
    let probs = wangni_probabilities(x, k)?;
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for (j, &p) in probs.iter().enumerate() {
        if p > 0.0 && rng.gen_bool(p) {
            indices.push(j);
            values.push(x.values()[j] / p);
        }
    }
    SparseMessage::new(x.dim(), indices, values)
}

/// Top-k_top stage plus a uniform-random stage over the residual, with the
/// random-stage values pre-scaled by d / (k - k_top). Overlapping indices
/// merge by summing (the residual is zero there). The expectation over the
/// random stage equals x.
pub fn induced_encode<R: Rng>(
    x: &DenseVector,
    spec: &EncoderSpec,
    rng: &mut R,
) -> Result<SparseMessage> {
    if spec.kind != EncoderKind::Induced {
        return Err(Error::Config(format!(
            "induced_encode called with encoder {}",
            spec.label()
        )));
    }
    let d = x.dim();
    let k = spec.k;
    check_budget(k, d)?;
    let k_top = spec.induced_top_budget()?;
    let k_rand = k - k_top;
    let top = top_k_encode(x, k_top)?;
    let mut residual = x.values().to_vec();
    for &j in top.indices() {
        residual[j] = 0.0;
    }
    let mut rand_indices = sample(rng, d, k_rand).into_vec();
    rand_indices.sort_unstable();
    let scale = d as f64 / k_rand as f64;
    let rand_values: Vec<f64> = rand_indices.iter().map(|&j| scale * residual[j]).collect();
    merge_messages(d, &top, &rand_indices, &rand_values)
}

/// Two-pointer merge of a message with a second sorted index/value list,
/// summing values on shared indices.
fn merge_messages(
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn dv(values: &[f64]) -> DenseVector {
        DenseVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn rand_k_full_budget_keeps_everything() {
        let x = dv(&[3.0, -1.0, 0.5]);
        let mut r = rng::stream(1, "t");
        let m = rand_k_encode(&x, 3, &mut r).unwrap();
        assert_eq!(m.indices(), &[0, 1, 2]);
        assert_eq!(m.values(), x.values());
    }

    #[test]
    fn rand_k_values_are_raw_entries() {
        let x = dv(&[5.0, 7.0]);
        let mut r = rng::stream(2, "t");
        for _ in 0..50 {
            let m = rand_k_encode(&x, 1, &mut r).unwrap();
            assert_eq!(m.len(), 1);
            let (j, v) = m.entries().next().unwrap();
            assert_eq!(v, x.values()[j]);
        }
    }

    #[test]
    fn rand_k_budget_errors() {
        let x = dv(&[1.0, 2.0]);
        let mut r = rng::stream(3, "t");
        assert!(matches!(
            rand_k_encode(&x, 0, &mut r),
            Err(Error::Budget { .. })
        ));
        assert!(matches!(
            rand_k_encode(&x, 3, &mut r),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn rand_k_index_frequency_is_balanced() {
        // d=2, k=1: index-0 count ~ Binomial(1e5, 1/2); 3 sigma = 474.
        let x = dv(&[1.0, 2.0]);
        let mut r = rng::stream(4, "freq");
        let trials = 100_000;
        let mut count0 = 0u32;
        for _ in 0..trials {
            let m = rand_k_encode(&x, 1, &mut r).unwrap();
            if m.indices()[0] == 0 {
                count0 += 1;
            }
        }
        let dev = (count0 as f64 - 50_000.0).abs();
        assert!(dev <= 3.0 * (100_000.0f64 * 0.25).sqrt(), "dev {dev}");
    }

    #[test]
    fn rand_k_subsets_are_uniform() {
        // All C(5,2)=10 subsets; chi-square with 9 degrees of freedom at
        // significance 0.001 has critical value 27.877.
        let x = dv(&[1.0; 5]);
        let mut r = rng::stream(5, "chi");
        let trials = 100_000usize;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..trials {
            let m = rand_k_encode(&x, 2, &mut r).unwrap();
            *counts.entry((m.indices()[0], m.indices()[1])).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 10);
        let expected = trials as f64 / 10.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| {
                let diff = c as f64 - expected;
                diff * diff / expected
            })
            .sum();
        assert!(chi2 < 27.877, "chi2 {chi2}");
    }

    #[test]
    fn rand_k_same_seed_same_message() {
        let x = dv(&[1.0, 2.0, 3.0, 4.0]);
        let a = rand_k_encode(&x, 2, &mut rng::stream(9, "det")).unwrap();
        let b = rand_k_encode(&x, 2, &mut rng::stream(9, "det")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn top_k_magnitude_order_and_ties() {
        let m = top_k_encode(&dv(&[1.0, -3.0, 2.0]), 2).unwrap();
        assert_eq!(m.indices(), &[1, 2]);
        assert_eq!(m.values(), &[-3.0, 2.0]);

        let tie = top_k_encode(&dv(&[2.0, 2.0, 1.0]), 1).unwrap();
        assert_eq!(tie.indices(), &[0]);

        let full = top_k_encode(&dv(&[0.0, 1.0]), 2).unwrap();
        assert_eq!(full.indices(), &[0, 1]);
    }

    #[test]
    fn wangni_equal_magnitudes_flat_probabilities() {
        let p = wangni_probabilities(&dv(&[1.0, -1.0, 1.0, -1.0]), 2).unwrap();
        for &pj in &p {
            assert!((pj - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn wangni_probability_mass_and_saturation() {
        // No coordinate saturates here: p_0 = 10/10.3 < 1.
        let x = dv(&[10.0, 0.1, 0.1, 0.1]);
        let p = wangni_probabilities(&x, 1).unwrap();
        assert!((p[0] - 10.0 / 10.3).abs() < 1e-12);
        let mass: f64 = p.iter().sum();
        assert!((mass - 1.0).abs() < 1e-12);

        // Forced saturation: the large coordinate pins at 1 and the rest
        // re-scale to absorb the remaining budget.
        let y = dv(&[100.0, 1.0, 1.0]);
        let q = wangni_probabilities(&y, 2).unwrap();
        assert_eq!(q[0], 1.0);
        assert!((q[1] - 0.5).abs() < 1e-12 && (q[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wangni_all_zero_gives_empty_message() {
        let x = dv(&[0.0, 0.0, 0.0]);
        let m = wangni_encode(&x, 2, &mut rng::stream(6, "t")).unwrap();
        assert!(m.is_empty());
    }

    #[test]
    fn wangni_full_budget_is_lossless() {
        let x = dv(&[2.0, 0.0, -1.5, 4.0]);
        let m = wangni_encode(&x, 4, &mut rng::stream(7, "t")).unwrap();
        assert_eq!(m.indices(), &[0, 2, 3]);
        assert_eq!(m.values(), &[2.0, -1.5, 4.0]);
    }

    #[test]
    fn wangni_analytic_expectation_matches_input() {
        // E[kept value] = p_j * x_j / p_j = x_j for every nonzero coordinate.
        let x = dv(&[10.0, 0.1, -0.1, 0.0]);
        let p = wangni_probabilities(&x, 2).unwrap();
        for (j, &pj) in p.iter().enumerate() {
            let xv = x.values()[j];
            if xv == 0.0 {
                assert_eq!(pj, 0.0);
            } else {
                assert!((pj * (xv / pj) - xv).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wangni_monte_carlo_mean_is_unbiased() {
        let x = dv(&[10.0, 0.1, 0.1, 0.1]);
        let k = 1;
        let trials = 100_000usize;
        let mut r = rng::stream(8, "wangni-mc");
        let mut sums = vec![0.0; x.dim()];
        let mut sq = vec![0.0; x.dim()];
        for _ in 0..trials {
            let m = wangni_encode(&x, k, &mut r).unwrap();
            let mut dense = vec![0.0; x.dim()];
            for (j, v) in m.entries() {
                dense[j] = v;
            }
            for j in 0..x.dim() {
                sums[j] += dense[j];
                sq[j] += dense[j] * dense[j];
            }
        }
        for j in 0..x.dim() {
            let mean = sums[j] / trials as f64;
            let var = (sq[j] / trials as f64 - mean * mean).max(0.0);
            let sigma = (var / trials as f64).sqrt();
            let dev = (mean - x.values()[j]).abs();
            assert!(dev <= 3.0 * sigma + 1e-12, "coord {j}: dev {dev} sigma {sigma}");
        }
    }

    #[test]
    fn induced_budget_split_arithmetic() {
        let spec = EncoderSpec::induced(4, 0.5).unwrap();
        assert_eq!(spec.induced_top_budget().unwrap(), 2);
        assert!(EncoderSpec::induced(1, 0.5).is_err());
        assert!(EncoderSpec::induced(4, 1.0).is_err());
        assert!(EncoderSpec::induced(4, 0.0).is_err());
        // round(0.9 * 2) = 2 leaves the random stage empty.
        assert!(EncoderSpec::induced(2, 0.9).is_err());
    }

    #[test]
    fn induced_concentrated_support_sends_zero_residual() {
        let spec = EncoderSpec::induced(4, 0.5).unwrap();
        let x = dv(&[5.0, 0.0, 0.0, -4.0, 0.0, 0.0]);
        let m = spec.encode(&x, &mut rng::stream(10, "t")).unwrap();
        for (j, v) in m.entries() {
            match j {
                0 => assert_eq!(v, 5.0),
                3 => assert_eq!(v, -4.0),
                _ => assert_eq!(v, 0.0),
            }
        }
    }

    #[test]
    fn induced_matches_manual_construction_on_shared_stream() {
        let spec = EncoderSpec::induced(2, 0.5).unwrap();
        let x = dv(&[1.0, -2.0, 0.5]);
        let msg = spec.encode(&x, &mut rng::stream(11, "t")).unwrap();

        // Re-derive the random pick from an identical stream.
        let mut twin = rng::stream(11, "t");
        let mut picks = sample(&mut twin, 3, 1).into_vec();
        picks.sort_unstable();
        let top = top_k_encode(&x, 1).unwrap();
        let mut residual = x.values().to_vec();
        for &j in top.indices() {
            residual[j] = 0.0;
        }
        let vals: Vec<f64> = picks.iter().map(|&j| 3.0 * residual[j]).collect();
        let expect = merge_messages(3, &top, &picks, &vals).unwrap();
        assert_eq!(msg, expect);
    }

    #[test]
    fn induced_exact_expectation_over_random_stage() {
        // d=3, k=2, k_top=1, k_rand=1: averaging the three equiprobable
        // random picks must reconstruct x exactly.
        let x = dv(&[1.0, -2.0, 0.5]);
        let top = top_k_encode(&x, 1).unwrap();
        let mut residual = x.values().to_vec();
        for &j in top.indices() {
            residual[j] = 0.0;
        }
        let mut mean = vec![0.0; 3];
        for pick in 0..3usize {
            let vals = vec![3.0 * residual[pick]];
            let m = merge_messages(3, &top, &[pick], &vals).unwrap();
            for (j, v) in m.entries() {
                mean[j] += v / 3.0;
            }
        }
        for j in 0..3 {
            assert!((mean[j] - x.values()[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn encoder_spec_dispatch_and_labels() {
        let x = dv(&[1.0, 2.0, 3.0, 4.0]);
        let specs = [
            EncoderSpec::rand_k(2),
            EncoderSpec::top_k(2),
            EncoderSpec::wangni(2),
            EncoderSpec::induced(2, 0.5).unwrap(),
        ];
        let labels = ["rand_k", "top_k", "wangni", "induced"];
        for (spec, label) in specs.iter().zip(labels) {
            assert_eq!(spec.label(), label);
            let m = spec.encode(&x, &mut rng::stream(12, label)).unwrap();
            assert!(m.dim() == 4);
        }
        assert!(EncoderSpec::rand_k(2).emits_raw_values());
        assert!(!EncoderSpec::top_k(2).emits_raw_values());
    }
}
