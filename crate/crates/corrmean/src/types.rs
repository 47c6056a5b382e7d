//! Core domain types shared by all modules, plus the hit-count computation
//! consumed by every spatial decoder and analytic formula.
//!
//! Coordinates are 0-indexed everywhere, including file formats. All reals
//! are double precision, and every summation over nodes runs in ascending
//! node-index order so results are bit-reproducible.

use crate::error::{Error, Result};

/// A length-d real vector: node data, mean estimates, memory vectors.
///
/// Invariant: d >= 1 and every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector {
    values: Vec<f64>,
}

impl DenseVector {
    /// Wraps a value list, rejecting empty and non-finite input.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("DenseVector requires d >= 1"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { values })
    }

    /// The all-zeros vector of dimension d >= 1.
    pub fn zeros(d: usize) -> Self {
        assert!(d >= 1, "DenseVector requires d >= 1");
        Self {
            values: vec![0.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Inner product with another vector of the same dimension.
    pub fn dot(&self, other: &DenseVector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dot requires equal dimensions");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Sum of squared entries.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Squared Euclidean distance to another vector of the same dimension.
    pub fn dist_sq(&self, other: &DenseVector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dist_sq requires equal dimensions");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                let diff = a - b;
                diff * diff
            })
            .sum()
    }
}

/// The wire unit a node sends: dimension, sorted coordinate indices, and
/// values (raw entries for Rand-k, pre-scaled for Wangni / Induced).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMessage {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMessage {
    /// Builds a message, checking index ordering and bounds.
    pub fn new(dim: usize, indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty("SparseMessage requires dim >= 1"));
        }
        if indices.len() != values.len() {
            return Err(Error::BadIndices);
        }
        let increasing = indices.windows(2).all(|w| w[0] < w[1]);
        if !increasing || indices.last().is_some_and(|&last| last >= dim) {
            return Err(Error::BadIndices);
        }
        Ok(Self {
            dim,
            indices,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of coordinates carried.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Iterates (coordinate, value) pairs in ascending coordinate order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }
}

/// Per-coordinate counts M_j of how many nodes sent coordinate j.
#[derive(Debug, Clone, PartialEq)]
pub struct HitCounts {
    counts: Vec<usize>,
    n: usize,
}

impl HitCounts {
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Number of messages the counts were taken over.
    pub fn n(&self) -> usize {
        self.n
    }
}

/// Counts, per coordinate of `dim`, how many messages carry it.
///
/// `dim` is explicit so an empty message list still has a well-defined
/// result; all messages must match it.
pub fn hit_counts(dim: usize, messages: &[SparseMessage]) -> Result<HitCounts> {
    if dim == 0 {
        return Err(Error::Empty("hit_counts requires dim >= 1"));
    }
    let mut counts = vec![0usize; dim];
    for msg in messages {
        if msg.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: msg.dim(),
            });
        }
        for &j in msg.indices() {
            counts[j] += 1;
        }
    }
    Ok(HitCounts {
        counts,
        n: messages.len(),
    })
}

/// Which member of the scaling family a spatial decoder uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TKind {
    /// T(m) = 1: plain Rand-k averaging.
    RandK,
    /// T(m) = m: best under fully aligned node vectors.
    SpatialMax,
    /// T(m) = 1 + (n/2)(m-1)/(n-1): the default mid-correlation setting.
    SpatialAvg,
    /// T(m) = 1 + rho (m-1)/(n-1): best for a known correlation ratio rho.
    SpatialOpt,
}

/// A member of the spatial estimator family: the map m -> T(m) for m = 1..n.
///
/// T(m) > 0 for all m, except the degenerate SpatialOpt case rho = -1 where
/// T(n) = 0; decoding handles that case by returning the zero estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct TFunctionSpec {
    kind: TKind,
    n: usize,
    rho: f64,
}

impl TFunctionSpec {
    pub fn rand_k(n: usize) -> Self {
        assert!(n >= 1, "TFunctionSpec requires n >= 1");
        Self {
            kind: TKind::RandK,
            n,
            rho: 0.0,
        }
    }

    pub fn spatial_max(n: usize) -> Self {
        assert!(n >= 1, "TFunctionSpec requires n >= 1");
        Self {
            kind: TKind::SpatialMax,
            n,
            rho: 0.0,
        }
    }

    pub fn spatial_avg(n: usize) -> Self {
        assert!(n >= 1, "TFunctionSpec requires n >= 1");
        Self {
            kind: TKind::SpatialAvg,
            n,
            rho: 0.0,
        }
    }

    /// The correlation-matched member. Range checking of rho against
    /// [-1, n-1] is the caller's concern (see `analytics::optimal_t`).
    pub fn spatial_opt(n: usize, rho: f64) -> Self {
        assert!(n >= 1, "TFunctionSpec requires n >= 1");
        assert!(rho.is_finite(), "rho must be finite");
        Self {
            kind: TKind::SpatialOpt,
            n,
            rho,
        }
    }

    pub fn kind(&self) -> TKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The correlation ratio, for the SpatialOpt kind.
    pub fn rho(&self) -> Option<f64> {
        match self.kind {
            TKind::SpatialOpt => Some(self.rho),
            _ => None,
        }
    }

    /// T(m) for a hit count m in 1..=n.
    ///
    /// m = 1 returns exactly 1 for every kind, which also keeps n = 1 well
    /// defined (no (m-1)/(n-1) division).
    pub fn evaluate(&self, m: usize) -> f64 {
        assert!(
            (1..=self.n).contains(&m),
            "hit count m={m} outside 1..={}",
            self.n
        );
        if m == 1 {
            return 1.0;
        }
        match self.kind {
            TKind::RandK => 1.0,
            TKind::SpatialMax => m as f64,
            TKind::SpatialAvg => {
                1.0 + (self.n as f64 / 2.0) * ((m - 1) as f64 / (self.n - 1) as f64)
            }
            TKind::SpatialOpt => 1.0 + self.rho * ((m - 1) as f64 / (self.n - 1) as f64),
        }
    }

    /// The full table [T(1), ..., T(n)].
    pub fn values(&self) -> Vec<f64> {
        (1..=self.n).map(|m| self.evaluate(m)).collect()
    }

    /// Stable identifier used in CSV output and reports.
    pub fn label(&self) -> &'static str {
        match self.kind {
            TKind::RandK => "rand_k",
            TKind::SpatialMax => "spatial_max",
            TKind::SpatialAvg => "spatial_avg",
            TKind::SpatialOpt => "spatial_opt",
        }
    }
}

/// Decoder-side temporal state: one memory vector per node, or a single
/// shared vector (the O(d) storage variant).
#[derive(Debug, Clone, PartialEq)]
pub enum ServerMemory {
    PerNode { vectors: Vec<DenseVector> },
    Shared { vector: DenseVector },
}

impl ServerMemory {
    /// Per-node memory initialized to all-zeros.
    pub fn per_node_zeros(n: usize, d: usize) -> Self {
        assert!(n >= 1, "ServerMemory requires n >= 1");
        Self::PerNode {
            vectors: (0..n).map(|_| DenseVector::zeros(d)).collect(),
        }
    }

    /// Shared memory initialized to all-zeros.
    pub fn shared_zeros(d: usize) -> Self {
        Self::Shared {
            vector: DenseVector::zeros(d),
        }
    }

    /// Per-node memory from explicit vectors (all the same dimension).
    pub fn per_node(vectors: Vec<DenseVector>) -> Result<Self> {
        let first = vectors.first().ok_or(Error::Empty("per-node memory"))?;
        let d = first.dim();
        for v in &vectors {
            if v.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: v.dim(),
                });
            }
        }
        Ok(Self::PerNode { vectors })
    }

    pub fn shared(vector: DenseVector) -> Self {
        Self::Shared { vector }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::PerNode { vectors } => vectors[0].dim(),
            Self::Shared { vector } => vector.dim(),
        }
    }

    /// Number of per-node vectors, if in per-node mode.
    pub fn node_count(&self) -> Option<usize> {
        match self {
            Self::PerNode { vectors } => Some(vectors.len()),
            Self::Shared { .. } => None,
        }
    }

    /// The memory vector seen by node i (the shared vector in shared mode).
    pub fn node_view(&self, i: usize) -> &DenseVector {
        match self {
            Self::PerNode { vectors } => &vectors[i],
            Self::Shared { vector } => vector,
        }
    }

    pub fn mode_name(&self) -> &'static str {
        match self {
            Self::PerNode { .. } => "per_node",
            Self::Shared { .. } => "shared",
        }
    }
}

/// Per-round record emitted by the task simulations.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundMetrics {
    pub round: usize,
    pub task_loss: f64,
    /// Squared error of the round's mean estimate against the true mean.
    pub est_mse: f64,
    /// Correlation ratio of the round's node vectors; NaN when undefined.
    pub r2_over_r1: f64,
    /// Task-specific extra columns, in fixed order.
    pub extra: Vec<(String, f64)>,
}

/// Mean of the vectors: ascending node-index sum, one division at the end.
pub fn mean_vector(vectors: &[DenseVector]) -> Result<DenseVector> {
    let first = vectors.first().ok_or(Error::Empty("mean of no vectors"))?;
    let d = first.dim();
    let n = vectors.len() as f64;
    let mut acc = vec![0.0; d];
    for v in vectors {
        if v.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.dim(),
            });
        }
        for (a, x) in acc.iter_mut().zip(v.values()) {
            *a += x;
        }
    }
    for a in &mut acc {
        *a /= n;
    }
    DenseVector::new(acc)
}

/// Weighted mean with precomputed weight fractions (summing to 1):
/// ascending node-index sum of wfrac_i * x_i.
pub fn weighted_mean_vector(vectors: &[DenseVector], wfracs: &[f64]) -> Result<DenseVector> {
    let first = vectors.first().ok_or(Error::Empty("mean of no vectors"))?;
    if vectors.len() != wfracs.len() {
        return Err(Error::NodeCount {
            expected: vectors.len(),
            found: wfracs.len(),
        });
    }
    let d = first.dim();
    let mut acc = vec![0.0; d];
    for (v, &w) in vectors.iter().zip(wfracs) {
        if v.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.dim(),
            });
        }
        for (a, x) in acc.iter_mut().zip(v.values()) {
            *a += w * x;
        }
    }
    DenseVector::new(acc)
}
