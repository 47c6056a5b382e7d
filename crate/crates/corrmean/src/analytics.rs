//! Closed-form quantities: the correlation summary (R1, R2, their ratio),
//! the c1/c2 variance coefficients of the spatial family, analytic MSE for
//! every decoder class, the optimal scaling function for a known
//! correlation ratio, and the step-size bound for the quadratic case study.

use crate::binom;
use crate::error::{Error, Result};
use crate::estimate::beta_bar_for;
use crate::types::{DenseVector, ServerMemory, TFunctionSpec};

/// R1 = sum ||x_i||^2, R2 = ||sum x_i||^2 - R1 (twice the pairwise inner
/// products), and their ratio. The ratio is undefined when R1 = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSummary {
    pub r1: f64,
    pub r2: f64,
    pub rho: Option<f64>,
}

/// Computes R1, R2, and rho = R2/R1 for a set of node vectors.
///
/// R2 comes from the identity ||sum x_i||^2 - R1, which keeps the exact
/// cancellation r2 = -r1 when the vectors sum to zero.
pub fn correlation_summary(vectors: &[DenseVector]) -> Result<CorrelationSummary> {
    let first = vectors.first().ok_or(Error::Empty("no vectors"))?;
    let d = first.dim();
    let mut r1 = 0.0;
    let mut total = vec![0.0; d];
    for v in vectors {
        if v.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.dim(),
            });
        }
        r1 += v.norm_sq();
        for (t, x) in total.iter_mut().zip(v.values()) {
            *t += x;
        }
    }
    let total_sq: f64 = total.iter().map(|t| t * t).sum();
    let r2 = total_sq - r1;
    let rho = if r1 > 0.0 { Some(r2 / r1) } else { None };
    Ok(CorrelationSummary { r1, r2, rho })
}

/// The excess-variance and cross-term coefficients of a spatial family
/// member, with the degenerate zero-estimator flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C1C2 {
    pub c1: f64,
    pub c2: f64,
    pub degenerate: bool,
}

/// c1 and c2 for a spatial family member:
///   c1 = beta_bar^2 sum_{m=1..n} (p / T(m)^2) Binom(n-1, p; m-1) - 1/p
///   c2 = 1 - beta_bar^2 p^2 sum_{m=2..n} Binom(n-2, p; m-2) / T(m)^2
/// with p = k/d. For n = 1 the c2 sum is empty, so c2 = 1. A degenerate
/// beta_bar = 0 gives c1 = -d/k, c2 = 1 with the flag set.
pub fn c1_c2(t: &TFunctionSpec, k: usize, d: usize) -> Result<C1C2> {
    c1_c2_for(&t.values(), k, d)
}

/// `c1_c2` over an explicit table [T(1), ..., T(n)].
pub fn c1_c2_for(t_values: &[f64], k: usize, d: usize) -> Result<C1C2> {
    let beta = beta_bar_for(t_values, k, d)?;
    let n = t_values.len();
    let p = k as f64 / d as f64;
    if beta.degenerate {
        return Ok(C1C2 {
            c1: -1.0 / p,
            c2: 1.0,
            degenerate: true,
        });
    }
    let beta_sq = beta.value * beta.value;
    let pmf1 = binom::pmf(n - 1, k, d)?;
    let sum1: f64 = (0..n)
        .map(|m| p * pmf1[m] / (t_values[m] * t_values[m]))
        .sum();
    let c1 = beta_sq * sum1 - 1.0 / p;
    let c2 = if n < 2 {
        1.0
    } else {
        let pmf2 = binom::pmf(n - 2, k, d)?;
        let sum2: f64 = (0..n - 1)
            .map(|m| pmf2[m] / (t_values[m + 1] * t_values[m + 1]))
            .sum();
        1.0 - beta_sq * p * p * sum2
    };
    Ok(C1C2 {
        c1,
        c2,
        degenerate: false,
    })
}

fn dim_of(vectors: &[DenseVector]) -> Result<usize> {
    let first = vectors.first().ok_or(Error::Empty("no vectors"))?;
    let d = first.dim();
    for v in vectors {
        if v.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.dim(),
            });
        }
    }
    Ok(d)
}

/// Exact MSE of plain Rand-k decoding: (1/n^2)(d/k - 1) R1.
pub fn mse_rand_k(vectors: &[DenseVector], k: usize) -> Result<f64> {
    let d = dim_of(vectors)?;
    if k == 0 || k > d {
        return Err(Error::Budget { k, d });
    }
    let summary = correlation_summary(vectors)?;
    let n = vectors.len() as f64;
    Ok((d as f64 / k as f64 - 1.0) * summary.r1 / (n * n))
}

fn mse_spatial_from_parts(summary: &CorrelationSummary, n: f64, dk: f64, c: &C1C2) -> f64 {
    if c.degenerate {
        // The decoder outputs zero, so the error is ||x_bar||^2 exactly;
        // this vanishes at the rho = -1 point where the family degenerates.
        return (summary.r1 + summary.r2) / (n * n);
    }
    (dk - 1.0) * summary.r1 / (n * n) + (c.c1 * summary.r1 - c.c2 * summary.r2) / (n * n)
}

/// Exact MSE of a spatial family member:
/// (1/n^2)(d/k - 1) R1 + (1/n^2)(c1 R1 - c2 R2). The degenerate member
/// outputs zero, so its MSE is ||x_bar||^2 = (R1 + R2)/n^2.
pub fn mse_spatial(vectors: &[DenseVector], k: usize, t: &TFunctionSpec) -> Result<f64> {
    if t.n() != vectors.len() {
        return Err(Error::NodeCount {
            expected: t.n(),
            found: vectors.len(),
        });
    }
    mse_spatial_for(vectors, k, &t.values())
}

/// `mse_spatial` over an explicit table [T(1), ..., T(n)] with
/// len = node count.
pub fn mse_spatial_for(vectors: &[DenseVector], k: usize, t_values: &[f64]) -> Result<f64> {
    let d = dim_of(vectors)?;
    if t_values.len() != vectors.len() {
        return Err(Error::NodeCount {
            expected: vectors.len(),
            found: t_values.len(),
        });
    }
    if k == 0 || k > d {
        return Err(Error::Budget { k, d });
    }
    let summary = correlation_summary(vectors)?;
    let c = c1_c2_for(t_values, k, d)?;
    let n = vectors.len() as f64;
    Ok(mse_spatial_from_parts(&summary, n, d as f64 / k as f64, &c))
}

/// Exact MSE of temporal decoding: (1/n^2)(d/k - 1) sum_i ||x_i - b_i||^2.
/// Shared memory uses the same b for every node.
pub fn mse_temporal(vectors: &[DenseVector], memory: &ServerMemory, k: usize) -> Result<f64> {
    let d = dim_of(vectors)?;
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
        if count != vectors.len() {
            return Err(Error::NodeCount {
                expected: count,
                found: vectors.len(),
            });
        }
    }
    let drift: f64 = vectors
        .iter()
        .enumerate()
        .map(|(i, x)| x.dist_sq(memory.node_view(i)))
        .sum();
    let n = vectors.len() as f64;
    Ok((d as f64 / k as f64 - 1.0) * drift / (n * n))
}

/// The MSE-minimizing family member for a known correlation ratio:
/// T*(m) = 1 + rho (m-1)/(n-1). Requires rho in [-1, n-1], the attainable
/// range of R2/R1.
pub fn optimal_t(rho: f64, n: usize) -> Result<TFunctionSpec> {
    if n == 0 {
        return Err(Error::Empty("optimal_t requires n >= 1"));
    }
    let max = (n - 1) as f64;
    if !rho.is_finite() || rho < -1.0 || rho > max {
        return Err(Error::RhoRange { rho, max });
    }
    Ok(TFunctionSpec::spatial_opt(n, rho))
}

/// Largest step size with a convergence guarantee for the quadratic case
/// study under temporal decoding: min{ 1/(1 + 8 alpha), p/2 } with
/// alpha = (1/n)(d/k - 1) and p = k/d.
pub fn eta_bound(n: usize, d: usize, k: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Empty("eta_bound requires n >= 1"));
    }
    if k == 0 || k > d {
        return Err(Error::Budget { k, d });
    }
    let alpha = (d as f64 / k as f64 - 1.0) / n as f64;
    let p = k as f64 / d as f64;
    Ok((1.0 / (1.0 + 8.0 * alpha)).min(p / 2.0))
}
