//! The self-check suite behind `corrmean verify`: formula-versus-oracle
//! equivalence on an enumerable grid, optimality of the matched scaling
//! function, closed-form anchor values, and estimator unbiasedness.
//!
//! Instances too large for enumeration (or forced small via the pattern
//! cap) fall back to Monte Carlo at 4 standard errors with one re-seeded
//! retry; those checks are statistical and say so in their detail text.

use rand_distr::StandardNormal;
use rand::Rng;

use crate::analytics::{
    c1_c2, correlation_summary, mse_rand_k, mse_spatial, mse_spatial_for, mse_temporal,
    optimal_t,
};
use crate::error::{Error, Result};
use crate::estimate::{beta_bar, DecoderSpec};
use crate::oracle::{self, enumerate_encoder};
use crate::rng;
use crate::sparsify::EncoderSpec;
use crate::types::{DenseVector, ServerMemory, TFunctionSpec};

/// One verification check: a stable name, the outcome, and a short detail
/// line (the measured numbers, or the failing instance).
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Suite configuration: the enumeration cap (lowering it forces the Monte
/// Carlo fallback) and the master seed for all generated instances.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub max_patterns: u64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            max_patterns: oracle::DEFAULT_PATTERN_LIMIT,
            seed: 7,
        }
    }
}

/// The (n, d, k) grid every equivalence and optimality check runs on.
pub const GRID: [(usize, usize, usize); 5] =
    [(1, 2, 1), (2, 2, 1), (2, 3, 1), (3, 4, 2), (2, 4, 2)];

const GRID_SEEDS: u64 = 5;
const MC_TRIALS: usize = 20_000;

fn gaussian_vectors(master: u64, label: &str, n: usize, d: usize) -> Vec<DenseVector> {
    let mut stream = rng::stream(master, label);
    (0..n)
        .map(|_| {
            let values = (0..d).map(|_| stream.sample(StandardNormal)).collect();
            DenseVector::new(values).expect("finite draws")
        })
        .collect()
}

fn clamp_rho(rho: f64, n: usize) -> f64 {
    rho.clamp(-1.0, (n - 1) as f64)
}

/// The five decoders checked per grid instance, with their analytic MSE.
fn instance_decoders(
    vectors: &[DenseVector],
    memory: &ServerMemory,
    k: usize,
) -> Result<Vec<(DecoderSpec, f64)>> {
    let n = vectors.len();
    let rho = correlation_summary(vectors)?
        .rho
        .map(|r| clamp_rho(r, n));
    let mut out = vec![(DecoderSpec::RandK, mse_rand_k(vectors, k)?)];
    let mut spatial = vec![
        TFunctionSpec::spatial_max(n),
        TFunctionSpec::spatial_avg(n),
    ];
    if let Some(r) = rho {
        spatial.push(TFunctionSpec::spatial_opt(n, r));
    }
    for t in spatial {
        let mse = mse_spatial(vectors, k, &t)?;
        out.push((DecoderSpec::Spatial(t), mse));
    }
    out.push((
        DecoderSpec::Temporal(memory.clone()),
        mse_temporal(vectors, memory, k)?,
    ));
    Ok(out)
}

/// Compares one analytic MSE against the oracle, enumerating when the
/// pattern space fits under the cap and falling back to Monte Carlo
/// otherwise. Returns (passed, detail).
fn oracle_agreement(
    vectors: &[DenseVector],
    k: usize,
    decoder: &DecoderSpec,
    analytic: f64,
    opts: &VerifyOptions,
    instance: &str,
) -> (bool, String) {
    let encoder = EncoderSpec::rand_k(k);
    match enumerate_encoder(vectors, &encoder, decoder, opts.max_patterns) {
        Ok(exact) => {
            let denom = exact.mse.abs().max(f64::MIN_POSITIVE);
            let rel = (analytic - exact.mse).abs() / denom;
            let max_bias = exact
                .bias
                .values()
                .iter()
                .fold(0.0f64, |m, b| m.max(b.abs()));
            let passed = rel <= 1e-9 && max_bias <= 1e-12;
            (
                passed,
                format!(
                    "enumerated {} patterns, rel err {rel:.3e}, max bias {max_bias:.3e}",
                    exact.patterns
                ),
            )
        }
        Err(Error::EnumerationTooLarge { .. }) => {
            for attempt in 0..2u64 {
                let seed = rng::derive_seed(
                    opts.seed,
                    &format!("verify.mc.{instance}.{attempt}"),
                );
                let mc = match oracle::monte_carlo(vectors, &encoder, decoder, MC_TRIALS, seed)
                {
                    Ok(mc) => mc,
                    Err(e) => return (false, format!("monte carlo failed: {e}")),
                };
                // The relative epsilon absorbs accumulation rounding when the
                // per-trial error is constant and the standard error is zero.
                let mse_ok =
                    (mc.mse_hat - analytic).abs() <= 4.0 * mc.stderr + 1e-10 * analytic.abs();
                let x_bar = crate::types::mean_vector(vectors).expect("nonempty");
                let bias_ok = mc
                    .mean_estimate
                    .values()
                    .iter()
                    .zip(x_bar.values())
                    .zip(&mc.est_stderr)
                    .all(|((est, truth), se)| {
                        (est - truth).abs() <= 4.0 * se + 1e-12 + 1e-10 * truth.abs()
                    });
                if mse_ok && bias_ok {
                    return (
                        true,
                        format!(
                            "statistical fallback ({MC_TRIALS} trials, attempt {attempt}): \
                             |{:.6e} - {analytic:.6e}| <= 4 x {:.3e}",
                            mc.mse_hat, mc.stderr
                        ),
                    );
                }
            }
            (false, "statistical fallback failed twice".to_string())
        }
        Err(e) => (false, format!("oracle error: {e}")),
    }
}

/// Analytic-versus-oracle MSE and bias agreement over the grid, all
/// decoder families, five seeded instances each.
pub fn grid_equivalence(opts: &VerifyOptions) -> Vec<Check> {
    let mut checks = Vec::new();
    for &(n, d, k) in &GRID {
        for s in 0..GRID_SEEDS {
            let label = format!("verify.grid.{n}.{d}.{k}.{s}");
            let vectors = gaussian_vectors(opts.seed, &label, n, d);
            let memory = ServerMemory::per_node(gaussian_vectors(
                opts.seed,
                &format!("{label}.mem"),
                n,
                d,
            ))
            .expect("consistent dims");
            let pairs = match instance_decoders(&vectors, &memory, k) {
                Ok(p) => p,
                Err(e) => {
                    checks.push(Check::new(
                        format!("grid n={n} d={d} k={k} seed={s}"),
                        false,
                        format!("setup error: {e}"),
                    ));
                    continue;
                }
            };
            for (decoder, analytic) in pairs {
                let instance = format!("grid.{n}.{d}.{k}.{s}.{}", decoder.label());
                let (passed, detail) =
                    oracle_agreement(&vectors, k, &decoder, analytic, opts, &instance);
                checks.push(Check::new(
                    format!("grid n={n} d={d} k={k} seed={s} {}", decoder.label()),
                    passed,
                    detail,
                ));
            }
        }
    }
    checks
}

/// The matched scaling function beats 100 random positive alternatives on
/// every grid instance (50 perturbations of itself, 50 arbitrary tables).
pub fn optimality(opts: &VerifyOptions) -> Vec<Check> {
    let mut checks = Vec::new();
    for &(n, d, k) in &GRID {
        for s in 0..GRID_SEEDS {
            let label = format!("verify.grid.{n}.{d}.{k}.{s}");
            let vectors = gaussian_vectors(opts.seed, &label, n, d);
            let name = format!("optimality n={n} d={d} k={k} seed={s}");
            let result = (|| -> Result<(bool, String)> {
                let summary = correlation_summary(&vectors)?;
                let rho = clamp_rho(summary.rho.unwrap_or(0.0), n);
                let star = optimal_t(rho, n)?;
                let star_values = star.values();
                let mse_star = mse_spatial(&vectors, k, &star)?;
                let mut stream =
                    rng::stream(opts.seed, &format!("verify.opt.{n}.{d}.{k}.{s}"));
                let mut worst_margin = f64::INFINITY;
                for trial in 0..100 {
                    let candidate: Vec<f64> = if trial < 50 {
                        star_values
                            .iter()
                            .map(|t| {
                                let noise: f64 = stream.sample(StandardNormal);
                                (t.max(1e-6)) * (0.5 * noise).exp()
                            })
                            .collect()
                    } else {
                        (0..n).map(|_| stream.gen_range(0.1..5.0)).collect()
                    };
                    let mse = mse_spatial_for(&vectors, k, &candidate)?;
                    worst_margin = worst_margin.min(mse - mse_star);
                    if mse_star > mse + 1e-12 {
                        return Ok((
                            false,
                            format!(
                                "beaten by candidate {trial}: {mse_star:.6e} > {mse:.6e}"
                            ),
                        ));
                    }
                }
                Ok((
                    true,
                    format!("rho {rho:.4}, smallest margin {worst_margin:.3e}"),
                ))
            })();
            match result {
                Ok((passed, detail)) => checks.push(Check::new(name, passed, detail)),
                Err(e) => checks.push(Check::new(name, false, format!("error: {e}"))),
            }
        }
    }
    checks
}

/// Closed-form anchor values: the exact flat-T constant, vanishing c1/c2,
/// the attainable correlation range, and the zero-MSE degenerate point.
pub fn anchors(opts: &VerifyOptions) -> Vec<Check> {
    let mut checks = Vec::new();

    let mut flat_ok = true;
    let mut flat_detail = String::new();
    for (n, k, d) in [(2usize, 1usize, 2usize), (5, 2, 3), (10, 10, 100), (3, 7, 13)] {
        let b = beta_bar(&TFunctionSpec::rand_k(n), k, d).expect("valid instance");
        if b.value != d as f64 / k as f64 || b.degenerate {
            flat_ok = false;
            flat_detail = format!("beta_bar mismatch at n={n} k={k} d={d}: {}", b.value);
            break;
        }
    }
    checks.push(Check::new(
        "anchor beta_bar flat T equals d/k exactly",
        flat_ok,
        if flat_ok { "bitwise equal on all probes".into() } else { flat_detail },
    ));

    let mut c_ok = true;
    let mut c_detail = String::from("all within 1e-12");
    for &(n, d, k) in &GRID {
        let c = c1_c2(&TFunctionSpec::rand_k(n), k, d).expect("valid instance");
        // A single node has no cross terms, so c2 stays at its empty-sum
        // value of one there; it multiplies a ratio term that is zero.
        let c2_target = if n == 1 { 1.0 } else { 0.0 };
        if c.c1.abs() > 1e-12 || (c.c2 - c2_target).abs() > 1e-12 {
            c_ok = false;
            c_detail = format!("c1={:.3e} c2={:.3e} at n={n} d={d} k={k}", c.c1, c.c2);
            break;
        }
    }
    checks.push(Check::new("anchor c1 c2 vanish for flat T", c_ok, c_detail));

    let mut range_ok = true;
    let mut range_detail = String::from("10000 instances inside [-1, n-1]");
    let mut stream = rng::stream(opts.seed, "verify.rho.range");
    for i in 0..10_000 {
        let n = stream.gen_range(2..=6usize);
        let d = stream.gen_range(2..=8usize);
        let vectors: Vec<DenseVector> = (0..n)
            .map(|_| {
                DenseVector::new((0..d).map(|_| stream.sample(StandardNormal)).collect())
                    .expect("finite")
            })
            .collect();
        let summary = correlation_summary(&vectors).expect("nonempty");
        let rho = summary.rho.expect("r1 > 0 with continuous draws");
        if !(-1.0..=(n as f64 - 1.0)).contains(&rho) {
            range_ok = false;
            range_detail = format!("instance {i}: rho {rho} outside [-1, {}]", n - 1);
            break;
        }
    }
    checks.push(Check::new(
        "anchor rho range on random instances",
        range_ok,
        range_detail,
    ));

    let identical = vec![DenseVector::new(vec![0.5, -0.25, 1.0]).expect("finite"); 10];
    let rho_id = correlation_summary(&identical).expect("nonempty").rho;
    checks.push(Check::new(
        "anchor identical vectors reach rho = n-1 exactly",
        rho_id == Some(9.0),
        format!("rho = {rho_id:?}"),
    ));

    // Exact negation: the sum cancels exactly, rho is exactly -1, and the
    // degenerate member has zero error by formula and by enumeration.
    let x = DenseVector::new(vec![0.3, -0.7, 1.1]).expect("finite");
    let neg = DenseVector::new(x.values().iter().map(|v| -v).collect()).expect("finite");
    let vectors = [x, neg];
    let degenerate_check = (|| -> Result<(bool, String)> {
        let rho = correlation_summary(&vectors)?.rho;
        if rho != Some(-1.0) {
            return Ok((false, format!("rho = {rho:?}, expected exactly -1")));
        }
        let t = optimal_t(-1.0, 2)?;
        let formula = mse_spatial(&vectors, 1, &t)?;
        let exact = oracle::enumerate_exact(&vectors, 1, &DecoderSpec::Spatial(t))?;
        Ok((
            formula == 0.0 && exact.mse == 0.0,
            format!("formula {formula:e}, enumeration {:e}", exact.mse),
        ))
    })();
    match degenerate_check {
        Ok((passed, detail)) => checks.push(Check::new(
            "anchor degenerate member has zero MSE at rho = -1",
            passed,
            detail,
        )),
        Err(e) => checks.push(Check::new(
            "anchor degenerate member has zero MSE at rho = -1",
            false,
            format!("error: {e}"),
        )),
    }

    checks
}

/// Every decoder with its paired encoder is unbiased, by exact weighted
/// enumeration on the small grid (Monte Carlo fallback under a low cap).
pub fn unbiasedness(opts: &VerifyOptions) -> Vec<Check> {
    let mut checks = Vec::new();
    for n in [1usize, 2, 3] {
        for d in [2usize, 3, 4] {
            for k in [1usize, 2] {
                let label = format!("verify.unbiased.{n}.{d}.{k}");
                let vectors = gaussian_vectors(opts.seed, &label, n, d);
                let memory = ServerMemory::per_node(gaussian_vectors(
                    opts.seed,
                    &format!("{label}.mem"),
                    n,
                    d,
                ))
                .expect("consistent dims");
                let mut pairs: Vec<(EncoderSpec, DecoderSpec)> = vec![
                    (EncoderSpec::rand_k(k), DecoderSpec::RandK),
                    (
                        EncoderSpec::rand_k(k),
                        DecoderSpec::Spatial(TFunctionSpec::spatial_max(n)),
                    ),
                    (
                        EncoderSpec::rand_k(k),
                        DecoderSpec::Spatial(TFunctionSpec::spatial_avg(n)),
                    ),
                    (
                        EncoderSpec::rand_k(k),
                        DecoderSpec::Temporal(memory.clone()),
                    ),
                    (EncoderSpec::wangni(k), DecoderSpec::Prescaled),
                ];
                if k >= 2 {
                    pairs.push((
                        EncoderSpec::induced(k, 0.5).expect("valid split"),
                        DecoderSpec::Prescaled,
                    ));
                }
                for (encoder, decoder) in pairs {
                    let name = format!(
                        "unbiased n={n} d={d} k={k} {}+{}",
                        encoder.label(),
                        decoder.label()
                    );
                    let (passed, detail) = bias_check(
                        &vectors, &encoder, &decoder, opts,
                        &format!("unbiased.{n}.{d}.{k}.{}.{}", encoder.label(), decoder.label()),
                    );
                    checks.push(Check::new(name, passed, detail));
                }
            }
        }
    }
    checks
}

fn bias_check(
    vectors: &[DenseVector],
    encoder: &EncoderSpec,
    decoder: &DecoderSpec,
    opts: &VerifyOptions,
    instance: &str,
) -> (bool, String) {
    match enumerate_encoder(vectors, encoder, decoder, opts.max_patterns) {
        Ok(exact) => {
            let max_bias = exact
                .bias
                .values()
                .iter()
                .fold(0.0f64, |m, b| m.max(b.abs()));
            (
                max_bias <= 1e-12,
                format!("enumerated {} patterns, max bias {max_bias:.3e}", exact.patterns),
            )
        }
        Err(Error::EnumerationTooLarge { .. }) => {
            let x_bar = crate::types::mean_vector(vectors).expect("nonempty");
            for attempt in 0..2u64 {
                let seed =
                    rng::derive_seed(opts.seed, &format!("verify.mc.{instance}.{attempt}"));
                let mc = match oracle::monte_carlo(vectors, encoder, decoder, MC_TRIALS, seed) {
                    Ok(mc) => mc,
                    Err(e) => return (false, format!("monte carlo failed: {e}")),
                };
                let ok = mc
                    .mean_estimate
                    .values()
                    .iter()
                    .zip(x_bar.values())
                    .zip(&mc.est_stderr)
                    .all(|((est, truth), se)| {
                        (est - truth).abs() <= 4.0 * se + 1e-12 + 1e-10 * truth.abs()
                    });
                if ok {
                    return (
                        true,
                        format!("statistical fallback ({MC_TRIALS} trials, attempt {attempt})"),
                    );
                }
            }
            (false, "statistical bias fallback failed twice".to_string())
        }
        Err(e) => (false, format!("oracle error: {e}")),
    }
}

/// Runs every group and concatenates the checks.
pub fn run_all(opts: &VerifyOptions) -> Vec<Check> {
    let mut checks = grid_equivalence(opts);
    checks.extend(optimality(opts));
    checks.extend(anchors(opts));
    checks.extend(unbiasedness(opts));
    checks
}
