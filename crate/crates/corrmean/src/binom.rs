//! Binomial probability mass evaluation by multiplicative recurrence.
//!
//! Shared by the estimator normalization constant and the closed-form error
//! coefficients, so there is exactly one numerically audited code path. The
//! success probability is always the sampling rate k/d and is passed as the
//! integer pair, keeping the complement (d - k)/d exact.

use crate::error::{Error, Result};

/// Probability mass of Binomial(trials, k/d) over 0..=trials.
///
/// Terms follow the ratio t_{m+1}/t_m = ((trials - m)/(m + 1)) * (p/q) in
/// linear space, switching to a log-space recurrence when q^trials would
/// underflow. Stable for trials up to 1e4.
pub fn pmf(trials: usize, k: usize, d: usize) -> Result<Vec<f64>> {
    if k == 0 || k > d {
        return Err(Error::Budget { k, d });
    }
    if trials == 0 {
        return Ok(vec![1.0]);
    }
    if k == d {
        let mut v = vec![0.0; trials + 1];
        v[trials] = 1.0;
        return Ok(v);
    }
    let p = k as f64 / d as f64;
    let q = (d - k) as f64 / d as f64;
    let t = trials as f64;
    let mut out = Vec::with_capacity(trials + 1);
    if t * q.ln() > -700.0 {
        let ratio = p / q;
        let mut term = q.powi(trials as i32);
        out.push(term);
        for m in 0..trials {
            term *= (t - m as f64) / (m as f64 + 1.0) * ratio;
            out.push(term);
        }
    } else {
        let (lp, lq) = (p.ln(), q.ln());
        let mut lterm = t * lq;
        out.push(lterm.exp());
        for m in 0..trials {
            lterm += ((t - m as f64) / (m as f64 + 1.0)).ln() + lp - lq;
            out.push(lterm.exp());
        }
    }
    Ok(out)
}
