//! Closed-form queueing results used as oracles and by the `oracle` command.

use crate::error::{Error, Result};
use crate::math;

/// Erlang-B blocking for `servers` servers offered `erlangs` of traffic,
/// by the stable recursion `B_k = a B_{k-1} / (k + a B_{k-1})`.
pub fn erlang_b(servers: u32, erlangs: f64) -> Result<f64> {
    if !(erlangs >= 0.0) || !erlangs.is_finite() {
        return Err(Error::domain("offered load must be >= 0"));
    }
    let mut b = 1.0;
    for k in 1..=servers {
        b = erlangs * b / (f64::from(k) + erlangs * b);
    }
    Ok(b)
}

fn stable(lambda: f64, mu: f64) -> Result<()> {
    if !(lambda >= 0.0 && mu > 0.0) {
        return Err(Error::domain("rates must satisfy lambda >= 0, mu > 0"));
    }
    if !(lambda < mu) {
        return Err(Error::domain("unstable queue: lambda >= mu"));
    }
    Ok(())
}

/// M/M/1 mean sojourn `1 / (mu - lambda)`.
pub fn mm1_sojourn(lambda: f64, mu: f64) -> Result<f64> {
    stable(lambda, mu)?;
    Ok(1.0 / (mu - lambda))
}

/// M/M/1 mean number in system `rho / (1 - rho)`.
pub fn mm1_in_system(lambda: f64, mu: f64) -> Result<f64> {
    stable(lambda, mu)?;
    let rho = lambda / mu;
    Ok(rho / (1.0 - rho))
}

const T975: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145, 2.131,
    2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
];

/// Two-sided 95 % Student-t quantile; normal approximation past 30 df.
pub fn student_t_975(df: u32) -> Option<f64> {
    match df {
        0 => None,
        1..=30 => Some(T975[df as usize - 1]),
        _ => Some(1.960),
    }
}

/// Sample mean and 95 % confidence half-width. The half-width is `None`
/// with fewer than two samples.
pub fn mean_ci(samples: &[f64]) -> Option<(f64, Option<f64>)> {
    if samples.is_empty() {
        return None;
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return Some((mean, None));
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let t = student_t_975(samples.len() as u32 - 1)?;
    Some((mean, Some(t * math::sqrt(var / n))))
}
