use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::ScoreMatrix;

/// Rejection attempts before [`sample_truncated_normal`] gives up.
pub const TRUNCATION_ATTEMPTS: usize = 1_000_000;

fn check_sigma(name: &str, sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {sigma}"
        )));
    }
    Ok(())
}

/// One draw from a bivariate normal with the given marginals and correlation.
///
/// `b` is built as `rho * u + sqrt(1 - rho^2) * v` over independent standard
/// normals; both normals are always drawn so the stream length does not
/// depend on `rho`.
pub fn sample_bivariate_normal<R: Rng + ?Sized>(
    mu_a: f64,
    mu_b: f64,
    sigma_a: f64,
    sigma_b: f64,
    rho: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    check_sigma("sigma_a", sigma_a)?;
    check_sigma("sigma_b", sigma_b)?;
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!("rho must lie in [-1, 1], got {rho}")));
    }
    Ok(bivariate_unchecked(mu_a, mu_b, sigma_a, sigma_b, rho, rng))
}

#[inline]
pub(crate) fn bivariate_unchecked<R: Rng + ?Sized>(
    mu_a: f64,
    mu_b: f64,
    sigma_a: f64,
    sigma_b: f64,
    rho: f64,
    rng: &mut R,
) -> (f64, f64) {
    let u: f64 = rng.sample(StandardNormal);
    let v: f64 = rng.sample(StandardNormal);
    let w = rho * u + (1.0 - rho * rho).max(0.0).sqrt() * v;
    (mu_a + sigma_a * u, mu_b + sigma_b * w)
}

/// Normal `N(mu, sigma^2)` conditioned on `[lo, hi]`, by rejection.
///
/// `sigma == 0` is the point-mass limit and returns `mu` when it lies in the
/// window. Fails when the window lies beyond 37 standard deviations of `mu`
/// (zero mass in double precision) or after [`TRUNCATION_ATTEMPTS`] rejections.
pub fn sample_truncated_normal<R: Rng + ?Sized>(
    mu: f64,
    sigma: f64,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<f64> {
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "truncation window needs lo < hi and finite mu, got [{lo}, {hi}], mu = {mu}"
        )));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be non-negative and finite, got {sigma}"
        )));
    }
    let no_mass = || Error::TruncationMass { mu, sigma, lo, hi };
    if sigma == 0.0 {
        return if (lo..=hi).contains(&mu) { Ok(mu) } else { Err(no_mass()) };
    }
    if (lo - mu) / sigma > 37.0 || (hi - mu) / sigma < -37.0 {
        return Err(no_mass());
    }
    for _ in 0..TRUNCATION_ATTEMPTS {
        let z: f64 = rng.sample(StandardNormal);
        let v = mu + sigma * z;
        if (lo..=hi).contains(&v) {
            return Ok(v);
        }
    }
    Err(no_mass())
}

/// Bucket of `v` (1-based): the smallest `k` with `v <= thresholds[k-1]`,
/// else `thresholds.len() + 1`. `thresholds` must be sorted.
#[inline]
pub(crate) fn bucket(v: f64, thresholds: &[f64]) -> usize {
    thresholds.partition_point(|&t| t < v) + 1
}

pub(crate) fn discretize_into(values: &[f64], thresholds: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend(values.iter().map(|&v| bucket(v, thresholds) as f64));
}

/// Maps each score to its bucket index `1..=G` where `G = thresholds.len() + 1`.
pub fn discretize(m: &ScoreMatrix, thresholds: &[f64]) -> Result<ScoreMatrix> {
    if thresholds.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("thresholds must be finite".into()));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "thresholds must be strictly ascending".into(),
        ));
    }
    let mut out = Vec::with_capacity(m.values().len());
    discretize_into(m.values(), thresholds, &mut out);
    m.with_values(out)
}
