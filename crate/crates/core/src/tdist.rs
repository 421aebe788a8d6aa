//! Student-t kernel: density, CDF, quantile, sampling and HDIs of the
//! location-scale form.

use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::error::{check_level, Error, Result};
use crate::estimate::{Df, IntervalEstimate, Method};
use crate::parallel::{chunks, stream_rng, Exec};

/// Location-scale Student-t, `location + sqrt(scale_sq) · T_df`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledTPosterior {
    location: f64,
    scale_sq: f64,
    df: u64,
}

impl ScaledTPosterior {
    pub fn new(location: f64, scale_sq: f64, df: u64) -> Result<Self> {
        if !location.is_finite() {
            return Err(Error::InvalidParameter(format!("location must be finite, got {location}")));
        }
        if !(scale_sq > 0.0 && scale_sq.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "squared scale must be positive and finite, got {scale_sq}"
            )));
        }
        check_df(df)?;
        Ok(Self { location, scale_sq, df })
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn scale_sq(&self) -> f64 {
        self.scale_sq
    }

    pub fn scale(&self) -> f64 {
        self.scale_sq.sqrt()
    }

    pub fn df(&self) -> u64 {
        self.df
    }

    /// Standard deviation, defined for df > 2.
    pub fn std_dev(&self) -> Option<f64> {
        (self.df > 2).then(|| (self.scale_sq * self.df as f64 / (self.df as f64 - 2.0)).sqrt())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        t_pdf(self.df, (x - self.location) / self.scale()) / self.scale()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        t_cdf(self.df, (x - self.location) / self.scale())
    }

    /// Posterior mass of `[lower, upper]`.
    pub fn probability_between(&self, lower: f64, upper: f64) -> f64 {
        if upper <= lower {
            return 0.0;
        }
        let s = self.scale();
        let a = (lower - self.location) / s;
        let b = (upper - self.location) / s;
        // Difference of upper tails is more accurate when both bounds sit far right.
        let p = if a > 0.0 {
            t_sf(self.df, a) - t_sf(self.df, b)
        } else {
            t_cdf(self.df, b) - t_cdf(self.df, a)
        };
        p.clamp(0.0, 1.0)
    }
}

fn check_df(df: u64) -> Result<()> {
    if df >= 1 {
        Ok(())
    } else {
        Err(Error::InvalidDf(df))
    }
}

pub fn t_pdf(df: u64, x: f64) -> f64 {
    let v = df as f64;
    let log_norm = ln_gamma((v + 1.0) / 2.0) - ln_gamma(v / 2.0) - 0.5 * (v * std::f64::consts::PI).ln();
    (log_norm - (v + 1.0) / 2.0 * (x * x / v).ln_1p()).exp()
}

/// Upper tail P(T > x) for x ≥ 0, via the regularized incomplete beta.
fn upper_tail(df: u64, x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x.is_infinite() {
        return 0.0;
    }
    let v = df as f64;
    let x2 = x * x;
    if x2 < v {
        // Near the centre I_{x²/(ν+x²)}(1/2, ν/2) avoids forming 1 − tiny.
        0.5 - 0.5 * beta_reg(0.5, v / 2.0, x2 / (v + x2))
    } else {
        0.5 * beta_reg(v / 2.0, 0.5, v / (v + x2))
    }
}

/// Survival function P(T > x).
pub fn t_sf(df: u64, x: f64) -> f64 {
    if x >= 0.0 {
        upper_tail(df, x)
    } else {
        1.0 - upper_tail(df, -x)
    }
}

/// P(T ≤ x). Panics on `df == 0`; use [`t_quantile`] for checked input.
pub fn t_cdf(df: u64, x: f64) -> f64 {
    assert!(df >= 1, "degrees of freedom must be at least 1");
    if x.is_nan() {
        return f64::NAN;
    }
    if x == 0.0 {
        0.5
    } else if x > 0.0 {
        1.0 - upper_tail(df, x)
    } else {
        upper_tail(df, -x)
    }
}

/// The `p` quantile of Student-t with `df` degrees of freedom.
///
/// Brackets the root of the upper tail, bisects, then polishes with Newton
/// steps kept inside the bracket.
pub fn t_quantile(df: u64, p: f64) -> Result<f64> {
    check_df(df)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let (tail, sign) = if p > 0.5 { (1.0 - p, 1.0) } else { (p, -1.0) };
    Ok(sign * solve_upper_tail(df, tail))
}

fn solve_upper_tail(df: u64, tail: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while upper_tail(df, hi) > tail {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-9 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if upper_tail(df, mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..8 {
        let f = upper_tail(df, x) - tail;
        let d = t_pdf(df, x);
        if d <= 0.0 {
            break;
        }
        // d/dx upper_tail = −pdf
        let next = (x + f / d).clamp(lo, hi);
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x {
            break;
        }
    }
    x
}

/// The `p` quantile of the standard normal, the df → ∞ limit of [`t_quantile`].
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(Normal::standard().inverse_cdf(p))
}

/// Upper `(1 − level)/2` criterion value of Student-t.
pub fn criterion_t(df: u64, level: f64) -> Result<f64> {
    check_level(level)?;
    t_quantile(df, 1.0 - (1.0 - level) / 2.0)
}

/// Upper `(1 − level)/2` criterion value of the standard normal.
pub fn criterion_z(level: f64) -> Result<f64> {
    check_level(level)?;
    normal_quantile(1.0 - (1.0 - level) / 2.0)
}

const SAMPLE_CHUNK: usize = 1 << 14;

/// `n` i.i.d. draws from `dist`, reproducible for a fixed seed.
pub fn t_sample(dist: &ScaledTPosterior, n: usize, seed: u64) -> Vec<f64> {
    t_sample_with(dist, n, seed, Exec::default())
}

pub fn t_sample_with(dist: &ScaledTPosterior, n: usize, seed: u64, exec: Exec) -> Vec<f64> {
    let pieces = chunks(n, SAMPLE_CHUNK);
    exec.map(pieces.len(), |k| {
        let (stream, len) = pieces[k];
        sample_chunk(dist, len, seed, stream as u64)
    })
    .concat()
}

/// Number of draws from `dist` landing in `[lower, upper]`, drawn in the same
/// chunked streams as [`t_sample_with`] without materialising them.
pub(crate) fn count_between(
    dist: &ScaledTPosterior,
    n: usize,
    seed: u64,
    lower: f64,
    upper: f64,
    exec: Exec,
) -> usize {
    let pieces = chunks(n, SAMPLE_CHUNK);
    exec.map(pieces.len(), |k| {
        let (stream, len) = pieces[k];
        sample_chunk(dist, len, seed, stream as u64)
            .into_iter()
            .filter(|&x| lower <= x && x <= upper)
            .count()
    })
    .into_iter()
    .sum()
}

fn sample_chunk(dist: &ScaledTPosterior, len: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, stream);
    let chi = ChiSquared::new(dist.df as f64).expect("df ≥ 1");
    let v = dist.df as f64;
    let s = dist.scale();
    (0..len)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            let w: f64 = chi.sample(&mut rng);
            dist.location + s * z / (w / v).sqrt()
        })
        .collect()
}

/// Highest-density interval of `dist` at `level`.
///
/// The density is symmetric and unimodal about `location`, so the
/// equal-tailed interval is the HDI and the density cutoff never needs to be
/// computed.
pub fn hdi(dist: &ScaledTPosterior, level: f64) -> Result<IntervalEstimate> {
    let half = dist.scale() * criterion_t(dist.df, level)?;
    IntervalEstimate::new(dist.location, half, level, Df::Finite(dist.df), Method::WithinSubjectHDI)
}
