//! Conditional posteriors of the condition means given the data and the
//! plug-in subject effects b̂ᵢ = Mᵢ. − M.
//!
//! | model          | prior                  | marginal of μⱼ                          |
//! |----------------|------------------------|-----------------------------------------|
//! | homoscedastic  | 1/σ²                   | t_{C(N−1)}(M.ⱼ, SS_{S×C}/(N(N−1)C))      |
//! | homoscedastic  | (1/σ²)^((3−N)/2)       | t_{(C−1)(N−1)}(M.ⱼ, SS_{S×C}/(N(N−1)(C−1))) |
//! | heteroscedastic| Πⱼ 1/σⱼ²               | t_{N−1}(M.ⱼ, Σᵢ(Y'ᵢⱼ−M.ⱼ)²/(N(N−1)))      |
//!
//! The second prior increases without bound in σ² once N > 4, yet still
//! yields a proper posterior for every N ≥ 2. Its HDI is the within-subject CI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{IntervalEstimate, Method};
use crate::parallel::Exec;
use crate::summary::{standardize, summarize};
use crate::table::RepeatedMeasuresTable;
use crate::tdist::{self, ScaledTPosterior};

pub use crate::gibbs::{
    gibbs_sample, gibbs_sample_with, unconditional_posterior_probability, GibbsConfig, GibbsOutput,
    UnconditionalProbability, CONVERGENCE_THRESHOLD,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    Homoscedastic,
    Heteroscedastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Prior {
    /// π ∝ 1/σ².
    Jeffreys,
    /// π ∝ (1/σ²)^((3−N)/2).
    Improper,
    /// π ∝ Πⱼ 1/σⱼ².
    PerConditionJeffreys,
}

/// Marginal conditional posteriors of μ₁…μ_C.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalPosteriorSet {
    pub marginals: Vec<ScaledTPosterior>,
    pub model: Model,
    pub prior: Prior,
}

impl ConditionalPosteriorSet {
    pub fn marginal(&self, j: usize) -> Result<&ScaledTPosterior> {
        self.marginals.get(j).ok_or(Error::ConditionOutOfRange {
            index: j,
            count: self.marginals.len(),
        })
    }

    /// The method whose closed form this posterior's HDI reproduces.
    pub fn method(&self) -> Method {
        match self.prior {
            Prior::Jeffreys => Method::WithinSubjectHDI,
            Prior::Improper => Method::WithinSubjectCI,
            Prior::PerConditionJeffreys => Method::HeteroscedasticHDI,
        }
    }

    pub fn hdi(&self, j: usize, level: f64) -> Result<IntervalEstimate> {
        Ok(tdist::hdi(self.marginal(j)?, level)?.with_method(self.method()))
    }
}

/// `ss` this small relative to the data magnitude is treated as zero.
fn is_degenerate(ss: f64, magnitude: f64) -> bool {
    ss <= 1e-24 * magnitude
}

pub fn conditional_posterior(
    table: &RepeatedMeasuresTable,
    model: Model,
    prior: Prior,
) -> Result<ConditionalPosteriorSet> {
    let n = table.n_subjects() as u64;
    let c = table.n_conditions() as u64;
    let magnitude: f64 = table.values().iter().map(|y| y * y).sum();

    let marginals = match (model, prior) {
        (Model::Homoscedastic, Prior::Jeffreys | Prior::Improper) => {
            let s = summarize(table);
            if is_degenerate(s.ss_interaction, magnitude) {
                return Err(Error::DegeneratePosterior { condition: 0 });
            }
            let (denominator, df) = if prior == Prior::Jeffreys {
                (n * (n - 1) * c, c * (n - 1))
            } else {
                (n * (n - 1) * (c - 1), (c - 1) * (n - 1))
            };
            let scale_sq = s.ss_interaction / denominator as f64;
            s.condition_means
                .iter()
                .map(|&m| ScaledTPosterior::new(m, scale_sq, df))
                .collect::<Result<Vec<_>>>()?
        }
        (Model::Heteroscedastic, Prior::PerConditionJeffreys) => {
            let std = standardize(table);
            let nf = n as f64;
            (0..table.n_conditions())
                .map(|j| {
                    let ss = std.condition_sum_sq(j);
                    if is_degenerate(ss, magnitude) {
                        return Err(Error::DegeneratePosterior { condition: j });
                    }
                    let omega_sq = ss / (nf * (nf - 1.0));
                    ScaledTPosterior::new(std.source_stats().condition_means[j], omega_sq, n - 1)
                })
                .collect::<Result<Vec<_>>>()?
        }
        (m, p) => {
            return Err(Error::UnsupportedPairing(format!(
                "{m:?} model with {p:?} prior"
            )))
        }
    };
    Ok(ConditionalPosteriorSet { marginals, model, prior })
}

/// Conditional posterior mass of `interval` for μⱼ.
pub fn modified_posterior_probability(
    post: &ConditionalPosteriorSet,
    j: usize,
    interval: &IntervalEstimate,
) -> Result<f64> {
    Ok(post.marginal(j)?.probability_between(interval.lower, interval.upper))
}

/// Fraction of `n` conditional-posterior draws of μⱼ that land in `interval`.
pub fn mc_verify_modified_probability(
    post: &ConditionalPosteriorSet,
    j: usize,
    interval: &IntervalEstimate,
    n: usize,
    seed: u64,
) -> Result<f64> {
    mc_verify_modified_probability_with(post, j, interval, n, seed, Exec::default())
}

pub fn mc_verify_modified_probability_with(
    post: &ConditionalPosteriorSet,
    j: usize,
    interval: &IntervalEstimate,
    n: usize,
    seed: u64,
    exec: Exec,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one draw".into()));
    }
    let dist = post.marginal(j)?;
    let hits = tdist::count_between(dist, n, seed, interval.lower, interval.upper, exec);
    Ok(hits as f64 / n as f64)
}
