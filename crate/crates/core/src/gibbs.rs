//! Fully Bayesian one-way random-effects model, used to report the
//! unconditional posterior mass of a within-subject interval.
//!
//! Yᵢⱼ = μⱼ + bᵢ + εᵢⱼ, εᵢⱼ ~ N(0, σ²_ε), bᵢ ~ N(0, σ²_b), flat prior on μ,
//! inverse-gamma priors on both variances.
//!
//! Each sweep draws (μ, b) jointly given the variances: μ from its
//! b-marginalised conditional N(M.·, (σ²_ε I + σ²_b J)/N), then b given μ.
//! The common-shift direction between μ and b therefore mixes in one step.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::IntervalEstimate;
use crate::parallel::{stream_rng, Exec};
use crate::summary::summarize;
use crate::table::RepeatedMeasuresTable;

/// Inverse-gamma shape and scale on σ²_ε.
const ERROR_VARIANCE_HYPER: f64 = 0.001;
/// Pooled-to-within variance ratio above which the chains are declared unconverged.
pub const CONVERGENCE_THRESHOLD: f64 = 1.1;
const CHAINS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GibbsConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Inverse-gamma shape and scale on σ²_b.
    pub random_effect_prior_sd_hyper: f64,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self {
            iterations: 5000,
            burn_in: 1000,
            seed: 1,
            random_effect_prior_sd_hyper: 0.001,
        }
    }
}

impl GibbsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1000 {
            return Err(Error::InvalidParameter(format!(
                "need at least 1000 iterations, got {}",
                self.iterations
            )));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidParameter(format!(
                "burn-in {} must be below the iteration count {}",
                self.burn_in, self.iterations
            )));
        }
        if !(self.random_effect_prior_sd_hyper > 0.0 && self.random_effect_prior_sd_hyper.is_finite()) {
            return Err(Error::InvalidParameter(
                "random-effect prior hyperparameter must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Post-burn-in draws of μ, `draws[chain][condition][iteration]`.
#[derive(Debug, Clone)]
pub struct GibbsOutput {
    draws: Vec<Vec<Vec<f64>>>,
}

/// Unconditional posterior mass of an interval with its Monte Carlo error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnconditionalProbability {
    pub estimate: f64,
    pub mc_standard_error: f64,
    pub variance_ratio: f64,
}

impl GibbsOutput {
    pub fn n_conditions(&self) -> usize {
        self.draws[0].len()
    }

    pub fn draws_per_chain(&self) -> usize {
        self.draws[0][0].len()
    }

    pub fn pooled(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.draws.iter().flat_map(move |chain| chain[j].iter().copied())
    }

    pub fn posterior_mean(&self, j: usize) -> f64 {
        let n = (self.draws.len() * self.draws_per_chain()) as f64;
        self.pooled(j).sum::<f64>() / n
    }

    pub fn posterior_sd(&self, j: usize) -> f64 {
        let mean = self.posterior_mean(j);
        let n = (self.draws.len() * self.draws_per_chain()) as f64;
        (self.pooled(j).map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    }

    /// Split-chain ratio of pooled to within-sequence variance of μⱼ.
    pub fn variance_ratio(&self, j: usize) -> f64 {
        let half = self.draws_per_chain() / 2;
        let seqs: Vec<&[f64]> = self
            .draws
            .iter()
            .flat_map(|chain| [&chain[j][..half], &chain[j][half..2 * half]])
            .collect();
        let m = half as f64;
        let means: Vec<f64> = seqs.iter().map(|s| s.iter().sum::<f64>() / m).collect();
        let within = seqs
            .iter()
            .zip(&means)
            .map(|(s, mu)| s.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (m - 1.0))
            .sum::<f64>()
            / seqs.len() as f64;
        let grand = means.iter().sum::<f64>() / means.len() as f64;
        let between_over_m =
            means.iter().map(|mu| (mu - grand).powi(2)).sum::<f64>() / (means.len() as f64 - 1.0);
        if within == 0.0 {
            return if between_over_m == 0.0 { 1.0 } else { f64::INFINITY };
        }
        ((m - 1.0) / m * within + between_over_m) / within
    }

    /// Posterior fraction of μⱼ in `[lower, upper]`, with a batch-means standard error.
    pub fn probability_between(&self, j: usize, lower: f64, upper: f64) -> (f64, f64) {
        let per_chain = self.draws_per_chain();
        let batch = (per_chain as f64).sqrt().floor().max(1.0) as usize;
        let mut batch_means = Vec::new();
        let mut hits = 0usize;
        for chain in &self.draws {
            for b in chain[j].chunks_exact(batch) {
                let k = b.iter().filter(|&&x| lower <= x && x <= upper).count();
                batch_means.push(k as f64 / batch as f64);
            }
            hits += chain[j].iter().filter(|&&x| lower <= x && x <= upper).count();
        }
        let estimate = hits as f64 / (self.draws.len() * per_chain) as f64;
        let nb = batch_means.len() as f64;
        let bm = batch_means.iter().sum::<f64>() / nb;
        let var = batch_means.iter().map(|x| (x - bm).powi(2)).sum::<f64>() / (nb - 1.0);
        (estimate, (var / nb).sqrt())
    }
}

pub fn gibbs_sample(table: &RepeatedMeasuresTable, cfg: &GibbsConfig) -> Result<GibbsOutput> {
    gibbs_sample_with(table, cfg, Exec::default())
}

pub fn gibbs_sample_with(table: &RepeatedMeasuresTable, cfg: &GibbsConfig, exec: Exec) -> Result<GibbsOutput> {
    cfg.validate()?;
    let s = summarize(table);
    let ms_error = s.ms_interaction();
    let ms_subjects = s.ss_subjects / (s.n_subjects - 1) as f64;
    let scale = if ms_error > 0.0 { ms_error } else { 1.0 };
    let error_var0 = scale;
    let subject_var0 = ((ms_subjects - ms_error) / s.n_conditions as f64).max(0.01 * scale);
    // Dispersed starts: one chain high on σ²_ε and low on σ²_b, the other the reverse.
    let starts = [(10.0 * error_var0, 0.1 * subject_var0), (0.1 * error_var0, 10.0 * subject_var0)];

    let draws = exec.map(CHAINS, |k| run_chain(table, &s.condition_means, cfg, starts[k], k as u64));
    Ok(GibbsOutput { draws })
}

fn inverse_gamma<R: Rng>(rng: &mut R, shape: f64, rate: f64) -> f64 {
    let g = Gamma::new(shape, 1.0 / rate).expect("positive shape and rate");
    1.0 / g.sample(rng)
}

fn run_chain(
    table: &RepeatedMeasuresTable,
    condition_means: &[f64],
    cfg: &GibbsConfig,
    (mut error_var, mut subject_var): (f64, f64),
    stream: u64,
) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(cfg.seed, stream);
    let n = table.n_subjects();
    let c = table.n_conditions();
    let nf = n as f64;
    let hyper_b = cfg.random_effect_prior_sd_hyper;

    let kept = cfg.iterations - cfg.burn_in;
    let mut out = vec![Vec::with_capacity(kept); c];
    let mut mu = vec![0.0; c];
    let mut b = vec![0.0; n];

    for it in 0..cfg.iterations {
        let shared: f64 = StandardNormal.sample(&mut rng);
        let shared = shared * (subject_var / nf).sqrt();
        let own_sd = (error_var / nf).sqrt();
        for (m, &ybar) in mu.iter_mut().zip(condition_means) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *m = ybar + own_sd * z + shared;
        }

        let precision = c as f64 / error_var + 1.0 / subject_var;
        let sd = precision.recip().sqrt();
        let mut sum_b2 = 0.0;
        for (bi, row) in b.iter_mut().zip(table.rows()) {
            let resid: f64 = row.iter().zip(&mu).map(|(y, m)| y - m).sum();
            let z: f64 = StandardNormal.sample(&mut rng);
            *bi = resid / error_var / precision + sd * z;
            sum_b2 += *bi * *bi;
        }

        let mut sse = 0.0;
        for (row, bi) in table.rows().zip(&b) {
            for (y, m) in row.iter().zip(&mu) {
                sse += (y - m - bi).powi(2);
            }
        }
        error_var = inverse_gamma(
            &mut rng,
            ERROR_VARIANCE_HYPER + (n * c) as f64 / 2.0,
            ERROR_VARIANCE_HYPER + sse / 2.0,
        )
        .max(f64::MIN_POSITIVE);
        subject_var = inverse_gamma(&mut rng, hyper_b + nf / 2.0, hyper_b + sum_b2 / 2.0).max(f64::MIN_POSITIVE);

        if it >= cfg.burn_in {
            for (o, &m) in out.iter_mut().zip(&mu) {
                o.push(m);
            }
        }
    }
    out
}

/// Posterior mass of `interval` for μⱼ given the data only, integrating over
/// the subject effects.
pub fn unconditional_posterior_probability(
    table: &RepeatedMeasuresTable,
    j: usize,
    interval: &IntervalEstimate,
    cfg: &GibbsConfig,
) -> Result<UnconditionalProbability> {
    table.check_condition(j)?;
    let out = gibbs_sample(table, cfg)?;
    let ratio = out.variance_ratio(j);
    if ratio.is_nan() || ratio > CONVERGENCE_THRESHOLD {
        return Err(Error::NonConvergence {
            condition: j,
            ratio,
            threshold: CONVERGENCE_THRESHOLD,
        });
    }
    let (estimate, mc_standard_error) = out.probability_between(j, interval.lower, interval.upper);
    Ok(UnconditionalProbability {
        estimate,
        mc_standard_error,
        variance_ratio: ratio,
    })
}
