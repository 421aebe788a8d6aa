//! Seeded synthetic data from Yᵢⱼ = μⱼ + bᵢ + εᵢⱼ with homoscedastic or
//! per-condition error variances.

use std::path::Path;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::stream_rng;
use crate::table::RepeatedMeasuresTable;

/// Error standard deviation: one value for every condition, or one per condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaEps {
    Common(f64),
    PerCondition(Vec<f64>),
}

impl SigmaEps {
    fn get(&self, j: usize) -> f64 {
        match self {
            SigmaEps::Common(s) => *s,
            SigmaEps::PerCondition(v) => v[j],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub n_subjects: usize,
    pub condition_means: Vec<f64>,
    pub sigma_eps: SigmaEps,
    pub sigma_b: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_labels: Option<Vec<String>>,
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        let c = self.condition_means.len();
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n_subjects < 2 || c < 2 {
            return bad(format!("need N ≥ 2 and C ≥ 2, got N={}, C={c}", self.n_subjects));
        }
        if self.condition_means.iter().any(|m| !m.is_finite()) {
            return bad("condition means must be finite".into());
        }
        let sigmas: Vec<f64> = match &self.sigma_eps {
            SigmaEps::Common(s) => vec![*s],
            SigmaEps::PerCondition(v) if v.len() == c => v.clone(),
            SigmaEps::PerCondition(v) => {
                return bad(format!("{} error SDs for {c} conditions", v.len()))
            }
        };
        if sigmas.iter().chain([&self.sigma_b]).any(|s| !(s.is_finite() && *s >= 0.0)) {
            return bad("standard deviations must be finite and nonnegative".into());
        }
        if let Some(labels) = &self.condition_labels {
            if labels.len() != c {
                return bad(format!("{} labels for {c} conditions", labels.len()));
            }
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

pub fn parse_simspec(text: &str) -> Result<SimSpec> {
    let spec: SimSpec = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
        message: e.message().to_owned(),
    })?;
    spec.validate()?;
    Ok(spec)
}

pub fn load_simspec(path: &Path) -> Result<SimSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_simspec(&text)
}

pub fn simulate(spec: &SimSpec) -> Result<RepeatedMeasuresTable> {
    spec.validate()?;
    let mut rng = stream_rng(spec.seed, 0);
    let rows = (0..spec.n_subjects)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            let b = spec.sigma_b * z;
            spec.condition_means
                .iter()
                .enumerate()
                .map(|(j, mu)| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    mu + b + spec.sigma_eps.get(j) * e
                })
                .collect()
        })
        .collect();
    let c = spec.condition_means.len();
    let labels = spec
        .condition_labels
        .clone()
        .unwrap_or_else(|| (1..=c).map(|j| format!("C{j}")).collect());
    let ids = (1..=spec.n_subjects).map(|i| i.to_string()).collect();
    RepeatedMeasuresTable::new(rows, ids, labels)
}
