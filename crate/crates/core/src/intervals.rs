//! Closed-form interval estimators for condition means.
//!
//! Condition indices are zero-based.

use serde::{Deserialize, Serialize};

use crate::error::{check_level, Error, Result};
use crate::estimate::{Df, IntervalEstimate, Method};
use crate::summary::{summarize, StandardizedTable, SummaryStats};
use crate::table::RepeatedMeasuresTable;
use crate::tdist::{criterion_t, criterion_z};

fn check_condition(stats: &SummaryStats, j: usize) -> Result<()> {
    if j < stats.n_conditions {
        Ok(())
    } else {
        Err(Error::ConditionOutOfRange {
            index: j,
            count: stats.n_conditions,
        })
    }
}

fn dims(stats: &SummaryStats) -> (u64, u64) {
    (stats.n_subjects as u64, stats.n_conditions as u64)
}

/// Within-subject CI: pooled interaction error term with
/// (C−1)(N−1) degrees of freedom.
pub fn within_subject_ci(stats: &SummaryStats, j: usize, level: f64) -> Result<IntervalEstimate> {
    check_condition(stats, j)?;
    let (n, c) = dims(stats);
    let df = (c - 1) * (n - 1);
    let sem = (stats.ss_interaction / (n * (n - 1) * (c - 1)) as f64).sqrt();
    let half = sem * criterion_t(df, level)?;
    IntervalEstimate::new(stats.condition_means[j], half, level, Df::Finite(df), Method::WithinSubjectCI)
}

/// Within-subject HDI under the Jeffreys prior 1/σ²: C(N−1) degrees of freedom
/// and scale SS_{S×C}/(N(N−1)C).
pub fn within_subject_hdi(stats: &SummaryStats, j: usize, level: f64) -> Result<IntervalEstimate> {
    check_condition(stats, j)?;
    let (n, c) = dims(stats);
    let df = c * (n - 1);
    let sem = (stats.ss_interaction / (n * (n - 1) * c) as f64).sqrt();
    let half = sem * criterion_t(df, level)?;
    IntervalEstimate::new(stats.condition_means[j], half, level, Df::Finite(df), Method::WithinSubjectHDI)
}

/// SEM of condition `j` from standardized scores,
/// sqrt(Σᵢ (Y'ᵢⱼ − M.ⱼ)² / (N(N−1))).
pub fn normalized_sem(std: &StandardizedTable, j: usize) -> f64 {
    let n = std.n_subjects() as f64;
    (std.condition_sum_sq(j) / (n * (n - 1.0))).sqrt()
}

/// Heteroscedastic within-subject HDI: per-condition SEM of the standardized
/// scores with N−1 degrees of freedom.
pub fn heteroscedastic_hdi(std: &StandardizedTable, j: usize, level: f64) -> Result<IntervalEstimate> {
    let stats = std.source_stats();
    check_condition(stats, j)?;
    let df = stats.n_subjects as u64 - 1;
    let half = normalized_sem(std, j) * criterion_t(df, level)?;
    IntervalEstimate::new(stats.condition_means[j], half, level, Df::Finite(df), Method::HeteroscedasticHDI)
}

/// Standard between-subject CI assuming equal condition variances: pooled
/// within-condition variance with C(N−1) degrees of freedom.
pub fn between_subject_ci(stats: &SummaryStats, j: usize, level: f64) -> Result<IntervalEstimate> {
    check_condition(stats, j)?;
    let (n, c) = dims(stats);
    let df = c * (n - 1);
    let half = (stats.pooled_condition_variance() / n as f64).sqrt() * criterion_t(df, level)?;
    IntervalEstimate::new(stats.condition_means[j], half, level, Df::Finite(df), Method::BetweenSubjectCI)
}

/// Large-sample HDI: `M.ⱼ ± z · SDⱼ` with SDⱼ = (1/N)·sqrt((SS_T − SS_C)/C).
pub fn large_sample_hdi(stats: &SummaryStats, j: usize, level: f64) -> Result<IntervalEstimate> {
    check_condition(stats, j)?;
    let n = stats.n_subjects as f64;
    let k = stats.n_conditions as f64;
    // SS_T − SS_C is SS_Subjects + SS_{S×C}; summing the parts avoids cancellation.
    let residual = stats.ss_subjects + stats.ss_interaction;
    let sd = (residual / k).sqrt() / n;
    let half = criterion_z(level)? * sd;
    IntervalEstimate::new(stats.condition_means[j], half, level, Df::Asymptotic, Method::LargeSampleHDI)
}

/// Degrees-of-freedom convention for the Cousineau–Morey interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DfChoice {
    /// N − 1.
    #[default]
    NMinus1,
    /// C(N − 1).
    CTimesNMinus1,
    /// (C − 1)(N − 1).
    InteractionDf,
}

impl DfChoice {
    pub fn df(self, n: u64, c: u64) -> u64 {
        match self {
            DfChoice::NMinus1 => n - 1,
            DfChoice::CTimesNMinus1 => c * (n - 1),
            DfChoice::InteractionDf => (c - 1) * (n - 1),
        }
    }
}

/// Cousineau (2005) standardized-score interval with optional Morey (2008)
/// √(C/(C−1)) rescaling.
pub fn cousineau_morey_interval(
    std: &StandardizedTable,
    j: usize,
    level: f64,
    df_choice: DfChoice,
    morey_correction: bool,
) -> Result<IntervalEstimate> {
    let stats = std.source_stats();
    check_condition(stats, j)?;
    let (n, c) = dims(stats);
    let df = df_choice.df(n, c);
    let mut half = normalized_sem(std, j) * criterion_t(df, level)?;
    if morey_correction {
        half *= morey_factor(stats.n_conditions);
    }
    IntervalEstimate::new(stats.condition_means[j], half, level, Df::Finite(df), Method::CousineauMorey)
}

/// √(C/(C−1)).
pub fn morey_factor(n_conditions: usize) -> f64 {
    let c = n_conditions as f64;
    (c / (c - 1.0)).sqrt()
}

/// Interval for M.ⱼ − M.ₗ.
///
/// Unpooled: sample variance of the per-subject differences, N−1 df.
/// Pooled: 2·MS_{S×C}/N with (N−1)(C−1) df, which makes the half-width
/// exactly √2 times the within-subject CI half-width.
pub fn pairwise_difference_ci(
    table: &RepeatedMeasuresTable,
    j: usize,
    l: usize,
    level: f64,
    pooled: bool,
) -> Result<IntervalEstimate> {
    table.check_condition(j)?;
    table.check_condition(l)?;
    if j == l {
        return Err(Error::SameCondition(j));
    }
    check_level(level)?;
    let stats = summarize(table);
    let (n, c) = dims(&stats);
    let center = stats.condition_means[j] - stats.condition_means[l];
    let (half, df) = if pooled {
        let df = (n - 1) * (c - 1);
        let se = (2.0 * stats.ms_interaction() / n as f64).sqrt();
        (se * criterion_t(df, level)?, df)
    } else {
        let df = n - 1;
        let se = (difference_variance(table, j, l) / n as f64).sqrt();
        (se * criterion_t(df, level)?, df)
    };
    IntervalEstimate::new(center, half, level, Df::Finite(df), Method::PairwiseDifferenceCI)
}

/// Sample variance (denominator N−1) of Dᵢ = Yᵢⱼ − Yᵢₗ.
pub fn difference_variance(table: &RepeatedMeasuresTable, j: usize, l: usize) -> f64 {
    let n = table.n_subjects() as f64;
    let diffs: Vec<f64> = table.rows().map(|r| r[j] - r[l]).collect();
    let mean = diffs.iter().sum::<f64>() / n;
    diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Length of the Jeffreys-prior HDI relative to the within-subject CI:
/// √((C−1)/C) · t_{C(N−1)} / t_{(C−1)(N−1)}.
pub fn length_ratio(n: usize, c: usize, level: f64) -> Result<f64> {
    if n < 2 || c < 2 {
        return Err(Error::InvalidParameter(format!(
            "length ratio needs N ≥ 2 and C ≥ 2, got N={n}, C={c}"
        )));
    }
    let (n, c) = (n as u64, c as u64);
    let shrink = ((c - 1) as f64 / c as f64).sqrt();
    Ok(shrink * criterion_t(c * (n - 1), level)? / criterion_t((c - 1) * (n - 1), level)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::summary::standardize;
    use approx::assert_abs_diff_eq;

    fn exposure() -> SummaryStats {
        summarize(&datasets::exposure_duration())
    }

    fn additive() -> RepeatedMeasuresTable {
        let mu = [3.0, 5.0, 4.0, 9.0];
        let b = [-2.0, 0.5, 1.0, 7.0, -3.5];
        RepeatedMeasuresTable::from_rows(b.iter().map(|bi| mu.iter().map(|m| m + bi).collect()).collect())
            .unwrap()
    }

    #[test]
    fn exposure_widths() {
        let s = exposure();
        for j in 0..3 {
            assert_abs_diff_eq!(within_subject_ci(&s, j, 0.95).unwrap().half_width, 0.52, epsilon = 5e-3);
            assert_abs_diff_eq!(within_subject_hdi(&s, j, 0.95).unwrap().half_width, 0.42, epsilon = 5e-3);
            assert_abs_diff_eq!(between_subject_ci(&s, j, 0.95).unwrap().half_width, 3.86, epsilon = 5e-3);
            assert_abs_diff_eq!(large_sample_hdi(&s, j, 0.95).unwrap().half_width, 3.49, epsilon = 1e-2);
        }
    }

    #[test]
    fn exposure_component_oracles() {
        let s = exposure();
        let wsci = within_subject_ci(&s, 0, 0.95).unwrap();
        assert_abs_diff_eq!(wsci.half_width, (11.0667_f64 / 180.0).sqrt() * 2.1009, epsilon = 1e-3);
        assert_eq!(wsci.df, Df::Finite(18));
        let hdi = within_subject_hdi(&s, 1, 0.95).unwrap();
        assert_abs_diff_eq!(hdi.half_width, 0.4155, epsilon = 1e-3);
        assert_eq!(hdi.df, Df::Finite(27));
        assert_eq!(hdi.center, 13.0);
        assert_abs_diff_eq!(s.pooled_condition_variance(), 953.6 / 27.0, epsilon = 1e-9);
        let ls = large_sample_hdi(&s, 2, 0.95).unwrap();
        assert_abs_diff_eq!(ls.half_width, ((1005.8667 - 52.2667) / 3.0_f64).sqrt() / 10.0 * 1.95996, epsilon = 1e-3);
        assert_eq!(ls.df, Df::Asymptotic);
    }

    #[test]
    fn zero_interaction_gives_zero_width() {
        let t = additive();
        let s = summarize(&t);
        assert_abs_diff_eq!(within_subject_ci(&s, 0, 0.95).unwrap().half_width, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(within_subject_hdi(&s, 0, 0.95).unwrap().half_width, 0.0, epsilon = 1e-9);
        let std = standardize(&t);
        for j in 0..4 {
            assert_abs_diff_eq!(heteroscedastic_hdi(&std, j, 0.95).unwrap().half_width, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn constant_conditions_give_zero_between_width() {
        let t = RepeatedMeasuresTable::from_rows(vec![vec![1.0, 2.0, 3.0]; 6]).unwrap();
        let s = summarize(&t);
        assert_eq!(between_subject_ci(&s, 1, 0.9).unwrap().half_width, 0.0);
    }

    #[test]
    fn large_sample_zero_without_residual() {
        // SS_T = SS_C when every subject has the same row.
        let t = RepeatedMeasuresTable::from_rows(vec![vec![2.0, 8.0]; 4]).unwrap();
        let s = summarize(&t);
        assert_eq!(large_sample_hdi(&s, 0, 0.95).unwrap().half_width, 0.0);
    }

    #[test]
    fn symmetric_heteroscedastic_widths_equal() {
        // Column 2 is column 1 reflected about its mean after standardization,
        // so both condition sums of squares match.
        let rows = vec![
            vec![1.0, 5.0, 3.0],
            vec![4.0, 2.0, 3.0],
            vec![2.0, 4.0, 3.0],
            vec![3.0, 3.0, 3.0],
        ];
        let t = RepeatedMeasuresTable::from_rows(rows).unwrap();
        let std = standardize(&t);
        let w0 = heteroscedastic_hdi(&std, 0, 0.95).unwrap().half_width;
        let w1 = heteroscedastic_hdi(&std, 1, 0.95).unwrap().half_width;
        assert_abs_diff_eq!(w0, w1, epsilon = 1e-12);
        assert!(w0 > 0.0);
    }

    #[test]
    fn cousineau_morey_variants() {
        let t = datasets::exposure_duration();
        let std = standardize(&t);
        for j in 0..3 {
            let h = heteroscedastic_hdi(&std, j, 0.95).unwrap();
            let cm = cousineau_morey_interval(&std, j, 0.95, DfChoice::NMinus1, false).unwrap();
            assert_abs_diff_eq!(h.half_width, cm.half_width, epsilon = 1e-12);
            let corrected = cousineau_morey_interval(&std, j, 0.95, DfChoice::NMinus1, true).unwrap();
            assert_abs_diff_eq!(corrected.half_width / cm.half_width, (1.5f64).sqrt(), epsilon = 1e-12);
            let cdf = cousineau_morey_interval(&std, j, 0.95, DfChoice::CTimesNMinus1, false).unwrap();
            assert_eq!(cdf.df, Df::Finite(27));
            let idf = cousineau_morey_interval(&std, j, 0.95, DfChoice::InteractionDf, false).unwrap();
            assert_eq!(idf.df, Df::Finite(18));
        }
    }

    #[test]
    fn morey_factor_two_conditions() {
        let t = RepeatedMeasuresTable::from_rows(vec![vec![1.0, 3.0], vec![2.0, 2.5], vec![4.0, 7.0]]).unwrap();
        let std = standardize(&t);
        let plain = cousineau_morey_interval(&std, 0, 0.95, DfChoice::NMinus1, false).unwrap();
        let corr = cousineau_morey_interval(&std, 0, 0.95, DfChoice::NMinus1, true).unwrap();
        assert_abs_diff_eq!(corr.half_width, 2f64.sqrt() * plain.half_width, epsilon = 1e-12);
    }

    #[test]
    fn pairwise_pooled_is_root_two_lm() {
        let t = datasets::exposure_duration();
        let s = summarize(&t);
        let wsci = within_subject_ci(&s, 0, 0.95).unwrap();
        let pw = pairwise_difference_ci(&t, 0, 2, 0.95, true).unwrap();
        assert_abs_diff_eq!(pw.half_width, 2f64.sqrt() * wsci.half_width, epsilon = 1e-12);
        assert_abs_diff_eq!(pw.center, 11.0 - 14.2, epsilon = 1e-12);
    }

    #[test]
    fn pairwise_identical_columns() {
        let t = RepeatedMeasuresTable::from_rows(vec![
            vec![1.0, 1.0, 5.0],
            vec![4.0, 4.0, 2.0],
            vec![2.0, 2.0, 9.0],
        ])
        .unwrap();
        let pw = pairwise_difference_ci(&t, 0, 1, 0.95, false).unwrap();
        assert_eq!(pw.center, 0.0);
        assert_eq!(pw.half_width, 0.0);
        assert!(matches!(pairwise_difference_ci(&t, 1, 1, 0.95, false), Err(Error::SameCondition(1))));
    }

    #[test]
    fn length_ratio_values() {
        let r = length_ratio(10, 3, 0.95).unwrap();
        assert_abs_diff_eq!(r, (2.0f64 / 3.0).sqrt() * 2.0518 / 2.1009, epsilon = 1e-3);
        assert_abs_diff_eq!(r, 0.7975, epsilon = 5e-4);
        assert!(length_ratio(1, 3, 0.95).is_err());
        assert!(length_ratio(5, 1, 0.95).is_err());
        assert!(length_ratio(5, 3, 0.0).is_err());
        // Tends to 1 from below as C grows.
        let big = length_ratio(10, 2000, 0.95).unwrap();
        assert!(big < 1.0 && big > 0.999);
    }

    #[test]
    fn rejects_bad_level_and_index() {
        let s = exposure();
        assert!(matches!(within_subject_ci(&s, 0, 1.5), Err(Error::InvalidLevel(_))));
        assert!(matches!(within_subject_hdi(&s, 0, 0.0), Err(Error::InvalidLevel(_))));
        assert!(matches!(between_subject_ci(&s, 3, 0.95), Err(Error::ConditionOutOfRange { .. })));
    }
}
