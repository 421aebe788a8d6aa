//! Means and the sum-of-squares decomposition of a repeated-measures table.

use serde::Serialize;

use crate::table::RepeatedMeasuresTable;

/// Condition/subject/grand means and the two-way sum-of-squares split.
///
/// `ss_total = ss_conditions + ss_subjects + ss_interaction`. Each term is
/// computed from deviations about the means, so the decomposition stays
/// accurate when every response carries a large common offset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub n_subjects: usize,
    pub n_conditions: usize,
    pub condition_means: Vec<f64>,
    pub subject_means: Vec<f64>,
    pub grand_mean: f64,
    pub ss_total: f64,
    pub ss_conditions: f64,
    pub ss_subjects: f64,
    pub ss_interaction: f64,
    /// Sample variance of each condition column, denominator N−1.
    pub condition_variances: Vec<f64>,
}

impl SummaryStats {
    /// Interaction mean square, SS_{S×C}/((N−1)(C−1)).
    pub fn ms_interaction(&self) -> f64 {
        self.ss_interaction / ((self.n_subjects - 1) * (self.n_conditions - 1)) as f64
    }

    /// Pooled within-condition variance, Σⱼ Σᵢ (Yᵢⱼ − M.ⱼ)² / (C(N−1)).
    pub fn pooled_condition_variance(&self) -> f64 {
        self.condition_variances.iter().sum::<f64>() / self.n_conditions as f64
    }
}

pub fn summarize(table: &RepeatedMeasuresTable) -> SummaryStats {
    let n = table.n_subjects();
    let c = table.n_conditions();
    let nf = n as f64;
    let cf = c as f64;

    let subject_means: Vec<f64> = table.rows().map(|r| r.iter().sum::<f64>() / cf).collect();
    let condition_means: Vec<f64> = (0..c).map(|j| table.column(j).sum::<f64>() / nf).collect();
    let grand_mean = table.values().iter().sum::<f64>() / (nf * cf);

    let ss_total = table
        .values()
        .iter()
        .map(|y| (y - grand_mean).powi(2))
        .sum();
    let ss_conditions = nf
        * condition_means
            .iter()
            .map(|m| (m - grand_mean).powi(2))
            .sum::<f64>();
    let ss_subjects = cf
        * subject_means
            .iter()
            .map(|m| (m - grand_mean).powi(2))
            .sum::<f64>();

    let mut ss_interaction = 0.0;
    for (row, &mi) in table.rows().zip(&subject_means) {
        for (&y, &mj) in row.iter().zip(&condition_means) {
            ss_interaction += (y - mi - mj + grand_mean).powi(2);
        }
    }

    let condition_variances = condition_means
        .iter()
        .enumerate()
        .map(|(j, &mj)| table.column(j).map(|y| (y - mj).powi(2)).sum::<f64>() / (nf - 1.0))
        .collect();

    let stats = SummaryStats {
        n_subjects: n,
        n_conditions: c,
        condition_means,
        subject_means,
        grand_mean,
        ss_total,
        ss_conditions,
        ss_subjects,
        ss_interaction,
        condition_variances,
    };
    debug_assert!(interaction_cross_check(table, &stats));
    stats
}

/// SS_{S×C} by the raw-moment form
/// ΣΣY² − CΣM²ᵢ. − NΣM².ⱼ + NCM².
///
/// Cancels badly when responses share a large offset; kept as a cross-check
/// for the deviation-based value in [`summarize`].
pub fn interaction_ss_raw_moment(table: &RepeatedMeasuresTable) -> f64 {
    let n = table.n_subjects() as f64;
    let c = table.n_conditions() as f64;
    let sum_sq: f64 = table.values().iter().map(|y| y * y).sum();
    let subj: f64 = table
        .rows()
        .map(|r| (r.iter().sum::<f64>() / c).powi(2))
        .sum();
    let cond: f64 = (0..table.n_conditions())
        .map(|j| (table.column(j).sum::<f64>() / n).powi(2))
        .sum();
    let grand = table.values().iter().sum::<f64>() / (n * c);
    sum_sq - c * subj - n * cond + c * n * grand * grand
}

fn interaction_cross_check(table: &RepeatedMeasuresTable, s: &SummaryStats) -> bool {
    // Rounding in the raw form scales with ΣY², not with SS_{S×C}.
    let magnitude: f64 = table.values().iter().map(|y| y * y).sum();
    let raw_tol = 1e-6 * s.ss_interaction + 1e3 * f64::EPSILON * magnitude;
    let raw_ok = (interaction_ss_raw_moment(table) - s.ss_interaction).abs() <= raw_tol;

    let by_difference = s.ss_total - s.ss_subjects - s.ss_conditions;
    let diff_ok = (by_difference - s.ss_interaction).abs() <= 1e-9 * s.ss_total.max(f64::MIN_POSITIVE) + 1e-12;
    raw_ok && diff_ok
}

/// Maximum-likelihood subject effects b̂ᵢ = Mᵢ. − M.
pub fn random_effect_mles(table: &RepeatedMeasuresTable) -> Vec<f64> {
    let s = summarize(table);
    s.subject_means.iter().map(|m| m - s.grand_mean).collect()
}

/// Table after removing subject main effects: Y'ᵢⱼ = Yᵢⱼ − Mᵢ. + M.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedTable {
    table: RepeatedMeasuresTable,
    source_stats: SummaryStats,
}

impl StandardizedTable {
    pub fn n_subjects(&self) -> usize {
        self.table.n_subjects()
    }

    pub fn n_conditions(&self) -> usize {
        self.table.n_conditions()
    }

    pub fn get(&self, subject: usize, condition: usize) -> f64 {
        self.table.get(subject, condition)
    }

    /// Row-major standardized values.
    pub fn values(&self) -> &[f64] {
        self.table.values()
    }

    pub fn column(&self, condition: usize) -> impl Iterator<Item = f64> + '_ {
        self.table.column(condition)
    }

    /// Summary of the table this was derived from.
    pub fn source_stats(&self) -> &SummaryStats {
        &self.source_stats
    }

    /// The standardized values as an ordinary table, with the source labels.
    pub fn as_table(&self) -> &RepeatedMeasuresTable {
        &self.table
    }

    /// Σᵢ (Y'ᵢⱼ − M.ⱼ)² for condition `j`.
    pub fn condition_sum_sq(&self, j: usize) -> f64 {
        let mj = self.source_stats.condition_means[j];
        self.table.column(j).map(|y| (y - mj).powi(2)).sum()
    }
}

pub fn standardize(table: &RepeatedMeasuresTable) -> StandardizedTable {
    let stats = summarize(table);
    let c = table.n_conditions();
    let values = table
        .values()
        .iter()
        .enumerate()
        .map(|(k, y)| y - stats.subject_means[k / c] + stats.grand_mean)
        .collect();
    StandardizedTable {
        table: table.with_values(values),
        source_stats: stats,
    }
}
