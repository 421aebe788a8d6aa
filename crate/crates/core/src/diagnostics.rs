//! Repeated-measures ANOVA and the difference-score variance check used to
//! choose between the homoscedastic and heteroscedastic intervals.

use serde::Serialize;

use crate::intervals::difference_variance;
use crate::summary::{summarize, SummaryStats};
use crate::table::RepeatedMeasuresTable;

pub const DEFAULT_RATIO_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Source {
    Subjects,
    Conditions,
    SxC,
    Total,
}

impl Source {
    pub fn label(self) -> &'static str {
        match self {
            Source::Subjects => "Subjects",
            Source::Conditions => "Conditions",
            Source::SxC => "SxC",
            Source::Total => "Total",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnovaRow {
    pub source: Source,
    pub ss: f64,
    pub df: usize,
    pub ms: Option<f64>,
    pub f: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaTable {
    pub rows: Vec<AnovaRow>,
}

impl AnovaTable {
    pub fn row(&self, source: Source) -> &AnovaRow {
        self.rows
            .iter()
            .find(|r| r.source == source)
            .expect("every source has a row")
    }

    /// F = MS_Conditions / MS_SxC, absent when the error mean square is zero.
    pub fn f_conditions(&self) -> Option<f64> {
        self.row(Source::Conditions).f
    }

    pub fn render(&self) -> String {
        let mut out = format!("{:<12}{:>16}{:>8}{:>16}{:>10}\n", "Source", "SS", "df", "MS", "F");
        for r in &self.rows {
            let ms = r.ms.map_or(String::new(), |v| format!("{v:.2}"));
            let f = r.f.map_or(String::new(), |v| format!("{v:.2}"));
            out.push_str(&format!(
                "{:<12}{:>16.2}{:>8}{:>16}{:>10}\n",
                r.source.label(),
                r.ss,
                r.df,
                ms,
                f
            ));
        }
        out
    }
}

/// ANOVA from the three sums of squares of a one-factor within-subject design.
///
/// MS is reported for the Conditions and SxC rows only, matching the usual
/// repeated-measures layout.
pub fn anova_from_ss(ss_subjects: f64, ss_conditions: f64, ss_interaction: f64, n: usize, c: usize) -> AnovaTable {
    let df_subjects = n - 1;
    let df_conditions = c - 1;
    let df_interaction = (n - 1) * (c - 1);
    let ms_conditions = ss_conditions / df_conditions as f64;
    let ms_interaction = ss_interaction / df_interaction as f64;
    let f = (ms_interaction > 0.0).then(|| ms_conditions / ms_interaction);
    AnovaTable {
        rows: vec![
            AnovaRow { source: Source::Subjects, ss: ss_subjects, df: df_subjects, ms: None, f: None },
            AnovaRow {
                source: Source::Conditions,
                ss: ss_conditions,
                df: df_conditions,
                ms: Some(ms_conditions),
                f,
            },
            AnovaRow {
                source: Source::SxC,
                ss: ss_interaction,
                df: df_interaction,
                ms: Some(ms_interaction),
                f: None,
            },
            AnovaRow {
                source: Source::Total,
                ss: ss_subjects + ss_conditions + ss_interaction,
                df: n * c - 1,
                ms: None,
                f: None,
            },
        ],
    }
}

pub fn anova_table(stats: &SummaryStats, n: usize, c: usize) -> AnovaTable {
    anova_from_ss(stats.ss_subjects, stats.ss_conditions, stats.ss_interaction, n, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Advisory {
    HomoscedasticOK,
    SuspectHeteroscedasticity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairVariance {
    pub first: usize,
    pub second: usize,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircularityReport {
    pub condition_labels: Vec<String>,
    pub condition_means: Vec<f64>,
    pub condition_variances: Vec<f64>,
    /// One entry per unordered pair (j, l), j < l, in lexicographic order.
    pub pairwise_diff_variances: Vec<PairVariance>,
    /// max/min over pairs; 1 when there is a single pair.
    pub max_min_diff_variance_ratio: f64,
    pub max_min_condition_variance_ratio: f64,
    pub ratio_threshold: f64,
    pub advisory: Advisory,
}

impl CircularityReport {
    pub fn pair(&self, j: usize, l: usize) -> Option<f64> {
        let (a, b) = if j < l { (j, l) } else { (l, j) };
        self.pairwise_diff_variances
            .iter()
            .find(|p| p.first == a && p.second == b)
            .map(|p| p.variance)
    }

    pub fn render(&self) -> String {
        let labels = &self.condition_labels;
        let mut out = String::new();
        out.push_str(&format!("{:<16}{:>14}{:>14}\n", "condition", "mean", "s^2"));
        for (j, l) in labels.iter().enumerate() {
            out.push_str(&format!(
                "{:<16}{:>14.2}{:>14.2}\n",
                l, self.condition_means[j], self.condition_variances[j]
            ));
        }
        out.push_str(&format!("\n{:<32}{:>14}\n", "pair", "s^2 of diffs"));
        for p in &self.pairwise_diff_variances {
            let name = format!("{},{}", labels[p.first], labels[p.second]);
            out.push_str(&format!("{:<32}{:>14.2}\n", name, p.variance));
        }
        out.push_str(&format!(
            "\nmax/min difference-score variance: {:.2}\nmax/min condition variance: {:.2}\nthreshold: {:.2}\nadvisory (heuristic): {:?}\n",
            self.max_min_diff_variance_ratio,
            self.max_min_condition_variance_ratio,
            self.ratio_threshold,
            self.advisory
        ));
        out
    }
}

fn max_min_ratio(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi <= 0.0 {
        1.0
    } else if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Variances of all pairwise difference scores and of each condition, with a
/// heuristic advisory: heteroscedasticity is suspected when either max/min
/// ratio exceeds `ratio_threshold`.
pub fn circularity_report(table: &RepeatedMeasuresTable, ratio_threshold: f64) -> CircularityReport {
    let s = summarize(table);
    let c = table.n_conditions();
    let mut pairs = Vec::with_capacity(c * (c - 1) / 2);
    for j in 0..c {
        for l in j + 1..c {
            pairs.push(PairVariance { first: j, second: l, variance: difference_variance(table, j, l) });
        }
    }
    let diff_ratio = if pairs.len() > 1 {
        max_min_ratio(pairs.iter().map(|p| p.variance))
    } else {
        1.0
    };
    let cond_ratio = max_min_ratio(s.condition_variances.iter().copied());
    let advisory = if diff_ratio > ratio_threshold || cond_ratio > ratio_threshold {
        Advisory::SuspectHeteroscedasticity
    } else {
        Advisory::HomoscedasticOK
    };
    CircularityReport {
        condition_labels: table.condition_labels().to_vec(),
        condition_means: s.condition_means,
        condition_variances: s.condition_variances,
        pairwise_diff_variances: pairs,
        max_min_diff_variance_ratio: diff_ratio,
        max_min_condition_variance_ratio: cond_ratio,
        ratio_threshold,
        advisory,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hetero_anova_printed_ss() {
        let a = anova_from_ss(1_330_612.0, 85_323.0, 684_728.0, 48, 3);
        let cond = a.row(Source::Conditions);
        assert_eq!(cond.ms.unwrap().round(), 42_662.0);
        assert_abs_diff_eq!(a.f_conditions().unwrap(), 5.86, epsilon = 0.01);
        assert_eq!(a.row(Source::SxC).ms.unwrap().round(), 7_284.0);
        assert_eq!(a.row(Source::SxC).df, 94);
        assert_eq!(a.row(Source::Total).df, 143);
        assert_eq!(a.row(Source::Total).ss, 2_100_663.0);
    }

    #[test]
    fn exposure_anova() {
        let t = datasets::exposure_duration();
        let a = anova_table(&summarize(&t), 10, 3);
        assert_abs_diff_eq!(a.row(Source::SxC).ss, 11.07, epsilon = 0.01);
        assert_eq!(a.row(Source::SxC).df, 18);
        let expected = (52.2667 / 2.0) / (11.0667 / 18.0);
        assert_abs_diff_eq!(a.f_conditions().unwrap(), expected, epsilon = 0.05);
        assert_abs_diff_eq!(a.f_conditions().unwrap(), 42.5, epsilon = 0.1);
    }

    #[test]
    fn constant_data_has_no_f() {
        let t = RepeatedMeasuresTable::from_rows(vec![vec![2.0; 3]; 4]).unwrap();
        let a = anova_table(&summarize(&t), 4, 3);
        assert!(a.rows.iter().all(|r| r.ss == 0.0));
        assert_eq!(a.f_conditions(), None);
        assert!(a.render().contains("Conditions"));
    }

    #[test]
    fn hetero_anova_difference_variance_pattern() {
        // Summary values only; the raw data behind them are unpublished.
        let ratio = max_min_ratio([411.0, 21_113.0, 22_182.0].into_iter());
        assert_abs_diff_eq!(ratio, 54.0, epsilon = 0.1);
        assert!(ratio > DEFAULT_RATIO_THRESHOLD);
    }

    #[test]
    fn two_conditions_single_pair() {
        let t = RepeatedMeasuresTable::from_rows(vec![
            vec![1.0, 10.0],
            vec![2.0, 30.0],
            vec![3.0, 20.0],
            vec![4.0, 50.0],
        ])
        .unwrap();
        let r = circularity_report(&t, 3.0);
        assert_eq!(r.pairwise_diff_variances.len(), 1);
        assert_eq!(r.max_min_diff_variance_ratio, 1.0);
        assert!(r.max_min_condition_variance_ratio > 3.0);
        assert_eq!(r.advisory, Advisory::SuspectHeteroscedasticity);
    }

    #[test]
    fn pairwise_entries_and_covariance_identity() {
        let t = datasets::exposure_duration();
        let r = circularity_report(&t, 3.0);
        assert_eq!(r.pairwise_diff_variances.len(), 3);
        let s = summarize(&t);
        for p in &r.pairwise_diff_variances {
            let (j, l) = (p.first, p.second);
            let cov = t
                .rows()
                .map(|row| (row[j] - s.condition_means[j]) * (row[l] - s.condition_means[l]))
                .sum::<f64>()
                / 9.0;
            let identity = s.condition_variances[j] + s.condition_variances[l] - 2.0 * cov;
            assert_abs_diff_eq!(p.variance, identity, epsilon = 1e-9 * identity.abs().max(1.0));
        }
        assert_eq!(r.pair(2, 0), r.pair(0, 2));
        assert!(r.render().contains("advisory"));
    }
}
