//! Per-condition interval reports in text and JSON form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{Df, IntervalEstimate, Method};
use crate::intervals::{
    between_subject_ci, cousineau_morey_interval, heteroscedastic_hdi, within_subject_ci, large_sample_hdi,
    within_subject_hdi, DfChoice,
};
use crate::io::{load_dataset, DatasetSpec};
use crate::summary::{standardize, summarize};
use crate::table::RepeatedMeasuresTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ComputeOptions {
    pub df_choice: DfChoice,
    pub morey_correction: bool,
}

/// One interval for one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub method: String,
    pub condition: String,
    pub center: f64,
    pub half_width: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub df: Df,
}

impl IntervalRecord {
    pub fn new(condition: &str, iv: &IntervalEstimate) -> Self {
        Self {
            method: iv.method.short_name().to_owned(),
            condition: condition.to_owned(),
            center: iv.center,
            half_width: iv.half_width,
            lower: iv.lower,
            upper: iv.upper,
            level: iv.level,
            df: iv.df,
        }
    }
}

/// Intervals for every condition under each method, grouped by method in the
/// order given.
pub fn compute_intervals(
    table: &RepeatedMeasuresTable,
    methods: &[Method],
    level: f64,
    opts: ComputeOptions,
) -> Result<Vec<(Method, Vec<IntervalEstimate>)>> {
    crate::error::check_level(level)?;
    let stats = summarize(table);
    let std = standardize(table);
    methods
        .iter()
        .map(|&m| {
            let ivs = (0..table.n_conditions())
                .map(|j| match m {
                    Method::BetweenSubjectCI => between_subject_ci(&stats, j, level),
                    Method::WithinSubjectCI => within_subject_ci(&stats, j, level),
                    Method::WithinSubjectHDI => within_subject_hdi(&stats, j, level),
                    Method::HeteroscedasticHDI => heteroscedastic_hdi(&std, j, level),
                    Method::LargeSampleHDI => large_sample_hdi(&stats, j, level),
                    Method::CousineauMorey => {
                        cousineau_morey_interval(&std, j, level, opts.df_choice, opts.morey_correction)
                    }
                    Method::PairwiseDifferenceCI => Err(Error::InvalidParameter(
                        "pairwise differences are not per-condition intervals; use the diagnose report".into(),
                    )),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((m, ivs))
        })
        .collect()
}

pub fn records(table: &RepeatedMeasuresTable, results: &[(Method, Vec<IntervalEstimate>)]) -> Vec<IntervalRecord> {
    results
        .iter()
        .flat_map(|(_, ivs)| {
            ivs.iter()
                .zip(table.condition_labels())
                .map(|(iv, label)| IntervalRecord::new(label, iv))
        })
        .collect()
}

/// Fixed-width text table, widths rounded to two decimals.
pub fn render_table(records: &[IntervalRecord]) -> String {
    let cw = records.iter().map(|r| r.condition.len()).max().unwrap_or(0).max(9) + 2;
    let mut out = format!(
        "{:<14}{:<cw$}{:>10}{:>10}{:>10}{:>10}{:>12}\n",
        "method", "condition", "center", "width", "lower", "upper", "df",
    );
    for r in records {
        out.push_str(&format!(
            "{:<14}{:<cw$}{:>10.2}{:>10}{:>10.2}{:>10.2}{:>12}\n",
            r.method,
            r.condition,
            r.center,
            format!("±{:.2}", r.half_width),
            r.lower,
            r.upper,
            r.df.to_string(),
        ));
    }
    out
}

pub fn render_json(records: &[IntervalRecord]) -> String {
    serde_json::to_string_pretty(records).expect("records serialize")
}

pub fn render(records: &[IntervalRecord], format: OutputFormat) -> String {
    match format {
        OutputFormat::Table => render_table(records),
        OutputFormat::Json => render_json(records) + "\n",
    }
}

/// Load, compute and render in one step.
pub fn run_compute(
    dataset: &DatasetSpec,
    methods: &[Method],
    level: f64,
    output: OutputFormat,
    opts: ComputeOptions,
) -> Result<String> {
    let table = load_dataset(dataset)?;
    let results = compute_intervals(&table, methods, level, opts)?;
    Ok(render(&records(&table, &results), output))
}
