//! Delimiter-separated dataset ingestion (wide or long) and writers.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::RepeatedMeasuresTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Layout {
    /// `subject,<cond1>,...,<condC>`, one row per subject.
    #[default]
    Wide,
    /// `subject,condition,value`, one row per cell.
    Long,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub layout: Layout,
    pub subject_column: String,
    pub condition_column: Option<String>,
    pub value_column: Option<String>,
}

impl DatasetSpec {
    pub fn wide(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            layout: Layout::Wide,
            subject_column: "subject".into(),
            condition_column: None,
            value_column: None,
        }
    }

    pub fn long(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            layout: Layout::Long,
            subject_column: "subject".into(),
            condition_column: Some("condition".into()),
            value_column: Some("value".into()),
        }
    }
}

/// Comma, tab or semicolon, whichever appears most often in the header line.
pub fn detect_delimiter(text: &str) -> u8 {
    let header = text.lines().next().unwrap_or("");
    b",\t;"
        .iter()
        .copied()
        .max_by_key(|&d| (header.bytes().filter(|&b| b == d).count(), d == b','))
        .unwrap_or(b',')
}

pub fn load_dataset(spec: &DatasetSpec) -> Result<RepeatedMeasuresTable> {
    let text = std::fs::read_to_string(&spec.path)
        .map_err(|e| Error::Io(format!("{}: {e}", spec.path.display())))?;
    parse_dataset(&text, spec)
}

/// Parses `text` according to the layout and column names in `spec`; the
/// path is not consulted.
pub fn parse_dataset(text: &str, spec: &DatasetSpec) -> Result<RepeatedMeasuresTable> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(detect_delimiter(text))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(1, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Layout(format!("no column named {name:?} in header {headers:?}")))
    };
    let subject_col = find(&spec.subject_column)?;

    let mut records = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(k + 2, e))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push((k + 2, rec));
    }

    match spec.layout {
        Layout::Wide => {
            let cond_cols: Vec<usize> = (0..headers.len()).filter(|&i| i != subject_col).collect();
            if cond_cols.len() < 2 {
                return Err(Error::Layout(format!(
                    "wide layout needs at least 2 condition columns, found {}",
                    cond_cols.len()
                )));
            }
            let labels: Vec<String> = cond_cols.iter().map(|&i| headers[i].clone()).collect();
            let mut ids = Vec::with_capacity(records.len());
            let mut rows = Vec::with_capacity(records.len());
            for (line, rec) in &records {
                if rec.len() > headers.len() {
                    return Err(Error::Parse {
                        line: *line,
                        message: format!("{} fields, header has {}", rec.len(), headers.len()),
                    });
                }
                let subject = rec.get(subject_col).unwrap_or("").to_owned();
                let mut row = Vec::with_capacity(cond_cols.len());
                for (&col, label) in cond_cols.iter().zip(&labels) {
                    let field = rec.get(col).unwrap_or("");
                    if field.is_empty() {
                        return Err(Error::MissingCell { subject, condition: label.clone() });
                    }
                    row.push(parse_value(field, *line)?);
                }
                ids.push(subject);
                rows.push(row);
            }
            RepeatedMeasuresTable::new(rows, ids, labels)
        }
        Layout::Long => {
            let (Some(cname), Some(vname)) = (&spec.condition_column, &spec.value_column) else {
                return Err(Error::Layout(
                    "long layout needs condition and value columns".into(),
                ));
            };
            let cond_col = find(cname)?;
            let value_col = find(vname)?;
            let mut subjects: Vec<String> = Vec::new();
            let mut conditions: Vec<String> = Vec::new();
            let mut subject_idx: HashMap<String, usize> = HashMap::new();
            let mut cond_idx: HashMap<String, usize> = HashMap::new();
            let mut cells: HashMap<(usize, usize), f64> = HashMap::new();
            for (line, rec) in &records {
                let subject = rec.get(subject_col).unwrap_or("").to_owned();
                let condition = rec.get(cond_col).unwrap_or("").to_owned();
                let field = rec.get(value_col).unwrap_or("");
                if field.is_empty() {
                    return Err(Error::MissingCell { subject, condition });
                }
                let value = parse_value(field, *line)?;
                let si = *subject_idx.entry(subject.clone()).or_insert_with(|| {
                    subjects.push(subject.clone());
                    subjects.len() - 1
                });
                let ci = *cond_idx.entry(condition.clone()).or_insert_with(|| {
                    conditions.push(condition.clone());
                    conditions.len() - 1
                });
                if cells.insert((si, ci), value).is_some() {
                    return Err(Error::DuplicateCell { subject, condition });
                }
            }
            let mut rows = Vec::with_capacity(subjects.len());
            for (si, subject) in subjects.iter().enumerate() {
                let mut row = Vec::with_capacity(conditions.len());
                for (ci, condition) in conditions.iter().enumerate() {
                    match cells.get(&(si, ci)) {
                        Some(&v) => row.push(v),
                        None => {
                            return Err(Error::MissingCell {
                                subject: subject.clone(),
                                condition: condition.clone(),
                            })
                        }
                    }
                }
                rows.push(row);
            }
            RepeatedMeasuresTable::new(rows, subjects, conditions)
        }
    }
}

fn parse_value(field: &str, line: usize) -> Result<f64> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse { line, message: format!("{field:?} is not a finite number") })
}

fn parse_err(line: usize, e: csv::Error) -> Error {
    Error::Parse { line, message: e.to_string() }
}

fn write_records(records: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.write_record(&r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

/// Comma-separated wide rendering with full-precision values.
pub fn to_wide_csv(table: &RepeatedMeasuresTable) -> String {
    let header = std::iter::once("subject".to_owned())
        .chain(table.condition_labels().iter().cloned())
        .collect();
    let rows = table.subject_ids().iter().zip(table.rows()).map(|(id, row)| {
        std::iter::once(id.clone()).chain(row.iter().map(|v| v.to_string())).collect()
    });
    write_records(std::iter::once(header).chain(rows))
}

/// Comma-separated long rendering, subject-major.
pub fn to_long_csv(table: &RepeatedMeasuresTable) -> String {
    let header = vec!["subject".to_owned(), "condition".to_owned(), "value".to_owned()];
    let mut rows = Vec::with_capacity(table.values().len());
    for (id, row) in table.subject_ids().iter().zip(table.rows()) {
        for (label, v) in table.condition_labels().iter().zip(row) {
            rows.push(vec![id.clone(), label.clone(), v.to_string()]);
        }
    }
    write_records(std::iter::once(header).chain(rows))
}

pub fn write_wide(table: &RepeatedMeasuresTable, path: &Path) -> Result<()> {
    std::fs::write(path, to_wide_csv(table))?;
    Ok(())
}
