//! The N×C response matrix of a single-factor repeated-measures design.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Complete subjects × conditions table of responses.
///
/// Rows are subjects, columns are conditions. Construction rejects ragged,
/// incomplete or non-finite input, duplicate labels, and designs with fewer
/// than two subjects or two conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatedMeasuresTable {
    values: Vec<f64>,
    n_subjects: usize,
    n_conditions: usize,
    subject_ids: Vec<String>,
    condition_labels: Vec<String>,
}

impl RepeatedMeasuresTable {
    pub fn new(
        rows: Vec<Vec<f64>>,
        subject_ids: Vec<String>,
        condition_labels: Vec<String>,
    ) -> Result<Self> {
        let n = rows.len();
        let c = condition_labels.len();
        if n < 2 {
            return Err(Error::InvalidTable(format!(
                "need at least 2 subjects, got {n}"
            )));
        }
        if c < 2 {
            return Err(Error::InvalidTable(format!(
                "need at least 2 conditions, got {c}"
            )));
        }
        if subject_ids.len() != n {
            return Err(Error::InvalidTable(format!(
                "{} subject ids for {n} rows",
                subject_ids.len()
            )));
        }
        unique("subject id", &subject_ids)?;
        unique("condition label", &condition_labels)?;

        let mut values = Vec::with_capacity(n * c);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != c {
                return Err(Error::InvalidTable(format!(
                    "row for subject {:?} has {} values, expected {c}",
                    subject_ids[i],
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidTable(format!(
                    "non-finite value for subject {:?}, condition {:?}",
                    subject_ids[i], condition_labels[j]
                )));
            }
            values.extend(row);
        }

        Ok(Self {
            values,
            n_subjects: n,
            n_conditions: c,
            subject_ids,
            condition_labels,
        })
    }

    /// Table with labels `1..=N` for subjects and `C1..=CC` for conditions.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let subjects = (1..=n).map(|i| i.to_string()).collect();
        let conditions = (1..=c).map(|j| format!("C{j}")).collect();
        Self::new(rows, subjects, conditions)
    }

    pub fn n_subjects(&self) -> usize {
        self.n_subjects
    }

    pub fn n_conditions(&self) -> usize {
        self.n_conditions
    }

    pub fn subject_ids(&self) -> &[String] {
        &self.subject_ids
    }

    pub fn condition_labels(&self) -> &[String] {
        &self.condition_labels
    }

    pub fn get(&self, subject: usize, condition: usize) -> f64 {
        self.values[subject * self.n_conditions + condition]
    }

    pub fn row(&self, subject: usize) -> &[f64] {
        let c = self.n_conditions;
        &self.values[subject * c..(subject + 1) * c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_conditions)
    }

    pub fn column(&self, condition: usize) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .skip(condition)
            .step_by(self.n_conditions)
            .copied()
    }

    /// Row-major cell values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub(crate) fn check_condition(&self, j: usize) -> Result<()> {
        if j < self.n_conditions {
            Ok(())
        } else {
            Err(Error::ConditionOutOfRange {
                index: j,
                count: self.n_conditions,
            })
        }
    }

    /// Same labels, new cell values. `values` is row-major and must match the shape.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            values,
            ..self.clone()
        }
    }

    /// Copy with `delta` added to every cell.
    pub fn shifted(&self, delta: f64) -> Self {
        self.with_values(self.values.iter().map(|v| v + delta).collect())
    }

    /// Copy with rows reordered so that new row `k` is old row `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n_subjects];
        if order.len() != self.n_subjects
            || order.iter().any(|&i| i >= self.n_subjects || std::mem::replace(&mut seen[i], true))
        {
            return Err(Error::InvalidParameter(
                "row order must be a permutation of the subjects".into(),
            ));
        }
        let rows = order.iter().map(|&i| self.row(i).to_vec()).collect();
        let ids = order.iter().map(|&i| self.subject_ids[i].clone()).collect();
        Self::new(rows, ids, self.condition_labels.clone())
    }
}

fn unique(what: &str, labels: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::InvalidTable(format!("duplicate {what} {l:?}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_designs() {
        assert!(RepeatedMeasuresTable::from_rows(vec![vec![1.0, 2.0]]).is_err());
        assert!(RepeatedMeasuresTable::from_rows(vec![vec![1.0], vec![2.0]]).is_err());
    }

    #[test]
    fn rejects_ragged_and_non_finite() {
        let ragged = RepeatedMeasuresTable::from_rows(vec![vec![1.0, 2.0], vec![1.0]]);
        assert!(matches!(ragged, Err(Error::InvalidTable(_))));
        let nan = RepeatedMeasuresTable::from_rows(vec![vec![1.0, f64::NAN], vec![1.0, 2.0]]);
        assert!(matches!(nan, Err(Error::InvalidTable(_))));
    }

    #[test]
    fn rejects_duplicate_labels() {
        let t = RepeatedMeasuresTable::new(
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            vec!["a".into(), "a".into()],
            vec!["x".into(), "y".into()],
        );
        assert!(matches!(t, Err(Error::InvalidTable(_))));
        let t = RepeatedMeasuresTable::new(
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            vec!["a".into(), "b".into()],
            vec!["x".into(), "x".into()],
        );
        assert!(matches!(t, Err(Error::InvalidTable(_))));
    }

    #[test]
    fn accessors() {
        let t = RepeatedMeasuresTable::from_rows(vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]])
            .unwrap();
        assert_eq!(t.get(1, 2), 6.0);
        assert_eq!(t.row(0), &[1.0, 2.0, 3.0]);
        assert_eq!(t.column(1).collect::<Vec<_>>(), vec![2.0, 5.0]);
        let p = t.permuted(&[1, 0]).unwrap();
        assert_eq!(p.row(0), &[4.0, 5.0, 6.0]);
        assert_eq!(p.subject_ids()[0], "2");
        assert!(t.permuted(&[0, 0]).is_err());
    }
}
