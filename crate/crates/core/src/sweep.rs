//! Tabulated parameter sweeps with argmax metadata.

use std::collections::BTreeMap;

use serde::Serialize;

/// Run metadata attached to every emitted table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub toolkit: String,
    pub version: String,
    pub seed: Option<u64>,
    /// Every configuration value the run used, as text.
    pub config: BTreeMap<String, String>,
}

impl Default for Provenance {
    fn default() -> Self {
        Self {
            toolkit: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            config: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub coords: Vec<f64>,
    /// `None` marks an invalid cell.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArgmaxRecord {
    pub column: String,
    pub index: usize,
    pub coords: Vec<f64>,
    pub value: f64,
    pub grid_step: Vec<f64>,
}

impl ArgmaxRecord {
    /// Largest valid value in `column`; ties go to the smallest row index.
    pub fn of_column(sweep: &SweepResult, column: &str) -> Option<Self> {
        let c = sweep.column_index(column)?;
        let mut best: Option<(usize, f64)> = None;
        for (k, row) in sweep.rows.iter().enumerate() {
            if let Some(v) = row.values[c] {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((k, v));
                }
            }
        }
        best.map(|(index, value)| ArgmaxRecord {
            column: column.to_string(),
            index,
            coords: sweep.rows[index].coords.clone(),
            value,
            grid_step: sweep.grid_step.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis_labels: Vec<String>,
    pub columns: Vec<String>,
    /// Spacing along each axis (same order as `axis_labels`).
    pub grid_step: Vec<f64>,
    pub rows: Vec<SweepRow>,
    pub argmax: Vec<ArgmaxRecord>,
    pub provenance: Provenance,
}

impl SweepResult {
    pub fn new(axis_labels: Vec<String>, columns: Vec<String>, grid_step: Vec<f64>, rows: Vec<SweepRow>) -> Self {
        Self { axis_labels, columns, grid_step, rows, argmax: Vec::new(), provenance: Provenance::default() }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let c = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r.values[c]).collect())
    }

    pub fn argmax_of(&self, column: &str) -> Option<&ArgmaxRecord> {
        self.argmax.iter().find(|a| a.column == column)
    }

    pub fn invalid_count(&self) -> usize {
        self.rows.iter().filter(|r| r.values.iter().any(Option::is_none)).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep(values: &[Option<f64>]) -> SweepResult {
        let rows = values
            .iter()
            .enumerate()
            .map(|(k, v)| SweepRow { coords: vec![k as f64], values: vec![*v] })
            .collect();
        SweepResult::new(vec!["x".into()], vec!["y".into()], vec![1.0], rows)
    }

    #[test]
    fn argmax_skips_invalid_and_breaks_ties_low() {
        let s = sweep(&[Some(1.0), None, Some(3.0), Some(3.0), Some(2.0)]);
        let a = ArgmaxRecord::of_column(&s, "y").unwrap();
        assert_eq!(a.index, 2);
        assert_eq!(a.value, 3.0);
        assert_eq!(s.invalid_count(), 1);
        assert!(ArgmaxRecord::of_column(&s, "z").is_none());
        assert!(ArgmaxRecord::of_column(&sweep(&[None, None]), "y").is_none());
    }
}
