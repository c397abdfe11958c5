//! Tabular sweep results.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: &str, unit: &str, values: Vec<f64>) -> Self {
        Axis {
            name: name.into(),
            unit: unit.into(),
            values,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub version: String,
    pub tolerances: BTreeMap<String, f64>,
    /// Settings filled in because the configuration left them open.
    pub defaults: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

/// How a table is laid out in CSV and plotted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// One row per lattice point.
    Long,
    /// First axis is the series index, second the abscissa: one row per
    /// abscissa value, one column per (metric, series).
    Wide,
    /// Two-axis lattice drawn as a heatmap of the first metric.
    Heatmap,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub task: String,
    pub layout: Layout,
    pub axes: Vec<Axis>,
    pub metrics: Vec<String>,
    /// Row-major over `axes` (last axis fastest); `None` where a metric
    /// does not apply.
    pub rows: Vec<Vec<Option<f64>>>,
    pub summary: BTreeMap<String, f64>,
    pub provenance: Provenance,
}

impl SweepResult {
    pub fn new(task: &str, layout: Layout, axes: Vec<Axis>, metrics: &[&str]) -> Self {
        SweepResult {
            task: task.into(),
            layout,
            axes,
            metrics: metrics.iter().map(|m| m.to_string()).collect(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
            provenance: Provenance::default(),
        }
    }

    pub fn expected_rows(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Axis values of row `r`.
    pub fn coordinates(&self, r: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        let mut rest = r;
        for (k, axis) in self.axes.iter().enumerate().rev() {
            let n = axis.values.len();
            out[k] = axis.values[rest % n];
            rest /= n;
        }
        out
    }

    pub fn metric_index(&self, name: &str) -> Option<usize> {
        self.metrics.iter().position(|m| m == name)
    }

    /// Column of one metric, in row order.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.metric_index(name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Shape and range checks on the table.
    pub fn check(&self) -> Result<()> {
        if self.axes.iter().any(|a| a.values.is_empty()) {
            return Err(Error::Contract(format!("{}: empty axis", self.task)));
        }
        if self.rows.len() != self.expected_rows() {
            return Err(Error::Contract(format!(
                "{}: {} rows for {} lattice points",
                self.task,
                self.rows.len(),
                self.expected_rows()
            )));
        }
        if let Some(r) = self.rows.iter().position(|r| r.len() != self.metrics.len()) {
            return Err(Error::Contract(format!(
                "{}: row {r} has the wrong width",
                self.task
            )));
        }
        for (name, lo, hi, closed_hi) in [("F", 0.0, 1.0 + 1e-9, true), ("S_L", -1e-9, 1.0, false)]
        {
            let Some(col) = self.column(name) else {
                continue;
            };
            for v in col.into_iter().flatten() {
                let above = if closed_hi { v > hi } else { v >= hi };
                if !(v >= lo) || above {
                    return Err(Error::Contract(format!(
                        "{}: {name} = {v} out of range",
                        self.task
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> SweepResult {
        let mut s = SweepResult::new(
            "t",
            Layout::Long,
            vec![
                Axis::new("a", "", vec![1.0, 2.0]),
                Axis::new("b", "", vec![10.0, 20.0, 30.0]),
            ],
            &["F", "S_L"],
        );
        s.rows = (0..6).map(|_| vec![Some(0.5), Some(0.1)]).collect();
        s
    }

    #[test]
    fn coordinates_are_row_major() {
        let s = table();
        assert_eq!(s.coordinates(0), vec![1.0, 10.0]);
        assert_eq!(s.coordinates(4), vec![2.0, 20.0]);
        s.check().unwrap();
    }

    #[test]
    fn check_catches_bad_tables() {
        let mut s = table();
        s.rows.pop();
        assert!(s.check().is_err());
        let mut s = table();
        s.rows[2][0] = Some(1.01);
        assert!(s.check().is_err());
        let mut s = table();
        s.rows[2][1] = Some(1.0);
        assert!(s.check().is_err());
    }
}
