use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{confusion, mcc, MetricsError};
use crate::labels::BiasLabel;
use crate::prompting::BENCHMARK_SETTINGS;

/// Predictions of one model under one prompt setting, aligned with gold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkRun {
    pub model: String,
    pub settings: String,
    pub preds: Vec<BiasLabel>,
}

/// MCC per (model, setting). `cells[i][j]` is `None` for a run that was not
/// made; row means skip such cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkMatrix {
    pub models: Vec<String>,
    pub settings: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
    pub means: Vec<Option<f64>>,
}

fn row_mean(row: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = row.iter().flatten().copied().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

impl BenchmarkMatrix {
    /// Columns follow the standard settings order, unknown names after it in
    /// first-seen order. Rows are sorted by descending mean, ties by name,
    /// rows without any defined cell last.
    pub fn from_cells(cells: &BTreeMap<(String, String), f64>) -> Self {
        let mut settings: Vec<String> = BENCHMARK_SETTINGS
            .iter()
            .map(|s| s.name())
            .filter(|name| cells.keys().any(|(_, s)| s == name))
            .collect();
        for (_, s) in cells.keys() {
            if !settings.contains(s) {
                settings.push(s.clone());
            }
        }
        let models: BTreeSet<&String> = cells.keys().map(|(m, _)| m).collect();
        let mut rows: Vec<(String, Vec<Option<f64>>, Option<f64>)> = models
            .into_iter()
            .map(|m| {
                let row: Vec<Option<f64>> = settings
                    .iter()
                    .map(|s| cells.get(&(m.clone(), s.clone())).copied())
                    .collect();
                let mean = row_mean(&row);
                (m.clone(), row, mean)
            })
            .collect();
        rows.sort_by(|a, b| match (a.2, b.2) {
            (Some(x), Some(y)) => y.total_cmp(&x).then_with(|| a.0.cmp(&b.0)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.0.cmp(&b.0),
        });
        Self {
            models: rows.iter().map(|r| r.0.clone()).collect(),
            settings,
            cells: rows.iter().map(|r| r.1.clone()).collect(),
            means: rows.iter().map(|r| r.2).collect(),
        }
    }

    /// Header `model,<settings...>,mean`; undefined cells are empty.
    pub fn to_csv(&self) -> String {
        let fmt = |v: &Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        let mut out = format!("model,{},mean\n", self.settings.join(","));
        for (i, m) in self.models.iter().enumerate() {
            let cells: Vec<String> = self.cells[i].iter().map(fmt).collect();
            let _ = writeln!(out, "{m},{},{}", cells.join(","), fmt(&self.means[i]));
        }
        out
    }

    /// Fixed-width table with three decimals and `-` for undefined cells.
    pub fn to_text(&self) -> String {
        let fmt = |v: &Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
        let mut header = vec!["model".to_string()];
        header.extend(self.settings.iter().cloned());
        header.push("mean".into());
        let mut table = vec![header];
        for (i, m) in self.models.iter().enumerate() {
            let mut row = vec![m.clone()];
            row.extend(self.cells[i].iter().map(fmt));
            row.push(fmt(&self.means[i]));
            table.push(row);
        }
        let widths: Vec<usize> = (0..table[0].len())
            .map(|j| table.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &table {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(j, cell)| {
                    if j == 0 {
                        format!("{cell:<w$}", w = widths[j])
                    } else {
                        format!("{cell:>w$}", w = widths[j])
                    }
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

pub fn benchmark_matrix(runs: &[BenchmarkRun], golds: &[BiasLabel]) -> Result<BenchmarkMatrix, MetricsError> {
    let mut cells = BTreeMap::new();
    for run in runs {
        let c = confusion(&run.preds, golds)?;
        if cells.insert((run.model.clone(), run.settings.clone()), mcc(&c)).is_some() {
            return Err(MetricsError::DuplicateRun {
                model: run.model.clone(),
                settings: run.settings.clone(),
            });
        }
    }
    Ok(BenchmarkMatrix::from_cells(&cells))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cells(entries: &[(&str, &str, f64)]) -> BTreeMap<(String, String), f64> {
        entries.iter().map(|(m, s, v)| ((m.to_string(), s.to_string()), *v)).collect()
    }

    #[test]
    fn single_model_mean() {
        let m = BenchmarkMatrix::from_cells(&cells(&[("a", "0-shot", 0.4), ("a", "2-shot", 0.6)]));
        assert!((m.means[0].unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn undefined_cells_skip_mean_and_rows_sort() {
        let m = BenchmarkMatrix::from_cells(&cells(&[
            ("low", "0-shot", 0.1),
            ("low", "2-shot", 0.3),
            ("high", "2-shot", 0.5),
        ]));
        assert_eq!(m.models, ["high", "low"]);
        assert_eq!(m.settings, ["0-shot", "2-shot"]);
        assert_eq!(m.cells[0], [None, Some(0.5)]);
        assert_eq!(m.means[0], Some(0.5));
        assert_eq!(m.to_csv(), "model,0-shot,2-shot,mean\nhigh,,0.500000,0.500000\nlow,0.100000,0.300000,0.200000\n");
        let text = m.to_text();
        assert!(text.lines().nth(1).unwrap().starts_with("high"));
        assert!(text.contains('-'));
    }

    #[test]
    fn runs_to_mcc() {
        use BiasLabel::{Biased as B, NotBiased as N};
        let golds = [B, N, B, N];
        let runs = vec![
            BenchmarkRun { model: "m".into(), settings: "0-shot".into(), preds: golds.to_vec() },
            BenchmarkRun { model: "m".into(), settings: "2-shot".into(), preds: vec![N, B, N, B] },
        ];
        let m = benchmark_matrix(&runs, &golds).unwrap();
        assert_eq!(m.cells[0], [Some(1.0), Some(-1.0)]);
        let dup = vec![runs[0].clone(), runs[0].clone()];
        assert!(matches!(benchmark_matrix(&dup, &golds), Err(MetricsError::DuplicateRun { .. })));
    }
}
