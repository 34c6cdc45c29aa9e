//! Comparison tables: one row per model, one column per metric@cutoff,
//! sorted by a chosen metric, emitted as full-precision CSV and 5-decimal
//! Markdown with the best cell bolded and the runner-up italicized.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::experiments::EvalReport;
use crate::metrics::Orientation;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no reports to tabulate")]
    Empty,
    #[error("reports mix fingerprints {0:?} and {1:?}; they are not comparable")]
    FingerprintMismatch(String, String),
    #[error("sort metric {0:?} is missing from report {1:?}")]
    MissingSortMetric(String, String),
    #[error("i/o at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed table row")]
    MalformedRow { path: String, line: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

/// A rendered model x metric table plus the metadata block describing where
/// its numbers came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub dataset: String,
    pub experiment: String,
    pub fingerprint: String,
    pub split_seed: u64,
    pub config_hash: String,
    pub sort_metric: String,
    pub columns: Vec<String>,
    pub orientations: Vec<Orientation>,
    /// (model id, one value per column), sorted by the sort metric.
    pub rows: Vec<(String, Vec<f64>)>,
}

/// Builds the table from per-model reports. Rows sort by `sort_metric`
/// descending (all sortable metrics are higher-better in the tables),
/// ties alphabetically by model id.
pub fn build_table(reports: &[EvalReport], sort_metric: &str) -> Result<ComparisonTable, ReportError> {
    let first = reports.first().ok_or(ReportError::Empty)?;
    for report in reports {
        if report.fingerprint != first.fingerprint {
            return Err(ReportError::FingerprintMismatch(
                first.fingerprint.clone(),
                report.fingerprint.clone(),
            ));
        }
    }
    let columns: Vec<String> = first.metrics.iter().map(|m| m.label()).collect();
    let orientations: Vec<Orientation> = first.metrics.iter().map(|m| m.orientation).collect();
    let mut rows: Vec<(String, Vec<f64>)> = Vec::with_capacity(reports.len());
    for report in reports {
        let mut values = Vec::with_capacity(columns.len());
        for label in &columns {
            values.push(report.get(label).ok_or_else(|| {
                ReportError::MissingSortMetric(label.clone(), report.model_id.clone())
            })?);
        }
        rows.push((report.model_id.clone(), values));
    }
    let sort_idx = columns
        .iter()
        .position(|c| c == sort_metric)
        .ok_or_else(|| ReportError::MissingSortMetric(sort_metric.into(), first.model_id.clone()))?;
    rows.sort_by(|a, b| {
        b.1[sort_idx]
            .partial_cmp(&a.1[sort_idx])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(ComparisonTable {
        dataset: first.dataset.clone(),
        experiment: first.experiment.clone(),
        fingerprint: first.fingerprint.clone(),
        split_seed: first.split_seed,
        config_hash: first.config_hash.clone(),
        sort_metric: sort_metric.to_string(),
        columns,
        orientations,
        rows,
    })
}

impl ComparisonTable {
    fn metadata_lines(&self, prefix: &str) -> String {
        format!(
            "{prefix} dataset: {}\n{prefix} experiment: {}\n{prefix} fingerprint: {}\n\
             {prefix} split_seed: {}\n{prefix} config_hash: {}\n{prefix} sorted_by: {}\n",
            self.dataset,
            self.experiment,
            self.fingerprint,
            self.split_seed,
            self.config_hash,
            self.sort_metric
        )
    }

    /// Full-precision CSV; floats use the shortest representation that
    /// round-trips, so parsing the file recovers the exact values.
    pub fn to_csv(&self) -> String {
        let mut out = self.metadata_lines("#");
        out.push_str("model,");
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for (model, values) in &self.rows {
            out.push_str(model);
            for v in values {
                out.push(',');
                out.push_str(&format_full(*v));
            }
            out.push('\n');
        }
        out
    }

    /// Per column: index of the best and runner-up rows by orientation.
    fn highlights(&self, col: usize) -> (Option<usize>, Option<usize>) {
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        let higher_better = self.orientations[col] == Orientation::HigherBetter;
        order.sort_by(|&a, &b| {
            let (x, y) = (self.rows[a].1[col], self.rows[b].1[col]);
            let cmp = x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal);
            if higher_better { cmp.reverse() } else { cmp }
        });
        (order.first().copied(), order.get(1).copied())
    }

    /// 5-decimal Markdown table with the best value per column in bold and
    /// the runner-up in italics.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.metadata_lines(">"));
        out.push('\n');
        out.push_str("| model |");
        for column in &self.columns {
            out.push_str(&format!(" {column} |"));
        }
        out.push('\n');
        out.push_str("|---|");
        out.push_str(&"---|".repeat(self.columns.len()));
        out.push('\n');
        let marks: Vec<(Option<usize>, Option<usize>)> =
            (0..self.columns.len()).map(|c| self.highlights(c)).collect();
        for (row_idx, (model, values)) in self.rows.iter().enumerate() {
            out.push_str(&format!("| {model} |"));
            for (col, v) in values.iter().enumerate() {
                let cell = format!("{v:.5}");
                let cell = match marks[col] {
                    (Some(best), _) if best == row_idx => format!("**{cell}**"),
                    (_, Some(second)) if second == row_idx => format!("*{cell}*"),
                    _ => cell,
                };
                out.push_str(&format!(" {cell} |"));
            }
            out.push('\n');
        }
        out
    }

    pub fn file_stem(&self) -> String {
        format!("report_{}_{}", self.dataset, self.experiment)
    }
}

fn format_full(v: f64) -> String {
    // `{}` on f64 prints the shortest string that parses back exactly.
    format!("{v}")
}

/// Writes the requested formats into `dir`, returning the paths written.
pub fn emit_comparison_table(
    reports: &[EvalReport],
    sort_metric: &str,
    formats: &[TableFormat],
    dir: &Path,
) -> Result<Vec<PathBuf>, ReportError> {
    let table = build_table(reports, sort_metric)?;
    std::fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();
    for format in formats {
        let (ext, body) = match format {
            TableFormat::Csv => ("csv", table.to_csv()),
            TableFormat::Markdown => ("md", table.to_markdown()),
        };
        let path = dir.join(format!("{}.{ext}", table.file_stem()));
        std::fs::write(&path, body).map_err(|source| ReportError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if !written.contains(&path) {
            written.push(path);
        }
    }
    Ok(written)
}

/// Parses a CSV emitted by [`ComparisonTable::to_csv`] back into
/// (model, column, value) triples.
pub fn parse_table_csv(path: &Path, raw: &str) -> Result<Vec<(String, String, f64)>, ReportError> {
    let mut lines = raw.lines().enumerate().filter(|(_, l)| !l.starts_with('#'));
    let (_, header) = lines.next().ok_or(ReportError::Empty)?;
    let columns: Vec<&str> = header.split(',').skip(1).collect();
    let mut out = Vec::new();
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let model = fields.next().unwrap_or_default().to_string();
        let values: Vec<&str> = fields.collect();
        if values.len() != columns.len() {
            return Err(ReportError::MalformedRow {
                path: path.display().to_string(),
                line: line_no + 1,
            });
        }
        for (column, value) in columns.iter().zip(values) {
            let value: f64 = value.parse().map_err(|_| ReportError::MalformedRow {
                path: path.display().to_string(),
                line: line_no + 1,
            })?;
            out.push((model.clone(), column.to_string(), value));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricValue;

    fn report(model: &str, ndcg10: f64, arp10: f64) -> EvalReport {
        EvalReport {
            model_id: model.into(),
            experiment: "free_top50".into(),
            dataset: "toy".into(),
            fingerprint: "fp".into(),
            split_seed: 42,
            config_hash: "ch".into(),
            metrics: vec![
                MetricValue {
                    name: "nDCG".into(),
                    cutoff: 10,
                    value: ndcg10,
                    orientation: Orientation::HigherBetter,
                },
                MetricValue {
                    name: "ARP".into(),
                    cutoff: 10,
                    value: arp10,
                    orientation: Orientation::LowerBetter,
                },
            ],
        }
    }

    #[test]
    fn rows_sort_by_metric_then_name() {
        let reports = vec![
            report("Alpha", 0.5, 3.0),
            report("Zeta", 0.9, 2.0),
            report("Beta", 0.5, 1.0),
        ];
        let table = build_table(&reports, "nDCG@10").unwrap();
        let models: Vec<&str> = table.rows.iter().map(|(m, _)| m.as_str()).collect();
        assert_eq!(models, vec!["Zeta", "Alpha", "Beta"]);
    }

    #[test]
    fn csv_round_trips_exact_values() {
        let value = 0.123456789012345678;
        let reports = vec![report("A", value, 7.25), report("B", 0.25, 1e-17)];
        let table = build_table(&reports, "nDCG@10").unwrap();
        let csv = table.to_csv();
        let parsed = parse_table_csv(Path::new("x.csv"), &csv).unwrap();
        let a_ndcg = parsed
            .iter()
            .find(|(m, c, _)| m == "A" && c == "nDCG@10")
            .unwrap()
            .2;
        assert_eq!(a_ndcg, value);
        let b_arp = parsed
            .iter()
            .find(|(m, c, _)| m == "B" && c == "ARP@10")
            .unwrap()
            .2;
        assert_eq!(b_arp, 1e-17);
    }

    #[test]
    fn markdown_bolds_orientation_aware_best() {
        let reports = vec![report("A", 0.9, 5.0), report("B", 0.3, 1.0)];
        let table = build_table(&reports, "nDCG@10").unwrap();
        let md = table.to_markdown();
        // A wins nDCG (higher better), B wins ARP (lower better).
        assert!(md.contains("**0.90000**"));
        assert!(md.contains("**1.00000**"));
        assert!(md.contains("*0.30000*"));
        assert!(md.contains("*5.00000*"));
    }

    #[test]
    fn mismatched_fingerprints_are_rejected() {
        let mut other = report("B", 0.3, 1.0);
        other.fingerprint = "other".into();
        assert!(matches!(
            build_table(&[report("A", 0.9, 5.0), other], "nDCG@10"),
            Err(ReportError::FingerprintMismatch(..))
        ));
    }

    #[test]
    fn emission_is_deterministic() {
        let reports = vec![report("A", 0.9, 5.0), report("B", 0.3, 1.0)];
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_comparison_table(
            &reports,
            "nDCG@10",
            &[TableFormat::Csv, TableFormat::Markdown],
            dir.path(),
        )
        .unwrap();
        let before: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
        emit_comparison_table(
            &reports,
            "nDCG@10",
            &[TableFormat::Csv, TableFormat::Markdown],
            dir.path(),
        )
        .unwrap();
        let after: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
        assert_eq!(before, after);
    }
}
