use std::collections::BTreeMap;
use std::path::Path;

use super::{DataError, Dataset};

/// Which columns of a CSV file hold features and which holds the label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    /// Feature column names; empty means every column except the label
    /// (and the task column, if any), in header order.
    pub feature_columns: Vec<String>,
    pub label_column: String,
    /// Optional column holding an integer task id per row.
    pub task_column: Option<String>,
    /// Fixed label vocabulary; when set, labels outside it are rejected.
    pub label_vocabulary: Option<Vec<String>>,
}

impl CsvSchema {
    pub fn with_label(label_column: impl Into<String>) -> Self {
        Self {
            feature_columns: Vec::new(),
            label_column: label_column.into(),
            task_column: None,
            label_vocabulary: None,
        }
    }
}

/// Result of loading: the dataset plus the per-row task column, if requested.
#[derive(Debug, Clone)]
pub struct CsvData {
    pub dataset: Dataset,
    pub tasks: Option<Vec<usize>>,
}

/// Loads rows in file order. Labels are mapped to dense ids; without a fixed
/// vocabulary the ids follow sorted label text (numeric text sorts
/// numerically), and the mapping is kept in `label_names`.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<CsvData, DataError> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let label_idx = find(&schema.label_column)?;
    let task_idx = schema.task_column.as_deref().map(find).transpose()?;
    let feature_idx: Vec<usize> = if schema.feature_columns.is_empty() {
        (0..headers.len())
            .filter(|&i| i != label_idx && Some(i) != task_idx)
            .collect()
    } else {
        schema
            .feature_columns
            .iter()
            .map(|c| find(c))
            .collect::<Result<_, _>>()?
    };
    if feature_idx.is_empty() {
        return Err(DataError::Invalid("no feature columns".into()));
    }

    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    let mut tasks = task_idx.map(|_| Vec::new());
    for (row_no, record) in reader.records().enumerate() {
        // header is line 1
        let line = row_no + 2;
        let record = record?;
        if record.len() != headers.len() {
            return Err(DataError::RaggedRow {
                line,
                expected: headers.len(),
                found: record.len(),
            });
        }
        for &i in &feature_idx {
            let field = record[i].trim();
            let v: f64 = field.parse().map_err(|_| DataError::ParseError {
                line,
                reason: format!("non-numeric feature {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(DataError::ParseError {
                    line,
                    reason: format!("non-finite feature {field:?}"),
                });
            }
            features.push(v);
        }
        raw_labels.push(record[label_idx].trim().to_string());
        if let (Some(ti), Some(ts)) = (task_idx, tasks.as_mut()) {
            let field = record[ti].trim();
            let t: usize = field.parse().map_err(|_| DataError::ParseError {
                line,
                reason: format!("bad task id {field:?}"),
            })?;
            ts.push(t);
        }
    }

    let names: Vec<String> = match &schema.label_vocabulary {
        Some(v) => v.clone(),
        None => sorted_vocabulary(&raw_labels),
    };
    let index: BTreeMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let labels = raw_labels
        .iter()
        .map(|l| {
            index
                .get(l.as_str())
                .copied()
                .ok_or_else(|| DataError::UnknownLabel(l.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut dataset = Dataset::new(
        features,
        feature_idx.len(),
        labels,
        names.len().max(1),
        path.display().to_string(),
    )?;
    dataset.label_names = names;
    Ok(CsvData { dataset, tasks })
}

fn sorted_vocabulary(raw: &[String]) -> Vec<String> {
    let mut names: Vec<String> = raw.to_vec();
    names.sort_by(|a, b| match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y),
        _ => a.cmp(b),
    });
    names.dedup();
    names
}

/// Writes features and label text with a header `f0,…,f{d-1},label`.
///
/// Values use the shortest representation that round-trips exactly.
pub fn write_csv(
    path: impl AsRef<Path>,
    ds: &Dataset,
    label_column: &str,
) -> Result<(), DataError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..ds.dim()).map(|j| format!("f{j}")).collect();
    header.push(label_column.to_string());
    w.write_record(&header)?;
    for i in 0..ds.len() {
        let mut row: Vec<String> = ds.x(i).iter().map(|v| format!("{v:?}")).collect();
        row.push(ds.label_names[ds.labels()[i]].clone());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
