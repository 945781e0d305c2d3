use std::path::Path;

use crate::error::{Error, Result};

/// Row-aligned ids and feature rows as read from CSV (`id,f0,f1,...`).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureMatrix {
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row length, or 0 for an empty matrix.
    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.ids.iter().position(|i| i == id).map(|i| self.rows[i].as_slice())
    }
}

/// Reads a feature CSV. A header row is recognised by a first field of `id`.
pub fn load_feature_matrix(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path, e.to_string()))?;
    let mut m = FeatureMatrix::default();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        if line == 0 && rec.get(0) == Some("id") {
            continue;
        }
        if rec.len() < 2 {
            return Err(Error::parse(path, format!("line {}: no feature columns", line + 1)));
        }
        let row = rec
            .iter()
            .skip(1)
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::parse(path, format!("line {}: {s:?}: {e}", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(i) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidValue(format!("line {}, column f{i}", line + 1)));
        }
        if !m.rows.is_empty() && row.len() != m.dim() {
            return Err(Error::InconsistentDimension {
                expected: m.dim(),
                got: row.len(),
            });
        }
        m.ids.push(rec[0].to_string());
        m.rows.push(row);
    }
    Ok(m)
}

pub fn write_feature_matrix(path: impl AsRef<Path>, m: &FeatureMatrix) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string()];
    header.extend((0..m.dim()).map(|i| format!("f{i}")));
    w.write_record(&header)?;
    for (id, row) in m.ids.iter().zip(&m.rows) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(|v| format!("{v:?}")));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    crate::io::write_atomic(path, &bytes)
}
