use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LabeledExample, Provenance};
use crate::error::{Error, Result};

/// One row of the labels CSV (`id,label,provenance,confidence`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub id: String,
    pub label: usize,
    pub provenance: Provenance,
    pub confidence: f64,
}

impl From<&LabeledExample> for LabelRecord {
    fn from(e: &LabeledExample) -> Self {
        Self {
            id: e.id.clone(),
            label: e.label,
            provenance: e.provenance,
            confidence: e.confidence,
        }
    }
}

pub fn write_labels(path: impl AsRef<Path>, records: &[LabelRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record(["id", "label", "provenance", "confidence"])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    crate::io::write_atomic(path, &bytes)
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<LabelRecord>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
    let mut out = Vec::new();
    for rec in r.deserialize() {
        let rec: LabelRecord = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        if !(0.0..=1.0).contains(&rec.confidence) {
            return Err(Error::InvalidValue(format!("confidence {} for {}", rec.confidence, rec.id)));
        }
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("labels.csv");
        let recs = vec![
            LabelRecord { id: "a".into(), label: 2, provenance: Provenance::Manual, confidence: 1.0 },
            LabelRecord { id: "b".into(), label: 0, provenance: Provenance::Propagated, confidence: 0.8125 },
        ];
        write_labels(&p, &recs).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("id,label,provenance,confidence\n"));
        assert_eq!(read_labels(&p).unwrap(), recs);
    }

    #[test]
    fn empty_has_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("labels.csv");
        write_labels(&p, &[]).unwrap();
        assert!(read_labels(&p).unwrap().is_empty());
    }
}
