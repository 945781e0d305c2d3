use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{f_score, Counts};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryMetrics {
    pub category: String,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

impl CategoryMetrics {
    fn new(category: String, c: Counts) -> Self {
        let ratio = |a: u64, b: u64| if a + b == 0 { 0.0 } else { a as f64 / (a + b) as f64 };
        let precision = ratio(c.tp, c.fp);
        let recall = ratio(c.tp, c.fn_);
        Self {
            category,
            tp: c.tp,
            fp: c.fp,
            fn_: c.fn_,
            precision,
            recall,
            f_score: f_score(precision, recall).expect("ratios lie in [0, 1]"),
        }
    }
}

/// Per-category and pooled (micro-averaged) scores of one counting scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub kind: String,
    pub categories: Vec<CategoryMetrics>,
    pub overall: CategoryMetrics,
}

impl MetricsReport {
    pub fn from_counts(kind: &str, counts: BTreeMap<String, Counts>) -> Self {
        let mut total = Counts::default();
        for c in counts.values() {
            total += *c;
        }
        Self {
            kind: kind.to_string(),
            categories: counts.into_iter().map(|(k, c)| CategoryMetrics::new(k, c)).collect(),
            overall: CategoryMetrics::new("overall".into(), total),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub version: u32,
    pub frames: usize,
    pub instance: MetricsReport,
    pub pixel: MetricsReport,
}

impl EvaluationReport {
    /// Rows Precise/Recall/F-Score for both schemes, one column per category
    /// plus Overall, values in percent.
    pub fn to_table(&self) -> String {
        let mut cats: Vec<&str> = self.instance.categories.iter().map(|c| c.category.as_str()).collect();
        for c in &self.pixel.categories {
            if !cats.contains(&c.category.as_str()) {
                cats.push(&c.category);
            }
        }
        cats.sort_unstable();
        let mut header = vec!["".to_string()];
        header.extend(cats.iter().map(|c| c.to_string()));
        header.push("Overall".into());

        let mut rows = vec![header];
        for (rep, tag) in [(&self.instance, "inst.w."), (&self.pixel, "pix.w.")] {
            for (name, get) in [
                ("Precise", (|m: &CategoryMetrics| m.precision) as fn(&CategoryMetrics) -> f64),
                ("Recall", |m| m.recall),
                ("F-Score", |m| m.f_score),
            ] {
                let mut row = vec![format!("{name} ({tag})")];
                for c in &cats {
                    let v = rep.categories.iter().find(|m| m.category == *c).map(get);
                    row.push(v.map_or("-".into(), |v| format!("{:.2}", 100.0 * v)));
                }
                row.push(format!("{:.2}", 100.0 * get(&rep.overall)));
                rows.push(row);
            }
        }
        let ncol = rows[0].len();
        let widths: Vec<usize> = (0..ncol).map(|j| rows.iter().map(|r| r[j].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for r in &rows {
            let mut line = String::new();
            for (j, cell) in r.iter().enumerate() {
                if j == 0 {
                    let _ = write!(line, "{cell:<w$}", w = widths[j]);
                } else {
                    let _ = write!(line, "  {cell:>w$}", w = widths[j]);
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_layout() {
        let mut c = BTreeMap::new();
        c.insert("mug".to_string(), Counts { tp: 3, fp: 1, fn_: 0 });
        c.insert("bowl".to_string(), Counts { tp: 1, fp: 0, fn_: 1 });
        let r = EvaluationReport {
            version: 1,
            frames: 2,
            instance: MetricsReport::from_counts("instance", c.clone()),
            pixel: MetricsReport::from_counts("pixel", c),
        };
        let t = r.to_table();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 7);
        assert!(lines[0].contains("bowl") && lines[0].ends_with("Overall"));
        assert!(lines[1].starts_with("Precise (inst.w.)"));
        assert!(lines[1].ends_with("80.00"));
    }
}
