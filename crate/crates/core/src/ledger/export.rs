use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Ledger, EXCLUDED};
use crate::error::Result;

/// δ values at which parametric constants are tabulated by default.
pub const DEFAULT_EXPORT_DELTAS: &[f64] = &[0.0, 1e-15];

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LedgerRow {
    pub name: String,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub delta: Option<f64>,
    pub citation: String,
    pub reference_value_if_any: String,
    pub discrepancy_flag: bool,
    pub formula: String,
    pub error: Option<String>,
}

fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

impl Ledger {
    /// One row per non-parametric constant and per (parametric constant, δ).
    pub fn rows(&self, deltas: &[f64]) -> Vec<LedgerRow> {
        let mut out = Vec::new();
        for node in self.nodes() {
            let points: Vec<Option<f64>> = if node.delta_parametric {
                deltas.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            let reference = node
                .annotations
                .iter()
                .map(|a| format!("{} ({})", a.value, a.label))
                .collect::<Vec<_>>()
                .join("; ");
            for delta in points {
                let result = self.eval(node.name, delta);
                let (lo, hi, flag, error) = match &result {
                    Ok(v) => (Some(v.lo()), Some(v.hi()), node.discrepancy(v), None),
                    Err(e) => (None, None, false, Some(e.to_string())),
                };
                out.push(LedgerRow {
                    name: node.name.to_string(),
                    lo,
                    hi,
                    delta,
                    citation: node.citation.to_string(),
                    reference_value_if_any: reference.clone(),
                    discrepancy_flag: flag,
                    formula: node.formula.to_string(),
                    error,
                });
            }
        }
        out
    }

    pub fn write_json<W: Write>(&self, rows: &[LedgerRow], w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, rows)?;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, rows: &[LedgerRow], w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([
            "name",
            "lo",
            "hi",
            "delta",
            "citation",
            "reference_value_if_any",
            "discrepancy_flag",
            "formula",
            "error",
        ])?;
        for r in rows {
            let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
            wr.write_record([
                r.name.clone(),
                opt(r.lo),
                opt(r.hi),
                opt(r.delta),
                r.citation.clone(),
                r.reference_value_if_any.clone(),
                r.discrepancy_flag.to_string(),
                r.formula.clone(),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn render_markdown(&self, rows: &[LedgerRow]) -> String {
        let mut s = String::new();
        s.push_str("| name | delta | lo | hi | formula | reference | flag |\n");
        s.push_str("|---|---|---|---|---|---|---|\n");
        for r in rows {
            let cell = |x: Option<f64>| x.map(|v| format!("{v:.17e}")).unwrap_or_else(|| "-".into());
            let (lo, hi) = match &r.error {
                Some(e) => (format!("error: {e}"), "-".to_string()),
                None => (cell(r.lo), cell(r.hi)),
            };
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | `{}` | {} | {} |",
                r.name,
                r.delta.map(fmt_f64).unwrap_or_else(|| "-".into()),
                lo,
                hi,
                r.formula.replace('|', "\\|"),
                if r.reference_value_if_any.is_empty() { "-" } else { &r.reference_value_if_any },
                if r.discrepancy_flag { "DISCREPANT" } else { "" },
            );
        }
        s.push_str("\nExcluded:\n\n");
        for (name, why) in EXCLUDED {
            let _ = writeln!(s, "- {name}: {why}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_cover_parametric_deltas() {
        let l = Ledger::default();
        let rows = l.rows(&[0.0]);
        let det: Vec<_> = rows.iter().filter(|r| r.name == "C_det_hi").collect();
        assert_eq!(det.len(), 1);
        assert_eq!(det[0].lo, Some(1.0));
        assert!(rows.iter().all(|r| r.error.is_none()));
    }

    #[test]
    fn csv_header_and_flags() {
        let l = Ledger::default();
        let rows = l.rows(&[0.0]);
        let mut buf = Vec::new();
        l.write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("name,lo,hi,delta,citation,reference_value_if_any,discrepancy_flag"));
        let md = l.render_markdown(&rows);
        assert!(md.contains("C_Poincare_Qtilde"));
        assert!(md.contains("C_Step3"));
    }
}
