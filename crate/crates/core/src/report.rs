//! Report rows and their JSON-lines, CSV and markdown renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::costmodel::{Predicted, Verdict};
use crate::emulator::CostLedger;
use crate::error::{Error, Result};

/// One scenario. Field order is the column order of every format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    /// `workload` or `app`.
    pub kind: String,
    pub name: String,
    pub method: String,
    pub bits: u32,
    pub slot_count: usize,
    /// Lanes for workloads; n, d, m or rows for applications.
    pub size: usize,
    pub seed: u64,
    pub oracle_pass: bool,
    pub verdict: Verdict,
    pub nonscalar_mults: u64,
    pub scalar_mults: u64,
    pub additions: u64,
    pub rotations: u64,
    pub comparisons: u64,
    pub equalities: u64,
    pub masked_mults: u64,
    pub gate_bootstraps: u64,
    pub switches: u64,
    pub switch_cost_units: u64,
    pub refreshes: u64,
    pub max_depth: u32,
    pub pred_nonscalar_mults: u64,
    pub pred_gate_bootstraps: u64,
    pub pred_comparisons: u64,
    pub pred_equalities: u64,
    pub pred_masked_mults: u64,
    pub pred_switches: u64,
    pub pred_switch_cost_units: u64,
    pub pred_max_depth: u32,
    /// Model-estimated time from the calibration constants, not a measurement.
    pub model_estimated_ms: f64,
}

pub const FIELDS: [&str; 31] = [
    "scenario",
    "kind",
    "name",
    "method",
    "bits",
    "slot_count",
    "size",
    "seed",
    "oracle_pass",
    "verdict",
    "nonscalar_mults",
    "scalar_mults",
    "additions",
    "rotations",
    "comparisons",
    "equalities",
    "masked_mults",
    "gate_bootstraps",
    "switches",
    "switch_cost_units",
    "refreshes",
    "max_depth",
    "pred_nonscalar_mults",
    "pred_gate_bootstraps",
    "pred_comparisons",
    "pred_equalities",
    "pred_masked_mults",
    "pred_switches",
    "pred_switch_cost_units",
    "pred_max_depth",
    "model_estimated_ms",
];

/// Identity and outcome of a scenario, without its counters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowHead {
    pub scenario: String,
    pub kind: &'static str,
    pub name: String,
    pub method: String,
    pub bits: u32,
    pub slot_count: usize,
    pub size: usize,
    pub seed: u64,
    pub oracle_pass: bool,
}

impl ReportRow {
    pub fn new(head: RowHead, verdict: Verdict, ledger: &CostLedger, predicted: &Predicted, model_estimated_ms: f64) -> Self {
        Self {
            scenario: head.scenario,
            kind: head.kind.to_string(),
            name: head.name,
            method: head.method,
            bits: head.bits,
            slot_count: head.slot_count,
            size: head.size,
            seed: head.seed,
            oracle_pass: head.oracle_pass,
            verdict,
            nonscalar_mults: ledger.nonscalar_mults,
            scalar_mults: ledger.scalar_mults,
            additions: ledger.additions,
            rotations: ledger.rotations,
            comparisons: ledger.comparisons,
            equalities: ledger.equalities,
            masked_mults: ledger.masked_mults,
            gate_bootstraps: ledger.gate_bootstraps,
            switches: ledger.switches,
            switch_cost_units: ledger.switch_cost_units,
            refreshes: ledger.refreshes,
            max_depth: ledger.max_depth,
            pred_nonscalar_mults: predicted.nonscalar_mults,
            pred_gate_bootstraps: predicted.gate_bootstraps,
            pred_comparisons: predicted.comparisons,
            pred_equalities: predicted.equalities,
            pred_masked_mults: predicted.masked_mults,
            pred_switches: predicted.switches,
            pred_switch_cost_units: predicted.switch_cost_units,
            pred_max_depth: predicted.max_depth,
            model_estimated_ms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    JsonLines,
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json-lines" | "jsonl" => Ok(Format::JsonLines),
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

/// Renders rows in the named format.
pub fn emit_report(rows: &[ReportRow], format: &str) -> Result<Vec<u8>> {
    render(rows, format.parse()?)
}

pub fn render(rows: &[ReportRow], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::JsonLines => {
            let mut out = Vec::new();
            for r in rows {
                serde_json::to_writer(&mut out, r).map_err(|e| Error::Parse(e.to_string()))?;
                out.push(b'\n');
            }
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            let csv_err = |e: csv::Error| Error::Parse(e.to_string());
            w.write_record(FIELDS).map_err(csv_err)?;
            for r in rows {
                w.serialize(r).map_err(csv_err)?;
            }
            w.into_inner().map_err(|e| Error::Parse(e.to_string()))
        }
        Format::Markdown => Ok(markdown(rows).into_bytes()),
    }
}

/// Parses a JSON-lines report.
pub fn parse_json_lines(text: &str) -> Result<Vec<ReportRow>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1))))
        .collect()
}

/// Parses a CSV report with the standard header.
pub fn parse_csv(text: &str) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(|e| Error::Parse(e.to_string()))).collect()
}

/// One table per workload (cost against bit width) or application (cost
/// against instance size).
fn markdown(rows: &[ReportRow]) -> String {
    let mut groups: BTreeMap<(&str, &str), Vec<&ReportRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((&r.kind, &r.name)).or_default().push(r);
    }
    let mut s = String::new();
    for ((kind, name), mut rs) in groups {
        let axis = if kind == "workload" { "bit width" } else { "size" };
        rs.sort_by(|a, b| {
            (&a.method, a.bits, a.size, &a.scenario).cmp(&(&b.method, b.bits, b.size, &b.scenario))
        });
        let _ = writeln!(s, "### {name}: cost vs {axis}\n");
        s.push_str(
            "| method | b | size | comparisons | equalities | nonscalar mults | gate bootstraps \
             | switch units | depth | model-estimated ms | oracle |\n",
        );
        s.push_str("|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---|\n");
        for r in rs {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {:.3} | {} |",
                r.method,
                r.bits,
                r.size,
                r.comparisons,
                r.equalities,
                r.nonscalar_mults,
                r.gate_bootstraps,
                r.switch_cost_units,
                r.max_depth,
                r.model_estimated_ms,
                if r.oracle_pass { "pass" } else { "FAIL" }
            );
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ReportRow {
        let ledger = CostLedger { comparisons: 16, masked_mults: 32, max_depth: 7, ..Default::default() };
        let predicted = Predicted { scenario: "x".into(), comparisons: 16, max_depth: 9, ..Default::default() };
        let head = RowHead {
            scenario: "floyd-encoding-b8-n4-seed1".into(),
            kind: "app",
            name: "floyd".into(),
            method: "encoding".into(),
            bits: 8,
            slot_count: 4,
            size: 4,
            seed: 1,
            oracle_pass: true,
        };
        ReportRow::new(head, Verdict::Pass, &ledger, &predicted, 0.5)
    }

    #[test]
    fn empty_csv_is_header_only() {
        let out = String::from_utf8(emit_report(&[], "csv").unwrap()).unwrap();
        assert_eq!(out, format!("{}\n", FIELDS.join(",")));
        assert!(emit_report(&[], "json-lines").unwrap().is_empty());
    }

    #[test]
    fn csv_row_snapshot() {
        let out = String::from_utf8(emit_report(&[sample()], "csv").unwrap()).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[1],
            "floyd-encoding-b8-n4-seed1,app,floyd,encoding,8,4,4,1,true,pass,0,0,0,0,16,0,32,0,0,0,0,7,0,0,16,0,0,0,0,9,0.5"
        );
        assert_eq!(parse_csv(&out).unwrap(), vec![sample()]);
    }

    #[test]
    fn json_lines_round_trip_and_field_order() {
        let rows = vec![sample(), ReportRow { seed: 2, oracle_pass: false, ..sample() }];
        let out = String::from_utf8(emit_report(&rows, "json-lines").unwrap()).unwrap();
        assert_eq!(parse_json_lines(&out).unwrap(), rows);
        let first: serde_json::Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
        let keys: Vec<&str> = first.as_object().unwrap().keys().map(String::as_str).collect();
        let mut sorted = FIELDS.to_vec();
        sorted.sort();
        let mut k = keys.clone();
        k.sort();
        assert_eq!(k, sorted);
        assert!(out.starts_with("{\"scenario\":"));
    }

    #[test]
    fn markdown_groups_by_name() {
        let rows = vec![sample(), ReportRow { name: "sort".into(), ..sample() }];
        let md = String::from_utf8(emit_report(&rows, "markdown").unwrap()).unwrap();
        assert!(md.contains("### floyd: cost vs size"));
        assert!(md.contains("### sort: cost vs size"));
        assert!(md.contains("| encoding | 8 | 4 | 16 |"));
    }

    #[test]
    fn unknown_format() {
        assert!(matches!(emit_report(&[], "xml"), Err(Error::UnknownFormat(f)) if f == "xml"));
    }
}
