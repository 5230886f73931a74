//! Reports and run manifests.
//!
//! A report holds only what the computation determines, so two runs with
//! the same configuration write identical bytes. Wall times and the full
//! configuration go into the manifest.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use growthlab::{CheckRecord, Outcome as Verdict, RNG_ALGORITHM};

use crate::commands::{Command, Outcome, Phase};
use crate::config::{Format, Options};

#[derive(Debug, Serialize)]
pub struct ExperimentConfig<'a> {
    pub subcommand: &'a Command,
    pub options: &'a Options,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub not_applicable: usize,
    pub row_errors: usize,
    pub cap_hit: bool,
    pub status: &'static str,
}

impl Summary {
    pub fn of(out: &Outcome) -> Self {
        let count = |v: Verdict| out.records.iter().filter(|r| r.outcome == v).count();
        let failed = count(Verdict::Fail);
        let status = if failed > 0 {
            "fail"
        } else if out.row_errors > 0 {
            "error"
        } else if out.cap_hit {
            "cap_hit"
        } else {
            "pass"
        };
        Summary {
            checks: out.records.len(),
            passed: count(Verdict::Pass),
            failed,
            not_applicable: count(Verdict::NotApplicable),
            row_errors: out.row_errors,
            cap_hit: out.cap_hit,
            status,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub toolkit: &'static str,
    pub version: &'static str,
    pub rng_algorithm: &'static str,
    pub config: ExperimentConfig<'a>,
    pub phases: &'a [Phase],
    pub summary: Summary,
    /// Every asserted inequality by name, anchor and outcome.
    pub anchors: Vec<Value>,
}

impl<'a> RunManifest<'a> {
    pub fn new(config: ExperimentConfig<'a>, phases: &'a [Phase], out: &Outcome) -> Self {
        RunManifest {
            toolkit: "growthlab",
            version: env!("CARGO_PKG_VERSION"),
            rng_algorithm: RNG_ALGORITHM,
            config,
            phases,
            summary: Summary::of(out),
            anchors: out
                .records
                .iter()
                .map(|r| json!({ "name": r.name, "anchor": r.anchor, "outcome": r.outcome }))
                .collect(),
        }
    }
}

pub fn report_json(command: &str, out: &Outcome) -> Result<String> {
    let value = json!({ "command": command, "result": out.result, "checks": out.records });
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&key(k), x, rows)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(&key(&i.to_string()), x, rows)),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn check_lines(records: &[CheckRecord]) -> Vec<String> {
    records
        .iter()
        .map(|r| {
            let outcome = serde_json::to_value(r.outcome).ok().and_then(|v| v.as_str().map(String::from));
            format!(
                "{},{},{},{},{}",
                csv_field(&r.name),
                csv_field(&r.anchor),
                r.lhs,
                r.rhs,
                outcome.unwrap_or_default()
            )
        })
        .collect()
}

/// Tabular commands write their table; the rest write `field,value` rows
/// followed by the check table.
pub fn report_csv(out: &Outcome) -> String {
    let mut s = String::new();
    if let Some(t) = &out.table {
        s.push_str(&t.header);
        s.push('\n');
        for line in &t.lines {
            s.push_str(line);
            s.push('\n');
        }
        return s;
    }
    let mut rows = Vec::new();
    flatten("", &out.result, &mut rows);
    s.push_str("field,value\n");
    for (k, v) in rows {
        s.push_str(&format!("{},{}\n", csv_field(&k), csv_field(&v)));
    }
    if !out.records.is_empty() {
        s.push_str("\nname,anchor,lhs,rhs,outcome\n");
        for line in check_lines(&out.records) {
            s.push_str(&line);
            s.push('\n');
        }
    }
    s
}

pub fn render(command: &str, format: Format, out: &Outcome) -> Result<String> {
    match format {
        Format::Json => report_json(command, out),
        Format::Csv => Ok(report_csv(out)),
    }
}

/// Writes `report.{json,csv}` and `manifest.json` into `dir`.
pub fn write_dir(dir: &Path, format: Format, report: &str, manifest: &RunManifest) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = match format {
        Format::Json => "report.json",
        Format::Csv => "report.csv",
    };
    let path = dir.join(name);
    fs::write(&path, report).with_context(|| format!("writing {}", path.display()))?;
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(records: Vec<CheckRecord>) -> Outcome {
        Outcome {
            result: json!({ "size": 3, "nested": { "list": [1, 2] }, "note": "a,b" }),
            records,
            table: None,
            row_errors: 0,
            cap_hit: false,
        }
    }

    #[test]
    fn status_prefers_failures() {
        let pass = CheckRecord::new("x", "x > 0", 1.0, 0.0, true);
        let fail = CheckRecord::new("y", "y > 0", 0.0, 0.0, false);
        assert_eq!(Summary::of(&outcome(vec![pass.clone()])).status, "pass");
        let mut out = outcome(vec![pass, fail]);
        out.cap_hit = true;
        out.row_errors = 1;
        let s = Summary::of(&out);
        assert_eq!((s.status, s.passed, s.failed), ("fail", 1, 1));
        out.records.pop();
        assert_eq!(Summary::of(&out).status, "error");
        out.row_errors = 0;
        assert_eq!(Summary::of(&out).status, "cap_hit");
    }

    #[test]
    fn csv_flattens_and_quotes() {
        let csv = report_csv(&outcome(vec![CheckRecord::new("x", "a, b", 1.0, 0.0, true)]));
        assert!(csv.starts_with("field,value\n"));
        assert!(csv.contains("nested.list.1,2\n"));
        assert!(csv.contains("note,\"a,b\"\n"));
        assert!(csv.contains("x,\"a, b\",1,0,pass\n"));
    }
}
