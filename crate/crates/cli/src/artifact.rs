//! Output files: a versioned header with the run configuration, a summary,
//! and a table of rows, written as CSV or JSON.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::ValueEnum;
use hsplab::{Label, OutcomeDistribution};
use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Everything that determines the output of a run. `--threads` is absent
/// on purpose since results do not depend on it.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn new(subcommand: &str, out: Option<PathBuf>, format: Format) -> Self {
        RunConfig {
            subcommand: subcommand.to_string(),
            p: None,
            q: None,
            a: None,
            b: None,
            r: None,
            s: None,
            seed: None,
            trials: None,
            out,
            format,
            extra: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.extra
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
    }
}

/// A run's result. `ok = false` makes the process exit with status 1 after
/// the artifact is written.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub summary: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub ok: bool,
}

impl Artifact {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Artifact {
            summary: Map::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            ok: true,
        }
    }

    pub fn from_distribution(d: &OutcomeDistribution) -> Self {
        let mut cols: Vec<String> = d.fields().to_vec();
        cols.push("probability".into());
        let mut out = Artifact::new(cols);
        for (o, p) in d.iter() {
            let mut row: Vec<Value> = o
                .iter()
                .map(|l| match l {
                    Label::Int(x) => Value::from(*x),
                    Label::Text(s) => Value::from(s.clone()),
                })
                .collect();
            row.push(Value::from(p));
            out.rows.push(row);
        }
        out.put("total", d.total());
        out.put("outcomes", d.len());
        out.put("metadata", d.metadata());
        out
    }

    pub fn put(&mut self, key: &str, value: impl Serialize) {
        self.summary
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn header(&self, cfg: &RunConfig) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("schema".into(), Value::from(SCHEMA));
        m.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
        m.insert("config".into(), serde_json::to_value(cfg).expect("serializable"));
        for (k, v) in &self.summary {
            m.insert(k.clone(), v.clone());
        }
        m
    }

    pub fn write<W: Write>(&self, cfg: &RunConfig, mut w: W) -> std::io::Result<()> {
        let mut head = self.header(cfg);
        match cfg.format {
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        Value::Object(self.columns.iter().cloned().zip(r.iter().cloned()).collect())
                    })
                    .collect();
                head.insert("rows".into(), Value::Array(rows));
                serde_json::to_writer_pretty(&mut w, &Value::Object(head))?;
                writeln!(w)?;
            }
            Format::Csv => {
                writeln!(w, "# {}", Value::Object(head))?;
                if self.columns.is_empty() {
                    return Ok(());
                }
                let mut out = csv::Writer::from_writer(&mut w);
                out.write_record(&self.columns)?;
                for r in &self.rows {
                    out.write_record(r.iter().map(cell))?;
                }
                out.flush()?;
            }
        }
        Ok(())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (RunConfig, Artifact) {
        let mut cfg = RunConfig::new("demo", None, Format::Csv);
        cfg.p = Some(7);
        let mut a = Artifact::new(["x", "label"]);
        a.put("note", "a, \"quoted\" value");
        a.push(vec![Value::from(1), Value::from("one, two")]);
        a.push(vec![Value::from(0.5), Value::Null]);
        (cfg, a)
    }

    #[test]
    fn csv_has_header_and_quotes() {
        let (cfg, a) = sample();
        let mut buf = Vec::new();
        a.write(&cfg, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let head: Value = serde_json::from_str(lines.next().unwrap().trim_start_matches("# ")).unwrap();
        assert_eq!(head["schema"], 1);
        assert_eq!(head["config"]["p"], 7);
        assert_eq!(lines.next(), Some("x,label"));
        assert_eq!(lines.next(), Some("1,\"one, two\""));
        assert_eq!(lines.next(), Some("0.5,"));
    }

    #[test]
    fn json_rows_are_objects() {
        let (mut cfg, a) = sample();
        cfg.format = Format::Json;
        let mut buf = Vec::new();
        a.write(&cfg, &mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["rows"][0]["label"], "one, two");
        assert_eq!(v["note"], "a, \"quoted\" value");
        assert_eq!(v["config"]["format"], "json");
    }
}
