//! Suite reports and their CSV / JSON emission.
//!
//! Floats are written with 17 significant digits in scientific notation
//! with a signed two-digit exponent (`1.2500000000000000e-03`), so the same report always
//! produces the same bytes. Non-finite floats become `NaN`, `inf`, `-inf` in
//! CSV and `null` in JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Number, Value};

use crate::config::{ConfigValue, ExperimentConfig};
use crate::error::{Error, Result};

pub const TOOL_NAME: &str = "pblab";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Version of the JSON layout, see `report.schema.json`.
pub const SCHEMA_VERSION: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Less,
    LessEq,
    Greater,
    GreaterEq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Less => "<",
            Relation::LessEq => "<=",
            Relation::Greater => ">",
            Relation::GreaterEq => ">=",
        }
    }

    /// NaN never satisfies a relation.
    pub fn holds(self, measured: f64, bound: f64) -> bool {
        match self {
            Relation::Less => measured < bound,
            Relation::LessEq => measured <= bound,
            Relation::Greater => measured > bound,
            Relation::GreaterEq => measured >= bound,
        }
    }
}

/// One checked property: `measured <relation> bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct Assertion {
    pub name: String,
    /// Which mathematical property the row checks, e.g. `biorthogonality`.
    pub property: String,
    pub measured: f64,
    pub relation: Relation,
    pub bound: f64,
    pub passed: bool,
}

impl Assertion {
    pub fn new(
        name: impl Into<String>,
        property: impl Into<String>,
        measured: f64,
        relation: Relation,
        bound: f64,
    ) -> Self {
        Self {
            name: name.into(),
            property: property.into(),
            measured,
            relation,
            bound,
            passed: relation.holds(measured, bound),
        }
    }

    pub fn below(name: impl Into<String>, property: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, property, measured, Relation::Less, bound)
    }

    pub fn above(name: impl Into<String>, property: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, property, measured, Relation::Greater, bound)
    }

    /// A yes/no property as `1 >= 1` or `0 >= 1`.
    pub fn holds(name: impl Into<String>, property: impl Into<String>, ok: bool) -> Self {
        Self::new(name, property, if ok { 1.0 } else { 0.0 }, Relation::GreaterEq, 1.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&ConfigValue> for Cell {
    fn from(v: &ConfigValue) -> Self {
        match v {
            ConfigValue::Int(i) => Cell::Int(*i as i64),
            ConfigValue::Float(x) => Cell::Float(*x),
            ConfigValue::Text(s) => Cell::Text(s.clone()),
        }
    }
}

/// `x` with 17 significant digits and a signed, at least two-digit exponent,
/// like C's `%.16e`.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.16e}");
    let (mantissa, exp) = s.split_once('e').expect("scientific notation");
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mantissa}e{sign}{digits:0>2}")
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Float(x) => float_json(*x),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

fn float_json(x: f64) -> Value {
    if x.is_finite() {
        // arbitrary_precision keeps the decimal text as written
        Value::Number(format_float(x).parse::<Number>().expect("formatted float is valid JSON"))
    } else {
        Value::Null
    }
}

/// A named table; each row has one cell per column.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub suite: String,
    pub assertions: Vec<Assertion>,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
    pub provenance: Vec<(String, Cell)>,
}

impl ExperimentReport {
    pub fn new(suite: impl Into<String>, config: &ExperimentConfig) -> Self {
        let mut provenance = vec![
            ("tool".to_string(), Cell::from(TOOL_NAME)),
            ("tool_version".to_string(), Cell::from(TOOL_VERSION)),
        ];
        provenance.extend(config.echo().iter().map(|(k, v)| (k.to_string(), Cell::from(v))));
        Self {
            suite: suite.into(),
            assertions: Vec::new(),
            tables: Vec::new(),
            notes: Vec::new(),
            provenance,
        }
    }

    pub fn assert(&mut self, a: Assertion) {
        self.assertions.push(a);
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }

    pub fn to_json(&self) -> Value {
        let mut root = Map::new();
        root.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
        root.insert("suite".into(), Value::from(self.suite.clone()));
        root.insert("passed".into(), Value::from(self.passed()));
        let assertions = self
            .assertions
            .iter()
            .map(|a| {
                let mut m = Map::new();
                m.insert("name".into(), Value::from(a.name.clone()));
                m.insert("property".into(), Value::from(a.property.clone()));
                m.insert("measured".into(), float_json(a.measured));
                m.insert("relation".into(), Value::from(a.relation.symbol()));
                m.insert("bound".into(), float_json(a.bound));
                m.insert("passed".into(), Value::from(a.passed));
                Value::Object(m)
            })
            .collect();
        root.insert("assertions".into(), Value::Array(assertions));
        let tables = self
            .tables
            .iter()
            .map(|t| {
                let mut m = Map::new();
                m.insert("name".into(), Value::from(t.name.clone()));
                m.insert("columns".into(), Value::from(t.columns.clone()));
                let rows = t
                    .rows
                    .iter()
                    .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
                    .collect();
                m.insert("rows".into(), Value::Array(rows));
                Value::Object(m)
            })
            .collect();
        root.insert("tables".into(), Value::Array(tables));
        root.insert("notes".into(), Value::from(self.notes.clone()));
        let provenance = self
            .provenance
            .iter()
            .map(|(k, v)| (k.clone(), v.json()))
            .collect();
        root.insert("provenance".into(), Value::Object(provenance));
        Value::Object(root)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format `{other}`, expected csv or json"))),
        }
    }
}

pub const ASSERTION_COLUMNS: [&str; 6] = ["name", "property", "measured", "relation", "bound", "passed"];

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    // writing to a Vec cannot fail
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(&r).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

/// Writes the report into `dir` (created if missing) and returns the paths
/// written, in order.
///
/// CSV: `assertions.csv`, one `<table>.csv` per table, `notes.csv` and
/// `provenance.csv`. JSON: a single `report.json`.
pub fn emit_report(report: &ExperimentReport, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: Vec<u8>| -> Result<()> {
        let path = dir.join(name);
        write_file(&path, &bytes)?;
        written.push(path);
        Ok(())
    };
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&report.to_json()).expect("json value");
            text.push('\n');
            put("report.json", text.into_bytes())?;
        }
        Format::Csv => {
            let header: Vec<String> = ASSERTION_COLUMNS.iter().map(|s| s.to_string()).collect();
            let rows = report.assertions.iter().map(|a| {
                vec![
                    a.name.clone(),
                    a.property.clone(),
                    format_float(a.measured),
                    a.relation.symbol().to_string(),
                    format_float(a.bound),
                    a.passed.to_string(),
                ]
            });
            put("assertions.csv", csv_bytes(&header, rows))?;
            for t in &report.tables {
                let rows = t.rows.iter().map(|r| r.iter().map(Cell::csv).collect());
                put(&format!("{}.csv", t.name), csv_bytes(&t.columns, rows))?;
            }
            let rows = report.notes.iter().map(|n| vec![n.clone()]);
            put("notes.csv", csv_bytes(&["note".to_string()], rows))?;
            let rows = report.provenance.iter().map(|(k, v)| vec![k.clone(), v.csv()]);
            put("provenance.csv", csv_bytes(&["key".to_string(), "value".to_string()], rows))?;
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new("demo", &ExperimentConfig::default());
        r.assert(Assertion::below("residual", "demo property", 0.25, 1.0));
        r.assert(Assertion::above("positivity", "demo property", f64::NAN, 0.0));
        let mut t = Table::new("values", &["n", "x"]);
        t.push(vec![Cell::from(0usize), Cell::from(0.1)]);
        r.tables.push(t);
        r.notes.push("a note, with a comma".into());
        r
    }

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-01");
        assert_eq!(format_float(-2.5e10), "-2.5000000000000000e+10");
        assert_eq!(format_float(0.0), "0.0000000000000000e+00");
        assert_eq!(format_float(1e-300), "1.0000000000000000e-300");
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn nan_fails_every_relation() {
        let r = sample();
        assert!(r.assertions[0].passed);
        assert!(!r.assertions[1].passed);
        assert!(!r.passed());
    }

    #[test]
    fn csv_and_json_layout() {
        let dir = tempfile::tempdir().unwrap();
        let r = sample();
        let files = emit_report(&r, dir.path(), Format::Csv).unwrap();
        let names: Vec<_> = files.iter().map(|p| p.file_name().unwrap().to_str().unwrap().to_string()).collect();
        assert_eq!(names, ["assertions.csv", "values.csv", "notes.csv", "provenance.csv"]);
        let text = fs::read_to_string(dir.path().join("assertions.csv")).unwrap();
        assert!(text.starts_with("name,property,measured,relation,bound,passed\n"));
        assert!(!text.contains('\r'));
        let notes = fs::read_to_string(dir.path().join("notes.csv")).unwrap();
        assert_eq!(notes, "note\n\"a note, with a comma\"\n");

        emit_report(&r, dir.path(), Format::Json).unwrap();
        let text = fs::read_to_string(dir.path().join("report.json")).unwrap();
        assert!(text.contains("\"measured\": 2.5000000000000000e-01"));
        assert!(text.contains("\"measured\": null"));
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["suite"], "demo");
    }
}
