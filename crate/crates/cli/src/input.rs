//! Sample CSV reading.

use std::fmt;
use std::io::Read;

use soilfuzz::hrb::SoilSample;
use thiserror::Error;

pub const REQUIRED: [&str; 6] = ["id", "p2mm", "p425", "p075", "ll", "pl"];

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// Line of the record in the input, counting the header as line 1.
    pub line: u64,
    pub id: String,
    pub sample: SoilSample,
    pub class: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub id: Option<String>,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.id {
            Some(id) => write!(f, "line {} (id {id}): {}", self.line, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Samples {
    pub rows: Vec<Row>,
    pub errors: Vec<RowError>,
    pub has_class: bool,
}

#[derive(Debug, Error)]
pub enum InputError {
    #[error("missing column `{0}` (expected id,p2mm,p425,p075,ll,pl[,pi][,class])")]
    MissingColumn(&'static str),
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("cannot read header: {0}")]
    Header(csv::Error),
}

struct Columns {
    required: [usize; 6],
    pi: Option<usize>,
    class: Option<usize>,
}

fn columns(header: &csv::StringRecord) -> Result<Columns, InputError> {
    let names: Vec<String> = header.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(InputError::DuplicateColumn(n.clone()));
        }
    }
    let find = |name: &str| names.iter().position(|n| n == name);
    let mut required = [0; 6];
    for (slot, name) in required.iter_mut().zip(REQUIRED) {
        *slot = find(name).ok_or(InputError::MissingColumn(name))?;
    }
    Ok(Columns { required, pi: find("pi"), class: find("class") })
}

/// Reads `id,p2mm,p425,p075,ll,pl[,pi][,class]` records. Column order is
/// free and extra columns are ignored. An empty `pi` cell means `ll - pl`.
/// Bad records are collected in [`Samples::errors`]; reading goes on.
pub fn read_samples<R: Read>(reader: R) -> Result<Samples, InputError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let cols = columns(rdr.headers().map_err(InputError::Header)?)?;
    let mut out = Samples { has_class: cols.class.is_some(), ..Samples::default() };

    for (i, rec) in rdr.records().enumerate() {
        let fallback_line = i as u64 + 2;
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(fallback_line, |p| p.line());
                out.errors.push(RowError { line, id: None, message: csv_message(&e) });
                continue;
            }
        };
        let line = rec.position().map_or(fallback_line, |p| p.line());
        match parse_row(&rec, &cols) {
            Ok((id, sample, class)) => out.rows.push(Row { line, id, sample, class }),
            Err((id, message)) => out.errors.push(RowError { line, id, message }),
        }
    }
    Ok(out)
}

fn csv_message(e: &csv::Error) -> String {
    match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("expected {expected_len} fields, found {len}")
        }
        csv::ErrorKind::Utf8 { .. } => "invalid UTF-8".to_string(),
        _ => e.to_string(),
    }
}

type Parsed = (String, SoilSample, Option<String>);

fn parse_row(rec: &csv::StringRecord, cols: &Columns) -> Result<Parsed, (Option<String>, String)> {
    let cell = |i: usize| rec.get(i).unwrap_or("");
    let id = cell(cols.required[0]).to_string();
    let fail = |message: String| (Some(id.clone()), message);
    if id.is_empty() {
        return Err((None, "empty id".to_string()));
    }
    let number = |name: &str, text: &str| -> Result<f64, (Option<String>, String)> {
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| fail(format!("{name}: `{text}` is not a number")))
    };
    let mut v = [0.0; 5];
    for (k, name) in REQUIRED[1..].iter().enumerate() {
        v[k] = number(name, cell(cols.required[k + 1]))?;
    }
    let pi = match cols.pi.map(cell) {
        None | Some("") => None,
        Some(text) => Some(number("pi", text)?),
    };
    let class = cols.class.map(cell).filter(|c| !c.is_empty()).map(str::to_string);
    let sample = SoilSample::with_pi(v[0], v[1], v[2], v[3], v[4], pi).map_err(|e| fail(e.to_string()))?;
    Ok((id, sample, class))
}
