//! Reading tensors and priors from JSON or long-format CSV, and writing CSV reports.
//!
//! JSON tensors look like `{"models": [...], "num_categories": 2, "data": [[[0, 1], ...], ...]}`
//! with `data` nested as models x questions x trials; `models` and `num_categories` are
//! optional (defaults: no names, binary). Long CSV has the header `model,question,trial,outcome`
//! with 0-based indices and exactly one row per cell. Priors are `{"data": [[...], ...]}`
//! nested as questions x draws.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{RankError, Result};
use crate::tensor::{PriorOutcomes, ResponseTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TensorFormat {
    Json,
    CsvLong,
}

impl FromStr for TensorFormat {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" | "csv-long" => Ok(Self::CsvLong),
            other => Err(RankError::config(format!(
                "unknown tensor format `{other}` (json|csv-long)"
            ))),
        }
    }
}

impl TensorFormat {
    /// Guesses the format from a file extension, defaulting to JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Self::CsvLong,
            _ => Self::Json,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    models: Option<Vec<String>>,
    #[serde(default = "binary")]
    num_categories: usize,
    data: Vec<Vec<Vec<i64>>>,
}

fn binary() -> usize {
    2
}

#[derive(Deserialize)]
struct MatrixJson {
    #[serde(default)]
    num_categories: Option<usize>,
    data: Vec<Vec<i64>>,
}

fn json_error(e: serde_json::Error) -> RankError {
    if e.is_data() {
        RankError::Schema(format!("{e}"))
    } else {
        RankError::Parse {
            line: e.line(),
            message: e.to_string(),
        }
    }
}

fn to_u8(v: i64, at: impl FnOnce() -> String) -> Result<u8> {
    u8::try_from(v).map_err(|_| RankError::Schema(format!("outcome {v} at {} is not a category index", at())))
}

pub fn parse_tensor_json(text: &str) -> Result<ResponseTensor> {
    let raw: TensorJson = serde_json::from_str(text).map_err(json_error)?;
    let mut nested = Vec::with_capacity(raw.data.len());
    for (l, row) in raw.data.iter().enumerate() {
        let mut qs = Vec::with_capacity(row.len());
        for (m, cell) in row.iter().enumerate() {
            let trials = cell
                .iter()
                .enumerate()
                .map(|(n, &v)| to_u8(v, || format!("({l},{m},{n})")))
                .collect::<Result<Vec<u8>>>()?;
            qs.push(trials);
        }
        nested.push(qs);
    }
    let r = ResponseTensor::from_nested(&nested, raw.num_categories)?;
    match raw.models {
        Some(names) => r.with_model_names(names),
        None => Ok(r),
    }
}

/// Parses long-format CSV. The category count is `num_categories` when given, otherwise
/// `max(2, largest outcome + 1)`.
pub fn parse_tensor_csv(text: &str, num_categories: Option<usize>) -> Result<ResponseTensor> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| RankError::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let cols: Vec<&str> = header.iter().collect();
    if cols != ["model", "question", "trial", "outcome"] {
        return Err(RankError::Schema(format!(
            "expected header model,question,trial,outcome, got {}",
            cols.join(",")
        )));
    }
    let mut rows: Vec<([usize; 3], u8, usize)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| RankError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 4 {
            return Err(RankError::Parse {
                line,
                message: format!("expected 4 fields, found {}", rec.len()),
            });
        }
        let field = |i: usize, name: &str| -> Result<usize> {
            rec[i].parse::<usize>().map_err(|_| RankError::Parse {
                line,
                message: format!("{name} `{}` is not a non-negative integer", &rec[i]),
            })
        };
        let idx = [field(0, "model")?, field(1, "question")?, field(2, "trial")?];
        let outcome = field(3, "outcome")?;
        let outcome = u8::try_from(outcome).map_err(|_| RankError::Parse {
            line,
            message: format!("outcome {outcome} exceeds 255"),
        })?;
        rows.push((idx, outcome, line));
    }
    if rows.is_empty() {
        return Err(RankError::Schema("CSV contains no outcome rows".into()));
    }
    let dims: Vec<usize> = (0..3)
        .map(|k| rows.iter().map(|(i, _, _)| i[k]).max().unwrap_or(0) + 1)
        .collect();
    let (l, m, n) = (dims[0], dims[1], dims[2]);
    let mut cells: Vec<Option<u8>> = vec![None; l * m * n];
    for (idx, v, line) in &rows {
        let flat = (idx[0] * m + idx[1]) * n + idx[2];
        if cells[flat].replace(*v).is_some() {
            return Err(RankError::Schema(format!(
                "duplicate cell ({},{},{}) at line {line}",
                idx[0], idx[1], idx[2]
            )));
        }
    }
    if let Some(pos) = cells.iter().position(Option::is_none) {
        return Err(RankError::Schema(format!(
            "missing cell ({},{},{}) in a {l}x{m}x{n} tensor",
            pos / (m * n),
            (pos / n) % m,
            pos % n
        )));
    }
    let flat: Vec<u8> = cells.into_iter().flatten().collect();
    let cats = num_categories.unwrap_or_else(|| (*flat.iter().max().unwrap_or(&0) as usize + 1).max(2));
    ResponseTensor::new(l, m, n, cats, flat)
}

pub fn parse_tensor(text: &str, format: TensorFormat) -> Result<ResponseTensor> {
    match format {
        TensorFormat::Json => parse_tensor_json(text),
        TensorFormat::CsvLong => parse_tensor_csv(text, None),
    }
}

pub fn read_tensor(path: &Path, format: TensorFormat) -> Result<ResponseTensor> {
    parse_tensor(&fs::read_to_string(path)?, format)
}

pub fn tensor_to_json(r: &ResponseTensor) -> String {
    let raw = TensorJson {
        models: r.model_names().map(<[String]>::to_vec),
        num_categories: r.num_categories(),
        data: r
            .to_nested()
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|cell| cell.into_iter().map(i64::from).collect())
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string(&raw).expect("tensor serializes")
}

pub fn tensor_to_csv(r: &ResponseTensor) -> String {
    let mut out = String::from("model,question,trial,outcome\n");
    for l in 0..r.models() {
        for m in 0..r.questions() {
            for (n, v) in r.cell(l, m).iter().enumerate() {
                let _ = writeln!(out, "{l},{m},{n},{v}");
            }
        }
    }
    out
}

pub fn write_tensor(r: &ResponseTensor, path: &Path, format: TensorFormat) -> Result<()> {
    let text = match format {
        TensorFormat::Json => tensor_to_json(r),
        TensorFormat::CsvLong => tensor_to_csv(r),
    };
    fs::write(path, text)?;
    Ok(())
}

fn parse_matrix(text: &str) -> Result<(Vec<Vec<u8>>, Option<usize>)> {
    let raw: MatrixJson = serde_json::from_str(text).map_err(json_error)?;
    let rows = raw
        .data
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &v)| to_u8(v, || format!("({i},{j})")))
                .collect()
        })
        .collect::<Result<Vec<Vec<u8>>>>()?;
    Ok((rows, raw.num_categories))
}

/// Prior outcomes (`questions x draws`). The file's `num_categories`, when present, must match.
pub fn parse_prior_json(text: &str, num_categories: usize) -> Result<PriorOutcomes> {
    let (rows, cats) = parse_matrix(text)?;
    if let Some(c) = cats.filter(|&c| c != num_categories) {
        return Err(RankError::Schema(format!(
            "prior declares {c} categories but the tensor has {num_categories}"
        )));
    }
    PriorOutcomes::from_rows(&rows, num_categories)
}

pub fn read_prior(path: &Path, num_categories: usize) -> Result<PriorOutcomes> {
    parse_prior_json(&fs::read_to_string(path)?, num_categories)
}

/// A plain integer matrix in the prior layout, e.g. per-model greedy outcomes (`models x questions`).
pub fn read_matrix(path: &Path) -> Result<Vec<Vec<u8>>> {
    let (rows, _) = parse_matrix(&fs::read_to_string(path)?)?;
    if let Some(w) = rows.first().map(Vec::len) {
        if rows.iter().any(|r| r.len() != w) {
            return Err(RankError::Schema("matrix rows must have equal length".into()));
        }
    }
    Ok(rows)
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros removed, exponent form for
/// very large or small magnitudes.
pub fn format_g(v: f64) -> String {
    const P: i32 = 12;
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (P - 1 - exp) as usize, v)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A CSV report with a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| RankError::Io(std::io::Error::other(e));
        wtr.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            wtr.write_record(row).map_err(csv_err)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

pub fn write_report(report: &Report, path: &Path) -> Result<()> {
    let f = fs::File::create(path)?;
    report.write_to(std::io::BufWriter::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fix_a;

    #[test]
    fn json_round_trip() {
        let r = fix_a()
            .with_model_names(vec!["a".into(), "b".into(), "c".into()])
            .unwrap();
        assert_eq!(parse_tensor_json(&tensor_to_json(&r)).unwrap(), r);
    }

    #[test]
    fn csv_round_trip() {
        let r = fix_a();
        assert_eq!(parse_tensor_csv(&tensor_to_csv(&r), None).unwrap(), r);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let r = fix_a();
        for (name, fmt) in [("t.json", TensorFormat::Json), ("t.csv", TensorFormat::CsvLong)] {
            let p = dir.path().join(name);
            write_tensor(&r, &p, fmt).unwrap();
            assert_eq!(TensorFormat::from_path(&p), fmt);
            assert_eq!(read_tensor(&p, fmt).unwrap(), r);
        }
    }

    #[test]
    fn categorical_json_accepted() {
        let r = parse_tensor_json(r#"{"num_categories": 4, "data": [[[0, 3]], [[2, 1]]]}"#).unwrap();
        assert!(r.is_categorical());
        assert_eq!(r.num_categories(), 4);
    }

    #[test]
    fn json_errors() {
        assert!(matches!(
            parse_tensor_json("{\n\"data\": [[[0, 1]], [[1]]]}"),
            Err(RankError::Schema(_))
        ));
        assert!(matches!(
            parse_tensor_json("{\n\"data\": [[[0, 1]],\n oops"),
            Err(RankError::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_tensor_json(r#"{"data": [[[0, 2]]]}"#),
            Err(RankError::Schema(_))
        ));
        assert!(matches!(
            parse_tensor_json(r#"{"data": [[[-1]]]}"#),
            Err(RankError::Schema(_))
        ));
    }

    #[test]
    fn csv_missing_cell() {
        let text = "model,question,trial,outcome\n0,0,0,1\n0,1,0,1\n1,0,0,0\n";
        let err = parse_tensor_csv(text, None).unwrap_err();
        assert!(matches!(err, RankError::Schema(ref m) if m.contains("missing cell (1,1,0)")));
    }

    #[test]
    fn csv_errors_carry_lines() {
        let text = "model,question,trial,outcome\n0,0,0,1\n0,x,0,1\n";
        assert!(matches!(
            parse_tensor_csv(text, None),
            Err(RankError::Parse { line: 3, .. })
        ));
        let text = "model,question,trial,outcome\n0,0,0,1\n0,0,0,0\n";
        assert!(
            matches!(parse_tensor_csv(text, None), Err(RankError::Schema(ref m)) if m.contains("line 3"))
        );
        assert!(matches!(
            parse_tensor_csv("a,b\n1,2\n", None),
            Err(RankError::Schema(_))
        ));
    }

    #[test]
    fn prior_json() {
        let p = parse_prior_json(r#"{"data": [[1, 0], [0, 0], [1, 1]]}"#, 2).unwrap();
        assert_eq!((p.questions(), p.draws()), (3, 2));
        assert!(parse_prior_json(r#"{"num_categories": 3, "data": [[1]]}"#, 2).is_err());
        assert!(parse_prior_json(r#"{"data": [[1, 0], [0]]}"#, 2).is_err());
    }

    #[test]
    fn g_format() {
        assert_eq!(format_g(0.75), "0.75");
        assert_eq!(format_g(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_g(1500.0), "1500");
        assert_eq!(format_g(-2.5e-7), "-2.5e-07");
        assert_eq!(format_g(1.23456789e15), "1.23456789e+15");
        assert_eq!(format_g(123456789012.0), "123456789012");
        assert_eq!(format_g(0.0001), "0.0001");
        assert_eq!(format_g(0.0), "0");
    }

    #[test]
    fn report_csv() {
        let mut rep = Report::new(["model", "score"]);
        rep.push(vec!["a,b".into(), format_g(0.5)]);
        assert_eq!(rep.to_csv_string(), "model,score\n\"a,b\",0.5\n");
    }
}
