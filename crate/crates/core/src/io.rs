//! CSV ingestion of paired observations and JSON run reports.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::inference::ObservationSet;

/// Column layout of an input CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub delimiter: u8,
    /// `None` auto-detects: the first row is a header if either selected
    /// field fails to parse as a number.
    pub has_header: Option<bool>,
    pub x_column: usize,
    pub y_column: usize,
    /// Skip bad rows instead of aborting.
    pub lenient: bool,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: None,
            x_column: 0,
            y_column: 1,
            lenient: false,
        }
    }
}

/// A row rejected during lenient ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRow {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ingested {
    pub data: ObservationSet,
    pub rejected: Vec<RejectedRow>,
    pub header_skipped: bool,
}

fn parse_field(record: &csv::StringRecord, col: usize) -> std::result::Result<f64, String> {
    let raw = record
        .get(col)
        .ok_or_else(|| format!("row has {} field(s), column {col} missing", record.len()))?;
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| format!("column {col} value {raw:?} is not a number"))?;
    if !v.is_finite() {
        return Err(format!("column {col} value {raw:?} is not finite"));
    }
    if v <= 0.0 {
        return Err(format!("column {col} value {v} is not positive"));
    }
    Ok(v)
}

fn looks_numeric(record: &csv::StringRecord, col: usize) -> bool {
    record
        .get(col)
        .map(|s| s.trim().parse::<f64>().is_ok())
        .unwrap_or(false)
}

/// Reads `(x, y)` pairs from CSV text.
pub fn ingest_reader(reader: impl io::Read, schema: &CsvSchema) -> Result<Ingested> {
    if schema.x_column == schema.y_column {
        return Err(Error::Csv("x and y columns must differ".into()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);

    let mut pairs = Vec::new();
    let mut rejected = Vec::new();
    let mut header_skipped = false;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| {
            if e.is_io_error() {
                match e.into_kind() {
                    csv::ErrorKind::Io(io) => Error::Io(io),
                    _ => unreachable!(),
                }
            } else {
                Error::Csv(e.to_string())
            }
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(i as u64 + 1);
        if i == 0 {
            let header = schema.has_header.unwrap_or_else(|| {
                !(looks_numeric(&rec, schema.x_column) && looks_numeric(&rec, schema.y_column))
            });
            if header {
                header_skipped = true;
                continue;
            }
        }
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        match parse_field(&rec, schema.x_column)
            .and_then(|x| parse_field(&rec, schema.y_column).map(|y| (x, y)))
        {
            Ok(pair) => pairs.push(pair),
            Err(reason) if schema.lenient => rejected.push(RejectedRow { line, reason }),
            Err(reason) => return Err(Error::Csv(format!("line {line}: {reason}"))),
        }
    }
    if pairs.is_empty() {
        return Err(Error::InvalidData("no usable rows after filtering".into()));
    }
    Ok(Ingested {
        data: ObservationSet::new(pairs)?,
        rejected,
        header_skipped,
    })
}

/// Reads `(x, y)` pairs from a CSV file.
pub fn ingest_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Ingested> {
    let file = std::fs::File::open(path.as_ref())?;
    ingest_reader(io::BufReader::new(file), schema)
}

/// Writes pairs as two-column CSV with a header row. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_pairs_csv<W: Write>(
    mut out: W,
    header: (&str, &str),
    pairs: &[(f64, f64)],
) -> io::Result<()> {
    writeln!(out, "{},{}", header.0, header.1)?;
    for (a, b) in pairs {
        writeln!(out, "{a:?},{b:?}")?;
    }
    out.flush()
}

/// One CLI invocation: what was asked, what came back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub parameters: Value,
    pub results: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
    /// Only filled when timing is requested; omitted otherwise so that
    /// repeated runs stay byte-identical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl RunReport {
    pub fn new(command: impl Into<String>, parameters: Value, results: Value) -> Self {
        Self {
            command: command.into(),
            parameters,
            results,
            seed: None,
            version: crate::VERSION.to_string(),
            wall_time_s: None,
        }
    }
}

/// Number formatting applied on top of a structural formatter.
struct Numbers<F> {
    inner: F,
    pretty: bool,
}

fn format_pretty(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

macro_rules! forward {
    ($($name:ident),*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.inner.$name(w)
            }
        )*
    };
}

impl<F: Formatter> Formatter for Numbers<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        if !v.is_finite() {
            return w.write_all(b"null");
        }
        let s = if self.pretty {
            format_pretty(v)
        } else {
            format!("{v:.16e}")
        };
        w.write_all(s.as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }

    forward!(
        begin_array,
        end_array,
        begin_object,
        end_object,
        end_array_value,
        end_object_value
    );

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
}

fn to_text<F: Formatter>(value: &impl Serialize, fmt: F, pretty: bool) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Numbers { inner: fmt, pretty });
    value
        .serialize(&mut ser)
        .expect("reports contain only JSON-representable values");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// Renders a report as JSON. Machine mode writes one line with every float
/// at 17 significant digits (lossless); pretty mode indents and rounds
/// floats to 4 decimals. Object keys inside `parameters` and `results`
/// are sorted, so output is a pure function of the report.
pub fn emit_report(report: &RunReport, pretty: bool) -> String {
    if pretty {
        to_text(report, PrettyFormatter::new(), true)
    } else {
        to_text(report, CompactFormatter, false)
    }
}
