//! Minimal tab-separated reading and number formatting shared by the file formats.

use std::fs::File;
use std::path::Path;

use crate::error::{from_csv, Error, Result};

/// One data row with its 1-based line number in the source file.
pub(crate) struct Row {
    pub line: usize,
    pub fields: Vec<String>,
}

/// Reads a headered TSV file. The header must start with `expected` (extra
/// optional columns are tolerated when `optional` names them). Returns the
/// data rows without any column-count checking; callers validate arity so
/// that they can report the offending line.
pub(crate) fn read_tsv(path: &Path, expected: &[&str], optional: &[&str]) -> Result<Vec<Row>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .from_reader(file);

    let mut rows = Vec::new();
    let mut header_seen = false;
    for record in reader.records() {
        let record = record.map_err(|e| from_csv(path, e))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let fields: Vec<String> = record.iter().map(|f| f.trim_end_matches('\r').to_string()).collect();
        if !header_seen {
            header_seen = true;
            check_header(path, line, &fields, expected, optional)?;
            continue;
        }
        if fields.len() == 1 && fields[0].trim().is_empty() {
            continue;
        }
        rows.push(Row { line, fields });
    }
    Ok(rows)
}

fn check_header(
    path: &Path,
    line: usize,
    fields: &[String],
    expected: &[&str],
    optional: &[&str],
) -> Result<()> {
    let max = expected.len() + optional.len();
    let ok = fields.len() >= expected.len()
        && fields.len() <= max
        && fields
            .iter()
            .zip(expected.iter().chain(optional))
            .all(|(f, e)| f.trim().eq_ignore_ascii_case(e));
    if ok {
        Ok(())
    } else {
        Err(Error::parse(
            path,
            line,
            format!("expected header {:?}, found {:?}", expected.join("\t"), fields.join("\t")),
        ))
    }
}

pub(crate) fn parse_f64(path: &Path, line: usize, field: &str, what: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("invalid {what} {field:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(path, line, format!("non-finite {what} {field:?}")));
    }
    Ok(v)
}

/// Formats `x` with at most `digits` significant digits, `%g` style.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        format!("{mantissa}e{exp}")
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Shortest decimal string that parses back to exactly `x`; integers carry no
/// decimal point.
pub fn format_exact(x: f64) -> String {
    format!("{x}")
}
