//! Header-less numeric CSV.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use slope_core::DesignMatrix;

use crate::error::{Error, Result};

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// outside `1e-4 <= |x| < 1e12`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file))
}

fn parse_err(path: &Path, message: String) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message,
    }
}

/// Rows of numbers; blank lines are skipped and every row must have the
/// same length.
pub fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (line, record) in open(path)?.records().enumerate() {
        let record = record.map_err(|e| parse_err(path, e.to_string()))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| parse_err(path, format!("line {}: not a number: {f:?}", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(parse_err(
                    path,
                    format!("line {}: {} fields, expected {first}", line + 1, row.len()),
                ));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_matrix(path: &Path) -> Result<DesignMatrix> {
    let rows = read_rows(path)?;
    if rows.is_empty() {
        return Err(parse_err(path, "empty matrix".to_string()));
    }
    let (n, p) = (rows.len(), rows[0].len());
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(DesignMatrix::from_row_major(n, p, &flat)?)
}

/// One value per line. A single row of comma-separated values is accepted
/// too.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let rows = read_rows(path)?;
    match rows.as_slice() {
        [] => Err(parse_err(path, "empty vector".to_string())),
        [row] => Ok(row.clone()),
        _ if rows[0].len() == 1 => Ok(rows.into_iter().flatten().collect()),
        _ => Err(parse_err(
            path,
            format!(
                "expected one value per line, found {} columns",
                rows[0].len()
            ),
        )),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn finish(path: &Path, mut out: BufWriter<File>) -> Result<()> {
    out.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_csv(path: &Path, rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(create(path)?);
    for row in rows {
        w.write_record(&row)
            .map_err(|e| parse_err(path, e.to_string()))?;
    }
    let inner = w.into_inner().map_err(|e| parse_err(path, e.to_string()))?;
    finish(path, inner)
}

pub fn write_matrix(path: &Path, x: &DesignMatrix) -> Result<()> {
    write_csv(
        path,
        (0..x.rows()).map(|i| (0..x.cols()).map(|j| fmt_num(x.get(i, j))).collect()),
    )
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    write_csv(path, v.iter().map(|x| vec![fmt_num(*x)]))
}
