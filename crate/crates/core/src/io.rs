//! Labelled mean-vector and matrix CSV files.
//!
//! Matrices are written as a full square with a header row of labels and a
//! label in the first cell of every row. Numbers carry 17 significant
//! digits, enough to read back the exact `f64`.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `printf("%.17g")`.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "Inf".into() } else { "-Inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    const P: i32 = 17;
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..P).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mant), sign, exp.abs())
    } else {
        trim(&format!("{:.*}", (P - 1 - exp) as usize, x))
    }
}

fn parse_number(s: &str, line: usize, column: usize) -> Result<f64> {
    let v = match s.trim() {
        "Inf" | "inf" => f64::INFINITY,
        "-Inf" | "-inf" => f64::NEG_INFINITY,
        t => t.parse().map_err(|_| Error::Parse {
            line,
            column,
            message: format!("cannot parse {t:?} as a number"),
        })?,
    };
    Ok(v)
}

fn records<R: Read>(reader: R) -> Result<Vec<csv::StringRecord>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader)
        .records()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Parse {
                line: i + 1,
                column: 0,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_matrix<W: Write>(labels: &[String], m: &DMatrix<f64>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![String::new()];
    header.extend(labels.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..m.nrows() {
        let mut row = vec![labels[i].clone()];
        row.extend(m.row(i).iter().map(|&v| format_g17(v)));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a square labelled matrix written by [`write_matrix`].
pub fn parse_matrix<R: Read>(reader: R) -> Result<(Vec<String>, DMatrix<f64>)> {
    let recs = records(reader)?;
    let header = recs.first().ok_or(Error::Parse {
        line: 1,
        column: 0,
        message: "empty matrix file".into(),
    })?;
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let m = labels.len();
    if recs.len() != m + 1 {
        return Err(Error::DimensionMismatch(format!(
            "{m} column labels but {} data rows",
            recs.len() - 1
        )));
    }
    let mut out = DMatrix::zeros(m, m);
    for (i, rec) in recs.iter().skip(1).enumerate() {
        if rec.len() != m + 1 {
            return Err(Error::InconsistentRowWidth {
                line: i + 2,
                expected: m + 1,
                found: rec.len(),
            });
        }
        for j in 0..m {
            out[(i, j)] = parse_number(&rec[j + 1], i + 2, j + 2)?;
        }
    }
    Ok((labels, out))
}

pub fn write_vector<W: Write>(labels: &[String], name: &str, v: &DVector<f64>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["label", name]).map_err(csv_err)?;
    for (l, x) in labels.iter().zip(v.iter()) {
        w.write_record([l.as_str(), &format_g17(*x)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a `label,value` file written by [`write_vector`].
pub fn parse_vector<R: Read>(reader: R) -> Result<(Vec<String>, DVector<f64>)> {
    let recs = records(reader)?;
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in recs.iter().enumerate().skip(1) {
        if rec.len() != 2 {
            return Err(Error::InconsistentRowWidth {
                line: i + 1,
                expected: 2,
                found: rec.len(),
            });
        }
        labels.push(rec[0].to_string());
        values.push(parse_number(&rec[1], i + 1, 2)?);
    }
    Ok((labels, DVector::from_vec(values)))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<(Vec<String>, DMatrix<f64>)> {
    parse_matrix(std::fs::File::open(path)?)
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<(Vec<String>, DVector<f64>)> {
    parse_vector(std::fs::File::open(path)?)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
