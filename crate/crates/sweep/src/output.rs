//! CSV serialization of an [`ErrorCurve`].

use std::io::{Read, Write};
use std::path::Path;

use crate::config::Method;
use crate::error::SweepError;
use crate::run::{ErrorCurve, Row, Status};

pub const HEADER: [&str; 9] = [
    "method", "sf", "k_factor", "ebn0_db", "ser", "ber", "stderr", "trials", "status",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn write_csv_to<W: Write>(curve: &ErrorCurve, out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER)?;
    for r in &curve.rows {
        w.write_record([
            r.method.name().to_string(),
            r.sf.to_string(),
            format_float(r.k_factor),
            format_float(r.ebn0_db),
            opt_float(r.ser),
            opt_float(r.ber),
            opt_float(r.stderr),
            r.trials.map(|t| t.to_string()).unwrap_or_default(),
            r.status.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(curve: &ErrorCurve) -> String {
    let mut buf = Vec::new();
    write_csv_to(curve, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ASCII output")
}

pub fn write_csv(curve: &ErrorCurve, path: &Path) -> Result<(), SweepError> {
    let file = std::fs::File::create(path).map_err(|e| SweepError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    write_csv_to(curve, file).map_err(|e| SweepError::Csv {
        path: path.to_path_buf(),
        source: e,
    })
}

fn field<T, F>(rec: &csv::StringRecord, i: usize, line: u64, parse: F) -> Result<T, SweepError>
where
    F: FnOnce(&str) -> Result<T, String>,
{
    let raw = rec.get(i).ok_or_else(|| SweepError::Parse {
        line,
        reason: format!("missing column `{}`", HEADER[i]),
    })?;
    parse(raw).map_err(|reason| SweepError::Parse {
        line,
        reason: format!("column `{}`: {reason}", HEADER[i]),
    })
}

fn float(s: &str) -> Result<f64, String> {
    s.parse().map_err(|_| format!("`{s}` is not a number"))
}

fn opt<T>(s: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Result<Option<T>, String> {
    if s.is_empty() {
        Ok(None)
    } else {
        f(s).map(Some)
    }
}

pub fn read_csv_from<R: Read>(input: R) -> Result<ErrorCurve, SweepError> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(input);
    let header = rdr.headers().map_err(|e| SweepError::Parse {
        line: 1,
        reason: e.to_string(),
    })?;
    if header.iter().ne(HEADER) {
        return Err(SweepError::Parse {
            line: 1,
            reason: format!(
                "unexpected header `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| SweepError::Parse {
            line,
            reason: e.to_string(),
        })?;
        rows.push(Row {
            method: field(&rec, 0, line, |s| s.parse::<Method>())?,
            sf: field(&rec, 1, line, |s| s.parse().map_err(|_| format!("`{s}`")))?,
            k_factor: field(&rec, 2, line, float)?,
            ebn0_db: field(&rec, 3, line, float)?,
            ser: field(&rec, 4, line, |s| opt(s, float))?,
            ber: field(&rec, 5, line, |s| opt(s, float))?,
            stderr: field(&rec, 6, line, |s| opt(s, float))?,
            trials: field(&rec, 7, line, |s| {
                opt(s, |t| t.parse().map_err(|_| format!("`{t}`")))
            })?,
            status: field(&rec, 8, line, |s| s.parse::<Status>())?,
        });
    }
    Ok(ErrorCurve { rows })
}

pub fn read_csv(path: &Path) -> Result<ErrorCurve, SweepError> {
    let file = std::fs::File::open(path).map_err(|e| SweepError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    read_csv_from(file)
}
