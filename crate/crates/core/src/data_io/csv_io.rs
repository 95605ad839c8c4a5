use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::types::{Sample, SampleSet};

/// 17 significant digits, enough to round-trip any f64.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn header(n: usize, m: usize) -> Vec<String> {
    (1..=n).map(|j| format!("x_{j}")).chain((1..=m).map(|j| format!("y_{j}"))).collect()
}

/// Splits a header into (n, m), rejecting anything but `x_1..x_n,y_1..y_m`.
fn parse_header(fields: &[&str]) -> Option<(usize, usize)> {
    let n = fields.iter().take_while(|f| f.starts_with("x_")).count();
    let m = fields.len() - n;
    (m > 0 && fields.iter().map(|f| f.trim()).eq(header(n, m).iter().map(String::as_str))).then_some((n, m))
}

pub fn load_samples_csv(path: impl AsRef<Path>) -> Result<SampleSet> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_samples_csv(file, path.to_path_buf())
}

/// Reads the sample schema from any reader; `origin` labels errors.
pub fn read_samples_csv<R: Read>(reader: R, origin: PathBuf) -> Result<SampleSet> {
    let data_err = |line: usize, message: String| Error::Data {
        path: origin.clone(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut records = rdr.records();
    let head = match records.next() {
        None => return Err(data_err(1, "file is empty".into())),
        Some(r) => r?,
    };
    let fields: Vec<&str> = head.iter().collect();
    let (n, m) = parse_header(&fields)
        .ok_or_else(|| data_err(1, format!("header must be x_1..x_n,y_1..y_m with m >= 1, got {fields:?}")))?;
    let mut samples = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != n + m {
            return Err(data_err(line, format!("expected {} fields, found {}", n + m, rec.len())));
        }
        let mut vals = Vec::with_capacity(n + m);
        for (k, f) in rec.iter().enumerate() {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| data_err(line, format!("column {}: cannot parse {f:?}", k + 1)))?;
            if !v.is_finite() {
                return Err(data_err(line, format!("column {}: non-finite value {f:?}", k + 1)));
            }
            vals.push(v);
        }
        let y = vals.split_off(n);
        samples.push(Sample { x: vals, y });
    }
    if samples.is_empty() {
        return Err(data_err(2, "no data rows".into()));
    }
    SampleSet::new(samples)
}

pub fn write_samples_csv(path: impl AsRef<Path>, data: &SampleSet) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_samples_to(std::io::BufWriter::new(file), data)
}

pub fn write_samples_to<W: Write>(writer: W, data: &SampleSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header(data.n(), data.m()))?;
    for s in data.iter() {
        w.write_record(s.x.iter().chain(&s.y).map(|&v| format_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_parsing() {
        assert_eq!(parse_header(&["x_1", "y_1", "y_2"]), Some((1, 2)));
        assert_eq!(parse_header(&["y_1"]), Some((0, 1)));
        assert_eq!(parse_header(&["x_1", "x_2"]), None);
        assert_eq!(parse_header(&["x_2", "y_1"]), None);
        assert_eq!(parse_header(&["x_1", "y_1", "z"]), None);
    }

    #[test]
    fn format_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 1e300, f64::MIN_POSITIVE] {
            assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
