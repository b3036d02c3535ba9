//! CSV tables, run manifests and the rational matrix text format.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use jetflow_core::hankel::RationalMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

/// Seventeen significant digits; non-finite values as `NaN`, `inf`, `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file_name: &str, header: &[&str]) -> Self {
        Table { file_name: file_name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn write_to(&self, dir: &Path) -> io::Result<PathBuf> {
        let path = dir.join(&self.file_name);
        fs::write(&path, self.to_csv())?;
        Ok(path)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub kind: String,
    pub seed: Option<u64>,
    pub config_path: Option<String>,
    pub config: serde_json::Value,
    pub created: String,
    pub files: Vec<String>,
    pub status: String,
    pub failed_rows: usize,
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> io::Result<PathBuf> {
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(manifest).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

/// Writes `m` as
///
/// ```text
/// # rational matrix
/// size 2
/// 1/1 0/1
/// 0/1 1/3
/// ```
pub fn write_rational_matrix(mut out: impl Write, m: &RationalMatrix) -> io::Result<()> {
    writeln!(out, "# rational matrix")?;
    writeln!(out, "size {}", m.size())?;
    for i in 0..m.size() {
        let row: Vec<String> =
            (0..m.size()).map(|j| format!("{}/{}", m.get(i, j).numer(), m.get(i, j).denom())).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn read_rational_matrix(text: &str) -> Result<RationalMatrix, String> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let size: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("size "))
        .and_then(|s| s.trim().parse().ok())
        .ok_or("missing `size` line")?;
    let mut entries = Vec::with_capacity(size * size);
    for i in 0..size {
        let line = lines.next().ok_or_else(|| format!("missing row {i}"))?;
        let row: Vec<&str> = line.split_whitespace().collect();
        if row.len() != size {
            return Err(format!("row {i} has {} entries, expected {size}", row.len()));
        }
        for token in row {
            let (n, d) = token.split_once('/').ok_or_else(|| format!("`{token}` is not num/den"))?;
            let n: BigInt = n.parse().map_err(|_| format!("bad numerator in `{token}`"))?;
            let d: BigInt = d.parse().map_err(|_| format!("bad denominator in `{token}`"))?;
            if d == BigInt::from(0) {
                return Err(format!("zero denominator in `{token}`"));
            }
            entries.push(BigRational::new(n, d));
        }
    }
    let mut it = entries.into_iter();
    Ok(RationalMatrix::from_fn(size, |_, _| it.next().expect("counted")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use jetflow_core::hankel::{moment_matrix_exact, MeasureSpec};

    #[test]
    fn float_format() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        let x = 0.123_456_789_012_345_68_f64;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_quoting() {
        let mut t = Table::new("t.csv", &["n", "status"]);
        t.push(vec!["1".into(), "error: a, b".into()]);
        assert_eq!(t.to_csv(), "n,status\n1,\"error: a, b\"\n");
    }

    #[test]
    fn rational_round_trip() {
        let m = moment_matrix_exact(&MeasureSpec::uniform_box(vec![0.25], vec![0.5]), 3).unwrap();
        let mut buf = Vec::new();
        write_rational_matrix(&mut buf, &m).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# rational matrix\nsize 4\n1/1 1/4 "));
        assert_eq!(read_rational_matrix(&text).unwrap(), m);
        assert!(read_rational_matrix("size 1\n1/0\n").is_err());
    }
}
