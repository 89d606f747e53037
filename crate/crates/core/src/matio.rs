//! Matrix files.
//!
//! Binary layout (`ROADMAT1`): the 8-byte ASCII magic, rows and cols as
//! little-endian `u64`, then `rows × cols` little-endian `f64` values in
//! column-major order. Files ending in `.csv` are read and written as plain
//! decimal text instead, one matrix row per line.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Mat;

pub const MAGIC: &[u8; 8] = b"ROADMAT1";

pub fn encode_roadmat(m: &Mat) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + 8 * m.as_slice().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for v in m.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_roadmat(bytes: &[u8]) -> Result<Mat> {
    if bytes.len() < 24 || &bytes[..8] != MAGIC {
        return Err(Error::format("ROADMAT1", "missing magic header"));
    }
    let word = |off: usize| u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    let (rows, cols) = (word(8) as usize, word(16) as usize);
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(24))
        .ok_or_else(|| Error::format("ROADMAT1", "dimensions overflow"))?;
    if bytes.len() != expected {
        return Err(Error::format(
            "ROADMAT1",
            format!("expected {expected} bytes for {rows}x{cols}, found {}", bytes.len()),
        ));
    }
    let data = bytes[24..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Mat::from_col_major(rows, cols, data)
}

pub fn encode_csv(m: &Mat) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format!("{:?}", m.get(i, j))).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn decode_csv(text: &str) -> Result<Mat> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, line)| {
            line.split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|e| {
                        Error::format("CSV matrix", format!("line {}: {tok:?}: {e}", i + 1))
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(Error::format("CSV matrix", "no rows"));
    }
    Mat::from_rows(&rows).map_err(|e| Error::format("CSV matrix", e.to_string()))
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Mat> {
    let path = path.as_ref();
    if is_csv(path) {
        decode_csv(&fs::read_to_string(path)?)
    } else {
        decode_roadmat(&fs::read(path)?)
    }
}

pub fn write_matrix(path: impl AsRef<Path>, m: &Mat) -> Result<()> {
    let path = path.as_ref();
    let bytes = if is_csv(path) {
        encode_csv(m).into_bytes()
    } else {
        encode_roadmat(m)
    };
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}
