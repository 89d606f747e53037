//! Conversions between core types and plain Python values (lists of rows).

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::PyErr;
use road_core::superres::GrayImage;
use road_core::{Error, Mat};

pub fn err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        Error::SvdFailure { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

pub fn mat_from_rows(rows: Vec<Vec<f64>>) -> Result<Mat, Error> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::InvalidArgument("matrix must have at least one row and column".into()));
    }
    Mat::from_rows(&rows)
}

pub fn rows_of(m: &Mat) -> Vec<Vec<f64>> {
    m.to_rows()
}

/// Images travel as row-major lists of rows (`img[y][x]`).
pub fn image_from_rows(rows: Vec<Vec<f64>>) -> Result<GrayImage, Error> {
    let height = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(Error::InvalidArgument("image rows differ in length".into()));
    }
    GrayImage::new(width, height, rows.into_iter().flatten().collect())
}

pub fn image_rows(img: &GrayImage) -> Vec<Vec<f64>> {
    img.pixels().chunks(img.width()).map(<[f64]>::to_vec).collect()
}

pub fn triple(name: &str, v: Option<Vec<f64>>, default: [f64; 3]) -> Result<[f64; 3], Error> {
    match v {
        None => Ok(default),
        Some(v) => v
            .as_slice()
            .try_into()
            .map_err(|_| Error::InvalidArgument(format!("{name} needs three values, got {}", v.len()))),
    }
}
