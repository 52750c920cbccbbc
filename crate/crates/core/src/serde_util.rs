//! Serde adapters for dense matrices: real matrices as nested row arrays,
//! complex entries as `[re, im]` pairs.

use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::Serializer;

use crate::linalg::{CMat, RMat};

pub fn rmat_rows(m: &RMat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn cmat_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    m.row_iter()
        .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn rmat_from_rows(rows: &[Vec<f64>]) -> Option<RMat> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != m) {
        return None;
    }
    Some(RMat::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn cmat_from_rows(rows: &[Vec<[f64; 2]>]) -> Option<CMat> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != m) {
        return None;
    }
    Some(CMat::from_fn(n, m, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

pub fn ser_rmat<S: Serializer>(m: &RMat, s: S) -> Result<S::Ok, S::Error> {
    let rows = rmat_rows(m);
    let mut seq = s.serialize_seq(Some(rows.len()))?;
    for r in &rows {
        seq.serialize_element(r)?;
    }
    seq.end()
}

pub fn ser_cmat<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
    let rows = cmat_rows(m);
    let mut seq = s.serialize_seq(Some(rows.len()))?;
    for r in &rows {
        seq.serialize_element(r)?;
    }
    seq.end()
}
