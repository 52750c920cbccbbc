//! CSV encoding of quadrature sample paths.
//!
//! Long layout: header `site,mode,component,value`, one row per `(t, r)` with
//! `component` `q` or `p`. Wide layout: one headerless row per mode with `L`
//! values. Sites and modes are zero-based.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::linalg::RMat;

/// Bound on the number of values accepted by the reader.
const MAX_CELLS: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    Q,
    P,
}

impl Quadrature {
    pub fn label(self) -> &'static str {
        match self {
            Quadrature::Q => "q",
            Quadrature::P => "p",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "q" => Ok(Quadrature::Q),
            "p" => Ok(Quadrature::P),
            other => Err(Error::Parse(format!("unknown quadrature component {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathLayout {
    #[default]
    Long,
    Wide,
}

pub fn write_paths_csv<W: Write>(
    out: W,
    paths: &RMat,
    component: Quadrature,
    layout: PathLayout,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    match layout {
        PathLayout::Long => {
            w.write_record(["site", "mode", "component", "value"])?;
            for t in 0..paths.ncols() {
                for r in 0..paths.nrows() {
                    w.write_record([
                        t.to_string(),
                        r.to_string(),
                        component.label().to_string(),
                        format!("{:e}", paths[(r, t)]),
                    ])?;
                }
            }
        }
        PathLayout::Wide => {
            for r in 0..paths.nrows() {
                w.write_record(paths.row(r).iter().map(|x| format!("{x:e}")))?;
            }
        }
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

fn parse_value(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("invalid number {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("non-finite value {s:?}")));
    }
    Ok(v)
}

fn parse_index(s: &str, what: &str) -> Result<usize> {
    let v: usize = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("invalid {what} index {s:?}")))?;
    if v >= MAX_CELLS {
        return Err(Error::Parse(format!("{what} index {v} too large")));
    }
    Ok(v)
}

/// Reads either layout; the long layout is recognised by its header. Returns the
/// `k × L` path matrix and, for the long layout, the quadrature component.
pub fn read_paths_csv<R: Read>(input: R) -> Result<(RMat, Option<Quadrature>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut records = rdr.records();
    let first = match records.next() {
        Some(r) => r?,
        None => return Err(Error::Parse("empty path file".into())),
    };
    if first.get(0).map(str::trim) == Some("site") {
        let header: Vec<&str> = first.iter().map(str::trim).collect();
        if header != ["site", "mode", "component", "value"] {
            return Err(Error::Parse(format!("unexpected header {header:?}")));
        }
        let mut cells = Vec::new();
        let mut component = None;
        for rec in records {
            let rec = rec?;
            if rec.len() != 4 {
                return Err(Error::Parse(format!("expected 4 fields, got {}", rec.len())));
            }
            let t = parse_index(&rec[0], "site")?;
            let r = parse_index(&rec[1], "mode")?;
            let c = Quadrature::parse(rec[2].trim())?;
            if *component.get_or_insert(c) != c {
                return Err(Error::Parse("mixed q and p components in one file".into()));
            }
            cells.push((t, r, parse_value(&rec[3])?));
            if cells.len() > MAX_CELLS {
                return Err(Error::Parse("path file too large".into()));
            }
        }
        let len = cells.iter().map(|c| c.0 + 1).max().unwrap_or(0);
        let k = cells.iter().map(|c| c.1 + 1).max().unwrap_or(0);
        if len == 0 || k * len != cells.len() || k.saturating_mul(len) > MAX_CELLS {
            return Err(Error::Parse("path table is empty or incomplete".into()));
        }
        let mut m = RMat::zeros(k, len);
        let mut seen = vec![false; k * len];
        for (t, r, v) in cells {
            if std::mem::replace(&mut seen[r * len + t], true) {
                return Err(Error::Parse(format!("duplicate entry for site {t}, mode {r}")));
            }
            m[(r, t)] = v;
        }
        Ok((m, component))
    } else {
        let mut rows = vec![first.iter().map(parse_value).collect::<Result<Vec<_>>>()?];
        let mut total = rows[0].len();
        for rec in records {
            let row = rec?.iter().map(parse_value).collect::<Result<Vec<_>>>()?;
            total += row.len();
            if total > MAX_CELLS {
                return Err(Error::Parse("path file too large".into()));
            }
            rows.push(row);
        }
        let len = rows[0].len();
        if len == 0 || rows.iter().any(|r| r.len() != len) {
            return Err(Error::Parse("wide path rows must have equal, nonzero length".into()));
        }
        Ok((RMat::from_fn(rows.len(), len, |r, t| rows[r][t]), None))
    }
}
