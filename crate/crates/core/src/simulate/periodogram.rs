//! Bartlett-averaged matrix periodogram.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{CMat, RMat};
use crate::serde_util::ser_cmat;

/// Matrix spectral density estimate on the grid `θ_j = 2πj/s`, `s` the segment length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Periodogram {
    pub segments: usize,
    pub thetas: Vec<f64>,
    #[serde(serialize_with = "ser_cmat_vec")]
    pub values: Vec<CMat>,
}

fn ser_cmat_vec<S: serde::Serializer>(v: &[CMat], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    #[derive(Serialize)]
    struct Wrap<'a>(#[serde(serialize_with = "ser_cmat")] &'a CMat);
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for m in v {
        seq.serialize_element(&Wrap(m))?;
    }
    seq.end()
}

impl Periodogram {
    /// `Σ_j P(θ_j)·(cell width)/2π`, the estimate of the lag-zero covariance.
    pub fn integrate(&self) -> CMat {
        let k = self.values.first().map_or(0, |m| m.nrows());
        let mut sum = CMat::zeros(k, k);
        for m in &self.values {
            sum += m;
        }
        sum / Complex64::new(self.values.len() as f64, 0.0)
    }

    /// CSV with header `theta,entry_ij_re,entry_ij_im,...` (row-major, zero-based;
    /// indices are joined with `_` when `k > 10`).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let k = self.values.first().map_or(0, |m| m.nrows());
        let tag = |i: usize, j: usize| {
            if k > 10 { format!("{i}_{j}") } else { format!("{i}{j}") }
        };
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["theta".to_string()];
        for i in 0..k {
            for j in 0..k {
                header.push(format!("entry_{}_re", tag(i, j)));
                header.push(format!("entry_{}_im", tag(i, j)));
            }
        }
        w.write_record(&header)?;
        for (theta, m) in self.thetas.iter().zip(&self.values) {
            let mut row = vec![format!("{theta:e}")];
            for i in 0..k {
                for j in 0..k {
                    row.push(format!("{:e}", m[(i, j)].re));
                    row.push(format!("{:e}", m[(i, j)].im));
                }
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }
}

/// Splits each path into `segments` consecutive blocks of length `s = L/m`,
/// takes `X̂(θ_j) = Σ_t x_t e^{itθ_j}` per block and averages `X̂X̂†/s`.
///
/// With this sign convention the estimate targets the density `F` whose
/// transform gives `E[x_t x_{t+a}ᵀ]`; a flat density `c` is estimated without bias.
pub fn periodogram(paths: &RMat, segments: usize) -> Result<Periodogram> {
    let (k, len) = paths.shape();
    if segments < 4 {
        return Err(Error::domain(format!("need at least 4 segments, got {segments}")));
    }
    if k == 0 || len == 0 || len % segments != 0 {
        return Err(Error::domain(format!(
            "path length {len} is not a positive multiple of {segments} segments"
        )));
    }
    if paths.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("paths contain non-finite values"));
    }
    let s = len / segments;
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(s);
    let mut values = vec![CMat::zeros(k, k); s];
    let mut spectra = vec![vec![Complex64::new(0.0, 0.0); s]; k];
    for seg in 0..segments {
        for (r, buf) in spectra.iter_mut().enumerate() {
            for (t, b) in buf.iter_mut().enumerate() {
                *b = Complex64::new(paths[(r, seg * s + t)], 0.0);
            }
            fft.process(buf);
        }
        for (j, v) in values.iter_mut().enumerate() {
            for i in 0..k {
                for l in 0..k {
                    v[(i, l)] += spectra[i][j] * spectra[l][j].conj();
                }
            }
        }
    }
    let norm = Complex64::new(1.0 / (s * segments) as f64, 0.0);
    for v in &mut values {
        *v *= norm;
    }
    Ok(Periodogram {
        segments,
        thetas: (0..s).map(|j| TAU * j as f64 / s as f64).collect(),
        values,
    })
}
