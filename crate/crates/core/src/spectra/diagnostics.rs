//! Lebesgue split, determinant floor, log-det integral, Haar gaps, photon
//! numbers, marginal/scalar spectra and mixing indicators.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use super::{Density, SpectralMeasure};
use crate::error::{Error, Result};
use crate::groups::GroupElement;
use crate::kernels::AutocovarianceMap;
use crate::linalg::{self, CMat};
use crate::serde_util::ser_cmat;
use crate::symplectic::{check_tol, purity_determinant_check};

/// Determinants at or below this are treated as zero in the log-det integral.
pub const LOG_DET_UNDERFLOW: f64 = 1e-300;

/// Number of trailing lags inspected by [`mixing_diagnostics`].
const DECAY_WINDOW: i64 = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PurityDiagnostics {
    pub bound: f64,
    pub min_det: f64,
    pub violations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralDiagnostics {
    #[serde(serialize_with = "ser_cmat")]
    pub ac_mass: CMat,
    #[serde(serialize_with = "ser_cmat")]
    pub atomic_mass: CMat,
    #[serde(serialize_with = "ser_cmat")]
    pub total_mass: CMat,
    pub purity: PurityDiagnostics,
    /// `∫ log det Re F dλ`; `None` stands for −∞.
    pub log_det_integral: Option<f64>,
    pub log_det_finite: bool,
    /// Grid cells with `Tr F ≤ tol` and no atom within one cell.
    pub gap_cells: Vec<usize>,
    /// Fraction of grid points where `F` is positive definite.
    pub ac_positive_fraction: f64,
}

/// Splits `Φ` into absolutely continuous and atomic parts and runs the
/// grid-level diagnostics.
pub fn decompose_and_diagnose(spectrum: &SpectralMeasure, tol: f64) -> Result<SpectralDiagnostics> {
    check_tol(tol)?;
    let k = spectrum.modes()?;
    let group = spectrum.group();
    let values = spectrum.grid_values();

    let mut violations = Vec::new();
    let mut min_det = f64::INFINITY;
    let mut log_sum = 0.0;
    let mut log_finite = true;
    let mut positive = 0usize;
    let mut gap_cells = Vec::new();
    let cell = TAU / group.dual_grid_size() as f64;
    for (j, f) in values.iter().enumerate() {
        let purity = purity_determinant_check(f, k, tol)?;
        min_det = min_det.min(purity.det);
        if !purity.ok {
            violations.push(j);
        }
        if purity.det <= LOG_DET_UNDERFLOW {
            log_finite = false;
        } else {
            log_sum += purity.det.ln();
        }
        let scale = 1.0 + linalg::inf_norm(f);
        if linalg::min_eigen(f)?.value > tol * scale {
            positive += 1;
        }
        let trace: f64 = (0..f.nrows()).map(|i| f[(i, i)].re).sum();
        if trace <= tol {
            let near_atom = !group.is_finite()
                && spectrum.atoms().iter().any(|a| {
                    let d = (a.theta - group.grid_angle(j)).abs();
                    d.min(TAU - d) <= cell
                });
            if !near_atom {
                gap_cells.push(j);
            }
        }
    }
    let n = values.len() as f64;
    let log_det_integral = log_finite.then(|| log_sum / n);

    Ok(SpectralDiagnostics {
        ac_mass: spectrum.ac_mass(),
        atomic_mass: spectrum.atomic_mass(),
        total_mass: spectrum.total_mass(),
        purity: PurityDiagnostics {
            bound: 0.25_f64.powi(k as i32),
            min_det,
            violations,
        },
        log_det_integral,
        log_det_finite: log_finite,
        gap_cells,
        ac_positive_fraction: positive as f64 / n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotonNumberReport {
    pub per_mode: Vec<f64>,
    pub total: f64,
}

/// Mean photon numbers of a mean-zero Gaussian process,
/// `⟨N_j⟩ = ½(φ_{2j−1,2j−1}(D̂) + φ_{2j,2j}(D̂) − 1)`.
pub fn photon_numbers(spectrum: &SpectralMeasure) -> Result<PhotonNumberReport> {
    let k = spectrum.modes()?;
    let mass = spectrum.total_mass();
    let per_mode: Vec<f64> = (0..k)
        .map(|j| 0.5 * (mass[(2 * j, 2 * j)].re + mass[(2 * j + 1, 2 * j + 1)].re - 1.0))
        .collect();
    let total = per_mode.iter().sum();
    Ok(PhotonNumberReport { per_mode, total })
}

/// Position and momentum marginals `(Φ_q, Φ_p)`, each `k × k`.
pub fn marginal_spectra(spectrum: &SpectralMeasure) -> Result<(SpectralMeasure, SpectralMeasure)> {
    let k = spectrum.modes()?;
    let q: Vec<usize> = (0..k).map(|i| 2 * i).collect();
    let p: Vec<usize> = (0..k).map(|i| 2 * i + 1).collect();
    Ok((spectrum.restrict(&q), spectrum.restrict(&p)))
}

/// Spectrum `cᵀΦc` of the scalar process `Z_a = Σ_r c_r X_{a r}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarSpectrum {
    /// Density on the dual grid.
    pub density: Vec<f64>,
    /// `(θ, mass)` pairs.
    pub atoms: Vec<(f64, f64)>,
    pub min_value: f64,
}

pub fn scalar_spectrum(spectrum: &SpectralMeasure, c: &[f64]) -> Result<ScalarSpectrum> {
    if c.len() != spectrum.dim() {
        return Err(Error::domain(format!(
            "coefficient vector has length {}, expected {}",
            c.len(),
            spectrum.dim()
        )));
    }
    if c.iter().all(|x| *x == 0.0) || c.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("coefficient vector must be finite and nonzero"));
    }
    let v = nalgebra::DVector::from_iterator(c.len(), c.iter().map(|x| Complex64::new(*x, 0.0)));
    let form = |m: &CMat| linalg::quadratic_form(m, &v);
    let density: Vec<f64> = spectrum.grid_values().iter().map(form).collect();
    let atoms: Vec<(f64, f64)> = spectrum
        .atoms()
        .iter()
        .map(|a| (a.theta, form(&a.weight)))
        .collect();
    let min_value = density
        .iter()
        .copied()
        .chain(atoms.iter().map(|a| a.1))
        .fold(f64::INFINITY, f64::min);
    Ok(ScalarSpectrum {
        density,
        atoms,
        min_value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingReport {
    pub has_atoms: bool,
    pub atomic_by_construction: bool,
    /// Lags whose autocovariance norms were inspected.
    pub tail_lags: Vec<i64>,
    /// `max ‖K̃(a)‖_∞` over `tail_lags`.
    pub tail_norm: Option<f64>,
    /// Set when the tail norm is negligible relative to `‖K̃(0)‖`.
    pub decays: Option<bool>,
    pub note: String,
}

/// Atom and autocovariance-decay indicators.
///
/// The tail is read from `kernel` when given (its largest stored lags),
/// otherwise the spectrum is transformed at the last lags before the Nyquist
/// limit (grid form) or just past the coefficient support (Fourier form).
pub fn mixing_diagnostics(
    spectrum: &SpectralMeasure,
    kernel: Option<&AutocovarianceMap>,
    tol: f64,
) -> Result<MixingReport> {
    check_tol(tol)?;
    let group = spectrum.group();
    if group.is_finite() {
        return Ok(MixingReport {
            has_atoms: true,
            atomic_by_construction: true,
            tail_lags: Vec::new(),
            tail_norm: None,
            decays: None,
            note: "finite group: the spectrum is atomic by construction; diagnostics apply to the integers only".into(),
        });
    }
    let scale = linalg::inf_norm(&spectrum.total_mass());
    let (tail_lags, tail_norm, zero_norm) = match kernel {
        Some(kern) => {
            let max = kern.max_abs_lag().unwrap_or(0);
            let lags: Vec<i64> = ((max - DECAY_WINDOW + 1).max(1)..=max).collect();
            let mut worst = 0.0_f64;
            for &a in &lags {
                worst = worst.max(linalg::inf_norm(&kern.lag(&GroupElement::int(a))?));
            }
            (lags, worst, linalg::inf_norm(&kern.lag(&GroupElement::int(0))?))
        }
        None => {
            let last = match spectrum.density() {
                Density::Grid(_) => group.nyquist_lag().unwrap_or(1),
                Density::Fourier(_) => spectrum.fourier_support().unwrap_or(0) + DECAY_WINDOW,
            };
            let lags: Vec<i64> = ((last - DECAY_WINDOW + 1).max(1)..=last).collect();
            let mut worst = 0.0_f64;
            for &a in &lags {
                let m = spectrum.real_lag_value(&GroupElement::int(a), scale)?;
                worst = worst.max(linalg::inf_norm(&m));
            }
            let k0 = spectrum.real_lag_value(&GroupElement::int(0), scale)?;
            (lags, worst, linalg::inf_norm(&k0))
        }
    };
    let decays = tail_norm <= tol * (1.0 + zero_norm);
    Ok(MixingReport {
        has_atoms: !spectrum.atoms().is_empty(),
        atomic_by_construction: false,
        tail_lags,
        tail_norm: Some(tail_norm),
        decays: Some(decays),
        note: "autocovariance decay to zero is the strong-mixing sufficient condition for scalar directions".into(),
    })
}
