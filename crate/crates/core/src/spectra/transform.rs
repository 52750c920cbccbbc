//! Fourier duality between autocovariance maps and spectral measures:
//! `K̃(a) = ∫ χ(a) Φ(dχ)`.

use num_complex::Complex64;

use super::{Density, SpectralMeasure};
use crate::error::{Error, Result};
use crate::groups::GroupElement;
use crate::kernels::AutocovarianceMap;
use crate::linalg::{self, CMat, RMat};

/// Imaginary parts above `IMAG_TOL·(1 + ‖Φ(D̂)‖)` signal a measure that is not
/// conjugate symmetric.
const IMAG_TOL: f64 = 1e-10;

impl SpectralMeasure {
    /// `∫ χ(a) Φ(dχ)` as a complex matrix; `a` is reduced to canonical form.
    pub(crate) fn lag_value(&self, a: &GroupElement) -> Result<CMat> {
        let group = self.group();
        let a = group.canonical(a)?;
        let mut out = match self.density() {
            Density::Grid(values) => {
                if let Some(nyq) = group.nyquist_lag() {
                    if a.0[0].abs() > nyq {
                        return Err(Error::domain(format!(
                            "lag {a} beyond the Nyquist range ±{nyq} of a {}-point grid",
                            group.dual_grid_size()
                        )));
                    }
                }
                let mut sum = CMat::zeros(self.dim(), self.dim());
                for (j, f) in values.iter().enumerate() {
                    sum += f * group.grid_character(j, &a);
                }
                sum * Complex64::new(group.cell_weight(), 0.0)
            }
            Density::Fourier(table) => table
                .get(&a.0[0])
                .cloned()
                .unwrap_or_else(|| CMat::zeros(self.dim(), self.dim())),
        };
        for atom in self.atoms() {
            out += &atom.weight * Complex64::cis(a.0[0] as f64 * atom.theta);
        }
        Ok(out)
    }

    /// Real autocovariance matrix at lag `a`, after checking the imaginary part vanishes.
    pub(crate) fn real_lag_value(&self, a: &GroupElement, scale: f64) -> Result<RMat> {
        let v = self.lag_value(a)?;
        let imag = linalg::imag_part(&v).abs().max();
        if imag > IMAG_TOL * (1.0 + scale) {
            return Err(Error::domain(format!(
                "autocovariance at lag {a} has imaginary part {imag:.3e}; the measure is not conjugate symmetric"
            )));
        }
        Ok(linalg::real_part(&v))
    }
}

/// Autocovariance map of a `2k × 2k` spectral measure at the requested lags.
///
/// On a finite group the full lag table is always returned (every lag is
/// resolvable); the requested lags are only range-checked.
pub fn spectrum_to_autocov(
    spectrum: &SpectralMeasure,
    lags: &[GroupElement],
) -> Result<AutocovarianceMap> {
    let k = spectrum.modes()?;
    let group = spectrum.group().clone();
    let scale = linalg::inf_norm(&spectrum.total_mass());
    let wanted: Vec<GroupElement> = if group.is_finite() {
        for a in lags {
            group.canonical(a)?;
        }
        group.elements()?
    } else {
        lags.to_vec()
    };
    let mut entries = Vec::with_capacity(wanted.len());
    for a in wanted {
        let m = spectrum.real_lag_value(&a, scale)?;
        entries.push((a, m));
    }
    AutocovarianceMap::new(group, k, entries)
}

/// Inverse transform.
///
/// Finite groups: the exact inverse DFT, `Φ_m = (1/N) Σ_a χ_m(−a) K̃(a)`,
/// returned as a grid density `F_m = N·Φ_m`. Integers: the purely absolutely
/// continuous Fourier-form density `F(θ) = Σ_a K̃(a) e^{−iaθ}` over the stored
/// lags. Atoms cannot be recovered from finitely many lags and never appear in
/// the output.
pub fn autocov_to_spectrum(kernel: &AutocovarianceMap) -> Result<SpectralMeasure> {
    let group = kernel.group().clone();
    let dim = kernel.dim();
    if group.is_finite() {
        let elements = group.elements()?;
        let lags: Vec<CMat> = elements
            .iter()
            .map(|a| kernel.lag(a).map(|m| linalg::to_complex(&m)))
            .collect::<Result<_>>()?;
        let values = (0..group.dual_grid_size())
            .map(|j| {
                let mut f = CMat::zeros(dim, dim);
                for (a, m) in elements.iter().zip(&lags) {
                    f += m * group.grid_character(j, a).conj();
                }
                f
            })
            .collect();
        SpectralMeasure::from_grid(group, dim, values, Vec::new())
    } else {
        let coeffs: Vec<(i64, CMat)> = kernel
            .entries()
            .map(|(a, m)| (a.0[0], linalg::to_complex(m)))
            .collect();
        SpectralMeasure::from_fourier(group, dim, coeffs, Vec::new())
    }
}
