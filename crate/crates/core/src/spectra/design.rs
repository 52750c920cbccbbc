//! Building valid spectra from a field of single-site quantum covariance
//! matrices plus a classical measure: `Φ(S) = ∫_S M(χ) λ(dχ) + Ψ(S)`.

use super::{validate_classical_spectrum, validate_spectrum, SpectralMeasure};
use crate::error::{Error, Result};
use crate::groups::GroupDescriptor;
use crate::linalg::{self, RMat};
use crate::symplectic::{
    check_uncertainty, ConditionCheck, Location, QuantumCovarianceMatrix, ValidationReport,
};

/// The covariance field `χ ↦ M(χ)` sampled on the dual grid.
#[derive(Debug, Clone, PartialEq)]
pub enum DesignField {
    Constant(RMat),
    Grid(Vec<RMat>),
}

impl DesignField {
    fn values(&self, grid: usize) -> Result<Vec<RMat>> {
        match self {
            DesignField::Constant(m) => Ok(vec![m.clone(); grid]),
            DesignField::Grid(v) if v.len() == grid => Ok(v.clone()),
            DesignField::Grid(v) => Err(Error::domain(format!(
                "field has {} grid values, dual grid has {grid}",
                v.len()
            ))),
        }
    }
}

/// Combines a covariance field with an optional classical measure `Ψ`.
///
/// Every `M(χ)` must pass the single-site uncertainty check; otherwise the
/// refusal carries a report listing the offending grid indices. `Ψ` must be a PSD, conjugate-symmetric measure
/// of the same shape. The result is validated before it is returned.
pub fn design_spectrum(
    group: &GroupDescriptor,
    field: &DesignField,
    psi: Option<&SpectralMeasure>,
    tol: f64,
) -> Result<SpectralMeasure> {
    let values = field.values(group.dual_grid_size())?;
    let dim = values.first().map_or(0, |m| m.nrows());
    let mut failing = Vec::new();
    let mut worst: Option<(usize, ValidationReport)> = None;
    for (j, m) in values.iter().enumerate() {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::domain(format!("field value {j} has the wrong shape")));
        }
        let q = QuantumCovarianceMatrix::single_site(m.clone())?;
        let report = check_uncertainty(&q, tol)?;
        if !report.is_valid() {
            failing.push(j);
        }
        if worst.as_ref().is_none_or(|(_, w)| report.margin < w.margin) {
            worst = Some((j, report));
        }
    }
    if !failing.is_empty() {
        let (j, mut report) = worst.expect("nonempty field");
        if let Some(cert) = report.certificate.as_mut() {
            cert.location = Some(Location::GridPoint {
                index: j,
                point: super::validate::point_label(group, j),
            });
        }
        let shown: Vec<String> = failing.iter().take(16).map(|j| j.to_string()).collect();
        report.details = vec![ConditionCheck {
            condition: "field-uncertainty".into(),
            passed: false,
            margin: report.margin,
            note: format!(
                "M(χ) + (i/2)J fails at {} grid points: {}{}",
                failing.len(),
                shown.join(", "),
                if failing.len() > 16 { ", ..." } else { "" }
            ),
            failing_points: failing,
        }];
        return Err(Error::Invalid(Box::new(report)));
    }

    let mut density: Vec<_> = values.iter().map(linalg::to_complex).collect();
    let mut atoms = Vec::new();
    if let Some(psi) = psi {
        if psi.group() != group || psi.dim() != dim {
            return Err(Error::domain("classical part differs in group or dimension"));
        }
        let report = validate_classical_spectrum(psi, tol)?;
        if !report.is_valid() {
            return Err(Error::Invalid(Box::new(report)));
        }
        for (d, p) in density.iter_mut().zip(psi.grid_values()) {
            *d += p;
        }
        atoms = psi.atoms().to_vec();
    }

    let spectrum = SpectralMeasure::from_grid(group.clone(), dim, density, atoms)?;
    let report = validate_spectrum(&spectrum, tol)?;
    if !report.is_valid() {
        return Err(Error::numeric(format!(
            "designed spectrum failed validation: {}",
            report.summary()
        )));
    }
    Ok(spectrum)
}
