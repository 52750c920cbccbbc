//! Pointwise validation of spectral measures.
//!
//! For a quantum spectrum the density must satisfy `F(χ) + (i/2)J ⪰ 0` at every
//! dual grid point. Summing PSD matrices over cells shows this is equivalent to
//! `Φ(S) + (i/2)λ(S)J ⪰ 0` for every union of cells. On ℤ atoms have zero Haar
//! mass, so an atom weight only needs to be PSD.

use num_complex::Complex64;
use rayon::prelude::*;

use super::SpectralMeasure;
use crate::error::Result;
use crate::groups::{DualPoint, GroupDescriptor};
use crate::linalg::{self, CMat};
use crate::symplectic::{
    check_tol, psd_check, symplectic_form, Certificate, ConditionCheck, Location, PsdCheck,
    ValidationReport, Verdict,
};

/// Relative tolerance for matching an atom weight against its partner's conjugate.
const ATOM_SYMMETRY_TOL: f64 = 1e-9;

pub(super) fn point_label(group: &GroupDescriptor, j: usize) -> String {
    match group.dual_point(j) {
        DualPoint::Angle(theta) => format!("theta={theta}"),
        DualPoint::Residues(r) => format!("m={r:?}"),
    }
}

struct Accumulator {
    min_eigenvalue: f64,
    margin: f64,
    certificate: Option<Certificate>,
    details: Vec<ConditionCheck>,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator {
            min_eigenvalue: f64::INFINITY,
            margin: f64::INFINITY,
            certificate: None,
            details: Vec::new(),
        }
    }

    /// Folds a family of PSD checks into one condition; checks are visited in
    /// index order so the worst point (first on ties) is deterministic.
    fn psd_condition(
        &mut self,
        name: &str,
        checks: &[PsdCheck],
        locate: impl Fn(usize) -> Location,
        track_extremes: bool,
    ) {
        let mut worst: Option<usize> = None;
        let mut failing = Vec::new();
        for (i, c) in checks.iter().enumerate() {
            if !c.passed {
                failing.push(i);
            }
            if worst.is_none_or(|w| c.margin < checks[w].margin) {
                worst = Some(i);
            }
        }
        let margin = worst.map_or(0.0, |w| checks[w].margin);
        if track_extremes {
            if let Some(w) = worst {
                self.min_eigenvalue = self.min_eigenvalue.min(checks[w].min_eigenvalue);
                self.margin = self.margin.min(checks[w].margin);
            }
        }
        if self.certificate.is_none() && !failing.is_empty() {
            let w = worst.expect("failing implies nonempty");
            self.certificate = checks[w].certificate(Some(locate(w)));
        }
        self.details.push(ConditionCheck {
            condition: name.into(),
            passed: failing.is_empty(),
            margin,
            failing_points: failing,
            note: String::new(),
        });
    }

    fn finish(mut self, tol: f64) -> ValidationReport {
        if !self.min_eigenvalue.is_finite() {
            self.min_eigenvalue = 0.0;
            self.margin = 0.0;
        }
        let valid = self.details.iter().all(|c| c.passed);
        ValidationReport {
            verdict: if valid { Verdict::Valid } else { Verdict::Invalid },
            min_eigenvalue: self.min_eigenvalue,
            margin: self.margin,
            tol,
            certificate: self.certificate,
            details: self.details,
        }
    }
}

fn pointwise(values: &[CMat], shift: Option<&CMat>, tol: f64) -> Result<Vec<PsdCheck>> {
    values
        .par_iter()
        .map(|f| {
            let norm = linalg::inf_norm(f);
            match shift {
                Some(s) => psd_check(&(f + s), norm, tol),
                None => psd_check(f, norm, tol),
            }
        })
        .collect()
}

fn atom_checks(spectrum: &SpectralMeasure, tol: f64) -> Result<Vec<PsdCheck>> {
    spectrum
        .atoms()
        .iter()
        .map(|a| psd_check(&a.weight, linalg::inf_norm(&a.weight), tol))
        .collect()
}

/// Conjugate-symmetry condition: atoms must pair as `(θ, 2π − θ)` with
/// conjugate weights (real weights at θ ∈ {0, π}); the grid density is
/// symmetric by construction and the note records the constructor's correction.
fn symmetry_condition(spectrum: &SpectralMeasure) -> ConditionCheck {
    let mut failing = Vec::new();
    let mut worst = 0.0_f64;
    for (i, atom) in spectrum.atoms().iter().enumerate() {
        let scale = 1.0 + linalg::inf_norm(&atom.weight);
        match spectrum.atom_partner(i) {
            Some(p) => {
                let conj = spectrum.atoms()[p].weight.map(|z: Complex64| z.conj());
                let dev = linalg::max_abs_diff(&atom.weight, &conj) / scale;
                worst = worst.max(dev);
                if dev > ATOM_SYMMETRY_TOL {
                    failing.push(i);
                }
            }
            None => {
                // no partner at all counts as a full mismatch
                worst = worst.max(1.0);
                failing.push(i);
            }
        }
    }
    ConditionCheck {
        condition: "conjugate-symmetry".into(),
        passed: failing.is_empty(),
        margin: -worst,
        failing_points: failing,
        note: format!(
            "density symmetrised on input (largest correction {:.3e})",
            spectrum.symmetry_correction()
        ),
    }
}

/// Validates a `2k × 2k` quantum spectral measure.
///
/// Conditions, reported separately: `spectral-uncertainty` (`F + (i/2)J ⪰ 0`
/// at each grid point), `atom-positivity`, `conjugate-symmetry` and
/// `hermitian-positivity` (`F ⪰ 0` at each grid point).
pub fn validate_spectrum(spectrum: &SpectralMeasure, tol: f64) -> Result<ValidationReport> {
    check_tol(tol)?;
    let k = spectrum.modes()?;
    let group = spectrum.group();
    let half_j = symplectic_form(k)?.half_imaginary();
    let values = spectrum.grid_values();
    let mut acc = Accumulator::new();

    let uncertainty = pointwise(&values, Some(&half_j), tol)?;
    let locate_grid = |j: usize| Location::GridPoint {
        index: j,
        point: point_label(group, j),
    };
    acc.psd_condition("spectral-uncertainty", &uncertainty, locate_grid, true);

    let atoms = atom_checks(spectrum, tol)?;
    let locate_atom = |i: usize| Location::Atom {
        index: i,
        theta: spectrum.atoms()[i].theta,
    };
    acc.psd_condition("atom-positivity", &atoms, locate_atom, true);

    acc.details.push(symmetry_condition(spectrum));

    let positivity = pointwise(&values, None, tol)?;
    acc.psd_condition("hermitian-positivity", &positivity, locate_grid, false);

    Ok(acc.finish(tol))
}

/// Validates a classical Hermitian matrix measure: PSD density, PSD atoms and
/// conjugate symmetry (no symplectic term).
pub fn validate_classical_spectrum(
    spectrum: &SpectralMeasure,
    tol: f64,
) -> Result<ValidationReport> {
    check_tol(tol)?;
    let group = spectrum.group();
    let values = spectrum.grid_values();
    let mut acc = Accumulator::new();
    let positivity = pointwise(&values, None, tol)?;
    acc.psd_condition(
        "hermitian-positivity",
        &positivity,
        |j| Location::GridPoint {
            index: j,
            point: point_label(group, j),
        },
        true,
    );
    let atoms = atom_checks(spectrum, tol)?;
    acc.psd_condition(
        "atom-positivity",
        &atoms,
        |i| Location::Atom {
            index: i,
            theta: spectrum.atoms()[i].theta,
        },
        true,
    );
    acc.details.push(symmetry_condition(spectrum));
    Ok(acc.finish(tol))
}
