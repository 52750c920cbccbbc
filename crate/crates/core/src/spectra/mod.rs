//! Matrix-valued spectral measures on the dual group.
//!
//! A measure is an absolutely continuous part, given as a density `F` against
//! normalised Haar measure, plus a finite list of atoms. The density is held
//! either as values on the dual grid (piecewise constant per cell; for a finite
//! group the grid is the whole dual) or, on ℤ, as a finite table of matrix
//! Fourier coefficients with `F(θ) = Σ_a C_a e^{−iaθ}`.
//!
//! Constructors enforce Hermitian pieces and symmetrise the density under
//! `F(χ̄) = conj F(χ)`, recording how much they had to change it.

mod design;
mod diagnostics;
mod transform;
mod validate;

pub use design::{design_spectrum, DesignField};
pub use diagnostics::{
    decompose_and_diagnose, marginal_spectra, mixing_diagnostics, photon_numbers,
    scalar_spectrum, MixingReport, PhotonNumberReport, PurityDiagnostics, ScalarSpectrum,
    SpectralDiagnostics,
};
pub use transform::{autocov_to_spectrum, spectrum_to_autocov};
pub use validate::{validate_classical_spectrum, validate_spectrum};

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::groups::GroupDescriptor;
use crate::linalg::{self, CMat};

const HERMITIAN_TOL: f64 = 1e-12;
/// Two atoms closer than this (in radians) are merged.
pub(crate) const ATOM_MERGE_TOL: f64 = 1e-12;
/// Angular tolerance for pairing an atom at θ with one at 2π − θ.
pub(crate) const ATOM_PAIR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Grid(Vec<CMat>),
    Fourier(BTreeMap<i64, CMat>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub theta: f64,
    pub weight: CMat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    group: GroupDescriptor,
    dim: usize,
    density: Density,
    atoms: Vec<Atom>,
    symmetry_correction: f64,
}

fn check_piece(m: &CMat, dim: usize, what: &str) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::domain(format!(
            "{what}: matrix is {}x{}, expected {dim}x{dim}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::domain(format!("{what}: non-finite entry")));
    }
    Ok(())
}

fn check_hermitian(m: &CMat, what: &str) -> Result<()> {
    let dev = linalg::anti_hermiticity(m);
    if dev > HERMITIAN_TOL * (1.0 + linalg::inf_norm(m)) {
        return Err(Error::domain(format!(
            "{what} is not Hermitian (deviation {dev:.3e})"
        )));
    }
    Ok(())
}

fn hermitize(m: &CMat) -> CMat {
    let half = Complex64::new(0.5, 0.0);
    m * half + m.adjoint() * half
}

fn prepare_atoms(group: &GroupDescriptor, dim: usize, atoms: Vec<Atom>) -> Result<Vec<Atom>> {
    if group.is_finite() && !atoms.is_empty() {
        return Err(Error::domain(
            "finite groups carry their spectrum in the grid table; atoms are not allowed",
        ));
    }
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for (idx, atom) in atoms.into_iter().enumerate() {
        if !(atom.theta.is_finite() && (0.0..TAU).contains(&atom.theta)) {
            return Err(Error::domain(format!(
                "atom {idx}: angle {} outside [0, 2π)",
                atom.theta
            )));
        }
        check_piece(&atom.weight, dim, &format!("atom {idx}"))?;
        check_hermitian(&atom.weight, &format!("atom {idx} weight"))?;
        out.push(Atom {
            theta: atom.theta,
            weight: hermitize(&atom.weight),
        });
    }
    out.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    let mut merged: Vec<Atom> = Vec::with_capacity(out.len());
    for atom in out {
        match merged.last_mut() {
            Some(last) if (atom.theta - last.theta).abs() <= ATOM_MERGE_TOL => {
                last.weight += atom.weight;
            }
            _ => merged.push(atom),
        }
    }
    Ok(merged)
}

impl SpectralMeasure {
    /// Density given by its values on the group's dual grid.
    pub fn from_grid(
        group: GroupDescriptor,
        dim: usize,
        values: Vec<CMat>,
        atoms: Vec<Atom>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("spectral measure needs positive dimension"));
        }
        let g = group.dual_grid_size();
        if values.len() != g {
            return Err(Error::domain(format!(
                "density has {} grid values, dual grid has {g}",
                values.len()
            )));
        }
        for (j, v) in values.iter().enumerate() {
            check_piece(v, dim, &format!("grid point {j}"))?;
            check_hermitian(v, &format!("density at grid point {j}"))?;
        }
        let mut symmetric = Vec::with_capacity(g);
        let mut correction = 0.0_f64;
        for (j, v) in values.iter().enumerate() {
            let partner = values[group.conjugate_index(j)].map(|z| z.conj());
            let half = Complex64::new(0.5, 0.0);
            let avg = hermitize(&(v * half + partner * half));
            correction = correction.max(linalg::max_abs_diff(&avg, v));
            symmetric.push(avg);
        }
        let atoms = prepare_atoms(&group, dim, atoms)?;
        Ok(SpectralMeasure {
            group,
            dim,
            density: Density::Grid(symmetric),
            atoms,
            symmetry_correction: correction,
        })
    }

    /// Density on ℤ given by Fourier coefficients, `F(θ) = Σ_a C_a e^{−iaθ}`.
    ///
    /// Missing `C_{−a}` are filled with `C_a†`; imaginary parts of the
    /// coefficients are removed to enforce conjugate symmetry.
    pub fn from_fourier(
        group: GroupDescriptor,
        dim: usize,
        coeffs: impl IntoIterator<Item = (i64, CMat)>,
        atoms: Vec<Atom>,
    ) -> Result<Self> {
        if group.is_finite() {
            return Err(Error::Unsupported(
                "Fourier-form densities are only defined on the integers".into(),
            ));
        }
        if dim == 0 {
            return Err(Error::domain("spectral measure needs positive dimension"));
        }
        let mut table: BTreeMap<i64, CMat> = BTreeMap::new();
        for (a, c) in coeffs {
            check_piece(&c, dim, &format!("coefficient {a}"))?;
            if let Some(prev) = table.get(&a) {
                if linalg::max_abs_diff(prev, &c) > HERMITIAN_TOL * (1.0 + linalg::inf_norm(&c)) {
                    return Err(Error::domain(format!("coefficient {a} given twice")));
                }
            } else {
                table.insert(a, c);
            }
        }
        let keys: Vec<i64> = table.keys().copied().collect();
        for a in keys {
            let adj = table[&a].adjoint();
            match table.get(&-a) {
                Some(other) => {
                    let dev = linalg::max_abs_diff(other, &adj);
                    if dev > HERMITIAN_TOL * (1.0 + linalg::inf_norm(&adj)) {
                        return Err(Error::domain(format!(
                            "coefficients at ±{a} do not give a Hermitian density (deviation {dev:.3e})"
                        )));
                    }
                }
                None => {
                    table.insert(-a, adj);
                }
            }
        }
        let mut correction = 0.0_f64;
        let keys: Vec<i64> = table.keys().copied().collect();
        for a in keys {
            let c = table.get_mut(&a).expect("key present");
            correction = correction.max(c.iter().map(|z| z.im.abs()).fold(0.0, f64::max));
            *c = c.map(|z| Complex64::new(z.re, 0.0));
        }
        // Once real, C_{−a} = C_aᵀ; average so the pair matches exactly.
        let keys: Vec<i64> = table.keys().copied().filter(|a| *a > 0).collect();
        for a in keys {
            let avg = (&table[&a] + table[&-a].transpose()) * Complex64::new(0.5, 0.0);
            table.insert(-a, avg.transpose());
            table.insert(a, avg);
        }
        if let Some(c0) = table.get_mut(&0) {
            *c0 = hermitize(c0);
        }
        let atoms = prepare_atoms(&group, dim, atoms)?;
        Ok(SpectralMeasure {
            group,
            dim,
            density: Density::Fourier(table),
            atoms,
            symmetry_correction: correction,
        })
    }

    /// Flat density `F ≡ value` with no atoms.
    pub fn flat(group: GroupDescriptor, value: CMat) -> Result<Self> {
        let g = group.dual_grid_size();
        let dim = value.nrows();
        Self::from_grid(group, dim, vec![value; g], Vec::new())
    }

    /// Point masses `Φ_m` of a finite-group spectrum (density = N·Φ_m).
    pub fn from_finite_masses(group: GroupDescriptor, masses: Vec<CMat>) -> Result<Self> {
        if !group.is_finite() {
            return Err(Error::domain("point-mass tables are for finite groups"));
        }
        let n = group.dual_grid_size() as f64;
        let dim = masses.first().map_or(0, |m| m.nrows());
        let values = masses
            .into_iter()
            .map(|m| m * Complex64::new(n, 0.0))
            .collect();
        Self::from_grid(group, dim, values, Vec::new())
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of modes `k` for a `2k × 2k` quantum spectrum.
    pub fn modes(&self) -> Result<usize> {
        if self.dim % 2 == 0 {
            Ok(self.dim / 2)
        } else {
            Err(Error::domain(format!(
                "a {0}x{0} measure is not a k-mode quantum spectrum",
                self.dim
            )))
        }
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Largest entry change made by the constructor's conjugate-symmetrisation.
    pub fn symmetry_correction(&self) -> f64 {
        self.symmetry_correction
    }

    /// `F(θ)` for a Fourier-form density at an arbitrary angle.
    pub fn evaluate_fourier(&self, theta: f64) -> Option<CMat> {
        match &self.density {
            Density::Fourier(table) => {
                let mut out = CMat::zeros(self.dim, self.dim);
                for (a, c) in table {
                    out += c * Complex64::cis(-(*a as f64) * theta);
                }
                Some(out)
            }
            Density::Grid(_) => None,
        }
    }

    /// Density values at every point of the dual grid.
    pub fn grid_values(&self) -> Vec<CMat> {
        match &self.density {
            Density::Grid(v) => v.clone(),
            Density::Fourier(_) => (0..self.group.dual_grid_size())
                .map(|j| {
                    let f = self
                        .evaluate_fourier(self.group.grid_angle(j))
                        .expect("fourier density");
                    hermitize(&f)
                })
                .collect(),
        }
    }

    /// The same measure with its density sampled on the dual grid.
    pub fn to_grid(&self) -> Result<Self> {
        Self::from_grid(
            self.group.clone(),
            self.dim,
            self.grid_values(),
            self.atoms.clone(),
        )
    }

    /// `∫ F dλ`.
    pub fn ac_mass(&self) -> CMat {
        match &self.density {
            Density::Grid(v) => {
                let mut sum = CMat::zeros(self.dim, self.dim);
                for f in v {
                    sum += f;
                }
                sum * Complex64::new(self.group.cell_weight(), 0.0)
            }
            Density::Fourier(table) => table
                .get(&0)
                .cloned()
                .unwrap_or_else(|| CMat::zeros(self.dim, self.dim)),
        }
    }

    /// Sum of atom weights.
    pub fn atomic_mass(&self) -> CMat {
        let mut sum = CMat::zeros(self.dim, self.dim);
        for atom in &self.atoms {
            sum += &atom.weight;
        }
        sum
    }

    /// `Φ(D̂)`.
    pub fn total_mass(&self) -> CMat {
        self.ac_mass() + self.atomic_mass()
    }

    /// Largest |a| with a stored Fourier coefficient.
    pub fn fourier_support(&self) -> Option<i64> {
        match &self.density {
            Density::Fourier(t) => Some(t.keys().map(|a| a.abs()).max().unwrap_or(0)),
            Density::Grid(_) => None,
        }
    }

    /// Restricts every piece to the index set `idx` (principal submatrix pattern).
    pub(crate) fn restrict(&self, idx: &[usize]) -> Self {
        let pick = |m: &CMat| CMat::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])]);
        let density = match &self.density {
            Density::Grid(v) => Density::Grid(v.iter().map(pick).collect()),
            Density::Fourier(t) => {
                Density::Fourier(t.iter().map(|(a, c)| (*a, pick(c))).collect())
            }
        };
        SpectralMeasure {
            group: self.group.clone(),
            dim: idx.len(),
            density,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    theta: a.theta,
                    weight: pick(&a.weight),
                })
                .collect(),
            symmetry_correction: self.symmetry_correction,
        }
    }

    /// Index of the atom paired with atom `i` under θ ↦ 2π − θ, if any.
    pub(crate) fn atom_partner(&self, i: usize) -> Option<usize> {
        let target = (TAU - self.atoms[i].theta).rem_euclid(TAU);
        self.atoms.iter().position(|a| {
            let d = (a.theta - target).abs();
            d <= ATOM_PAIR_TOL || (TAU - d) <= ATOM_PAIR_TOL
        })
    }
}
