//! The symplectic form and the uncertainty-relation test `M + (i/2)J ⪰ 0`.
//!
//! Quadratures are ordered `(q₁, p₁, …, q_k, p_k)` within a site and sites are
//! concatenated, so `J_{2kn}` is block diagonal with `kn` copies of
//! `[[0, 1], [−1, 0]]`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, RMat};

/// Default absolute tolerance, scaled by `1 + ‖M‖_∞` at each check.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    k: usize,
    matrix: RMat,
}

impl SymplecticForm {
    pub fn modes(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    /// `(i/2)·J` as a complex matrix.
    pub fn half_imaginary(&self) -> CMat {
        self.matrix.map(|x| Complex64::new(0.0, 0.5 * x))
    }
}

pub fn symplectic_form(k: usize) -> Result<SymplecticForm> {
    if k == 0 {
        return Err(Error::domain("symplectic form needs at least one mode"));
    }
    let mut matrix = RMat::zeros(2 * k, 2 * k);
    for j in 0..k {
        matrix[(2 * j, 2 * j + 1)] = 1.0;
        matrix[(2 * j + 1, 2 * j)] = -1.0;
    }
    Ok(SymplecticForm { k, matrix })
}

/// Real symmetric `2kn × 2kn` covariance of `n` sites with `k` modes each.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumCovarianceMatrix {
    k: usize,
    n: usize,
    matrix: RMat,
}

impl QuantumCovarianceMatrix {
    pub fn new(k: usize, n: usize, matrix: RMat) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(Error::domain("modes and sites must be positive"));
        }
        let dim = 2 * k * n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::domain(format!(
                "covariance is {}x{}, expected {dim}x{dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("covariance has non-finite entries"));
        }
        let asym = linalg::asymmetry(&matrix);
        if asym > 1e-12 * (1.0 + linalg::inf_norm(&matrix)) {
            return Err(Error::domain(format!(
                "covariance is not symmetric (deviation {asym:.3e})"
            )));
        }
        Ok(QuantumCovarianceMatrix { k, n, matrix })
    }

    /// Single-site convenience constructor.
    pub fn single_site(matrix: RMat) -> Result<Self> {
        if matrix.nrows() % 2 != 0 || matrix.nrows() == 0 {
            return Err(Error::domain("single-site covariance must have even order"));
        }
        let k = matrix.nrows() / 2;
        Self::new(k, 1, matrix)
    }

    pub fn modes(&self) -> usize {
        self.k
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> RMat {
        self.matrix
    }

    /// `M + (i/2)J_{2kn}`.
    pub fn augmented(&self) -> CMat {
        let j = symplectic_form(self.k * self.n).expect("k, n positive");
        linalg::to_complex(&self.matrix) + j.half_imaginary()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Valid,
    Invalid,
}

/// Where a certificate vector was found.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Location {
    Window { sites: Vec<String> },
    GridPoint { index: usize, point: String },
    Atom { index: usize, theta: f64 },
}

/// A unit vector `u` with `u†Hu < 0` for the Hermitian matrix `H` under test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    #[serde(serialize_with = "serialize_complex_vec")]
    pub vector: Vec<Complex64>,
    /// `u†Hu` recomputed from the vector.
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<Location>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub condition: String,
    pub passed: bool,
    /// Smallest scaled margin met by this condition (`NaN`-free; 0 when vacuous).
    pub margin: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failing_points: Vec<usize>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

/// Outcome of a PSD-type validation.
///
/// `margin = min_eigenvalue / (1 + ‖M‖_∞)`; the verdict is `valid` iff
/// `margin ≥ −tol`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub verdict: Verdict,
    pub min_eigenvalue: f64,
    pub margin: f64,
    pub tol: f64,
    pub certificate: Option<Certificate>,
    pub details: Vec<ConditionCheck>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.verdict == Verdict::Valid
    }

    pub fn summary(&self) -> String {
        let failed: Vec<&str> = self
            .details
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.condition.as_str())
            .collect();
        if failed.is_empty() {
            format!("valid (min eigenvalue {:.3e})", self.min_eigenvalue)
        } else {
            format!(
                "invalid (min eigenvalue {:.3e}; failed: {})",
                self.min_eigenvalue,
                failed.join(", ")
            )
        }
    }
}

fn serialize_complex_vec<S: serde::Serializer>(
    v: &[Complex64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// Result of testing one Hermitian matrix for positive semidefiniteness.
#[derive(Debug, Clone)]
pub(crate) struct PsdCheck {
    pub min_eigenvalue: f64,
    pub margin: f64,
    pub passed: bool,
    pub vector: DVector<Complex64>,
    pub value: f64,
}

/// Tests `h ⪰ 0` with threshold `−tol·(1 + scale_norm)`.
pub(crate) fn psd_check(h: &CMat, scale_norm: f64, tol: f64) -> Result<PsdCheck> {
    let eig = linalg::min_eigen(h)?;
    let scale = 1.0 + scale_norm;
    let value = linalg::quadratic_form(h, &eig.vector);
    Ok(PsdCheck {
        min_eigenvalue: eig.value,
        margin: eig.value / scale,
        passed: eig.value >= -tol * scale,
        vector: eig.vector,
        value,
    })
}

impl PsdCheck {
    pub fn certificate(&self, location: Option<Location>) -> Option<Certificate> {
        (!self.passed).then(|| Certificate {
            vector: self.vector.iter().copied().collect(),
            value: self.value,
            location,
        })
    }
}

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("tolerance must be positive, got {tol}")))
    }
}

/// Tests the uncertainty relation `M + (i/2)J_{2kn} ⪰ 0`.
pub fn check_uncertainty(m: &QuantumCovarianceMatrix, tol: f64) -> Result<ValidationReport> {
    check_tol(tol)?;
    let h = m.augmented();
    let check = psd_check(&h, linalg::inf_norm(m.matrix()), tol)?;
    Ok(ValidationReport {
        verdict: if check.passed { Verdict::Valid } else { Verdict::Invalid },
        min_eigenvalue: check.min_eigenvalue,
        margin: check.margin,
        tol,
        certificate: check.certificate(None),
        details: vec![ConditionCheck {
            condition: "uncertainty".into(),
            passed: check.passed,
            margin: check.margin,
            failing_points: Vec::new(),
            note: String::new(),
        }],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PurityCheck {
    /// `det Re F`.
    pub det: f64,
    /// `4^{-k}`.
    pub bound: f64,
    pub ok: bool,
}

/// Tests `det Re F ≥ 4^{-k} − tol` for a Hermitian `2k × 2k` matrix `F`.
pub fn purity_determinant_check(f: &CMat, k: usize, tol: f64) -> Result<PurityCheck> {
    check_tol(tol)?;
    if k == 0 || f.nrows() != 2 * k || f.ncols() != 2 * k {
        return Err(Error::domain(format!(
            "expected a {0}x{0} matrix for k = {k}",
            2 * k
        )));
    }
    let dev = linalg::anti_hermiticity(f);
    if dev > tol * (1.0 + linalg::inf_norm(f)) {
        return Err(Error::domain(format!(
            "matrix is not Hermitian (deviation {dev:.3e})"
        )));
    }
    let det = linalg::real_part(f).determinant();
    let bound = 0.25_f64.powi(k as i32);
    Ok(PurityCheck {
        det,
        bound,
        ok: det >= bound - tol,
    })
}
