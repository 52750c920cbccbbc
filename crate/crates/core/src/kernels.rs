//! Autocovariance maps and window-wise kernel validation.
//!
//! A weakly stationary kernel is stored by lag: `K(a, b) = K̃(b − a)` with
//! `K̃(−a) = K̃(a)ᵀ`. On ℤ, lags missing from the table are zero; on a finite
//! group every lag must be resolvable.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::groups::{GroupDescriptor, GroupElement};
use crate::linalg::{self, CMat, RMat};
use crate::symplectic::{
    self, check_uncertainty, psd_check, ConditionCheck, Location, QuantumCovarianceMatrix,
    ValidationReport, Verdict,
};

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AutocovarianceMap {
    group: GroupDescriptor,
    k: usize,
    lags: BTreeMap<GroupElement, RMat>,
}

impl AutocovarianceMap {
    /// Builds a map from `(lag, K̃(lag))` pairs.
    ///
    /// A lag given without its negative gets the transpose filled in. Repeated
    /// lags (including aliases on finite groups) must agree.
    pub fn new(
        group: GroupDescriptor,
        k: usize,
        entries: impl IntoIterator<Item = (GroupElement, RMat)>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("kernel needs at least one mode"));
        }
        let dim = 2 * k;
        let mut lags: BTreeMap<GroupElement, RMat> = BTreeMap::new();
        for (a, m) in entries {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::domain(format!(
                    "lag {a}: matrix is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::domain(format!("lag {a}: non-finite entry")));
            }
            let a = group.canonical(&a)?;
            if let Some(prev) = lags.get(&a) {
                if (prev - &m).abs().max() > SYMMETRY_TOL * (1.0 + linalg::inf_norm(&m)) {
                    return Err(Error::domain(format!("lag {a} given twice with different values")));
                }
            } else {
                lags.insert(a, m);
            }
        }
        let keys: Vec<GroupElement> = lags.keys().cloned().collect();
        for a in keys {
            let neg = group.neg(&a);
            let mt = lags[&a].transpose();
            match lags.get(&neg) {
                Some(other) => {
                    let dev = (other - &mt).abs().max();
                    if dev > SYMMETRY_TOL * (1.0 + linalg::inf_norm(&mt)) {
                        return Err(Error::domain(format!(
                            "transpose symmetry K(-a) = K(a)^T violated at lag {a} (deviation {dev:.3e})"
                        )));
                    }
                }
                None => {
                    lags.insert(neg, mt);
                }
            }
        }
        if group.is_finite() {
            for a in group.elements()? {
                if !lags.contains_key(&a) {
                    return Err(Error::domain(format!(
                        "finite-group kernel is missing lag {a}"
                    )));
                }
            }
        }
        Ok(AutocovarianceMap { group, k, lags })
    }

    /// White kernel: `K̃(0) = m`, zero elsewhere.
    pub fn white(group: GroupDescriptor, m: RMat) -> Result<Self> {
        if m.nrows() % 2 != 0 || m.nrows() == 0 {
            return Err(Error::domain("white kernel needs an even-order matrix"));
        }
        let k = m.nrows() / 2;
        let zero = group.zero();
        if group.is_finite() {
            let dim = m.nrows();
            let entries = group
                .elements()?
                .into_iter()
                .map(|a| {
                    let v = if a == zero { m.clone() } else { RMat::zeros(dim, dim) };
                    (a, v)
                })
                .collect::<Vec<_>>();
            Self::new(group, k, entries)
        } else {
            Self::new(group, k, [(zero, m)])
        }
    }

    /// The vacuum white-noise kernel `K̃(0) = ½I`.
    pub fn vacuum(group: GroupDescriptor, k: usize) -> Result<Self> {
        Self::white(group, RMat::identity(2 * k, 2 * k) * 0.5)
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn modes(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        2 * self.k
    }

    /// Stored lags with their matrices, in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (&GroupElement, &RMat)> {
        self.lags.iter()
    }

    /// `K̃(a)`; zero for lags of ℤ that are not stored.
    pub fn lag(&self, a: &GroupElement) -> Result<RMat> {
        let a = self.group.canonical(a)?;
        Ok(self
            .lags
            .get(&a)
            .cloned()
            .unwrap_or_else(|| RMat::zeros(self.dim(), self.dim())))
    }

    /// Largest |a| stored; `None` for finite groups.
    pub fn max_abs_lag(&self) -> Option<i64> {
        if self.group.is_finite() {
            return None;
        }
        Some(self.lags.keys().map(|a| a.0[0].abs()).max().unwrap_or(0))
    }
}

/// A kernel whose block matrices are required to be PSD (no symplectic term).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalCovarianceKernel(AutocovarianceMap);

impl ClassicalCovarianceKernel {
    pub fn new(map: AutocovarianceMap) -> Self {
        ClassicalCovarianceKernel(map)
    }

    pub fn zero(group: GroupDescriptor, k: usize) -> Result<Self> {
        Ok(Self(AutocovarianceMap::white(
            group,
            RMat::zeros(2 * k, 2 * k),
        )?))
    }

    pub fn as_map(&self) -> &AutocovarianceMap {
        &self.0
    }

    pub fn into_map(self) -> AutocovarianceMap {
        self.0
    }
}

impl std::ops::Deref for ClassicalCovarianceKernel {
    type Target = AutocovarianceMap;

    fn deref(&self) -> &AutocovarianceMap {
        &self.0
    }
}

fn canonical_sites(group: &GroupDescriptor, sites: &[GroupElement]) -> Result<Vec<GroupElement>> {
    if sites.is_empty() {
        return Err(Error::domain("window must contain at least one site"));
    }
    let canon = sites
        .iter()
        .map(|s| group.canonical(s))
        .collect::<Result<Vec<_>>>()?;
    let mut seen = std::collections::BTreeSet::new();
    for s in &canon {
        if !seen.insert(s.clone()) {
            return Err(Error::domain(format!("duplicate site {s} in window")));
        }
    }
    Ok(canon)
}

/// The `2kn × 2kn` matrix `[[K̃(a_j − a_i)]]` over the window `sites`.
pub fn assemble_block_matrix(
    kernel: &AutocovarianceMap,
    sites: &[GroupElement],
) -> Result<QuantumCovarianceMatrix> {
    let sites = canonical_sites(kernel.group(), sites)?;
    let d = kernel.dim();
    let n = sites.len();
    let mut out = RMat::zeros(d * n, d * n);
    for (i, ai) in sites.iter().enumerate() {
        for (j, aj) in sites.iter().enumerate() {
            let block = kernel.lag(&kernel.group().sub(aj, ai))?;
            out.view_mut((i * d, j * d), (d, d)).copy_from(&block);
        }
    }
    QuantumCovarianceMatrix::new(kernel.modes(), n, out)
}

/// `[[L(a_s − a_r)]]` with `L(a) = K̃(a) + (i/2)·1_{a=0}·J_{2k}`.
pub fn augmented_kernel_matrix(
    kernel: &AutocovarianceMap,
    sites: &[GroupElement],
) -> Result<CMat> {
    let sites = canonical_sites(kernel.group(), sites)?;
    let d = kernel.dim();
    let n = sites.len();
    let half_j = symplectic::symplectic_form(kernel.modes())?.half_imaginary();
    let zero = kernel.group().zero();
    let mut out = CMat::zeros(d * n, d * n);
    for (r, ar) in sites.iter().enumerate() {
        for (s, as_) in sites.iter().enumerate() {
            let lag = kernel.group().sub(as_, ar);
            let mut block = linalg::to_complex(&kernel.lag(&lag)?);
            if lag == zero {
                block += &half_j;
            }
            out.view_mut((r * d, s * d), (d, d)).copy_from(&block);
        }
    }
    Ok(out)
}

fn window_location(sites: &[GroupElement]) -> Location {
    Location::Window {
        sites: sites.iter().map(|s| s.to_string()).collect(),
    }
}

/// Tests the quantum kernel condition on one window.
pub fn validate_quantum_kernel(
    kernel: &AutocovarianceMap,
    window: &[GroupElement],
    tol: f64,
) -> Result<ValidationReport> {
    let m = assemble_block_matrix(kernel, window)?;
    let mut report = check_uncertainty(&m, tol)?;
    if let Some(cert) = report.certificate.as_mut() {
        cert.location = Some(window_location(window));
    }
    report.details[0].condition = "quantum-kernel".into();
    Ok(report)
}

/// Tests positive semidefiniteness of the block matrix (classical kernel condition).
pub fn validate_classical_kernel(
    kernel: &ClassicalCovarianceKernel,
    window: &[GroupElement],
    tol: f64,
) -> Result<ValidationReport> {
    symplectic::check_tol(tol)?;
    let m = assemble_block_matrix(kernel.as_map(), window)?;
    let h = linalg::to_complex(m.matrix());
    let check = psd_check(&h, linalg::inf_norm(m.matrix()), tol)?;
    Ok(ValidationReport {
        verdict: if check.passed { Verdict::Valid } else { Verdict::Invalid },
        min_eigenvalue: check.min_eigenvalue,
        margin: check.margin,
        tol,
        certificate: check.certificate(Some(window_location(window))),
        details: vec![ConditionCheck {
            condition: "classical-kernel".into(),
            passed: check.passed,
            margin: check.margin,
            failing_points: Vec::new(),
            note: String::new(),
        }],
    })
}

/// Validates windows `{0, 1, …, s−1}` for `s = 1..=max_size` (ℤ or 1-factor groups).
pub fn window_sweep(
    kernel: &AutocovarianceMap,
    max_size: usize,
    tol: f64,
) -> Result<Vec<(usize, ValidationReport)>> {
    if kernel.group().rank() != 1 {
        return Err(Error::Unsupported(
            "window sweeps need a one-dimensional index group".into(),
        ));
    }
    (1..=max_size)
        .map(|s| {
            let window: Vec<GroupElement> = (0..s as i64).map(GroupElement::int).collect();
            validate_quantum_kernel(kernel, &window, tol).map(|r| (s, r))
        })
        .collect()
}

/// Lagwise sum `K̃ + C̃`.
pub fn add_kernels(
    kernel: &AutocovarianceMap,
    classical: &ClassicalCovarianceKernel,
) -> Result<AutocovarianceMap> {
    let c = classical.as_map();
    if kernel.group() != c.group() || kernel.modes() != c.modes() {
        return Err(Error::domain("kernels differ in group or number of modes"));
    }
    let mut sum: BTreeMap<GroupElement, RMat> = kernel.lags.clone();
    for (a, m) in &c.lags {
        sum.entry(a.clone())
            .and_modify(|x| *x += m)
            .or_insert_with(|| m.clone());
    }
    AutocovarianceMap::new(kernel.group().clone(), kernel.modes(), sum)
}
