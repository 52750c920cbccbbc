//! Gaussian-state covariances over windows, classical displacement noise,
//! quadrature-path sampling and periodogram estimation.

mod displacement;
mod paths;
mod periodogram;
mod sampling;

pub use displacement::{
    displaced_mixture_covariance, monte_carlo_displacement, DisplacementNoiseModel, LagEstimate,
    MonteCarloReport, MC_BATCH_SIZE,
};
pub use paths::{read_paths_csv, write_paths_csv, PathLayout, Quadrature};
pub use periodogram::{periodogram, Periodogram};
pub use sampling::{sample_quadrature_process, sample_quadrature_process_with, SamplingMethod};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::groups::GroupElement;
use crate::kernels::{assemble_block_matrix, validate_quantum_kernel, AutocovarianceMap};
use crate::symplectic::QuantumCovarianceMatrix;

/// Covariance and mean of the Gaussian state on a finite window of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianStateCovariance {
    sites: Vec<GroupElement>,
    covariance: QuantumCovarianceMatrix,
    mean: DVector<f64>,
}

impl GaussianStateCovariance {
    pub fn sites(&self) -> &[GroupElement] {
        &self.sites
    }

    pub fn covariance(&self) -> &QuantumCovarianceMatrix {
        &self.covariance
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    fn block_dim(&self) -> usize {
        2 * self.covariance.modes()
    }

    /// Restriction to a subset of the window, in the order given.
    pub fn marginal(&self, sub: &[GroupElement]) -> Result<Self> {
        let order = sub
            .iter()
            .map(|s| {
                self.sites
                    .iter()
                    .position(|x| x == s)
                    .ok_or_else(|| Error::domain(format!("site {s} is not in the window")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.permuted(&order)
    }

    /// Reorders (or selects) sites: site `i` of the result is site `order[i]` here.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let d = self.block_dim();
        let n = order.len();
        let mut seen = vec![false; self.sites.len()];
        for &i in order {
            if i >= self.sites.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::domain("site order must list distinct window positions"));
            }
        }
        let src = self.covariance.matrix();
        let cov = nalgebra::DMatrix::from_fn(d * n, d * n, |r, c| {
            src[(order[r / d] * d + r % d, order[c / d] * d + c % d)]
        });
        let mean = DVector::from_fn(d * n, |r, _| self.mean[order[r / d] * d + r % d]);
        Ok(GaussianStateCovariance {
            sites: order.iter().map(|&i| self.sites[i].clone()).collect(),
            covariance: QuantumCovarianceMatrix::new(self.covariance.modes(), n, cov)?,
            mean,
        })
    }

    /// The state displaced by the quadrature shift `α`; the mean becomes `mean − α`.
    pub fn displaced(&self, alpha: &DVector<f64>) -> Result<Self> {
        if alpha.len() != self.mean.len() {
            return Err(Error::domain(format!(
                "shift has length {}, expected {}",
                alpha.len(),
                self.mean.len()
            )));
        }
        Ok(GaussianStateCovariance {
            mean: &self.mean - alpha,
            ..self.clone()
        })
    }
}

/// The mean-zero Gaussian state of `kernel` on `window`.
///
/// Refuses with [`Error::Invalid`] when the kernel fails the quantum condition
/// on the window.
pub fn gaussian_state_covariance(
    kernel: &AutocovarianceMap,
    window: &[GroupElement],
    tol: f64,
) -> Result<GaussianStateCovariance> {
    let report = validate_quantum_kernel(kernel, window, tol)?;
    if !report.is_valid() {
        return Err(Error::Invalid(Box::new(report)));
    }
    let covariance = assemble_block_matrix(kernel, window)?;
    let sites = window
        .iter()
        .map(|s| kernel.group().canonical(s))
        .collect::<Result<Vec<_>>>()?;
    let dim = covariance.matrix().nrows();
    Ok(GaussianStateCovariance {
        sites,
        covariance,
        mean: DVector::zeros(dim),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::GroupDescriptor;
    use crate::linalg::RMat;
    use crate::symplectic::DEFAULT_TOL;

    fn sites(v: &[i64]) -> Vec<GroupElement> {
        v.iter().copied().map(GroupElement::int).collect()
    }

    fn correlated() -> AutocovarianceMap {
        let z = GroupDescriptor::integers(64).unwrap();
        let m = |x: f64| RMat::from_row_slice(2, 2, &[x, 0.1 * x, 0.1 * x, x]);
        AutocovarianceMap::new(
            z,
            1,
            [
                (GroupElement::int(0), m(1.0)),
                (GroupElement::int(1), RMat::from_row_slice(2, 2, &[0.3, 0.05, -0.02, 0.2])),
                (GroupElement::int(2), m(0.1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn vacuum_window_is_half_identity() {
        let z = GroupDescriptor::integers(16).unwrap();
        let k = AutocovarianceMap::vacuum(z, 1).unwrap();
        let g = gaussian_state_covariance(&k, &sites(&[0, 1, 2]), DEFAULT_TOL).unwrap();
        assert_eq!(g.covariance().matrix(), &(RMat::identity(6, 6) * 0.5));
        assert!(g.mean().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn marginal_matches_sub_window() {
        let k = correlated();
        let g = gaussian_state_covariance(&k, &sites(&[0, 1, 3, 4]), DEFAULT_TOL).unwrap();
        let sub = sites(&[1, 4]);
        let direct = gaussian_state_covariance(&k, &sub, DEFAULT_TOL).unwrap();
        assert_eq!(g.marginal(&sub).unwrap(), direct);
    }

    #[test]
    fn permutation_permutes_blocks() {
        let k = correlated();
        let g = gaussian_state_covariance(&k, &sites(&[0, 1, 2]), DEFAULT_TOL).unwrap();
        let p = g.permuted(&[2, 0, 1]).unwrap();
        let direct = gaussian_state_covariance(&k, &sites(&[2, 0, 1]), DEFAULT_TOL).unwrap();
        assert_eq!(p, direct);
        assert!(g.permuted(&[0, 0, 1]).is_err());
    }

    #[test]
    fn invalid_kernel_refused_with_report() {
        let z = GroupDescriptor::integers(16).unwrap();
        let k = AutocovarianceMap::white(z, RMat::identity(2, 2) * 0.4).unwrap();
        match gaussian_state_covariance(&k, &sites(&[0]), DEFAULT_TOL) {
            Err(Error::Invalid(r)) => assert!(r.certificate.is_some()),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn displacement_shifts_mean() {
        let z = GroupDescriptor::integers(16).unwrap();
        let k = AutocovarianceMap::vacuum(z, 1).unwrap();
        let g = gaussian_state_covariance(&k, &sites(&[0]), DEFAULT_TOL).unwrap();
        let d = g.displaced(&DVector::from_vec(vec![1.0, -2.0])).unwrap();
        assert_eq!(d.mean().as_slice(), &[-1.0, 2.0]);
        assert_eq!(d.covariance(), g.covariance());
    }
}
