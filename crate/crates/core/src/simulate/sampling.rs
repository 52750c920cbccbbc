//! Sampling commuting quadrature families from their marginal spectrum.
//!
//! The default method synthesises the path directly from the spectrum: with
//! `A_j = F(θ_j)^{1/2}` and Hermitian-symmetric complex normal draws `Z_j`,
//! `X_t = G^{−1/2} Σ_j e^{−itθ_j} A_j Z_j` is real with
//! `E[X_t X_sᵀ] = (1/G) Σ_j F(θ_j) e^{i(s−t)θ_j}`, which is the grid transform of
//! the density. Atom pairs add independent random-phase sinusoids. The dense
//! method factors the block-Toeplitz covariance instead and serves as a
//! cross-check on short paths.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::groups::{GroupDescriptor, GroupElement};
use crate::linalg::{self, CMat, RMat};
use crate::spectra::{validate_classical_spectrum, Density, SpectralMeasure};
use crate::symplectic::DEFAULT_TOL;

/// Longest path accepted.
pub const MAX_PATH_LEN: usize = 4096;

const CHOLESKY_JITTER: f64 = 1e-10;

const MAX_SYNTHESIS_GRID: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMethod {
    #[default]
    Spectral,
    /// Dense Cholesky factor of the `kL × kL` block-Toeplitz covariance.
    Cholesky,
}

/// Draws one real `k × L` path of a mean-zero stationary process with the given
/// `k × k` marginal spectrum, using the spectral method.
pub fn sample_quadrature_process(
    marginal: &SpectralMeasure,
    len: usize,
    seed: u64,
) -> Result<RMat> {
    sample_quadrature_process_with(marginal, len, seed, SamplingMethod::Spectral)
}

pub fn sample_quadrature_process_with(
    marginal: &SpectralMeasure,
    len: usize,
    seed: u64,
    method: SamplingMethod,
) -> Result<RMat> {
    let group = marginal.group();
    if group.rank() != 1 {
        return Err(Error::Unsupported(
            "path sampling needs a one-dimensional index group".into(),
        ));
    }
    if len == 0 || len > MAX_PATH_LEN {
        return Err(Error::domain(format!(
            "path length must be in 1..={MAX_PATH_LEN}, got {len}"
        )));
    }
    let report = validate_classical_spectrum(marginal, DEFAULT_TOL)?;
    if !report.is_valid() {
        return Err(Error::Invalid(Box::new(report)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match method {
        SamplingMethod::Spectral => spectral_path(marginal, len, &mut rng),
        SamplingMethod::Cholesky => cholesky_path(marginal, len, &mut rng),
    }
}

/// Density values on a grid fine enough that the synthesised covariance is
/// exact for every lag below `len`.
fn synthesis_grid(marginal: &SpectralMeasure, len: usize) -> Result<(usize, Vec<CMat>)> {
    let group = marginal.group();
    match marginal.density() {
        Density::Grid(values) => {
            let g = values.len();
            let limit = if group.is_finite() { g } else { g / 2 };
            if len > limit {
                return Err(Error::domain(format!(
                    "a {g}-point dual grid supports paths of length at most {limit}, got {len}"
                )));
            }
            Ok((g, values.clone()))
        }
        Density::Fourier(_) => {
            let support = marginal.fourier_support().unwrap_or(0) as usize;
            let g = (2 * len).max(2 * support + 2).next_power_of_two();
            if g > MAX_SYNTHESIS_GRID {
                return Err(Error::domain(format!(
                    "Fourier support {support} needs a synthesis grid larger than {MAX_SYNTHESIS_GRID}"
                )));
            }
            let fine = GroupDescriptor::integers(g)?;
            let values = (0..g)
                .map(|j| {
                    let f = marginal
                        .evaluate_fourier(fine.grid_angle(j))
                        .expect("fourier density");
                    (&f + f.adjoint()) * Complex64::new(0.5, 0.0)
                })
                .collect();
            Ok((g, values))
        }
    }
}

fn complex_normal<R: Rng>(rng: &mut R, dim: usize) -> DVector<Complex64> {
    DVector::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

fn real_normal<R: Rng>(rng: &mut R, dim: usize) -> DVector<Complex64> {
    DVector::from_fn(dim, |_, _| Complex64::new(rng.sample(StandardNormal), 0.0))
}

fn spectral_path<R: Rng>(marginal: &SpectralMeasure, len: usize, rng: &mut R) -> Result<RMat> {
    let k = marginal.dim();
    let (g, values) = synthesis_grid(marginal, len)?;
    let mut y = vec![DVector::<Complex64>::zeros(k); g];
    for j in 0..=g / 2 {
        let a = linalg::psd_sqrt(&values[j], DEFAULT_TOL)?;
        let partner = (g - j) % g;
        if partner == j {
            y[j] = &a * real_normal(rng, k);
        } else {
            let v = &a * complex_normal(rng, k);
            y[partner] = v.map(|z| z.conj());
            y[j] = v;
        }
    }

    // X_t = G^{-1/2} Σ_j e^{-2πi jt/G} Y_j, one forward FFT per component
    let fft = FftPlanner::<f64>::new().plan_fft_forward(g);
    let norm = 1.0 / (g as f64).sqrt();
    let mut path = RMat::zeros(k, len);
    let mut buf = vec![Complex64::new(0.0, 0.0); g];
    for r in 0..k {
        for (b, yj) in buf.iter_mut().zip(&y) {
            *b = yj[r];
        }
        fft.process(&mut buf);
        for t in 0..len {
            path[(r, t)] = buf[t].re * norm;
        }
    }

    add_atoms(marginal, &mut path, rng)?;
    Ok(path)
}

/// Adds `A ξ e^{−itθ} + conj` per atom pair (`A = W^{1/2}`, `E|ξ|² = 1`), or
/// `A ξ e^{−itθ}` with real `ξ` for a self-paired atom.
fn add_atoms<R: Rng>(marginal: &SpectralMeasure, path: &mut RMat, rng: &mut R) -> Result<()> {
    let k = marginal.dim();
    let atoms = marginal.atoms();
    let mut done = vec![false; atoms.len()];
    for i in 0..atoms.len() {
        if done[i] {
            continue;
        }
        let p = marginal
            .atom_partner(i)
            .ok_or_else(|| Error::domain(format!("atom {i} has no conjugate partner")))?;
        done[i] = true;
        done[p] = true;
        let a = linalg::psd_sqrt(&atoms[i].weight, DEFAULT_TOL)?;
        let theta = atoms[i].theta;
        let self_paired = p == i;
        let v = if self_paired {
            &a * real_normal(rng, k)
        } else {
            &a * complex_normal(rng, k)
        };
        for t in 0..path.ncols() {
            let phase = Complex64::cis(-(t as f64) * theta);
            for r in 0..k {
                let z = v[r] * phase;
                path[(r, t)] += if self_paired { z.re } else { 2.0 * z.re };
            }
        }
    }
    Ok(())
}

fn cholesky_path<R: Rng>(marginal: &SpectralMeasure, len: usize, rng: &mut R) -> Result<RMat> {
    let k = marginal.dim();
    let group = marginal.group();
    if !group.is_finite() && matches!(marginal.density(), Density::Grid(_)) {
        let limit = group.dual_grid_size() / 2;
        if len > limit {
            return Err(Error::domain(format!(
                "a {}-point dual grid supports paths of length at most {limit}, got {len}",
                group.dual_grid_size()
            )));
        }
    }
    let scale = linalg::inf_norm(&marginal.total_mass());
    let lags = (0..len as i64)
        .map(|a| marginal.real_lag_value(&GroupElement::int(a), scale))
        .collect::<Result<Vec<_>>>()?;
    // block (t, s) = K̃(s − t)
    let cov = RMat::from_fn(k * len, k * len, |r, c| {
        let (t, i) = (r / k, r % k);
        let (s, j) = (c / k, c % k);
        if s >= t {
            lags[s - t][(i, j)]
        } else {
            lags[t - s][(j, i)]
        }
    });
    let l = linalg::psd_cholesky(&cov, CHOLESKY_JITTER).map_err(|e| {
        Error::numeric(format!("{e}; the marginal covariance is not positive semidefinite"))
    })?;
    let z = DVector::from_fn(k * len, |_, _| rng.sample::<f64, _>(StandardNormal));
    let x = l * z;
    Ok(RMat::from_fn(k, len, |r, t| x[t * k + r]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::to_complex;
    use crate::spectra::Atom;
    use std::f64::consts::PI;

    fn flat(g: usize, c: f64) -> SpectralMeasure {
        let z = GroupDescriptor::integers(g).unwrap();
        SpectralMeasure::flat(z, to_complex(&(RMat::identity(1, 1) * c))).unwrap()
    }

    fn lag_cov(path: &RMat, lag: usize) -> f64 {
        let n = path.ncols() - lag;
        (0..n).map(|t| path[(0, t)] * path[(0, t + lag)]).sum::<f64>() / n as f64
    }

    #[test]
    fn flat_half_variance() {
        let x = sample_quadrature_process(&flat(2048, 0.5), 1024, 1).unwrap();
        assert!((lag_cov(&x, 0) - 0.5).abs() < 0.07);
    }

    #[test]
    fn seeds_reproduce_and_differ() {
        let s = flat(256, 0.5);
        let a = sample_quadrature_process(&s, 100, 5).unwrap();
        let b = sample_quadrature_process(&s, 100, 5).unwrap();
        let c = sample_quadrature_process(&s, 100, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn colored_lag_one_matches_design() {
        // F(θ) = 1 + 0.5 cos θ  ⇒  K̃(0) = 1, K̃(±1) = 0.25
        let g = 8192;
        let z = GroupDescriptor::integers(g).unwrap();
        let values = (0..g)
            .map(|j| to_complex(&RMat::from_element(1, 1, 1.0 + 0.5 * z.grid_angle(j).cos())))
            .collect();
        let s = SpectralMeasure::from_grid(z, 1, values, vec![]).unwrap();
        let x = sample_quadrature_process(&s, 4096, 11).unwrap();
        // Bartlett variance of the lag-1 product mean: Σ_h γ(h)² + γ(h+1)γ(h−1)
        let gamma = |h: i64| match h.abs() {
            0 => 1.0,
            1 => 0.25,
            _ => 0.0,
        };
        let var: f64 = (-3..=3).map(|h| gamma(h) * gamma(h) + gamma(h + 1) * gamma(h - 1)).sum();
        let se = (var / 4095.0).sqrt();
        assert!((lag_cov(&x, 1) - 0.25).abs() < 3.0 * se);
    }

    #[test]
    fn fourier_form_and_cholesky_agree_in_law() {
        let z = GroupDescriptor::integers(64).unwrap();
        let c = |v: f64| to_complex(&RMat::from_element(1, 1, v));
        let s = SpectralMeasure::from_fourier(z, 1, vec![(0, c(1.0)), (1, c(0.4))], vec![]).unwrap();
        let n = 400;
        let mut spec = [0.0; 2];
        let mut chol = [0.0; 2];
        for seed in 0..n {
            let a = sample_quadrature_process_with(&s, 8, seed, SamplingMethod::Spectral).unwrap();
            let b = sample_quadrature_process_with(&s, 8, seed, SamplingMethod::Cholesky).unwrap();
            for lag in 0..2 {
                spec[lag] += a[(0, 3)] * a[(0, 3 + lag)] / n as f64;
                chol[lag] += b[(0, 3)] * b[(0, 3 + lag)] / n as f64;
            }
        }
        for (lag, target) in [(0, 1.0), (1, 0.4)] {
            assert!((spec[lag] - target).abs() < 0.25, "spectral lag {lag}: {}", spec[lag]);
            assert!((chol[lag] - target).abs() < 0.25, "cholesky lag {lag}: {}", chol[lag]);
        }
    }

    #[test]
    fn atom_pair_gives_sinusoid() {
        let z = GroupDescriptor::integers(64).unwrap();
        let w = to_complex(&RMat::from_element(1, 1, 0.5));
        let atoms = vec![
            Atom { theta: PI / 2.0, weight: w.clone() },
            Atom { theta: 3.0 * PI / 2.0, weight: w },
        ];
        let s = SpectralMeasure::from_grid(z, 1, vec![to_complex(&RMat::zeros(1, 1)); 64], atoms)
            .unwrap();
        let x = sample_quadrature_process(&s, 16, 2).unwrap();
        // period-4 cosine: x_{t+2} = −x_t
        for t in 0..14 {
            assert!((x[(0, t + 2)] + x[(0, t)]).abs() < 1e-12);
        }
    }

    #[test]
    fn limits_enforced() {
        assert!(sample_quadrature_process(&flat(64, 0.5), 33, 0).is_err());
        assert!(sample_quadrature_process(&flat(64, 0.5), 0, 0).is_err());
        let neg = flat(64, -0.5);
        assert!(matches!(sample_quadrature_process(&neg, 8, 0), Err(Error::Invalid(_))));
    }
}
