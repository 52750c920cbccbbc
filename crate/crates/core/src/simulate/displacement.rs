//! Classical displacement noise on top of a quantum kernel.
//!
//! A random quadrature shift `γ` with covariance `C` displaces the state so that
//! its mean becomes `−γ` while its covariance stays `K`. Averaging the second
//! moments `K + γγᵀ` over the noise gives the covariance `K + C` of the mixture.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::GroupElement;
use crate::kernels::{
    add_kernels, assemble_block_matrix, validate_classical_kernel, validate_quantum_kernel,
    AutocovarianceMap, ClassicalCovarianceKernel,
};
use crate::linalg::{self, RMat};
use crate::serde_util::ser_rmat;

/// Samples per Monte Carlo batch; each batch draws from its own stream.
pub const MC_BATCH_SIZE: usize = 4096;

/// Diagonal jitter allowed when factoring the noise covariance.
const CHOLESKY_JITTER: f64 = 1e-10;

const MIN_SAMPLES: usize = 1000;

/// Covariance `K + C` of the displaced mixture (exact, lagwise).
pub fn displaced_mixture_covariance(
    kernel: &AutocovarianceMap,
    classical: &ClassicalCovarianceKernel,
) -> Result<AutocovarianceMap> {
    add_kernels(kernel, classical)
}

/// Gaussian quadrature-shift noise on a fixed window.
///
/// The shift vector is stored directly as `(x_{a1}, y_{a1}, …, x_{ak}, y_{ak})`
/// per site, with no complex-amplitude rescaling; it enters the state as the
/// mean shift `−α`.
#[derive(Debug, Clone)]
pub struct DisplacementNoiseModel {
    classical: ClassicalCovarianceKernel,
    sites: Vec<GroupElement>,
    factor: RMat,
    seed: u64,
}

impl DisplacementNoiseModel {
    /// Checks `C` on `window` and factors its block matrix.
    pub fn new(
        classical: ClassicalCovarianceKernel,
        window: &[GroupElement],
        seed: u64,
        tol: f64,
    ) -> Result<Self> {
        let report = validate_classical_kernel(&classical, window, tol)?;
        if !report.is_valid() {
            return Err(Error::Invalid(Box::new(report)));
        }
        let block = assemble_block_matrix(classical.as_map(), window)?;
        let factor = linalg::psd_cholesky(block.matrix(), CHOLESKY_JITTER)?;
        let sites = window
            .iter()
            .map(|s| classical.group().canonical(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(DisplacementNoiseModel {
            classical,
            sites,
            factor,
            seed,
        })
    }

    pub fn classical(&self) -> &ClassicalCovarianceKernel {
        &self.classical
    }

    pub fn sites(&self) -> &[GroupElement] {
        &self.sites
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Lower-triangular `L` with `L Lᵀ` the window block matrix of `C`.
    pub fn factor(&self) -> &RMat {
        &self.factor
    }

    /// One draw of the shift vector `γ = L z`.
    pub fn sample_shift<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.factor.nrows(), |_, _| StandardNormal.sample(rng));
        &self.factor * z
    }

    /// Generator for batch `b`: stream `b` of the ChaCha8 generator seeded with `seed`.
    pub fn batch_rng(&self, batch: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(batch as u64);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagEstimate {
    pub lag: GroupElement,
    /// Number of window pairs `(a_i, a_j)` with `a_j − a_i = lag`.
    pub pairs: usize,
    #[serde(serialize_with = "ser_rmat")]
    pub estimate: RMat,
    #[serde(serialize_with = "ser_rmat")]
    pub exact: RMat,
    /// Entrywise CLT standard error `σ̂/√n`.
    #[serde(serialize_with = "ser_rmat")]
    pub standard_error: RMat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub n_samples: usize,
    pub seed: u64,
    pub batch_size: usize,
    pub lags: Vec<LagEstimate>,
    pub max_abs_error: f64,
    pub max_standard_error: f64,
    /// Largest `|error| / SE` over entries with a positive standard error.
    pub max_error_ratio: f64,
}

impl MonteCarloReport {
    /// True if every entry lies within `factor` standard errors of `K + C`.
    pub fn within(&self, factor: f64) -> bool {
        self.lags.iter().all(|l| {
            l.estimate
                .iter()
                .zip(l.exact.iter())
                .zip(l.standard_error.iter())
                .all(|((e, x), se)| (e - x).abs() <= factor * se + 1e-12 * (1.0 + x.abs()))
        })
    }

    /// The empirical lags as an autocovariance map (transposes filled in).
    pub fn estimate_map(&self, template: &AutocovarianceMap) -> Result<AutocovarianceMap> {
        AutocovarianceMap::new(
            template.group().clone(),
            template.modes(),
            self.lags.iter().map(|l| (l.lag.clone(), l.estimate.clone())),
        )
    }
}

/// Lags realised by the window, one per `{a, −a}` pair, with their site pairs.
fn window_lags(
    kernel: &AutocovarianceMap,
    sites: &[GroupElement],
) -> Vec<(GroupElement, Vec<(usize, usize)>)> {
    let group = kernel.group();
    let mut out: std::collections::BTreeMap<GroupElement, Vec<(usize, usize)>> =
        Default::default();
    for (i, ai) in sites.iter().enumerate() {
        for (j, aj) in sites.iter().enumerate() {
            let d = group.sub(aj, ai);
            if group.neg(&d) <= d {
                out.entry(d).or_default().push((i, j));
            }
        }
    }
    out.into_iter().collect()
}

struct Moments {
    sum: Vec<RMat>,
    sum_sq: Vec<RMat>,
}

/// Monte Carlo check that displacing by noise with covariance `C` yields `K + C`.
///
/// Samples run in batches of [`MC_BATCH_SIZE`] on separate ChaCha8 streams, so
/// the result depends only on `(seed, n_samples)`; batch sums are reduced in
/// batch order.
pub fn monte_carlo_displacement(
    kernel: &AutocovarianceMap,
    classical: &ClassicalCovarianceKernel,
    window: &[GroupElement],
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<MonteCarloReport> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::domain(format!(
            "need at least {MIN_SAMPLES} samples, got {n_samples}"
        )));
    }
    let exact_map = displaced_mixture_covariance(kernel, classical)?;
    let report = validate_quantum_kernel(kernel, window, tol)?;
    if !report.is_valid() {
        return Err(Error::Invalid(Box::new(report)));
    }
    let model = DisplacementNoiseModel::new(classical.clone(), window, seed, tol)?;
    let lags = window_lags(kernel, model.sites());
    let d = kernel.dim();

    let batches = n_samples.div_ceil(MC_BATCH_SIZE);
    let per_batch: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = model.batch_rng(b);
            let count = MC_BATCH_SIZE.min(n_samples - b * MC_BATCH_SIZE);
            let mut m = Moments {
                sum: vec![RMat::zeros(d, d); lags.len()],
                sum_sq: vec![RMat::zeros(d, d); lags.len()],
            };
            let mut avg = vec![0.0; d * d];
            for _ in 0..count {
                let g = model.sample_shift(&mut rng);
                let g = g.as_slice();
                for (l, (_, pairs)) in lags.iter().enumerate() {
                    avg.fill(0.0);
                    for &(i, j) in pairs {
                        let (gi, gj) = (&g[i * d..(i + 1) * d], &g[j * d..(j + 1) * d]);
                        for (r, x) in gi.iter().enumerate() {
                            for (c, y) in gj.iter().enumerate() {
                                avg[r * d + c] += x * y;
                            }
                        }
                    }
                    let w = 1.0 / pairs.len() as f64;
                    for r in 0..d {
                        for c in 0..d {
                            let v = avg[r * d + c] * w;
                            m.sum[l][(r, c)] += v;
                            m.sum_sq[l][(r, c)] += v * v;
                        }
                    }
                }
            }
            m
        })
        .collect();

    let mut total = Moments {
        sum: vec![RMat::zeros(d, d); lags.len()],
        sum_sq: vec![RMat::zeros(d, d); lags.len()],
    };
    for m in &per_batch {
        for l in 0..lags.len() {
            total.sum[l] += &m.sum[l];
            total.sum_sq[l] += &m.sum_sq[l];
        }
    }

    let n = n_samples as f64;
    let mut out = Vec::with_capacity(lags.len());
    let (mut max_err, mut max_se, mut max_ratio) = (0.0_f64, 0.0_f64, 0.0_f64);
    for (l, (lag, pairs)) in lags.into_iter().enumerate() {
        let mean = &total.sum[l] / n;
        let var = (&total.sum_sq[l] / n - mean.component_mul(&mean)) * (n / (n - 1.0));
        let se = var.map(|v| (v.max(0.0) / n).sqrt());
        let estimate = kernel.lag(&lag)? + mean;
        let exact = exact_map.lag(&lag)?;
        for ((e, x), s) in estimate.iter().zip(exact.iter()).zip(se.iter()) {
            let err = (e - x).abs();
            max_err = max_err.max(err);
            max_se = max_se.max(*s);
            if *s > 0.0 {
                max_ratio = max_ratio.max(err / s);
            }
        }
        out.push(LagEstimate {
            lag,
            pairs: pairs.len(),
            estimate,
            exact,
            standard_error: se,
        });
    }
    Ok(MonteCarloReport {
        n_samples,
        seed,
        batch_size: MC_BATCH_SIZE,
        lags: out,
        max_abs_error: max_err,
        max_standard_error: max_se,
        max_error_ratio: max_ratio,
    })
}
