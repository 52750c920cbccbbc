//! Small dense linear-algebra helpers shared by the validation and sampling code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// Lowest eigenpair of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct MinEigen {
    pub value: f64,
    pub vector: DVector<Complex64>,
}

/// Maximum absolute row sum.
pub fn inf_norm<T>(m: &DMatrix<T>) -> f64
where
    T: nalgebra::ComplexField<RealField = f64>,
{
    m.row_iter()
        .map(|row| row.iter().map(|x| x.clone().modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn real_part(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

pub fn imag_part(m: &CMat) -> RMat {
    m.map(|z| z.im)
}

/// Largest entrywise deviation from symmetry.
pub fn asymmetry(m: &RMat) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Largest entrywise deviation from Hermiticity.
pub fn anti_hermiticity(m: &CMat) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Full Hermitian eigendecomposition, failing loudly on non-convergence.
pub fn hermitian_eigen(h: &CMat) -> Result<SymmetricEigen<Complex64, nalgebra::Dyn>> {
    if h.nrows() != h.ncols() {
        return Err(Error::domain("eigendecomposition of a non-square matrix"));
    }
    SymmetricEigen::try_new(h.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::numeric("Hermitian eigensolver did not converge"))
}

pub fn min_eigen(h: &CMat) -> Result<MinEigen> {
    let eig = hermitian_eigen(h)?;
    let (idx, value) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::domain("empty matrix"))?;
    let vector = eig.eigenvectors.column(idx).into_owned();
    Ok(MinEigen { value, vector })
}

/// u†Hu, real part.
pub fn quadratic_form(h: &CMat, u: &DVector<Complex64>) -> f64 {
    (u.adjoint() * h * u)[(0, 0)].re
}

/// Hermitian square root of a PSD matrix; tiny negative eigenvalues are clipped.
pub fn psd_sqrt(h: &CMat, tol: f64) -> Result<CMat> {
    let eig = hermitian_eigen(h)?;
    let scale = 1.0 + inf_norm(h);
    let mut roots = Vec::with_capacity(eig.eigenvalues.len());
    for &lam in eig.eigenvalues.iter() {
        if lam < -tol * scale {
            return Err(Error::numeric(format!(
                "matrix is not positive semidefinite (eigenvalue {lam:.3e})"
            )));
        }
        roots.push(Complex64::new(lam.max(0.0).sqrt(), 0.0));
    }
    let v = &eig.eigenvectors;
    let d = CMat::from_diagonal(&DVector::from_vec(roots));
    Ok(v * d * v.adjoint())
}

/// Lower-triangular factor L with A = L Lᵀ for a symmetric positive semidefinite A.
///
/// Zero pivots are allowed (the column is set to zero) as long as the remaining
/// entries of that column vanish too, so singular covariances such as the zero
/// matrix factor exactly. If that fails, one retry is made with `jitter` added to
/// the diagonal.
pub fn psd_cholesky(a: &RMat, jitter: f64) -> Result<RMat> {
    if let Some(l) = semidefinite_cholesky(a) {
        return Ok(l);
    }
    let mut shifted = a.clone();
    for i in 0..a.nrows() {
        shifted[(i, i)] += jitter;
    }
    semidefinite_cholesky(&shifted).ok_or_else(|| {
        Error::numeric(format!(
            "Cholesky factorization failed after diagonal jitter {jitter:e}"
        ))
    })
}

fn semidefinite_cholesky(a: &RMat) -> Option<RMat> {
    let n = a.nrows();
    let scale = a.diagonal().iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1.0);
    let pivot_tol = 1e-13 * scale;
    let mut l = RMat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for p in 0..j {
            d -= l[(j, p)] * l[(j, p)];
        }
        if d > pivot_tol {
            let ljj = d.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for p in 0..j {
                    s -= l[(i, p)] * l[(j, p)];
                }
                l[(i, j)] = s / ljj;
            }
        } else if d >= -pivot_tol {
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for p in 0..j {
                    s -= l[(i, p)] * l[(j, p)];
                }
                if s.abs() > 1e-9 * scale {
                    return None;
                }
            }
        } else {
            return None;
        }
    }
    Some(l)
}
