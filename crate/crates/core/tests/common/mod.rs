//! Test-only helpers: an independent cyclic Jacobi eigensolver and random
//! generators for covariance matrices and spectra.

#![allow(dead_code)]

use kwm::groups::GroupDescriptor;
use kwm::linalg::{CMat, RMat};
use kwm::spectra::{Atom, SpectralMeasure};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(a: &RMat) -> Vec<f64> {
    let n = a.nrows();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off.sqrt() < 1e-15 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Smallest eigenvalue of a Hermitian `A + iB` via the real embedding
/// `[[A, −B], [B, A]]`, whose spectrum is that of `A + iB` doubled.
pub fn hermitian_min_eigenvalue(h: &CMat) -> f64 {
    let n = h.nrows();
    let emb = RMat::from_fn(2 * n, 2 * n, |r, c| {
        let z = h[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    jacobi_eigenvalues(&emb)[0]
}

/// `(i/2)J_{2k}` built from its definition.
pub fn half_j(k: usize) -> CMat {
    CMat::from_fn(2 * k, 2 * k, |r, c| {
        if r / 2 != c / 2 {
            Complex64::new(0.0, 0.0)
        } else if r % 2 == 0 && c == r + 1 {
            Complex64::new(0.0, 0.5)
        } else if r % 2 == 1 && c + 1 == r {
            Complex64::new(0.0, -0.5)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn inf_norm_c(m: &CMat) -> f64 {
    m.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, n: usize, m: usize) -> RMat {
    RMat::from_fn(n, m, |_, _| rng.sample(StandardNormal))
}

pub fn complex(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

/// A random `2k × 2k` quantum covariance `½ S Sᵀ + P` with `S` a product of
/// single-mode squeezers and a random orthogonal-symplectic mixing, `P ⪰ 0` small.
pub fn random_quantum_covariance<R: Rng>(rng: &mut R, k: usize) -> RMat {
    let d = 2 * k;
    let mut s = RMat::zeros(d, d);
    for j in 0..k {
        let r: f64 = rng.random_range(-0.8..0.8);
        s[(2 * j, 2 * j)] = r.exp();
        s[(2 * j + 1, 2 * j + 1)] = (-r).exp();
    }
    // passive mixing between modes: a real rotation acting identically on q and p
    let mut u = RMat::identity(d, d);
    for a in 0..k {
        for b in (a + 1)..k {
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let mut g = RMat::identity(d, d);
            for (x, y) in [(2 * a, 2 * b), (2 * a + 1, 2 * b + 1)] {
                g[(x, x)] = phi.cos();
                g[(y, y)] = phi.cos();
                g[(x, y)] = -phi.sin();
                g[(y, x)] = phi.sin();
            }
            u = g * u;
        }
    }
    let su = &u * &s;
    let b = gaussian_matrix(rng, d, d) * rng.random_range(0.0..0.3);
    (&su * su.transpose()) * 0.5 + &b * b.transpose()
}

/// A random conjugate-symmetric grid density that is valid when `slack ≥ 0`:
/// `F_j = M_j + slack·I` with `M_j` a quantum covariance plus a Hermitian PSD
/// imaginary-part perturbation kept conjugate symmetric.
pub fn random_grid_spectrum<R: Rng>(
    rng: &mut R,
    group: GroupDescriptor,
    k: usize,
    slack: f64,
) -> SpectralMeasure {
    let g = group.dual_grid_size();
    let d = 2 * k;
    let mut values = vec![CMat::zeros(d, d); g];
    for j in 0..g {
        let partner = group.conjugate_index(j);
        if partner < j {
            values[j] = values[partner].map(|z| z.conj());
            continue;
        }
        let m = random_quantum_covariance(rng, k) + RMat::identity(d, d) * slack;
        let mut f = complex(&m);
        if partner != j {
            // a PSD complex bump keeps F + (i/2)J ⪰ 0
            let a = gaussian_matrix(rng, d, 1);
            let b = gaussian_matrix(rng, d, 1);
            let v = CMat::from_fn(d, 1, |r, _| Complex64::new(a[(r, 0)], b[(r, 0)])) * Complex64::new(0.2, 0.0);
            f += &v * v.adjoint();
        }
        values[j] = f;
    }
    SpectralMeasure::from_grid(group, d, values, Vec::new()).expect("well-formed spectrum")
}

/// Conjugate pair of PSD atoms at `θ` and `2π − θ`.
pub fn random_atom_pair<R: Rng>(rng: &mut R, d: usize) -> Vec<Atom> {
    let theta: f64 = rng.random_range(0.1..3.0);
    let a = gaussian_matrix(rng, d, d) * 0.3;
    let w = complex(&(&a * a.transpose()));
    vec![
        Atom { theta, weight: w.clone() },
        Atom { theta: std::f64::consts::TAU - theta, weight: w },
    ]
}
