//! Acceptance suite. Runs every criterion, prints one `PASS`/`FAIL` line each
//! and exits nonzero if any criterion fails.
//!
//! Run with `cargo test -p kwm-core --test acceptance`.

mod common;

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use kwm::groups::{GroupDescriptor, GroupElement};
use kwm::kernels::{
    validate_quantum_kernel, AutocovarianceMap, ClassicalCovarianceKernel,
};
use kwm::linalg::{CMat, RMat};
use kwm::simulate::{monte_carlo_displacement, periodogram, sample_quadrature_process};
use kwm::spectra::{
    autocov_to_spectrum, decompose_and_diagnose, design_spectrum, marginal_spectra,
    photon_numbers, spectrum_to_autocov, validate_spectrum, DesignField, SpectralMeasure,
};
use kwm::symplectic::{
    check_uncertainty, purity_determinant_check, Location, QuantumCovarianceMatrix, DEFAULT_TOL,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn ints(v: impl IntoIterator<Item = i64>) -> Vec<GroupElement> {
    v.into_iter().map(GroupElement::int).collect()
}

fn eye(n: usize) -> RMat {
    RMat::identity(n, n)
}

fn max_diff(a: &[CMat], b: &[CMat]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| (x - y).iter().map(|z| z.norm()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

fn uncertainty_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut agree, mut worst, mut invalid) = (0, 0.0_f64, 0);
    for i in 0..500 {
        let k = 1 + i % 4;
        let d = 2 * k;
        // straddle the boundary: scaled pure-state covariance plus symmetric noise
        let base = random_quantum_covariance(&mut rng, k) * rng.random_range(0.6..1.4);
        let e = gaussian_matrix(&mut rng, d, d) * rng.random_range(0.0..0.2);
        let m = base + (&e + e.transpose()) * 0.5;
        let report = check_uncertainty(&QuantumCovarianceMatrix::single_site(m.clone()).unwrap(), DEFAULT_TOL).unwrap();
        let h = complex(&m) + half_j(k);
        let lambda = hermitian_min_eigenvalue(&h);
        let scale = 1.0 + m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
        let oracle_valid = lambda >= -DEFAULT_TOL * scale;
        agree += usize::from(oracle_valid == report.is_valid());
        invalid += usize::from(!oracle_valid);
        worst = worst.max((report.margin - lambda / scale).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        agree == 500 && worst <= 1e-10 && elapsed < Duration::from_secs(5),
        format!("verdict agreement {agree}/500 ({invalid} invalid), margin diff {worst:.2e}, {elapsed:.2?}"),
    )
}

fn boundary_fixture() -> Outcome {
    let z = GroupDescriptor::integers(64).unwrap();
    let vacuum = AutocovarianceMap::vacuum(z.clone(), 1).unwrap();
    let mut vac_ok = true;
    let mut worst = 0.0_f64;
    let mut windows: Vec<Vec<GroupElement>> = (1..=8).map(|s| ints(0..s)).collect();
    windows.push(ints([0, 3, 7, 12, 20, 30]));
    windows.push(ints([-5, -1, 2, 9, 10, 11, 15, 25]));
    for w in &windows {
        let r = validate_quantum_kernel(&vacuum, w, DEFAULT_TOL).unwrap();
        vac_ok &= r.is_valid();
        worst = worst.max(r.min_eigenvalue.abs());
    }
    vac_ok &= worst <= 1e-10;

    let half = eye(2) * 0.5;
    let correlated =
        AutocovarianceMap::new(z, 1, [-1, 0, 1].map(|a| (GroupElement::int(a), half.clone()))).unwrap();
    let r = validate_quantum_kernel(&correlated, &ints(0..2), DEFAULT_TOL).unwrap();
    let value = r.certificate.as_ref().map_or(f64::NAN, |c| c.value);
    let cert_ok = !r.is_valid() && (value + 1.0).abs() <= 1e-9;
    outcome(
        vac_ok && cert_ok,
        format!(
            "vacuum valid on {} windows (max |min eig| {worst:.1e}); correlated {:?}, certificate u†Hu = {value:.12} (target −1)",
            windows.len(),
            r.verdict
        ),
    )
}

/// Random point-mass spectrum on a finite group, roughly half of them invalid.
fn random_finite_measure(rng: &mut ChaCha8Rng, group: GroupDescriptor, k: usize) -> SpectralMeasure {
    let slack = rng.random_range(-0.15..0.05);
    random_grid_spectrum(rng, group, k, slack)
}

fn subset_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut agree, mut invalid) = (0, 0);
    for i in 0..50 {
        let n = 2 + i % 7;
        let k = 1 + (i / 7) % 2;
        let group = GroupDescriptor::cyclic(&[n as u64]).unwrap();
        let s = random_finite_measure(&mut rng, group.clone(), k);
        let verdict = validate_spectrum(&s, DEFAULT_TOL).unwrap().is_valid();
        // Φ(S) + (i/2)λ(S)J over every subset of the dual, with Φ_m = F_m / N.
        let masses: Vec<CMat> = s.grid_values().iter().map(|f| f / Complex64::new(n as f64, 0.0)).collect();
        let hj = half_j(k);
        let mut brute = true;
        for mask in 1u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
            let points: Vec<_> = idx.iter().map(|&j| group.dual_point(j)).collect();
            let lambda = group.haar_weight(&kwm::groups::DualSubset::Points(points)).unwrap();
            let mut phi = CMat::zeros(2 * k, 2 * k);
            for &j in &idx {
                phi += &masses[j];
            }
            let h = &phi + &hj * Complex64::new(lambda, 0.0);
            // the pointwise threshold on F = N·Φ, rescaled by λ(S)
            let scale = lambda + inf_norm_c(&phi);
            if hermitian_min_eigenvalue(&h) < -DEFAULT_TOL * scale {
                brute = false;
                break;
            }
        }
        agree += usize::from(brute == verdict);
        invalid += usize::from(!brute);
    }
    let elapsed = start.elapsed();
    outcome(
        agree == 50 && elapsed < Duration::from_secs(30),
        format!("verdict agreement {agree}/50 ({invalid} invalid), {elapsed:.2?}"),
    )
}

fn fourier_roundtrip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0_f64;
    let groups: Vec<Vec<u64>> = vec![vec![1], vec![2], vec![7], vec![16], vec![64], vec![4, 4], vec![2, 3, 5], vec![8, 8]];
    let mut cases = 0;
    for moduli in &groups {
        for k in 1..=3 {
            let group = GroupDescriptor::cyclic(moduli).unwrap();
            let slack = rng.random_range(-0.5..0.5);
            let s = random_grid_spectrum(&mut rng, group.clone(), k, slack);
            let kernel = spectrum_to_autocov(&s, &group.elements().unwrap()).unwrap();
            let back = autocov_to_spectrum(&kernel).unwrap();
            worst = worst.max(max_diff(&s.grid_values(), &back.grid_values()));
            cases += 1;
        }
    }
    for k in 1..=3 {
        for support in [0_i64, 1, 3, 6] {
            let d = 2 * k;
            let group = GroupDescriptor::integers(64).unwrap();
            let coeffs: Vec<(i64, CMat)> = (0..=support)
                .map(|a| {
                    let c = gaussian_matrix(&mut rng, d, d);
                    let c = if a == 0 { (&c + c.transpose()) * 0.5 } else { c };
                    (a, complex(&c))
                })
                .collect();
            let s = SpectralMeasure::from_fourier(group, d, coeffs, Vec::new()).unwrap();
            let kernel = spectrum_to_autocov(&s, &ints(-support..=support)).unwrap();
            let back = autocov_to_spectrum(&kernel).unwrap();
            worst = worst.max(max_diff(&s.grid_values(), &back.grid_values()));
            for theta in [0.0, 0.3, 1.7, PI, 5.9] {
                let (a, b) = (s.evaluate_fourier(theta).unwrap(), back.evaluate_fourier(theta).unwrap());
                worst = worst.max((a - b).iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
            cases += 1;
        }
    }
    outcome(worst <= 1e-10, format!("{cases} cases, max deviation {worst:.2e}"))
}

/// The fixed family of 100 valid spectra shared by two criteria: 50 on finite
/// cyclic groups, 50 on the integers (half of those with atom pairs).
fn valid_spectra() -> Vec<SpectralMeasure> {
    let mut rng = ChaCha8Rng::seed_from_u64(97);
    let mut out = Vec::with_capacity(100);
    for i in 0..50 {
        let n = 2 + i % 7;
        let k = 1 + i % 2;
        let group = GroupDescriptor::cyclic(&[n as u64]).unwrap();
        let slack = rng.random_range(0.0..0.2);
        out.push(random_grid_spectrum(&mut rng, group, k, slack));
    }
    for i in 0..50 {
        let k = 1 + i % 3;
        let group = GroupDescriptor::integers(64).unwrap();
        let slack = rng.random_range(0.0..0.2);
        let s = random_grid_spectrum(&mut rng, group.clone(), k, slack);
        if i % 2 == 1 {
            let atoms = random_atom_pair(&mut rng, 2 * k);
            out.push(SpectralMeasure::from_grid(group, 2 * k, s.grid_values(), atoms).unwrap());
        } else {
            out.push(s);
        }
    }
    out
}

fn windows_up_to_six(group: &GroupDescriptor, rng: &mut ChaCha8Rng) -> Vec<Vec<GroupElement>> {
    if group.is_finite() {
        let elements = group.elements().unwrap();
        let n = elements.len();
        (1u32..(1 << n))
            .filter(|m| m.count_ones() <= 6)
            .map(|m| (0..n).filter(|j| m >> j & 1 == 1).map(|j| elements[j].clone()).collect())
            .collect()
    } else {
        let mut w: Vec<Vec<GroupElement>> = (1..=6).map(|s| ints(0..s)).collect();
        for _ in 0..20 {
            let size = rng.random_range(2..=6);
            let mut sites: Vec<i64> = Vec::new();
            while sites.len() < size {
                let a = rng.random_range(0..31);
                if !sites.contains(&a) {
                    sites.push(a);
                }
            }
            w.push(ints(sites));
        }
        w
    }
}

fn sufficiency(spectra: &[SpectralMeasure]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let (mut failures, mut checked, mut bad_spectra) = (0, 0, 0);
    for s in spectra {
        bad_spectra += usize::from(!validate_spectrum(s, DEFAULT_TOL).unwrap().is_valid());
        let group = s.group().clone();
        let lags = if group.is_finite() { group.elements().unwrap() } else { ints(-30..=30) };
        let kernel = spectrum_to_autocov(s, &lags).unwrap();
        for w in windows_up_to_six(&group, &mut rng) {
            checked += 1;
            failures += usize::from(!validate_quantum_kernel(&kernel, &w, DEFAULT_TOL).unwrap().is_valid());
        }
    }
    outcome(
        failures == 0 && bad_spectra == 0,
        format!("{} spectra ({bad_spectra} not valid), {checked} windows, {failures} failures", spectra.len()),
    )
}

fn gap_fixture() -> Outcome {
    let group = GroupDescriptor::integers(64).unwrap();
    let in_gap = |t: f64| (PI / 2.0..PI).contains(&t) || (PI / 2.0..PI).contains(&(TAU - t));
    let values: Vec<CMat> = (0..64)
        .map(|j| {
            let theta = group.grid_angle(j);
            if in_gap(theta) { CMat::zeros(2, 2) } else { complex(&(eye(2) * 0.5)) }
        })
        .collect();
    let s = SpectralMeasure::from_grid(group.clone(), 2, values, Vec::new()).unwrap();
    let r = validate_spectrum(&s, DEFAULT_TOL).unwrap();
    let located = match r.certificate.as_ref().and_then(|c| c.location.clone()) {
        Some(Location::GridPoint { index, .. }) => in_gap(group.grid_angle(index)).then_some(index),
        _ => None,
    };
    outcome(
        !r.is_valid() && located.is_some() && (r.margin + 0.5).abs() <= 1e-9,
        format!("{:?}, margin {:.12}, certificate at grid index {located:?}", r.verdict, r.margin),
    )
}

fn purity_bound(spectra: &[SpectralMeasure]) -> Outcome {
    let mut violations = 0;
    let mut points = 0;
    for s in spectra {
        let k = s.modes().unwrap();
        for f in s.grid_values() {
            points += 1;
            // independent determinant of the real part
            let det = f.map(|z| z.re).determinant();
            violations += usize::from(det < 0.25_f64.powi(k as i32) - DEFAULT_TOL);
        }
        violations += decompose_and_diagnose(s, DEFAULT_TOL).unwrap().purity.violations.len();
    }
    let group = GroupDescriptor::integers(64).unwrap();
    let thin = SpectralMeasure::flat(group, complex(&(eye(2) * 0.4))).unwrap();
    let thin_refused = !validate_spectrum(&thin, DEFAULT_TOL).unwrap().is_valid();
    let thin_det = !purity_determinant_check(&complex(&(eye(2) * 0.4)), 1, DEFAULT_TOL).unwrap().ok;
    outcome(
        violations == 0 && thin_refused && thin_det,
        format!(
            "{points} grid points, {violations} violations; diag(0.4,0.4): validate refused {thin_refused}, det check failed {thin_det}"
        ),
    )
}

fn displacement_monte_carlo() -> Outcome {
    let start = Instant::now();
    let z = GroupDescriptor::integers(64).unwrap();
    let vacuum = AutocovarianceMap::vacuum(z.clone(), 1).unwrap();
    let noise = ClassicalCovarianceKernel::new(AutocovarianceMap::white(z, eye(2)).unwrap());
    let mut within = 0;
    for seed in 0..20 {
        let report = monte_carlo_displacement(&vacuum, &noise, &ints(0..2), 100_000, seed, DEFAULT_TOL).unwrap();
        within += usize::from(report.within(5.0));
    }
    let elapsed = start.elapsed();
    outcome(
        within >= 19 && elapsed < Duration::from_secs(20),
        format!("{within}/20 seeds within 5 standard errors, {elapsed:.2?}"),
    )
}

fn photon_fixtures() -> Outcome {
    let group = GroupDescriptor::integers(64).unwrap();
    let diag = |a: f64, b: f64| complex(&RMat::from_row_slice(2, 2, &[a, 0.0, 0.0, b]));
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, f, expected) in [
        ("vacuum", diag(0.5, 0.5), 0.0),
        ("thermal", diag(1.5, 1.5), 1.0),
        ("squeezed", diag(2.0, 0.125), 0.5625),
    ] {
        let s = SpectralMeasure::flat(group.clone(), f).unwrap();
        let n = photon_numbers(&s).unwrap().per_mode[0];
        pass &= (n - expected).abs() <= 1e-12;
        parts.push(format!("{name} {n}"));
    }
    outcome(pass, parts.join(", "))
}

fn periodogram_consistency() -> Outcome {
    let group = GroupDescriptor::integers(8192).unwrap();
    let designed = design_spectrum(&group, &DesignField::Constant(eye(2) * 0.5), None, DEFAULT_TOL).unwrap();
    let (phi_q, _) = marginal_spectra(&designed).unwrap();
    let path = sample_quadrature_process(&phi_q, 4096, 2024).unwrap();
    let p = periodogram(&path, 16).unwrap();
    let avg = p.values.iter().map(|m| m[(0, 0)].re).sum::<f64>() / p.values.len() as f64;
    outcome((avg - 0.5).abs() <= 0.1, format!("bin-averaged estimate {avg:.4} over {} bins", p.values.len()))
}

fn main() -> ExitCode {
    let spectra = valid_spectra();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("uncertainty check vs dense eigensolver", Box::new(uncertainty_oracle)),
        ("vacuum boundary and correlated certificate", Box::new(boundary_fixture)),
        ("subset enumeration vs pointwise check", Box::new(subset_oracle)),
        ("Fourier roundtrip", Box::new(fourier_roundtrip)),
        ("valid spectra give valid kernels", Box::new(|| sufficiency(&spectra))),
        ("gapped density refused inside the gap", Box::new(gap_fixture)),
        ("determinant floor", Box::new(|| purity_bound(&spectra))),
        ("displacement Monte Carlo", Box::new(displacement_monte_carlo)),
        ("photon numbers", Box::new(photon_fixtures)),
        ("periodogram consistency", Box::new(periodogram_consistency)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += usize::from(!o.pass);
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
