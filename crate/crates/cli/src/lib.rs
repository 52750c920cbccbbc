//! Command-line front end: every subcommand prints a JSON report
//! `{"verdict", "margins", "data"}` on stdout and a one-line summary on stderr.
//!
//! Exit codes: 0 valid or success, 1 mathematically invalid input (the report
//! carries the certificate), 2 usage, parse or numeric error.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use kwm::groups::GroupElement;
use kwm::io::{self as kio, parse_element_list};
use kwm::kernels::{validate_quantum_kernel, window_sweep, AutocovarianceMap, ClassicalCovarianceKernel};
use kwm::simulate::{
    monte_carlo_displacement, periodogram, read_paths_csv, sample_quadrature_process_with,
    write_paths_csv, PathLayout, Quadrature, SamplingMethod,
};
use kwm::spectra::{
    autocov_to_spectrum, decompose_and_diagnose, design_spectrum, marginal_spectra,
    mixing_diagnostics, photon_numbers, scalar_spectrum, spectrum_to_autocov, validate_spectrum,
    SpectralMeasure,
};
use kwm::symplectic::{ValidationReport, DEFAULT_TOL};
use kwm::Error;

/// Environment variable overriding the default tolerance.
pub const TOL_ENV: &str = "KWM_TOL";

/// Largest window validated in one call.
const MAX_WINDOW: usize = 512;

#[derive(Debug, Parser)]
#[command(name = "kwm", version, about = "Covariance kernels and spectral measures of stationary quantum processes")]
struct Cli {
    /// Validation tolerance (overrides KWM_TOL; default 1e-9).
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct InputArg {
    /// Input file; stdin when absent or `-`.
    #[arg(long, short)]
    input: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Component {
    Q,
    P,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Spectral,
    Cholesky,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Layout {
    Long,
    Wide,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the quantum kernel condition on a window or a sweep of windows.
    ValidateKernel {
        #[command(flatten)]
        input: InputArg,
        /// `a..b` (inclusive) or a comma list; `x:y` coordinates for product groups.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "sweep")]
        window: Option<String>,
        /// Validate windows {0}, {0,1}, ... up to this size.
        #[arg(long)]
        sweep: Option<usize>,
    },
    /// Check the pointwise spectral conditions.
    ValidateSpectrum {
        #[command(flatten)]
        input: InputArg,
    },
    /// Kernel to spectrum.
    ToSpectrum {
        #[command(flatten)]
        input: InputArg,
    },
    /// Spectrum to kernel at the given lags.
    ToKernel {
        #[command(flatten)]
        input: InputArg,
        /// Lags, same syntax as windows; default -8..8 on the integers, all lags on finite groups.
        #[arg(long, allow_hyphen_values = true)]
        lags: Option<String>,
    },
    /// Build a spectrum from a covariance field and an optional classical part.
    Design {
        #[command(flatten)]
        input: InputArg,
    },
    /// Mean photon number per mode.
    PhotonNumbers {
        #[command(flatten)]
        input: InputArg,
    },
    /// Spectral diagnostics: masses, purity bound, log-det integral, gaps, mixing.
    Diagnose {
        #[command(flatten)]
        input: InputArg,
        /// Coefficients of a scalar process `Σ c_r X_r`, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        coeffs: Option<String>,
        /// Include the position and momentum marginal spectra.
        #[arg(long)]
        marginals: bool,
    },
    /// Monte Carlo check that classical displacement noise adds its covariance.
    SimulateDisplacement {
        #[command(flatten)]
        input: InputArg,
        /// Classical kernel file.
        #[arg(long)]
        classical: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value = "0..1")]
        window: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sample a q- or p-quadrature path from a spectrum.
    SampleQuadrature {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, value_enum, default_value = "q")]
        component: Component,
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "spectral")]
        method: Method,
        #[arg(long, value_enum, default_value = "long")]
        layout: Layout,
        /// CSV destination.
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Bartlett periodogram of sampled paths.
    Periodogram {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, default_value_t = 16)]
        segments: usize,
        /// CSV destination.
        #[arg(long, short)]
        output: PathBuf,
    },
}

/// Result of a successful command.
struct Outcome {
    verdict: &'static str,
    margins: Value,
    data: Value,
    summary: String,
}

impl Outcome {
    fn ok(data: Value, summary: impl Into<String>) -> Self {
        Outcome {
            verdict: "ok",
            margins: json!({}),
            data,
            summary: summary.into(),
        }
    }

    fn exit_code(&self) -> i32 {
        if self.verdict == "invalid" {
            1
        } else {
            0
        }
    }
}

fn report_margins(r: &ValidationReport) -> Value {
    json!({"min_eigenvalue": r.min_eigenvalue, "margin": r.margin})
}

fn from_report(report: &ValidationReport, data: Value) -> Outcome {
    Outcome {
        verdict: if report.is_valid() { "valid" } else { "invalid" },
        margins: report_margins(report),
        data,
        summary: report.summary(),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// I/O handles and environment seen by [`run`].
pub struct Context<'a> {
    pub stdin: &'a mut dyn Read,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
    /// Value of `KWM_TOL`, if set.
    pub env_tol: Option<String>,
}

fn read_input(ctx: &mut Context<'_>, input: &InputArg) -> Result<String, Error> {
    match &input.input {
        Some(p) if p.as_os_str() != "-" => read_file(p),
        _ => {
            let mut s = String::new();
            ctx.stdin
                .read_to_string(&mut s)
                .map_err(|e| Error::Parse(format!("reading stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn read_file(p: &Path) -> Result<String, Error> {
    fs::read_to_string(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))
}

fn create_file(p: &Path) -> Result<fs::File, Error> {
    fs::File::create(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))
}

fn resolve_tol(flag: Option<f64>, env: Option<&str>) -> Result<f64, Error> {
    let tol = match (flag, env) {
        (Some(t), _) => t,
        (None, Some(s)) => s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{TOL_ENV}={s:?} is not a number")))?,
        (None, None) => DEFAULT_TOL,
    };
    if tol.is_finite() && tol > 0.0 {
        Ok(tol)
    } else {
        Err(Error::Parse(format!("tolerance must be positive, got {tol}")))
    }
}

fn parse_coeffs(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("invalid coefficient {x:?}")))
        })
        .collect()
}

fn validate_kernel_cmd(
    kernel: &AutocovarianceMap,
    window: Option<&str>,
    sweep: Option<usize>,
    tol: f64,
) -> Result<Outcome, Error> {
    let group = kernel.group();
    let window: Option<Vec<GroupElement>> = match window {
        Some(w) => Some(parse_element_list(w)?),
        None if sweep.is_none() && group.is_finite() => Some(group.elements()?),
        None => None,
    };
    if let Some(w) = window {
        if w.len() > MAX_WINDOW {
            return Err(Error::Unsupported(format!("windows are limited to {MAX_WINDOW} sites")));
        }
        let report = validate_quantum_kernel(kernel, &w, tol)?;
        let sites: Vec<String> = w.iter().map(|s| s.to_string()).collect();
        return Ok(from_report(&report, json!({"window": sites, "report": to_value(&report)})));
    }
    let size = sweep.unwrap_or(8);
    if size == 0 || size > MAX_WINDOW {
        return Err(Error::Unsupported(format!("sweep size must be in 1..={MAX_WINDOW}")));
    }
    let results = window_sweep(kernel, size, tol)?;
    let first_failure = results.iter().find(|(_, r)| !r.is_valid());
    let (_, worst) = first_failure.unwrap_or_else(|| results.last().expect("nonempty sweep"));
    let rows: Vec<Value> = results
        .iter()
        .map(|(s, r)| json!({"size": s, "valid": r.is_valid(), "min_eigenvalue": r.min_eigenvalue, "margin": r.margin}))
        .collect();
    let mut out = from_report(
        worst,
        json!({
            "sweep": rows,
            "first_failing_size": first_failure.map(|(s, _)| *s),
            "report": to_value(worst),
        }),
    );
    out.summary = format!("sweep up to size {size}: {}", worst.summary());
    Ok(out)
}

fn default_lags(spectrum: &SpectralMeasure) -> Vec<GroupElement> {
    if spectrum.group().is_finite() {
        Vec::new()
    } else {
        (-8..=8).map(GroupElement::int).collect()
    }
}

fn checked_spectrum(text: &str, tol: f64) -> Result<(SpectralMeasure, ValidationReport), Error> {
    let spectrum = kio::parse_spectrum(text)?;
    let report = validate_spectrum(&spectrum, tol)?;
    Ok((spectrum, report))
}

fn execute(cli: Cli, ctx: &mut Context<'_>) -> Result<Outcome, Error> {
    let tol = resolve_tol(cli.tol, ctx.env_tol.as_deref())?;
    match cli.command {
        Command::ValidateKernel { input, window, sweep } => {
            let kernel = kio::parse_kernel(&read_input(ctx, &input)?)?;
            validate_kernel_cmd(&kernel, window.as_deref(), sweep, tol)
        }
        Command::ValidateSpectrum { input } => {
            let (_, report) = checked_spectrum(&read_input(ctx, &input)?, tol)?;
            Ok(from_report(&report, json!({"report": to_value(&report)})))
        }
        Command::ToSpectrum { input } => {
            let kernel = kio::parse_kernel(&read_input(ctx, &input)?)?;
            let spectrum = autocov_to_spectrum(&kernel)?;
            Ok(Outcome::ok(kio::spectrum_to_value(&spectrum), "spectrum computed"))
        }
        Command::ToKernel { input, lags } => {
            let spectrum = kio::parse_spectrum(&read_input(ctx, &input)?)?;
            let lags = match lags {
                Some(l) => parse_element_list(&l)?,
                None => default_lags(&spectrum),
            };
            let kernel = spectrum_to_autocov(&spectrum, &lags)?;
            Ok(Outcome::ok(kio::kernel_to_value(&kernel), "kernel computed"))
        }
        Command::Design { input } => {
            let d = kio::parse_design(&read_input(ctx, &input)?)?;
            let spectrum = design_spectrum(&d.group, &d.field, d.psi.as_ref(), tol)?;
            let report = validate_spectrum(&spectrum, tol)?;
            Ok(from_report(&report, kio::spectrum_to_value(&spectrum)))
        }
        Command::PhotonNumbers { input } => {
            let (spectrum, report) = checked_spectrum(&read_input(ctx, &input)?, tol)?;
            if !report.is_valid() {
                return Err(Error::Invalid(Box::new(report)));
            }
            let photons = photon_numbers(&spectrum)?;
            let mut out = from_report(&report, to_value(&photons));
            out.summary = format!("total photon number {:.6}", photons.total);
            Ok(out)
        }
        Command::Diagnose { input, coeffs, marginals } => {
            let (spectrum, report) = checked_spectrum(&read_input(ctx, &input)?, tol)?;
            let diagnostics = decompose_and_diagnose(&spectrum, tol)?;
            let mixing = mixing_diagnostics(&spectrum, None, tol)?;
            let mut data = json!({
                "report": to_value(&report),
                "diagnostics": to_value(&diagnostics),
                "mixing": to_value(&mixing),
            });
            if let Some(c) = coeffs {
                data["scalar"] = to_value(&scalar_spectrum(&spectrum, &parse_coeffs(&c)?)?);
            }
            if marginals {
                let (q, p) = marginal_spectra(&spectrum)?;
                data["marginals"] = json!({
                    "q": kio::spectrum_to_value(&q),
                    "p": kio::spectrum_to_value(&p),
                });
            }
            let mut out = from_report(&report, data);
            out.margins["purity_min_det"] = json!(diagnostics.purity.min_det);
            Ok(out)
        }
        Command::SimulateDisplacement { input, classical, window, samples, seed } => {
            let kernel = kio::parse_kernel(&read_input(ctx, &input)?)?;
            let c = ClassicalCovarianceKernel::new(kio::parse_kernel(&read_file(&classical)?)?);
            let window = parse_element_list(&window)?;
            if window.len() > MAX_WINDOW {
                return Err(Error::Unsupported(format!("windows are limited to {MAX_WINDOW} sites")));
            }
            let r = monte_carlo_displacement(&kernel, &c, &window, samples, seed, tol)?;
            let summary = format!(
                "{} samples: max |error| {:.3e}, max error/SE {:.2}",
                r.n_samples, r.max_abs_error, r.max_error_ratio
            );
            Ok(Outcome {
                verdict: "ok",
                margins: json!({
                    "max_abs_error": r.max_abs_error,
                    "max_standard_error": r.max_standard_error,
                    "max_error_ratio": r.max_error_ratio,
                }),
                data: to_value(&r),
                summary,
            })
        }
        Command::SampleQuadrature { input, component, length, seed, method, layout, output } => {
            let (spectrum, report) = checked_spectrum(&read_input(ctx, &input)?, tol)?;
            if !report.is_valid() {
                return Err(Error::Invalid(Box::new(report)));
            }
            let (q, p) = marginal_spectra(&spectrum)?;
            let (marginal, quad) = match component {
                Component::Q => (q, Quadrature::Q),
                Component::P => (p, Quadrature::P),
            };
            let method = match method {
                Method::Spectral => SamplingMethod::Spectral,
                Method::Cholesky => SamplingMethod::Cholesky,
            };
            let paths = sample_quadrature_process_with(&marginal, length, seed, method)?;
            let layout = match layout {
                Layout::Long => PathLayout::Long,
                Layout::Wide => PathLayout::Wide,
            };
            write_paths_csv(create_file(&output)?, &paths, quad, layout)?;
            let variance: Vec<f64> = paths
                .row_iter()
                .map(|r| r.iter().map(|x| x * x).sum::<f64>() / length as f64)
                .collect();
            Ok(Outcome::ok(
                json!({
                    "output": output.display().to_string(),
                    "component": quad.label(),
                    "modes": paths.nrows(),
                    "length": length,
                    "seed": seed,
                    "empirical_variance": variance,
                }),
                format!("wrote {} x {length} {} path", paths.nrows(), quad.label()),
            ))
        }
        Command::Periodogram { input, segments, output } => {
            let text = read_input(ctx, &input)?;
            let (paths, _) = read_paths_csv(text.as_bytes())?;
            let p = periodogram(&paths, segments)?;
            p.write_csv(create_file(&output)?)?;
            let integral = p.integrate();
            let lag_zero: Vec<Vec<f64>> = integral
                .row_iter()
                .map(|r| r.iter().map(|z| z.re).collect())
                .collect();
            Ok(Outcome::ok(
                json!({
                    "output": output.display().to_string(),
                    "segments": segments,
                    "bins": p.thetas.len(),
                    "integrated": lag_zero,
                }),
                format!("{} bins from {segments} segments", p.thetas.len()),
            ))
        }
    }
}

fn emit(ctx: &mut Context<'_>, verdict: &str, margins: Value, data: Value, summary: &str) {
    let report = json!({"verdict": verdict, "margins": margins, "data": data});
    let text = serde_json::to_string_pretty(&report).expect("json value");
    let _ = writeln!(ctx.stdout, "{text}");
    let _ = writeln!(ctx.stderr, "{summary}");
}

/// Parses `args` (including the program name) and runs one subcommand.
pub fn run<I, T>(args: I, ctx: &mut Context<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(ctx.stdout, "{rendered}");
            } else {
                let _ = write!(ctx.stderr, "{rendered}");
            }
            return code;
        }
    };
    match execute(cli, ctx) {
        Ok(out) => {
            let code = out.exit_code();
            emit(ctx, out.verdict, out.margins, out.data, &out.summary);
            code
        }
        Err(Error::Invalid(report)) => {
            let summary = format!("refused: {}", report.summary());
            emit(ctx, "invalid", report_margins(&report), json!({"report": to_value(&*report)}), &summary);
            1
        }
        Err(e) => {
            let msg = e.to_string();
            emit(ctx, "error", json!({}), json!({"error": msg}), &format!("error: {msg}"));
            2
        }
    }
}
