//! JSON encodings of kernels, spectra and design inputs, and the window/lag
//! list syntax used on the command line.
//!
//! Kernel: `{"k": 1, "group": {...}, "lags": [{"a": 0, "matrix": [[...]]}, ...]}`
//! with real row-major matrices. Spectrum: `{"k": 1, "group": {...}, "density":
//! {...}, "atoms": [{"theta": 1.57, "weight": [[...]]}]}` where complex entries
//! are `[re, im]` pairs (plain numbers are read as real). The density is one of
//! `{"form": "grid", "values": [...]}`, `{"form": "fourier", "values":
//! [{"a": 0, "matrix": ...}]}` or, on finite groups, `{"form": "masses",
//! "values": [...]}` listing the point masses `Φ_m`. A group is
//! `{"kind": "Z", "moduli": [], "dual_grid_size": 256}` or `{"kind": "ZN", "moduli": [4, 2]}`.
//!
//! Readers also accept a CLI report envelope and decode its `data` field.

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::groups::{GroupDescriptor, GroupElement, GroupKind};
use crate::kernels::AutocovarianceMap;
use crate::linalg::{CMat, RMat};
use crate::serde_util::{cmat_rows, rmat_rows};
use crate::spectra::{Atom, DesignField, Density, SpectralMeasure};

/// Grid size used for ℤ when a group omits `dual_grid_size`.
pub const DEFAULT_GRID: usize = 256;

/// Largest absolute coordinate accepted in lags, windows and group elements.
pub const MAX_COORD: i64 = 1 << 40;

/// Largest number of sites in a parsed window or lag list.
pub const MAX_LIST: usize = 1 << 16;

/// Largest matrix order accepted from JSON.
const MAX_DIM: usize = 256;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupSpec {
    kind: GroupKind,
    #[serde(default)]
    moduli: Option<Vec<u64>>,
    #[serde(default)]
    dual_grid_size: Option<usize>,
}

impl GroupSpec {
    fn build(&self) -> Result<GroupDescriptor> {
        match self.kind {
            GroupKind::IntegerGroup => {
                if self.moduli.as_ref().is_some_and(|m| !m.is_empty()) {
                    return Err(Error::Parse("the integer group takes no moduli".into()));
                }
                GroupDescriptor::integers(self.dual_grid_size.unwrap_or(DEFAULT_GRID))
            }
            GroupKind::FiniteCyclicProduct => {
                let moduli = self
                    .moduli
                    .as_ref()
                    .ok_or_else(|| Error::Parse("finite group needs \"moduli\"".into()))?;
                let g = GroupDescriptor::cyclic(moduli)?;
                if let Some(n) = self.dual_grid_size {
                    if n != g.dual_grid_size() {
                        return Err(Error::Parse(format!(
                            "dual_grid_size {n} disagrees with the group order {}",
                            g.dual_grid_size()
                        )));
                    }
                }
                Ok(g)
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Coord {
    One(i64),
    Many(Vec<i64>),
}

impl Coord {
    fn element(&self) -> Result<GroupElement> {
        let coords = match self {
            Coord::One(a) => vec![*a],
            Coord::Many(v) => v.clone(),
        };
        if coords.is_empty() || coords.iter().any(|c| c.abs() > MAX_COORD) {
            return Err(Error::Parse(format!(
                "group element coordinates must be nonempty and within ±{MAX_COORD}"
            )));
        }
        Ok(GroupElement(coords))
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(&self) -> Complex64 {
        match self {
            Entry::Real(x) => Complex64::new(*x, 0.0),
            Entry::Complex([re, im]) => Complex64::new(*re, *im),
        }
    }
}

fn check_shape<T>(rows: &[Vec<T>], what: &str) -> Result<(usize, usize)> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if n == 0 || n > MAX_DIM || rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse(format!("{what}: matrix must be nonempty and rectangular")));
    }
    Ok((n, m))
}

fn real_matrix(rows: &[Vec<f64>], what: &str) -> Result<RMat> {
    let (n, m) = check_shape(rows, what)?;
    Ok(RMat::from_fn(n, m, |i, j| rows[i][j]))
}

fn complex_matrix(rows: &[Vec<Entry>], what: &str) -> Result<CMat> {
    let (n, m) = check_shape(rows, what)?;
    Ok(CMat::from_fn(n, m, |i, j| rows[i][j].value()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LagEntry {
    a: Coord,
    matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelDoc {
    k: usize,
    group: GroupSpec,
    lags: Vec<LagEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoefficientEntry {
    a: i64,
    matrix: Vec<Vec<Entry>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase", deny_unknown_fields)]
enum DensityDoc {
    Grid { values: Vec<Vec<Vec<Entry>>> },
    Fourier {
        #[serde(alias = "coefficients")]
        values: Vec<CoefficientEntry>,
    },
    Masses { values: Vec<Vec<Vec<Entry>>> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomDoc {
    theta: f64,
    weight: Vec<Vec<Entry>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumDoc {
    #[serde(default)]
    k: Option<usize>,
    #[serde(default)]
    dim: Option<usize>,
    group: GroupSpec,
    density: DensityDoc,
    #[serde(default)]
    atoms: Vec<AtomDoc>,
}

/// The `data` field of a report envelope, or the value itself.
fn unwrap_envelope(v: Value) -> Value {
    match v {
        Value::Object(mut map) if map.contains_key("verdict") && map.contains_key("data") => {
            map.remove("data").unwrap_or(Value::Null)
        }
        other => other,
    }
}

fn parse_value(text: &str) -> Result<Value> {
    Ok(unwrap_envelope(serde_json::from_str(text)?))
}

fn spectrum_dim(k: Option<usize>, dim: Option<usize>) -> Result<usize> {
    let d = match (k, dim) {
        (Some(k), None) => k.checked_mul(2),
        (None, Some(d)) => Some(d),
        (Some(k), Some(d)) if k.checked_mul(2) == Some(d) => Some(d),
        _ => None,
    };
    match d {
        Some(d) if d > 0 && d <= MAX_DIM => Ok(d),
        _ => Err(Error::Parse("give \"k\" (modes) or a consistent \"dim\"".into())),
    }
}

pub fn kernel_from_value(v: Value) -> Result<AutocovarianceMap> {
    let doc: KernelDoc = serde_json::from_value(unwrap_envelope(v))?;
    if doc.k == 0 || doc.k > MAX_DIM / 2 {
        return Err(Error::Parse(format!("unsupported number of modes {}", doc.k)));
    }
    let group = doc.group.build()?;
    let entries = doc
        .lags
        .iter()
        .map(|l| {
            let a = l.a.element()?;
            Ok((a.clone(), real_matrix(&l.matrix, &format!("lag {a}"))?))
        })
        .collect::<Result<Vec<_>>>()?;
    AutocovarianceMap::new(group, doc.k, entries)
}

pub fn parse_kernel(text: &str) -> Result<AutocovarianceMap> {
    kernel_from_value(parse_value(text)?)
}

pub fn spectrum_from_value(v: Value) -> Result<SpectralMeasure> {
    let doc: SpectrumDoc = serde_json::from_value(unwrap_envelope(v))?;
    let dim = spectrum_dim(doc.k, doc.dim)?;
    let group = doc.group.build()?;
    let atoms = doc
        .atoms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            Ok(Atom {
                theta: a.theta,
                weight: complex_matrix(&a.weight, &format!("atom {i}"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let table = |values: &[Vec<Vec<Entry>>]| -> Result<Vec<CMat>> {
        values
            .iter()
            .enumerate()
            .map(|(j, m)| complex_matrix(m, &format!("grid value {j}")))
            .collect()
    };
    match &doc.density {
        DensityDoc::Grid { values } => SpectralMeasure::from_grid(group, dim, table(values)?, atoms),
        DensityDoc::Masses { values } => {
            if !atoms.is_empty() {
                return Err(Error::Parse("a mass table carries no separate atoms".into()));
            }
            let masses = table(values)?;
            if masses.iter().any(|m| m.nrows() != dim) {
                return Err(Error::Parse(format!("masses must be {dim}x{dim}")));
            }
            SpectralMeasure::from_finite_masses(group, masses)
        }
        DensityDoc::Fourier { values } => {
            let coeffs = values
                .iter()
                .map(|c| {
                    if c.a.abs() > MAX_COORD {
                        return Err(Error::Parse(format!("coefficient index {} out of range", c.a)));
                    }
                    Ok((c.a, complex_matrix(&c.matrix, &format!("coefficient {}", c.a))?))
                })
                .collect::<Result<Vec<_>>>()?;
            SpectralMeasure::from_fourier(group, dim, coeffs, atoms)
        }
    }
}

pub fn parse_spectrum(text: &str) -> Result<SpectralMeasure> {
    spectrum_from_value(parse_value(text)?)
}

pub fn group_to_value(group: &GroupDescriptor) -> Value {
    match group.kind() {
        GroupKind::IntegerGroup => json!({"kind": "Z", "moduli": [], "dual_grid_size": group.dual_grid_size()}),
        GroupKind::FiniteCyclicProduct => json!({
            "kind": "ZN",
            "moduli": group.moduli(),
            "dual_grid_size": group.dual_grid_size(),
        }),
    }
}

pub fn kernel_to_value(kernel: &AutocovarianceMap) -> Value {
    let lags: Vec<Value> = kernel
        .entries()
        .map(|(a, m)| json!({"a": a, "matrix": rmat_rows(m)}))
        .collect();
    json!({"k": kernel.modes(), "group": group_to_value(kernel.group()), "lags": lags})
}

pub fn spectrum_to_value(spectrum: &SpectralMeasure) -> Value {
    let density = match spectrum.density() {
        Density::Grid(values) => {
            let v: Vec<_> = values.iter().map(cmat_rows).collect();
            json!({"form": "grid", "values": v})
        }
        Density::Fourier(table) => {
            let c: Vec<Value> = table
                .iter()
                .map(|(a, m)| json!({"a": a, "matrix": cmat_rows(m)}))
                .collect();
            json!({"form": "fourier", "values": c})
        }
    };
    let atoms: Vec<Value> = spectrum
        .atoms()
        .iter()
        .map(|a| json!({"theta": a.theta, "weight": cmat_rows(&a.weight)}))
        .collect();
    let mut out = json!({
        "group": group_to_value(spectrum.group()),
        "density": density,
        "atoms": atoms,
    });
    if spectrum.dim() % 2 == 0 {
        out["k"] = json!(spectrum.dim() / 2);
    } else {
        out["dim"] = json!(spectrum.dim());
    }
    out
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum FieldDoc {
    Constant(Vec<Vec<f64>>),
    Grid(Vec<Vec<Vec<f64>>>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignDoc {
    group: GroupSpec,
    field: FieldDoc,
    #[serde(default)]
    psi: Option<Value>,
}

/// Design input `{"group": {...}, "field": {"constant": M} | {"grid": [M_j...]},
/// "psi": <spectrum>}`; `psi` is optional and uses the spectrum format.
pub struct DesignInput {
    pub group: GroupDescriptor,
    pub field: DesignField,
    pub psi: Option<SpectralMeasure>,
}

pub fn parse_design(text: &str) -> Result<DesignInput> {
    let doc: DesignDoc = serde_json::from_value(parse_value(text)?)?;
    let group = doc.group.build()?;
    let field = match &doc.field {
        FieldDoc::Constant(m) => DesignField::Constant(real_matrix(m, "field")?),
        FieldDoc::Grid(v) => DesignField::Grid(
            v.iter()
                .enumerate()
                .map(|(j, m)| real_matrix(m, &format!("field value {j}")))
                .collect::<Result<_>>()?,
        ),
    };
    let psi = doc.psi.map(spectrum_from_value).transpose()?;
    Ok(DesignInput { group, field, psi })
}

fn parse_int(s: &str) -> Result<i64> {
    let v: i64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("invalid integer {s:?}")))?;
    if v.abs() > MAX_COORD {
        return Err(Error::Parse(format!("{v} is outside ±{MAX_COORD}")));
    }
    Ok(v)
}

/// Parses `a..b` (inclusive), a comma-separated list, or a list of
/// colon-separated coordinates such as `0:0,0:1,1:0` for product groups.
pub fn parse_element_list(spec: &str) -> Result<Vec<GroupElement>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(Error::Parse("empty site list".into()));
    }
    if let Some((lo, hi)) = spec.split_once("..") {
        let (lo, hi) = (parse_int(lo)?, parse_int(hi)?);
        if hi < lo {
            return Err(Error::Parse(format!("empty range {spec:?}")));
        }
        if (hi - lo) as u64 >= MAX_LIST as u64 {
            return Err(Error::Parse(format!("range {spec:?} is too long")));
        }
        return Ok((lo..=hi).map(GroupElement::int).collect());
    }
    let items: Vec<&str> = spec.split(',').collect();
    if items.len() > MAX_LIST {
        return Err(Error::Parse("site list is too long".into()));
    }
    let out = items
        .iter()
        .map(|item| {
            let coords = item.split(':').map(parse_int).collect::<Result<Vec<_>>>()?;
            Ok(GroupElement(coords))
        })
        .collect::<Result<Vec<_>>>()?;
    let rank = out[0].0.len();
    if out.iter().any(|e| e.0.len() != rank) {
        return Err(Error::Parse("sites have differing numbers of coordinates".into()));
    }
    Ok(out)
}
