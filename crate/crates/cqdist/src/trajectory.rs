//! Time-dependent states and density matrices: declarative specs with
//! expression-valued entries, exact-derivative sampling, purity
//! classification, and the built-in catalog of two-level examples.
//!
//! A spec is validated at construction on a 64-point Chebyshev grid over its
//! declared interval (plus the endpoints): density matrices must stay
//! Hermitian, unit-trace, and positive semidefinite; state vectors must stay
//! unit-norm. Strict mode rejects violations, warn mode logs them to stderr
//! and proceeds.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::cmatrix::{ComplexMatrix, ComplexVector, C64};
use crate::error::{Error, Result};
use crate::expr::{self, Expr};

/// Absolute tolerance for Hermiticity and unit-trace checks on samples.
pub const SAMPLE_TOL: f64 = 1e-10;
/// Minimum admissible eigenvalue of a sampled density matrix.
pub const PSD_TOL: f64 = -1e-10;
/// Default purity tolerance for pure/impure classification.
pub const PURITY_TOL: f64 = 1e-9;

const VALIDATION_GRID: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    Density,
    PureState,
}

/// What to do when a sampled value violates a state invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Validation {
    #[default]
    Strict,
    Warn,
}

/// One matrix or vector entry: a (re, im) pair of expressions in `t`.
#[derive(Debug, Clone)]
pub struct Cell {
    re: Expr,
    im: Expr,
}

impl Cell {
    pub fn new(re: Expr, im: Expr) -> Self {
        Self { re, im }
    }

    /// Parses a cell from expression sources; a missing `im` means zero.
    pub fn parse(re: &str, im: Option<&str>) -> Result<Self> {
        Ok(Self {
            re: expr::parse(re)?,
            im: match im {
                Some(src) => expr::parse(src)?,
                None => Expr::Const(0.0),
            },
        })
    }

    /// Real-valued cell.
    pub fn real(re: &str) -> Result<Self> {
        Self::parse(re, None)
    }

    fn eval(&self, t: f64, params: &BTreeMap<String, f64>) -> Result<(C64, C64)> {
        let re = expr::eval_dual(&self.re, t, params)?;
        let im = expr::eval_dual(&self.im, t, params)?;
        Ok((C64::new(re.value, im.value), C64::new(re.deriv, im.deriv)))
    }
}

/// A sampled trajectory point: the value and its entrywise d/dt.
#[derive(Debug, Clone)]
pub enum SampledPoint {
    Density {
        t: f64,
        rho: ComplexMatrix,
        rho_dot: ComplexMatrix,
    },
    Pure {
        t: f64,
        psi: ComplexVector,
        psi_dot: ComplexVector,
    },
}

/// Declarative time-dependent state or density matrix.
#[derive(Debug, Clone)]
pub struct TrajectorySpec {
    kind: TrajectoryKind,
    dim: usize,
    cells: Vec<Cell>,
    params: BTreeMap<String, f64>,
    label: String,
    interval: (f64, f64),
    validation: Validation,
}

impl TrajectorySpec {
    /// Builds and validates a density-matrix spec; `cells` is row-major
    /// dim×dim.
    pub fn density(
        label: &str,
        dim: usize,
        cells: Vec<Cell>,
        params: BTreeMap<String, f64>,
        interval: (f64, f64),
        validation: Validation,
    ) -> Result<Self> {
        if cells.len() != dim * dim {
            return Err(Error::Validation(format!(
                "density spec `{label}` needs {} cells, got {}",
                dim * dim,
                cells.len()
            )));
        }
        let spec = Self {
            kind: TrajectoryKind::Density,
            dim,
            cells,
            params,
            label: label.to_string(),
            interval,
            validation,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds and validates a pure-state spec; `cells` has length dim.
    pub fn pure_state(
        label: &str,
        dim: usize,
        cells: Vec<Cell>,
        params: BTreeMap<String, f64>,
        interval: (f64, f64),
        validation: Validation,
    ) -> Result<Self> {
        if cells.len() != dim {
            return Err(Error::Validation(format!(
                "pure-state spec `{label}` needs {dim} cells, got {}",
                cells.len()
            )));
        }
        let spec = Self {
            kind: TrajectoryKind::PureState,
            dim,
            cells,
            params,
            label: label.to_string(),
            interval,
            validation,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn kind(&self) -> TrajectoryKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    /// Returns a copy with one parameter overridden, re-validated.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        if !self.params.contains_key(name) {
            return Err(Error::Validation(format!(
                "spec `{}` has no parameter `{name}`",
                self.label
            )));
        }
        let mut out = self.clone();
        out.params.insert(name.to_string(), value);
        out.validate()?;
        Ok(out)
    }

    /// Returns a copy with a different interval, re-validated over it.
    pub fn with_interval(&self, t0: f64, t1: f64) -> Result<Self> {
        let mut out = self.clone();
        out.interval = (t0, t1);
        out.validate()?;
        Ok(out)
    }

    fn validate(&self) -> Result<()> {
        let (t0, t1) = self.interval;
        if !t0.is_finite() || !t1.is_finite() || t0 >= t1 {
            return Err(Error::Validation(format!(
                "spec `{}` has an invalid interval [{t0}, {t1}]",
                self.label
            )));
        }
        let mid = 0.5 * (t0 + t1);
        let half = 0.5 * (t1 - t0);
        let mut grid: Vec<f64> = (0..VALIDATION_GRID)
            .map(|k| {
                let angle =
                    std::f64::consts::PI * (2 * k + 1) as f64 / (2 * VALIDATION_GRID) as f64;
                mid + half * angle.cos()
            })
            .collect();
        grid.push(t0);
        grid.push(t1);

        for &t in &grid {
            let point = self.sample_raw(t)?;
            match &point {
                SampledPoint::Density { rho, rho_dot, .. } => {
                    self.report(rho.is_hermitian(SAMPLE_TOL), || {
                        format!("sampled matrix not Hermitian at t = {t}")
                    })?;
                    self.report(
                        (rho.trace() - C64::new(1.0, 0.0)).norm() <= SAMPLE_TOL,
                        || format!("sampled trace differs from 1 at t = {t}"),
                    )?;
                    self.report(rho_dot.is_hermitian(SAMPLE_TOL), || {
                        format!("sampled derivative not Hermitian at t = {t}")
                    })?;
                    let min_eig = rho
                        .hermitian_eigenvalues()
                        .into_iter()
                        .fold(f64::INFINITY, f64::min);
                    self.report(min_eig >= PSD_TOL, || {
                        format!("sampled matrix not positive semidefinite at t = {t} (min eigenvalue {min_eig:.3e})")
                    })?;
                }
                SampledPoint::Pure { psi, .. } => {
                    self.report((psi.norm() - 1.0).abs() <= SAMPLE_TOL, || {
                        format!("sampled state not unit-norm at t = {t}")
                    })?;
                }
            }
        }
        Ok(())
    }

    fn report(&self, ok: bool, msg: impl Fn() -> String) -> Result<()> {
        if ok {
            return Ok(());
        }
        match self.validation {
            Validation::Strict => Err(Error::Validation(format!("`{}`: {}", self.label, msg()))),
            Validation::Warn => {
                eprintln!("warning: `{}`: {}", self.label, msg());
                Ok(())
            }
        }
    }

    fn sample_raw(&self, t: f64) -> Result<SampledPoint> {
        match self.kind {
            TrajectoryKind::Density => {
                let n = self.dim;
                let mut value = Vec::with_capacity(n * n);
                let mut deriv = Vec::with_capacity(n * n);
                for cell in &self.cells {
                    let (v, d) = cell.eval(t, &self.params)?;
                    value.push(v);
                    deriv.push(d);
                }
                Ok(SampledPoint::Density {
                    t,
                    rho: ComplexMatrix::new(n, value)?,
                    rho_dot: ComplexMatrix::new(n, deriv)?,
                })
            }
            TrajectoryKind::PureState => {
                let mut value = Vec::with_capacity(self.dim);
                let mut deriv = Vec::with_capacity(self.dim);
                for cell in &self.cells {
                    let (v, d) = cell.eval(t, &self.params)?;
                    value.push(v);
                    deriv.push(d);
                }
                Ok(SampledPoint::Pure {
                    t,
                    psi: ComplexVector::new(value)?,
                    psi_dot: ComplexVector::new(deriv)?,
                })
            }
        }
    }

    /// Samples value and exact derivative at `t`, applying the per-sample
    /// invariant checks at the configured strictness.
    pub fn sample(&self, t: f64) -> Result<SampledPoint> {
        let point = self.sample_raw(t)?;
        match &point {
            SampledPoint::Density { rho, rho_dot, .. } => {
                self.report(rho.is_hermitian(SAMPLE_TOL), || {
                    format!("sampled matrix not Hermitian at t = {t}")
                })?;
                self.report(
                    (rho.trace() - C64::new(1.0, 0.0)).norm() <= SAMPLE_TOL,
                    || format!("sampled trace differs from 1 at t = {t}"),
                )?;
                self.report(rho_dot.is_hermitian(SAMPLE_TOL), || {
                    format!("sampled derivative not Hermitian at t = {t}")
                })?;
            }
            SampledPoint::Pure { psi, .. } => {
                self.report((psi.norm() - 1.0).abs() <= SAMPLE_TOL, || {
                    format!("sampled state not unit-norm at t = {t}")
                })?;
            }
        }
        Ok(point)
    }
}

/// Tr(ρ²), real part. Equals 1 for pure states and < 1 for impure ones.
pub fn purity(rho: &ComplexMatrix) -> f64 {
    rho.mul(rho).trace().re
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateClass {
    Pure,
    Impure,
}

/// Classifies by purity: `Pure` iff Tr(ρ²) ≥ 1 − tol.
pub fn classify(rho: &ComplexMatrix, tol: f64) -> Result<StateClass> {
    let p = purity(rho);
    if p > 1.0 + tol {
        return Err(Error::InvalidState(format!(
            "purity {p} exceeds 1; not a density matrix"
        )));
    }
    Ok(if p >= 1.0 - tol {
        StateClass::Pure
    } else {
        StateClass::Impure
    })
}

/// The largest |b| keeping [[a, b],[b*, 1−a]] pure: √(a − a²).
pub fn pure_bound(a: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::InvalidState(format!(
            "diagonal entry a = {a} outside [0, 1]"
        )));
    }
    Ok((a - a * a).max(0.0).sqrt())
}

/// Outer product ψψ† of a unit vector; the density matrix of a pure state.
pub fn density_from_state(psi: &ComplexVector) -> Result<ComplexMatrix> {
    if (psi.norm() - 1.0).abs() > SAMPLE_TOL {
        return Err(Error::InvalidState(format!(
            "state vector has norm {}, expected 1",
            psi.norm()
        )));
    }
    let rho = psi.outer(psi);
    debug_assert!((purity(&rho) - 1.0).abs() <= 1e-12);
    Ok(rho)
}

// ---------------------------------------------------------------------------
// Hamiltonians
// ---------------------------------------------------------------------------

/// Constant Hermitian matrix with an overall `lambda` scale hook.
#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    base: ComplexMatrix,
    label: String,
}

impl HamiltonianSpec {
    pub fn new(base: ComplexMatrix, label: &str) -> Result<Self> {
        if !base.is_hermitian(1e-12) {
            return Err(Error::Validation(format!(
                "Hamiltonian `{label}` is not Hermitian"
            )));
        }
        Ok(Self {
            base,
            label: label.to_string(),
        })
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Scales the base matrix by the `lambda` parameter (default 1).
    pub fn materialize(&self, params: &BTreeMap<String, f64>) -> ComplexMatrix {
        let lambda = params.get("lambda").copied().unwrap_or(1.0);
        self.base.scale(C64::new(lambda, 0.0))
    }
}

// ---------------------------------------------------------------------------
// Built-in catalog
// ---------------------------------------------------------------------------

/// One catalog family: a trajectory, its Hamiltonian, and metadata.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub label: &'static str,
    pub trajectory: TrajectorySpec,
    pub hamiltonian: HamiltonianSpec,
    /// |β| at which the family is pure (density families only).
    pub pure_beta: Option<f64>,
    /// For pure-state twins: the density family and β value they match.
    pub density_twin: Option<(&'static str, f64)>,
}

fn params_of(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn h_diag() -> HamiltonianSpec {
    HamiltonianSpec::new(ComplexMatrix::diag(&[1.0, -1.0]), "lambda * [[1,0],[0,-1]]")
        .expect("builtin Hamiltonian")
}

fn h_offdiag() -> HamiltonianSpec {
    let base = ComplexMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    ])
    .expect("builtin Hamiltonian");
    HamiltonianSpec::new(base, "lambda * [[0,1],[1,0]]").expect("builtin Hamiltonian")
}

fn trig_density(label: &str, beta: f64) -> TrajectorySpec {
    let cells = vec![
        Cell::real("cos(t)^2").unwrap(),
        Cell::real("beta*sin(2*t)").unwrap(),
        Cell::real("beta*sin(2*t)").unwrap(),
        Cell::real("sin(t)^2").unwrap(),
    ];
    TrajectorySpec::density(
        label,
        2,
        cells,
        params_of(&[("beta", beta), ("lambda", 1.0)]),
        (0.0, std::f64::consts::PI),
        Validation::Strict,
    )
    .expect("builtin trajectory")
}

fn rational_density(label: &str, beta: f64) -> TrajectorySpec {
    let cells = vec![
        Cell::real("1/(1+t^2)").unwrap(),
        Cell::real("beta*t/(1+t^2)").unwrap(),
        Cell::real("beta*t/(1+t^2)").unwrap(),
        Cell::real("t^2/(1+t^2)").unwrap(),
    ];
    TrajectorySpec::density(
        label,
        2,
        cells,
        params_of(&[("beta", beta), ("lambda", 1.0)]),
        (-4.0, 4.0),
        Validation::Strict,
    )
    .expect("builtin trajectory")
}

/// The built-in example families.
///
/// Density families `ex1`–`ex4` cover the two trajectory shapes
/// (trigonometric and rational decay) against the two Hamiltonians; the
/// `-psi` entries are the pure-state twins used by the compare workflow.
/// Default β is the pure value for each family. The integration intervals
/// are defaults chosen per family, not intrinsic to the trajectories.
pub fn catalog() -> Vec<CatalogEntry> {
    let ex1a_psi = TrajectorySpec::pure_state(
        "ex1a-psi",
        2,
        vec![Cell::real("cos(t)").unwrap(), Cell::real("sin(t)").unwrap()],
        params_of(&[("lambda", 1.0)]),
        (0.0, std::f64::consts::PI),
        Validation::Strict,
    )
    .expect("builtin trajectory");

    let ex3a_psi = TrajectorySpec::pure_state(
        "ex3a-psi",
        2,
        vec![
            Cell::real("1/sqrt(1+t^2)").unwrap(),
            Cell::real("t/sqrt(1+t^2)").unwrap(),
        ],
        params_of(&[("lambda", 1.0)]),
        (-4.0, 4.0),
        Validation::Strict,
    )
    .expect("builtin trajectory");

    vec![
        CatalogEntry {
            label: "ex1",
            trajectory: trig_density("ex1", 0.5),
            hamiltonian: h_diag(),
            pure_beta: Some(0.5),
            density_twin: None,
        },
        CatalogEntry {
            label: "ex2",
            trajectory: trig_density("ex2", 0.5),
            hamiltonian: h_offdiag(),
            pure_beta: Some(0.5),
            density_twin: None,
        },
        CatalogEntry {
            label: "ex3",
            trajectory: rational_density("ex3", 1.0),
            hamiltonian: h_diag(),
            pure_beta: Some(1.0),
            density_twin: None,
        },
        CatalogEntry {
            label: "ex4",
            trajectory: rational_density("ex4", 1.0),
            hamiltonian: h_offdiag(),
            pure_beta: Some(1.0),
            density_twin: None,
        },
        CatalogEntry {
            label: "ex1a-psi",
            trajectory: ex1a_psi,
            hamiltonian: h_diag(),
            pure_beta: None,
            density_twin: Some(("ex1", 0.5)),
        },
        CatalogEntry {
            label: "ex3a-psi",
            trajectory: ex3a_psi,
            hamiltonian: h_diag(),
            pure_beta: None,
            density_twin: Some(("ex3", 1.0)),
        },
    ]
}

/// Looks up a catalog entry by label.
pub fn catalog_entry(label: &str) -> Option<CatalogEntry> {
    catalog().into_iter().find(|e| e.label == label)
}

// ---------------------------------------------------------------------------
// Spec files
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCell {
    re: String,
    #[serde(default)]
    im: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEntries {
    Matrix(Vec<Vec<RawCell>>),
    Vector(Vec<RawCell>),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawComplex {
    #[serde(default)]
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHamiltonian {
    entries: Vec<Vec<RawComplex>>,
    #[serde(default)]
    label: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: String,
    dim: usize,
    entries: RawEntries,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    label: String,
    interval: (f64, f64),
    #[serde(default)]
    hamiltonian: Option<RawHamiltonian>,
}

fn cells_from_raw(raw: Vec<RawCell>) -> Result<Vec<Cell>> {
    raw.into_iter()
        .map(|c| Cell::parse(&c.re, c.im.as_deref()))
        .collect()
}

/// Parses a trajectory spec JSON document.
///
/// The document shape is `{"kind": "density"|"pure_state", "dim": n,
/// "entries": [[{"re": "...", "im": "..."}, ...], ...]` (a flat entry array
/// for `pure_state`), `"params": {...}, "label": "...", "interval": [t0, t1]}`
/// with expressions in the `expr` grammar and `im` defaulting to zero. An
/// optional `"hamiltonian"` object carries constant numeric `entries` (scaled
/// by the `lambda` parameter) and an optional `label`.
pub fn from_json_str(
    src: &str,
    validation: Validation,
) -> Result<(TrajectorySpec, Option<HamiltonianSpec>)> {
    let raw: RawSpec = serde_json::from_str(src).map_err(|e| Error::SpecFile(e.to_string()))?;
    let hamiltonian = raw
        .hamiltonian
        .map(|h| -> Result<HamiltonianSpec> {
            let dim = h.entries.len();
            let mut entries = Vec::with_capacity(dim * dim);
            for row in &h.entries {
                if row.len() != dim {
                    return Err(Error::SpecFile("ragged hamiltonian entries".into()));
                }
                for z in row {
                    entries.push(C64::new(z.re, z.im));
                }
            }
            let label = h.label.unwrap_or_else(|| "from spec file".to_string());
            HamiltonianSpec::new(ComplexMatrix::new(dim, entries)?, &label)
        })
        .transpose()?;

    let spec = match (raw.kind.as_str(), raw.entries) {
        ("density", RawEntries::Matrix(rows)) => {
            if rows.len() != raw.dim || rows.iter().any(|r| r.len() != raw.dim) {
                return Err(Error::SpecFile(format!(
                    "density entries must form a {0}x{0} matrix",
                    raw.dim
                )));
            }
            let cells = cells_from_raw(rows.into_iter().flatten().collect())?;
            TrajectorySpec::density(
                &raw.label,
                raw.dim,
                cells,
                raw.params,
                raw.interval,
                validation,
            )?
        }
        ("pure_state", RawEntries::Vector(flat)) => {
            if flat.len() != raw.dim {
                return Err(Error::SpecFile(format!(
                    "pure_state entries must have length {}",
                    raw.dim
                )));
            }
            let cells = cells_from_raw(flat)?;
            TrajectorySpec::pure_state(
                &raw.label,
                raw.dim,
                cells,
                raw.params,
                raw.interval,
                validation,
            )?
        }
        ("density", RawEntries::Vector(_)) => {
            return Err(Error::SpecFile(
                "density specs need nested entry rows".into(),
            ))
        }
        ("pure_state", RawEntries::Matrix(_)) => {
            return Err(Error::SpecFile(
                "pure_state specs need a flat entry array".into(),
            ))
        }
        (other, _) => {
            return Err(Error::SpecFile(format!(
                "unknown kind `{other}`; expected `density` or `pure_state`"
            )))
        }
    };
    if let Some(h) = &hamiltonian {
        if h.dim() != spec.dim() {
            return Err(Error::SpecFile(
                "hamiltonian dimension does not match trajectory".into(),
            ));
        }
    }
    Ok((spec, hamiltonian))
}

/// Reads and parses a trajectory spec JSON file.
pub fn from_json_file(
    path: &std::path::Path,
    validation: Validation,
) -> Result<(TrajectorySpec, Option<HamiltonianSpec>)> {
    let src = std::fs::read_to_string(path)?;
    from_json_str(&src, validation)
}
