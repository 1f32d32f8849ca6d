//! Run configuration, certification bundles, parameter sweeps and
//! transform jobs. The `phasecert` binary is a thin layer over this module.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::certify::{
    analyze_field, certify_corollary1, certify_heinig_smith, certify_heisenberg, certify_hirschman_shannon_chain,
    certify_lieb_pure_chain, certify_purity_equality, certify_refined_rsup, certify_rsup, certify_saturation,
    certify_symplectic_invariance, dilation_to_rsup, positivity_probe, CertName, Certificate, FieldAnalysis,
    RefinedRsupReport, Tolerances, Verdict, DEFAULT_PROBE_SIZE,
};
use crate::error::{Error, Result};
use crate::grid::{dilate, AxisSpec, Field, PhaseSpaceGrid, WaveFunction};
use crate::json::format_f64;
use crate::moments::{boltzmann_entropy_with, density_from_square, EntropyValue, MomentReport, SquareOf};
use crate::states::{build_field, gaussian_wavefunction, make_hermite_state, StateSpec};
use crate::symplectic::SympMatrix;
use crate::transforms::{hbar_ft_field, symplectic_ft, wigner_transform};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_GRID_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Binary,
}

/// Everything a run depends on. [`realize`] fills in defaults;
/// the resolved value is echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub state: StateSpec,
    #[serde(default = "default_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub half_extent: Option<f64>,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Empty means every certificate applicable to the state.
    #[serde(default)]
    pub certificates: Vec<CertName>,
    #[serde(default = "default_probe")]
    pub probe_size: usize,
    /// The map used by the symplectic-invariance certificate; defaults to
    /// [`default_invariance_map`].
    #[serde(default)]
    pub invariance_map: Option<Vec<Vec<f64>>>,
}

fn default_points() -> usize {
    DEFAULT_GRID_POINTS
}

fn default_hbar() -> f64 {
    1.0
}

fn default_probe() -> usize {
    DEFAULT_PROBE_SIZE
}

impl RunConfig {
    pub fn new(state: StateSpec) -> Self {
        Self {
            state,
            grid_points: DEFAULT_GRID_POINTS,
            half_extent: None,
            hbar: 1.0,
            tolerances: Tolerances::default(),
            certificates: Vec::new(),
            probe_size: DEFAULT_PROBE_SIZE,
            invariance_map: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(Error::Config(format!("hbar must be positive, got {}", self.hbar)));
        }
        if let Some(l) = self.half_extent {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::Config(format!("half extent must be positive, got {l}")));
            }
        }
        Ok(())
    }
}

/// A state realized on its grid, with its wavefunction when it has one.
#[derive(Debug, Clone)]
pub struct Realized {
    pub config: RunConfig,
    pub field: Field,
    pub wave: Option<WaveFunction>,
}

/// Builds the field for `config`, filling in the grid and certificate
/// defaults. Field files bring their own grid.
pub fn realize(config: &RunConfig) -> Result<Realized> {
    config.validate()?;
    let mut cfg = config.clone();
    let field = if let StateSpec::CustomFile { path } = &cfg.state {
        let f = crate::io::read_field(path)?;
        let g = f.grid();
        cfg.hbar = g.hbar;
        cfg.grid_points = g.x_axes[0].points;
        cfg.half_extent = Some(g.x_axes[0].half_extent);
        f
    } else {
        let n = cfg.state.dim_n().unwrap_or(1);
        let l = *cfg.half_extent.get_or_insert_with(|| cfg.state.default_half_extent(cfg.hbar));
        let grid = PhaseSpaceGrid::uniform(n, cfg.grid_points, l, cfg.hbar)?;
        build_field(&cfg.state, &grid)?
    };
    let wave = wavefunction_of(&cfg.state, field.grid())?;
    if cfg.certificates.is_empty() {
        cfg.certificates = CertName::ALL
            .iter()
            .copied()
            .filter(|c| *c != CertName::LiebPureChain || wave.is_some())
            .collect();
    }
    if cfg.invariance_map.is_none() {
        cfg.invariance_map = Some(default_invariance_map(field.dim_n()));
    }
    Ok(Realized { config: cfg, field, wave })
}

/// Rotation of every `(x_i, p_i)` plane by π/6. It is symplectic and keeps
/// the support of a centered field the same size, so it exercises the
/// interpolation without pushing mass off the grid.
pub fn default_invariance_map(n: usize) -> Vec<Vec<f64>> {
    let (s, c) = (std::f64::consts::FRAC_PI_6).sin_cos();
    (0..2 * n)
        .map(|r| {
            (0..2 * n)
                .map(|col| match (r < n, col < n) {
                    _ if r % n != col % n => 0.0,
                    (true, true) | (false, false) => c,
                    (true, false) => -s,
                    (false, true) => s,
                })
                .collect()
        })
        .collect()
}

/// The wavefunction behind pure n = 1 library states, sampled on the x axis
/// of `grid`.
pub fn wavefunction_of(state: &StateSpec, grid: &PhaseSpaceGrid) -> Result<Option<WaveFunction>> {
    if grid.dim_n != 1 {
        return Ok(None);
    }
    let axis = grid.x_axes[0];
    let hbar = grid.hbar;
    Ok(match state {
        StateSpec::Hermite { k } => Some(make_hermite_state(*k, axis, hbar)?),
        StateSpec::GaussianPure { covariance, center, .. } => {
            let cov = match covariance {
                Some(rows) => DMatrix::from_row_iterator(2, 2, rows.iter().flatten().copied()),
                None => DMatrix::identity(2, 2) * (hbar / 2.0),
            };
            let c = center.clone().unwrap_or_else(|| vec![0.0, 0.0]);
            Some(gaussian_wavefunction(&cov, [c[0], c[1]], axis, hbar)?)
        }
        _ => None,
    })
}

fn rows_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Config("matrix rows must form a square".into()));
    }
    Ok(DMatrix::from_row_iterator(n, n, rows.iter().flatten().copied()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisInfo {
    pub points: usize,
    pub half_extent: f64,
    pub step: f64,
    /// `πħ / step`, the half extent of the conjugate axis.
    pub reciprocal_half_extent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub dim_n: usize,
    pub hbar: f64,
    pub cell_volume: f64,
    /// `x_1..x_n, p_1..p_n`.
    pub axes: Vec<AxisInfo>,
    /// Axes of the grid carrying `F_σF`.
    pub symplectic_dual_axes: Vec<AxisSpec>,
}

impl GridInfo {
    pub fn of(grid: &PhaseSpaceGrid) -> Self {
        GridInfo {
            dim_n: grid.dim_n,
            hbar: grid.hbar,
            cell_volume: grid.cell_volume(),
            axes: grid
                .axes()
                .iter()
                .map(|a| AxisInfo {
                    points: a.points,
                    half_extent: a.half_extent,
                    step: a.step(),
                    reciprocal_half_extent: a.reciprocal(grid.hbar).half_extent,
                })
                .collect(),
            symplectic_dual_axes: grid.symplectic_dual().axes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entropies {
    /// `E(|F̃|²)`.
    pub squared: Option<EntropyValue>,
    /// `E(|F_σF̃|²)`.
    pub symplectic_ft_squared: Option<EntropyValue>,
    /// `E(|F_ħF̃|²)`.
    pub hbar_ft_squared: Option<EntropyValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertError {
    pub certificate: CertName,
    pub message: String,
}

/// Overall outcome, mapped onto the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Indeterminate,
    Error,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Indeterminate => 2,
            Outcome::Error => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationBundle {
    pub library: String,
    pub version: String,
    pub config: RunConfig,
    pub grid: GridInfo,
    pub field_digest: String,
    pub field_label: String,
    pub moments: MomentReport,
    pub squared_moments: MomentReport,
    pub symplectic_ft_squared_moments: MomentReport,
    pub entropies: Entropies,
    pub refined_rsup: Option<RefinedRsupReport>,
    pub dilation_mu: Option<f64>,
    pub certificates: Vec<Certificate>,
    pub errors: Vec<CertError>,
    pub warnings: Vec<String>,
    pub outcome: Outcome,
}

impl CertificationBundle {
    pub fn certificate(&self, name: CertName) -> Option<&Certificate> {
        self.certificates.iter().find(|c| c.name == name)
    }
}

pub fn outcome_of(certs: &[Certificate], errors: usize) -> Outcome {
    if errors > 0 {
        Outcome::Error
    } else if certs.iter().any(|c| c.verdict == Verdict::Fail) {
        Outcome::Fail
    } else if certs.iter().any(|c| c.verdict == Verdict::Indeterminate) {
        Outcome::Indeterminate
    } else {
        Outcome::Pass
    }
}

/// Runs the requested certificates on a realized state.
pub fn certify_realized(r: &Realized) -> Result<CertificationBundle> {
    let cfg = &r.config;
    let tol = &cfg.tolerances;
    let field = &r.field;
    let a = analyze_field(field, tol)?;
    let mut certs: Vec<Certificate> = Vec::new();
    let mut errors: Vec<CertError> = Vec::new();
    let mut refined_report = None;
    let mut dilation_mu = None;
    let wanted = |c: CertName| cfg.certificates.contains(&c);
    fn push(name: CertName, res: Result<Certificate>, certs: &mut Vec<Certificate>, errors: &mut Vec<CertError>) {
        match res {
            Ok(c) => certs.push(c),
            Err(e) => errors.push(CertError { certificate: name, message: e.to_string() }),
        }
    }

    for &name in &cfg.certificates {
        match name {
            CertName::Heisenberg => certs.push(certify_heisenberg(&a.report, a.hbar, tol)),
            CertName::Rsup => {
                let res = certify_rsup(&a.report, a.hbar, tol).map(|mut c| {
                    c.warnings.extend(a.warnings.iter().cloned());
                    c
                });
                push(name, res, &mut certs, &mut errors);
                if let Ok((mu, _)) = dilation_to_rsup(field, tol) {
                    dilation_mu = Some(mu);
                }
            }
            CertName::RefinedRsupIneq1 | CertName::RefinedRsupIneq2 => {
                // both come from one computation; emit each once
                if certs.iter().any(|c| c.name == name) {
                    continue;
                }
                match certify_refined_rsup(&a, tol) {
                    Ok(out) => {
                        refined_report = Some(out.report);
                        if wanted(CertName::RefinedRsupIneq1) {
                            certs.push(out.ineq1);
                        }
                        if wanted(CertName::RefinedRsupIneq2) {
                            certs.push(out.ineq2);
                        }
                    }
                    Err(e) => errors.push(CertError { certificate: name, message: e.to_string() }),
                }
            }
            CertName::RefinedRsupCor1a | CertName::RefinedRsupCor1b | CertName::RefinedRsupCor1c => {
                let idx = match name {
                    CertName::RefinedRsupCor1a => 0,
                    CertName::RefinedRsupCor1b => 1,
                    _ => 2,
                };
                certs.push(certify_corollary1(&a, tol)[idx].clone());
            }
            CertName::Saturation => push(name, certify_saturation(field, &a, tol), &mut certs, &mut errors),
            CertName::PurityEquality => push(name, certify_purity_equality(field, &a, tol), &mut certs, &mut errors),
            CertName::HeinigSmith => certs.push(certify_heinig_smith(&a, tol)),
            CertName::HirschmanShannonChain => certs.push(certify_hirschman_shannon_chain(&a, tol)),
            CertName::LiebPureChain => match &r.wave {
                Some(w) => push(name, certify_lieb_pure_chain(w, tol), &mut certs, &mut errors),
                None => certs.push(Certificate {
                    name,
                    verdict: Verdict::Indeterminate,
                    margins: Vec::new(),
                    tolerance: tol.log,
                    inputs_digest: a.digest.clone(),
                    warnings: vec![
                        "lieb_pure_chain needs a pure-state wavefunction (hermite, or gaussian_pure with n = 1)".into(),
                    ],
                    equalities: Vec::new(),
                }),
            },
            CertName::PositivityProbe => push(name, positivity_probe(field, cfg.probe_size, tol), &mut certs, &mut errors),
            CertName::SymplecticInvariance => {
                let res = cfg
                    .invariance_map
                    .as_deref()
                    .ok_or_else(|| Error::Config("missing invariance map".into()))
                    .and_then(rows_matrix)
                    .and_then(SympMatrix::new)
                    .and_then(|s| certify_symplectic_invariance(field, &s, tol));
                push(name, res, &mut certs, &mut errors);
            }
        }
    }
    if refined_report.is_none() {
        refined_report = crate::certify::refined_rsup_report(&a).ok();
    }
    let (entropies, mut warnings) = entropies_of(&a, tol);
    warnings.splice(0..0, a.warnings.iter().cloned());
    let outcome = outcome_of(&certs, errors.len());
    Ok(CertificationBundle {
        library: "phasecert".into(),
        version: VERSION.into(),
        config: cfg.clone(),
        grid: GridInfo::of(field.grid()),
        field_digest: a.digest.clone(),
        field_label: field.label().to_string(),
        moments: a.report.clone(),
        squared_moments: a.sq_report.clone(),
        symplectic_ft_squared_moments: a.ft_report.clone(),
        entropies,
        refined_rsup: refined_report,
        dilation_mu,
        certificates: certs,
        errors,
        warnings,
        outcome,
    })
}

fn entropies_of(a: &FieldAnalysis, tol: &Tolerances) -> (Entropies, Vec<String>) {
    let mut warnings = Vec::new();
    let mut get = |what: &str, mu: &Field| match boltzmann_entropy_with(mu, tol.clipping) {
        Ok(e) => Some(e),
        Err(e) => {
            warnings.push(format!("entropy of {what} unavailable: {e}"));
            None
        }
    };
    let e = Entropies {
        squared: get("|F|^2", &a.sq_density),
        symplectic_ft_squared: get("|F_sigma F|^2", &a.ft_density),
        hbar_ft_squared: get("|F_hbar F|^2", &a.hft_density),
    };
    (e, warnings)
}

pub fn certify(config: &RunConfig) -> Result<CertificationBundle> {
    certify_realized(&realize(config)?)
}

/// One line per margin: `certificate,verdict,margin,value`.
pub fn bundle_csv(b: &CertificationBundle) -> String {
    let mut out = String::from("certificate,verdict,margin,value\n");
    for c in &b.certificates {
        let verdict = verdict_str(c.verdict);
        if c.margins.is_empty() {
            out.push_str(&format!("{},{},,\n", c.name.as_str(), verdict));
        }
        for m in &c.margins {
            out.push_str(&format!("{},{},{},{}\n", c.name.as_str(), verdict, m.name, format_f64(m.value)));
        }
    }
    out
}

pub fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Indeterminate => "indeterminate",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Disc radius; the state must be a disc indicator.
    Radius,
    /// Weight `w` of the first member of a two-member mixture.
    Weight,
    /// Mass-preserving dilation `F ↦ μ^{2n}F(μz)` of the state.
    Mu,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.from.is_finite() && self.to.is_finite()) || self.steps == 0 {
            return Err(Error::Config("sweep needs finite bounds and at least one step".into()));
        }
        let ok = match self.param {
            SweepParam::Radius | SweepParam::Mu => self.from > 0.0 && self.to > 0.0,
            SweepParam::Weight => (0.0..=1.0).contains(&self.from) && (0.0..=1.0).contains(&self.to),
        };
        if !ok {
            return Err(Error::Config(format!("sweep bounds [{}, {}] invalid for {:?}", self.from, self.to, self.param)));
        }
        if self.steps == 1 {
            return Ok(vec![self.from]);
        }
        let d = (self.to - self.from) / (self.steps - 1) as f64;
        Ok((0..self.steps).map(|i| self.from + d * i as f64).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

/// Certifies the state once per parameter value. Columns are the parameter,
/// mass, purity, then each certificate's verdict and margins.
pub fn run_sweep(config: &RunConfig, sweep: &SweepSpec) -> Result<SweepTable> {
    let values = sweep.values()?;
    let mut base = config.clone();
    match (sweep.param, &config.state) {
        (SweepParam::Radius, StateSpec::DiscIndicator { .. }) => {
            let rmax = values.iter().copied().fold(0.0, f64::max);
            base.state = StateSpec::DiscIndicator { radius: rmax };
            if base.half_extent.is_none() {
                base.half_extent = Some(base.state.default_half_extent(base.hbar));
            }
        }
        (SweepParam::Weight, StateSpec::Mixture { children, .. }) if children.len() == 2 => {}
        (SweepParam::Mu, _) => {}
        (p, _) => {
            return Err(Error::Config(format!("sweep over {p:?} does not apply to this state")));
        }
    }
    let mut columns: Vec<String> = vec![param_name(sweep.param).into(), "mass".into(), "purity".into()];
    let mut records: Vec<(f64, Vec<(String, String)>)> = Vec::new();
    let mut base_field: Option<Realized> = None;
    for &v in &values {
        let realized = match sweep.param {
            SweepParam::Radius => {
                let mut c = base.clone();
                c.state = StateSpec::DiscIndicator { radius: v };
                realize(&c)?
            }
            SweepParam::Weight => {
                let mut c = base.clone();
                if let StateSpec::Mixture { children, .. } = &base.state {
                    c.state = StateSpec::Mixture { weights: vec![v, 1.0 - v], children: children.clone() };
                }
                realize(&c)?
            }
            SweepParam::Mu => {
                let r0 = match &base_field {
                    Some(r) => r,
                    None => base_field.insert(realize(&base)?),
                };
                let mut r = r0.clone();
                r.field = dilate(&r0.field, v)?;
                // the dilated field no longer comes from a wavefunction
                r.wave = None;
                r.config.certificates.retain(|c| *c != CertName::LiebPureChain);
                r
            }
        };
        let mut cells: Vec<(String, String)> = Vec::new();
        match certify_realized(&realized) {
            Ok(b) => {
                cells.push(("mass".into(), format_f64(b.moments.mass.re)));
                cells.push(("purity".into(), format_f64(b.moments.purity)));
                for c in &b.certificates {
                    cells.push((format!("{}.verdict", c.name.as_str()), verdict_str(c.verdict).into()));
                    for m in &c.margins {
                        cells.push((format!("{}.{}", c.name.as_str(), m.name), format_f64(m.value)));
                    }
                }
                for e in &b.errors {
                    cells.push((format!("{}.verdict", e.certificate.as_str()), "error".into()));
                }
            }
            Err(e) => cells.push(("error".into(), format!("\"{e}\""))),
        }
        for (k, _) in &cells {
            if !columns.contains(k) {
                columns.push(k.clone());
            }
        }
        records.push((v, cells));
    }
    let rows = records
        .into_iter()
        .map(|(v, cells)| {
            columns
                .iter()
                .enumerate()
                .map(|(i, col)| {
                    if i == 0 {
                        format_f64(v)
                    } else {
                        cells.iter().find(|(k, _)| k == col).map(|(_, x)| x.clone()).unwrap_or_default()
                    }
                })
                .collect()
        })
        .collect();
    Ok(SweepTable { columns, rows })
}

fn param_name(p: SweepParam) -> &'static str {
    match p {
        SweepParam::Radius => "radius",
        SweepParam::Weight => "weight",
        SweepParam::Mu => "mu",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    /// Wigner function of the state's wavefunction.
    Wigner,
    /// Symplectic Fourier transform of the field.
    Sft,
    /// ħ-Fourier transform of the field.
    Hft,
    /// `|F̃|²` normalized.
    Density,
}

/// Applies `kind` to the configured state (or field file).
pub fn run_transform(config: &RunConfig, kind: TransformKind) -> Result<Field> {
    let r = realize(config)?;
    match kind {
        TransformKind::Wigner => {
            let w = r.wave.as_ref().ok_or_else(|| {
                Error::Config("wigner needs a state with a wavefunction (hermite, or gaussian_pure with n = 1)".into())
            })?;
            wigner_transform(w)
        }
        TransformKind::Sft => symplectic_ft(&r.field),
        TransformKind::Hft => hbar_ft_field(&r.field),
        TransformKind::Density => density_from_square(&r.field, SquareOf::Direct),
    }
}

/// Parses a state argument: inline JSON, a `.json` file holding a spec, a
/// field file, or the shorthand `kind` / `kind:key=value,key=value`.
pub fn parse_state_arg(arg: &str) -> Result<StateSpec> {
    let trimmed = arg.trim();
    if trimmed.starts_with('{') {
        return Ok(serde_json::from_str(trimmed)?);
    }
    let path = Path::new(trimmed);
    if path.is_file() {
        if path.extension().is_some_and(|e| e == "json") {
            return Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?);
        }
        return Ok(StateSpec::CustomFile { path: PathBuf::from(trimmed) });
    }
    let (kind, rest) = trimmed.split_once(':').unwrap_or((trimmed, ""));
    let mut obj = serde_json::Map::new();
    obj.insert("kind".into(), serde_json::Value::String(kind.into()));
    for pair in rest.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value in state shorthand, got {pair:?}")))?;
        let value = serde_json::from_str(v).unwrap_or_else(|_| serde_json::Value::String(v.into()));
        obj.insert(k.trim().into(), value);
    }
    serde_json::from_value(serde_json::Value::Object(obj))
        .map_err(|e| Error::Config(format!("invalid state {arg:?}: {e}")))
}
