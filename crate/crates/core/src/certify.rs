//! The inequality ladder. Each certifier turns moments, entropies or fields
//! into a [`Certificate`] carrying a verdict and the numeric margins behind it.

use std::f64::consts::{E, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{l2_norm_sq, normalize_mass, resample_linear_map, Field, Interpolation, WaveFunction};
use crate::io::{field_digest, floats_digest};
use crate::moments::{boltzmann_entropy_with, density_from_square, moment_report, EntropyValue, MomentReport, SquareOf};
use crate::states::hermite_cross_wigner;
use crate::symplectic::{
    hermitian_eigenvalues, is_anti_symplectic, is_symplectic, j_matrix, rsup_matrix, symmetric_eigenvalues,
    symmetrize, symplectic_residual, symplectic_spectrum, SympMatrix,
};
use crate::transforms::{moyal_linear_left, wigner_transform, LinearSymbol};

/// Tolerances used by the certifiers. Absolute eigen-margins scale with ħ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Eigen-margin tolerance in units of ħ.
    pub psd: f64,
    /// Equalities are accepted within `equality_factor` times the tolerance.
    pub equality_factor: f64,
    /// Tolerance on dimensionless log and entropy margins.
    pub log: f64,
    /// Purity equality band.
    pub purity: f64,
    /// Boundary-shell mass fraction that triggers a leakage warning.
    pub boundary: f64,
    /// Clipped negative mass allowed in an entropy.
    pub clipping: f64,
    /// Relative tolerance for comparisons after resampling.
    pub interpolation: f64,
    /// Tolerance on `(2/ħ)Cov ∈ Sp(n)`.
    pub symplectic: f64,
    /// Pointwise Gaussian-fit residual relative to `max|F̃|`.
    pub gaussian_fit: f64,
    /// Tolerance on the Hermite-basis positivity matrix.
    pub probe: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd: 1e-6,
            equality_factor: 10.0,
            log: 1e-6,
            purity: 1e-6,
            boundary: 1e-6,
            clipping: 1e-9,
            interpolation: 1e-3,
            symplectic: 1e-8,
            gaussian_fit: 1e-6,
            probe: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn psd_abs(&self, hbar: f64) -> f64 {
        self.psd * hbar
    }

    /// Applies `key=value` overrides by field name.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "psd" => &mut self.psd,
            "equality_factor" => &mut self.equality_factor,
            "log" => &mut self.log,
            "purity" => &mut self.purity,
            "boundary" => &mut self.boundary,
            "clipping" => &mut self.clipping,
            "interpolation" => &mut self.interpolation,
            "symplectic" => &mut self.symplectic,
            "gaussian_fit" => &mut self.gaussian_fit,
            "probe" => &mut self.probe,
            _ => return Err(Error::Config(format!("unknown tolerance {key:?}"))),
        };
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::Config(format!("tolerance {key} must be a nonnegative number")));
        }
        *slot = value;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertName {
    Heisenberg,
    HeinigSmith,
    Rsup,
    RefinedRsupIneq1,
    RefinedRsupIneq2,
    RefinedRsupCor1a,
    RefinedRsupCor1b,
    RefinedRsupCor1c,
    Saturation,
    PurityEquality,
    HirschmanShannonChain,
    LiebPureChain,
    PositivityProbe,
    SymplecticInvariance,
}

impl CertName {
    pub const ALL: [CertName; 14] = [
        CertName::Heisenberg,
        CertName::HeinigSmith,
        CertName::Rsup,
        CertName::RefinedRsupIneq1,
        CertName::RefinedRsupIneq2,
        CertName::RefinedRsupCor1a,
        CertName::RefinedRsupCor1b,
        CertName::RefinedRsupCor1c,
        CertName::Saturation,
        CertName::PurityEquality,
        CertName::HirschmanShannonChain,
        CertName::LiebPureChain,
        CertName::PositivityProbe,
        CertName::SymplecticInvariance,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CertName::Heisenberg => "heisenberg",
            CertName::HeinigSmith => "heinig_smith",
            CertName::Rsup => "rsup",
            CertName::RefinedRsupIneq1 => "refined_rsup_ineq1",
            CertName::RefinedRsupIneq2 => "refined_rsup_ineq2",
            CertName::RefinedRsupCor1a => "refined_rsup_cor1a",
            CertName::RefinedRsupCor1b => "refined_rsup_cor1b",
            CertName::RefinedRsupCor1c => "refined_rsup_cor1c",
            CertName::Saturation => "saturation",
            CertName::PurityEquality => "purity_equality",
            CertName::HirschmanShannonChain => "hirschman_shannon_chain",
            CertName::LiebPureChain => "lieb_pure_chain",
            CertName::PositivityProbe => "positivity_probe",
            CertName::SymplecticInvariance => "symplectic_invariance",
        }
    }

    pub fn parse(s: &str) -> Result<CertName> {
        CertName::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown certificate {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub name: String,
    pub value: f64,
}

/// An equality the certificate checked, with the residual that decided it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityCheck {
    pub name: String,
    pub residual: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub name: CertName,
    pub verdict: Verdict,
    pub margins: Vec<Margin>,
    pub tolerance: f64,
    pub inputs_digest: String,
    pub warnings: Vec<String>,
    pub equalities: Vec<EqualityCheck>,
}

impl Certificate {
    pub fn margin(&self, name: &str) -> Option<f64> {
        self.margins.iter().find(|m| m.name == name).map(|m| m.value)
    }

    pub fn equality(&self, name: &str) -> Option<&EqualityCheck> {
        self.equalities.iter().find(|e| e.name == name)
    }

    pub fn min_margin(&self) -> f64 {
        self.margins.iter().map(|m| m.value).fold(f64::INFINITY, f64::min)
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Accumulates margins and diagnostics, then settles the verdict:
/// blocking problems give indeterminate, any margin below `−tolerance`
/// gives fail, and a pass that rests on leaking data is downgraded to
/// indeterminate.
struct Draft {
    name: CertName,
    tolerance: f64,
    digest: String,
    margins: Vec<Margin>,
    warnings: Vec<String>,
    equalities: Vec<EqualityCheck>,
    leak: bool,
    blocked: bool,
    forced_fail: bool,
}

impl Draft {
    fn new(name: CertName, tolerance: f64, digest: impl Into<String>) -> Self {
        Self {
            name,
            tolerance,
            digest: digest.into(),
            margins: Vec::new(),
            warnings: Vec::new(),
            equalities: Vec::new(),
            leak: false,
            blocked: false,
            forced_fail: false,
        }
    }

    fn margin(&mut self, name: impl Into<String>, value: f64) {
        self.margins.push(Margin { name: name.into(), value });
    }

    fn equality(&mut self, name: impl Into<String>, residual: f64, band: f64) -> bool {
        let holds = residual.abs() <= band;
        self.equalities.push(EqualityCheck { name: name.into(), residual, holds });
        holds
    }

    fn warn(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }

    fn leak(&mut self, warnings: &[String]) {
        if !warnings.is_empty() {
            self.leak = true;
            self.warnings.extend_from_slice(warnings);
        }
    }

    fn block(&mut self, why: impl Into<String>) {
        self.blocked = true;
        self.warnings.push(why.into());
    }

    fn finish(self) -> Certificate {
        // NaN margins fail
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        let failing = self.margins.iter().any(|m| !(m.value >= -self.tolerance));
        let verdict = if self.blocked {
            Verdict::Indeterminate
        } else if failing || self.forced_fail {
            Verdict::Fail
        } else if self.leak {
            Verdict::Indeterminate
        } else {
            Verdict::Pass
        };
        Certificate {
            name: self.name,
            verdict,
            margins: self.margins,
            tolerance: self.tolerance,
            inputs_digest: self.digest,
            warnings: self.warnings,
            equalities: self.equalities,
        }
    }
}

fn report_digest(report: &MomentReport, hbar: f64) -> String {
    let mut v: Vec<f64> = report.covariance.iter().copied().collect();
    v.extend_from_slice(&report.mean);
    v.push(report.purity);
    v.push(hbar);
    floats_digest(&v)
}

fn min_sym_eig(m: &DMatrix<f64>) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    symmetric_eigenvalues(&s)[0]
}

fn log_det(m: &DMatrix<f64>) -> Option<f64> {
    let d = m.determinant();
    (d > 0.0 && d.is_finite()).then(|| d.ln())
}

/// `Δx_i Δp_i ≥ ħ/2` for each degree of freedom.
pub fn certify_heisenberg(report: &MomentReport, hbar: f64, tol: &Tolerances) -> Certificate {
    let n = report.dim_n();
    let mut d = Draft::new(CertName::Heisenberg, tol.psd_abs(hbar), report_digest(report, hbar));
    for i in 0..n {
        let (vx, vp) = (report.covariance[(i, i)], report.covariance[(n + i, n + i)]);
        if !(vx > 0.0 && vp > 0.0) {
            d.block(format!("degenerate variance in degree of freedom {i}"));
            continue;
        }
        d.margin(format!("dx{0}_dp{0}_minus_half_hbar", i + 1), (vx * vp).sqrt() - hbar / 2.0);
    }
    d.finish()
}

/// `Cov + (iħ/2)J ⪰ 0`, checked both through the Hermitian eigenvalues and
/// through `λ_{σ,1} ≥ ħ/2`.
pub fn certify_rsup(report: &MomentReport, hbar: f64, tol: &Tolerances) -> Result<Certificate> {
    let t = tol.psd_abs(hbar);
    let mut d = Draft::new(CertName::Rsup, t, report_digest(report, hbar));
    let psd_margin = hermitian_eigenvalues(&rsup_matrix(&report.covariance, hbar)?)[0];
    d.margin("rsup_matrix_min_eigenvalue", psd_margin);
    match symplectic_spectrum(&report.covariance) {
        Ok(spec) => {
            let spectral_margin = spec.min() - hbar / 2.0;
            let a = psd_margin >= -t;
            let b = spectral_margin >= -t;
            if a != b {
                if psd_margin.abs().max(spectral_margin.abs()) > tol.equality_factor * t {
                    return Err(Error::RouteDisagreement { psd_margin, spectral_margin });
                }
                // knife edge: the spectral route decides
                d.warn("eigenvalue and symplectic-spectrum routes disagree within the equality band");
                d.margins[0].value = psd_margin.max(-t);
            }
            d.margin("lambda_sigma_1_minus_half_hbar", spectral_margin);
        }
        Err(e) => d.block(format!("symplectic spectrum unavailable: {e}")),
    }
    Ok(d.finish())
}

/// Everything the field-level certifiers share, computed once per field.
#[derive(Debug, Clone)]
pub struct FieldAnalysis {
    pub digest: String,
    pub hbar: f64,
    pub dim_n: usize,
    pub report: MomentReport,
    /// `|F̃|²` normalized.
    pub sq_density: Field,
    /// `|F_σF̃|²` normalized.
    pub ft_density: Field,
    /// `|F_ħF̃|²` normalized.
    pub hft_density: Field,
    pub sq_report: MomentReport,
    pub ft_report: MomentReport,
    pub hft_report: MomentReport,
    /// Leakage warnings on the field and its transforms.
    pub warnings: Vec<String>,
}

fn leak_warning(what: &str, fraction: f64, threshold: f64) -> Option<String> {
    (fraction > threshold).then(|| {
        format!("{what}: boundary-shell mass fraction {fraction:.3e} exceeds {threshold:.1e}; grid may be too small")
    })
}

pub fn analyze_field(f: &Field, tol: &Tolerances) -> Result<FieldAnalysis> {
    if !f.is_finite() {
        return Err(Error::NonFinite("field"));
    }
    let report = moment_report(f)?;
    let ft = normalize_mass(f)?;
    let sq_density = density_from_square(&ft, SquareOf::Direct)?;
    let ft_density = density_from_square(&ft, SquareOf::SymplecticFt)?;
    let hft_density = density_from_square(&ft, SquareOf::HbarFt)?;
    let sq_report = moment_report(&sq_density)?;
    let ft_report = moment_report(&ft_density)?;
    let hft_report = moment_report(&hft_density)?;
    let warnings = [
        leak_warning("field", report.boundary_mass_fraction, tol.boundary),
        leak_warning("symplectic Fourier transform", ft_report.boundary_mass_fraction, tol.boundary),
    ]
    .into_iter()
    .flatten()
    .collect();
    Ok(FieldAnalysis {
        digest: field_digest(f),
        hbar: f.hbar(),
        dim_n: f.dim_n(),
        report,
        sq_density,
        ft_density,
        hft_density,
        sq_report,
        ft_report,
        hft_report,
        warnings,
    })
}

/// The matrices of the refined inequality
/// `Cov + (iħ/2)J ⪰ P(Cov(|F̃|²) + ¼Cov(|F_σF̃|²) + (iħ/2)J) ⪰ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedRsupReport {
    #[serde(with = "crate::json::matrix_rows")]
    pub cov_w: DMatrix<f64>,
    #[serde(with = "crate::json::matrix_rows")]
    pub cov_sq: DMatrix<f64>,
    #[serde(with = "crate::json::matrix_rows")]
    pub cov_ft_sq: DMatrix<f64>,
    pub purity: f64,
    pub lhs_min_eig: f64,
    pub middle_min_eig: f64,
    pub gap_min_eig: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedRsupOutcome {
    pub report: RefinedRsupReport,
    /// `M₁ − M₂ ⪰ 0`.
    pub ineq1: Certificate,
    /// `M₂ ⪰ 0`.
    pub ineq2: Certificate,
}

pub fn refined_rsup_report(a: &FieldAnalysis) -> Result<RefinedRsupReport> {
    let hbar = a.hbar;
    let p = a.report.purity;
    let cov_w = a.report.covariance.clone();
    let cov_sq = a.sq_report.covariance.clone();
    let cov_ft_sq = a.ft_report.covariance.clone();
    let m1 = rsup_matrix(&cov_w, hbar)?;
    let m2 = rsup_matrix(&(&cov_sq + &cov_ft_sq * 0.25), hbar)? * Complex64::new(p, 0.0);
    Ok(RefinedRsupReport {
        lhs_min_eig: hermitian_eigenvalues(&m1)[0],
        middle_min_eig: hermitian_eigenvalues(&m2)[0],
        gap_min_eig: hermitian_eigenvalues(&(&m1 - &m2))[0],
        cov_w,
        cov_sq,
        cov_ft_sq,
        purity: p,
    })
}

pub fn certify_refined_rsup(a: &FieldAnalysis, tol: &Tolerances) -> Result<RefinedRsupOutcome> {
    let report = refined_rsup_report(a)?;
    let t = tol.psd_abs(a.hbar);
    let mut ineq1 = Draft::new(CertName::RefinedRsupIneq1, t, a.digest.clone());
    ineq1.margin("gap_min_eigenvalue", report.gap_min_eig);
    ineq1.leak(&a.warnings);
    let mut ineq2 = Draft::new(CertName::RefinedRsupIneq2, t, a.digest.clone());
    ineq2.margin("middle_min_eigenvalue", report.middle_min_eig);
    ineq2.leak(&a.warnings);
    Ok(RefinedRsupOutcome { report, ineq1: ineq1.finish(), ineq2: ineq2.finish() })
}

/// The three real-matrix consequences of the refined inequality.
pub fn certify_corollary1(a: &FieldAnalysis, tol: &Tolerances) -> [Certificate; 3] {
    let t = tol.psd_abs(a.hbar);
    let p = a.report.purity;
    let cov = &a.report.covariance;
    let sq = &a.sq_report.covariance;
    let ft = &a.ft_report.covariance;
    let checks = [
        (CertName::RefinedRsupCor1a, cov - (sq + ft * 0.25) * p),
        (CertName::RefinedRsupCor1b, cov - sq * p),
        (CertName::RefinedRsupCor1c, cov - ft * (p / 4.0)),
    ];
    checks.map(|(name, m)| {
        let mut d = Draft::new(name, t, a.digest.clone());
        d.margin("min_eigenvalue", min_sym_eig(&m));
        d.leak(&a.warnings);
        d.finish()
    })
}

/// Minimal uncertainty: every symplectic eigenvalue equals ħ/2 and the
/// refined inequality holds.
pub fn certify_saturation(f: &Field, a: &FieldAnalysis, tol: &Tolerances) -> Result<Certificate> {
    let hbar = a.hbar;
    let t = tol.psd_abs(hbar);
    let band = tol.equality_factor * t;
    let mut d = Draft::new(CertName::Saturation, band, a.digest.clone());
    d.leak(&a.warnings);
    let spectrum = match symplectic_spectrum(&a.report.covariance) {
        Ok(s) => s,
        Err(e) => {
            d.block(format!("symplectic spectrum unavailable: {e}"));
            return Ok(d.finish());
        }
    };
    for (j, l) in spectrum.values.iter().enumerate() {
        d.margin(format!("minus_abs_lambda_sigma_{}_minus_half_hbar", j + 1), -(l - hbar / 2.0).abs());
    }
    let refined = certify_refined_rsup(a, tol)?;
    for c in [&refined.ineq1, &refined.ineq2] {
        match c.verdict {
            Verdict::Pass => {}
            Verdict::Fail => {
                d.forced_fail = true;
                d.warn(format!("{} fails", c.name.as_str()));
            }
            Verdict::Indeterminate => d.block(format!("{} is indeterminate", c.name.as_str())),
        }
    }
    let scaled = SympMatrix::new(&a.report.covariance * (2.0 / hbar))?;
    d.equality("littlejohn_symplectic_residual", symplectic_residual(&scaled), tol.symplectic);

    // pointwise comparison with the Gaussian of the same mean and covariance
    let ftilde = normalize_mass(f)?;
    let cov = &a.report.covariance;
    let n = a.dim_n;
    if let Some(inv) = cov.clone().try_inverse() {
        let norm = (2.0 * PI).powi(-(n as i32)) / cov.determinant().sqrt();
        let mean = &a.report.mean;
        let mut worst = 0.0_f64;
        let mut c = vec![0.0; 2 * n];
        ftilde.grid().for_each_point(|flat, z| {
            for k in 0..2 * n {
                c[k] = z[k] - mean[k];
            }
            let mut q = 0.0;
            for r in 0..2 * n {
                for s in 0..2 * n {
                    q += c[r] * inv[(r, s)] * c[s];
                }
            }
            worst = worst.max((ftilde.values()[flat] - Complex64::new(norm * (-0.5 * q).exp(), 0.0)).norm());
        });
        d.equality("gaussian_fit_residual", worst / ftilde.max_abs(), tol.gaussian_fit);
    }
    Ok(d.finish())
}

/// `Tr(Âρ²) ≤ Tr(Âρ)` for `Â = Op(ā)Op(a)` with a linear symbol `a`, both
/// sides evaluated by quadrature. Returns `(Tr(Âρ²), Tr(Âρ))`.
pub fn trace_square_check(f: &Field, a: &LinearSymbol) -> Result<(f64, f64)> {
    let ft = normalize_mass(f)?;
    let hbar = f.hbar();
    let n = f.dim_n();
    let scale = (2.0 * PI * hbar).powi(n as i32);
    let lhs = scale * l2_norm_sq(&moyal_linear_left(a, &ft)?);
    // ā⋆a = |a|² + (iħ/2) η̄·Jη
    let j = j_matrix(n);
    let mut form = Complex64::new(0.0, 0.0);
    for r in 0..2 * n {
        for s in 0..2 * n {
            form += a.eta[r].conj() * j[(r, s)] * a.eta[s];
        }
    }
    let shift = (Complex64::new(0.0, hbar / 2.0) * form).re;
    let mut acc = crate::numeric::KahanSumComplex::new();
    ft.grid().for_each_point(|flat, z| acc.add(ft.values()[flat] * (a.eval(z).norm_sqr() + shift)));
    let rhs = (acc.value() * ft.grid().cell_volume()).re;
    Ok((lhs, rhs))
}

/// Seed for the random symbols of [`certify_purity_equality`].
pub const TRACE_CHECK_SEED: u64 = 0x5eed_0001;
pub const TRACE_CHECK_SYMBOLS: usize = 3;

/// `M₁ − M₂ ⪰ 0` with equality exactly for pure states, plus spot checks
/// of `Tr(Âρ²) ≤ Tr(Âρ)`.
pub fn certify_purity_equality(f: &Field, a: &FieldAnalysis, tol: &Tolerances) -> Result<Certificate> {
    let t = tol.psd_abs(a.hbar);
    let band = tol.equality_factor * t;
    let refined = refined_rsup_report(a)?;
    let mut d = Draft::new(CertName::PurityEquality, t, a.digest.clone());
    d.leak(&a.warnings);
    d.margin("gap_min_eigenvalue", refined.gap_min_eig);
    let pure = d.equality("purity_minus_one", refined.purity - 1.0, tol.purity);
    let identity = d.equality("gap_min_eigenvalue", refined.gap_min_eig, band);
    if pure != identity {
        d.forced_fail = true;
        d.warn(if pure {
            "purity is 1 but M1 - M2 is not zero"
        } else {
            "M1 - M2 vanishes but purity differs from 1"
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(TRACE_CHECK_SEED);
    let dim = 2 * a.dim_n;
    for k in 0..TRACE_CHECK_SYMBOLS {
        let eta: Vec<Complex64> =
            (0..dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let symbol = LinearSymbol::new(eta, a.report.mean.clone(), a.hbar)?;
        match trace_square_check(f, &symbol) {
            Ok((sq, lin)) => {
                let scale = lin.abs().max(a.hbar);
                d.margin(format!("trace_gap_{k}"), (lin - sq) / scale * t);
                d.equality(format!("trace_gap_{k}"), (lin - sq) / scale, tol.equality_factor * tol.psd);
            }
            Err(e) => d.warn(format!("trace check {k} skipped: {e}")),
        }
    }
    Ok(d.finish())
}

/// `log det Cov(|F̃|²) + log det Cov(|F_σF̃|²) ≥ 4n log(ħ/2)`.
pub fn certify_heinig_smith(a: &FieldAnalysis, tol: &Tolerances) -> Certificate {
    let mut d = Draft::new(CertName::HeinigSmith, tol.log, a.digest.clone());
    d.leak(&a.warnings);
    match (log_det(&a.sq_report.covariance), log_det(&a.ft_report.covariance)) {
        (Some(l1), Some(l2)) => {
            let m = l1 + l2 - 4.0 * a.dim_n as f64 * (a.hbar / 2.0).ln();
            d.margin("log_det_margin", m);
            d.equality("gaussian_equality", m, tol.equality_factor * tol.log);
        }
        _ => d.block("singular covariance of a squared density"),
    }
    d.finish()
}

fn entropy_or_block(d: &mut Draft, what: &str, mu: &Field, tol: &Tolerances) -> Option<EntropyValue> {
    match boltzmann_entropy_with(mu, tol.clipping) {
        Ok(e) => Some(e),
        Err(e) => {
            d.block(format!("entropy of {what} unusable: {e}"));
            None
        }
    }
}

/// The four-term chain
/// `T1 = log[(2πe)^{2n} det Cov]`,
/// `T2 = log[(2πeP)^{2n} √(det Cov(|F̃|²) det Cov(|F_ħF̃|²))]`,
/// `T3 = 2n log P + E(|F̃|²) + E(|F_ħF̃|²)`,
/// `T4 = 2n log(πħeP)`.
pub fn certify_hirschman_shannon_chain(a: &FieldAnalysis, tol: &Tolerances) -> Certificate {
    let mut d = Draft::new(CertName::HirschmanShannonChain, tol.log, a.digest.clone());
    d.leak(&a.warnings);
    let nn = 2.0 * a.dim_n as f64;
    let p = a.report.purity;
    let hbar = a.hbar;
    let j = j_matrix(a.dim_n);
    let cov_hbar = j.transpose() * &a.ft_report.covariance * &j;
    let e_sq = entropy_or_block(&mut d, "|F|^2", &a.sq_density, tol);
    let e_h = entropy_or_block(&mut d, "|F_hbar F|^2", &a.hft_density, tol);
    let e_s = entropy_or_block(&mut d, "|F_sigma F|^2", &a.ft_density, tol);
    let (Some(e_sq), Some(e_h)) = (e_sq, e_h) else {
        return d.finish();
    };
    if let Some(e_s) = e_s {
        d.equality("sigma_vs_hbar_entropy", e_s.value - e_h.value, tol.equality_factor * tol.log);
    }
    let direct = symmetrize(&a.hft_report.covariance).unwrap_or_else(|_| a.hft_report.covariance.clone());
    let scale = cov_hbar.amax().max(f64::MIN_POSITIVE);
    d.equality("hbar_covariance_conjugation", (&direct - &cov_hbar).amax() / scale, tol.interpolation);

    let (Some(ld_w), Some(ld_sq), Some(ld_h)) =
        (log_det(&a.report.covariance), log_det(&a.sq_report.covariance), log_det(&cov_hbar))
    else {
        d.block("singular covariance in the entropy chain");
        return d.finish();
    };
    if p.is_nan() || p <= 0.0 {
        d.block("nonpositive purity");
        return d.finish();
    }
    let t1 = nn * (2.0 * PI * E).ln() + ld_w;
    let t2 = nn * (2.0 * PI * E * p).ln() + 0.5 * (ld_sq + ld_h);
    let t3 = nn * p.ln() + e_sq.value + e_h.value;
    let t4 = nn * (PI * hbar * E * p).ln();
    let band = tol.equality_factor * tol.log;
    for (name, m) in [("t1_minus_t2", t1 - t2), ("t2_minus_t3", t2 - t3), ("t3_minus_t4", t3 - t4)] {
        d.margin(name, m);
        d.equality(name, m, band);
    }
    d.finish()
}

/// `log[(2πe)^n √det Cov(Wψ)] ≥ log[(2πe)^n √det Cov(|W̃ψ|²)] ≥ E(|W̃ψ|²) ≥ n log(πħe/2)`.
pub fn certify_lieb_pure_chain(f: &WaveFunction, tol: &Tolerances) -> Result<Certificate> {
    let w = wigner_transform(&f.normalized()?)?;
    let n = f.dim_n() as f64;
    let hbar = f.hbar();
    let report = moment_report(&w)?;
    let sq = density_from_square(&w, SquareOf::Direct)?;
    let sq_report = moment_report(&sq)?;
    let mut d = Draft::new(CertName::LiebPureChain, tol.log, field_digest(&w));
    let warnings: Vec<String> =
        leak_warning("Wigner function", report.boundary_mass_fraction, tol.boundary).into_iter().collect();
    d.leak(&warnings);
    let Some(e) = entropy_or_block(&mut d, "|W|^2", &sq, tol) else {
        return Ok(d.finish());
    };
    let (Some(ld_w), Some(ld_sq)) = (log_det(&report.covariance), log_det(&sq_report.covariance)) else {
        d.block("singular covariance");
        return Ok(d.finish());
    };
    let c = n * (2.0 * PI * E).ln();
    let l1 = c + 0.5 * ld_w;
    let l2 = c + 0.5 * ld_sq;
    let bound = n * (PI * hbar * E / 2.0).ln();
    let band = tol.equality_factor * tol.log;
    // the covariance link is n·log 2 for Gaussians, so it carries no equality flag
    d.margin("covariance_link", l1 - l2);
    for (name, m) in [("shannon_link", l2 - e.value), ("lieb_link", e.value - bound)] {
        d.margin(name, m);
        d.equality(name, m, band);
    }
    Ok(d.finish())
}

/// Hermite index tuples in order of increasing total degree.
fn probe_basis(dim_n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(k);
    let mut degree = 0;
    while out.len() < k {
        let mut tuples: Vec<Vec<usize>> = Vec::new();
        let mut cur = vec![0usize; dim_n];
        fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, acc: &mut Vec<Vec<usize>>) {
            if pos + 1 == cur.len() {
                cur[pos] = left;
                acc.push(cur.clone());
                return;
            }
            for v in (0..=left).rev() {
                cur[pos] = v;
                rec(pos + 1, left - v, cur, acc);
            }
        }
        rec(0, degree, &mut cur, &mut tuples);
        for t in tuples {
            if out.len() < k {
                out.push(t);
            }
        }
        degree += 1;
    }
    out
}

/// Default probe size on 256-point axes.
pub const DEFAULT_PROBE_SIZE: usize = 8;

/// `ρ_jk = (2πħ)^n ∫ F̃ · conj(W(h_j, h_k))` must be positive semi-definite
/// for a Wigner function. Failure is conclusive; a pass only means no
/// violation was seen among the first `k` Hermite states.
pub fn positivity_probe(f: &Field, k: usize, tol: &Tolerances) -> Result<Certificate> {
    if k == 0 {
        return Err(Error::InvalidArgument("probe size must be at least 1".into()));
    }
    if !f.is_real(1e-9) {
        return Err(Error::InvalidArgument("positivity probe needs a real field".into()));
    }
    let grid = f.grid();
    let n = grid.dim_n;
    let hbar = grid.hbar;
    let ft = normalize_mass(f)?;
    let basis = probe_basis(n, k);
    let top = basis.last().expect("k >= 1");
    let w_top = hermite_cross_wigner(top, top, grid)?;
    if w_top.boundary_mass_fraction() > tol.boundary {
        return Err(Error::ResolutionExceeded { order: top.iter().sum() });
    }
    let scale = (2.0 * PI * hbar).powi(n as i32);
    let mut rho = DMatrix::<Complex64>::zeros(k, k);
    for (j, bj) in basis.iter().enumerate() {
        for (l, bl) in basis.iter().enumerate().skip(j) {
            let w = hermite_cross_wigner(bj, bl, grid)?;
            let mut acc = crate::numeric::KahanSumComplex::new();
            for (fv, wv) in ft.values().iter().zip(w.values()) {
                acc.add(fv * wv.conj());
            }
            let v = acc.value() * grid.cell_volume() * scale;
            rho[(j, l)] = v;
            rho[(l, j)] = v.conj();
        }
    }
    let mut d = Draft::new(CertName::PositivityProbe, tol.probe, field_digest(f));
    let ev = hermitian_eigenvalues(&rho);
    d.margin("min_eigenvalue", ev[0]);
    d.margin("rho_00", rho[(0, 0)].re);
    let trace: f64 = (0..k).map(|i| rho[(i, i)].re).sum();
    // a truncated density matrix captures at most unit trace
    d.equalities.push(EqualityCheck { name: "uncaptured_trace".into(), residual: 1.0 - trace, holds: 1.0 - trace >= -tol.probe });
    let warnings: Vec<String> =
        leak_warning("field", f.boundary_mass_fraction(), tol.boundary).into_iter().collect();
    d.leak(&warnings);
    Ok(d.finish())
}

/// Runs the refined analysis on `F` and on `F∘S` and checks that the
/// covariance blocks transform as `S⁻¹ Cov S⁻ᵀ`, the purity is unchanged and
/// the refined verdicts agree.
pub fn certify_symplectic_invariance(f: &Field, s: &SympMatrix, tol: &Tolerances) -> Result<Certificate> {
    if s.dim_n() != f.dim_n() {
        return Err(Error::DimensionMismatch { expected: 2 * f.dim_n(), got: s.side() });
    }
    if !is_symplectic(s, tol.symplectic) && !is_anti_symplectic(s, tol.symplectic) {
        return Err(Error::NotAsp);
    }
    let g = resample_linear_map(f, s.entries(), 1.0, Interpolation::Cubic)?;
    let a = analyze_field(f, tol)?;
    let b = analyze_field(&g, tol)?;
    let sinv = s.try_inverse()?.into_inner();
    let transport = |c: &DMatrix<f64>| &sinv * c * sinv.transpose();
    let mut d = Draft::new(CertName::SymplecticInvariance, tol.interpolation, a.digest.clone());
    d.leak(&a.warnings);
    d.leak(&b.warnings);
    for (name, before, after) in [
        ("covariance", &a.report.covariance, &b.report.covariance),
        ("covariance_sq", &a.sq_report.covariance, &b.sq_report.covariance),
        ("covariance_ft_sq", &a.ft_report.covariance, &b.ft_report.covariance),
    ] {
        let expected = transport(before);
        let rel = (after - &expected).amax() / expected.amax().max(f64::MIN_POSITIVE);
        d.margin(format!("minus_relative_error_{name}"), -rel);
    }
    d.margin("minus_relative_error_purity", -((b.report.purity - a.report.purity) / a.report.purity).abs());
    let ra = certify_refined_rsup(&a, tol)?;
    let rb = certify_refined_rsup(&b, tol)?;
    for (name, x, y) in [("ineq1", &ra.ineq1, &rb.ineq1), ("ineq2", &ra.ineq2, &rb.ineq2)] {
        if x.verdict == Verdict::Indeterminate || y.verdict == Verdict::Indeterminate {
            d.block(format!("refined {name} is indeterminate before or after resampling"));
            continue;
        }
        let agree = x.verdict == y.verdict;
        d.equality(format!("{name}_verdicts_agree"), if agree { 0.0 } else { 1.0 }, 0.5);
        if !agree {
            d.forced_fail = true;
            d.warn(format!("refined {name} verdict changed under resampling"));
        }
    }
    Ok(d.finish())
}

/// Safety factor keeping the dilated field strictly inside the RSUP region.
pub const DILATION_SAFETY: f64 = 1e-3;

/// Largest `μ ≤ 1` (shrunk by [`DILATION_SAFETY`]) with
/// `λ_{σ,1}(Cov)/μ² ≥ ħ/2`, and the RSUP certificate of `F_μ`. Fields
/// already within tolerance of the RSUP region are left alone.
pub fn dilation_to_rsup(f: &Field, tol: &Tolerances) -> Result<(f64, Certificate)> {
    let hbar = f.hbar();
    let report = moment_report(f)?;
    let spectrum = symplectic_spectrum(&report.covariance)
        .map_err(|_| Error::SingularCovariance { det: report.covariance.determinant() })?;
    let lambda = spectrum.min();
    if lambda >= hbar / 2.0 - tol.psd_abs(hbar) {
        return Ok((1.0, certify_rsup(&report, hbar, tol)?));
    }
    let mu = ((2.0 * lambda / hbar).sqrt() * (1.0 - DILATION_SAFETY)).min(1.0);
    let g = crate::grid::dilate(f, mu)?;
    let mut cert = certify_rsup(&moment_report(&g)?, hbar, tol)?;
    if let Some(w) = leak_warning("dilated field", g.boundary_mass_fraction(), tol.boundary) {
        cert.warnings.push(w);
    }
    Ok((mu, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{AxisSpec, PhaseSpaceGrid};
    use crate::states::{make_disc_indicator, make_example_final1, make_gaussian_pure_wigner, make_hermite_state};
    use approx::assert_relative_eq;

    fn report_with_cov(cov: DMatrix<f64>) -> MomentReport {
        let d = cov.nrows();
        MomentReport {
            mass: Complex64::new(1.0, 0.0),
            mean: vec![0.0; d],
            covariance: cov,
            purity: 1.0,
            boundary_mass_fraction: 0.0,
        }
    }

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(v))
    }

    fn wf0(hbar: f64) -> Field {
        let g = PhaseSpaceGrid::uniform(1, 256, 6.0 * hbar.sqrt(), hbar).unwrap();
        make_gaussian_pure_wigner(&(DMatrix::identity(2, 2) * (hbar / 2.0)), &[0.0, 0.0], &g).unwrap()
    }

    #[test]
    fn heisenberg_examples() {
        let tol = Tolerances::default();
        let hbar = 1.0;
        let c = certify_heisenberg(&report_with_cov(diag(&[0.5, 0.5])), hbar, &tol);
        assert_eq!(c.verdict, Verdict::Pass);
        assert!(c.min_margin().abs() < 1e-15);
        let c = certify_heisenberg(&report_with_cov(diag(&[0.25, 0.25])), hbar, &tol);
        assert_eq!(c.verdict, Verdict::Fail);
        assert_relative_eq!(c.min_margin(), -0.25, epsilon = 1e-15);
        let c = certify_heisenberg(&report_with_cov(diag(&[1.0 / 8.0, 2.0])), hbar, &tol);
        assert_eq!(c.verdict, Verdict::Pass);
        let c = certify_heisenberg(&report_with_cov(diag(&[0.0, 2.0])), hbar, &tol);
        assert_eq!(c.verdict, Verdict::Indeterminate);
        assert!(!c.warnings.is_empty());
    }

    #[test]
    fn rsup_from_reports() {
        let tol = Tolerances::default();
        let hbar = 1.0;
        let c = certify_rsup(&report_with_cov(diag(&[0.5, 0.5])), hbar, &tol).unwrap();
        assert_eq!(c.verdict, Verdict::Pass);
        let c = certify_rsup(&report_with_cov(diag(&[0.3, 0.3])), hbar, &tol).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);
        assert_relative_eq!(c.margin("lambda_sigma_1_minus_half_hbar").unwrap(), -0.2, epsilon = 1e-12);
        let c = certify_rsup(&report_with_cov(diag(&[1.0, 0.0])), hbar, &tol).unwrap();
        assert_eq!(c.verdict, Verdict::Indeterminate);
    }

    #[test]
    fn ground_state_ladder() {
        let tol = Tolerances::default();
        for hbar in [1.0, 0.5] {
            let f = wf0(hbar);
            let a = analyze_field(&f, &tol).unwrap();
            assert!(a.warnings.is_empty());
            let r = certify_refined_rsup(&a, &tol).unwrap();
            assert!(r.ineq1.passed() && r.ineq2.passed());
            assert!(r.report.gap_min_eig.abs() < 1e-9 * hbar);
            let cor = certify_corollary1(&a, &tol);
            assert!(cor.iter().all(|c| c.passed()));
            assert!(cor[0].min_margin().abs() < 1e-9);
            assert_relative_eq!(cor[1].min_margin(), hbar / 4.0, max_relative = 1e-8);
            assert_relative_eq!(cor[2].min_margin(), hbar / 4.0, max_relative = 1e-8);
            let s = certify_saturation(&f, &a, &tol).unwrap();
            assert_eq!(s.verdict, Verdict::Pass);
            assert!(s.equalities.iter().all(|e| e.holds), "{:?}", s.equalities);
            let h = certify_heinig_smith(&a, &tol);
            assert!(h.passed() && h.equality("gaussian_equality").unwrap().holds);
            let chain = certify_hirschman_shannon_chain(&a, &tol);
            assert!(chain.passed(), "{chain:?}");
            assert!(chain.equalities.iter().all(|e| e.holds), "{:?}", chain.equalities);
            let p = certify_purity_equality(&f, &a, &tol).unwrap();
            assert!(p.passed(), "{p:?}");
        }
    }

    #[test]
    fn squeezed_gaussian_saturates() {
        let tol = Tolerances::default();
        let hbar = 1.0;
        // x standard deviation √ħ: 8√ħ keeps the truncated variance below 1e-12
        let g = PhaseSpaceGrid::uniform(1, 256, 8.0, hbar).unwrap();
        let f = make_gaussian_pure_wigner(&diag(&[hbar, hbar / 4.0]), &[0.0, 0.0], &g).unwrap();
        let a = analyze_field(&f, &tol).unwrap();
        let s = certify_saturation(&f, &a, &tol).unwrap();
        assert!(s.passed(), "{s:?}");
        assert!(s.equalities.iter().all(|e| e.holds), "{:?}", s.equalities);
    }

    #[test]
    fn final1_fails_refined_but_passes_rsup() {
        let tol = Tolerances::default();
        let hbar = 1.0;
        let f = make_example_final1(&PhaseSpaceGrid::uniform(1, 256, 6.0, hbar).unwrap()).unwrap();
        let a = analyze_field(&f, &tol).unwrap();
        assert!(certify_rsup(&a.report, hbar, &tol).unwrap().passed());
        let cor = certify_corollary1(&a, &tol);
        assert_eq!(cor[1].verdict, Verdict::Fail);
        assert_relative_eq!(cor[1].min_margin(), -(11.0 / 8.0 - 0.5) * hbar, epsilon = 1e-4);
        let r = certify_refined_rsup(&a, &tol).unwrap();
        assert_eq!(r.ineq1.verdict, Verdict::Fail);
        let (mu, c) = dilation_to_rsup(&f, &tol).unwrap();
        assert_eq!(mu, 1.0);
        assert!(c.passed());
    }

    #[test]
    fn disc_dilation_restores_rsup() {
        let tol = Tolerances::default();
        let hbar = 1.0;
        let f = make_disc_indicator(1.0, &PhaseSpaceGrid::uniform(1, 256, 6.0, hbar).unwrap()).unwrap();
        let rep = moment_report(&f).unwrap();
        assert_eq!(certify_rsup(&rep, hbar, &tol).unwrap().verdict, Verdict::Fail);
        let (mu, c) = dilation_to_rsup(&f, &tol).unwrap();
        assert!(mu < 1.0 && mu > 0.6);
        assert!(c.passed(), "{c:?}");
    }

    #[test]
    fn probe_on_pure_and_mixed_states() {
        let tol = Tolerances::default();
        let f = wf0(1.0);
        let c = positivity_probe(&f, 8, &tol).unwrap();
        assert!(c.passed());
        assert_relative_eq!(c.margin("rho_00").unwrap(), 1.0, epsilon = 1e-9);
        let grid = PhaseSpaceGrid::uniform(1, 64, 2.0, 1.0).unwrap();
        let g = make_gaussian_pure_wigner(&(DMatrix::identity(2, 2) * 0.5), &[0.0, 0.0], &grid).unwrap();
        assert!(matches!(positivity_probe(&g, 30, &tol), Err(Error::ResolutionExceeded { .. })));
    }

    #[test]
    fn invariance_under_rotation_and_time_reversal() {
        let tol = Tolerances::default();
        let f = wf0(1.0);
        let j = SympMatrix::new(j_matrix(1)).unwrap();
        let c = certify_symplectic_invariance(&f, &j, &tol).unwrap();
        assert!(c.passed(), "{c:?}");
        let t = SympMatrix::time_reversal(1);
        assert!(certify_symplectic_invariance(&f, &t, &tol).unwrap().passed());
        let bad = SympMatrix::from_diagonal(&[2.0, 2.0]).unwrap();
        assert!(matches!(certify_symplectic_invariance(&f, &bad, &tol), Err(Error::NotAsp)));
    }

    #[test]
    fn lieb_chain_ground_state() {
        let tol = Tolerances::default();
        let hbar = 1.0;
        let h0 = make_hermite_state(0, AxisSpec::new(256, 6.0).unwrap(), hbar).unwrap();
        let c = certify_lieb_pure_chain(&h0, &tol).unwrap();
        assert!(c.passed(), "{c:?}");
        assert_relative_eq!(c.margin("covariance_link").unwrap(), 2.0_f64.ln(), epsilon = 1e-8);
        assert!(c.margin("lieb_link").unwrap().abs() < 1e-8);
    }

    #[test]
    fn probe_basis_order() {
        assert_eq!(probe_basis(1, 3), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(probe_basis(2, 4), vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0]]);
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.set("psd", 1e-4).unwrap();
        assert_eq!(t.psd, 1e-4);
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("psd", -1.0).is_err());
    }
}
