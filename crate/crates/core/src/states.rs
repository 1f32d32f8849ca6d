//! Generators for the analytic test objects: Gaussian pure states, Hermite
//! functions, mixtures, tensor products, the disc indicator and the two
//! non-Wigner counterexample fields.

use std::f64::consts::PI;
use std::path::PathBuf;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{AxisSpec, Field, PhaseSpaceGrid, WaveFunction};
use crate::symplectic::{is_symplectic, symmetric_eigenvalues, symmetrize, symplectic_residual, SympMatrix};
use crate::transforms::validate_weights;

/// Tolerance on `(2/ħ)Cov ∈ Sp(n)` for a covariance declared pure.
pub const PURE_GAUSSIAN_TOLERANCE: f64 = 1e-8;
/// Boundary-shell fraction above which a Hermite state counts as unresolved.
pub const HERMITE_BOUNDARY_THRESHOLD: f64 = 1e-6;
/// Orthonormality drift that triggers Gram–Schmidt on recurrence output.
pub const HERMITE_DRIFT_THRESHOLD: f64 = 1e-10;
/// Largest total half-dimension a tensor product may produce.
pub const MAX_TENSOR_DIM: usize = 2;

/// Description of a state or candidate field, as accepted on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// Pure Gaussian Wigner function. `covariance` defaults to `(ħ/2)I`,
    /// `center` to the origin.
    GaussianPure {
        #[serde(default = "one")]
        dim_n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        covariance: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    /// Wigner function of the `k`-th Hermite function (n = 1).
    Hermite { k: usize },
    /// Convex combination of the children's fields.
    Mixture { weights: Vec<f64>, children: Vec<StateSpec> },
    /// `χ_R / πR²` on the disc of radius `R` (n = 1).
    DiscIndicator { radius: f64 },
    /// `(48/πħ)(|z|²/ħ − 1/6) e^{−4|z|²/ħ}` (n = 1).
    ExampleFinal1,
    /// `(1/2πħ)(|z|²/ħ − 1) e^{−|z|²/2ħ}` (n = 1). With `literal` the
    /// radial factor is `|z|/ħ − 1` instead; that variant is not normalized.
    ExampleFinal2 {
        #[serde(default)]
        literal: bool,
    },
    /// Product of n = 1 children, coordinates `(x_1, x_2, p_1, p_2)`.
    TensorProduct { children: Vec<StateSpec> },
    /// A field file (binary or CSV).
    CustomFile { path: PathBuf },
}

fn one() -> usize {
    1
}

impl StateSpec {
    pub fn ground_state(dim_n: usize) -> Self {
        StateSpec::GaussianPure { dim_n, covariance: None, center: None }
    }

    /// Phase-space half-dimension of the field this spec produces, if it
    /// can be known without reading files.
    pub fn dim_n(&self) -> Option<usize> {
        match self {
            StateSpec::GaussianPure { dim_n, covariance, center } => Some(
                covariance
                    .as_ref()
                    .map(|c| c.len() / 2)
                    .or_else(|| center.as_ref().map(|c| c.len() / 2))
                    .unwrap_or(*dim_n),
            ),
            StateSpec::Hermite { .. }
            | StateSpec::DiscIndicator { .. }
            | StateSpec::ExampleFinal1
            | StateSpec::ExampleFinal2 { .. } => Some(1),
            StateSpec::Mixture { children, .. } => children.first().and_then(|c| c.dim_n()),
            StateSpec::TensorProduct { children } => {
                children.iter().map(|c| c.dim_n()).sum::<Option<usize>>()
            }
            StateSpec::CustomFile { .. } => None,
        }
    }

    /// Largest eigenvalue of the analytic covariance, used to size grids.
    pub fn covariance_scale(&self, hbar: f64) -> f64 {
        match self {
            StateSpec::GaussianPure { covariance, .. } => match covariance {
                Some(rows) => {
                    let m = rows_to_matrix(rows).ok();
                    m.map(|m| symmetric_eigenvalues(&m).last().copied().unwrap_or(hbar / 2.0))
                        .unwrap_or(hbar / 2.0)
                }
                None => hbar / 2.0,
            },
            StateSpec::Hermite { k } => (2 * k + 1) as f64 * hbar / 2.0,
            StateSpec::Mixture { children, .. } | StateSpec::TensorProduct { children } => {
                children.iter().map(|c| c.covariance_scale(hbar)).fold(0.0, f64::max)
            }
            StateSpec::DiscIndicator { radius } => radius * radius / 4.0,
            StateSpec::ExampleFinal1 => hbar / 2.0,
            StateSpec::ExampleFinal2 { .. } => 3.0 * hbar,
            StateSpec::CustomFile { .. } => hbar / 2.0,
        }
    }

    /// Default half extent `6·max(√ħ, √λ_max(Cov))`, widened for the disc so
    /// its edge stays inside the grid.
    pub fn default_half_extent(&self, hbar: f64) -> f64 {
        let base = 6.0 * hbar.sqrt().max(self.covariance_scale(hbar).sqrt());
        match self {
            StateSpec::DiscIndicator { radius } => base.max(1.5 * radius),
            _ => base,
        }
    }
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("covariance must be a square matrix".into()));
    }
    Ok(DMatrix::from_row_iterator(n, n, rows.iter().flatten().copied()))
}

/// Samples the field described by `spec` on `grid`.
pub fn build_field(spec: &StateSpec, grid: &PhaseSpaceGrid) -> Result<Field> {
    let hbar = grid.hbar;
    match spec {
        StateSpec::GaussianPure { covariance, center, .. } => {
            let d = 2 * grid.dim_n;
            let cov = match covariance {
                Some(rows) => rows_to_matrix(rows)?,
                None => DMatrix::identity(d, d) * (hbar / 2.0),
            };
            let z0 = center.clone().unwrap_or_else(|| vec![0.0; d]);
            make_gaussian_pure_wigner(&cov, &z0, grid)
        }
        StateSpec::Hermite { k } => {
            require_dim(grid, 1, "hermite")?;
            let f = hermite_cross_wigner(&[*k], &[*k], grid)?;
            let fraction = f.boundary_mass_fraction();
            if fraction > HERMITE_BOUNDARY_THRESHOLD {
                return Err(Error::ResolutionExceeded { order: *k });
            }
            Ok(f.real_part().with_label(format!("hermite({k})")))
        }
        StateSpec::Mixture { weights, children } => {
            validate_weights(weights, children.len())?;
            let mut acc: Option<Field> = None;
            for (w, c) in weights.iter().zip(children) {
                let f = build_field(c, grid)?.scaled(Complex64::new(*w, 0.0));
                acc = Some(match acc {
                    None => f,
                    Some(a) => a.zip_with(&f, |u, v| u + v)?,
                });
            }
            Ok(acc.expect("validated nonempty").with_label("mixture"))
        }
        StateSpec::DiscIndicator { radius } => make_disc_indicator(*radius, grid),
        StateSpec::ExampleFinal1 => make_example_final1(grid),
        StateSpec::ExampleFinal2 { literal } => {
            if *literal {
                make_example_final2_literal(grid)
            } else {
                make_example_final2(grid)
            }
        }
        StateSpec::TensorProduct { children } => {
            let dims: Vec<usize> = children
                .iter()
                .map(|c| c.dim_n().ok_or_else(|| Error::InvalidArgument("tensor factors must be n = 1 states".into())))
                .collect::<Result<_>>()?;
            if dims.iter().any(|&d| d != 1) {
                return Err(Error::InvalidArgument("tensor factors must be n = 1 states".into()));
            }
            if children.len() > MAX_TENSOR_DIM {
                return Err(Error::BudgetExceeded(format!(
                    "tensor products are limited to n <= {MAX_TENSOR_DIM}"
                )));
            }
            require_dim(grid, children.len(), "tensor_product")?;
            let factors: Vec<Field> = children
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let g = PhaseSpaceGrid::new(vec![grid.x_axes[i]], vec![grid.p_axes[i]], hbar)?;
                    build_field(c, &g)
                })
                .collect::<Result<_>>()?;
            make_tensor_product(&factors)
        }
        StateSpec::CustomFile { path } => {
            let f = crate::io::read_field(path)?;
            if f.grid() != grid {
                return Err(Error::GridMismatch);
            }
            Ok(f)
        }
    }
}

fn require_dim(grid: &PhaseSpaceGrid, n: usize, what: &str) -> Result<()> {
    if grid.dim_n != n {
        return Err(Error::InvalidArgument(format!("{what} needs a grid with n = {n}, got n = {}", grid.dim_n)));
    }
    Ok(())
}

/// `Wf(z) = (πħ)^{−n} exp(−½(z−z₀)·Cov⁻¹(z−z₀))`, rejecting covariances
/// that are not those of a pure state.
pub fn make_gaussian_pure_wigner(cov: &DMatrix<f64>, z0: &[f64], grid: &PhaseSpaceGrid) -> Result<Field> {
    let d = 2 * grid.dim_n;
    let hbar = grid.hbar;
    if cov.shape() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, got: cov.nrows() });
    }
    if z0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: z0.len() });
    }
    let cov = symmetrize(cov)?;
    let scaled = SympMatrix::new(&cov * (2.0 / hbar))?;
    if !is_symplectic(&scaled, PURE_GAUSSIAN_TOLERANCE) {
        return Err(Error::NotPureGaussian { residual: symplectic_residual(&scaled) });
    }
    let inv = cov.clone().try_inverse().ok_or(Error::SingularCovariance { det: cov.determinant() })?;
    let norm = (PI * hbar).powi(-(grid.dim_n as i32));
    let mut c = vec![0.0; d];
    Field::from_real_fn(grid.clone(), "gaussian_pure", |z| {
        for a in 0..d {
            c[a] = z[a] - z0[a];
        }
        let mut q = 0.0;
        for a in 0..d {
            for b in 0..d {
                q += c[a] * inv[(a, b)] * c[b];
            }
        }
        norm * (-0.5 * q).exp()
    })
}

/// Pure Gaussian wavefunction (n = 1) whose Wigner function has covariance
/// `[[a, c], [c, b]]` (with `ab − c² = ħ²/4`) and center `(x₀, p₀)`.
pub fn gaussian_wavefunction(cov: &DMatrix<f64>, center: [f64; 2], axis: AxisSpec, hbar: f64) -> Result<WaveFunction> {
    if cov.shape() != (2, 2) {
        return Err(Error::DimensionMismatch { expected: 2, got: cov.nrows() });
    }
    let cov = symmetrize(cov)?;
    let scaled = SympMatrix::new(&cov * (2.0 / hbar))?;
    if !is_symplectic(&scaled, PURE_GAUSSIAN_TOLERANCE) {
        return Err(Error::NotPureGaussian { residual: symplectic_residual(&scaled) });
    }
    let (a, c) = (cov[(0, 0)], cov[(0, 1)]);
    let [x0, p0] = center;
    let norm = (2.0 * PI * a).powf(-0.25);
    WaveFunction::from_fn(vec![axis], hbar, |x| {
        let u = x[0] - x0;
        let modulus = norm * (-u * u / (4.0 * a)).exp();
        Complex64::from_polar(modulus, c * u * u / (2.0 * hbar * a) + p0 * x[0] / hbar)
    })
}

/// Hermite functions `h_0..=h_kmax` on one axis, by the three-term
/// recurrence, re-orthonormalized when quadrature shows drift.
pub fn hermite_states(kmax: usize, axis: AxisSpec, hbar: f64) -> Result<Vec<WaveFunction>> {
    axis.validate()?;
    let xs = axis.coords();
    let s = hbar.sqrt();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(kmax + 1);
    rows.push(xs.iter().map(|x| (PI * hbar).powf(-0.25) * (-x * x / (2.0 * hbar)).exp()).collect());
    for k in 0..kmax {
        let prev = rows.get(k.wrapping_sub(1)).filter(|_| k > 0);
        let c1 = (2.0 / (k + 1) as f64).sqrt();
        let c0 = (k as f64 / (k + 1) as f64).sqrt();
        let next: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(j, x)| c1 * (x / s) * rows[k][j] - prev.map_or(0.0, |p| c0 * p[j]))
            .collect();
        rows.push(next);
    }
    let mut states: Vec<WaveFunction> = rows
        .into_iter()
        .map(|r| WaveFunction::new(vec![axis], r.into_iter().map(|v| Complex64::new(v, 0.0)).collect(), hbar))
        .collect::<Result<_>>()?;
    if let Some(k) = states.iter().position(|f| f.boundary_mass_fraction() > HERMITE_BOUNDARY_THRESHOLD) {
        return Err(Error::ResolutionExceeded { order: k });
    }
    if orthonormality_drift(&states)? > HERMITE_DRIFT_THRESHOLD {
        gram_schmidt(&mut states)?;
    }
    Ok(states)
}

pub fn make_hermite_state(k: usize, axis: AxisSpec, hbar: f64) -> Result<WaveFunction> {
    Ok(hermite_states(k, axis, hbar)?.pop().expect("k+1 states"))
}

/// `max |(h_j|h_k) − δ_jk|`.
pub fn orthonormality_drift(states: &[WaveFunction]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (j, a) in states.iter().enumerate() {
        for (k, b) in states.iter().enumerate().skip(j) {
            let target = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((a.inner(b)? - Complex64::new(target, 0.0)).norm());
        }
    }
    Ok(worst)
}

fn gram_schmidt(states: &mut [WaveFunction]) -> Result<()> {
    for k in 0..states.len() {
        let mut v = states[k].values().to_vec();
        for j in 0..k {
            let proj = WaveFunction::new(states[k].axes().to_vec(), v.clone(), states[k].hbar())?.inner(&states[j])?;
            for (vi, hj) in v.iter_mut().zip(states[j].values()) {
                *vi -= proj * hj;
            }
        }
        states[k] = WaveFunction::new(states[k].axes().to_vec(), v, states[k].hbar())?.normalized()?;
    }
    Ok(())
}

/// Generalized Laguerre polynomial `L_m^{(α)}(x)`.
pub fn laguerre(m: usize, alpha: f64, x: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + alpha - x;
    for k in 1..m {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Closed-form `W(h_m, h_n)(x, p)` for n = 1.
pub fn hermite_cross_wigner_at(m: usize, n: usize, x: f64, p: f64, hbar: f64) -> Complex64 {
    if m > n {
        return hermite_cross_wigner_at(n, m, x, p, hbar).conj();
    }
    let r2 = (x * x + p * p) / hbar;
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let ratio = (0.5 * (ln_factorial(m) - ln_factorial(n))).exp();
    let a = Complex64::new(x, p) * (2.0 / hbar).sqrt();
    let lag = laguerre(m, (n - m) as f64, 2.0 * r2);
    a.powu((n - m) as u32) * (sign / (PI * hbar) * ratio * lag * (-r2).exp())
}

/// `W(h_{m_1}⊗…, h_{n_1}⊗…)` on a grid of dimension `ms.len()`.
pub fn hermite_cross_wigner(ms: &[usize], ns: &[usize], grid: &PhaseSpaceGrid) -> Result<Field> {
    let n = grid.dim_n;
    if ms.len() != n || ns.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: ms.len() });
    }
    let hbar = grid.hbar;
    Field::from_fn(grid.clone(), format!("W(h{ms:?},h{ns:?})"), |z| {
        (0..n).map(|i| hermite_cross_wigner_at(ms[i], ns[i], z[i], z[n + i], hbar)).product()
    })
}

/// `χ_R/(πR²)` sampled pointwise (closed disc), n = 1.
pub fn make_disc_indicator(radius: f64, grid: &PhaseSpaceGrid) -> Result<Field> {
    require_dim(grid, 1, "disc_indicator")?;
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidArgument(format!("disc radius must be positive, got {radius}")));
    }
    let limit = grid.axes().iter().map(|a| a.half_extent).fold(f64::INFINITY, f64::min);
    if radius >= limit {
        return Err(Error::InvalidArgument(format!(
            "disc radius {radius} does not fit inside half extent {limit}"
        )));
    }
    let v = 1.0 / (PI * radius * radius);
    let r2 = radius * radius;
    Field::from_real_fn(grid.clone(), format!("disc({radius})"), |z| {
        if z[0] * z[0] + z[1] * z[1] <= r2 {
            v
        } else {
            0.0
        }
    })
}

pub fn make_example_final1(grid: &PhaseSpaceGrid) -> Result<Field> {
    require_dim(grid, 1, "example_final1")?;
    let hbar = grid.hbar;
    Field::from_real_fn(grid.clone(), "example_final1", |z| {
        let r2 = (z[0] * z[0] + z[1] * z[1]) / hbar;
        48.0 / (PI * hbar) * (r2 - 1.0 / 6.0) * (-4.0 * r2).exp()
    })
}

pub fn make_example_final2(grid: &PhaseSpaceGrid) -> Result<Field> {
    require_dim(grid, 1, "example_final2")?;
    let hbar = grid.hbar;
    Field::from_real_fn(grid.clone(), "example_final2", |z| {
        let r2 = (z[0] * z[0] + z[1] * z[1]) / hbar;
        (r2 - 1.0) * (-0.5 * r2).exp() / (2.0 * PI * hbar)
    })
}

/// The radial factor `|z|/ħ − 1` variant; mass ≈ 0.2533 at ħ = 1.
pub fn make_example_final2_literal(grid: &PhaseSpaceGrid) -> Result<Field> {
    require_dim(grid, 1, "example_final2")?;
    let hbar = grid.hbar;
    Field::from_real_fn(grid.clone(), "example_final2_literal", |z| {
        let r2 = z[0] * z[0] + z[1] * z[1];
        (r2.sqrt() / hbar - 1.0) * (-0.5 * r2 / hbar).exp() / (2.0 * PI * hbar)
    })
}

/// `(F_1 ⊗ F_2)(x_1, x_2, p_1, p_2) = F_1(x_1, p_1) F_2(x_2, p_2)`.
pub fn make_tensor_product(children: &[Field]) -> Result<Field> {
    if children.is_empty() {
        return Err(Error::InvalidArgument("tensor product needs at least one factor".into()));
    }
    if children.iter().any(|c| c.dim_n() != 1) {
        return Err(Error::InvalidArgument("tensor factors must be n = 1 fields".into()));
    }
    let n = children.len();
    if n > MAX_TENSOR_DIM {
        return Err(Error::BudgetExceeded(format!("tensor products are limited to n <= {MAX_TENSOR_DIM}")));
    }
    let hbar = children[0].hbar();
    if children.iter().any(|c| (c.hbar() - hbar).abs() > 1e-12 * hbar) {
        return Err(Error::GridMismatch);
    }
    let grid = PhaseSpaceGrid::new(
        children.iter().map(|c| c.grid().x_axes[0]).collect(),
        children.iter().map(|c| c.grid().p_axes[0]).collect(),
        hbar,
    )?;
    let shape = grid.shape();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    crate::grid::for_each_multi(&shape, |flat, idx| {
        values[flat] = (0..n)
            .map(|i| children[i].values()[idx[i] * children[i].grid().p_axes[0].points + idx[n + i]])
            .product();
    });
    let label = children.iter().map(|c| c.label()).collect::<Vec<_>>().join("⊗");
    Field::new(grid, values, label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::integrate;
    use crate::moments::moment_report;
    use crate::transforms::cross_wigner;
    use approx::assert_relative_eq;

    fn grid(points: usize, l: f64, hbar: f64) -> PhaseSpaceGrid {
        PhaseSpaceGrid::uniform(1, points, l, hbar).unwrap()
    }

    #[test]
    fn laguerre_values() {
        assert_eq!(laguerre(0, 3.0, 1.7), 1.0);
        assert_relative_eq!(laguerre(1, 0.0, 0.5), 0.5, epsilon = 1e-15);
        // L_2^{(1)}(x) = (x² − 6x + 6)/2
        assert_relative_eq!(laguerre(2, 1.0, 0.3), (0.09 - 1.8 + 6.0) / 2.0, epsilon = 1e-14);
        // L_3^{(0)}(x) = (−x³ + 9x² − 18x + 6)/6
        let x = 1.3_f64;
        assert_relative_eq!(laguerre(3, 0.0, x), (-x.powi(3) + 9.0 * x * x - 18.0 * x + 6.0) / 6.0, epsilon = 1e-13);
    }

    #[test]
    fn hermite_orthonormal_and_recurrence() {
        let axis = AxisSpec::new(256, 6.0).unwrap();
        let hs = hermite_states(8, axis, 1.0).unwrap();
        assert!(orthonormality_drift(&hs).unwrap() < 1e-10);
        let h0 = &hs[0];
        assert_relative_eq!(h0.l2_norm_sq(), 1.0, epsilon = 1e-12);
        assert!(make_hermite_state(60, AxisSpec::new(64, 3.0).unwrap(), 1.0).is_err());
    }

    #[test]
    fn closed_form_cross_wigner_matches_fft() {
        let hbar = 0.7;
        let axis = AxisSpec::new(256, 7.0).unwrap();
        let hs = hermite_states(4, axis, hbar).unwrap();
        for (m, n) in [(0, 1), (1, 0), (1, 3), (2, 2), (3, 1), (0, 4)] {
            let w = cross_wigner(&hs[m], &hs[n]).unwrap();
            let c = hermite_cross_wigner(&[m], &[n], w.grid()).unwrap();
            let err = w.max_abs_diff(&c).unwrap();
            assert!(err < 1e-8, "({m},{n}) err={err}");
        }
    }

    #[test]
    fn gaussian_pure_generator() {
        let hbar = 1.0;
        let g = grid(256, 6.0, hbar);
        let f = make_gaussian_pure_wigner(&(DMatrix::identity(2, 2) * 0.5), &[0.0, 0.0], &g).unwrap();
        let r = moment_report(&f).unwrap();
        assert_relative_eq!(r.purity, 1.0, max_relative = 1e-8);

        let squeezed = DMatrix::from_diagonal(&nalgebra::dvector![hbar, hbar / 4.0]);
        let f = make_gaussian_pure_wigner(&squeezed, &[0.0, 0.0], &g).unwrap();
        let r = moment_report(&f).unwrap();
        assert_relative_eq!(r.purity, 1.0, max_relative = 1e-8);
        assert_relative_eq!(r.covariance[(1, 1)], hbar / 4.0, max_relative = 1e-8);

        let mixed = DMatrix::identity(2, 2) * hbar;
        assert!(matches!(
            make_gaussian_pure_wigner(&mixed, &[0.0, 0.0], &g),
            Err(Error::NotPureGaussian { .. })
        ));
    }

    #[test]
    fn gaussian_wavefunction_matches_wigner_closed_form() {
        let hbar = 1.0;
        let cov = DMatrix::from_row_slice(2, 2, &[0.8, 0.3, 0.3, (0.25 + 0.09) / 0.8]);
        let axis = AxisSpec::new(256, 8.0).unwrap();
        let psi = gaussian_wavefunction(&cov, [0.4, -0.7], axis, hbar).unwrap();
        assert_relative_eq!(psi.l2_norm_sq(), 1.0, max_relative = 1e-10);
        let w = crate::transforms::wigner_transform(&psi).unwrap();
        let exact = make_gaussian_pure_wigner(&cov, &[0.4, -0.7], w.grid()).unwrap();
        assert!(w.max_abs_diff(&exact).unwrap() < 1e-8);
    }

    #[test]
    fn final_examples_moments() {
        let hbar = 1.0;
        let f1 = make_example_final1(&grid(256, 6.0, hbar)).unwrap();
        let r1 = moment_report(&f1).unwrap();
        assert!((r1.mass.re - 1.0).abs() < 1e-8);
        assert_relative_eq!(r1.covariance[(0, 0)], 0.5 * hbar, max_relative = 1e-6);
        assert_relative_eq!(r1.purity, 10.0, max_relative = 1e-5);

        let l2 = 6.0 * (3.0 * hbar).sqrt();
        let f2 = make_example_final2(&grid(256, l2, hbar)).unwrap();
        let r2 = moment_report(&f2).unwrap();
        assert!((r2.mass.re - 1.0).abs() < 1e-8);
        assert_relative_eq!(r2.covariance[(0, 0)], 3.0 * hbar, max_relative = 1e-6);
        assert_relative_eq!(r2.purity, 0.5, max_relative = 1e-6);

        // oracle: literal radial factor gives mass ≈ 0.2533 at ħ = 1
        let lit = make_example_final2_literal(&grid(256, l2, hbar)).unwrap();
        assert!((integrate(&lit).re - 0.2533).abs() < 1e-3);
    }

    #[test]
    fn disc_generator() {
        let hbar = 1.0;
        let r = 2.0_f64.sqrt();
        let f = make_disc_indicator(r, &grid(256, 6.0, hbar)).unwrap();
        let rep = moment_report(&f).unwrap();
        assert!((rep.mass.re - 1.0).abs() < 0.02);
        assert_relative_eq!(rep.covariance[(0, 0)], r * r / 4.0, max_relative = 0.02);
        assert!(make_disc_indicator(7.0, &grid(64, 6.0, hbar)).is_err());
        assert!(make_disc_indicator(1.0, &PhaseSpaceGrid::uniform(2, 8, 6.0, hbar).unwrap()).is_err());
    }

    #[test]
    fn tensor_products() {
        let hbar = 1.0;
        let g = grid(32, 6.0, hbar);
        let w0 = make_gaussian_pure_wigner(&(DMatrix::identity(2, 2) * 0.5), &[0.0, 0.0], &g).unwrap();
        let t = make_tensor_product(&[w0.clone(), w0.clone()]).unwrap();
        let r = moment_report(&t).unwrap();
        assert!((&r.covariance - DMatrix::identity(4, 4) * 0.5).amax() < 1e-8);
        assert!(make_tensor_product(&[w0.clone(), w0.clone(), w0.clone()]).is_err());

        let spec = StateSpec::TensorProduct { children: vec![StateSpec::ExampleFinal1, StateSpec::ExampleFinal1] };
        let g2 = PhaseSpaceGrid::uniform(2, 32, 4.0, hbar).unwrap();
        let f = build_field(&spec, &g2).unwrap();
        let r = moment_report(&f).unwrap();
        assert_relative_eq!(r.covariance[(1, 1)], 0.5, max_relative = 1e-5);
        assert_relative_eq!(r.purity, 100.0, max_relative = 1e-3);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = StateSpec::Mixture {
            weights: vec![0.5, 0.5],
            children: vec![StateSpec::Hermite { k: 0 }, StateSpec::Hermite { k: 1 }],
        };
        let s = serde_json::to_string(&spec).unwrap();
        assert!(s.contains("\"kind\":\"mixture\""));
        let back: StateSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
        let parsed: StateSpec = serde_json::from_str(r#"{"kind":"example_final2"}"#).unwrap();
        assert_eq!(parsed, StateSpec::ExampleFinal2 { literal: false });
        assert!(serde_json::from_str::<StateSpec>(r#"{"kind":"disc_indicator","radius":1,"x":2}"#).is_err());
    }

    #[test]
    fn mixture_of_hermite_states() {
        let hbar = 1.0;
        let spec = StateSpec::Mixture {
            weights: vec![0.5, 0.5],
            children: vec![StateSpec::Hermite { k: 0 }, StateSpec::Hermite { k: 1 }],
        };
        let f = build_field(&spec, &grid(256, 6.0, hbar)).unwrap();
        let r = moment_report(&f).unwrap();
        assert_relative_eq!(r.purity, 0.5, max_relative = 1e-8);
        assert_relative_eq!(r.covariance[(0, 0)], hbar, max_relative = 1e-8);
    }
}
