//! Uniform grids on configuration space R^n and phase space R^{2n}, sampled
//! fields on them, and rectangle-rule quadrature.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{KahanSum, KahanSumComplex};

/// Largest supported half-dimension.
pub const MAX_DIM_N: usize = 4;
/// Samples kept per field before an operation refuses to allocate.
pub const MAX_TOTAL_POINTS: usize = 1 << 24;
/// Thickness, in grid layers, of the shell used for leakage diagnostics.
pub const BOUNDARY_LAYERS: usize = 2;
/// Masses below this are treated as zero when normalizing.
pub const MASS_EPSILON: f64 = 1e-300;

/// One axis covering `[-L, L)` with `points` samples, `x_j = -L + j·step`.
///
/// Equality tolerates a relative difference of `1e-12` in the extent so that
/// axes derived through reciprocity compare equal to the originals.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AxisSpec {
    pub points: usize,
    pub half_extent: f64,
}

impl PartialEq for AxisSpec {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
            && (self.half_extent - other.half_extent).abs()
                <= 1e-12 * self.half_extent.abs().max(other.half_extent.abs())
    }
}

impl AxisSpec {
    pub fn new(points: usize, half_extent: f64) -> Result<Self> {
        let axis = Self { points, half_extent };
        axis.validate()?;
        Ok(axis)
    }

    /// Axis whose FFT-reciprocal axis (see [`AxisSpec::reciprocal`]) is itself.
    pub fn self_dual(points: usize, hbar: f64) -> Result<Self> {
        Self::new(points, (std::f64::consts::PI * hbar * points as f64 / 2.0).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 || !self.points.is_power_of_two() {
            return Err(Error::InvalidAxis(format!(
                "points must be a power of two >= 2, got {}",
                self.points
            )));
        }
        if !(self.half_extent.is_finite() && self.half_extent > 0.0) {
            return Err(Error::InvalidAxis(format!(
                "half_extent must be positive and finite, got {}",
                self.half_extent
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_extent / self.points as f64
    }

    pub fn start(&self) -> f64 {
        -self.half_extent
    }

    pub fn coord(&self, j: usize) -> f64 {
        -self.half_extent + j as f64 * self.step()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.coord(j)).collect()
    }

    /// Axis of the conjugate variable `ξ` for kernels `e^{-iξx/ħ}`:
    /// same point count, `step_ξ = 2πħ/(points·step_x)`.
    pub fn reciprocal(&self, hbar: f64) -> AxisSpec {
        AxisSpec { points: self.points, half_extent: std::f64::consts::PI * hbar / self.step() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    pub dim_n: usize,
    pub x_axes: Vec<AxisSpec>,
    pub p_axes: Vec<AxisSpec>,
    pub hbar: f64,
}

impl PartialEq for PhaseSpaceGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim_n == other.dim_n
            && self.x_axes == other.x_axes
            && self.p_axes == other.p_axes
            && (self.hbar - other.hbar).abs() <= 1e-12 * self.hbar.abs().max(other.hbar.abs())
    }
}

impl PhaseSpaceGrid {
    pub fn new(x_axes: Vec<AxisSpec>, p_axes: Vec<AxisSpec>, hbar: f64) -> Result<Self> {
        if x_axes.len() != p_axes.len() {
            return Err(Error::DimensionMismatch { expected: x_axes.len(), got: p_axes.len() });
        }
        let grid = Self { dim_n: x_axes.len(), x_axes, p_axes, hbar };
        grid.validate()?;
        Ok(grid)
    }

    /// Every axis identical.
    pub fn uniform(dim_n: usize, points: usize, half_extent: f64, hbar: f64) -> Result<Self> {
        let axis = AxisSpec::new(points, half_extent)?;
        Self::new(vec![axis; dim_n], vec![axis; dim_n], hbar)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim_n == 0 || self.dim_n > MAX_DIM_N {
            return Err(Error::InvalidArgument(format!(
                "dim_n must be in 1..={MAX_DIM_N}, got {}",
                self.dim_n
            )));
        }
        if self.x_axes.len() != self.dim_n || self.p_axes.len() != self.dim_n {
            return Err(Error::DimensionMismatch { expected: self.dim_n, got: self.x_axes.len() });
        }
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(Error::InvalidArgument(format!("hbar must be positive, got {}", self.hbar)));
        }
        for a in self.axes() {
            a.validate()?;
        }
        let total = self.axes().iter().try_fold(1usize, |acc, a| acc.checked_mul(a.points));
        match total {
            Some(t) if t <= MAX_TOTAL_POINTS => Ok(()),
            _ => Err(Error::BudgetExceeded(format!(
                "grid has more than {MAX_TOTAL_POINTS} points"
            ))),
        }
    }

    /// Axes in storage order `(x_1..x_n, p_1..p_n)`.
    pub fn axes(&self) -> Vec<AxisSpec> {
        self.x_axes.iter().chain(self.p_axes.iter()).copied().collect()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes().iter().map(|a| a.points).collect()
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes().iter().map(|a| a.step()).product()
    }

    /// Grid of the symplectic Fourier transform: `ζ_x` is conjugate to `p`,
    /// `ζ_p` to `x`.
    pub fn symplectic_dual(&self) -> PhaseSpaceGrid {
        PhaseSpaceGrid {
            dim_n: self.dim_n,
            x_axes: self.p_axes.iter().map(|a| a.reciprocal(self.hbar)).collect(),
            p_axes: self.x_axes.iter().map(|a| a.reciprocal(self.hbar)).collect(),
            hbar: self.hbar,
        }
    }

    /// Grid of the plain ħ-scaled Fourier transform on R^{2n}.
    pub fn hbar_dual(&self) -> PhaseSpaceGrid {
        PhaseSpaceGrid {
            dim_n: self.dim_n,
            x_axes: self.x_axes.iter().map(|a| a.reciprocal(self.hbar)).collect(),
            p_axes: self.p_axes.iter().map(|a| a.reciprocal(self.hbar)).collect(),
            hbar: self.hbar,
        }
    }

    pub fn same_as(&self, other: &PhaseSpaceGrid) -> bool {
        self == other
    }

    /// Calls `f(flat_index, z)` for every grid point in storage order.
    pub fn for_each_point<F: FnMut(usize, &[f64])>(&self, mut f: F) {
        let coords: Vec<Vec<f64>> = self.axes().iter().map(|a| a.coords()).collect();
        for_each_multi(&self.shape(), |flat, idx| {
            let z: Vec<f64> = idx.iter().enumerate().map(|(a, &i)| coords[a][i]).collect();
            f(flat, &z);
        });
    }
}

/// Visits every multi-index of `shape` in row-major order.
pub(crate) fn for_each_multi<F: FnMut(usize, &[usize])>(shape: &[usize], mut f: F) {
    let total: usize = shape.iter().product();
    if total == 0 {
        return;
    }
    let mut idx = vec![0usize; shape.len()];
    for flat in 0..total {
        f(flat, &idx);
        for a in (0..shape.len()).rev() {
            idx[a] += 1;
            if idx[a] < shape[a] {
                break;
            }
            idx[a] = 0;
        }
    }
}

pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; shape.len()];
    for a in (0..shape.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * shape[a + 1];
    }
    s
}

/// Reorders axes: output axis `k` is input axis `perm[k]`.
pub(crate) fn permute_axes(values: &[Complex64], shape: &[usize], perm: &[usize]) -> Vec<Complex64> {
    let in_strides = strides(shape);
    let out_shape: Vec<usize> = perm.iter().map(|&a| shape[a]).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
    for_each_multi(&out_shape, |flat, idx| {
        let src: usize = idx.iter().zip(perm).map(|(&i, &a)| i * in_strides[a]).sum();
        out[flat] = values[src];
    });
    out
}

/// Fraction of `Σ|v|` carried by the outermost [`BOUNDARY_LAYERS`] layers of
/// any axis. Zero for an identically zero array.
pub fn boundary_mass_fraction(shape: &[usize], values: &[Complex64]) -> f64 {
    let mut total = KahanSum::new();
    let mut shell = KahanSum::new();
    for_each_multi(shape, |flat, idx| {
        let v = values[flat].norm();
        total.add(v);
        let on_shell = idx
            .iter()
            .zip(shape)
            .any(|(&i, &n)| i < BOUNDARY_LAYERS || i + BOUNDARY_LAYERS >= n);
        if on_shell {
            shell.add(v);
        }
    });
    let t = total.value();
    if t > 0.0 {
        shell.value() / t
    } else {
        0.0
    }
}

/// A complex function sampled on a [`PhaseSpaceGrid`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: PhaseSpaceGrid,
    values: Vec<Complex64>,
    label: String,
}

impl Field {
    pub fn new(grid: PhaseSpaceGrid, values: Vec<Complex64>, label: impl Into<String>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        Ok(Self { grid, values, label: label.into() })
    }

    pub fn zeros(grid: PhaseSpaceGrid, label: impl Into<String>) -> Result<Self> {
        let len = grid.len();
        Self::new(grid, vec![Complex64::new(0.0, 0.0); len], label)
    }

    /// Samples `f(z)` at every grid point.
    pub fn from_fn<F: FnMut(&[f64]) -> Complex64>(
        grid: PhaseSpaceGrid,
        label: impl Into<String>,
        mut f: F,
    ) -> Result<Self> {
        grid.validate()?;
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        grid.for_each_point(|flat, z| values[flat] = f(z));
        Self::new(grid, values, label)
    }

    pub fn from_real_fn<F: FnMut(&[f64]) -> f64>(
        grid: PhaseSpaceGrid,
        label: impl Into<String>,
        mut f: F,
    ) -> Result<Self> {
        Self::from_fn(grid, label, |z| Complex64::new(f(z), 0.0))
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim_n(&self) -> usize {
        self.grid.dim_n
    }

    pub fn hbar(&self) -> f64 {
        self.grid.hbar
    }

    pub fn scaled(&self, c: Complex64) -> Field {
        self.map(|v| v * c)
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            label: self.label.clone(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with<F: Fn(Complex64, Complex64) -> Complex64>(&self, other: &Field, f: F) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Field {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            label: self.label.clone(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.norm()))
    }

    /// `max|Im F| / max|F|`, zero for the zero field.
    pub fn imag_ratio(&self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        self.values.iter().fold(0.0_f64, |a, v| a.max(v.im.abs())) / m
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.imag_ratio() <= tol
    }

    /// Drops imaginary parts.
    pub fn real_part(&self) -> Field {
        self.map(|v| Complex64::new(v.re, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn boundary_mass_fraction(&self) -> f64 {
        boundary_mass_fraction(&self.grid.shape(), &self.values)
    }

    /// Largest pointwise `|F - G|` on a shared grid.
    pub fn max_abs_diff(&self, other: &Field) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm())))
    }
}

/// `Σ F · Πstep`.
pub fn integrate(f: &Field) -> Complex64 {
    let mut acc = KahanSumComplex::new();
    for &v in f.values() {
        acc.add(v);
    }
    acc.value() * f.grid().cell_volume()
}

/// `Σ |F|² · Πstep`.
pub fn l2_norm_sq(f: &Field) -> f64 {
    let mut acc = KahanSum::new();
    for v in f.values() {
        acc.add(v.norm_sqr());
    }
    acc.value() * f.grid().cell_volume()
}

/// Raw quadrature of the bilinear product, `Σ A·B · Πstep`.
pub fn integrate_product(a: &Field, b: &Field) -> Result<Complex64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let mut acc = KahanSumComplex::new();
    for (&u, &v) in a.values().iter().zip(b.values()) {
        acc.add(u * v);
    }
    Ok(acc.value() * a.grid().cell_volume())
}

pub fn normalize_mass(f: &Field) -> Result<Field> {
    let mass = integrate(f);
    if !(mass.re.is_finite() && mass.im.is_finite()) {
        return Err(Error::NonFinite("field mass"));
    }
    if mass.norm() <= MASS_EPSILON {
        return Err(Error::ZeroMass { mass: mass.norm() });
    }
    Ok(f.scaled(mass.inv()))
}

pub fn normalize_l2(f: &Field) -> Result<Field> {
    let n2 = l2_norm_sq(f);
    if !n2.is_finite() {
        return Err(Error::NonFinite("field norm"));
    }
    if n2 <= MASS_EPSILON {
        return Err(Error::ZeroNorm);
    }
    Ok(f.scaled(Complex64::new(1.0 / n2.sqrt(), 0.0)))
}

/// Interpolation kernel used when a field is evaluated off its grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Multilinear,
    /// Keys cubic convolution (`a = -1/2`), third-order accurate.
    #[default]
    Cubic,
}

fn keys_weight(t: f64) -> f64 {
    const A: f64 = -0.5;
    let t = t.abs();
    if t <= 1.0 {
        ((A + 2.0) * t - (A + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((A * t - 5.0 * A) * t + 8.0 * A) * t - 4.0 * A
    } else {
        0.0
    }
}

/// Evaluates the field at an arbitrary point `z`; samples outside the grid
/// count as zero.
pub fn interpolate_at(f: &Field, z: &[f64], interp: Interpolation) -> Complex64 {
    let axes = f.grid().axes();
    let shape = f.grid().shape();
    let st = strides(&shape);
    let d = axes.len();
    let (taps, offset): (usize, isize) = match interp {
        Interpolation::Multilinear => (2, 0),
        Interpolation::Cubic => (4, -1),
    };
    let mut base = vec![0isize; d];
    let mut weights = vec![[0.0f64; 4]; d];
    for a in 0..d {
        let mut u = (z[a] - axes[a].start()) / axes[a].step();
        let r = u.round();
        if (u - r).abs() < 1e-9 {
            u = r;
        }
        let i0 = u.floor();
        let t = u - i0;
        base[a] = i0 as isize + offset;
        for (k, wk) in weights[a].iter_mut().enumerate().take(taps) {
            *wk = match interp {
                Interpolation::Multilinear => {
                    if k == 0 {
                        1.0 - t
                    } else {
                        t
                    }
                }
                Interpolation::Cubic => keys_weight(t - (k as f64 - 1.0)),
            };
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let combos = taps.pow(d as u32);
    'combo: for c in 0..combos {
        let mut rem = c;
        let mut w = 1.0;
        let mut flat = 0usize;
        for a in (0..d).rev() {
            let k = rem % taps;
            rem /= taps;
            let i = base[a] + k as isize;
            if i < 0 || i as usize >= shape[a] {
                continue 'combo;
            }
            let wk = weights[a][k];
            if wk == 0.0 {
                continue 'combo;
            }
            w *= wk;
            flat += i as usize * st[a];
        }
        acc += f.values()[flat] * w;
    }
    acc
}

/// Samples `z ↦ scale · F(M z)` on the field's own grid.
pub fn resample_linear_map(f: &Field, m: &DMatrix<f64>, scale: f64, interp: Interpolation) -> Result<Field> {
    let d = 2 * f.dim_n();
    if m.shape() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, got: m.nrows() });
    }
    let mut values = vec![Complex64::new(0.0, 0.0); f.grid().len()];
    let mut w = vec![0.0; d];
    f.grid().for_each_point(|flat, z| {
        for (r, wr) in w.iter_mut().enumerate() {
            *wr = (0..d).map(|c| m[(r, c)] * z[c]).sum();
        }
        values[flat] = interpolate_at(f, &w, interp) * scale;
    });
    Field::new(f.grid().clone(), values, f.label())
}

/// `F_μ(z) = μ^{2n} F(μ z)` with the default cubic interpolation.
pub fn dilate(f: &Field, mu: f64) -> Result<Field> {
    dilate_with(f, mu, Interpolation::default())
}

pub fn dilate_with(f: &Field, mu: f64, interp: Interpolation) -> Result<Field> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidArgument(format!("dilation factor must be positive, got {mu}")));
    }
    let d = 2 * f.dim_n();
    let m = DMatrix::identity(d, d) * mu;
    let out = resample_linear_map(f, &m, mu.powi(d as i32), interp)?;
    Ok(out.with_label(format!("{}|dilate({mu})", f.label())))
}

/// A complex function sampled on a configuration-space grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    dim_n: usize,
    axes: Vec<AxisSpec>,
    values: Vec<Complex64>,
    hbar: f64,
}

impl WaveFunction {
    pub fn new(axes: Vec<AxisSpec>, values: Vec<Complex64>, hbar: f64) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_DIM_N {
            return Err(Error::InvalidArgument(format!(
                "wavefunction dimension must be in 1..={MAX_DIM_N}, got {}",
                axes.len()
            )));
        }
        for a in &axes {
            a.validate()?;
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidArgument(format!("hbar must be positive, got {hbar}")));
        }
        let len: usize = axes.iter().map(|a| a.points).product();
        if values.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: values.len() });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("wavefunction"));
        }
        Ok(Self { dim_n: axes.len(), axes, values, hbar })
    }

    pub fn from_fn<F: FnMut(&[f64]) -> Complex64>(axes: Vec<AxisSpec>, hbar: f64, mut f: F) -> Result<Self> {
        for a in &axes {
            a.validate()?;
        }
        let coords: Vec<Vec<f64>> = axes.iter().map(|a| a.coords()).collect();
        let shape: Vec<usize> = axes.iter().map(|a| a.points).collect();
        let mut values = vec![Complex64::new(0.0, 0.0); shape.iter().product()];
        let mut x = vec![0.0; axes.len()];
        for_each_multi(&shape, |flat, idx| {
            for (a, &i) in idx.iter().enumerate() {
                x[a] = coords[a][i];
            }
            values[flat] = f(&x);
        });
        Self::new(axes, values, hbar)
    }

    pub fn dim_n(&self) -> usize {
        self.dim_n
    }

    pub fn axes(&self) -> &[AxisSpec] {
        &self.axes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.points).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.step()).product()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let mut acc = KahanSum::new();
        for v in &self.values {
            acc.add(v.norm_sqr());
        }
        acc.value() * self.cell_volume()
    }

    /// `(g|f) = ∫ f · conj(g)`, linear in the first argument `self = f`.
    pub fn inner(&self, g: &WaveFunction) -> Result<Complex64> {
        if self.axes != g.axes {
            return Err(Error::GridMismatch);
        }
        let mut acc = KahanSumComplex::new();
        for (f, g) in self.values.iter().zip(&g.values) {
            acc.add(f * g.conj());
        }
        Ok(acc.value() * self.cell_volume())
    }

    pub fn normalized(&self) -> Result<WaveFunction> {
        let n2 = self.l2_norm_sq();
        if n2 <= MASS_EPSILON {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / n2.sqrt();
        Ok(WaveFunction { values: self.values.iter().map(|v| v * s).collect(), ..self.clone() })
    }

    pub fn boundary_mass_fraction(&self) -> f64 {
        let sq: Vec<Complex64> = self.values.iter().map(|v| Complex64::new(v.norm_sqr(), 0.0)).collect();
        boundary_mass_fraction(&self.shape(), &sq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn gaussian_field(hbar: f64, points: usize) -> Field {
        let grid = PhaseSpaceGrid::uniform(1, points, 6.0 * hbar.sqrt(), hbar).unwrap();
        Field::from_real_fn(grid, "wf0", |z| (-(z[0] * z[0] + z[1] * z[1]) / hbar).exp() / (PI * hbar)).unwrap()
    }

    #[test]
    fn axis_geometry() {
        let a = AxisSpec::new(8, 2.0).unwrap();
        assert_eq!(a.step(), 0.5);
        assert_eq!(a.coords(), vec![-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5]);
        assert!(AxisSpec::new(6, 1.0).is_err());
        assert!(AxisSpec::new(8, 0.0).is_err());
        let r = a.reciprocal(1.0);
        assert_relative_eq!(r.step() * a.step(), 2.0 * PI / 8.0, epsilon = 1e-15);
        let s = AxisSpec::self_dual(256, 0.5).unwrap();
        assert_relative_eq!(s.reciprocal(0.5).half_extent, s.half_extent, epsilon = 1e-12);
    }

    #[test]
    fn quadrature_of_ground_state() {
        for hbar in [1.0, 0.5] {
            let f = gaussian_field(hbar, 256);
            assert!((integrate(&f) - Complex64::new(1.0, 0.0)).norm() < 1e-8);
            assert_relative_eq!(l2_norm_sq(&f), 1.0 / (2.0 * PI * hbar), max_relative = 1e-8);
            let u = normalize_l2(&f).unwrap();
            assert_relative_eq!(l2_norm_sq(&u), 1.0, epsilon = 1e-12);
            let m = normalize_mass(&f).unwrap();
            assert!(m.max_abs_diff(&f).unwrap() < 1e-10);
        }
    }

    #[test]
    fn zero_field_edge_cases() {
        let f = Field::zeros(PhaseSpaceGrid::uniform(1, 16, 1.0, 1.0).unwrap(), "zero").unwrap();
        assert_eq!(integrate(&f), Complex64::new(0.0, 0.0));
        assert_eq!(l2_norm_sq(&f), 0.0);
        assert!(matches!(normalize_mass(&f), Err(Error::ZeroMass { .. })));
        assert!(matches!(normalize_l2(&f), Err(Error::ZeroNorm)));
        assert_eq!(f.boundary_mass_fraction(), 0.0);
    }

    #[test]
    fn homogeneity() {
        let f = gaussian_field(1.0, 64);
        let g = f.scaled(Complex64::new(2.0, 0.0));
        assert_relative_eq!(l2_norm_sq(&g), 4.0 * l2_norm_sq(&f), max_relative = 1e-14);
    }

    #[test]
    fn dilation_is_identity_at_one() {
        let f = gaussian_field(1.0, 64);
        for interp in [Interpolation::Multilinear, Interpolation::Cubic] {
            let g = dilate_with(&f, 1.0, interp).unwrap();
            assert!(g.max_abs_diff(&f).unwrap() < 1e-14);
        }
        assert!(dilate(&f, 0.0).is_err());
        assert!(dilate(&f, -1.0).is_err());
    }

    #[test]
    fn dilation_preserves_mass() {
        let grid = PhaseSpaceGrid::uniform(1, 256, 12.0, 1.0).unwrap();
        let f = Field::from_real_fn(grid, "wf0", |z| (-(z[0] * z[0] + z[1] * z[1])).exp() / PI).unwrap();
        let g = dilate(&f, 0.5).unwrap();
        assert!((integrate(&g) - Complex64::new(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn boundary_shell() {
        let grid = PhaseSpaceGrid::uniform(1, 8, 1.0, 1.0).unwrap();
        let f = Field::from_real_fn(grid, "one", |_| 1.0).unwrap();
        // 64 points, interior 4x4 = 16
        assert_relative_eq!(f.boundary_mass_fraction(), 48.0 / 64.0, epsilon = 1e-15);
    }

    #[test]
    fn permute_swaps_blocks() {
        let shape = [2, 3];
        let v: Vec<Complex64> = (0..6).map(|k| Complex64::new(k as f64, 0.0)).collect();
        let t = permute_axes(&v, &shape, &[1, 0]);
        let re: Vec<f64> = t.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![0.0, 3.0, 1.0, 4.0, 2.0, 5.0]);
    }

    #[test]
    fn wavefunction_inner_product() {
        let axis = AxisSpec::new(128, 8.0).unwrap();
        let f = WaveFunction::from_fn(vec![axis], 1.0, |x| Complex64::new((-x[0] * x[0] / 2.0).exp(), 0.0)).unwrap();
        assert_relative_eq!(f.l2_norm_sq(), PI.sqrt(), max_relative = 1e-12);
        let u = f.normalized().unwrap();
        assert_relative_eq!(u.inner(&u).unwrap().re, 1.0, epsilon = 1e-12);
    }
}
