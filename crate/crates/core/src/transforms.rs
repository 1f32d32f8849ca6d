//! Wigner and cross-Wigner transforms, the symplectic and ħ-scaled Fourier
//! transforms, the trace pairing and the twisted product with a linear symbol.
//!
//! Every discrete transform carries explicit phase factors so that it
//! approximates the continuum integral on the symmetric grids of
//! [`crate::grid`].

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{spectral_derivative, transform_axis, AxisTransform, Orientation};
use crate::grid::{
    boundary_mass_fraction, for_each_multi, integrate_product, permute_axes, AxisSpec, Field, PhaseSpaceGrid,
    WaveFunction,
};
use crate::numeric::KahanSum;

/// Largest configuration dimension accepted by the Wigner transforms.
pub const MAX_WIGNER_DIM: usize = 2;
/// Spectral weight a wavefunction may carry outside the momentum window of
/// its Wigner grid.
pub const SPECTRAL_LEAK_THRESHOLD: f64 = 1e-6;
/// Boundary-shell fraction above which spectral differentiation is refused.
pub const ALIASING_THRESHOLD: f64 = 1e-6;

/// Momentum axis of the Wigner transform of a wavefunction sampled on `x`:
/// `p_step = πħ/(N h)` so that `p_step · y_step = 2πħ/N` with `y_step = 2h`.
pub fn wigner_momentum_axis(x: &AxisSpec, hbar: f64) -> AxisSpec {
    AxisSpec { points: x.points, half_extent: PI * hbar / (2.0 * x.step()) }
}

pub fn wigner_grid(axes: &[AxisSpec], hbar: f64) -> Result<PhaseSpaceGrid> {
    PhaseSpaceGrid::new(axes.to_vec(), axes.iter().map(|a| wigner_momentum_axis(a, hbar)).collect(), hbar)
}

fn check_wigner_input(f: &WaveFunction) -> Result<()> {
    if f.dim_n() > MAX_WIGNER_DIM {
        return Err(Error::BudgetExceeded(format!(
            "Wigner transforms support n <= {MAX_WIGNER_DIM}, got {}",
            f.dim_n()
        )));
    }
    if f.values().iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite("wavefunction"));
    }
    let leak = momentum_leak(f)?;
    if leak > SPECTRAL_LEAK_THRESHOLD {
        return Err(Error::Reciprocity(format!(
            "wavefunction carries {leak:.3e} of its spectral weight outside the Wigner momentum window; refine the grid"
        )));
    }
    Ok(())
}

/// Fraction of `|F_ħ f|²` lying outside the momentum window
/// `|p_a| < πħ/(2 h_a)` representable on the Wigner grid.
pub fn momentum_leak(f: &WaveFunction) -> Result<f64> {
    let g = hbar_ft(f)?;
    let window: Vec<f64> = f.axes().iter().map(|a| PI * f.hbar() / (2.0 * a.step())).collect();
    let coords: Vec<Vec<f64>> = g.axes().iter().map(|a| a.coords()).collect();
    let mut total = KahanSum::new();
    let mut outside = KahanSum::new();
    for_each_multi(&g.shape(), |flat, idx| {
        let w = g.values()[flat].norm_sqr();
        total.add(w);
        if idx.iter().enumerate().any(|(a, &i)| coords[a][i].abs() >= window[a]) {
            outside.add(w);
        }
    });
    let t = total.value();
    if t <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(outside.value() / t)
}

/// `W(f,g)(x,p) = (2πħ)^{-n} ∫ f(x+y/2) conj(g(x−y/2)) e^{−ip·y/ħ} dy`.
///
/// `y` is sampled on the even lattice `y = 2k·h`, so both arguments stay on
/// grid points; samples outside the grid are zero.
pub fn cross_wigner(f: &WaveFunction, g: &WaveFunction) -> Result<Field> {
    if f.axes() != g.axes() || (f.hbar() - g.hbar()).abs() > 1e-12 * f.hbar() {
        return Err(Error::GridMismatch);
    }
    check_wigner_input(f)?;
    check_wigner_input(g)?;
    wigner_kernel(f, g)
}

/// `Wf = W(f, f)`.
pub fn wigner_transform(f: &WaveFunction) -> Result<Field> {
    check_wigner_input(f)?;
    let mut w = wigner_kernel(f, f)?;
    // Exactly real in the continuum; drop rounding noise.
    for v in w.values_mut() {
        v.im = 0.0;
    }
    Ok(w.with_label("wigner"))
}

fn wigner_kernel(f: &WaveFunction, g: &WaveFunction) -> Result<Field> {
    let n = f.dim_n();
    let hbar = f.hbar();
    let axes = f.axes().to_vec();
    let shape = f.shape();
    let grid = wigner_grid(&axes, hbar)?;
    let st = crate::grid::strides(&shape);
    let block: usize = shape.iter().product();
    let transforms: Vec<AxisTransform> = axes
        .iter()
        .map(|a| {
            let h = a.step();
            AxisTransform {
                x0: -(a.points as f64) * h,
                h: 2.0 * h,
                k0: -wigner_momentum_axis(a, hbar).half_extent / hbar,
                orientation: Orientation::Ascending,
            }
        })
        .collect();
    let norm = (2.0 * PI * hbar).powi(-(n as i32));
    let mut out = vec![Complex64::new(0.0, 0.0); block * block];
    let mut buf = vec![Complex64::new(0.0, 0.0); block];
    let fv = f.values();
    let gv = g.values();
    for_each_multi(&shape, |xflat, xidx| {
        for_each_multi(&shape, |kflat, kidx| {
            let mut plus = 0usize;
            let mut minus = 0usize;
            let mut inside = true;
            for a in 0..n {
                let k = kidx[a] as isize - (shape[a] / 2) as isize;
                let ip = xidx[a] as isize + k;
                let im = xidx[a] as isize - k;
                if ip < 0 || im < 0 || ip >= shape[a] as isize || im >= shape[a] as isize {
                    inside = false;
                    break;
                }
                plus += ip as usize * st[a];
                minus += im as usize * st[a];
            }
            buf[kflat] = if inside { fv[plus] * gv[minus].conj() } else { Complex64::new(0.0, 0.0) };
        });
        for (a, t) in transforms.iter().enumerate() {
            transform_axis(&mut buf, &shape, a, t);
        }
        let base = xflat * block;
        for (o, b) in out[base..base + block].iter_mut().zip(&buf) {
            *o = b * norm;
        }
    });
    Field::new(grid, out, "cross_wigner")
}

/// Convex combination `Σ p_α W f_α`.
pub fn wigner_of_mixture(weights: &[f64], fs: &[WaveFunction]) -> Result<Field> {
    validate_weights(weights, fs.len())?;
    let mut acc: Option<Field> = None;
    for (&w, f) in weights.iter().zip(fs) {
        let wf = wigner_transform(f)?.scaled(Complex64::new(w, 0.0));
        acc = Some(match acc {
            None => wf,
            Some(a) => a.zip_with(&wf, |u, v| u + v)?,
        });
    }
    Ok(acc.expect("at least one member").with_label("wigner_mixture"))
}

pub fn validate_weights(weights: &[f64], members: usize) -> Result<()> {
    if weights.len() != members {
        return Err(Error::DimensionMismatch { expected: members, got: weights.len() });
    }
    if weights.is_empty() {
        return Err(Error::InvalidWeights("mixture needs at least one member".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidWeights(format!("weight {w} is not a nonnegative number")));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidWeights(format!("weights sum to {sum}, not 1")));
    }
    Ok(())
}

/// `F_σF(ζ) = (2πħ)^{-n} ∫ F(z) e^{−iσ(ζ,z)/ħ} dz` with
/// `σ(ζ,z) = ζ_p·x − ζ_x·p`. The output lives on
/// [`PhaseSpaceGrid::symplectic_dual`]; applying the transform twice returns
/// to the input grid.
pub fn symplectic_ft(f: &Field) -> Result<Field> {
    if !f.is_finite() {
        return Err(Error::NonFinite("field"));
    }
    let grid = f.grid();
    let n = grid.dim_n;
    let hbar = grid.hbar;
    let shape = grid.shape();
    let mut data = f.values().to_vec();
    for (a, axis) in grid.axes().iter().enumerate() {
        let h = axis.step();
        // x-axes pair with ζ_p = ħk; p-axes with ζ_x = −ħk.
        let t = if a < n {
            AxisTransform { x0: axis.start(), h, k0: -PI / h, orientation: Orientation::Ascending }
        } else {
            AxisTransform { x0: axis.start(), h, k0: PI / h, orientation: Orientation::Descending }
        };
        transform_axis(&mut data, &shape, a, &t);
    }
    let norm = (2.0 * PI * hbar).powi(-(n as i32));
    let perm: Vec<usize> = (n..2 * n).chain(0..n).collect();
    let out: Vec<Complex64> = permute_axes(&data, &shape, &perm).into_iter().map(|v| v * norm).collect();
    Field::new(grid.symplectic_dual(), out, format!("sft({})", f.label()))
}

/// `F_ħf(p) = (2πħ)^{-n/2} ∫ f(x) e^{−ip·x/ħ} dx`, unitary.
pub fn hbar_ft(f: &WaveFunction) -> Result<WaveFunction> {
    let hbar = f.hbar();
    let shape = f.shape();
    let mut data = f.values().to_vec();
    for (a, axis) in f.axes().iter().enumerate() {
        let h = axis.step();
        let t = AxisTransform { x0: axis.start(), h, k0: -PI / h, orientation: Orientation::Ascending };
        transform_axis(&mut data, &shape, a, &t);
    }
    let norm = (2.0 * PI * hbar).powf(-(f.dim_n() as f64) / 2.0);
    for v in data.iter_mut() {
        *v *= norm;
    }
    WaveFunction::new(f.axes().iter().map(|a| a.reciprocal(hbar)).collect(), data, hbar)
}

/// ħ-scaled Fourier transform of a phase-space function viewed as a
/// function on R^{2n}: `(2πħ)^{-n} ∫ F(z) e^{−iζ·z/ħ} dz`.
pub fn hbar_ft_field(f: &Field) -> Result<Field> {
    if !f.is_finite() {
        return Err(Error::NonFinite("field"));
    }
    let grid = f.grid();
    let shape = grid.shape();
    let mut data = f.values().to_vec();
    for (a, axis) in grid.axes().iter().enumerate() {
        let h = axis.step();
        let t = AxisTransform { x0: axis.start(), h, k0: -PI / h, orientation: Orientation::Ascending };
        transform_axis(&mut data, &shape, a, &t);
    }
    let norm = (2.0 * PI * grid.hbar).powi(-(grid.dim_n as i32));
    for v in data.iter_mut() {
        *v *= norm;
    }
    Field::new(grid.hbar_dual(), data, format!("hft({})", f.label()))
}

/// Raw quadrature `∫ A·B dz`.
pub fn phase_space_inner(a: &Field, b: &Field) -> Result<Complex64> {
    integrate_product(a, b)
}

/// `(2πħ)^{-n} ∫ a·b dz`, the trace of a product of Weyl operators with
/// symbols `a` and `b`. Symbols of density operators are `(2πħ)^n` times
/// their Wigner functions; callers scale accordingly.
pub fn trace_pairing(a: &Field, b: &Field) -> Result<Complex64> {
    let raw = integrate_product(a, b)?;
    Ok(raw * (2.0 * PI * a.hbar()).powi(-(a.dim_n() as i32)))
}

/// The linear symbol `a(z) = η·(z − z₀)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSymbol {
    pub eta: Vec<Complex64>,
    pub z0: Vec<f64>,
    pub hbar: f64,
}

impl LinearSymbol {
    pub fn new(eta: Vec<Complex64>, z0: Vec<f64>, hbar: f64) -> Result<Self> {
        if eta.len() != z0.len() || eta.is_empty() || !eta.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch { expected: eta.len(), got: z0.len() });
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidArgument(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { eta, z0, hbar })
    }

    pub fn real(eta: &[f64], z0: &[f64], hbar: f64) -> Result<Self> {
        Self::new(eta.iter().map(|&e| Complex64::new(e, 0.0)).collect(), z0.to_vec(), hbar)
    }

    pub fn eval(&self, z: &[f64]) -> Complex64 {
        self.eta.iter().zip(z.iter().zip(&self.z0)).map(|(e, (zi, z0i))| e * (zi - z0i)).sum()
    }

    /// `η·ζ` without the offset, the multiplier of `F_σF` in the gradient term.
    pub fn eval_homogeneous(&self, z: &[f64]) -> Complex64 {
        self.eta.iter().zip(z).map(|(e, zi)| e * zi).sum()
    }
}

fn check_symbol(a: &LinearSymbol, f: &Field) -> Result<()> {
    if a.eta.len() != 2 * f.dim_n() {
        return Err(Error::DimensionMismatch { expected: 2 * f.dim_n(), got: a.eta.len() });
    }
    if (a.hbar - f.hbar()).abs() > 1e-12 * f.hbar() {
        return Err(Error::InvalidArgument(format!(
            "symbol hbar {} differs from field hbar {}",
            a.hbar,
            f.hbar()
        )));
    }
    let fraction = f.boundary_mass_fraction();
    if fraction > ALIASING_THRESHOLD {
        return Err(Error::Aliasing { fraction, threshold: ALIASING_THRESHOLD });
    }
    Ok(())
}

/// `η·J∇F = Σ_i η_{x_i} ∂_{p_i}F − η_{p_i} ∂_{x_i}F`, spectrally.
pub fn symplectic_gradient(eta: &[Complex64], f: &Field) -> Vec<Complex64> {
    let grid = f.grid();
    let n = grid.dim_n;
    let shape = grid.shape();
    let axes = grid.axes();
    let mut out = vec![Complex64::new(0.0, 0.0); f.values().len()];
    for i in 0..n {
        for (axis, coeff) in [(n + i, eta[i]), (i, -eta[n + i])] {
            if coeff == Complex64::new(0.0, 0.0) {
                continue;
            }
            let d = spectral_derivative(f.values(), &shape, axis, axes[axis].step());
            for (o, v) in out.iter_mut().zip(d) {
                *o += coeff * v;
            }
        }
    }
    out
}

fn moyal_linear(a: &LinearSymbol, f: &Field, sign: f64) -> Result<Field> {
    check_symbol(a, f)?;
    let grad = symplectic_gradient(&a.eta, f);
    let c = Complex64::new(0.0, sign * f.hbar() / 2.0);
    let mut values = vec![Complex64::new(0.0, 0.0); grad.len()];
    f.grid().for_each_point(|flat, z| {
        values[flat] = a.eval(z) * f.values()[flat] + c * grad[flat];
    });
    Field::new(f.grid().clone(), values, f.label())
}

/// `a ⋆ F = aF + (iħ/2) η·J∇F`.
pub fn moyal_linear_left(a: &LinearSymbol, f: &Field) -> Result<Field> {
    moyal_linear(a, f, 1.0)
}

/// `F ⋆ a = aF − (iħ/2) η·J∇F`.
pub fn moyal_linear_right(a: &LinearSymbol, f: &Field) -> Result<Field> {
    moyal_linear(a, f, -1.0)
}

/// Both sides of
/// `½∫(|a⋆F|² + |F⋆a|²) = ∫|a|²|F|² + ¼∫|η·ζ|²|F_σF(ζ)|² dζ`.
pub fn moyal_identity_sides(a: &LinearSymbol, f: &Field) -> Result<(f64, f64)> {
    let left = moyal_linear_left(a, f)?;
    let right = moyal_linear_right(a, f)?;
    let lhs = 0.5 * (crate::grid::l2_norm_sq(&left) + crate::grid::l2_norm_sq(&right));

    let mut direct = KahanSum::new();
    f.grid().for_each_point(|flat, z| direct.add(a.eval(z).norm_sqr() * f.values()[flat].norm_sqr()));
    let direct = direct.value() * f.grid().cell_volume();

    let g = symplectic_ft(f)?;
    let mut spectral = KahanSum::new();
    g.grid().for_each_point(|flat, z| {
        spectral.add(a.eval_homogeneous(z).norm_sqr() * g.values()[flat].norm_sqr())
    });
    let spectral = spectral.value() * g.grid().cell_volume();
    Ok((lhs, direct + 0.25 * spectral))
}

/// Relative leakage of `|v|` into the outer shell of an arbitrary array.
pub fn shell_fraction(shape: &[usize], values: &[Complex64]) -> f64 {
    boundary_mass_fraction(shape, values)
}
