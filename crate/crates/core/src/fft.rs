//! Axis-wise FFTs that approximate continuum Fourier integrals on symmetric
//! grids, plus spectral differentiation.

use std::sync::Arc;

use num_complex::Complex64;
use once_cell::sync::Lazy;
use parking_lot::Mutex;
use rustfft::{Fft, FftPlanner};

use crate::grid::strides;

static PLANNER: Lazy<Mutex<FftPlanner<f64>>> = Lazy::new(|| Mutex::new(FftPlanner::new()));

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut p = PLANNER.lock();
    if forward {
        p.plan_fft_forward(len)
    } else {
        p.plan_fft_inverse(len)
    }
}

/// Orientation of the output frequency axis relative to the DFT index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `k_m = k0 + m·dk`
    Ascending,
    /// `k_m = k0 − m·dk`
    Descending,
}

/// Parameters of one continuum transform
/// `G(k_m) = Σ_j h f_j e^{−i k_m x_j}` with `x_j = x0 + j h` and
/// `dk = 2π/(N h)`.
#[derive(Debug, Clone, Copy)]
pub struct AxisTransform {
    pub x0: f64,
    pub h: f64,
    pub k0: f64,
    pub orientation: Orientation,
}

fn apply_line(line: &mut [Complex64], t: &AxisTransform, scratch: &mut Vec<Complex64>) {
    let n = line.len();
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * t.h);
    let s = match t.orientation {
        Orientation::Ascending => 1.0,
        Orientation::Descending => -1.0,
    };
    for (j, v) in line.iter_mut().enumerate() {
        *v *= Complex64::from_polar(1.0, -t.k0 * j as f64 * t.h);
    }
    let fft = plan(n, s > 0.0);
    scratch.resize(fft.get_inplace_scratch_len(), Complex64::new(0.0, 0.0));
    fft.process_with_scratch(line, scratch);
    let c0 = Complex64::from_polar(t.h, -t.k0 * t.x0);
    for (m, v) in line.iter_mut().enumerate() {
        *v *= c0 * Complex64::from_polar(1.0, -s * m as f64 * dk * t.x0);
    }
}

/// Applies the continuum transform along `axis` of a row-major array.
pub fn transform_axis(data: &mut [Complex64], shape: &[usize], axis: usize, t: &AxisTransform) {
    let st = strides(shape);
    let n = shape[axis];
    let stride = st[axis];
    let outer: usize = shape[..axis].iter().product();
    let inner = stride;
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = Vec::new();
    for o in 0..outer {
        for i in 0..inner {
            let base = o * n * stride + i;
            for (j, l) in line.iter_mut().enumerate() {
                *l = data[base + j * stride];
            }
            apply_line(&mut line, t, &mut scratch);
            for (j, l) in line.iter().enumerate() {
                data[base + j * stride] = *l;
            }
        }
    }
}

/// Spectral derivative `∂f/∂x_axis` of a row-major array sampled with step
/// `h` along `axis`. The Nyquist mode is dropped.
pub fn spectral_derivative(data: &[Complex64], shape: &[usize], axis: usize, h: f64) -> Vec<Complex64> {
    let st = strides(shape);
    let n = shape[axis];
    let stride = st[axis];
    let outer: usize = shape[..axis].iter().product();
    let fwd = plan(n, true);
    let inv = plan(n, false);
    let mut scratch =
        vec![Complex64::new(0.0, 0.0); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * h);
    let mult: Vec<Complex64> = (0..n)
        .map(|m| {
            if 2 * m == n {
                Complex64::new(0.0, 0.0)
            } else {
                let k = if 2 * m < n { m as f64 } else { m as f64 - n as f64 } * dk;
                Complex64::new(0.0, k / n as f64)
            }
        })
        .collect();
    let mut out = data.to_vec();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for o in 0..outer {
        for i in 0..stride {
            let base = o * n * stride + i;
            for (j, l) in line.iter_mut().enumerate() {
                *l = data[base + j * stride];
            }
            fwd.process_with_scratch(&mut line, &mut scratch);
            for (l, c) in line.iter_mut().zip(&mult) {
                *l *= c;
            }
            inv.process_with_scratch(&mut line, &mut scratch);
            for (j, l) in line.iter().enumerate() {
                out[base + j * stride] = *l;
            }
        }
    }
    out
}

/// Second-order central differences, zero beyond the ends. Test oracle only.
pub fn finite_difference(data: &[Complex64], shape: &[usize], axis: usize, h: f64) -> Vec<Complex64> {
    let st = strides(shape);
    let n = shape[axis];
    let stride = st[axis];
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    crate::grid::for_each_multi(shape, |flat, idx| {
        let j = idx[axis];
        let up = if j + 1 < n { data[flat + stride] } else { Complex64::new(0.0, 0.0) };
        let dn = if j > 0 { data[flat - stride] } else { Complex64::new(0.0, 0.0) };
        out[flat] = (up - dn) / (2.0 * h);
    });
    out
}
