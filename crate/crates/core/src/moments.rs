//! Mass, mean, covariance, purity and Boltzmann entropy of sampled fields.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{integrate, l2_norm_sq, normalize_l2, Field, MASS_EPSILON};
use crate::numeric::{KahanSum, KahanSumComplex};
use crate::symplectic::symmetrize;
use crate::transforms::{hbar_ft_field, symplectic_ft};

/// Samples below `-CLIP_THRESHOLD` worth of total mass make an entropy unusable.
pub const CLIP_THRESHOLD: f64 = 1e-9;
/// Allowed deviation of a density's mass from 1.
pub const DENSITY_MASS_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    #[serde(with = "crate::json::complex_pair")]
    pub mass: Complex64,
    pub mean: Vec<f64>,
    #[serde(with = "crate::json::matrix_rows")]
    pub covariance: DMatrix<f64>,
    pub purity: f64,
    pub boundary_mass_fraction: f64,
}

impl MomentReport {
    pub fn dim_n(&self) -> usize {
        self.mean.len() / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    #[serde(rename = "entropy_nats")]
    pub value: f64,
    pub clipped_mass: f64,
}

/// Moments of the mass-normalized field `F̃ = F / ∫F`; purity is
/// `(2πħ)^n ‖F̃‖²`.
pub fn moment_report(f: &Field) -> Result<MomentReport> {
    let grid = f.grid();
    let d = 2 * grid.dim_n;
    let mass = integrate(f);
    if !(mass.re.is_finite() && mass.im.is_finite()) {
        return Err(Error::NonFinite("mass"));
    }
    if mass.norm() <= MASS_EPSILON {
        return Err(Error::ZeroMass { mass: mass.norm() });
    }
    let inv = mass.inv();
    let dv = grid.cell_volume();
    let values = f.values();

    let mut first = vec![KahanSumComplex::new(); d];
    grid.for_each_point(|flat, z| {
        let w = values[flat];
        for (acc, &za) in first.iter_mut().zip(z) {
            acc.add(w * za);
        }
    });
    let mean: Vec<f64> = first.iter().map(|a| (a.value() * dv * inv).re).collect();

    let mut second = vec![KahanSumComplex::new(); d * d];
    let mut c = vec![0.0; d];
    grid.for_each_point(|flat, z| {
        let w = values[flat];
        for a in 0..d {
            c[a] = z[a] - mean[a];
        }
        for a in 0..d {
            for b in a..d {
                second[a * d + b].add(w * (c[a] * c[b]));
            }
        }
    });
    let mut cov = DMatrix::zeros(d, d);
    for a in 0..d {
        for b in a..d {
            let v = (second[a * d + b].value() * dv * inv).re;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    if mean.iter().any(|v| !v.is_finite()) || cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("moments"));
    }
    let purity = (2.0 * PI * grid.hbar).powi(grid.dim_n as i32) * l2_norm_sq(f) / mass.norm_sqr();
    Ok(MomentReport {
        mass,
        mean,
        covariance: symmetrize(&cov)?,
        purity,
        boundary_mass_fraction: f.boundary_mass_fraction(),
    })
}

/// Which function is squared in [`density_from_square`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SquareOf {
    Direct,
    SymplecticFt,
    HbarFt,
}

/// `|u|²` for the L²-normalized `u = F`, `F_σF` or `F_ħF`. The transformed
/// variants live on the corresponding dual grid.
pub fn density_from_square(f: &Field, which: SquareOf) -> Result<Field> {
    let u = match which {
        SquareOf::Direct => normalize_l2(f)?,
        SquareOf::SymplecticFt => normalize_l2(&symplectic_ft(f)?)?,
        SquareOf::HbarFt => normalize_l2(&hbar_ft_field(f)?)?,
    };
    let label = format!("|{}|^2", u.label());
    Ok(u.map(|v| Complex64::new(v.norm_sqr(), 0.0)).with_label(label))
}

pub fn boltzmann_entropy(mu: &Field) -> Result<EntropyValue> {
    boltzmann_entropy_with(mu, CLIP_THRESHOLD)
}

/// `−∫ μ log μ` with `0 log 0 = 0`; negative samples are clipped and their
/// mass reported.
pub fn boltzmann_entropy_with(mu: &Field, clip_threshold: f64) -> Result<EntropyValue> {
    let dv = mu.grid().cell_volume();
    let mut mass = KahanSum::new();
    let mut clipped = KahanSum::new();
    let mut ent = KahanSum::new();
    for v in mu.values() {
        let m = v.re;
        if !m.is_finite() {
            return Err(Error::NonFinite("density"));
        }
        mass.add(m);
        if m < 0.0 {
            clipped.add(-m);
        } else if m > 0.0 {
            ent.add(-m * m.ln());
        }
    }
    let mass = mass.value() * dv;
    if (mass - 1.0).abs() > DENSITY_MASS_TOLERANCE {
        return Err(Error::NotNormalized { mass });
    }
    let clipped_mass = clipped.value() * dv;
    if clipped_mass > clip_threshold {
        return Err(Error::ClippingExceeded { clipped: clipped_mass, threshold: clip_threshold });
    }
    Ok(EntropyValue { value: ent.value() * dv, clipped_mass })
}

/// `½ log((2πe)^d det Σ)` for a `d × d` covariance, the entropy of the
/// Gaussian with that covariance.
pub fn gaussian_entropy(cov: &DMatrix<f64>) -> f64 {
    let d = cov.nrows() as f64;
    0.5 * (d * (2.0 * PI * std::f64::consts::E).ln() + cov.determinant().ln())
}

/// Mean vector as a column.
pub fn mean_vector(r: &MomentReport) -> DVector<f64> {
    DVector::from_column_slice(&r.mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PhaseSpaceGrid;
    use approx::assert_relative_eq;

    fn wf0(hbar: f64) -> Field {
        let grid = PhaseSpaceGrid::uniform(1, 256, 6.0 * hbar.sqrt(), hbar).unwrap();
        Field::from_real_fn(grid, "wf0", |z| (-(z[0] * z[0] + z[1] * z[1]) / hbar).exp() / (PI * hbar)).unwrap()
    }

    #[test]
    fn ground_state_moments() {
        for hbar in [1.0_f64, 0.5] {
            let r = moment_report(&wf0(hbar)).unwrap();
            assert!((r.mass - Complex64::new(1.0, 0.0)).norm() < 1e-10);
            assert!(r.mean.iter().all(|m| m.abs() < 1e-12));
            assert_relative_eq!(r.covariance[(0, 0)], hbar / 2.0, max_relative = 1e-8);
            assert_relative_eq!(r.covariance[(1, 1)], hbar / 2.0, max_relative = 1e-8);
            assert!(r.covariance[(0, 1)].abs() < 1e-12);
            assert_relative_eq!(r.purity, 1.0, max_relative = 1e-8);
            assert!(r.boundary_mass_fraction < 1e-12);
        }
    }

    #[test]
    fn moments_of_scaled_field_are_unchanged() {
        let f = wf0(1.0);
        let g = f.scaled(Complex64::new(-3.0, 0.0));
        let a = moment_report(&f).unwrap();
        let b = moment_report(&g).unwrap();
        assert!((&a.covariance - &b.covariance).amax() < 1e-14);
        assert_relative_eq!(a.purity, b.purity, max_relative = 1e-13);
    }

    #[test]
    fn squared_densities_of_ground_state() {
        let hbar = 1.0;
        let f = wf0(hbar);
        let d = density_from_square(&f, SquareOf::Direct).unwrap();
        let r = moment_report(&d).unwrap();
        assert_relative_eq!(r.covariance[(0, 0)], hbar / 4.0, max_relative = 1e-8);
        assert!((r.mass.re - 1.0).abs() < 1e-12);
        let s = density_from_square(&f, SquareOf::SymplecticFt).unwrap();
        let rs = moment_report(&s).unwrap();
        assert_relative_eq!(rs.covariance[(0, 0)], hbar, max_relative = 1e-8);
        assert_relative_eq!(rs.covariance[(1, 1)], hbar, max_relative = 1e-8);
    }

    #[test]
    fn entropy_of_gaussian_density() {
        let hbar = 1.0;
        let d = density_from_square(&wf0(hbar), SquareOf::Direct).unwrap();
        let e = boltzmann_entropy(&d).unwrap();
        // covariance ħ/4 I in two dimensions
        let exact = (PI * std::f64::consts::E * hbar / 2.0).ln();
        assert_relative_eq!(e.value, exact, max_relative = 1e-9);
        assert_eq!(e.clipped_mass, 0.0);
        let cov = moment_report(&d).unwrap().covariance;
        assert_relative_eq!(gaussian_entropy(&cov), exact, max_relative = 1e-8);
    }

    #[test]
    fn entropy_rejects_bad_densities() {
        let f = wf0(1.0);
        let doubled = f.scaled(Complex64::new(2.0, 0.0));
        assert!(matches!(boltzmann_entropy(&doubled), Err(Error::NotNormalized { .. })));
        // Wigner function of h1 is negative near the origin
        let grid = f.grid().clone();
        let wh1 = Field::from_real_fn(grid, "wh1", |z| {
            let r2 = z[0] * z[0] + z[1] * z[1];
            (2.0 * r2 - 1.0) * (-r2).exp() / PI
        })
        .unwrap();
        assert!(matches!(boltzmann_entropy(&wh1), Err(Error::ClippingExceeded { .. })));
    }

    #[test]
    fn zero_mass_rejected() {
        let grid = PhaseSpaceGrid::uniform(1, 16, 1.0, 1.0).unwrap();
        let f = Field::zeros(grid, "0").unwrap();
        assert!(matches!(moment_report(&f), Err(Error::ZeroMass { .. })));
    }

    #[test]
    fn report_serializes_with_fixed_names() {
        let r = moment_report(&wf0(1.0)).unwrap();
        let s = crate::json::to_json_string(&r).unwrap();
        for key in ["mass", "mean", "covariance", "purity", "boundary_mass_fraction"] {
            assert!(s.contains(&format!("\"{key}\"")));
        }
        let back: MomentReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        let e = crate::json::to_json_string(&EntropyValue { value: 1.5, clipped_mass: 0.0 }).unwrap();
        assert!(e.contains("entropy_nats") && e.contains("clipped_mass"));
    }
}
