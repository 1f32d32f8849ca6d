//! Linear algebra of the standard symplectic structure on R^{2n}.
//!
//! Phase-space vectors are ordered `(x_1, .., x_n, p_1, .., p_n)` and
//! `J = [[0, I], [-I, 0]]`. Everything here works on small dense matrices
//! (2n <= 8) and is pure.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for Hermitian positivity checks.
pub const PSD_TOLERANCE: f64 = 1e-9;
/// Relative asymmetry above which a covariance input is rejected.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;
/// Maximum relative mismatch between the two moduli of a `±iλ` pair.
pub const PAIRING_TOLERANCE: f64 = 1e-6;

/// A real `2n × 2n` matrix acting on phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct SympMatrix {
    dim_n: usize,
    entries: DMatrix<f64>,
}

impl SympMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c {
            return Err(Error::DimensionMismatch { expected: r, got: c });
        }
        if r == 0 || r % 2 != 0 {
            return Err(Error::DimensionMismatch {
                expected: r + (r % 2).max(if r == 0 { 2 } else { 0 }),
                got: r,
            });
        }
        Ok(Self { dim_n: r / 2, entries })
    }

    pub fn from_row_slice(dim_n: usize, data: &[f64]) -> Result<Self> {
        let side = 2 * dim_n;
        if data.len() != side * side {
            return Err(Error::DimensionMismatch { expected: side * side, got: data.len() });
        }
        Self::new(DMatrix::from_row_slice(side, side, data))
    }

    pub fn identity(dim_n: usize) -> Self {
        Self { dim_n, entries: DMatrix::identity(2 * dim_n, 2 * dim_n) }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)))
    }

    /// Time reversal `T = diag(I, -I)`.
    pub fn time_reversal(dim_n: usize) -> Self {
        let mut m = DMatrix::identity(2 * dim_n, 2 * dim_n);
        for i in dim_n..2 * dim_n {
            m[(i, i)] = -1.0;
        }
        Self { dim_n, entries: m }
    }

    pub fn dim_n(&self) -> usize {
        self.dim_n
    }

    pub fn side(&self) -> usize {
        2 * self.dim_n
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn mul(&self, other: &SympMatrix) -> Result<SympMatrix> {
        if self.dim_n != other.dim_n {
            return Err(Error::DimensionMismatch { expected: self.side(), got: other.side() });
        }
        Ok(SympMatrix { dim_n: self.dim_n, entries: &self.entries * &other.entries })
    }

    pub fn transpose(&self) -> SympMatrix {
        SympMatrix { dim_n: self.dim_n, entries: self.entries.transpose() }
    }

    pub fn try_inverse(&self) -> Result<SympMatrix> {
        self.entries
            .clone()
            .try_inverse()
            .map(|entries| SympMatrix { dim_n: self.dim_n, entries })
            .ok_or(Error::SingularCovariance { det: self.entries.determinant() })
    }
}

/// The standard symplectic matrix `[[0, I], [-I, 0]]`.
pub fn standard_j(n: usize) -> Result<SympMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("symplectic half-dimension must be >= 1".into()));
    }
    Ok(SympMatrix { dim_n: n, entries: j_matrix(n) })
}

pub(crate) fn j_matrix(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, &b| a.max(b.abs()))
}

/// `‖MᵀJM − J‖_max ≤ tol`.
pub fn is_symplectic(m: &SympMatrix, tol: f64) -> bool {
    symplectic_residual(m) <= tol
}

/// `‖MᵀJM + J‖_max ≤ tol`.
pub fn is_anti_symplectic(m: &SympMatrix, tol: f64) -> bool {
    anti_symplectic_residual(m) <= tol
}

pub fn symplectic_residual(m: &SympMatrix) -> f64 {
    let j = j_matrix(m.dim_n);
    max_abs(&(m.entries.transpose() * &j * &m.entries - &j))
}

pub fn anti_symplectic_residual(m: &SympMatrix) -> f64 {
    let j = j_matrix(m.dim_n);
    max_abs(&(m.entries.transpose() * &j * &m.entries + &j))
}

/// Splits an anti-symplectic `A` as `T·S` and returns the symplectic factor.
pub fn anti_symplectic_factor(a: &SympMatrix) -> SympMatrix {
    // T is an involution, so S = T·A.
    let t = SympMatrix::time_reversal(a.dim_n);
    SympMatrix { dim_n: a.dim_n, entries: t.entries * &a.entries }
}

/// Williamson invariants of a symmetric positive-definite matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymplecticSpectrum {
    /// Ascending symplectic eigenvalues `λ_{σ,1} ≤ … ≤ λ_{σ,n}`.
    pub values: Vec<f64>,
    /// Worst relative mismatch between the two moduli of a conjugate pair.
    pub pairing_residual: f64,
}

impl SymplecticSpectrum {
    pub fn min(&self) -> f64 {
        self.values[0]
    }
}

/// Symmetrizes `b`, rejecting asymmetry beyond [`SYMMETRY_TOLERANCE`].
pub fn symmetrize(b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (r, c) = b.shape();
    if r != c {
        return Err(Error::DimensionMismatch { expected: r, got: c });
    }
    let scale = max_abs(b).max(f64::MIN_POSITIVE);
    let asymmetry = max_abs(&(b - b.transpose())) / scale;
    if !asymmetry.is_finite() {
        return Err(Error::NonFinite("matrix"));
    }
    if asymmetry > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok((b + b.transpose()) * 0.5)
}

/// Ascending eigenvalues of a real symmetric matrix.
pub fn symmetric_eigenvalues(b: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(b.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Symplectic spectrum: moduli of the eigenvalues of `B·J⁻¹`, deduplicated
/// from their `±iλ` pairs.
pub fn symplectic_spectrum(b: &DMatrix<f64>) -> Result<SymplecticSpectrum> {
    let (r, _) = b.shape();
    if r == 0 || r % 2 != 0 {
        return Err(Error::DimensionMismatch { expected: r + 1, got: r });
    }
    let b = symmetrize(b)?;
    let n = r / 2;
    let min_eigenvalue = symmetric_eigenvalues(&b)[0];
    if min_eigenvalue <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    // J⁻¹ = Jᵀ
    let m = &b * j_matrix(n).transpose();
    let mut moduli: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| a.total_cmp(b));

    let mut values = Vec::with_capacity(n);
    let mut pairing_residual = 0.0_f64;
    for pair in moduli.chunks_exact(2) {
        let (a, c) = (pair[0], pair[1]);
        let rel = (c - a).abs() / c.abs().max(f64::MIN_POSITIVE);
        pairing_residual = pairing_residual.max(rel);
        values.push(0.5 * (a + c));
    }
    if pairing_residual > PAIRING_TOLERANCE {
        return Err(Error::PairingFailure { residual: pairing_residual });
    }
    Ok(SymplecticSpectrum { values, pairing_residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermitianVerdict {
    pub min_eigenvalue: f64,
    /// Largest absolute eigenvalue.
    pub scale: f64,
    pub is_psd: bool,
    pub tolerance: f64,
}

/// Ascending eigenvalues of the Hermitian part `(H + H†)/2`.
pub fn hermitian_eigenvalues(h: &DMatrix<Complex64>) -> Vec<f64> {
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn hermitian_psd_check(h: &DMatrix<Complex64>, tol: f64) -> Result<HermitianVerdict> {
    let (r, c) = h.shape();
    if r != c {
        return Err(Error::DimensionMismatch { expected: r, got: c });
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("hermitian matrix"));
    }
    let entry_scale = h.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    let deviation = (h - h.adjoint()).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    if deviation > tol * entry_scale.max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    let ev = hermitian_eigenvalues(h);
    let min_eigenvalue = ev[0];
    let scale = ev.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let is_psd = min_eigenvalue >= -tol * scale.max(1.0);
    Ok(HermitianVerdict { min_eigenvalue, scale, is_psd, tolerance: tol })
}

/// `cov + (iħ/2)J`, Hermitian because `Jᵀ = −J`.
pub fn rsup_matrix(cov: &DMatrix<f64>, hbar: f64) -> Result<DMatrix<Complex64>> {
    let cov = symmetrize(cov)?;
    let (r, _) = cov.shape();
    if r == 0 || r % 2 != 0 {
        return Err(Error::DimensionMismatch { expected: r + 1, got: r });
    }
    let j = j_matrix(r / 2);
    Ok(DMatrix::from_fn(r, r, |a, b| Complex64::new(cov[(a, b)], 0.5 * hbar * j[(a, b)])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn standard_j_blocks() {
        let j = standard_j(1).unwrap();
        assert_eq!(j.entries(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        let jj = j.entries() * j.entries();
        assert_eq!(jj, -DMatrix::<f64>::identity(2, 2));
        let j2 = standard_j(2).unwrap();
        assert_eq!(j2.entries().transpose() * j2.entries(), DMatrix::<f64>::identity(4, 4));
        assert!(standard_j(0).is_err());
    }

    #[test]
    fn membership() {
        assert!(is_symplectic(&SympMatrix::identity(1), 1e-12));
        assert!(is_symplectic(&SympMatrix::from_diagonal(&[2.0, 0.5]).unwrap(), 1e-12));
        assert!(!is_symplectic(&SympMatrix::from_diagonal(&[2.0, 2.0]).unwrap(), 1e-12));

        let t = SympMatrix::time_reversal(1);
        assert!(is_anti_symplectic(&t, 1e-12));
        assert!(!is_anti_symplectic(&SympMatrix::identity(1), 1e-12));
        let ts = t.mul(&SympMatrix::from_diagonal(&[2.0, 0.5]).unwrap()).unwrap();
        assert!(is_anti_symplectic(&ts, 1e-12));
        let s = anti_symplectic_factor(&ts);
        assert!(is_symplectic(&s, 1e-12));
    }

    #[test]
    fn bad_shapes_rejected() {
        assert!(SympMatrix::new(DMatrix::zeros(3, 3)).is_err());
        assert!(SympMatrix::new(DMatrix::zeros(2, 4)).is_err());
        assert!(SympMatrix::from_row_slice(1, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn spectrum_closed_forms() {
        let s = symplectic_spectrum(&(DMatrix::identity(2, 2) * 0.5)).unwrap();
        assert_relative_eq!(s.values[0], 0.5, epsilon = 1e-14);
        let r = 1.7_f64;
        let s = symplectic_spectrum(&(DMatrix::identity(2, 2) * (r * r / 4.0))).unwrap();
        assert_relative_eq!(s.values[0], r * r / 4.0, epsilon = 1e-14);
        let s = symplectic_spectrum(&DMatrix::from_diagonal(&nalgebra::dvector![3.0, 0.7])).unwrap();
        assert_relative_eq!(s.values[0], (3.0_f64 * 0.7).sqrt(), epsilon = 1e-13);
        assert!(s.pairing_residual < 1e-12);
    }

    #[test]
    fn spectrum_errors() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(symplectic_spectrum(&asym), Err(Error::NotSymmetric { .. })));
        let indefinite = DMatrix::from_diagonal(&nalgebra::dvector![1.0, -1.0]);
        assert!(matches!(symplectic_spectrum(&indefinite), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn psd_checks() {
        let id = DMatrix::<Complex64>::identity(2, 2);
        let v = hermitian_psd_check(&id, PSD_TOLERANCE).unwrap();
        assert!(v.is_psd);
        assert_relative_eq!(v.min_eigenvalue, 1.0, epsilon = 1e-14);

        let hbar = 1.3;
        let h = rsup_matrix(&(DMatrix::identity(2, 2) * (hbar / 2.0)), hbar).unwrap();
        let v = hermitian_psd_check(&h, PSD_TOLERANCE).unwrap();
        assert!(v.is_psd);
        assert!(v.min_eigenvalue.abs() < 1e-14);
        assert_relative_eq!(v.scale, hbar, epsilon = 1e-14);

        let h = rsup_matrix(&(DMatrix::identity(2, 2) * (hbar / 4.0)), hbar).unwrap();
        let v = hermitian_psd_check(&h, PSD_TOLERANCE).unwrap();
        assert!(!v.is_psd);
        assert_relative_eq!(v.min_eigenvalue, -hbar / 4.0, epsilon = 1e-14);

        let mut bad = id.clone();
        bad[(0, 1)] = Complex64::new(0.0, 1.0);
        assert!(matches!(hermitian_psd_check(&bad, PSD_TOLERANCE), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn rsup_matrix_shapes() {
        let hbar = 2.0;
        let h = rsup_matrix(&DMatrix::zeros(2, 2), hbar).unwrap();
        assert_eq!(h[(0, 1)], Complex64::new(0.0, 1.0));
        assert_eq!(h[(1, 0)], Complex64::new(0.0, -1.0));
        let ev = hermitian_eigenvalues(&rsup_matrix(&(DMatrix::identity(2, 2) * 3.0 * hbar), hbar).unwrap());
        assert_relative_eq!(ev[0], 2.5 * hbar, epsilon = 1e-13);
        assert_relative_eq!(ev[1], 3.5 * hbar, epsilon = 1e-13);
    }
}
