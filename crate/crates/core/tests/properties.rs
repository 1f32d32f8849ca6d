use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use phasecert::certify::{analyze_field, certify_refined_rsup, certify_rsup, Tolerances, Verdict};
use phasecert::grid::PhaseSpaceGrid;
use phasecert::states::{build_field, StateSpec};
use phasecert::symplectic::{
    anti_symplectic_factor, hermitian_psd_check, is_anti_symplectic, is_symplectic, rsup_matrix, symplectic_spectrum,
    SympMatrix,
};
use phasecert::transforms::{moyal_identity_sides, LinearSymbol};

/// Product of block rotations, a squeeze and a symmetric shear.
fn symplectic(n: usize, angles: &[f64], squeeze: &[f64], shear: &[f64]) -> DMatrix<f64> {
    let mut rot = DMatrix::zeros(2 * n, 2 * n);
    let mut sq = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        let (s, c) = angles[i].sin_cos();
        rot[(i, i)] = c;
        rot[(i, n + i)] = -s;
        rot[(n + i, i)] = s;
        rot[(n + i, n + i)] = c;
        sq[(i, i)] = squeeze[i];
        sq[(n + i, n + i)] = 1.0 / squeeze[i];
    }
    let mut sh = DMatrix::identity(2 * n, 2 * n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            sh[(i, n + j)] = shear[k];
            sh[(j, n + i)] = shear[k];
            k += 1;
        }
    }
    rot * sq * sh
}

fn arb_symplectic(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (
        prop::collection::vec(0.0..std::f64::consts::TAU, n),
        prop::collection::vec(0.5..2.0_f64, n),
        prop::collection::vec(-1.0..1.0_f64, n * (n + 1) / 2),
    )
        .prop_map(move |(a, s, h)| symplectic(n, &a, &s, &h))
}

/// `Sᵀ diag(λ, λ) S` with a known symplectic spectrum.
fn williamson(n: usize) -> impl Strategy<Value = (Vec<f64>, DMatrix<f64>)> {
    (prop::collection::vec(0.1..3.0_f64, n), arb_symplectic(n)).prop_map(move |(lam, s)| {
        let d = DMatrix::from_fn(2 * n, 2 * n, |i, j| if i == j { lam[i % n] } else { 0.0 });
        (lam, s.transpose() * d * s)
    })
}

fn hermite_mixture(weights: &[f64]) -> StateSpec {
    let total: f64 = weights.iter().sum();
    StateSpec::Mixture {
        weights: weights.iter().map(|w| w / total).collect(),
        children: (0..weights.len()).map(|k| StateSpec::Hermite { k }).collect(),
    }
}

fn grid() -> PhaseSpaceGrid {
    PhaseSpaceGrid::uniform(1, 128, 8.0, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_maps_are_symplectic(s in (1usize..=3).prop_flat_map(arb_symplectic)) {
        let n = s.nrows() / 2;
        prop_assert!(is_symplectic(&SympMatrix::new(s).unwrap(), 1e-9), "n = {n}");
    }

    #[test]
    fn spectrum_is_recovered_and_invariant((lam, b) in (1usize..=3).prop_flat_map(williamson)) {
        let mut want = lam.clone();
        want.sort_by(f64::total_cmp);
        let got = symplectic_spectrum(&b).unwrap().values;
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-7 * w.max(1.0), "{got:?} vs {want:?}");
        }
        let det = b.determinant();
        let prod: f64 = lam.iter().map(|l| l * l).product();
        prop_assert!((det - prod).abs() <= 1e-7 * prod);
    }

    #[test]
    fn rsup_psd_iff_spectrum_above_half_hbar(
        (lam, b) in (1usize..=2).prop_flat_map(williamson),
        hbar in 0.5..2.0_f64,
    ) {
        let lmin = lam.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assume!((lmin - hbar / 2.0).abs() > 1e-3);
        let v = hermitian_psd_check(&rsup_matrix(&b, hbar).unwrap(), 1e-10).unwrap();
        prop_assert_eq!(v.is_psd, lmin >= hbar / 2.0);
    }

    #[test]
    fn time_reversal_times_symplectic_factors_back(s in (1usize..=3).prop_flat_map(arb_symplectic)) {
        let n = s.nrows() / 2;
        let a = SympMatrix::new(SympMatrix::time_reversal(n).into_inner() * &s).unwrap();
        prop_assert!(is_anti_symplectic(&a, 1e-9));
        let back = anti_symplectic_factor(&a);
        prop_assert!(is_symplectic(&back, 1e-9));
        prop_assert!((back.entries() - &s).amax() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn moyal_identity_holds(
        w in prop::collection::vec(0.05..1.0_f64, 1..=3),
        eta in prop::collection::vec(-1.0..1.0_f64, 4),
        z0 in prop::collection::vec(-1.0..1.0_f64, 2),
    ) {
        let f = build_field(&hermite_mixture(&w), &grid()).unwrap();
        let eta = vec![Complex64::new(eta[0], eta[1]), Complex64::new(eta[2], eta[3])];
        let (lhs, rhs) = moyal_identity_sides(&LinearSymbol::new(eta, z0, 1.0).unwrap(), &f).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-6 * rhs.abs(), "{lhs} vs {rhs}");
    }

    #[test]
    fn refined_rsup_implies_rsup(w in prop::collection::vec(0.0..1.0_f64, 4)) {
        prop_assume!(w.iter().sum::<f64>() > 0.1);
        let tol = Tolerances::default();
        let a = analyze_field(&build_field(&hermite_mixture(&w), &grid()).unwrap(), &tol).unwrap();
        let refined = certify_refined_rsup(&a, &tol).unwrap();
        // Wigner functions of density operators satisfy every link of the chain
        prop_assert_eq!(refined.ineq1.verdict, Verdict::Pass);
        prop_assert_eq!(refined.ineq2.verdict, Verdict::Pass);
        prop_assert_eq!(certify_rsup(&a.report, a.hbar, &tol).unwrap().verdict, Verdict::Pass);
    }
}
