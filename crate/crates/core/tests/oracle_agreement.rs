//! Reference-profile properties, and quantized angles checked against
//! independently located extrema (plain bisection and brute-force scans that
//! share no code with the library's extremum finder).

use std::f64::consts::PI;

use proptest::prelude::*;
use quantscat_core::compare::compare_extrema;
use quantscat_core::extrema::{find_extrema, Extremum, ExtremumFilter, ExtremumKind};
use quantscat_core::oracle::IntensityProfile;
use quantscat_core::tolerances::{DEFAULT_GRID_POINTS, DEFAULT_REFINE_TOL};
use quantscat_core::{quantized_angles, Beam, BranchKind, ScatteringBranch, Scenario};

/// Zeros of `sin(π a s)` on (0, 1) by bisection on sign changes.
fn slit_zeros_by_bisection(a: f64) -> Vec<f64> {
    let f = |s: f64| (PI * a * s).sin();
    let steps = 10_000;
    let mut zeros = Vec::new();
    for i in 0..steps {
        let (mut lo, mut hi) = (i as f64 / steps as f64, (i + 1) as f64 / steps as f64);
        if lo == 0.0 || f(lo).signum() == f(hi).signum() {
            continue;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == f(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        zeros.push(0.5 * (lo + hi));
    }
    zeros
}

/// Grid points that beat both neighbours.
fn scan_maxima(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let xs: Vec<f64> = (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    (1..points - 1)
        .filter(|&i| ys[i] > ys[i - 1] && ys[i] >= ys[i + 1])
        .map(|i| xs[i])
        .collect()
}

fn positive_sines(branches: &[ScatteringBranch], kind: BranchKind) -> Vec<f64> {
    branches
        .iter()
        .filter(|b| b.kind == kind && b.sin_theta > 0.0)
        .map(|b| b.sin_theta)
        .collect()
}

#[test]
fn aperture_branches_are_single_slit_zeros() {
    let beam = Beam::natural(1.0).unwrap();
    for a in [2.5, 5.0, 20.0] {
        let zeros = slit_zeros_by_bisection(a);
        let branches = quantized_angles(&Scenario::aperture(a).unwrap(), &beam, false);
        let sines = positive_sines(&branches, BranchKind::ApertureOrder);
        assert_eq!(sines.len(), zeros.len(), "a = {a}");
        for (s, z) in sines.iter().zip(&zeros) {
            assert!((s - z).abs() < 1e-12, "a = {a}: {s} vs {z}");
        }
    }
}

#[test]
fn interference_branches_are_fringe_maxima() {
    // Brute-force scan of cos²(π c s) on a grid that contains n/10 exactly.
    let beam = Beam::natural(1.0).unwrap();
    let maxima = scan_maxima(|s| (PI * 10.0 * s).cos().powi(2), -1.0, 1.0, 2001);
    let branches = quantized_angles(&Scenario::double_slit(2.0, 10.0).unwrap(), &beam, false);
    let interference: Vec<f64> = branches
        .iter()
        .filter(|b| b.kind == BranchKind::Interference)
        .map(|b| b.sin_theta)
        .collect();
    assert_eq!(interference.len(), maxima.len());
    for (s, m) in interference.iter().zip(&maxima) {
        assert!((s - m).abs() < 1e-12, "{s} vs {m}");
    }
}

#[test]
fn laue_branches_are_lattice_sum_peaks() {
    // |Σ_j exp(2 i j x)|² / N² with x = 2π d s / λ, summed directly.
    let (d, planes) = (2.0, 50u32);
    let lattice_sum = |s: f64| {
        let x = 2.0 * PI * d * s;
        let (re, im) = (0..planes).fold((0.0, 0.0), |(re, im), j| {
            let phase = 2.0 * x * f64::from(j);
            (re + phase.cos(), im + phase.sin())
        });
        (re * re + im * im) / f64::from(planes * planes)
    };
    let peaks: Vec<f64> = scan_maxima(lattice_sum, 0.0, 1.0, 40_001)
        .into_iter()
        .filter(|&s| lattice_sum(s) > 0.5)
        .collect();
    let beam = Beam::natural(1.0).unwrap();
    let branches = quantized_angles(&Scenario::laue(d).unwrap(), &beam, false);
    let sines = positive_sines(&branches, BranchKind::LaueOrder);
    assert_eq!(sines, vec![0.25, 0.5, 0.75]);
    assert_eq!(peaks.len(), sines.len());
    for (s, p) in sines.iter().zip(&peaks) {
        assert!((s - p).abs() <= 0.5 / 40_000.0, "{s} vs {p}");
    }
}

#[test]
fn intensity_nonnegative_and_even() {
    let profiles = [
        IntensityProfile::single_slit(5.0, 1.0).unwrap(),
        IntensityProfile::double_slit(2.0, 10.0, 1.0).unwrap(),
        IntensityProfile::two_source(7.0, 1.0).unwrap(),
        IntensityProfile::lattice(3.7, 50, 1.0).unwrap(),
    ];
    for p in &profiles {
        for i in 0..=5000 {
            let s = i as f64 / 5000.0;
            let plus = p.intensity(s).unwrap();
            let minus = p.intensity(-s).unwrap();
            assert!(plus >= 0.0);
            assert!((plus - minus).abs() <= 1e-12, "{:?} at {s}", p.shape());
        }
    }
}

#[test]
fn single_slit_vanishes_on_aperture_orders() {
    let beam = Beam::natural(1.0).unwrap();
    for a in [2.5, 5.0, 20.0, 99.5] {
        let p = IntensityProfile::single_slit(a, 1.0).unwrap();
        for b in quantized_angles(&Scenario::aperture(a).unwrap(), &beam, false) {
            if b.order != 0 {
                assert!(
                    p.intensity(b.sin_theta).unwrap() < 1e-18,
                    "a = {a}, n = {}",
                    b.order
                );
            }
        }
    }
}

#[test]
fn double_slit_factorizes() {
    let ds = IntensityProfile::double_slit(2.0, 10.0, 1.0).unwrap();
    let fringe = IntensityProfile::two_source(10.0, 1.0).unwrap();
    let envelope = IntensityProfile::single_slit(2.0, 1.0).unwrap();
    for i in 0..10_000 {
        let s = -1.0 + 2.0 * i as f64 / 9_999.0;
        let product = fringe.intensity(s).unwrap() * envelope.intensity(s).unwrap();
        assert!((ds.intensity(s).unwrap() - product).abs() <= 1e-12);
    }
}

/// Full width at half maximum of the central lattice peak, by bisection on
/// `I(s) = 1/2` over the first lobe.
fn central_fwhm(planes: u32) -> f64 {
    let p = IntensityProfile::lattice(2.0, planes, 1.0).unwrap();
    // First zero at x = π/N, i.e. s = 1 / (4 N) for d = 2.
    let (mut lo, mut hi) = (0.0, 1.0 / (4.0 * f64::from(planes)));
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if p.intensity(mid).unwrap() > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + hi
}

#[test]
fn lattice_sharpens_with_plane_count() {
    let widths: Vec<f64> = [10, 20, 40].map(central_fwhm).to_vec();
    assert!(widths[0] > widths[1] && widths[1] > widths[2], "{widths:?}");
}

#[test]
fn single_slit_extremum_counts() {
    let p = IntensityProfile::single_slit(5.0, 1.0).unwrap();
    let all = find_extrema(
        &p,
        ExtremumFilter::All,
        DEFAULT_GRID_POINTS,
        DEFAULT_REFINE_TOL,
    )
    .unwrap();
    let count = |k| all.iter().filter(|e| e.kind == k).count();
    assert_eq!(count(ExtremumKind::Minimum), 8);
    assert_eq!(count(ExtremumKind::Maximum), 9);
    assert!(all.iter().all(|e| e.location > -1.0 && e.location < 1.0));
}

#[test]
fn lattice_extrema_within_micro() {
    let p = IntensityProfile::lattice(2.0, 50, 1.0).unwrap();
    let peaks: Vec<Extremum> = find_extrema(
        &p,
        ExtremumFilter::Maxima,
        DEFAULT_GRID_POINTS,
        DEFAULT_REFINE_TOL,
    )
    .unwrap()
    .into_iter()
    .filter(|e| e.value > 0.5 && e.location > 0.1)
    .collect();
    assert_eq!(peaks.len(), 3);
    for (e, want) in peaks.iter().zip([0.25, 0.5, 0.75]) {
        assert!((e.location - want).abs() < 1e-6);
    }
}

#[test]
fn extrema_stable_across_grid_sizes() {
    // Different grid sizes resolve the same extrema to the refinement width.
    let p = IntensityProfile::double_slit(2.0, 10.0, 1.0).unwrap();
    let a = find_extrema(&p, ExtremumFilter::All, 20_001, 1e-10).unwrap();
    let b = find_extrema(&p, ExtremumFilter::All, 30_001, 1e-10).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.kind, y.kind);
        assert!((x.location - y.location).abs() < 1e-9);
    }
}

fn sorted_points(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 0..max).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v
    })
}

proptest! {
    #[test]
    fn matching_conserves_counts(
        left in sorted_points(30),
        right in sorted_points(30),
        tol in 0.0f64..0.3,
    ) {
        let branches: Vec<ScatteringBranch> = left
            .iter()
            .map(|&s| ScatteringBranch {
                kind: BranchKind::ApertureOrder,
                order: 0,
                sin_theta: s,
                theta: s.asin(),
                delta_pz: s,
            })
            .collect();
        let extrema: Vec<Extremum> = right
            .iter()
            .map(|&s| Extremum { location: s, kind: ExtremumKind::Maximum, value: 1.0 })
            .collect();
        let r = compare_extrema(&branches, &extrema, tol);
        prop_assert_eq!(r.matched.len() + r.unmatched_branches.len(), branches.len());
        prop_assert_eq!(r.matched.len() + r.unmatched_extrema.len(), extrema.len());
        prop_assert!(r.matched.iter().all(|m| m.residual <= tol));
    }
}
