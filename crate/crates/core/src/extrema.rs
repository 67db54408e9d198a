//! Locating the maxima and minima of an intensity profile on `sin θ ∈ [-1, 1]`.
//!
//! The profile is sampled on a uniform grid; every sign change of the first
//! difference brackets one extremum. Maxima are refined by golden-section
//! search, minima by bisection on the sign of the analytic derivative. A
//! golden-section result is then polished by the same derivative bisection,
//! because comparing function values cannot resolve a quadratic peak below
//! `√ε` of its width.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oracle::IntensityProfile;
use crate::tolerances::{MAX_REFINE_TOL, MIN_GRID_POINTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

impl ExtremumKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtremumKind::Maximum => "maximum",
            ExtremumKind::Minimum => "minimum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtremumFilter {
    All,
    Maxima,
    Minima,
}

impl ExtremumFilter {
    fn admits(self, kind: ExtremumKind) -> bool {
        match self {
            ExtremumFilter::All => true,
            ExtremumFilter::Maxima => kind == ExtremumKind::Maximum,
            ExtremumFilter::Minima => kind == ExtremumKind::Minimum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    /// `sin θ`, strictly inside (-1, 1).
    pub location: f64,
    pub kind: ExtremumKind,
    /// Relative intensity at `location`.
    pub value: f64,
}

/// Uniform grid `s_i = -1 + 2 i / (points - 1)`.
pub fn grid(points: usize) -> Vec<f64> {
    let last = (points - 1) as f64;
    (0..points).map(|i| -1.0 + 2.0 * i as f64 / last).collect()
}

/// Interior extrema of `profile`, sorted by location.
///
/// Requires `grid_points ≥ 1001` and `0 < refine_tol ≤ 1e-8`.
pub fn find_extrema(
    profile: &IntensityProfile,
    filter: ExtremumFilter,
    grid_points: usize,
    refine_tol: f64,
) -> Result<Vec<Extremum>> {
    if grid_points < MIN_GRID_POINTS {
        return Err(Error::invalid(
            "grid_points",
            format!("need at least {MIN_GRID_POINTS} points (got {grid_points})"),
        ));
    }
    if !(refine_tol > 0.0 && refine_tol <= MAX_REFINE_TOL) {
        return Err(Error::invalid(
            "refine_tol",
            format!("must lie in (0, {MAX_REFINE_TOL}] (got {refine_tol})"),
        ));
    }

    let xs = grid(grid_points);
    // Chunked parallel evaluation; collect() keeps grid order.
    let ys: Vec<f64> = xs.par_iter().map(|&s| profile.eval(s)).collect();

    let brackets = brackets(&ys);
    let mut found: Vec<Extremum> = brackets
        .par_iter()
        .filter(|b| filter.admits(b.kind))
        .map(|b| refine(profile, b.kind, xs[b.lo], xs[b.hi], refine_tol))
        .filter(|e| e.location > -1.0 && e.location < 1.0)
        .collect();

    found.sort_by(|x, y| x.location.total_cmp(&y.location));
    let spacing = 2.0 / (grid_points - 1) as f64;
    found.dedup_by(|later, earlier| {
        later.kind == earlier.kind && (later.location - earlier.location).abs() <= spacing
    });
    Ok(found)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Bracket {
    lo: usize,
    hi: usize,
    kind: ExtremumKind,
}

/// Grid index brackets around each sign change of the first difference.
/// Runs of exactly-equal samples (flat at machine precision) are skipped, so
/// a plateau yields a single bracket.
fn brackets(ys: &[f64]) -> Vec<Bracket> {
    let mut out = Vec::new();
    let mut previous: Option<(usize, bool)> = None;
    for i in 0..ys.len() - 1 {
        let diff = ys[i + 1] - ys[i];
        if diff == 0.0 {
            continue;
        }
        let rising = diff > 0.0;
        if let Some((j, was_rising)) = previous {
            if was_rising != rising {
                out.push(Bracket {
                    lo: j,
                    hi: i + 1,
                    kind: if was_rising {
                        ExtremumKind::Maximum
                    } else {
                        ExtremumKind::Minimum
                    },
                });
            }
        }
        previous = Some((i, rising));
    }
    out
}

fn refine(profile: &IntensityProfile, kind: ExtremumKind, lo: f64, hi: f64, tol: f64) -> Extremum {
    let location = match kind {
        ExtremumKind::Maximum => {
            let coarse = golden_section_max(|s| profile.eval(s), lo, hi, tol);
            let margin = (hi - lo) * 1e-4;
            let (a, b) = ((coarse - margin).max(lo), (coarse + margin).min(hi));
            derivative_root(|s| profile.derivative(s), a, b, tol, 1.0).unwrap_or(coarse)
        }
        ExtremumKind::Minimum => derivative_root(|s| profile.derivative(s), lo, hi, tol, -1.0)
            .unwrap_or_else(|| golden_section_max(|s| -profile.eval(s), lo, hi, tol)),
    };
    Extremum {
        location,
        kind,
        value: profile.eval(location),
    }
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Bisection for a sign change of `df` on `[a, b]`.
///
/// `rising_then_falling = 1.0` looks for `df > 0` at `a` and `df < 0` at `b`
/// (a maximum); `-1.0` for the opposite (a minimum). Returns `None` when the
/// endpoints do not bracket such a change.
fn derivative_root(
    df: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
    rising_then_falling: f64,
) -> Option<f64> {
    let sign = |s: f64| df(s) * rising_then_falling;
    if !(sign(a) > 0.0 && sign(b) < 0.0) {
        return None;
    }
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let d = sign(mid);
        if d == 0.0 {
            return Some(mid);
        } else if d > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Some(0.5 * (a + b))
}
