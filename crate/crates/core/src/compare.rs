//! Residuals between quantized branches and reference-profile extrema.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::extrema::{find_extrema, Extremum, ExtremumFilter, ExtremumKind};
use crate::kinematics::{quantized_angles, Beam, BranchKind, ScatteringBranch, Scenario};
use crate::oracle::IntensityProfile;
use crate::tolerances::{
    DEFAULT_GRID_POINTS, DEFAULT_LATTICE_PLANES, DEFAULT_REFINE_TOL, ENVELOPE_THRESHOLD_FACTOR,
    INTEGER_ORDER_THRESHOLD, PRINCIPAL_PEAK_FLOOR, SUPPRESSED_INTENSITY,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub branch: usize,
    pub extremum: usize,
    pub residual: f64,
    pub kind: ExtremumKind,
}

/// Outcome of matching branches to extrema by `sin θ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComparisonReport {
    /// Sorted by branch index.
    pub matched: Vec<MatchedPair>,
    pub unmatched_branches: Vec<usize>,
    pub unmatched_extrema: Vec<usize>,
}

impl ComparisonReport {
    pub fn for_branch(&self, branch: usize) -> Option<&MatchedPair> {
        self.matched
            .binary_search_by_key(&branch, |m| m.branch)
            .ok()
            .map(|i| &self.matched[i])
    }

    pub fn max_residual(&self) -> Option<f64> {
        self.matched.iter().map(|m| m.residual).reduce(f64::max)
    }
}

/// Greedy nearest-neighbour matching: the closest remaining pair is matched
/// first, and pairs further apart than `matching_tol` are never matched.
pub fn compare_extrema(
    branches: &[ScatteringBranch],
    extrema: &[Extremum],
    matching_tol: f64,
) -> ComparisonReport {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, b) in branches.iter().enumerate() {
        // Both lists are sorted, so only extrema inside the window matter.
        let start = extrema.partition_point(|e| e.location < b.sin_theta - matching_tol);
        for (j, e) in extrema.iter().enumerate().skip(start) {
            let d = (e.location - b.sin_theta).abs();
            if e.location > b.sin_theta + matching_tol {
                break;
            }
            if d <= matching_tol {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut branch_taken = vec![false; branches.len()];
    let mut extremum_taken = vec![false; extrema.len()];
    let mut matched = Vec::new();
    for (residual, i, j) in candidates {
        if branch_taken[i] || extremum_taken[j] {
            continue;
        }
        branch_taken[i] = true;
        extremum_taken[j] = true;
        matched.push(MatchedPair {
            branch: i,
            extremum: j,
            residual,
            kind: extrema[j].kind,
        });
    }
    matched.sort_by_key(|m| m.branch);

    ComparisonReport {
        matched,
        unmatched_branches: (0..branches.len()).filter(|&i| !branch_taken[i]).collect(),
        unmatched_extrema: (0..extrema.len()).filter(|&j| !extremum_taken[j]).collect(),
    }
}

/// Settings for [`compare_scenario`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    pub grid_points: usize,
    pub refine_tol: f64,
    pub lattice_planes: u32,
    pub boundary_inclusive: bool,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            grid_points: DEFAULT_GRID_POINTS,
            refine_tol: DEFAULT_REFINE_TOL,
            lattice_planes: DEFAULT_LATTICE_PLANES,
            boundary_inclusive: false,
        }
    }
}

/// One row of a scenario comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchResidual {
    pub branch: ScatteringBranch,
    /// Matched extremum, or the nearest candidate when nothing lies within
    /// the family threshold.
    pub oracle: Option<Extremum>,
    pub matched: bool,
    /// `|Δ sin θ|` to `oracle`.
    pub residual: Option<f64>,
    pub threshold: f64,
    /// Full-profile intensity at the branch falls below
    /// [`SUPPRESSED_INTENSITY`] (an interference order on an envelope zero).
    pub suppressed: bool,
}

impl BranchResidual {
    pub fn within_threshold(&self) -> bool {
        self.matched && self.residual.is_some_and(|r| r <= self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilySummary {
    pub kind: BranchKind,
    pub branches: usize,
    pub failures: usize,
    pub max_residual: Option<f64>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioComparison {
    pub rows: Vec<BranchResidual>,
}

impl ScenarioComparison {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(BranchResidual::within_threshold)
    }

    pub fn families(&self) -> Vec<FamilySummary> {
        let mut by_kind: BTreeMap<BranchKind, FamilySummary> = BTreeMap::new();
        for row in &self.rows {
            let entry = by_kind.entry(row.branch.kind).or_insert(FamilySummary {
                kind: row.branch.kind,
                branches: 0,
                failures: 0,
                max_residual: None,
                threshold: row.threshold,
            });
            entry.branches += 1;
            if !row.within_threshold() {
                entry.failures += 1;
            }
            if let Some(r) = row.residual {
                entry.max_residual = Some(entry.max_residual.map_or(r, |m: f64| m.max(r)));
            }
        }
        by_kind.into_values().collect()
    }
}

/// Reference extrema a branch family is compared with, and its threshold.
struct FamilyTarget {
    extrema: Vec<Extremum>,
    threshold: f64,
}

fn family_target(
    kind: BranchKind,
    scenario: &Scenario,
    lambda: f64,
    opts: &CompareOptions,
) -> Result<FamilyTarget> {
    let scan =
        |p: IntensityProfile, filter| find_extrema(&p, filter, opts.grid_points, opts.refine_tol);
    Ok(match (kind, *scenario) {
        // Principal lattice peaks.
        (BranchKind::LaueOrder, Scenario::Laue { d }) => FamilyTarget {
            extrema: scan(
                IntensityProfile::lattice(d, opts.lattice_planes, lambda)?,
                ExtremumFilter::Maxima,
            )?
            .into_iter()
            .filter(|e| e.value >= PRINCIPAL_PEAK_FLOOR)
            .collect(),
            threshold: INTEGER_ORDER_THRESHOLD,
        },
        // Single-slit zeros, plus the central maximum for n = 0.
        (BranchKind::ApertureOrder, Scenario::Aperture { a }) => FamilyTarget {
            extrema: scan(
                IntensityProfile::single_slit(a, lambda)?,
                ExtremumFilter::All,
            )?
            .into_iter()
            .filter(|e| e.kind == ExtremumKind::Minimum || e.value >= PRINCIPAL_PEAK_FLOOR)
            .collect(),
            threshold: INTEGER_ORDER_THRESHOLD,
        },
        // Maxima of the cos² fringe factor.
        (BranchKind::Interference, Scenario::DoubleSlit { c, .. }) => FamilyTarget {
            extrema: scan(
                IntensityProfile::two_source(c, lambda)?,
                ExtremumFilter::Maxima,
            )?,
            threshold: INTEGER_ORDER_THRESHOLD,
        },
        // Secondary maxima of the sinc² envelope.
        (BranchKind::Envelope, Scenario::DoubleSlit { a, .. }) => FamilyTarget {
            extrema: scan(
                IntensityProfile::single_slit(a, lambda)?,
                ExtremumFilter::Maxima,
            )?
            .into_iter()
            .filter(|e| e.value < PRINCIPAL_PEAK_FLOOR)
            .collect(),
            threshold: ENVELOPE_THRESHOLD_FACTOR * lambda / a,
        },
        _ => unreachable!("branch family {kind} does not occur in {}", scenario.name()),
    })
}

/// Compares every quantized branch of `scenario` with the extrema of the
/// matching reference profile, family by family.
pub fn compare_scenario(
    scenario: &Scenario,
    beam: &Beam,
    opts: &CompareOptions,
) -> Result<ScenarioComparison> {
    let lambda = beam.lambda();
    let branches = quantized_angles(scenario, beam, opts.boundary_inclusive);
    let full = IntensityProfile::for_scenario(scenario, lambda, opts.lattice_planes)?;

    let mut kinds: Vec<BranchKind> = branches.iter().map(|b| b.kind).collect();
    kinds.sort();
    kinds.dedup();

    let mut rows: Vec<Option<BranchResidual>> = vec![None; branches.len()];
    for kind in kinds {
        let target = family_target(kind, scenario, lambda, opts)?;
        let (indices, family): (Vec<usize>, Vec<ScatteringBranch>) = branches
            .iter()
            .enumerate()
            .filter(|(_, b)| b.kind == kind)
            .map(|(i, b)| (i, *b))
            .unzip();
        let report = compare_extrema(&family, &target.extrema, target.threshold);

        for (local, branch) in family.iter().enumerate() {
            let (oracle, matched) = match report.for_branch(local) {
                Some(m) => (Some(target.extrema[m.extremum]), true),
                None => (nearest(&target.extrema, branch.sin_theta), false),
            };
            rows[indices[local]] = Some(BranchResidual {
                branch: *branch,
                oracle,
                matched,
                residual: oracle.map(|e| (e.location - branch.sin_theta).abs()),
                threshold: target.threshold,
                suppressed: kind == BranchKind::Interference
                    && full.eval(branch.sin_theta) < SUPPRESSED_INTENSITY,
            });
        }
    }
    Ok(ScenarioComparison {
        rows: rows
            .into_iter()
            .map(|r| r.expect("every branch belongs to a family"))
            .collect(),
    })
}

fn nearest(extrema: &[Extremum], s: f64) -> Option<Extremum> {
    extrema
        .iter()
        .min_by(|x, y| (x.location - s).abs().total_cmp(&(y.location - s).abs()))
        .copied()
}
