//! Numeric defaults and pass/fail thresholds, collected in one place.

/// Default relative tolerance for floating-point equality checks.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

/// Default number of uniform grid points over `sin θ ∈ [-1, 1]`.
pub const DEFAULT_GRID_POINTS: usize = 20_001;

/// Smallest grid the extremum scan accepts.
pub const MIN_GRID_POINTS: usize = 1_001;

/// Default refinement width for located extrema, in `sin θ` units.
pub const DEFAULT_REFINE_TOL: f64 = 1e-10;

/// Coarsest refinement width the extremum scan accepts.
pub const MAX_REFINE_TOL: f64 = 1e-8;

/// Default number of planes in the lattice reference profile.
pub const DEFAULT_LATTICE_PLANES: u32 = 50;

/// Residual threshold for the integer-order families (aperture, interference,
/// Laue), in `sin θ` units.
pub const INTEGER_ORDER_THRESHOLD: f64 = 1e-9;

/// Envelope residual threshold in units of `λ/a`.
///
/// Exact single-slit secondary maxima solve `tan x = x`; the worst offset from
/// `(m + 1/2) π` among them is at `m = 1`, about `0.0697 π`.
pub const ENVELOPE_THRESHOLD_FACTOR: f64 = 0.08;

/// Reference intensity below which an interference order counts as suppressed
/// by an envelope zero ("missing order").
pub const SUPPRESSED_INTENSITY: f64 = 1e-6;

/// Relative intensity that separates principal maxima from side lobes.
/// Lattice side lobes stay below ~0.05 for `N ≥ 10`, single-slit secondary
/// maxima below ~0.05 as well.
pub const PRINCIPAL_PEAK_FLOOR: f64 = 0.5;

/// Oracle weight treated as zero when checking for degenerate weighting.
pub const ZERO_WEIGHT: f64 = 1e-12;

/// Default histogram bin count.
pub const DEFAULT_BINS: usize = 201;

/// Default histogram half-width margin over the outermost branch.
pub const DEFAULT_RANGE_MARGIN: f64 = 1.1;
