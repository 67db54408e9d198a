//! Ensemble of individually scattered particles.
//!
//! Each particle takes exactly one quantized branch, drawn by inverse CDF
//! over the branch weights, and lands on a flat screen at `L·tan θ`. The
//! pattern only appears in the histogram of many such arrivals.
//!
//! Runs are reproducible from the configuration alone: particle `i` belongs
//! to shard `i mod shards`, draws its variate from a counter-addressed
//! ChaCha8 stream (see [`rng`]), and shard results are merged by integer
//! addition. The output does not depend on the shard count or on scheduling.

pub mod histogram;
mod rng;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinematics::{quantized_angles, Beam, ScatteringBranch, Scenario};
use crate::oracle::IntensityProfile;
use crate::tolerances::{DEFAULT_BINS, DEFAULT_LATTICE_PLANES, DEFAULT_RANGE_MARGIN, ZERO_WEIGHT};

pub use histogram::PatternHistogram;
use rng::ParticleStream;

/// Human-readable name of the pinned per-particle generator.
pub const RNG_SCHEME: &str =
    "ChaCha8 (rand_chacha 0.9) seeded by seed_from_u64(seed); particle i uses keystream word 2i, top 53 bits";

/// How branch probabilities are assigned. The quantization rules themselves
/// say nothing about them.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightMode {
    /// Every branch equally likely.
    Uniform,
    /// Reference-profile intensity at each branch angle.
    OracleWeighted,
    /// Caller-supplied weights, one per branch in `sin θ` order.
    Table(Vec<f64>),
}

impl WeightMode {
    pub fn name(&self) -> &'static str {
        match self {
            WeightMode::Uniform => "uniform",
            WeightMode::OracleWeighted => "oracle",
            WeightMode::Table(_) => "table",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub beam: Beam,
    pub n_particles: u64,
    pub weight_mode: WeightMode,
    pub seed: u64,
    pub screen_distance: f64,
    pub bins: usize,
    /// Screen interval; `None` picks a range just wider than the outermost
    /// branch.
    pub bin_range: Option<(f64, f64)>,
    pub shards: usize,
    pub boundary_inclusive: bool,
}

impl SimConfig {
    /// Uniform weights, 201 bins, automatic range, one shard.
    pub fn new(scenario: Scenario, beam: Beam, n_particles: u64, seed: u64) -> Self {
        Self {
            scenario,
            beam,
            n_particles,
            weight_mode: WeightMode::Uniform,
            seed,
            screen_distance: 1.0,
            bins: DEFAULT_BINS,
            bin_range: None,
            shards: 1,
            boundary_inclusive: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.n_particles == 0 {
            return Err(Error::invalid(
                "simulation.n_particles",
                "must be at least 1",
            ));
        }
        if !(self.screen_distance.is_finite() && self.screen_distance > 0.0) {
            return Err(Error::invalid(
                "simulation.screen_distance",
                format!(
                    "must be a positive finite length (got {})",
                    self.screen_distance
                ),
            ));
        }
        if self.bins < 2 {
            return Err(Error::invalid(
                "simulation.bins",
                format!("need at least 2 bins (got {})", self.bins),
            ));
        }
        if self.shards == 0 {
            return Err(Error::invalid("simulation.shards", "must be at least 1"));
        }
        if let Some((lo, hi)) = self.bin_range {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(
                    "simulation.bin_range",
                    format!("need finite x_min < x_max (got [{lo}, {hi}])"),
                ));
            }
        }
        Ok(())
    }
}

/// One particle's outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringEvent {
    pub branch_index: usize,
    pub theta: f64,
    /// `L·tan θ`; infinite for grazing (`|sin θ| = 1`) branches.
    pub screen_x: f64,
}

/// Normalized probability of each branch under `config.weight_mode`.
pub fn branch_weights(config: &SimConfig, branches: &[ScatteringBranch]) -> Result<Vec<f64>> {
    if branches.is_empty() {
        return Err(Error::EmptyBranches);
    }
    let raw: Vec<f64> = match &config.weight_mode {
        WeightMode::Uniform => vec![1.0; branches.len()],
        WeightMode::Table(table) => {
            if table.len() != branches.len() {
                return Err(Error::invalid(
                    "simulation.weights",
                    format!(
                        "table has {} entries but the scenario has {} branches",
                        table.len(),
                        branches.len()
                    ),
                ));
            }
            if let Some(w) = table.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
                return Err(Error::invalid(
                    "simulation.weights",
                    format!("weights must be finite and nonnegative (got {w})"),
                ));
            }
            if table.iter().all(|&w| w == 0.0) {
                return Err(Error::invalid("simulation.weights", "weights are all zero"));
            }
            table.clone()
        }
        WeightMode::OracleWeighted => {
            let profile = IntensityProfile::for_scenario(
                &config.scenario,
                config.beam.lambda(),
                DEFAULT_LATTICE_PLANES,
            )?;
            let raw: Vec<f64> = branches.iter().map(|b| profile.eval(b.sin_theta)).collect();
            check_oracle_weights(branches, &raw)?;
            raw
        }
    };
    let total: f64 = raw.iter().sum();
    Ok(raw.iter().map(|w| w / total).collect())
}

/// Rejects oracle weights that leave nothing deflected to sample: every
/// branch on a reference zero, or every branch except the undeflected one.
fn check_oracle_weights(branches: &[ScatteringBranch], raw: &[f64]) -> Result<()> {
    let deflected: Vec<f64> = branches
        .iter()
        .zip(raw)
        .filter(|(b, _)| b.sin_theta != 0.0)
        .map(|(_, &w)| w)
        .collect();
    let all_zero = raw.iter().all(|&w| w < ZERO_WEIGHT);
    let deflected_zero = !deflected.is_empty() && deflected.iter().all(|&w| w < ZERO_WEIGHT);
    if all_zero || deflected_zero {
        return Err(Error::DegenerateWeights(
            "every deflected branch sits on a zero of the reference intensity; \
             use uniform or table weights"
                .into(),
        ));
    }
    Ok(())
}

/// Inverse-CDF lookup over normalized weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchSampler {
    cdf: Vec<f64>,
}

impl BranchSampler {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyBranches);
        }
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        if !(acc > 0.0 && acc.is_finite()) {
            return Err(Error::DegenerateWeights("weights sum to zero".into()));
        }
        for c in &mut cdf {
            *c /= acc;
        }
        // Pin the top to exactly 1 from the last positive weight on, so that
        // trailing zero-weight branches stay unreachable.
        let last_positive = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
        for c in &mut cdf[last_positive..] {
            *c = 1.0;
        }
        Ok(Self { cdf })
    }

    /// First branch whose cumulative weight exceeds `u ∈ [0, 1)`.
    pub fn pick(&self, u: f64) -> usize {
        self.cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1)
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }
}

/// Scatters one particle given its uniform variate.
pub fn sample_event(
    variate: f64,
    sampler: &BranchSampler,
    branches: &[ScatteringBranch],
    screen_distance: f64,
) -> ScatteringEvent {
    let branch_index = sampler.pick(variate);
    let branch = &branches[branch_index];
    ScatteringEvent {
        branch_index,
        theta: branch.theta,
        screen_x: screen_position(branch, screen_distance),
    }
}

/// `L·tan θ` on a flat screen; grazing branches go to `±∞`.
pub fn screen_position(branch: &ScatteringBranch, screen_distance: f64) -> f64 {
    if branch.sin_theta.abs() >= 1.0 {
        f64::INFINITY.copysign(branch.sin_theta)
    } else {
        screen_distance * branch.theta.tan()
    }
}

/// `±L·tan(arcsin s_max)·1.1` over the non-grazing branches.
pub fn default_bin_range(branches: &[ScatteringBranch], screen_distance: f64) -> (f64, f64) {
    let s_max = branches
        .iter()
        .map(|b| b.sin_theta.abs())
        .filter(|s| *s < 1.0)
        .fold(0.0, f64::max);
    let half = screen_distance * s_max.asin().tan() * DEFAULT_RANGE_MARGIN;
    // Only the undeflected beam: fall back to ±L.
    let half = if half > 0.0 { half } else { screen_distance };
    (-half, half)
}

/// Result of an ensemble run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub branches: Vec<ScatteringBranch>,
    pub weights: Vec<f64>,
    pub branch_counts: Vec<u64>,
    pub histogram: PatternHistogram,
}

/// A validated configuration with its branches, weights and screen
/// positions resolved.
#[derive(Debug, Clone)]
pub struct Ensemble {
    config: SimConfig,
    branches: Vec<ScatteringBranch>,
    weights: Vec<f64>,
    sampler: BranchSampler,
    range: (f64, f64),
}

impl Ensemble {
    pub fn prepare(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let branches = quantized_angles(&config.scenario, &config.beam, config.boundary_inclusive);
        if branches.is_empty() {
            return Err(Error::EmptyBranches);
        }
        let weights = branch_weights(&config, &branches)?;
        let sampler = BranchSampler::new(&weights)?;
        let range = config
            .bin_range
            .unwrap_or_else(|| default_bin_range(&branches, config.screen_distance));
        Ok(Self {
            config,
            branches,
            weights,
            sampler,
            range,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn branches(&self) -> &[ScatteringBranch] {
        &self.branches
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bin_range(&self) -> (f64, f64) {
        self.range
    }

    /// Every particle's event, in particle order.
    pub fn events(&self) -> impl Iterator<Item = ScatteringEvent> + '_ {
        let mut stream = ParticleStream::new(self.config.seed);
        (0..self.config.n_particles).map(move |i| {
            sample_event(
                stream.variate(i),
                &self.sampler,
                &self.branches,
                self.config.screen_distance,
            )
        })
    }

    fn run_shard(&self, shard: usize) -> (PatternHistogram, Vec<u64>) {
        let mut hist = PatternHistogram::new(self.range, self.config.bins)
            .expect("range and bins validated in prepare");
        let mut counts = vec![0u64; self.branches.len()];
        let mut stream = ParticleStream::new(self.config.seed);
        for i in (shard as u64..self.config.n_particles).step_by(self.config.shards) {
            let event = sample_event(
                stream.variate(i),
                &self.sampler,
                &self.branches,
                self.config.screen_distance,
            );
            counts[event.branch_index] += 1;
            hist.record(event.screen_x);
        }
        (hist, counts)
    }

    /// Runs all shards (concurrently when there are several) and merges them.
    pub fn run(&self) -> SimOutcome {
        let partials: Vec<(PatternHistogram, Vec<u64>)> = (0..self.config.shards)
            .into_par_iter()
            .map(|shard| self.run_shard(shard))
            .collect();
        let mut partials = partials.into_iter();
        let (mut histogram, mut branch_counts) = partials.next().expect("at least one shard");
        for (hist, counts) in partials {
            histogram.merge(&hist);
            for (a, b) in branch_counts.iter_mut().zip(counts) {
                *a += b;
            }
        }
        SimOutcome {
            branches: self.branches.clone(),
            weights: self.weights.clone(),
            branch_counts,
            histogram,
        }
    }
}

/// Validates `config`, then simulates it.
pub fn run(config: &SimConfig) -> Result<SimOutcome> {
    Ok(Ensemble::prepare(config.clone())?.run())
}

/// Sup-norm distance between the empirical branch-frequency CDF and the CDF
/// of `reference`, both taken over branches in `sin θ` order.
pub fn histogram_cdf_distance(branch_counts: &[u64], reference: &[f64]) -> f64 {
    assert_eq!(
        branch_counts.len(),
        reference.len(),
        "counts and reference must cover the same branches"
    );
    let n: u64 = branch_counts.iter().sum();
    let ref_total: f64 = reference.iter().sum();
    if n == 0 || ref_total <= 0.0 {
        return if n == 0 && ref_total <= 0.0 { 0.0 } else { 1.0 };
    }
    let mut seen = 0u64;
    let mut expected = 0.0;
    let mut worst: f64 = 0.0;
    for (&c, &w) in branch_counts.iter().zip(reference) {
        seen += c;
        expected += w;
        let gap = (seen as f64 / n as f64 - expected / ref_total).abs();
        worst = worst.max(gap);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn branch(sin_theta: f64) -> ScatteringBranch {
        ScatteringBranch {
            kind: crate::kinematics::BranchKind::ApertureOrder,
            order: 0,
            sin_theta,
            theta: sin_theta.asin(),
            delta_pz: sin_theta,
        }
    }

    fn config(scenario: Scenario, mode: WeightMode) -> SimConfig {
        let mut c = SimConfig::new(scenario, Beam::natural(1.0).unwrap(), 1000, 42);
        c.weight_mode = mode;
        c
    }

    #[test]
    fn uniform_weights() {
        let branches: Vec<_> = [-0.5, -0.25, 0.0, 0.25, 0.5].map(branch).to_vec();
        let c = config(Scenario::aperture(5.0).unwrap(), WeightMode::Uniform);
        let w = branch_weights(&c, &branches).unwrap();
        assert!(w.iter().all(|&x| (x - 0.2).abs() < 1e-15));
    }

    #[test]
    fn table_weights_normalize() {
        let branches: Vec<_> = [-0.5, 0.0, 0.5].map(branch).to_vec();
        let c = config(
            Scenario::aperture(5.0).unwrap(),
            WeightMode::Table(vec![2.0, 2.0, 6.0]),
        );
        let w = branch_weights(&c, &branches).unwrap();
        for (got, want) in w.iter().zip([0.2, 0.2, 0.6]) {
            assert_relative_eq!(*got, want, max_relative = 1e-15);
        }
    }

    #[test]
    fn table_weight_errors() {
        let branches: Vec<_> = [-0.5, 0.0, 0.5].map(branch).to_vec();
        for bad in [vec![1.0, 1.0], vec![0.0, 0.0, 0.0], vec![1.0, -1.0, 1.0]] {
            let c = config(Scenario::aperture(5.0).unwrap(), WeightMode::Table(bad));
            assert!(matches!(
                branch_weights(&c, &branches),
                Err(Error::Invalid {
                    field: "simulation.weights",
                    ..
                })
            ));
        }
    }

    #[test]
    fn oracle_weights_on_aperture_zeros_are_degenerate() {
        let c = config(Scenario::aperture(5.0).unwrap(), WeightMode::OracleWeighted);
        let branches = quantized_angles(&c.scenario, &c.beam, false);
        assert!(matches!(
            branch_weights(&c, &branches),
            Err(Error::DegenerateWeights(_))
        ));
        assert!(matches!(
            Ensemble::prepare(c),
            Err(Error::DegenerateWeights(_))
        ));
    }

    #[test]
    fn oracle_weights_for_double_slit() {
        let c = config(
            Scenario::double_slit(2.0, 10.0).unwrap(),
            WeightMode::OracleWeighted,
        );
        let branches = quantized_angles(&c.scenario, &c.beam, false);
        let w = branch_weights(&c, &branches).unwrap();
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0, max_relative = 1e-14);
        // The central order carries the largest weight.
        let center = branches.iter().position(|b| b.sin_theta == 0.0).unwrap();
        assert!(w.iter().all(|&x| x <= w[center]));
    }

    #[test]
    fn inverse_cdf_examples() {
        let one = BranchSampler::new(&[1.0]).unwrap();
        for u in [0.0, 0.3, 0.999_999] {
            assert_eq!(one.pick(u), 0);
        }
        let two = BranchSampler::new(&[0.5, 0.5]).unwrap();
        assert_eq!(two.pick(0.25), 0);
        assert_eq!(two.pick(0.75), 1);
    }

    #[test]
    fn zero_weight_branches_never_drawn() {
        let s = BranchSampler::new(&[0.0, 0.3, 0.0, 0.7, 0.0]).unwrap();
        for i in 0..1000 {
            let u = i as f64 / 1000.0;
            assert!([1, 3].contains(&s.pick(u)), "u = {u}");
        }
        assert_eq!(s.pick(1.0 - f64::EPSILON), 3);
    }

    #[test]
    fn screen_position_example() {
        let b = [branch(0.5)];
        let sampler = BranchSampler::new(&[1.0]).unwrap();
        let e = sample_event(0.5, &sampler, &b, 10.0);
        assert_eq!(e.branch_index, 0);
        assert_relative_eq!(e.theta, PI / 6.0, max_relative = 1e-15);
        // 10 tan 30° = 5.7735026918962576...
        assert_relative_eq!(e.screen_x, 5.773_502_691_896_258, max_relative = 1e-14);
    }

    #[test]
    fn grazing_branch_goes_to_overflow() {
        let mut c = config(Scenario::laue(2.0).unwrap(), WeightMode::Uniform);
        c.boundary_inclusive = true;
        let out = run(&c).unwrap();
        assert_eq!(out.branches.len(), 4);
        assert_eq!(out.histogram.overflow_high, out.branch_counts[3]);
        assert!(out.branch_counts[3] > 0);
        assert!(out.histogram.is_conserved());
    }

    #[test]
    fn single_particle_single_branch() {
        let mut c = config(Scenario::aperture(0.5).unwrap(), WeightMode::Uniform);
        c.n_particles = 1;
        let out = run(&c).unwrap();
        assert_eq!(out.branch_counts, vec![1]);
        assert_eq!(out.histogram.counts.iter().filter(|&&n| n == 1).count(), 1);
        assert_eq!(out.histogram.counts.iter().sum::<u64>(), 1);
        assert_eq!(out.histogram.bin_edges().first(), Some(&-1.0));
    }

    #[test]
    fn config_validation() {
        let mut c = config(Scenario::aperture(5.0).unwrap(), WeightMode::Uniform);
        c.n_particles = 0;
        assert!(c.validate().is_err());
        let mut c = config(Scenario::aperture(5.0).unwrap(), WeightMode::Uniform);
        c.bin_range = Some((1.0, -1.0));
        assert!(c.validate().is_err());
        let mut c = config(Scenario::aperture(5.0).unwrap(), WeightMode::Uniform);
        c.shards = 0;
        assert!(c.validate().is_err());
        let mut c = config(Scenario::aperture(5.0).unwrap(), WeightMode::Uniform);
        c.bins = 1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn empty_branch_set_is_an_error() {
        let mut c = config(Scenario::laue(2.0).unwrap(), WeightMode::Uniform);
        c.beam = Beam::natural(10.0).unwrap();
        assert_eq!(Ensemble::prepare(c).unwrap_err(), Error::EmptyBranches);
    }

    #[test]
    fn cdf_distance_examples() {
        assert_eq!(histogram_cdf_distance(&[1, 3], &[0.25, 0.75]), 0.0);
        assert_eq!(histogram_cdf_distance(&[1, 0], &[0.5, 0.5]), 0.5);
    }

    #[test]
    fn shard_counts_agree() {
        let mut c = config(
            Scenario::double_slit(2.0, 10.0).unwrap(),
            WeightMode::Uniform,
        );
        c.n_particles = 20_000;
        let one = run(&c).unwrap();
        c.shards = 7;
        let seven = run(&c).unwrap();
        assert_eq!(one, seven);
    }

    #[test]
    fn events_agree_with_run() {
        let mut c = config(
            Scenario::double_slit(2.0, 10.0).unwrap(),
            WeightMode::OracleWeighted,
        );
        c.shards = 3;
        let ens = Ensemble::prepare(c).unwrap();
        let mut counts = vec![0u64; ens.branches().len()];
        for e in ens.events() {
            counts[e.branch_index] += 1;
        }
        assert_eq!(counts, ens.run().branch_counts);
    }
}
