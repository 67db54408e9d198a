use std::fmt::Write as _;
use std::path::PathBuf;

use serde_json::json;

use quantscat_core::compare::{compare_scenario, ScenarioComparison};
use quantscat_core::ensemble::{screen_position, Ensemble, SimOutcome, RNG_SCHEME};
use quantscat_core::extrema::{find_extrema, grid, Extremum, ExtremumFilter};
use quantscat_core::oracle::{IntensityProfile, ProfileShape};
use quantscat_core::tolerances::PRINCIPAL_PEAK_FLOOR;
use quantscat_core::{quantized_angles, BranchKind, Error, ScatteringBranch};

use crate::config::{self, Overrides, Settings};
use crate::error::CliError;
use crate::output::{num, timestamp, Csv, OutputDir, RunManifest};

/// A parsed and resolved command invocation.
pub struct Invocation {
    pub command: &'static str,
    pub config_path: PathBuf,
    pub raw: serde_json::Value,
    pub settings: Settings,
    started: String,
}

impl Invocation {
    pub fn load(command: &'static str, flags: &Overrides) -> Result<Self, CliError> {
        let started = timestamp();
        let (file, raw) = config::load(&flags.config)?;
        let settings = Settings::resolve(&file, flags)?;
        Ok(Self {
            command,
            config_path: flags.config.clone(),
            raw,
            settings,
            started,
        })
    }

    fn manifest(&self, settings: serde_json::Value) -> RunManifest {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config_path: self.config_path.display().to_string(),
            config: self.raw.clone(),
            settings,
            seed: None,
            rng: None,
            results: None,
            started: self.started.clone(),
            finished: timestamp(),
            outputs: Vec::new(),
        }
    }

    fn settings_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(&self.settings).expect("settings serialize");
        v["scenario"] = json!(self.settings.scenario.name());
        v
    }
}

pub fn angles_csv(branches: &[ScatteringBranch]) -> Csv {
    let mut csv = Csv::new(&["branch", "order", "sin_theta", "theta_rad", "delta_pz"]);
    for b in branches {
        csv.row([
            b.kind.as_str().to_owned(),
            b.order.to_string(),
            num(b.sin_theta),
            num(b.theta),
            num(b.delta_pz),
        ]);
    }
    csv
}

pub fn angles(inv: &Invocation) -> Result<(), CliError> {
    let s = &inv.settings;
    let branches = quantized_angles(&s.scenario, &s.beam, s.boundary_inclusive);
    if branches.is_empty() {
        return Err(Error::EmptyBranches.into());
    }
    let csv = angles_csv(&branches);
    print!("{}", csv.as_str());
    if let Some(dir) = &s.out_dir {
        let mut out = OutputDir::create(dir)?;
        out.write("angles.csv", csv.as_str().as_bytes())?;
        out.finish(inv.manifest(inv.settings_json()))?;
    }
    Ok(())
}

/// Extrema reported by `oracle`: every interior extremum, except for a
/// lattice where only the principal peaks of nonzero order are kept.
pub fn oracle_extrema(
    profile: &IntensityProfile,
    grid_points: usize,
    refine_tol: f64,
) -> Result<Vec<Extremum>, Error> {
    match profile.shape() {
        ProfileShape::Lattice { d, .. } => {
            let period = profile.lambda() / (2.0 * d);
            Ok(
                find_extrema(profile, ExtremumFilter::Maxima, grid_points, refine_tol)?
                    .into_iter()
                    .filter(|e| {
                        e.value >= PRINCIPAL_PEAK_FLOOR && (e.location / period).round() != 0.0
                    })
                    .collect(),
            )
        }
        _ => find_extrema(profile, ExtremumFilter::All, grid_points, refine_tol),
    }
}

pub fn oracle(inv: &Invocation) -> Result<(), CliError> {
    let s = &inv.settings;
    let dir = require_out_dir(s)?;
    let profile = IntensityProfile::for_scenario(&s.scenario, s.lambda, s.lattice_planes)?;
    let extrema = oracle_extrema(&profile, s.grid, s.refine_tol)?;

    let mut curve = Csv::new(&["sin_theta", "intensity"]);
    for x in grid(s.grid) {
        curve.row([num(x), num(profile.intensity(x)?)]);
    }
    let mut ext = Csv::new(&["sin_theta", "kind", "value"]);
    for e in &extrema {
        ext.row([num(e.location), e.kind.as_str().to_owned(), num(e.value)]);
    }

    let mut out = OutputDir::create(&dir)?;
    out.write("curve.csv", curve.as_str().as_bytes())?;
    out.write("extrema.csv", ext.as_str().as_bytes())?;
    let mut settings = inv.settings_json();
    settings["profile"] = json!(profile.shape().name());
    out.finish(inv.manifest(settings))?;
    println!(
        "{} profile: {} curve points, {} extrema -> {}",
        profile.shape().name(),
        s.grid,
        extrema.len(),
        dir.display()
    );
    Ok(())
}

pub fn histogram_csv(outcome: &SimOutcome) -> Csv {
    let h = &outcome.histogram;
    let edges = h.bin_edges();
    let mut csv = Csv::new(&["bin_left", "bin_right", "count"]);
    for (i, count) in h.counts.iter().enumerate() {
        csv.row([num(edges[i]), num(edges[i + 1]), count.to_string()]);
    }
    csv
}

pub fn branch_counts_csv(outcome: &SimOutcome, screen_distance: f64) -> Csv {
    let mut csv = Csv::new(&[
        "branch",
        "order",
        "sin_theta",
        "screen_x",
        "weight",
        "count",
    ]);
    for (i, b) in outcome.branches.iter().enumerate() {
        csv.row([
            b.kind.as_str().to_owned(),
            b.order.to_string(),
            num(b.sin_theta),
            num(screen_position(b, screen_distance)),
            num(outcome.weights[i]),
            outcome.branch_counts[i].to_string(),
        ]);
    }
    csv
}

pub fn simulate(inv: &Invocation) -> Result<(), CliError> {
    let s = &inv.settings;
    let dir = require_out_dir(s)?;
    let config = s.sim_config()?;
    let ensemble = Ensemble::prepare(config.clone())?;
    let outcome = ensemble.run();

    let mut out = OutputDir::create(&dir)?;
    out.write("histogram.csv", histogram_csv(&outcome).as_str().as_bytes())?;
    out.write(
        "branch_counts.csv",
        branch_counts_csv(&outcome, config.screen_distance)
            .as_str()
            .as_bytes(),
    )?;

    let h = &outcome.histogram;
    let (lo, hi) = h.range();
    let mut settings = inv.settings_json();
    settings["simulation"] = json!({
        "n_particles": config.n_particles,
        "weight_mode": config.weight_mode.name(),
        "screen_distance": config.screen_distance,
        "bins": config.bins,
        "bin_range": [lo, hi],
        "shards": config.shards,
    });
    let mut manifest = inv.manifest(settings);
    manifest.seed = Some(config.seed);
    manifest.rng = Some(RNG_SCHEME);
    manifest.results = Some(json!({
        "branches": outcome.branches.len(),
        "total": h.total,
        "overflow_low": h.overflow_low,
        "overflow_high": h.overflow_high,
    }));
    out.finish(manifest)?;
    println!(
        "{} particles over {} branches (seed {}): {} binned, {} below, {} above range -> {}",
        h.total,
        outcome.branches.len(),
        config.seed,
        h.counts.iter().sum::<u64>(),
        h.overflow_low,
        h.overflow_high,
        dir.display()
    );
    Ok(())
}

pub fn compare_csv(cmp: &ScenarioComparison) -> Csv {
    let mut csv = Csv::new(&[
        "branch",
        "order",
        "sin_theta_quantized",
        "sin_theta_oracle",
        "residual",
        "oracle_kind",
        "suppressed_flag",
    ]);
    for row in &cmp.rows {
        let b = &row.branch;
        csv.row([
            b.kind.as_str().to_owned(),
            b.order.to_string(),
            num(b.sin_theta),
            row.oracle.map(|e| num(e.location)).unwrap_or_default(),
            row.residual.map(num).unwrap_or_default(),
            row.oracle.map_or("none", |e| e.kind.as_str()).to_owned(),
            row.suppressed.to_string(),
        ]);
    }
    csv
}

/// One line per branch family with its largest residual.
pub fn compare_summary(cmp: &ScenarioComparison) -> String {
    let mut text = String::new();
    for f in cmp.families() {
        let max = f
            .max_residual
            .map_or_else(|| "n/a".to_owned(), |r| format!("{r:.6e}"));
        let _ = write!(
            text,
            "{}: {} branches, max residual {} (threshold {:.6e}), {} outside threshold",
            f.kind, f.branches, max, f.threshold, f.failures
        );
        if f.kind == BranchKind::Interference {
            let suppressed = cmp.rows.iter().filter(|r| r.suppressed).count();
            let _ = write!(text, ", {suppressed} suppressed");
        }
        text.push('\n');
    }
    text
}

pub fn compare(inv: &Invocation) -> Result<(), CliError> {
    let s = &inv.settings;
    let cmp = compare_scenario(&s.scenario, &s.beam, &s.compare_options())?;
    if cmp.rows.is_empty() {
        return Err(Error::EmptyBranches.into());
    }
    let summary = compare_summary(&cmp);
    if let Some(dir) = &s.out_dir {
        let mut out = OutputDir::create(dir)?;
        out.write("compare.csv", compare_csv(&cmp).as_str().as_bytes())?;
        let mut manifest = inv.manifest(inv.settings_json());
        manifest.results =
            Some(json!({ "passed": cmp.passed(), "summary": summary.lines().collect::<Vec<_>>() }));
        out.finish(manifest)?;
    }
    print!("{summary}");
    let failures = cmp.rows.iter().filter(|r| !r.within_threshold()).count();
    if failures > 0 {
        return Err(CliError::ComparisonFailed { failures });
    }
    Ok(())
}

fn require_out_dir(s: &Settings) -> Result<PathBuf, CliError> {
    s.out_dir
        .clone()
        .ok_or_else(|| CliError::config("output.dir: required for this command (or pass --out)"))
}
