//! JSON run configuration and its resolution against command-line flags.
//!
//! Unknown keys anywhere in the document are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use quantscat_core::compare::CompareOptions;
use quantscat_core::ensemble::{SimConfig, WeightMode};
use quantscat_core::tolerances::{DEFAULT_GRID_POINTS, DEFAULT_LATTICE_PLANES, DEFAULT_REFINE_TOL};
use quantscat_core::{ActionConstant, Beam, Scenario};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: ScenarioSection,
    pub beam: BeamSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSection {
    Laue { d: f64 },
    Aperture { a: f64 },
    DoubleSlit { a: f64, c: f64 },
}

/// Exactly one of `lambda` and `momentum`.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSection {
    pub lambda: Option<f64>,
    pub momentum: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub grid: Option<usize>,
    pub refine_tol: Option<f64>,
    pub lattice_planes: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub n_particles: Option<u64>,
    pub seed: Option<u64>,
    pub weight_mode: Option<WeightModeName>,
    pub weights: Option<Vec<f64>>,
    pub screen_distance: Option<f64>,
    pub bins: Option<usize>,
    pub bin_range: Option<[f64; 2]>,
    pub shards: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WeightModeName {
    Uniform,
    Oracle,
    Table,
}

/// Flags shared by every subcommand. Each one overrides its config key.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Run configuration (JSON).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory [config: output.dir].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Oracle grid points [config: oracle.grid].
    #[arg(long, value_name = "N")]
    pub grid: Option<usize>,
    /// Extremum refinement tolerance [config: oracle.refine_tol].
    #[arg(long, value_name = "X")]
    pub tol: Option<f64>,
    /// Histogram bins [config: simulation.bins].
    #[arg(long, value_name = "N")]
    pub bins: Option<usize>,
    /// Simulation seed [config: simulation.seed].
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Simulation shards [config: simulation.shards].
    #[arg(long, value_name = "N")]
    pub shards: Option<usize>,
    /// Admit branches with |sin θ| = 1.
    #[arg(long)]
    pub boundary_inclusive: bool,
    /// Branch weighting [config: simulation.weight_mode].
    #[arg(long, value_enum, value_name = "MODE")]
    pub weight_mode: Option<WeightModeName>,
    /// Action constant h = 1 (default).
    #[arg(long, conflicts_with = "si")]
    pub natural_units: bool,
    /// SI action constant (Planck's constant, J·s).
    #[arg(long)]
    pub si: bool,
}

/// Reads and parses `path`. Returns the typed config and the raw document.
pub fn load(path: &Path) -> Result<(ConfigFile, serde_json::Value), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let parsed: ConfigFile = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let raw = serde_json::from_str(&text).expect("document already parsed once");
    Ok((parsed, raw))
}

/// Settings after merging the config file with flags and applying defaults.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    #[serde(skip)]
    pub scenario: Scenario,
    #[serde(skip)]
    pub beam: Beam,
    pub units: &'static str,
    pub h: f64,
    pub lambda: f64,
    pub momentum: f64,
    pub boundary_inclusive: bool,
    pub grid: usize,
    pub refine_tol: f64,
    pub lattice_planes: u32,
    pub out_dir: Option<PathBuf>,
    #[serde(skip)]
    sim: SimulationSection,
    #[serde(skip)]
    weight_mode: Option<WeightModeName>,
    #[serde(skip)]
    seed: Option<u64>,
}

impl Settings {
    pub fn resolve(file: &ConfigFile, flags: &Overrides) -> Result<Self, CliError> {
        let scenario = match file.scenario {
            ScenarioSection::Laue { d } => Scenario::laue(d),
            ScenarioSection::Aperture { a } => Scenario::aperture(a),
            ScenarioSection::DoubleSlit { a, c } => Scenario::double_slit(a, c),
        }
        .map_err(|e| CliError::config(format!("scenario: {e}")))?;

        let (units, h) = if flags.si {
            ("si", ActionConstant::SI)
        } else {
            ("natural", ActionConstant::NATURAL)
        };
        let beam = match (file.beam.lambda, file.beam.momentum) {
            (Some(lambda), None) => Beam::new(lambda, h),
            (None, Some(p)) => Beam::from_momentum(p, h),
            _ => {
                return Err(CliError::config(
                    "beam: give exactly one of `lambda` and `momentum`",
                ))
            }
        }
        .map_err(|e| CliError::config(format!("beam: {e}")))?;

        let grid = flags
            .grid
            .or(file.oracle.grid)
            .unwrap_or(DEFAULT_GRID_POINTS);
        let refine_tol = flags
            .tol
            .or(file.oracle.refine_tol)
            .unwrap_or(DEFAULT_REFINE_TOL);
        let lattice_planes = file.oracle.lattice_planes.unwrap_or(DEFAULT_LATTICE_PLANES);

        let mut sim = file.simulation.clone();
        sim.bins = flags.bins.or(sim.bins);
        sim.shards = flags.shards.or(sim.shards);
        Ok(Self {
            scenario,
            beam,
            units,
            h: h.value(),
            lambda: beam.lambda(),
            momentum: beam.momentum(),
            boundary_inclusive: flags.boundary_inclusive,
            grid,
            refine_tol,
            lattice_planes,
            out_dir: flags.out.clone().or_else(|| file.output.dir.clone()),
            weight_mode: flags.weight_mode.or(sim.weight_mode),
            seed: flags.seed.or(sim.seed),
            sim,
        })
    }

    pub fn compare_options(&self) -> CompareOptions {
        CompareOptions {
            grid_points: self.grid,
            refine_tol: self.refine_tol,
            lattice_planes: self.lattice_planes,
            boundary_inclusive: self.boundary_inclusive,
        }
    }

    /// Ensemble settings. `n_particles` and `seed` have no defaults.
    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let n = self
            .sim
            .n_particles
            .ok_or_else(|| CliError::config("simulation.n_particles: required"))?;
        let seed = self
            .seed
            .ok_or_else(|| CliError::config("simulation.seed: required (or pass --seed)"))?;
        let mut config = SimConfig::new(self.scenario, self.beam, n, seed);
        config.weight_mode = match (self.weight_mode, &self.sim.weights) {
            (None | Some(WeightModeName::Uniform), _) => WeightMode::Uniform,
            (Some(WeightModeName::Oracle), _) => WeightMode::OracleWeighted,
            (Some(WeightModeName::Table), Some(w)) => WeightMode::Table(w.clone()),
            (Some(WeightModeName::Table), None) => {
                return Err(CliError::config(
                    "simulation.weights: required when weight_mode is `table`",
                ))
            }
        };
        if let Some(l) = self.sim.screen_distance {
            config.screen_distance = l;
        }
        if let Some(bins) = self.sim.bins {
            config.bins = bins;
        }
        if let Some(shards) = self.sim.shards {
            config.shards = shards;
        }
        config.bin_range = self.sim.bin_range.map(|[lo, hi]| (lo, hi));
        config.boundary_inclusive = self.boundary_inclusive;
        config
            .validate()
            .map_err(|e| CliError::config(e.to_string()))?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ConfigFile, serde_json::Error> {
        serde_json::from_str(text)
    }

    #[test]
    fn minimal_document() {
        let c =
            parse(r#"{"scenario": {"kind": "aperture", "a": 5}, "beam": {"lambda": 1}}"#).unwrap();
        let s = Settings::resolve(&c, &Overrides::default()).unwrap();
        assert_eq!(s.scenario, Scenario::aperture(5.0).unwrap());
        assert_eq!(s.grid, DEFAULT_GRID_POINTS);
        assert_eq!(s.units, "natural");
    }

    #[test]
    fn unknown_keys_rejected_everywhere() {
        for text in [
            r#"{"scenario": {"kind": "aperture", "a": 5}, "beam": {"lambda": 1}, "extra": 1}"#,
            r#"{"scenario": {"kind": "aperture", "a": 5, "c": 2}, "beam": {"lambda": 1}}"#,
            r#"{"scenario": {"kind": "aperture", "a": 5}, "beam": {"lamda": 1}}"#,
            r#"{"scenario": {"kind": "aperture", "a": 5}, "beam": {"lambda": 1}, "oracle": {"grids": 3}}"#,
            r#"{"scenario": {"kind": "aperture", "a": 5}, "beam": {"lambda": 1}, "simulation": {"seeds": 3}}"#,
            r#"{"scenario": {"kind": "prism", "a": 5}, "beam": {"lambda": 1}}"#,
        ] {
            assert!(parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn parse_error_reports_position() {
        let err = parse("{\n  \"scenario\": {\"kind\": \"laue\", \"d\": 2},\n  \"beam\": {\"lambda\": 1},\n  \"ouput\": {}\n}")
            .unwrap_err();
        assert_eq!(err.line(), 4);
        assert!(err.to_string().contains("ouput"));
    }

    #[test]
    fn beam_needs_exactly_one_source() {
        for beam in [r#"{}"#, r#"{"lambda": 1, "momentum": 1}"#] {
            let text = format!(r#"{{"scenario": {{"kind": "laue", "d": 2}}, "beam": {beam}}}"#);
            let c = parse(&text).unwrap();
            assert!(matches!(
                Settings::resolve(&c, &Overrides::default()),
                Err(CliError::Config(_))
            ));
        }
    }

    #[test]
    fn flags_override_file() {
        let c = parse(
            r#"{"scenario": {"kind": "double_slit", "a": 2, "c": 10}, "beam": {"momentum": 0.5},
                "oracle": {"grid": 5001},
                "simulation": {"n_particles": 10, "seed": 1, "shards": 2, "weight_mode": "oracle"}}"#,
        )
        .unwrap();
        let flags = Overrides {
            grid: Some(3001),
            seed: Some(9),
            shards: Some(4),
            weight_mode: Some(WeightModeName::Uniform),
            ..Overrides::default()
        };
        let s = Settings::resolve(&c, &flags).unwrap();
        assert_eq!(s.grid, 3001);
        assert_eq!(s.lambda, 2.0);
        let sim = s.sim_config().unwrap();
        assert_eq!((sim.seed, sim.shards), (9, 4));
        assert_eq!(sim.weight_mode, WeightMode::Uniform);
    }

    #[test]
    fn simulation_requires_seed_and_count() {
        let c =
            parse(r#"{"scenario": {"kind": "aperture", "a": 5}, "beam": {"lambda": 1}}"#).unwrap();
        let s = Settings::resolve(&c, &Overrides::default()).unwrap();
        assert!(s.sim_config().is_err());
    }

    #[test]
    fn invalid_geometry_is_a_config_error() {
        let c = parse(
            r#"{"scenario": {"kind": "double_slit", "a": 3, "c": 2}, "beam": {"lambda": 1}}"#,
        )
        .unwrap();
        let err = Settings::resolve(&c, &Overrides::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn si_units_change_only_the_action() {
        let c = parse(r#"{"scenario": {"kind": "laue", "d": 4e-10}, "beam": {"lambda": 2e-10}}"#)
            .unwrap();
        let flags = Overrides {
            si: true,
            ..Overrides::default()
        };
        let s = Settings::resolve(&c, &flags).unwrap();
        assert_eq!(s.lambda, 2e-10);
        assert_eq!(s.h, ActionConstant::SI.value());
    }
}
