//! Run configuration: an optional JSON file, overridden by command-line
//! flags, validated, then echoed back fully resolved next to the outputs.
//!
//! Core types without a schema implementation are described by mirror
//! structs used only for schema generation; tests keep both in step.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use tsvnet_core::em::SolverPath;
use tsvnet_core::optimizer::{GeometryRanges, Sampler, SearchConfig};
use tsvnet_core::thermal::{FaceBoundaries, GridResolution, ThermalEnvironment};
use tsvnet_core::GeometryMaterials;

use crate::error::{CliError, CliResult};
use crate::io;

pub const RESOLVED_CONFIG_FILE: &str = "resolved_config.json";

/// Every command reads its own section; the others keep their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Worker threads; unset means all available cores.
    pub workers: Option<usize>,
    /// Geometry and material constants (lengths in µm, SI otherwise); omitted
    /// fields keep the fixed-geometry benchmark values.
    #[schemars(with = "GeometrySchema")]
    pub geometry: GeometryMaterials,
    pub sweep: SweepConfig,
    pub thermal: ThermalConfig,
    pub optimize: OptimizeConfig,
    pub dataset: DatasetConfig,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    #[default]
    Auto,
    Modal,
    Chain,
}

impl From<SolverChoice> for SolverPath {
    fn from(c: SolverChoice) -> Self {
        match c {
            SolverChoice::Auto => SolverPath::Auto,
            SolverChoice::Modal => SolverPath::Modal,
            SolverChoice::Chain => SolverPath::Chain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Layout JSON file.
    pub layout: Option<PathBuf>,
    pub f_start_hz: f64,
    pub f_stop_hz: f64,
    /// Linearly spaced points, both ends included.
    pub points: usize,
    pub solver: SolverChoice,
    /// Port reference impedance (Ω).
    pub z_ref_ohm: f64,
    /// Also write every extracted matrix to `rlcg.json`.
    pub dump_rlcg: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            layout: None,
            f_start_hz: 1e9,
            f_stop_hz: 100e9,
            points: 100,
            solver: SolverChoice::Auto,
            z_ref_ohm: 50.0,
            dump_rlcg: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.layout.is_none() {
            return Err(CliError::invalid("sweep.layout: a layout file is required (--layout)"));
        }
        if !(self.f_start_hz > 0.0 && self.f_start_hz <= self.f_stop_hz && self.f_stop_hz.is_finite()) {
            return Err(CliError::invalid(format!(
                "f_start_hz/f_stop_hz: need 0 < start <= stop, got {} and {}",
                self.f_start_hz, self.f_stop_hz
            )));
        }
        if self.points == 0 || (self.points > 1 && self.f_start_hz == self.f_stop_hz) {
            return Err(CliError::invalid(format!("points: {} points do not fit the frequency range", self.points)));
        }
        if !(self.z_ref_ohm > 0.0 && self.z_ref_ohm.is_finite()) {
            return Err(CliError::invalid(format!("z_ref_ohm: must be > 0, got {}", self.z_ref_ohm)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Natural convection, full 5×5 array.
    #[default]
    NaturalFull,
    /// Natural convection, 5×5 array with every other ground removed.
    NaturalSparse,
    /// Forced convection on the top face, full 5×5 array.
    ForcedTop,
    /// Face conditions taken from `boundaries`.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalConfig {
    pub scenario: Scenario,
    /// Layout JSON file; defaults to the scenario's 5×5 array.
    pub layout: Option<PathBuf>,
    /// Signal (in ascending cell order) whose top port is driven.
    pub excited_signal: usize,
    pub p_in_w: f64,
    pub frequency_hz: f64,
    pub t_amb_k: f64,
    /// Grid nodes along x, y, z.
    pub grid: [usize; 3],
    /// Face conditions; required for `custom`, otherwise filled from the
    /// scenario preset.
    #[schemars(with = "Option<FacesSchema>")]
    pub boundaries: Option<FaceBoundaries>,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        ThermalConfig {
            scenario: Scenario::NaturalFull,
            layout: None,
            excited_signal: 0,
            p_in_w: 0.1,
            frequency_hz: 15e9,
            t_amb_k: 300.0,
            grid: [41, 41, 21],
            boundaries: None,
        }
    }
}

impl ThermalConfig {
    pub fn grid_resolution(&self) -> GridResolution {
        GridResolution { nx: self.grid[0], ny: self.grid[1], nz: self.grid[2] }
    }

    /// Preset faces for the scenario unless explicit boundaries are given.
    pub fn environment(&self) -> CliResult<ThermalEnvironment> {
        let faces = match (self.boundaries, self.scenario) {
            (Some(f), _) => f,
            (None, Scenario::NaturalFull | Scenario::NaturalSparse) => FaceBoundaries::natural(self.t_amb_k),
            (None, Scenario::ForcedTop) => FaceBoundaries::forced_top(self.t_amb_k),
            (None, Scenario::Custom) => {
                return Err(CliError::invalid("thermal.boundaries: the custom scenario needs explicit face conditions"))
            }
        };
        Ok(ThermalEnvironment { t_amb: self.t_amb_k, faces })
    }

    pub fn validate(&self) -> CliResult<()> {
        if !(self.t_amb_k > 0.0 && self.t_amb_k.is_finite()) {
            return Err(CliError::invalid(format!("t_amb_k: must be > 0 K, got {}", self.t_amb_k)));
        }
        if !(self.frequency_hz > 0.0 && self.frequency_hz.is_finite()) {
            return Err(CliError::invalid(format!("frequency_hz: must be > 0, got {}", self.frequency_hz)));
        }
        if !(self.p_in_w >= 0.0 && self.p_in_w.is_finite()) {
            return Err(CliError::invalid(format!("p_in_w: must be >= 0 W, got {}", self.p_in_w)));
        }
        self.grid_resolution().validate()?;
        self.environment()?.faces.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    /// Signal/ground placements at fixed geometry.
    #[default]
    Layouts,
    /// Geometry samples for one fixed layout.
    Geometry,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EvaluatorConfig {
    /// Solve the RLCG model for every design.
    #[default]
    Analytical,
    /// Look designs up in a JSON-lines prediction file in the dataset schema.
    SurrogateFile { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    pub mode: SearchMode,
    pub rows: usize,
    pub cols: usize,
    pub min_signals: usize,
    pub max_signals: usize,
    /// Frequency at which the electrical objectives are evaluated.
    pub frequency_hz: f64,
    /// Evaluate one design per D4 orbit (square grids).
    pub symmetry: bool,
    /// Layout JSON for the geometry mode; defaults to a 3×3 checkerboard.
    pub layout: Option<PathBuf>,
    #[schemars(with = "RangesSchema")]
    pub ranges: GeometryRanges,
    /// Accept ranges outside the default sweep bounds.
    pub allow_out_of_range: bool,
    #[schemars(with = "SamplerSchema")]
    pub sampler: Sampler,
    pub evaluator: EvaluatorConfig,
    /// Designs between checkpoint writes.
    pub checkpoint_interval: usize,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        let s = SearchConfig::default();
        OptimizeConfig {
            mode: SearchMode::Layouts,
            rows: s.rows,
            cols: s.cols,
            min_signals: s.min_signals,
            max_signals: s.max_signals,
            frequency_hz: s.frequency_hz,
            symmetry: s.symmetry,
            layout: None,
            ranges: GeometryRanges::default(),
            allow_out_of_range: false,
            sampler: Sampler::default(),
            evaluator: EvaluatorConfig::Analytical,
            checkpoint_interval: tsvnet_core::optimizer::search::CHECKPOINT_INTERVAL,
        }
    }
}

impl OptimizeConfig {
    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            rows: self.rows,
            cols: self.cols,
            min_signals: self.min_signals,
            max_signals: self.max_signals,
            frequency_hz: self.frequency_hz,
            symmetry: self.symmetry,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.checkpoint_interval == 0 {
            return Err(CliError::invalid("checkpoint_interval: must be positive"));
        }
        match self.mode {
            SearchMode::Layouts => self.search_config().validate()?,
            SearchMode::Geometry => {
                self.ranges.validate()?;
                if !self.allow_out_of_range && !self.ranges.within_defaults() {
                    return Err(CliError::invalid(
                        "ranges: bounds leave the default sweep ranges (r 2-6, p 20-60, h 60-100, t_ox 0.5-3 µm); pass --allow-out-of-range to override",
                    ));
                }
                if !(self.frequency_hz > 0.0 && self.frequency_hz.is_finite()) {
                    return Err(CliError::invalid(format!("frequency_hz: must be > 0, got {}", self.frequency_hz)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub samples: usize,
    /// Smallest and largest grid side; rows and columns are drawn
    /// independently from this range.
    pub min_size: usize,
    pub max_size: usize,
    pub seed: u64,
    pub f_start_hz: f64,
    pub f_stop_hz: f64,
    pub points: usize,
    /// Fraction of records written to `train.jsonl`, the rest to `val.jsonl`;
    /// unset writes everything to `dataset.jsonl`.
    pub train_fraction: Option<f64>,
    /// Probability that a cell holds a signal TSV.
    pub signal_probability: f64,
    /// Probability that a cell is left empty.
    pub empty_probability: f64,
    /// Geometry is drawn uniformly from these ranges.
    #[schemars(with = "RangesSchema")]
    pub ranges: GeometryRanges,
}

/// Largest grid side accepted by the dataset generator.
pub const MAX_DATASET_SIDE: usize = 20;

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            samples: 1000,
            min_size: 3,
            max_size: 6,
            seed: 42,
            f_start_hz: 1e9,
            f_stop_hz: 100e9,
            points: 10,
            train_fraction: None,
            signal_probability: 0.35,
            empty_probability: 0.1,
            ranges: GeometryRanges::default(),
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.samples == 0 {
            return Err(CliError::invalid("samples: need at least one sample"));
        }
        if !(2 <= self.min_size && self.min_size <= self.max_size && self.max_size <= MAX_DATASET_SIDE) {
            return Err(CliError::invalid(format!(
                "min_size/max_size: need 2 <= min <= max <= {MAX_DATASET_SIDE}, got {} and {}",
                self.min_size, self.max_size
            )));
        }
        if let Some(f) = self.train_fraction {
            if !(0.0..=1.0).contains(&f) {
                return Err(CliError::invalid(format!("train_fraction: must lie in [0, 1], got {f}")));
            }
        }
        let (ps, pe) = (self.signal_probability, self.empty_probability);
        if !(ps > 0.0 && pe >= 0.0 && ps + pe < 1.0) {
            return Err(CliError::invalid(format!(
                "signal_probability/empty_probability: need p_signal > 0, p_empty >= 0, sum < 1, got {ps} and {pe}"
            )));
        }
        self.ranges.validate()?;
        tsvnet_core::FrequencyGrid::linear(self.f_start_hz, self.f_stop_hz, self.points)?;
        Ok(())
    }

    /// Records that go to the training split.
    pub fn train_count(&self) -> usize {
        self.train_fraction.map_or(self.samples, |f| (f * self.samples as f64).round() as usize)
    }
}

/// Reads a config file, rejecting unknown keys everywhere, or returns the
/// defaults.
pub fn load_config(path: Option<&Path>) -> CliResult<RunConfig> {
    let Some(path) = path else { return Ok(RunConfig::default()) };
    let text = io::read_text(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    if let Some(geo) = value.get("geometry").and_then(|g| g.as_object()) {
        let known = geometry_keys();
        if let Some(k) = geo.keys().find(|k| !known.contains(k.as_str())) {
            return Err(CliError::invalid(format!("{}: unknown geometry field `{k}`", path.display())));
        }
    }
    serde_json::from_value(value).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

fn geometry_keys() -> BTreeSet<String> {
    match serde_json::to_value(GeometryMaterials::default()) {
        Ok(serde_json::Value::Object(m)) => m.into_iter().map(|(k, _)| k).collect(),
        _ => BTreeSet::new(),
    }
}

pub fn schema_json() -> CliResult<String> {
    io::to_json(&schemars::schema_for!(RunConfig))
}

/// Writes the resolved config next to the outputs.
pub fn echo(out_dir: &Path, config: &RunConfig) -> CliResult<()> {
    io::write_json(&out_dir.join(RESOLVED_CONFIG_FILE), config)
}

#[allow(dead_code)]
#[derive(Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
struct GeometrySchema {
    /// Conductor radius (µm).
    r_cond_um: f64,
    /// Grid pitch (µm).
    p_int_um: f64,
    /// TSV height (µm).
    h_int_um: f64,
    /// Oxide liner thickness (µm).
    t_ins_um: f64,
    /// Inter-metal dielectric height (µm).
    h_imd_um: f64,
    /// Substrate extent along x (µm).
    l_s_um: f64,
    /// Substrate extent along y (µm).
    w_s_um: f64,
    /// Substrate conductivity (S/m).
    sigma_s: f64,
    /// Conductor conductivity (S/m).
    sigma_cu: f64,
    eps_s: f64,
    eps_ins: f64,
    eps_imd: f64,
    mu_r_cond: f64,
    /// Acceptor doping (cm^-3).
    n_a_cm3: f64,
    /// Intrinsic carrier concentration (cm^-3).
    n_i_cm3: f64,
    /// Depletion-model temperature (K).
    temperature_k: f64,
    boltzmann: f64,
    charge: f64,
    /// Thermal conductivities (W/mK).
    k_via: f64,
    k_liner: f64,
    k_sub: f64,
    /// Densities (kg/m^3).
    rho_via: f64,
    rho_liner: f64,
    rho_sub: f64,
    /// Specific heats (J/kgK).
    cp_via: f64,
    cp_liner: f64,
    cp_sub: f64,
}

#[allow(dead_code)]
#[derive(Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum BoundarySchema {
    Adiabatic,
    /// `h` in W/m²K, `t_inf` in K.
    Convection { h: f64, t_inf: f64 },
    /// `t` in K.
    Fixed { t: f64 },
}

#[allow(dead_code)]
#[derive(Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
struct FacesSchema {
    x_min: BoundarySchema,
    x_max: BoundarySchema,
    y_min: BoundarySchema,
    y_max: BoundarySchema,
    bottom: BoundarySchema,
    top: BoundarySchema,
}

#[allow(dead_code)]
#[derive(Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
struct RangeSchema {
    min: f64,
    max: f64,
}

/// Closed intervals in µm.
#[allow(dead_code)]
#[derive(Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
struct RangesSchema {
    r_cond_um: RangeSchema,
    p_int_um: RangeSchema,
    h_int_um: RangeSchema,
    t_ins_um: RangeSchema,
}

#[allow(dead_code)]
#[derive(Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SamplerSchema {
    Grid { points_per_axis: usize },
    LatinHypercube { samples: usize, seed: u64 },
}
