//! Argument parsing. Flags override the config file; the merged result is
//! what every command echoes.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tsvnet_core::optimizer::{Range, Sampler};

use crate::commands;
use crate::config::{self, EvaluatorConfig, RunConfig, Scenario, SearchMode, SolverChoice};
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "tsvnet", version, about = "Electro-thermal analysis and layout search for TSV arrays")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Broadband S-parameters of one layout: Touchstone file plus metrics JSON.
    Sweep(SweepArgs),
    /// Electrothermal fixed point for a boundary-condition scenario.
    Thermal(ThermalArgs),
    /// Exhaustive layout search or geometry sweep with Pareto extraction.
    Optimize(OptimizeArgs),
    /// JSON-lines S-parameter dataset of random designs.
    Dataset(DatasetArgs),
    /// Print the JSON Schema of the config file.
    Schema,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON config file; flags take precedence over its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "tsvnet-out")]
    pub out: PathBuf,
    /// Worker threads [default: all cores].
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    /// Conductor radius (µm).
    #[arg(long)]
    pub radius_um: Option<f64>,
    /// Grid pitch (µm).
    #[arg(long)]
    pub pitch_um: Option<f64>,
    /// TSV height (µm).
    #[arg(long)]
    pub height_um: Option<f64>,
    /// Oxide liner thickness (µm).
    #[arg(long)]
    pub t_ox_um: Option<f64>,
    /// Inter-metal dielectric height (µm).
    #[arg(long)]
    pub h_imd_um: Option<f64>,
    /// Substrate conductivity (S/m).
    #[arg(long)]
    pub sigma_sub: Option<f64>,
    /// Conductor conductivity (S/m).
    #[arg(long)]
    pub sigma_cu: Option<f64>,
    /// Liner relative permittivity.
    #[arg(long)]
    pub eps_ox: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Layout JSON file: {"rows":M,"cols":N,"roles":[1,0,-1,...]}.
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// First frequency (Hz).
    #[arg(long)]
    pub f_start: Option<f64>,
    /// Last frequency (Hz).
    #[arg(long)]
    pub f_stop: Option<f64>,
    /// Number of linearly spaced points.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverArg>,
    /// Port reference impedance (Ω).
    #[arg(long)]
    pub z_ref: Option<f64>,
    /// Also write the extracted RLCG matrices to rlcg.json.
    #[arg(long)]
    pub dump_rlcg: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SolverArg {
    Auto,
    Modal,
    Chain,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScenarioArg {
    NaturalFull,
    NaturalSparse,
    ForcedTop,
    Custom,
}

#[derive(Debug, Args)]
pub struct ThermalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioArg>,
    /// Layout JSON file [default: the scenario's 5x5 array].
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// Driven signal, counted in ascending cell order.
    #[arg(long)]
    pub excited_signal: Option<usize>,
    /// Input power at the driven port (W).
    #[arg(long)]
    pub p_in: Option<f64>,
    /// Excitation frequency (Hz).
    #[arg(long)]
    pub frequency: Option<f64>,
    /// Ambient temperature (K).
    #[arg(long)]
    pub t_amb: Option<f64>,
    /// Grid nodes as NX,NY,NZ.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<[usize; 3]>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Layouts,
    Geometry,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SamplerArg {
    Lhs,
    Grid,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long)]
    pub min_signals: Option<usize>,
    #[arg(long)]
    pub max_signals: Option<usize>,
    /// Evaluation frequency (Hz).
    #[arg(long)]
    pub frequency: Option<f64>,
    /// Evaluate one representative per symmetry orbit.
    #[arg(long, overrides_with = "no_symmetry")]
    pub symmetry: bool,
    /// Evaluate every placement.
    #[arg(long)]
    pub no_symmetry: bool,
    /// Layout JSON for the geometry mode.
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// Radius range MIN,MAX (µm).
    #[arg(long, value_parser = parse_range)]
    pub r_range: Option<Range>,
    /// Pitch range MIN,MAX (µm).
    #[arg(long, value_parser = parse_range)]
    pub p_range: Option<Range>,
    /// Height range MIN,MAX (µm).
    #[arg(long, value_parser = parse_range)]
    pub h_range: Option<Range>,
    /// Liner thickness range MIN,MAX (µm).
    #[arg(long, value_parser = parse_range)]
    pub t_ox_range: Option<Range>,
    /// Accept ranges beyond the default sweep bounds.
    #[arg(long)]
    pub allow_out_of_range: bool,
    #[arg(long, value_enum)]
    pub sampler: Option<SamplerArg>,
    /// Latin-hypercube sample count.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Points per axis for the grid sampler.
    #[arg(long)]
    pub points_per_axis: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use predictions from this JSON-lines file instead of the solver.
    #[arg(long)]
    pub surrogate: Option<PathBuf>,
    /// Designs between checkpoint writes.
    #[arg(long)]
    pub checkpoint_interval: Option<usize>,
    /// Continue from the checkpoint in the output directory.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Smallest grid side.
    #[arg(long)]
    pub min_size: Option<usize>,
    /// Largest grid side.
    #[arg(long)]
    pub max_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// First frequency (Hz).
    #[arg(long)]
    pub f_start: Option<f64>,
    /// Last frequency (Hz).
    #[arg(long)]
    pub f_stop: Option<f64>,
    /// Frequencies per record.
    #[arg(long)]
    pub points: Option<usize>,
    /// Fraction written to train.jsonl; the rest goes to val.jsonl.
    #[arg(long)]
    pub split: Option<f64>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn parse_list<T: std::str::FromStr, const N: usize>(s: &str) -> Result<[T; N], String> {
    let parts = s
        .split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| format!("invalid number '{p}'")))
        .collect::<Result<Vec<_>, _>>()?;
    let n = parts.len();
    parts.try_into().map_err(|_| format!("expected {N} comma-separated values, got {n}"))
}

fn parse_range(s: &str) -> Result<Range, String> {
    let [min, max] = parse_list::<f64, 2>(s)?;
    Ok(Range::new(min, max))
}

fn parse_grid(s: &str) -> Result<[usize; 3], String> {
    parse_list(s)
}

impl CommonArgs {
    fn load(&self) -> CliResult<RunConfig> {
        let mut c = config::load_config(self.config.as_deref())?;
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        c.workers = Some(c.workers.unwrap_or_else(crate::parallel::default_workers));
        Ok(c)
    }
}

impl GeometryArgs {
    fn apply(&self, c: &mut RunConfig) {
        let g = &mut c.geometry;
        set(&mut g.r_cond_um, self.radius_um);
        set(&mut g.p_int_um, self.pitch_um);
        set(&mut g.h_int_um, self.height_um);
        set(&mut g.t_ins_um, self.t_ox_um);
        set(&mut g.h_imd_um, self.h_imd_um);
        set(&mut g.sigma_s, self.sigma_sub);
        set(&mut g.sigma_cu, self.sigma_cu);
        set(&mut g.eps_ins, self.eps_ox);
    }
}

impl SweepArgs {
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut c = self.common.load()?;
        self.geometry.apply(&mut c);
        let s = &mut c.sweep;
        if self.layout.is_some() {
            s.layout = self.layout.clone();
        }
        set(&mut s.f_start_hz, self.f_start);
        set(&mut s.f_stop_hz, self.f_stop);
        set(&mut s.points, self.points);
        set(
            &mut s.solver,
            self.solver.map(|v| match v {
                SolverArg::Auto => SolverChoice::Auto,
                SolverArg::Modal => SolverChoice::Modal,
                SolverArg::Chain => SolverChoice::Chain,
            }),
        );
        set(&mut s.z_ref_ohm, self.z_ref);
        s.dump_rlcg |= self.dump_rlcg;
        Ok(c)
    }
}

impl ThermalArgs {
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut c = self.common.load()?;
        self.geometry.apply(&mut c);
        let t = &mut c.thermal;
        set(
            &mut t.scenario,
            self.scenario.map(|v| match v {
                ScenarioArg::NaturalFull => Scenario::NaturalFull,
                ScenarioArg::NaturalSparse => Scenario::NaturalSparse,
                ScenarioArg::ForcedTop => Scenario::ForcedTop,
                ScenarioArg::Custom => Scenario::Custom,
            }),
        );
        if self.scenario.is_some() && !matches!(self.scenario, Some(ScenarioArg::Custom)) {
            t.boundaries = None;
        }
        if self.layout.is_some() {
            t.layout = self.layout.clone();
        }
        set(&mut t.excited_signal, self.excited_signal);
        set(&mut t.p_in_w, self.p_in);
        set(&mut t.frequency_hz, self.frequency);
        set(&mut t.t_amb_k, self.t_amb);
        if let Some(g) = self.grid {
            t.grid = g;
        }
        Ok(c)
    }
}

impl OptimizeArgs {
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut c = self.common.load()?;
        self.geometry.apply(&mut c);
        let o = &mut c.optimize;
        set(
            &mut o.mode,
            self.mode.map(|m| match m {
                ModeArg::Layouts => SearchMode::Layouts,
                ModeArg::Geometry => SearchMode::Geometry,
            }),
        );
        set(&mut o.rows, self.rows);
        set(&mut o.cols, self.cols);
        set(&mut o.min_signals, self.min_signals);
        set(&mut o.max_signals, self.max_signals);
        set(&mut o.frequency_hz, self.frequency);
        if self.symmetry {
            o.symmetry = true;
        }
        if self.no_symmetry {
            o.symmetry = false;
        }
        if self.layout.is_some() {
            o.layout = self.layout.clone();
        }
        set(&mut o.ranges.r_cond_um, self.r_range);
        set(&mut o.ranges.p_int_um, self.p_range);
        set(&mut o.ranges.h_int_um, self.h_range);
        set(&mut o.ranges.t_ins_um, self.t_ox_range);
        o.allow_out_of_range |= self.allow_out_of_range;
        let (samples, seed, points) = match o.sampler {
            Sampler::LatinHypercube { samples, seed } => (samples, seed, 5),
            Sampler::Grid { points_per_axis } => (4096, 42, points_per_axis),
        };
        let lhs = match self.sampler {
            Some(SamplerArg::Lhs) => true,
            Some(SamplerArg::Grid) => false,
            None => matches!(o.sampler, Sampler::LatinHypercube { .. }),
        };
        o.sampler = if lhs {
            Sampler::LatinHypercube { samples: self.samples.unwrap_or(samples), seed: self.seed.unwrap_or(seed) }
        } else {
            Sampler::Grid { points_per_axis: self.points_per_axis.unwrap_or(points) }
        };
        if let Some(p) = &self.surrogate {
            o.evaluator = EvaluatorConfig::SurrogateFile { path: p.clone() };
        }
        set(&mut o.checkpoint_interval, self.checkpoint_interval);
        Ok(c)
    }
}

impl DatasetArgs {
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut c = self.common.load()?;
        self.geometry.apply(&mut c);
        let d = &mut c.dataset;
        set(&mut d.samples, self.samples);
        set(&mut d.min_size, self.min_size);
        set(&mut d.max_size, self.max_size);
        set(&mut d.seed, self.seed);
        set(&mut d.f_start_hz, self.f_start);
        set(&mut d.f_stop_hz, self.f_stop);
        set(&mut d.points, self.points);
        if self.split.is_some() {
            d.train_fraction = self.split;
        }
        Ok(c)
    }
}

/// Runs one command and returns a line for standard output.
pub fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Sweep(a) => {
            let cfg = a.resolve()?;
            let o = commands::sweep(&cfg, &a.common.out)?;
            Ok(format!("wrote {} ({} ports)", o.touchstone.display(), o.ports))
        }
        Command::Thermal(a) => {
            let cfg = a.resolve()?;
            let o = commands::thermal(&cfg, &a.common.out)?;
            Ok(format!("T_max {:.3} K after {} iterations", o.t_max_k, o.iterations))
        }
        Command::Optimize(a) => {
            let cfg = a.resolve()?;
            let o = commands::optimize(&cfg, &a.common.out, a.resume)?;
            Ok(format!("{} designs evaluated, {} failed, {} on the Pareto front", o.evaluated, o.failures, o.front))
        }
        Command::Dataset(a) => {
            let cfg = a.resolve()?;
            let files = commands::dataset(&cfg, &a.common.out)?;
            Ok(files.iter().map(|(p, n)| format!("wrote {n} records to {}", p.display())).collect::<Vec<_>>().join("\n"))
        }
        Command::Schema => config::schema_json().map(|s| s.trim_end().to_string()),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit
/// code after printing the outcome.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(msg) => {
            println!("{msg}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
