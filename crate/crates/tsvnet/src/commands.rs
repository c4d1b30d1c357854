//! Command bodies. Each takes a resolved [`RunConfig`] and an output
//! directory, echoes the config there and writes its results.

use std::path::{Path, PathBuf};

use serde::Serialize;
use tsvnet_core::em::metrics::crosstalk_report_from_matrix;
use tsvnet_core::em::sweep::{PASSIVITY_TOL, RECIPROCITY_TOL};
use tsvnet_core::em::{max_reflection_db, mean_insertion_db, to_db, PortLabel, SweepSolver};
use tsvnet_core::optimizer::{
    finish_search, AnalyticalEvaluator, Evaluation, Evaluator, GeometryRecord, SearchState,
};
use tsvnet_core::rlcg::extract_rlcg;
use tsvnet_core::thermal::{electrothermal_fixed_point, Excitation, FaceBoundaries, HeatSource};
use tsvnet_core::{FrequencyGrid, GeometryMaterials, Role, TsvLayout};

use crate::checkpoint::{self, CHECKPOINT_FILE};
use crate::config::{self, EvaluatorConfig, RunConfig, Scenario, SearchMode};
use crate::dataset;
use crate::error::{CliError, CliResult};
use crate::io;
use crate::parallel::{self, geometric_sweep_parallel, solve_grid_parallel};
use crate::rlcg_dump::RlcgDump;
use crate::search::{run_search, search_csv, search_front, sweep_csv, FrontFile, OBJECTIVE_CONVENTION};
use crate::surrogate::SurrogateFileEvaluator;
use crate::touchstone;

fn prepare(out: &Path, cfg: &RunConfig) -> CliResult<()> {
    cfg.geometry.validate()?;
    std::fs::create_dir_all(out).map_err(|e| CliError::write(out, e))?;
    config::echo(out, cfg)
}

#[derive(Serialize)]
struct InvariantChecks {
    max_reciprocity_error: f64,
    reciprocity_tolerance: f64,
    max_passivity_margin: f64,
    passivity_tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
struct FrequencyMetrics {
    frequency_hz: f64,
    max_reflection_db: f64,
    mean_insertion_db: f64,
    worst_victim: Option<usize>,
    worst_victim_db: f64,
    average_crosstalk_db: Option<f64>,
    victim_totals_db: Vec<f64>,
    worst_next: Option<tsvnet_core::em::metrics::PairCoupling>,
    worst_fext: Option<tsvnet_core::em::metrics::PairCoupling>,
}

#[derive(Serialize)]
struct SweepMetrics<'a> {
    layout: &'a TsvLayout,
    touchstone: String,
    solver: &'static str,
    z_ref_ohm: f64,
    /// Port order of the Touchstone file.
    ports: &'a [PortLabel],
    checks: InvariantChecks,
    frequencies: Vec<FrequencyMetrics>,
}

pub struct SweepOutput {
    pub touchstone: PathBuf,
    pub ports: usize,
}

pub fn sweep(cfg: &RunConfig, out: &Path) -> CliResult<SweepOutput> {
    let sc = &cfg.sweep;
    sc.validate()?;
    let layout_path = sc.layout.as_deref().unwrap_or(Path::new(""));
    let layout = io::read_layout(layout_path)?;
    layout.ensure_solvable()?;
    let grid = FrequencyGrid::linear(sc.f_start_hz, sc.f_stop_hz, sc.points)?;
    prepare(out, cfg)?;
    let pool = parallel::pool(cfg.workers)?;
    let model = extract_rlcg(&layout, &cfg.geometry, &grid)?;
    if sc.dump_rlcg {
        io::write_json(&out.join("rlcg.json"), &RlcgDump::new(&model))?;
    }
    let solver = SweepSolver::with_reference_impedance(model, sc.solver.into(), sc.z_ref_ohm)?;
    let s = solve_grid_parallel(&pool, &solver, &grid)?;

    let stem = layout_path.file_stem().and_then(|s| s.to_str()).unwrap_or("layout");
    let ts_name = touchstone::file_name(stem, s.port_count());
    let ts_path = out.join(&ts_name);
    io::write_atomic(&ts_path, touchstone::write_touchstone(&s, Some(&layout)).as_bytes())?;

    let frequencies = s
        .frequencies
        .points()
        .iter()
        .zip(&s.data)
        .map(|(&f, m)| {
            let report = crosstalk_report_from_matrix(m, f)?;
            Ok(FrequencyMetrics {
                frequency_hz: f,
                max_reflection_db: max_reflection_db(m)?,
                mean_insertion_db: mean_insertion_db(m)?,
                worst_victim: report.worst_victim,
                worst_victim_db: report.worst_victim_db,
                average_crosstalk_db: report.average_db,
                victim_totals_db: report.victim_totals.iter().map(|&x| to_db(x)).collect(),
                worst_next: report.worst_next,
                worst_fext: report.worst_fext,
            })
        })
        .collect::<tsvnet_core::Result<Vec<_>>>()?;
    let (recip, margin) = (s.max_reciprocity_error(), s.max_passivity_margin());
    let metrics = SweepMetrics {
        layout: &layout,
        touchstone: ts_name,
        solver: if solver.is_modal() { "modal" } else { "chain" },
        z_ref_ohm: s.z_ref,
        ports: &s.ports,
        checks: InvariantChecks {
            max_reciprocity_error: recip,
            reciprocity_tolerance: RECIPROCITY_TOL,
            max_passivity_margin: margin,
            passivity_tolerance: PASSIVITY_TOL,
            passed: recip < RECIPROCITY_TOL && margin <= PASSIVITY_TOL,
        },
        frequencies,
    };
    io::write_json(&out.join("metrics.json"), &metrics)?;
    Ok(SweepOutput { touchstone: ts_path, ports: s.port_count() })
}

/// Centre signal with every other cell ground; the sparse variant leaves
/// the cells with odd `row + col` empty.
pub fn scenario_layout(rows: usize, cols: usize, sparse: bool) -> CliResult<TsvLayout> {
    let centre = (rows / 2) * cols + cols / 2;
    let roles = (0..rows * cols)
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            if i == centre {
                Role::Signal
            } else if sparse && (r + c) % 2 == 1 {
                Role::Empty
            } else {
                Role::Ground
            }
        })
        .collect();
    Ok(TsvLayout::new(rows, cols, roles)?)
}

pub const SCENARIO_SIDE: usize = 5;

#[derive(Serialize)]
struct ThermalSummary<'a> {
    scenario: Scenario,
    layout: &'a TsvLayout,
    converged: bool,
    iterations: usize,
    t_amb_k: f64,
    t_max_k: f64,
    t_min_k: f64,
    hottest_node_um: [f64; 3],
    t_max_history_k: &'a [f64],
    delta_t_max_history_k: Vec<f64>,
    /// Homogenized conductivity along x, y, z (W/mK).
    k_eq_w_mk: [f64; 3],
    rho_cp_j_m3k: f64,
    occupancy: f64,
    n_tsv: usize,
    sigma_cu_final_s_per_m: f64,
    heat_generated_w: f64,
    heat_removed_w: f64,
    energy_balance_error: f64,
    sources: &'a [HeatSource],
    boundaries: FaceBoundaries,
    grid: [usize; 3],
}

pub struct ThermalOutput {
    pub t_max_k: f64,
    pub iterations: usize,
}

pub fn thermal(cfg: &RunConfig, out: &Path) -> CliResult<ThermalOutput> {
    let tc = &cfg.thermal;
    tc.validate()?;
    let env = tc.environment()?;
    let layout = match &tc.layout {
        Some(p) => io::read_layout(p)?,
        None => scenario_layout(SCENARIO_SIDE, SCENARIO_SIDE, tc.scenario == Scenario::NaturalSparse)?,
    };
    layout.ensure_solvable()?;
    let signals = layout.count(Role::Signal);
    if tc.excited_signal >= signals {
        return Err(CliError::invalid(format!(
            "excited_signal: {} is out of range for {signals} signal TSVs",
            tc.excited_signal
        )));
    }
    let mut resolved = cfg.clone();
    resolved.thermal.boundaries = Some(env.faces);
    prepare(out, &resolved)?;

    let excitation = Excitation { frequency_hz: tc.frequency_hz, p_in_w: tc.p_in_w, ports: vec![tc.excited_signal] };
    let sol = electrothermal_fixed_point(&layout, &cfg.geometry, &excitation, env, tc.grid_resolution())?;
    let f = &sol.field;
    let (i, j, k) = f.hottest_node();
    let (x, y, z) = f.position_um(i, j, k);
    let summary = ThermalSummary {
        scenario: tc.scenario,
        layout: &layout,
        converged: sol.converged,
        iterations: sol.iterations,
        t_amb_k: env.t_amb,
        t_max_k: f.t_max,
        t_min_k: f.t_min,
        hottest_node_um: [x, y, z],
        t_max_history_k: &sol.t_max_history,
        delta_t_max_history_k: sol.delta_history(env.t_amb),
        k_eq_w_mk: [sol.block.k_x, sol.block.k_y, sol.block.k_z],
        rho_cp_j_m3k: sol.block.rho_cp,
        occupancy: sol.block.f_occ,
        n_tsv: sol.block.n_tsv,
        sigma_cu_final_s_per_m: sol.sigma_cu,
        heat_generated_w: f.heat_generated_w,
        heat_removed_w: f.heat_removed_w,
        energy_balance_error: f.energy_balance_error(),
        sources: &sol.sources.sources,
        boundaries: env.faces,
        grid: tc.grid,
    };
    io::write_json(&out.join("summary.json"), &summary)?;
    io::write_atomic(&out.join("temperature.csv"), io::temperature_csv(f).as_bytes())?;
    if !sol.converged {
        return Err(CliError::failed(format!(
            "electrothermal iteration did not converge in {} iterations (T_max trace {:?} K)",
            sol.iterations, sol.t_max_history
        )));
    }
    Ok(ThermalOutput { t_max_k: f.t_max, iterations: sol.iterations })
}

/// Either evaluator behind one type so the parallel drivers stay generic.
pub enum AnyEvaluator {
    Analytical(AnalyticalEvaluator),
    SurrogateFile(SurrogateFileEvaluator),
}

impl AnyEvaluator {
    pub fn from_config(c: &EvaluatorConfig, frequency_hz: f64) -> CliResult<Self> {
        Ok(match c {
            EvaluatorConfig::Analytical => AnyEvaluator::Analytical(AnalyticalEvaluator { frequency_hz }),
            EvaluatorConfig::SurrogateFile { path } => {
                AnyEvaluator::SurrogateFile(SurrogateFileEvaluator::load(path, frequency_hz)?)
            }
        })
    }
}

impl Evaluator for AnyEvaluator {
    fn evaluate(&self, layout: &TsvLayout, g: &GeometryMaterials) -> tsvnet_core::Result<Evaluation> {
        match self {
            AnyEvaluator::Analytical(e) => e.evaluate(layout, g),
            AnyEvaluator::SurrogateFile(e) => e.evaluate(layout, g),
        }
    }

    fn name(&self) -> String {
        match self {
            AnyEvaluator::Analytical(e) => e.name(),
            AnyEvaluator::SurrogateFile(e) => e.name(),
        }
    }
}

pub fn default_geometry_layout() -> CliResult<TsvLayout> {
    Ok(TsvLayout::build(3, 3, &[1, 3, 5, 7], &[0, 2, 4, 6, 8])?)
}

pub struct OptimizeOutput {
    pub evaluated: usize,
    pub failures: usize,
    pub front: usize,
}

pub fn optimize(cfg: &RunConfig, out: &Path, resume: bool) -> CliResult<OptimizeOutput> {
    let oc = &cfg.optimize;
    oc.validate()?;
    let evaluator = AnyEvaluator::from_config(&oc.evaluator, oc.frequency_hz)?;
    match oc.mode {
        SearchMode::Layouts => optimize_layouts(cfg, out, resume, &evaluator),
        SearchMode::Geometry => {
            if resume {
                return Err(CliError::invalid("resume: only the layout search writes checkpoints"));
            }
            optimize_geometry(cfg, out, &evaluator)
        }
    }
}

fn optimize_layouts(cfg: &RunConfig, out: &Path, resume: bool, evaluator: &AnyEvaluator) -> CliResult<OptimizeOutput> {
    let oc = &cfg.optimize;
    let sc = oc.search_config();
    let ckpt = out.join(CHECKPOINT_FILE);
    let name = evaluator.name();
    let state = if resume {
        if !ckpt.exists() {
            return Err(CliError::invalid(format!("resume: no checkpoint at {}", ckpt.display())));
        }
        let s = checkpoint::load(&ckpt)?;
        s.check_compatible(&sc, &cfg.geometry, &name).map_err(|e| CliError::invalid(format!("resume: {e}")))?;
        s
    } else {
        SearchState::new(sc.clone(), cfg.geometry.clone(), name.clone())
    };
    prepare(out, cfg)?;
    let pool = parallel::pool(cfg.workers)?;
    let total = tsvnet_core::optimizer::design_stream(&sc)?.count() as u64;
    eprintln!("optimize: {total} designs, starting at {}", state.next_index);
    let state = run_search(&pool, state, evaluator, oc.checkpoint_interval, Some(&ckpt), |n| {
        eprintln!("optimize: {n}/{total} designs evaluated");
    })?;
    checkpoint::save(&ckpt, &state)?;
    let outcome = finish_search(state.records)?;
    for r in outcome.records.iter().filter_map(|r| r.error.as_deref()) {
        eprintln!("optimize: {r}");
    }
    io::write_atomic(&out.join("results.csv"), search_csv(&outcome).as_bytes())?;
    io::write_json(&out.join("front.json"), &search_front(&outcome, &name, oc.frequency_hz))?;
    Ok(OptimizeOutput {
        evaluated: outcome.records.len() - outcome.failures,
        failures: outcome.failures,
        front: outcome.front.len(),
    })
}

fn optimize_geometry(cfg: &RunConfig, out: &Path, evaluator: &AnyEvaluator) -> CliResult<OptimizeOutput> {
    let oc = &cfg.optimize;
    let layout = match &oc.layout {
        Some(p) => io::read_layout(p)?,
        None => default_geometry_layout()?,
    };
    layout.ensure_solvable()?;
    prepare(out, cfg)?;
    let pool = parallel::pool(cfg.workers)?;
    let sweep = geometric_sweep_parallel(&pool, &layout, &cfg.geometry, &oc.ranges, oc.sampler, evaluator)?;
    for s in &sweep.skipped {
        eprintln!("optimize: skipped sample {}: {}", s.sample_index, s.reason);
    }
    if sweep.records.is_empty() {
        return Err(CliError::invalid("ranges: every geometry sample was infeasible"));
    }
    let name = evaluator.name();
    let front: FrontFile<GeometryRecord> = FrontFile {
        evaluator: &name,
        frequency_hz: oc.frequency_hz,
        objectives: OBJECTIVE_CONVENTION,
        designs: sweep.front.iter().map(|&i| &sweep.records[i]).collect(),
    };
    io::write_atomic(&out.join("sweep.csv"), sweep_csv(&sweep).as_bytes())?;
    io::write_json(&out.join("front.json"), &front)?;
    io::write_json(&out.join("skipped.json"), &sweep.skipped)?;
    Ok(OptimizeOutput { evaluated: sweep.records.len(), failures: sweep.skipped.len(), front: sweep.front.len() })
}

pub fn dataset(cfg: &RunConfig, out: &Path) -> CliResult<Vec<(PathBuf, usize)>> {
    cfg.dataset.validate()?;
    prepare(out, cfg)?;
    let pool = parallel::pool(cfg.workers)?;
    let total = cfg.dataset.samples;
    dataset::write_dataset(&pool, &cfg.dataset, &cfg.geometry, out, |n| eprintln!("dataset: {n}/{total} records"))
}
