//! JSON-lines training data for the graph surrogate.
//!
//! One record per line. Complex values are `[re, im]`. For signals `v`, `a`
//! (indices into `signal_cells`) and `n` signals, with the solver's port
//! order (tops, then bottoms):
//!
//! * `s11[v]` is `S(top_v, top_v)`, `s21[v]` is `S(bottom_v, top_v)`;
//! * `next` is `S(top_v, top_a)`, `fext` is `S(top_v, bottom_a)`.
//!
//! Each series has one entry per frequency in `frequencies_hz`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};
use tsvnet_core::em::{SParameterBlock, SolverPath, SweepSolver};
use tsvnet_core::optimizer::sampling::GeometrySample;
use tsvnet_core::optimizer::{GeometryRanges, Range};
use tsvnet_core::rlcg::extract_rlcg;
use tsvnet_core::{FrequencyGrid, GeometryMaterials, Role, TsvLayout, C64};

use crate::config::DatasetConfig;
use crate::error::{CliError, CliResult};

/// Redraws allowed per record before giving up.
const MAX_ATTEMPTS: usize = 100;
/// Records generated between writes.
const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    All,
    Train,
    Val,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairLabel {
    pub victim: usize,
    pub aggressor: usize,
    pub next: Vec<[f64; 2]>,
    pub fext: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelBlock {
    pub z_ref_ohm: f64,
    /// Layout cells of the signal TSVs, ascending.
    pub signal_cells: Vec<usize>,
    pub s11: Vec<Vec<[f64; 2]>>,
    pub s21: Vec<Vec<[f64; 2]>>,
    /// Every ordered pair of distinct signals, victim-major.
    pub pairs: Vec<PairLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: u64,
    pub split: Split,
    pub layout: TsvLayout,
    pub geometry: GeometryMaterials,
    pub frequencies_hz: Vec<f64>,
    pub labels: LabelBlock,
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

impl LabelBlock {
    pub fn from_s(s: &SParameterBlock) -> Self {
        let n = s.signal_count();
        let series = |row: usize, col: usize| s.data.iter().map(|m| pair(m[(row, col)])).collect::<Vec<_>>();
        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1));
        for v in 0..n {
            for a in (0..n).filter(|&a| a != v) {
                pairs.push(PairLabel { victim: v, aggressor: a, next: series(v, a), fext: series(v, n + a) });
            }
        }
        LabelBlock {
            z_ref_ohm: s.z_ref,
            signal_cells: s.signal_cells(),
            s11: (0..n).map(|i| series(i, i)).collect(),
            s21: (0..n).map(|i| series(n + i, i)).collect(),
            pairs,
        }
    }

    /// Checks shapes against the signal count and frequency count.
    pub fn validate(&self, frequencies: usize) -> CliResult<()> {
        let n = self.signal_cells.len();
        let bad = |what: &str| Err(CliError::invalid(format!("label block: {what}")));
        if self.s11.len() != n || self.s21.len() != n {
            return bad("s11/s21 need one series per signal");
        }
        if self.pairs.len() != n * n.saturating_sub(1) {
            return bad("pairs must cover every ordered signal pair");
        }
        let series = self.s11.iter().chain(&self.s21).chain(self.pairs.iter().flat_map(|p| [&p.next, &p.fext]));
        for s in series {
            if s.len() != frequencies {
                return bad("every series needs one value per frequency");
            }
            if s.iter().flatten().any(|v| !v.is_finite()) {
                return bad("non-finite value");
            }
        }
        if self.pairs.iter().any(|p| p.victim >= n || p.aggressor >= n || p.victim == p.aggressor) {
            return bad("pair index out of range");
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, r: Range) -> f64 {
    if r.max == r.min {
        r.min
    } else {
        rng.gen_range(r.min..=r.max)
    }
}

fn draw_layout(rng: &mut ChaCha8Rng, c: &DatasetConfig) -> CliResult<TsvLayout> {
    let rows = rng.gen_range(c.min_size..=c.max_size);
    let cols = rng.gen_range(c.min_size..=c.max_size);
    let mut roles: Vec<Role> = (0..rows * cols)
        .map(|_| {
            let u: f64 = rng.gen();
            if u < c.signal_probability {
                Role::Signal
            } else if u < c.signal_probability + c.empty_probability {
                Role::Empty
            } else {
                Role::Ground
            }
        })
        .collect();
    let cells = roles.len();
    if !roles.contains(&Role::Signal) {
        let i = rng.gen_range(0..cells);
        roles[i] = Role::Signal;
    }
    if !roles.contains(&Role::Ground) {
        let signals: Vec<usize> = (0..cells).filter(|&i| roles[i] == Role::Signal).collect();
        if signals.len() > 1 {
            roles[signals[rng.gen_range(0..signals.len())]] = Role::Ground;
        } else {
            let others: Vec<usize> = (0..cells).filter(|&i| roles[i] != Role::Signal).collect();
            roles[others[rng.gen_range(0..others.len())]] = Role::Ground;
        }
    }
    Ok(TsvLayout::new(rows, cols, roles)?)
}

fn draw_geometry(rng: &mut ChaCha8Rng, ranges: &GeometryRanges) -> GeometrySample {
    GeometrySample {
        r_cond_um: uniform(rng, ranges.r_cond_um),
        p_int_um: uniform(rng, ranges.p_int_um),
        h_int_um: uniform(rng, ranges.h_int_um),
        t_ins_um: uniform(rng, ranges.t_ins_um),
    }
}

/// Record `id`, drawn from its own random stream so that any subset can be
/// regenerated independently of the others.
pub fn generate_record(c: &DatasetConfig, base: &GeometryMaterials, grid: &FrequencyGrid, id: u64) -> CliResult<DatasetRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    rng.set_stream(id);
    let mut last_error = String::new();
    for _ in 0..MAX_ATTEMPTS {
        let layout = draw_layout(&mut rng, c)?;
        let geometry = draw_geometry(&mut rng, &c.ranges).apply(base);
        let solved = geometry
            .validate()
            .and_then(|_| extract_rlcg(&layout, &geometry, grid))
            .and_then(|m| SweepSolver::new(m, SolverPath::Auto))
            .and_then(|s| s.solve_grid(grid));
        match solved {
            Ok(s) => {
                let split = match c.train_fraction {
                    None => Split::All,
                    Some(_) if (id as usize) < c.train_count() => Split::Train,
                    Some(_) => Split::Val,
                };
                return Ok(DatasetRecord {
                    id,
                    split,
                    layout,
                    geometry,
                    frequencies_hz: grid.points().to_vec(),
                    labels: LabelBlock::from_s(&s),
                });
            }
            Err(e) => last_error = e.to_string(),
        }
    }
    Err(CliError::failed(format!("record {id}: no valid design after {MAX_ATTEMPTS} draws (last: {last_error})")))
}

/// Output files for the configured split.
pub fn output_files(c: &DatasetConfig, out_dir: &Path) -> Vec<PathBuf> {
    match c.train_fraction {
        None => vec![out_dir.join("dataset.jsonl")],
        Some(_) => vec![out_dir.join("train.jsonl"), out_dir.join("val.jsonl")],
    }
}

/// Generates every record and writes the JSON-lines files; returns the line
/// count per file.
pub fn write_dataset(
    pool: &ThreadPool,
    c: &DatasetConfig,
    base: &GeometryMaterials,
    out_dir: &Path,
    mut progress: impl FnMut(usize),
) -> CliResult<Vec<(PathBuf, usize)>> {
    c.validate()?;
    let grid = FrequencyGrid::linear(c.f_start_hz, c.f_stop_hz, c.points)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::write(out_dir, e))?;
    let paths = output_files(c, out_dir);
    let mut writers = paths
        .iter()
        .map(|p| File::create(p).map(BufWriter::new).map_err(|e| CliError::write(p, e)))
        .collect::<CliResult<Vec<_>>>()?;
    let mut counts = vec![0; paths.len()];
    let mut done = 0;
    while done < c.samples {
        let ids: Vec<u64> = (done..(done + CHUNK).min(c.samples)).map(|i| i as u64).collect();
        let records = pool.install(|| {
            ids.par_iter().map(|&id| generate_record(c, base, &grid, id)).collect::<CliResult<Vec<_>>>()
        })?;
        for r in records {
            let k = usize::from(r.split == Split::Val);
            let mut line = serde_json::to_string(&r).map_err(|e| CliError::failed(format!("record {}: {e}", r.id)))?;
            line.push('\n');
            writers[k].write_all(line.as_bytes()).map_err(|e| CliError::write(&paths[k], e))?;
            counts[k] += 1;
        }
        done += ids.len();
        progress(done);
    }
    for (w, p) in writers.iter_mut().zip(&paths) {
        w.flush().map_err(|e| CliError::write(p, e))?;
    }
    Ok(paths.into_iter().zip(counts).collect())
}
