//! Parallel layout search with periodic checkpoints, plus the CSV and JSON
//! writers for search and geometry-sweep results.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;
use tsvnet_core::optimizer::search::evaluate_search_design;
use tsvnet_core::optimizer::{
    design_stream, DesignRecord, Evaluator, GeometricSweep, SearchOutcome, SearchState,
};

use crate::checkpoint;
use crate::error::CliResult;
use crate::io::layout_string;

/// Evaluates the rest of the stream in chunks of `interval`, saving the
/// state after every chunk when `checkpoint_path` is set.
pub fn run_search<E: Evaluator + Sync>(
    pool: &ThreadPool,
    mut state: SearchState,
    evaluator: &E,
    interval: usize,
    checkpoint_path: Option<&Path>,
    mut progress: impl FnMut(u64),
) -> CliResult<SearchState> {
    let mut stream = design_stream(&state.config)?.skip(state.next_index as usize);
    loop {
        let chunk: Vec<_> = stream.by_ref().take(interval.max(1)).collect();
        if chunk.is_empty() {
            break;
        }
        let (config, geometry) = (&state.config, &state.geometry);
        let records = pool.install(|| {
            chunk
                .par_iter()
                .map(|&d| evaluate_search_design(config, geometry, d, evaluator))
                .collect::<Result<Vec<_>, _>>()
        })?;
        state.records.extend(records);
        state.next_index = state.records.len() as u64;
        if let Some(p) = checkpoint_path {
            checkpoint::save(p, &state)?;
        }
        progress(state.next_index);
    }
    Ok(state)
}

/// One row per design in stream order; `rank` is 1-based and empty for
/// designs that failed to evaluate.
pub fn search_csv(outcome: &SearchOutcome) -> String {
    let mut rank = vec![None; outcome.records.len()];
    for (r, &i) in outcome.ranking.iter().enumerate() {
        rank[i] = Some(r + 1);
    }
    let mut on_front = vec![false; outcome.records.len()];
    for &i in &outcome.front {
        on_front[i] = true;
    }
    let mut out = String::from(
        "index,rank,layout,signals,multiplicity,max_s11_db,mean_s21_db,worst_xtalk_db,k_z_w_mk,average_xtalk_db,pareto,error\n",
    );
    for (i, r) in outcome.records.iter().enumerate() {
        let _ = write!(
            out,
            "{},{},{},{},{},",
            r.index,
            rank[i].map(|v| v.to_string()).unwrap_or_default(),
            layout_string(&r.layout),
            r.layout.signal_cells().len(),
            r.multiplicity
        );
        match &r.evaluation {
            Some(e) => {
                let o = e.objectives;
                let _ = write!(out, "{},{},{},{}", o.max_reflection_db, o.mean_insertion_db, o.worst_crosstalk_db, o.k_z);
                let avg = e.average_crosstalk_db.map(|v| v.to_string()).unwrap_or_default();
                let _ = write!(out, ",{avg},{},", on_front[i]);
            }
            None => {
                let msg = r.error.as_deref().unwrap_or("").replace(['"', '\n'], " ");
                let _ = write!(out, ",,,,,false,\"{msg}\"");
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
pub struct FrontFile<'a, T: Serialize> {
    pub evaluator: &'a str,
    pub frequency_hz: f64,
    pub objectives: [&'static str; 4],
    pub designs: Vec<&'a T>,
}

pub const OBJECTIVE_CONVENTION: [&str; 4] = [
    "minimize max_reflection_db",
    "minimize |mean_insertion_db|",
    "minimize worst_crosstalk_db",
    "maximize k_z",
];

pub fn search_front<'a>(outcome: &'a SearchOutcome, evaluator: &'a str, frequency_hz: f64) -> FrontFile<'a, DesignRecord> {
    FrontFile {
        evaluator,
        frequency_hz,
        objectives: OBJECTIVE_CONVENTION,
        designs: outcome.front.iter().map(|&i| &outcome.records[i]).collect(),
    }
}

/// Geometry sweep rows in the Pareto-table column order.
pub fn sweep_csv(sweep: &GeometricSweep) -> String {
    let mut on_front = vec![false; sweep.records.len()];
    for &i in &sweep.front {
        on_front[i] = true;
    }
    let mut out = String::from("r_um,p_um,h_um,t_ox_um,mean_s21_db,max_s11_db,worst_xtalk_db,k_z_w_mk,sample_index,pareto\n");
    for (i, r) in sweep.records.iter().enumerate() {
        let g = r.geometry;
        let o = r.evaluation.objectives;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            g.r_cond_um,
            g.p_int_um,
            g.h_int_um,
            g.t_ins_um,
            o.mean_insertion_db,
            o.max_reflection_db,
            o.worst_crosstalk_db,
            o.k_z,
            r.sample_index,
            on_front[i]
        );
    }
    out
}
