//! Worker-pool drivers. Work is split by index and results are collected in
//! index order, so outputs do not depend on the number of workers.

use rayon::prelude::*;
use rayon::ThreadPool;
use tsvnet_core::em::{SParameterBlock, SweepSolver};
use tsvnet_core::optimizer::sampling::{assemble_sweep, evaluate_sample};
use tsvnet_core::optimizer::{geometry_samples, Evaluator, GeometricSweep, GeometryRanges, Sampler};
use tsvnet_core::{FrequencyGrid, GeometryMaterials, TsvLayout};

use crate::error::{CliError, CliResult};

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn pool(workers: Option<usize>) -> CliResult<ThreadPool> {
    let n = workers.unwrap_or_else(default_workers);
    if n == 0 {
        return Err(CliError::invalid("workers: need at least one worker"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::failed(format!("cannot start {n} workers: {e}")))
}

/// Frequency points solved concurrently, assembled in grid order.
pub fn solve_grid_parallel(pool: &ThreadPool, solver: &SweepSolver, grid: &FrequencyGrid) -> CliResult<SParameterBlock> {
    let data = pool.install(|| grid.points().par_iter().map(|&f| solver.solve_at(f)).collect::<Result<Vec<_>, _>>())?;
    Ok(solver.assemble(grid, data)?)
}

pub fn geometric_sweep_parallel<E: Evaluator + Sync>(
    pool: &ThreadPool,
    layout: &TsvLayout,
    base: &GeometryMaterials,
    ranges: &GeometryRanges,
    sampler: Sampler,
    evaluator: &E,
) -> CliResult<GeometricSweep> {
    let samples = geometry_samples(ranges, sampler)?;
    let outcomes = pool.install(|| {
        samples.par_iter().enumerate().map(|(i, &s)| evaluate_sample(layout, base, i, s, evaluator)).collect()
    });
    Ok(assemble_sweep(outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tsvnet_core::em::{solve_sweep, SolverPath};
    use tsvnet_core::optimizer::AnalyticalEvaluator;
    use tsvnet_core::rlcg::extract_rlcg;

    #[test]
    fn sweep_matches_sequential_for_any_worker_count() {
        let l = TsvLayout::build(3, 3, &[0, 4, 8], &[1, 2, 3, 5, 6, 7]).unwrap();
        let g = GeometryMaterials::default();
        let grid = FrequencyGrid::linear(1e9, 100e9, 12).unwrap();
        let reference = solve_sweep(&l, &g, &grid).unwrap();
        for w in [1, 3] {
            let model = extract_rlcg(&l, &g, &grid).unwrap();
            let solver = SweepSolver::new(model, SolverPath::Auto).unwrap();
            let s = solve_grid_parallel(&pool(Some(w)).unwrap(), &solver, &grid).unwrap();
            assert_eq!(s, reference);
        }
    }

    #[test]
    fn geometric_sweep_matches_sequential() {
        let l = TsvLayout::build(2, 2, &[0, 3], &[1, 2]).unwrap();
        let g = GeometryMaterials::default();
        let sampler = Sampler::LatinHypercube { samples: 16, seed: 7 };
        let ev = AnalyticalEvaluator::default();
        let seq = tsvnet_core::optimizer::geometric_sweep(&l, &g, &GeometryRanges::default(), sampler, &ev).unwrap();
        let par = geometric_sweep_parallel(&pool(Some(3)).unwrap(), &l, &g, &GeometryRanges::default(), sampler, &ev).unwrap();
        assert_eq!(seq, par);
        assert!(pool(Some(0)).is_err());
    }
}
