//! Rayon-backed versions of the generation and Monte Carlo drivers.
//!
//! Work is split along the same seeds the sequential drivers use (generation
//! blocks, replicate indices, sweep cells) and gathered back in index order,
//! so results are bit-identical to the sequential ones for any thread count.

use collider_core::montecarlo::{sweep_cell, sweep_grid};
use collider_core::{CompiledSem, Dataset, McError, McSummary, Scenario, SemError, SweepRow};
use rayon::prelude::*;

pub fn generate<S: AsRef<str> + Sync>(
    sem: &CompiledSem,
    intervened: &[(S, f64)],
    n: usize,
    seed: u64,
) -> Result<Dataset, SemError> {
    if n < 1 {
        return Err(SemError::InvalidCount {
            what: "n",
            value: n,
            min: 1,
        });
    }
    let overrides = sem.interventions(intervened)?;
    let blocks: Vec<Vec<f64>> = (0..CompiledSem::block_count(n))
        .into_par_iter()
        .map(|b| sem.generate_block(&overrides, seed, n, b))
        .collect();
    Ok(sem.assemble(&blocks, n, seed))
}

pub fn run_mc(sc: &Scenario) -> Result<McSummary, McError> {
    sc.validate()?;
    let sem = sc.sem();
    let outcomes: Vec<_> = (0..sc.replicates)
        .into_par_iter()
        .map(|r| sc.run_replicate(&sem, r))
        .collect();
    // First failure by replicate index, whichever worker hit it first.
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(McSummary::from_replicates(sc, &outcomes))
}

pub fn run_sweep(beta1_values: &[f64], alpha_values: &[f64], n: usize, seed: u64) -> Result<Vec<SweepRow>, McError> {
    if n < 10 {
        return Err(McError::InvalidScenario("n must be at least 10"));
    }
    let cells = sweep_grid(beta1_values, alpha_values)?;
    let rows: Vec<_> = cells
        .into_par_iter()
        .enumerate()
        .map(|(i, (b, a))| sweep_cell(b, a, n, seed, i))
        .collect();
    rows.into_iter().collect()
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}
