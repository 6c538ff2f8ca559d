//! Parameter sweeps: every (run, eps, algorithm) cell of a configuration.

use std::time::Instant;

use fairkc::offline::{heuristic_allocation, proportional_allocation, solve_equality, solve_offline, HeuristicMode};
use fairkc::oracle::brute_force_optimal;
use fairkc::streaming::{stream_solve, StreamConfig, StreamPoint};
use fairkc::{
    check_fairness, derive_proportional_bounds, objective, CenterSet, Dataset64, FairnessBounds, ProblemInstance,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Algorithm, DataSource, ExperimentConfig};
use crate::error::Result;
use crate::ingest::ingest_csv;
use crate::report::{aggregate, Report, RunRecord, SCHEMA_VERSION};
use crate::synth::generate_blobs;

/// Result of one solver call.
#[derive(Debug, Clone)]
pub struct Solved {
    pub centers: CenterSet,
    pub objective: f64,
    pub runtime_ms: f64,
    pub stored_points: Option<usize>,
}

/// Per-run randomness: the first traversal center and the stream order.
#[derive(Debug, Clone, Copy)]
pub struct RunSeed {
    pub start: usize,
    pub order_seed: u64,
}

impl RunSeed {
    pub fn derive(seed: u64, run: usize, n: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(run as u64);
        Self {
            start: rng.random_range(0..n),
            order_seed: rng.random(),
        }
    }
}

/// `max(1, floor(fraction * n))`, capped at `n`.
pub fn k_from_fraction(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).floor() as usize).clamp(1, n.max(1))
}

/// Exact quotas the equality-style baselines use for `bounds`.
pub fn exact_counts(dataset: &Dataset64, bounds: &FairnessBounds, algorithm: Algorithm) -> Option<Vec<usize>> {
    match algorithm {
        Algorithm::Minor => Some(heuristic_allocation(dataset.group_sizes(), bounds, HeuristicMode::Minor).counts),
        Algorithm::Major => Some(heuristic_allocation(dataset.group_sizes(), bounds, HeuristicMode::Major).counts),
        Algorithm::Equality => Some(proportional_allocation(dataset.group_sizes(), bounds.k)),
        _ => None,
    }
}

/// Runs one algorithm; the timer covers the solver call only.
pub fn run_algorithm(
    dataset: &Dataset64,
    bounds: &FairnessBounds,
    algorithm: Algorithm,
    seed: RunSeed,
    stream_eps: f64,
) -> Result<Solved> {
    let instance = ProblemInstance::new(dataset, bounds)?;
    let mut stored_points = None;
    let (centers, runtime_ms) = match algorithm {
        Algorithm::Ours => timed(|| solve_offline(instance, seed.start))?,
        Algorithm::Minor | Algorithm::Major | Algorithm::Equality => {
            let counts = exact_counts(dataset, bounds, algorithm).expect("exact-quota algorithm");
            timed(|| solve_equality(dataset, &counts, seed.start))?
        }
        Algorithm::Oracle => timed(|| brute_force_optimal(instance).map(|s| s.best_set))?,
        Algorithm::Stream => {
            let mut order: Vec<usize> = (0..dataset.n()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed.order_seed));
            let points = order
                .iter()
                .map(|&i| StreamPoint::new(dataset.coords(i).to_vec(), dataset.group(i)));
            let (out, ms) = timed(|| stream_solve(points, bounds, StreamConfig::with_eps(stream_eps)))?;
            stored_points = Some(out.stats.peak_stored);
            // Stream ids are positions in `order`.
            let ids = out.centers.ids().iter().map(|&j| order[j]);
            (CenterSet::from_ids(dataset, ids)?, ms)
        }
    };
    Ok(Solved {
        objective: objective(dataset, &centers)?,
        centers,
        runtime_ms,
        stored_points,
    })
}

fn timed<R, E>(f: impl FnOnce() -> std::result::Result<R, E>) -> std::result::Result<(R, f64), E> {
    let t = Instant::now();
    let r = f()?;
    Ok((r, t.elapsed().as_secs_f64() * 1e3))
}

/// A loaded source: one dataset per run (synthetic) or a shared one (CSV).
enum Loaded {
    Shared(Dataset64, String, Vec<String>),
    PerRun(Vec<Dataset64>),
}

impl Loaded {
    fn get(&self, run: usize) -> &Dataset64 {
        match self {
            Loaded::Shared(ds, ..) => ds,
            Loaded::PerRun(v) => &v[run],
        }
    }
}

fn load(config: &ExperimentConfig) -> Result<Loaded> {
    match &config.source {
        DataSource::Csv {
            path,
            group_col,
            normalize,
        } => {
            let ing = ingest_csv(path, group_col, *normalize)?;
            Ok(Loaded::Shared(
                ing.dataset,
                path.display().to_string(),
                ing.group_labels,
            ))
        }
        DataSource::Synthetic(spec) => {
            let sets = (0..config.runs)
                .into_par_iter()
                .map(|run| {
                    let mut s = spec.clone();
                    s.seed = spec.seed.wrapping_add(run as u64);
                    generate_blobs(&s)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Loaded::PerRun(sets))
        }
    }
}

/// Runs every cell of `config` in parallel. Solver failures are recorded in
/// their cell and never abort the sweep.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let loaded = load(config)?;
    let first = loaded.get(0);
    let (n, m) = (first.n(), first.m());
    let k = k_from_fraction(n, config.k_fraction);

    let cells: Vec<(usize, f64, Algorithm)> = (0..config.runs)
        .flat_map(|run| {
            config
                .eps_list
                .iter()
                .flat_map(move |&eps| config.algorithms.iter().map(move |&a| (run, eps, a)))
        })
        .collect();

    let rows: Vec<RunRecord> = cells
        .par_iter()
        .map(|&(run, eps, algorithm)| {
            let ds = loaded.get(run);
            let seed = RunSeed::derive(config.seed, run, ds.n());
            let k = k_from_fraction(ds.n(), config.k_fraction);
            let attempt = derive_proportional_bounds(ds, k, eps)
                .map_err(Into::into)
                .and_then(|b| run_algorithm(ds, &b, algorithm, seed, config.stream_eps).map(|s| (b, s)));
            match attempt {
                Ok((bounds, s)) => {
                    let inst = ProblemInstance::new_unchecked(ds, &bounds);
                    RunRecord {
                        algorithm,
                        eps,
                        run,
                        objective: Some(s.objective),
                        runtime_ms: s.runtime_ms,
                        stored_points: s.stored_points,
                        fair: check_fairness(&inst, &s.centers),
                        error: None,
                    }
                }
                Err(e) => RunRecord {
                    algorithm,
                    eps,
                    run,
                    objective: None,
                    runtime_ms: 0.0,
                    stored_points: None,
                    fair: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let group_labels = match &loaded {
        Loaded::Shared(_, _, labels) => labels.clone(),
        Loaded::PerRun(_) => (0..m).map(|g| format!("g{g}")).collect(),
    };
    let dataset = match (&loaded, &config.source) {
        (Loaded::Shared(_, name, _), _) => name.clone(),
        (_, DataSource::Synthetic(spec)) => format!(
            "synthetic(blobs={}, per_blob={}, dim={}, m={})",
            spec.blobs, spec.points_per_blob, spec.dim, spec.m
        ),
        _ => unreachable!("per-run datasets come from a synthetic source"),
    };
    Ok(Report {
        schema: SCHEMA_VERSION,
        dataset,
        n,
        m,
        group_labels,
        k,
        k_fraction: config.k_fraction,
        seed: config.seed,
        runs: config.runs,
        aggregates: aggregate(&rows),
        rows,
    })
}
