//! Multi-trial experiment runs.

use std::path::{Path, PathBuf};

use iadmmn_core::diagnostics::CheckReport;
use iadmmn_core::formats::{write_atomic, SparseBinary};
use iadmmn_core::logmf::{generate_instance, init_factors, run_gd, LogMfInstance, LogMfProblem};
use iadmmn_core::rng::derive_seed;
use iadmmn_core::solver::{format_trace_csv, validate_config, Budget, CheckLevel, TraceRecord};
use iadmmn_core::{BlockVector, InitialPoint, Mat};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, VariantConfig};
use crate::error::{io_err, HarnessError, Result};
use crate::summarize::mean_std;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Maximum number of runs executing at once.
    pub jobs: usize,
    pub check_level: CheckLevel,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            jobs: 1,
            check_level: CheckLevel::Off,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Admm(VariantConfig),
    Gd,
}

impl Algorithm {
    pub fn label(&self) -> String {
        match self {
            Algorithm::Admm(v) => v.label(),
            Algorithm::Gd => "GD".to_string(),
        }
    }

    /// File-name form of the label: `iADMMn(0.1,0.1)` becomes `iADMMn_0.1_0.1`.
    pub fn slug(&self) -> String {
        label_to_slug(&self.label())
    }
}

pub fn label_to_slug(label: &str) -> String {
    label.replace(['(', ','], "_").replace(')', "")
}

pub fn slug_to_label(slug: &str) -> String {
    match slug.split_once('_') {
        Some((name, args)) => format!("{name}({})", args.replace('_', ",")),
        None => slug.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub m: usize,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: ExperimentConfig,
    pub rows: Vec<SummaryRow>,
    pub provenance: Provenance,
}

impl Summary {
    pub fn row(&self, algorithm: &str, m: usize, n: usize) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.m == m && r.n == n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunChecks {
    pub run: String,
    pub checks: Vec<CheckReport>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub summary: Summary,
    pub summary_path: PathBuf,
    pub traces: Vec<PathBuf>,
    pub checks: Vec<RunChecks>,
}

/// Seed of dataset `dataset` of size `size`.
pub fn data_seed(master: u64, size: usize, dataset: usize) -> u64 {
    derive_seed(master, &[0, size as u64, dataset as u64])
}

/// Seed of initial point `init` for dataset `dataset` of size `size`.
pub fn init_seed(master: u64, size: usize, dataset: usize, init: usize) -> u64 {
    derive_seed(master, &[1, size as u64, dataset as u64, init as u64])
}

/// Data and starting factors of one cell.
pub fn cell_inputs(
    cfg: &ExperimentConfig,
    size: usize,
    dataset: usize,
    init: usize,
) -> Result<(LogMfInstance, Mat, Mat)> {
    let s = cfg.sizes[size];
    let y = generate_instance(s.m, s.n, cfg.density, data_seed(cfg.master_seed, size, dataset))?;
    let inst = LogMfInstance::new(y, cfg.rank, cfg.c, cfg.lambda_d, cfg.lambda_t)?;
    let (u, v) = init_factors(s.m, s.n, cfg.rank, init_seed(cfg.master_seed, size, dataset, init));
    Ok((inst, u, v))
}

/// SHA-256 of the data and starting factors handed to a run.
pub fn input_hash(y: &SparseBinary, u: &Mat, v: &Mat) -> String {
    let mut h = Sha256::new();
    for d in [y.rows(), y.cols(), y.nnz()] {
        h.update((d as u64).to_le_bytes());
    }
    for &(i, j) in y.entries() {
        h.update((i as u64).to_le_bytes());
        h.update((j as u64).to_le_bytes());
    }
    for m in [u, v] {
        h.update((m.nrows() as u64).to_le_bytes());
        h.update((m.ncols() as u64).to_le_bytes());
        for x in m.iter() {
            h.update(x.to_bits().to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn trace_file_name(alg: &Algorithm, m: usize, n: usize, dataset: usize, init: usize) -> String {
    format!("{}__m{m}_n{n}__d{dataset}_i{init}.csv", alg.slug())
}

#[derive(Debug, Clone, Copy)]
struct Job {
    size: usize,
    dataset: usize,
    init: usize,
    algorithm: usize,
}

struct JobOutput {
    final_objective: f64,
    path: PathBuf,
    checks: Option<RunChecks>,
}

#[derive(Serialize)]
struct CellHash {
    m: usize,
    n: usize,
    dataset: usize,
    init: usize,
    sha256: String,
}

/// Run every algorithm on every cell and write traces, `inputs.json`,
/// `summary.json` and, when checks are on, `checks.json` under `out`.
///
/// All variants are validated against every dataset before the first run.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path, opts: &RunOptions) -> Result<ExperimentOutput> {
    cfg.check()?;
    if opts.jobs == 0 {
        return Err(HarnessError::Config("jobs must be at least 1".into()));
    }
    let mut algorithms: Vec<Algorithm> = cfg.variants.iter().copied().map(Algorithm::Admm).collect();
    if cfg.gd {
        algorithms.push(Algorithm::Gd);
    }

    let mut hashes = Vec::new();
    for (si, size) in cfg.sizes.iter().enumerate() {
        let budget = cfg.budget_for(size);
        for d in 0..cfg.n_datasets {
            for i in 0..cfg.n_inits {
                let (inst, u, v) = cell_inputs(cfg, si, d, i)?;
                if i == 0 {
                    let problem = LogMfProblem::new(inst.clone());
                    for variant in &cfg.variants {
                        let scfg = variant.solver_config(cfg.beta, budget, opts.check_level);
                        validate_config(&scfg, &problem).map_err(|source| HarnessError::Variant {
                            label: variant.label(),
                            m: size.m,
                            n: size.n,
                            dataset: d,
                            source,
                        })?;
                    }
                }
                hashes.push(CellHash {
                    m: size.m,
                    n: size.n,
                    dataset: d,
                    init: i,
                    sha256: input_hash(inst.data(), &u, &v),
                });
            }
        }
    }

    let trace_dir = out.join("traces");
    std::fs::create_dir_all(&trace_dir).map_err(io_err(&trace_dir))?;
    write_atomic(
        &out.join("inputs.json"),
        format!("{}\n", serde_json::to_string_pretty(&hashes)?).as_bytes(),
    )?;

    let mut jobs = Vec::new();
    for size in 0..cfg.sizes.len() {
        for dataset in 0..cfg.n_datasets {
            for init in 0..cfg.n_inits {
                for algorithm in 0..algorithms.len() {
                    jobs.push(Job {
                        size,
                        dataset,
                        init,
                        algorithm,
                    });
                }
            }
        }
    }
    let cell_index = |j: &Job| (j.size * cfg.n_datasets + j.dataset) * cfg.n_inits + j.init;
    let run_job = |job: &Job| -> Result<JobOutput> {
        let size = cfg.sizes[job.size];
        let alg = algorithms[job.algorithm];
        let name = trace_file_name(&alg, size.m, size.n, job.dataset, job.init);
        let (inst, u0, v0) = cell_inputs(cfg, job.size, job.dataset, job.init)?;
        if input_hash(inst.data(), &u0, &v0) != hashes[cell_index(job)].sha256 {
            return Err(HarnessError::Fairness { run: name });
        }
        let budget = cfg.budget_for(&size);
        let (trace, checks) = run_algorithm(&alg, inst, u0, v0, cfg.beta, budget, opts.check_level)?;
        let path = trace_dir.join(&name);
        write_atomic(&path, format_trace_csv(&trace).as_bytes())?;
        let final_objective = trace.last().map_or(f64::NAN, |r| r.objective);
        Ok(JobOutput {
            final_objective,
            path,
            checks: checks.map(|checks| RunChecks {
                run: name.trim_end_matches(".csv").to_string(),
                checks,
            }),
        })
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<JobOutput>> = pool.install(|| jobs.par_iter().map(run_job).collect());
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (si, size) in cfg.sizes.iter().enumerate() {
        for (ai, alg) in algorithms.iter().enumerate() {
            let finals: Vec<f64> = jobs
                .iter()
                .zip(&results)
                .filter(|(j, _)| j.size == si && j.algorithm == ai)
                .map(|(_, r)| r.final_objective)
                .collect();
            let (mean, std) = mean_std(&finals);
            rows.push(SummaryRow {
                algorithm: alg.label(),
                m: size.m,
                n: size.n,
                mean,
                std,
                n_trials: finals.len(),
            });
        }
    }
    let summary = Summary {
        experiment: cfg.clone(),
        rows,
        provenance: Provenance {
            master_seed: cfg.master_seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    };
    let summary_path = out.join("summary.json");
    write_atomic(
        &summary_path,
        format!("{}\n", serde_json::to_string_pretty(&summary)?).as_bytes(),
    )?;

    let checks: Vec<RunChecks> = results.iter().filter_map(|r| r.checks.clone()).collect();
    if opts.check_level != CheckLevel::Off {
        write_atomic(
            &out.join("checks.json"),
            format!("{}\n", serde_json::to_string_pretty(&checks)?).as_bytes(),
        )?;
    }
    Ok(ExperimentOutput {
        summary,
        summary_path,
        traces: results.into_iter().map(|r| r.path).collect(),
        checks,
    })
}

/// One run from `(u0, v0)`; returns the trace and, for solver runs, the runtime checks.
pub fn run_algorithm(
    alg: &Algorithm,
    inst: LogMfInstance,
    u0: Mat,
    v0: Mat,
    beta: f64,
    budget: Budget,
    check_level: CheckLevel,
) -> Result<(Vec<TraceRecord>, Option<Vec<CheckReport>>)> {
    match alg {
        Algorithm::Admm(variant) => {
            let scfg = variant.solver_config(beta, budget, check_level);
            let problem = LogMfProblem::new(inst);
            let out = iadmmn_core::run(&problem, &scfg, InitialPoint::primal(BlockVector::new(vec![u0, v0])))?;
            let checks = (check_level != CheckLevel::Off).then_some(out.checks);
            Ok((out.trace, checks))
        }
        Algorithm::Gd => Ok((run_gd(&inst, u0, v0, budget)?.trace, None)),
    }
}
