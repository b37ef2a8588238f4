//! Monte Carlo driver: configuration, per-trial pipeline, parallel
//! execution and result files.

mod config;
mod output;
mod trial;

pub use config::{parse_snr_spec, Emit, ExperimentConfig, Profile};
pub use output::{aggregate, write_outputs, Aggregate, RunSummary};
pub use trial::{
    assign_powers_fpc, calibrate_snr, mean_ap_snr_db, prepare_trial, run_trial, SnrPoint,
    TrialMetrics, TrialSetup,
};

use rayon::prelude::*;

use crate::codec::{build_code, LdpcCode};
use crate::error::{Error, Result};

/// Builds the code an experiment uses.
pub fn experiment_code(cfg: &ExperimentConfig) -> Result<LdpcCode> {
    build_code(cfg.code_length, cfg.code_seed)
}

/// Runs every trial on `cfg.workers` threads. Results are ordered by trial
/// index, then SNR point, then strategy, independent of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialMetrics>> {
    cfg.validate()?;
    let code = experiment_code(cfg)?;
    run_experiment_with_code(cfg, &code)
}

pub fn run_experiment_with_code(
    cfg: &ExperimentConfig,
    code: &LdpcCode,
) -> Result<Vec<TrialMetrics>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let per_trial: Vec<Vec<TrialMetrics>> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, code, t))
            .collect::<Result<_>>()
    })?;
    Ok(per_trial.into_iter().flatten().collect())
}
