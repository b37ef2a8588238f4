use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{Emit, ExperimentConfig};
use super::trial::TrialMetrics;
use crate::error::Result;
use crate::selection::{flop_count, FlopParams, Scheme, Strategy};

/// Pooled results of one (SNR point, strategy) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub snr_db: f64,
    pub strategy: Strategy,
    pub trials: u64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub errors_per_iteration: Vec<u64>,
    pub ber_per_iteration: Vec<f64>,
    /// Half width of the 95 % normal interval of the mean per-trial BER.
    pub ber_ci_half_width: f64,
    pub mean_se: f64,
    pub mean_aps: f64,
    pub fronthaul: f64,
    pub flops: f64,
}

/// Pools metrics by (SNR, strategy) in order of first appearance. Sums run
/// in input order, so the result is independent of how trials were
/// scheduled.
pub fn aggregate(metrics: &[TrialMetrics]) -> Vec<Aggregate> {
    let mut keys: Vec<(f64, Strategy)> = Vec::new();
    for m in metrics {
        if !keys
            .iter()
            .any(|&(s, st)| s.to_bits() == m.snr_db.to_bits() && st == m.strategy)
        {
            keys.push((m.snr_db, m.strategy));
        }
    }
    keys.into_iter()
        .map(|(snr_db, strategy)| {
            let cell: Vec<&TrialMetrics> = metrics
                .iter()
                .filter(|m| m.snr_db.to_bits() == snr_db.to_bits() && m.strategy == strategy)
                .collect();
            let trials = cell.len() as u64;
            let n = trials as f64;
            let bits: u64 = cell.iter().map(|m| m.bits_total).sum();
            let errors: u64 = cell.iter().map(|m| m.bit_errors).sum();
            let iterations = cell
                .iter()
                .map(|m| m.bit_errors_per_iteration.len())
                .max()
                .unwrap_or(0);
            let errors_per_iteration: Vec<u64> = (0..iterations)
                .map(|i| {
                    cell.iter()
                        .map(|m| m.bit_errors_per_iteration.get(i).copied().unwrap_or(0))
                        .sum()
                })
                .collect();
            let ratio = |e: u64| {
                if bits == 0 {
                    0.0
                } else {
                    e as f64 / bits as f64
                }
            };
            let per_trial: Vec<f64> = cell.iter().map(|m| m.ber()).collect();
            let mean_trial = per_trial.iter().sum::<f64>() / n;
            let var = if trials > 1 {
                per_trial
                    .iter()
                    .map(|b| (b - mean_trial).powi(2))
                    .sum::<f64>()
                    / (n - 1.0)
            } else {
                0.0
            };
            let se_count: usize = cell.iter().map(|m| m.per_user_se.len()).sum();
            let se_sum: f64 = cell.iter().flat_map(|m| m.per_user_se.iter()).sum();
            Aggregate {
                snr_db,
                strategy,
                trials,
                bits,
                errors,
                ber: ratio(errors),
                ber_per_iteration: errors_per_iteration.iter().map(|&e| ratio(e)).collect(),
                errors_per_iteration,
                ber_ci_half_width: 1.96 * (var / n).sqrt(),
                mean_se: if se_count == 0 {
                    0.0
                } else {
                    se_sum / se_count as f64
                },
                mean_aps: cell.iter().map(|m| m.mean_aps()).sum::<f64>() / n,
                fronthaul: cell.iter().map(|m| m.fronthaul).sum::<f64>() / n,
                flops: cell.iter().map(|m| m.flops).sum::<f64>() / n,
            }
        })
        .collect()
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub version: String,
    /// Hash of the configuration with worker count and output path blanked.
    pub run_id: String,
    pub config: ExperimentConfig,
    pub results: Vec<Aggregate>,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn run_id(cfg: &ExperimentConfig) -> Result<String> {
    let mut canonical = cfg.clone();
    canonical.workers = 1;
    canonical.output_path = Default::default();
    Ok(format!(
        "{:016x}",
        fnv1a(serde_json::to_string(&canonical)?.as_bytes())
    ))
}

fn csv_writer(dir: &Path, name: &str, header: &[&str]) -> Result<csv::Writer<fs::File>> {
    let mut w = csv::Writer::from_path(dir.join(name))?;
    w.write_record(header)?;
    Ok(w)
}

/// Writes the selected tables and `summary.json` into `dir`.
pub fn write_outputs(
    cfg: &ExperimentConfig,
    metrics: &[TrialMetrics],
    dir: &Path,
) -> Result<RunSummary> {
    fs::create_dir_all(dir)?;
    let results = aggregate(metrics);
    let sc = &cfg.scenario;

    if cfg.emit.contains(&Emit::Ber) {
        let mut w = csv_writer(
            dir,
            "ber.csv",
            &["snr_db", "strategy", "ber", "trials", "bits"],
        )?;
        for a in &results {
            w.write_record([
                a.snr_db.to_string(),
                a.strategy.to_string(),
                a.ber.to_string(),
                a.trials.to_string(),
                a.bits.to_string(),
            ])?;
        }
        w.flush()?;
        let mut w = csv_writer(
            dir,
            "ber_iterations.csv",
            &["snr_db", "strategy", "iteration", "ber", "errors", "bits"],
        )?;
        for a in &results {
            for (i, (&e, &b)) in a
                .errors_per_iteration
                .iter()
                .zip(&a.ber_per_iteration)
                .enumerate()
            {
                w.write_record([
                    a.snr_db.to_string(),
                    a.strategy.to_string(),
                    (i + 1).to_string(),
                    b.to_string(),
                    e.to_string(),
                    a.bits.to_string(),
                ])?;
            }
        }
        w.flush()?;
    }

    if cfg.emit.contains(&Emit::SeCdf) {
        let mut w = csv_writer(dir, "se_cdf.csv", &["snr_db", "strategy", "se", "cdf"])?;
        for a in &results {
            let mut se: Vec<f64> = metrics
                .iter()
                .filter(|m| m.snr_db.to_bits() == a.snr_db.to_bits() && m.strategy == a.strategy)
                .flat_map(|m| m.per_user_se.iter().copied())
                .collect();
            se.sort_by(f64::total_cmp);
            let n = se.len() as f64;
            for (i, v) in se.iter().enumerate() {
                w.write_record([
                    a.snr_db.to_string(),
                    a.strategy.to_string(),
                    v.to_string(),
                    ((i + 1) as f64 / n).to_string(),
                ])?;
            }
        }
        w.flush()?;
    }

    if cfg.emit.contains(&Emit::Cardinality) {
        let mut w = csv_writer(
            dir,
            "cardinality.csv",
            &["snr_db", "strategy", "mean_aps", "trials"],
        )?;
        for a in &results {
            w.write_record([
                a.snr_db.to_string(),
                a.strategy.to_string(),
                a.mean_aps.to_string(),
                a.trials.to_string(),
            ])?;
        }
        w.flush()?;
    }

    if cfg.emit.contains(&Emit::Fronthaul) || cfg.emit.contains(&Emit::Flops) {
        let mut w = csv_writer(
            dir,
            "accounting.csv",
            &[
                "snr_db",
                "strategy",
                "scheme",
                "K",
                "L",
                "N",
                "m",
                "fronthaul",
                "flops",
            ],
        )?;
        for a in &results {
            let params = FlopParams {
                l: sc.ap_count as u64,
                n: sc.antennas as u64,
                k: sc.user_count as u64,
                m_c: 2,
                m: a.mean_aps,
                branches: 8,
                block: cfg.code_length as u64,
            };
            for scheme in Scheme::ALL {
                w.write_record([
                    a.snr_db.to_string(),
                    a.strategy.to_string(),
                    scheme.to_string(),
                    sc.user_count.to_string(),
                    sc.ap_count.to_string(),
                    sc.antennas.to_string(),
                    a.mean_aps.to_string(),
                    a.fronthaul.to_string(),
                    flop_count(scheme, &params).to_string(),
                ])?;
            }
        }
        w.flush()?;
    }

    let summary = RunSummary {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        run_id: run_id(cfg)?,
        config: cfg.clone(),
        results,
    };
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metric(trial: u64, errors: u64, bits: u64, se: f64) -> TrialMetrics {
        TrialMetrics {
            trial_index: trial,
            snr_db: 0.0,
            strategy: Strategy::Llsf,
            bit_errors: errors,
            bits_total: bits,
            bit_errors_per_iteration: vec![errors + 1, errors],
            per_user_se: vec![se, se],
            fronthaul: 10.0,
            flops: 5.0,
            selected_aps_per_user: vec![1, 3],
        }
    }

    #[test]
    fn ber_is_pooled_ratio() {
        let a = aggregate(&[metric(0, 2, 1280, 1.0)]);
        assert_eq!(a[0].ber, 1.5625e-3);
        assert_eq!(a[0].mean_aps, 2.0);
    }

    #[test]
    fn pooling_is_associative() {
        let all = [
            metric(0, 2, 100, 1.0),
            metric(1, 5, 100, 2.0),
            metric(2, 0, 100, 0.5),
        ];
        let whole = aggregate(&all);
        let left = aggregate(&all[..1]);
        let right = aggregate(&all[1..]);
        assert_eq!(whole[0].errors, left[0].errors + right[0].errors);
        assert_eq!(whole[0].bits, left[0].bits + right[0].bits);
        assert_eq!(whole[0].errors_per_iteration, vec![10, 7]);
    }

    #[test]
    fn constant_se_gives_a_step_cdf() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::default();
        cfg.emit = [Emit::SeCdf].into_iter().collect();
        write_outputs(&cfg, &[metric(0, 0, 10, 1.5)], dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("se_cdf.csv")).unwrap();
        assert_eq!(
            text,
            "snr_db,strategy,se,cdf\n0,llsf,1.5,0.5\n0,llsf,1.5,1\n"
        );
    }
}
