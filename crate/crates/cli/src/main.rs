use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Parser;

use cellfree_core::codec::to_alist;
use cellfree_core::harness::{
    experiment_code, parse_snr_spec, run_experiment_with_code, write_outputs, Emit,
    ExperimentConfig, Profile,
};
use cellfree_core::Strategy;

/// Monte Carlo simulator for cell-free uplink detection with AP selection.
///
/// Settings are applied in order: profile defaults, `--config` file, then
/// command-line flags. Every flag can also be set through a `CELLFREE_*`
/// environment variable.
#[derive(Debug, Parser)]
#[command(name = "cellfree", version)]
struct Args {
    /// Flat `key = value` configuration file.
    #[arg(long, env = "CELLFREE_CONFIG")]
    config: Option<PathBuf>,

    /// Parameter set to start from.
    #[arg(long, env = "CELLFREE_PROFILE", default_value = "desk")]
    profile: String,

    /// Comma-separated strategies, or `all`.
    #[arg(long, env = "CELLFREE_STRATEGY")]
    strategy: Option<String>,

    /// SNR points in dB: `a,b,c` or `start:step:stop`.
    #[arg(long, env = "CELLFREE_SNR", allow_hyphen_values = true)]
    snr: Option<String>,

    #[arg(long, env = "CELLFREE_TRIALS")]
    trials: Option<u64>,

    #[arg(long, env = "CELLFREE_SEED")]
    seed: Option<u64>,

    /// Worker threads; results do not depend on this.
    #[arg(long, env = "CELLFREE_WORKERS")]
    workers: Option<usize>,

    /// Output directory.
    #[arg(long, env = "CELLFREE_OUT")]
    out: Option<PathBuf>,

    /// Comma-separated outputs: ber, se-cdf, fronthaul, flops, cardinality.
    #[arg(long, env = "CELLFREE_EMIT")]
    emit: Option<String>,

    /// Outer detector-decoder iterations.
    #[arg(long, env = "CELLFREE_N_OUTER")]
    n_outer: Option<usize>,

    /// Channel realizations per trial for the LSFD statistics.
    #[arg(long, env = "CELLFREE_N_STAT")]
    n_stat: Option<usize>,

    /// Soft interference cancellation in later outer iterations.
    #[arg(long, env = "CELLFREE_SOFT_IC")]
    soft_ic: Option<bool>,

    /// Also write the parity-check matrix in alist format.
    #[arg(long)]
    dump_code: bool,
}

fn parse_strategies(text: &str) -> Result<Vec<Strategy>> {
    if text.trim().eq_ignore_ascii_case("all") {
        return Ok(Strategy::ALL.to_vec());
    }
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<Strategy>().map_err(Into::into))
        .collect()
}

fn build_config(args: &Args) -> Result<ExperimentConfig> {
    let profile: Profile = args.profile.parse()?;
    let mut cfg = ExperimentConfig::profile(profile);
    if let Some(path) = &args.config {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply_kv_str(&text)
            .with_context(|| format!("in {}", path.display()))?;
    }
    if let Some(s) = &args.strategy {
        cfg.strategies = parse_strategies(s)?;
    }
    if let Some(s) = &args.snr {
        cfg.snr_points_db = parse_snr_spec(s)?;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(o) = &args.out {
        cfg.output_path = o.clone();
    }
    if let Some(e) = &args.emit {
        cfg.emit = e
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.parse::<Emit>())
            .collect::<Result<_, _>>()?;
    }
    if let Some(n) = args.n_outer {
        cfg.n_outer = n;
    }
    if let Some(n) = args.n_stat {
        cfg.n_stat = n;
    }
    if let Some(b) = args.soft_ic {
        cfg.soft_ic = b;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> Result<()> {
    let args = Args::parse();
    let cfg = build_config(&args)?;
    let code = experiment_code(&cfg)?;
    if code.rank() != code.check_count() {
        bail!("constructed code is rank deficient");
    }
    let dir = cfg.output_path.clone();
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    if args.dump_code {
        std::fs::write(dir.join("code.alist"), to_alist(&code))?;
    }

    let start = Instant::now();
    let metrics = run_experiment_with_code(&cfg, &code)?;
    let summary = write_outputs(&cfg, &metrics, &dir)
        .with_context(|| format!("writing to {}", dir.display()))?;
    eprintln!(
        "{} trials x {} SNR points x {} strategies in {:.1} s -> {}",
        cfg.trials,
        cfg.snr_points_db.len(),
        cfg.strategies.len(),
        start.elapsed().as_secs_f64(),
        dir.display()
    );
    for a in &summary.results {
        eprintln!(
            "  {:>6} dB  {:<9} BER {:.3e}  (per iteration {})  mean |M_k| {:.2}  mean SE {:.3}",
            a.snr_db,
            a.strategy.name(),
            a.ber,
            a.ber_per_iteration
                .iter()
                .map(|b| format!("{b:.2e}"))
                .collect::<Vec<_>>()
                .join(" "),
            a.mean_aps,
            a.mean_se
        );
    }
    Ok(())
}
