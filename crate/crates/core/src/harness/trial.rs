use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::apfrontend::{receive, LinkState};
use crate::codec::{CodedFrame, LdpcCode};
use crate::cpu::{
    estimate_lsfd_stats, lsfd_weights, run_idd, sinr_se, ChannelSamples, IddSettings,
};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};
use crate::netmodel::{build_layout, ChannelStatistics, NetworkRealization};
use crate::rng::{complex_normal, derive_seed, substream, substream_sub, Stage};
use crate::selection::{
    flop_count, fronthaul_load_real, initial_access, select, FlopParams, Scheme, SelectionInput,
    ServiceMap, Strategy,
};

/// Outcome of one strategy at one SNR point in one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub trial_index: u64,
    pub snr_db: f64,
    pub strategy: Strategy,
    /// Information-bit errors after the final outer iteration.
    pub bit_errors: u64,
    pub bits_total: u64,
    /// Information-bit errors after each outer iteration.
    pub bit_errors_per_iteration: Vec<u64>,
    pub per_user_se: Vec<f64>,
    /// Fronthaul load at the trial's mean number of serving APs per user.
    pub fronthaul: f64,
    /// FLOPs of the LLR-based selection at the trial's mean cardinality.
    pub flops: f64,
    pub selected_aps_per_user: Vec<usize>,
}

impl TrialMetrics {
    pub fn ber(&self) -> f64 {
        if self.bits_total == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits_total as f64
        }
    }

    pub fn mean_aps(&self) -> f64 {
        let n = self.selected_aps_per_user.len().max(1) as f64;
        self.selected_aps_per_user.iter().sum::<usize>() as f64 / n
    }
}

/// Fractional power control:
/// `η_k = p_max (Σ_{l∈M_k} β_kl)^{−ν} / max_j (Σ_{l∈M_j} β_jl)^{−ν}`.
pub fn assign_powers_fpc(
    beta: &DMatrix<f64>,
    map: &ServiceMap,
    p_max: f64,
    exponent: f64,
) -> Result<Vec<f64>> {
    let weights: Vec<f64> = (0..beta.nrows())
        .map(|k| {
            let agg: f64 = map.aps_of(k).iter().map(|&l| beta[(k, l)]).sum();
            if agg > 0.0 {
                Ok(agg.powf(-exponent))
            } else {
                Err(Error::ZeroAggregateGain { user: k })
            }
        })
        .collect::<Result<_>>()?;
    let max = weights.iter().copied().fold(0.0, f64::max);
    Ok(weights.iter().map(|w| p_max * w / max).collect())
}

/// Noise power giving a mean per-AP SNR `Σ_i β_il η_i R / σ²` of `snr_db`.
pub fn calibrate_snr(beta: &DMatrix<f64>, eta: &[f64], rate: f64, snr_db: f64) -> f64 {
    let l_count = beta.ncols();
    let mean_rx: f64 = (0..l_count)
        .map(|l| {
            (0..beta.nrows())
                .map(|i| beta[(i, l)] * eta[i])
                .sum::<f64>()
        })
        .sum::<f64>()
        / l_count as f64;
    mean_rx * rate / 10f64.powf(snr_db / 10.0)
}

/// Mean per-AP SNR in dB for a given noise power.
pub fn mean_ap_snr_db(beta: &DMatrix<f64>, eta: &[f64], rate: f64, sigma2: f64) -> f64 {
    let l_count = beta.ncols();
    let mean: f64 = (0..l_count)
        .map(|l| {
            (0..beta.nrows())
                .map(|i| beta[(i, l)] * eta[i] * rate / sigma2)
                .sum::<f64>()
        })
        .sum::<f64>()
        / l_count as f64;
    10.0 * mean.log10()
}

fn unit_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    // Column-major fill: symbol by symbol.
    let mut m = CMat::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = complex_normal(rng);
        }
    }
    m
}

/// Everything drawn once per trial and shared by all SNR points and
/// strategies, so comparisons between strategies are paired.
#[derive(Debug, Clone)]
pub struct TrialSetup {
    pub trial_index: u64,
    /// Realization with FPC powers and true channels; estimates and noise
    /// power are filled in per SNR point.
    pub base: NetworkRealization,
    /// Unit-variance pilot noise per `(l, t)`, AP-major.
    pub pilot_noise: Vec<CVec>,
    pub frames: Vec<CodedFrame>,
    /// Unit-variance data noise, N×T per AP.
    pub data_noise: Vec<CMat>,
    pub tau_p: usize,
}

/// One SNR point of a trial: calibrated noise, channel estimates and the
/// data-phase observations.
#[derive(Debug, Clone)]
pub struct SnrPoint {
    pub index: usize,
    pub snr_db: f64,
    pub real: NetworkRealization,
    pub y: Vec<CMat>,
    pub stats: ChannelStatistics,
}

impl SnrPoint {
    pub fn link(&self) -> LinkState<'_> {
        LinkState::of(&self.real)
    }

    pub fn selection_input(&self) -> SelectionInput<'_> {
        SelectionInput {
            beta: &self.real.beta,
            link: self.link(),
            observations: Some(&self.y),
            cap: self.real.tau_p,
        }
    }
}

pub fn prepare_trial(cfg: &ExperimentConfig, code: &LdpcCode, trial: u64) -> Result<TrialSetup> {
    let sc = &cfg.scenario;
    let seed = cfg.master_seed;
    let layout = build_layout(sc, derive_seed(seed, trial, Stage::Layout, 0));
    let mut base =
        NetworkRealization::generate(sc, &layout, &mut substream(seed, trial, Stage::Shadowing))?;
    let tau_p = layout.tau_p;

    let access = initial_access(&base.beta, tau_p)?;
    base.eta = assign_powers_fpc(&base.beta, &access, sc.p_max_mw, sc.fpc_exponent)?;
    base.draw_channels(&mut substream(seed, trial, Stage::Channel));

    let mut pilot_rng = substream(seed, trial, Stage::PilotNoise);
    let pilot_noise = (0..sc.ap_count * tau_p)
        .map(|_| CVec::from_fn(sc.antennas, |_, _| complex_normal(&mut pilot_rng)))
        .collect();
    let mut payload_rng = substream(seed, trial, Stage::Payload);
    let frames: Vec<CodedFrame> = (0..sc.user_count)
        .map(|_| CodedFrame::random(code, &mut payload_rng))
        .collect::<Result<_>>()?;
    let t_count = frames.first().map_or(0, |f| f.symbols.len());
    let mut data_rng = substream(seed, trial, Stage::DataNoise);
    let data_noise = (0..sc.ap_count)
        .map(|_| unit_matrix(sc.antennas, t_count, &mut data_rng))
        .collect();
    Ok(TrialSetup {
        trial_index: trial,
        base,
        pilot_noise,
        frames,
        data_noise,
        tau_p,
    })
}

impl TrialSetup {
    /// Calibrates the noise for `snr_db`, estimates channels and forms the
    /// received data signal.
    pub fn at_snr(&self, index: usize, snr_db: f64, code_rate: f64) -> SnrPoint {
        let mut real = self.base.clone();
        real.sigma2 = calibrate_snr(&real.beta, &real.eta, code_rate, snr_db);
        real.mmse_estimate_with_noise(&self.pilot_noise);
        let symbols: Vec<_> = self.frames.iter().map(|f| f.symbols.clone()).collect();
        let y = receive(&real, &symbols, &self.data_noise);
        let stats = real.channel_statistics();
        SnrPoint {
            index,
            snr_db,
            real,
            y,
            stats,
        }
    }

    /// Channel draws for the LSFD statistics of one SNR point.
    pub fn statistics_samples(&self, cfg: &ExperimentConfig, point: &SnrPoint) -> ChannelSamples {
        let mut rng = substream_sub(
            cfg.master_seed,
            self.trial_index,
            Stage::Statistics,
            point.index as u64,
        );
        ChannelSamples::draw(&point.stats, cfg.n_stat, &mut rng)
    }

    /// The service map a strategy picks at one SNR point.
    pub fn select(
        &self,
        cfg: &ExperimentConfig,
        point: &SnrPoint,
        strategy: Strategy,
    ) -> Result<ServiceMap> {
        let mut rng = substream(cfg.master_seed, self.trial_index, Stage::RandomSelection);
        select(strategy, &point.selection_input(), &mut rng)
    }
}

/// Runs one Monte Carlo trial for every configured SNR point and strategy.
pub fn run_trial(
    cfg: &ExperimentConfig,
    code: &LdpcCode,
    trial_index: u64,
) -> Result<Vec<TrialMetrics>> {
    run_trial_inner(cfg, code, trial_index).map_err(|e| Error::Trial {
        index: trial_index,
        source: Box::new(e),
    })
}

fn run_trial_inner(
    cfg: &ExperimentConfig,
    code: &LdpcCode,
    trial: u64,
) -> Result<Vec<TrialMetrics>> {
    let setup = prepare_trial(cfg, code, trial)?;
    let sc = &cfg.scenario;
    let (k_count, l_count) = (sc.user_count, sc.ap_count);
    let settings = IddSettings {
        n_outer: cfg.n_outer,
        n_inner: cfg.n_inner,
        soft_ic: cfg.soft_ic,
    };
    let mut out = Vec::with_capacity(cfg.snr_points_db.len() * cfg.strategies.len());

    for (j, &snr_db) in cfg.snr_points_db.iter().enumerate() {
        let point = setup.at_snr(j, snr_db, code.rate());
        let samples = setup.statistics_samples(cfg, &point);
        let real = &point.real;
        let link = point.link();

        for &strategy in &cfg.strategies {
            let map = setup.select(cfg, &point, strategy)?;
            let lsfd = estimate_lsfd_stats(&point.stats, &real.eta, &samples, &map);
            let weights = lsfd_weights(&lsfd, &map, &real.eta, real.sigma2);
            let se: Vec<f64> = sinr_se(
                &lsfd,
                &weights,
                &real.eta,
                real.sigma2,
                setup.tau_p,
                sc.tau_c,
            )
            .into_iter()
            .map(|(_, se)| se)
            .collect();

            let mut rx_frames = setup.frames.clone();
            let records = run_idd(
                &link,
                &map,
                &weights,
                &point.y,
                code,
                &mut rx_frames,
                settings,
            );
            let errors_per_iteration: Vec<u64> = records
                .iter()
                .map(|rec| {
                    rec.hard_bits
                        .iter()
                        .zip(&setup.frames)
                        .map(|(bits, f)| {
                            code.extract_info(bits)
                                .iter()
                                .zip(&f.info_bits)
                                .filter(|(a, b)| a != b)
                                .count() as u64
                        })
                        .sum()
                })
                .collect();

            let mean_aps = map.mean_aps_per_user();
            let flop_params = FlopParams {
                l: l_count as u64,
                n: sc.antennas as u64,
                k: k_count as u64,
                m_c: 2,
                m: mean_aps,
                branches: 8,
                block: code.n() as u64,
            };
            out.push(TrialMetrics {
                trial_index: trial,
                snr_db,
                strategy,
                bit_errors: errors_per_iteration.last().copied().unwrap_or(0),
                bits_total: (k_count * code.k_info()) as u64,
                bit_errors_per_iteration: errors_per_iteration,
                per_user_se: se,
                fronthaul: fronthaul_load_real(k_count as f64, mean_aps),
                flops: flop_count(Scheme::LlrSelection, &flop_params),
                selected_aps_per_user: map.cardinalities(),
            });
        }
    }
    Ok(out)
}
