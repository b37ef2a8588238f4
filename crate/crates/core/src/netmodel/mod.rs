//! Physical scenario: placement, large-scale fading, spatial correlation,
//! small-scale channel draws and pilot-based MMSE channel estimation.
//!
//! Per-link arrays are stored AP-major: link `(l, k)` lives at `l * K + k`, so
//! everything one access point needs is a contiguous slice.

mod config;
mod snapshot;

pub use config::ScenarioConfig;
pub use snapshot::{RealizationSnapshot, SNAPSHOT_VERSION};

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::rng::{complex_normal, SimRng};

/// Geometry and pilot assignment of one drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub ap_positions: Vec<[f64; 2]>,
    pub user_positions: Vec<[f64; 2]>,
    /// Pilot index of every user, in `0..tau_p`.
    pub pilot_of: Vec<usize>,
    pub tau_p: usize,
}

impl Layout {
    pub fn ap_count(&self) -> usize {
        self.ap_positions.len()
    }

    pub fn user_count(&self) -> usize {
        self.user_positions.len()
    }

    /// Users sharing pilot `t`.
    pub fn pilot_group(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        self.pilot_of
            .iter()
            .enumerate()
            .filter(move |(_, &p)| p == t)
            .map(|(k, _)| k)
    }
}

fn perfect_square_root(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// Places APs and users and assigns pilots.
///
/// APs sit on a regular grid with cell-centred points when `L` is a perfect
/// square and are uniform in the square otherwise. Users are always uniform.
/// User `k` gets pilot `k mod tau_p`.
pub fn build_layout(cfg: &ScenarioConfig, rng_seed: u64) -> Layout {
    let mut rng = SimRng::seed_from_u64(rng_seed);
    let side = cfg.area_side;
    let ap_positions = match perfect_square_root(cfg.ap_count) {
        Some(root) => {
            let step = side / root as f64;
            (0..root)
                .flat_map(|i| {
                    (0..root).map(move |j| [(i as f64 + 0.5) * step, (j as f64 + 0.5) * step])
                })
                .collect()
        }
        None => (0..cfg.ap_count)
            .map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side])
            .collect(),
    };
    let user_positions = (0..cfg.user_count)
        .map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side])
        .collect();
    let tau_p = cfg.tau_p();
    Layout {
        ap_positions,
        user_positions,
        pilot_of: (0..cfg.user_count).map(|k| k % tau_p).collect(),
        tau_p,
    }
}

/// Three-dimensional AP-user distance, floored at 1 m.
pub fn link_distance(ap: [f64; 2], user: [f64; 2], height_delta: f64) -> f64 {
    let dx = user[0] - ap[0];
    let dy = user[1] - ap[1];
    (dx * dx + dy * dy + height_delta * height_delta)
        .sqrt()
        .max(1.0)
}

/// Median pathloss gain in dB at `distance_m`.
pub fn pathloss_db(distance_m: f64) -> f64 {
    -30.5 - 36.7 * distance_m.log10()
}

/// Large-scale fading gains in linear scale as a K×L matrix, with i.i.d.
/// log-normal shadowing drawn in `(k, l)` row-major order.
pub fn large_scale_fading<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    layout: &Layout,
    rng: &mut R,
) -> DMatrix<f64> {
    let (k_count, l_count) = (layout.user_count(), layout.ap_count());
    let mut beta = DMatrix::zeros(k_count, l_count);
    for k in 0..k_count {
        for l in 0..l_count {
            let d = link_distance(
                layout.ap_positions[l],
                layout.user_positions[k],
                cfg.ap_user_height_delta,
            );
            let z: f64 = rng.sample(StandardNormal);
            let db = pathloss_db(d) + cfg.shadow_std_db * z;
            beta[(k, l)] = 10f64.powf(db / 10.0);
        }
    }
    beta
}

/// Gaussian local scattering correlation for a half-wavelength ULA.
///
/// Entry `(m, n)` is `β·exp(jπ(m−n)sinθ)·exp(−(σ²/2)(π(m−n)cosθ)²)`, projected
/// onto the PSD cone and rescaled so the trace is exactly `N·β`.
pub fn spatial_correlation(
    beta: f64,
    nominal_angle: f64,
    asd: f64,
    antennas: usize,
) -> Result<CMat> {
    if asd < 0.0 {
        return Err(Error::NegativeAngularSpread(asd));
    }
    let (s, c) = nominal_angle.sin_cos();
    let r = CMat::from_fn(antennas, antennas, |m, n| {
        let dist = m as f64 - n as f64;
        let phase = Complex64::from_polar(1.0, PI * dist * s);
        let spread = (-(asd * asd / 2.0) * (PI * dist * c).powi(2)).exp();
        phase * (beta * spread)
    });
    let mut r = linalg::clip_psd(&r);
    let tr = linalg::trace_re(&r);
    if tr > 0.0 {
        r *= Complex64::new(antennas as f64 * beta / tr, 0.0);
    }
    Ok(r)
}

/// Correlation matrices for every link, AP-major. The nominal angle is the
/// azimuth from the AP to the user.
pub fn correlation_matrices(
    cfg: &ScenarioConfig,
    layout: &Layout,
    beta: &DMatrix<f64>,
) -> Result<Vec<CMat>> {
    let asd = cfg.asd_rad();
    let mut out = Vec::with_capacity(layout.ap_count() * layout.user_count());
    for (l, ap) in layout.ap_positions.iter().enumerate() {
        for (k, user) in layout.user_positions.iter().enumerate() {
            let angle = (user[1] - ap[1]).atan2(user[0] - ap[0]);
            out.push(spatial_correlation(beta[(k, l)], angle, asd, cfg.antennas)?);
        }
    }
    Ok(out)
}

/// Second-order quantities shared by every channel realization of a fixed
/// large-scale setup: correlation square roots, MMSE estimator matrices and
/// error covariances.
#[derive(Debug, Clone)]
pub struct ChannelStatistics {
    pub user_count: usize,
    pub ap_count: usize,
    pub antennas: usize,
    pub tau_p: usize,
    pub pilot_of: Vec<usize>,
    /// `F` with `F Fᴴ = R`, AP-major.
    pub r_factor: Vec<CMat>,
    /// `√(p_k τ_p) R_kl Φ_tl⁻¹`, AP-major.
    pub estimator: Vec<CMat>,
    /// Error covariance `R − p τ_p R Φ⁻¹ R`, AP-major.
    pub c: Vec<CMat>,
    /// `√(p_k τ_p)` per user.
    pub pilot_amplitude: Vec<f64>,
    pub sigma2: f64,
    /// Number of pilot correlation matrices that needed regularization.
    pub regularized: usize,
}

impl ChannelStatistics {
    /// `pilot_power` is the per-sample pilot power `p_k` of every user.
    pub fn new(
        r: &[CMat],
        pilot_of: &[usize],
        tau_p: usize,
        pilot_power: &[f64],
        sigma2: f64,
    ) -> Self {
        let k_count = pilot_of.len();
        let l_count = r.len() / k_count.max(1);
        let antennas = r.first().map_or(0, |m| m.nrows());
        let tau = tau_p as f64;
        let pilot_amplitude: Vec<f64> = pilot_power.iter().map(|p| (p * tau).sqrt()).collect();
        let mut estimator = vec![CMat::zeros(antennas, antennas); r.len()];
        let mut c = vec![CMat::zeros(antennas, antennas); r.len()];
        let mut regularized = 0;
        for l in 0..l_count {
            for t in 0..tau_p {
                let group: Vec<usize> = (0..k_count).filter(|&k| pilot_of[k] == t).collect();
                if group.is_empty() {
                    continue;
                }
                let mut phi = linalg::identity(antennas) * Complex64::new(sigma2, 0.0);
                for &i in &group {
                    phi += &r[l * k_count + i] * Complex64::new(tau * pilot_power[i], 0.0);
                }
                for &k in &group {
                    let idx = l * k_count + k;
                    // Φ⁻¹R is the adjoint of RΦ⁻¹ because both factors are Hermitian.
                    let solved = linalg::solve_hermitian(&phi, &r[idx]);
                    if solved.regularized {
                        regularized += 1;
                    }
                    let r_phi_inv = solved.value.adjoint();
                    estimator[idx] = &r_phi_inv * Complex64::new(pilot_amplitude[k], 0.0);
                    let reduction =
                        &r_phi_inv * &r[idx] * Complex64::new(tau * pilot_power[k], 0.0);
                    c[idx] = linalg::clip_psd(&(&r[idx] - reduction));
                }
            }
        }
        Self {
            user_count: k_count,
            ap_count: l_count,
            antennas,
            tau_p,
            pilot_of: pilot_of.to_vec(),
            r_factor: r.iter().map(linalg::psd_factor).collect(),
            estimator,
            c,
            pilot_amplitude,
            sigma2,
            regularized,
        }
    }

    pub fn link_count(&self) -> usize {
        self.user_count * self.ap_count
    }

    /// Fresh channel vectors `h_kl ~ CN(0, R_kl)`, AP-major.
    pub fn draw_channels<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<CVec> {
        self.r_factor
            .iter()
            .map(|f| {
                let z = CVec::from_fn(self.antennas, |_, _| complex_normal(rng));
                f * z
            })
            .collect()
    }

    /// Unit-variance pilot noise vectors, one per `(l, t)`, AP-major.
    pub fn draw_pilot_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<CVec> {
        (0..self.ap_count * self.tau_p)
            .map(|_| CVec::from_fn(self.antennas, |_, _| complex_normal(rng)))
            .collect()
    }

    /// Despread pilot observation `ẏ_tl = Σ_{i∈P_t} √(p_i τ_p) h_il + σ n_tl`.
    pub fn pilot_observation(&self, h: &[CVec], unit_noise: &[CVec], l: usize, t: usize) -> CVec {
        let k_count = self.user_count;
        let mut y = &unit_noise[l * self.tau_p + t] * Complex64::new(self.sigma2.sqrt(), 0.0);
        for i in (0..k_count).filter(|&i| self.pilot_of[i] == t) {
            y += &h[l * k_count + i] * Complex64::new(self.pilot_amplitude[i], 0.0);
        }
        y
    }

    /// MMSE estimates `ĥ_kl = √(p_k τ_p) R_kl Φ⁻¹ ẏ_tl` given unit pilot noise.
    pub fn estimate(&self, h: &[CVec], unit_noise: &[CVec]) -> Vec<CVec> {
        let k_count = self.user_count;
        let mut out = vec![CVec::zeros(self.antennas); self.link_count()];
        for l in 0..self.ap_count {
            for t in 0..self.tau_p {
                if !self.pilot_of.contains(&t) {
                    continue;
                }
                let y = self.pilot_observation(h, unit_noise, l, t);
                for k in (0..k_count).filter(|&k| self.pilot_of[k] == t) {
                    out[l * k_count + k] = &self.estimator[l * k_count + k] * &y;
                }
            }
        }
        out
    }

    /// One joint draw of true channels and their estimates.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<CVec>, Vec<CVec>) {
        let h = self.draw_channels(rng);
        let noise = self.draw_pilot_noise(rng);
        let h_hat = self.estimate(&h, &noise);
        (h, h_hat)
    }
}

/// Estimation bookkeeping surfaced to callers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub regularized_solves: usize,
}

/// Everything about one coherence setup: geometry, statistics, true channels
/// and their estimates.
#[derive(Debug, Clone)]
pub struct NetworkRealization {
    pub ap_positions: Vec<[f64; 2]>,
    pub user_positions: Vec<[f64; 2]>,
    /// K×L large-scale gains, linear.
    pub beta: DMatrix<f64>,
    /// Spatial correlation per link, AP-major.
    pub r: Vec<CMat>,
    pub pilot_of: Vec<usize>,
    pub tau_p: usize,
    pub antennas: usize,
    pub h_true: Vec<CVec>,
    pub h_hat: Vec<CVec>,
    pub c: Vec<CMat>,
    /// Uplink transmit power per user (also used as pilot power).
    pub eta: Vec<f64>,
    pub sigma2: f64,
    pub diagnostics: Diagnostics,
}

impl NetworkRealization {
    /// Builds the full large-scale description of a drop. Transmit powers
    /// start at `p_max` and the noise at the thermal level; channels are empty
    /// until drawn.
    pub fn generate<R: Rng + ?Sized>(
        cfg: &ScenarioConfig,
        layout: &Layout,
        shadow_rng: &mut R,
    ) -> Result<Self> {
        cfg.validate()?;
        let beta = large_scale_fading(cfg, layout, shadow_rng);
        let r = correlation_matrices(cfg, layout, &beta)?;
        Ok(Self::from_parts(
            layout,
            beta,
            r,
            cfg.antennas,
            vec![cfg.p_max_mw; layout.user_count()],
            cfg.noise_power_mw(),
        ))
    }

    pub fn from_parts(
        layout: &Layout,
        beta: DMatrix<f64>,
        r: Vec<CMat>,
        antennas: usize,
        eta: Vec<f64>,
        sigma2: f64,
    ) -> Self {
        Self {
            ap_positions: layout.ap_positions.clone(),
            user_positions: layout.user_positions.clone(),
            beta,
            r,
            pilot_of: layout.pilot_of.clone(),
            tau_p: layout.tau_p,
            antennas,
            h_true: Vec::new(),
            h_hat: Vec::new(),
            c: Vec::new(),
            eta,
            sigma2,
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn ap_count(&self) -> usize {
        self.ap_positions.len()
    }

    pub fn user_count(&self) -> usize {
        self.user_positions.len()
    }

    /// Flat AP-major index of link `(l, k)`.
    pub fn idx(&self, l: usize, k: usize) -> usize {
        l * self.user_count() + k
    }

    pub fn channel_statistics(&self) -> ChannelStatistics {
        ChannelStatistics::new(&self.r, &self.pilot_of, self.tau_p, &self.eta, self.sigma2)
    }

    /// Draws `h_kl ~ CN(0, R_kl)` independently for every link.
    pub fn draw_channels<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.h_true = self
            .r
            .iter()
            .map(|r| {
                let f = linalg::psd_factor(r);
                let z = CVec::from_fn(self.antennas, |_, _| complex_normal(rng));
                f * z
            })
            .collect();
    }

    /// MMSE-estimates every channel from freshly drawn pilot noise.
    pub fn mmse_estimate<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let stats = self.channel_statistics();
        let noise = stats.draw_pilot_noise(rng);
        self.apply_estimation(&stats, &noise);
    }

    /// MMSE estimation with caller-supplied unit-variance pilot noise, one
    /// N-vector per `(l, t)` AP-major. The noise is scaled by `√σ²`.
    pub fn mmse_estimate_with_noise(&mut self, unit_noise: &[CVec]) {
        let stats = self.channel_statistics();
        self.apply_estimation(&stats, unit_noise);
    }

    fn apply_estimation(&mut self, stats: &ChannelStatistics, unit_noise: &[CVec]) {
        assert_eq!(
            self.h_true.len(),
            self.r.len(),
            "channels must be drawn before estimation"
        );
        self.h_hat = stats.estimate(&self.h_true, unit_noise);
        self.c = stats.c.clone();
        self.diagnostics.regularized_solves = stats.regularized;
    }

    pub fn snapshot(&self) -> RealizationSnapshot {
        RealizationSnapshot::from_realization(self)
    }
}
