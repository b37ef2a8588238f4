//! Large-scale fading decoding: second-order statistics of the local filter
//! outputs, the optimal per-user weights, and the resulting SINR.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::apfrontend::{mmse_filters, LinkState};
use crate::linalg::{self, CMat, CVec, Solved};
use crate::netmodel::ChannelStatistics;
use crate::selection::ServiceMap;

/// Independent draws of true and estimated channels for a fixed
/// large-scale setup, AP-major per draw.
#[derive(Debug, Clone)]
pub struct ChannelSamples {
    pub h: Vec<Vec<CVec>>,
    pub h_hat: Vec<Vec<CVec>>,
}

impl ChannelSamples {
    pub fn draw<R: Rng + ?Sized>(stats: &ChannelStatistics, count: usize, rng: &mut R) -> Self {
        let (h, h_hat) = (0..count).map(|_| stats.draw(rng)).unzip();
        Self { h, h_hat }
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }
}

/// Statistics of one user, restricted to its serving APs `aps`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserLsfdStats {
    pub aps: Vec<usize>,
    /// `E{w_klᴴ h_kl}` per serving AP.
    pub g: CVec,
    /// Per interferer `i`, `E{v_i v_iᴴ}` with `v_i[m] = w_kmᴴ h_im`.
    pub upsilon1: Vec<CMat>,
    /// `E{‖w_kl‖²}` per serving AP.
    pub upsilon2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsfdStats {
    pub users: Vec<UserLsfdStats>,
    pub ap_count: usize,
    pub samples_used: usize,
}

fn scatter_vec(aps: &[usize], v: &CVec, len: usize) -> CVec {
    let mut out = CVec::zeros(len);
    for (m, &l) in aps.iter().enumerate() {
        out[l] = v[m];
    }
    out
}

impl LsfdStats {
    /// `g_k` over all L APs, zero at deselected ones.
    pub fn g_full(&self, k: usize) -> CVec {
        let u = &self.users[k];
        scatter_vec(&u.aps, &u.g, self.ap_count)
    }

    pub fn upsilon1_full(&self, k: usize, i: usize) -> CMat {
        let u = &self.users[k];
        let mut out = CMat::zeros(self.ap_count, self.ap_count);
        for (m, &l) in u.aps.iter().enumerate() {
            for (n, &j) in u.aps.iter().enumerate() {
                out[(l, j)] = u.upsilon1[i][(m, n)];
            }
        }
        out
    }

    pub fn upsilon2_full(&self, k: usize) -> DMatrix<f64> {
        let u = &self.users[k];
        let mut out = DMatrix::zeros(self.ap_count, self.ap_count);
        for (m, &l) in u.aps.iter().enumerate() {
            out[(l, l)] = u.upsilon2[m];
        }
        out
    }

    /// Interference-plus-noise matrix of user `k` summed over `users`.
    fn weighted_sum(&self, k: usize, users: &[usize], eta: &[f64], sigma2: f64) -> CMat {
        let u = &self.users[k];
        let mut m = CMat::zeros(u.aps.len(), u.aps.len());
        for &i in users {
            m += &u.upsilon1[i] * Complex64::new(eta[i], 0.0);
        }
        for (j, &v) in u.upsilon2.iter().enumerate() {
            m[(j, j)] += sigma2 * v;
        }
        m
    }

    /// Weights `(Σ_{i∈B_k} η_i Υ1_ki + σ² Υ2_k)⁻¹ g_k` over the serving APs.
    pub fn optimal_weights(
        &self,
        k: usize,
        interferers: &[usize],
        eta: &[f64],
        sigma2: f64,
    ) -> Solved<CVec> {
        let u = &self.users[k];
        if u.aps.is_empty() {
            return Solved {
                value: CVec::zeros(0),
                regularized: false,
            };
        }
        let m = self.weighted_sum(k, interferers, eta, sigma2);
        linalg::solve_hermitian_vec(&m, &u.g)
    }

    /// SINR of user `k` for weights `a` over its serving APs. Interference
    /// is summed over every user; negative sampling artefacts clamp to 0.
    pub fn sinr(&self, k: usize, a: &CVec, eta: &[f64], sigma2: f64) -> f64 {
        let u = &self.users[k];
        if u.aps.is_empty() {
            return 0.0;
        }
        let all: Vec<usize> = (0..self.users.len()).collect();
        let signal = eta[k] * linalg::inner(a, &u.g).norm_sqr();
        let total = linalg::quad_form(&self.weighted_sum(k, &all, eta, sigma2), a);
        let denom = total - signal;
        if !(denom > 0.0) || !(signal > 0.0) {
            return 0.0;
        }
        (signal / denom).max(0.0)
    }
}

/// Sample means of the LSFD statistics over `samples` with the local MMSE
/// filters implied by `map`.
pub fn estimate_lsfd_stats(
    stats: &ChannelStatistics,
    eta: &[f64],
    samples: &ChannelSamples,
    map: &ServiceMap,
) -> LsfdStats {
    let k_count = stats.user_count;
    let l_count = stats.ap_count;
    let served: Vec<Vec<usize>> = (0..l_count).map(|l| map.users_of(l)).collect();
    let aps: Vec<Vec<usize>> = (0..k_count).map(|k| map.aps_of(k)).collect();
    let mut users: Vec<UserLsfdStats> = aps
        .iter()
        .map(|a| UserLsfdStats {
            aps: a.clone(),
            g: CVec::zeros(a.len()),
            upsilon1: vec![CMat::zeros(a.len(), a.len()); k_count],
            upsilon2: vec![0.0; a.len()],
        })
        .collect();

    // slot[l][k] = position of k within served[l].
    let mut slot = vec![vec![usize::MAX; k_count]; l_count];
    for (l, s) in served.iter().enumerate() {
        for (pos, &k) in s.iter().enumerate() {
            slot[l][k] = pos;
        }
    }

    for (h, h_hat) in samples.h.iter().zip(&samples.h_hat) {
        let link = LinkState {
            h_hat,
            c: &stats.c,
            eta,
            sigma2: stats.sigma2,
            user_count: k_count,
            antennas: stats.antennas,
        };
        let filters: Vec<Vec<CVec>> = (0..l_count)
            .map(|l| mmse_filters(&link, l, &served[l]))
            .collect();
        for (k, u) in users.iter_mut().enumerate() {
            let m = u.aps.len();
            if m == 0 {
                continue;
            }
            let w: Vec<&CVec> = u.aps.iter().map(|&l| &filters[l][slot[l][k]]).collect();
            for i in 0..k_count {
                let v = CVec::from_fn(m, |j, _| linalg::inner(w[j], &h[u.aps[j] * k_count + i]));
                if i == k {
                    u.g += &v;
                }
                linalg::add_outer(&mut u.upsilon1[i], &v, 1.0);
            }
            for (j, wj) in w.iter().enumerate() {
                u.upsilon2[j] += wj.norm_squared();
            }
        }
    }

    let n = samples.len().max(1) as f64;
    let inv = Complex64::new(1.0 / n, 0.0);
    for u in &mut users {
        u.g *= inv;
        u.upsilon1.iter_mut().for_each(|m| *m *= inv);
        u.upsilon2.iter_mut().for_each(|v| *v /= n);
    }
    LsfdStats {
        users,
        ap_count: l_count,
        samples_used: samples.len(),
    }
}

/// Per-user weights over the serving APs.
#[derive(Debug, Clone, PartialEq)]
pub struct LsfdWeights {
    pub aps: Vec<Vec<usize>>,
    pub a: Vec<CVec>,
    pub ap_count: usize,
    /// Users whose solve needed regularization.
    pub regularized: Vec<usize>,
}

impl LsfdWeights {
    pub fn full(&self, k: usize) -> CVec {
        scatter_vec(&self.aps[k], &self.a[k], self.ap_count)
    }
}

/// Optimal weights for every user with `B_k` taken from the service map.
pub fn lsfd_weights(stats: &LsfdStats, map: &ServiceMap, eta: &[f64], sigma2: f64) -> LsfdWeights {
    let mut regularized = Vec::new();
    let a = (0..stats.users.len())
        .map(|k| {
            let s = stats.optimal_weights(k, &map.co_served(k), eta, sigma2);
            if s.regularized {
                regularized.push(k);
            }
            s.value
        })
        .collect();
    LsfdWeights {
        aps: stats.users.iter().map(|u| u.aps.clone()).collect(),
        a,
        ap_count: stats.ap_count,
        regularized,
    }
}

/// `1 − τ_p/τ_c`.
pub fn prelog(tau_p: usize, tau_c: usize) -> f64 {
    1.0 - tau_p as f64 / tau_c as f64
}

pub fn spectral_efficiency(sinr: f64, tau_p: usize, tau_c: usize) -> f64 {
    prelog(tau_p, tau_c) * sinr.max(0.0).ln_1p() / std::f64::consts::LN_2
}

/// SINR and SE of every user.
pub fn sinr_se(
    stats: &LsfdStats,
    weights: &LsfdWeights,
    eta: &[f64],
    sigma2: f64,
    tau_p: usize,
    tau_c: usize,
) -> Vec<(f64, f64)> {
    (0..stats.users.len())
        .map(|k| {
            let s = stats.sinr(k, &weights.a[k], eta, sigma2);
            (s, spectral_efficiency(s, tau_p, tau_c))
        })
        .collect()
}
