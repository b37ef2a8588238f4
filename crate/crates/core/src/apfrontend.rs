//! Stage-one processing at each access point: local MMSE filtering, the
//! effective scalar AWGN model of the filtered output, and per-bit LLRs.
//!
//! The soft estimate of user `k` at AP `l` is normalized by `√η_k`, so it
//! reads `x̂ = α x + e` with `e` treated as circular Gaussian of variance `γ²`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::codec::{constellation, LLR_CLAMP};
use crate::linalg::{self, CMat, CVec};
use crate::netmodel::NetworkRealization;

/// Floor on the effective noise variance.
pub const GAMMA2_FLOOR: f64 = 1e-12;

/// Filtered output of one AP for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalEstimate {
    pub user: usize,
    /// `w^H y / √η_k` per data symbol.
    pub x_hat: Vec<Complex64>,
    pub alpha: Complex64,
    pub gamma2: f64,
    /// The (unnormalized) combining vector.
    pub filter: CVec,
}

/// Decoder feedback used for soft interference cancellation.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftSymbols {
    /// Per user, per data symbol, the posterior mean.
    pub mean: Vec<Vec<Complex64>>,
    /// Per user, the frame-averaged residual variance.
    pub variance: Vec<f64>,
}

/// Borrowed per-link quantities an AP filter needs; arrays are AP-major.
#[derive(Debug, Clone, Copy)]
pub struct LinkState<'a> {
    pub h_hat: &'a [CVec],
    pub c: &'a [CMat],
    pub eta: &'a [f64],
    pub sigma2: f64,
    pub user_count: usize,
    pub antennas: usize,
}

impl<'a> LinkState<'a> {
    pub fn of(real: &'a NetworkRealization) -> Self {
        Self {
            h_hat: &real.h_hat,
            c: &real.c,
            eta: &real.eta,
            sigma2: real.sigma2,
            user_count: real.user_count(),
            antennas: real.antennas,
        }
    }

    pub fn idx(&self, l: usize, k: usize) -> usize {
        l * self.user_count + k
    }
}

/// Data-phase observations `y_l = Σ_i √η_i h_il x_i + σ n_l` as N×T matrices,
/// one per AP. `unit_noise[l]` has unit-variance entries.
pub fn receive(
    real: &NetworkRealization,
    symbols: &[Vec<Complex64>],
    unit_noise: &[CMat],
) -> Vec<CMat> {
    let k_count = real.user_count();
    let sigma = Complex64::new(real.sigma2.sqrt(), 0.0);
    (0..real.ap_count())
        .map(|l| {
            let mut y = &unit_noise[l] * sigma;
            for (k, x) in symbols.iter().enumerate().take(k_count) {
                let h = &real.h_true[real.idx(l, k)] * Complex64::new(real.eta[k].sqrt(), 0.0);
                for (t, &s) in x.iter().enumerate() {
                    let mut col = y.column_mut(t);
                    col.axpy(s, &h, Complex64::new(1.0, 0.0));
                }
            }
            y
        })
        .collect()
}

/// `Σ_{i∈users} η_i (ĥ_il ĥ_ilᴴ + C_il) + σ² I` at AP `l`.
pub fn received_covariance(
    real: &LinkState,
    l: usize,
    users: impl IntoIterator<Item = usize>,
) -> CMat {
    let mut psi = linalg::identity(real.antennas) * Complex64::new(real.sigma2, 0.0);
    for i in users {
        let idx = real.idx(l, i);
        linalg::add_outer(&mut psi, &real.h_hat[idx], real.eta[i]);
        psi += &real.c[idx] * Complex64::new(real.eta[i], 0.0);
    }
    psi
}

/// Local MMSE filters `w_kl = η_k Ψ⁻¹ ĥ_kl` for each user in `served`, where
/// `Ψ` is the covariance over `served`.
pub fn mmse_filters(real: &LinkState, l: usize, served: &[usize]) -> Vec<CVec> {
    if served.is_empty() {
        return Vec::new();
    }
    let psi = received_covariance(real, l, served.iter().copied());
    let n = real.antennas;
    let rhs = DMatrix::from_fn(n, served.len(), |r, c| {
        real.h_hat[real.idx(l, served[c])][r] * real.eta[served[c]]
    });
    let solved = linalg::solve_hermitian(&psi, &rhs).value;
    (0..served.len())
        .map(|c| solved.column(c).into_owned())
        .collect()
}

/// Gain and effective noise variance of the normalized filter output:
/// `α = wᴴĥ`, `γ² = max(wᴴΨw/η_k − |α|², floor)`, where `Ψ` is the full
/// covariance of the signal the filter is applied to.
pub fn awgn_params(w: &CVec, h_hat: &CVec, psi: &CMat, eta_k: f64) -> (Complex64, f64) {
    let alpha = linalg::inner(w, h_hat);
    let total = linalg::quad_form(psi, w) / eta_k;
    (alpha, (total - alpha.norm_sqr()).max(GAMMA2_FLOOR))
}

fn normalized_output(w: &CVec, y: &CMat, eta_k: f64) -> Vec<Complex64> {
    let scale = 1.0 / eta_k.sqrt();
    (0..y.ncols())
        .map(|t| {
            y.column(t)
                .iter()
                .zip(w.iter())
                .map(|(a, b)| b.conj() * a)
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

/// Linear detection at AP `l` for every user in `served`.
///
/// Without feedback the filters are the local MMSE filters over `served`.
/// With feedback, the soft symbols of the other served users are subtracted
/// first and each user gets its own MMSE filter against the residual.
pub fn detect_local(
    real: &LinkState,
    l: usize,
    served: &[usize],
    y: &CMat,
    feedback: Option<&SoftSymbols>,
) -> Vec<LocalEstimate> {
    let k_count = real.user_count;
    match feedback {
        None => {
            let filters = mmse_filters(real, l, served);
            let psi_all = received_covariance(real, l, 0..k_count);
            served
                .iter()
                .zip(filters)
                .map(|(&k, w)| {
                    let (alpha, gamma2) =
                        awgn_params(&w, &real.h_hat[real.idx(l, k)], &psi_all, real.eta[k]);
                    LocalEstimate {
                        user: k,
                        x_hat: normalized_output(&w, y, real.eta[k]),
                        alpha,
                        gamma2,
                        filter: w,
                    }
                })
                .collect()
        }
        Some(soft) => {
            let mut unserved = vec![true; k_count];
            served.iter().for_each(|&k| unserved[k] = false);
            let mut unserved_cov =
                received_covariance(real, l, (0..k_count).filter(|&i| unserved[i]));
            unserved_cov -= linalg::identity(real.antennas) * Complex64::new(real.sigma2, 0.0);
            served
                .iter()
                .map(|&k| {
                    let idx_k = real.idx(l, k);
                    let mut q = linalg::identity(real.antennas) * Complex64::new(real.sigma2, 0.0);
                    let mut residual = y.clone();
                    for &i in served {
                        let idx = real.idx(l, i);
                        let eta = real.eta[i];
                        if i == k {
                            linalg::add_outer(&mut q, &real.h_hat[idx], eta);
                        } else {
                            linalg::add_outer(&mut q, &real.h_hat[idx], eta * soft.variance[i]);
                            let h = &real.h_hat[idx] * Complex64::new(eta.sqrt(), 0.0);
                            for (t, &m) in soft.mean[i].iter().enumerate() {
                                residual
                                    .column_mut(t)
                                    .axpy(-m, &h, Complex64::new(1.0, 0.0));
                            }
                        }
                        q += &real.c[idx] * Complex64::new(eta, 0.0);
                    }
                    let rhs = &real.h_hat[idx_k] * Complex64::new(real.eta[k], 0.0);
                    let w = linalg::solve_hermitian_vec(&q, &rhs).value;
                    let (alpha, gamma2) =
                        awgn_params(&w, &real.h_hat[idx_k], &(q + &unserved_cov), real.eta[k]);
                    LocalEstimate {
                        user: k,
                        x_hat: normalized_output(&w, &residual, real.eta[k]),
                        alpha,
                        gamma2,
                        filter: w,
                    }
                })
                .collect()
        }
    }
}

/// `ln(eᵃ + eᵇ)` computed exactly.
pub fn max_star(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    a.max(b) + (-(a - b).abs()).exp().ln_1p()
}

/// Extrinsic LLRs `ln P(b=1)/P(b=0)` of the two bits of one QPSK symbol seen
/// through `x̂ = αx + CN(0, γ²)`, given prior LLRs `lc` of the same bits.
/// Each output excludes its own prior; results are clamped to ±30.
pub fn bit_llr(x_hat: Complex64, alpha: Complex64, gamma2: f64, lc: [f64; 2]) -> [f64; 2] {
    let metric: [f64; 4] = constellation().map(|(_, x)| -(x_hat - alpha * x).norm_sqr() / gamma2);
    // Index = 2·b1 + b2.
    let lg1 = max_star(metric[2], metric[3] + lc[1]) - max_star(metric[0], metric[1] + lc[1]);
    let lg2 = max_star(metric[1], metric[3] + lc[0]) - max_star(metric[0], metric[2] + lc[0]);
    [
        lg1.clamp(-LLR_CLAMP, LLR_CLAMP),
        lg2.clamp(-LLR_CLAMP, LLR_CLAMP),
    ]
}

/// Per-bit extrinsic LLRs for a whole frame; `priors` has two entries per
/// symbol.
pub fn frame_llrs(x_hat: &[Complex64], alpha: Complex64, gamma2: f64, priors: &[f64]) -> Vec<f64> {
    assert_eq!(
        priors.len(),
        2 * x_hat.len(),
        "need two prior LLRs per symbol"
    );
    x_hat
        .iter()
        .zip(priors.chunks_exact(2))
        .flat_map(|(&x, p)| bit_llr(x, alpha, gamma2, [p[0], p[1]]))
        .collect()
}

/// Mean absolute LLR of a frame with no prior information, the per-link
/// reliability score used by LLR-based selection.
pub fn mean_abs_llr(est: &LocalEstimate) -> f64 {
    let zero = vec![0.0; 2 * est.x_hat.len()];
    let llrs = frame_llrs(&est.x_hat, est.alpha, est.gamma2, &zero);
    if llrs.is_empty() {
        return 0.0;
    }
    llrs.iter().map(|l| l.abs()).sum::<f64>() / llrs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::qpsk_map;

    fn direct_llr(x_hat: Complex64, alpha: Complex64, gamma2: f64, lc: [f64; 2]) -> [f64; 2] {
        let p = |b1: u8, b2: u8, prior_other: f64, other_bit: u8| {
            (-(x_hat - alpha * qpsk_map(b1, b2)).norm_sqr() / gamma2
                + other_bit as f64 * prior_other)
                .exp()
        };
        let l1 = ((p(1, 0, lc[1], 0) + p(1, 1, lc[1], 1))
            / (p(0, 0, lc[1], 0) + p(0, 1, lc[1], 1)))
        .ln();
        let l2 = ((p(0, 1, lc[0], 0) + p(1, 1, lc[0], 1))
            / (p(0, 0, lc[0], 0) + p(1, 0, lc[0], 1)))
        .ln();
        [l1, l2]
    }

    #[test]
    fn llr_matches_direct_sum() {
        let cases = [
            (
                Complex64::new(0.3, -0.8),
                Complex64::new(1.0, 0.2),
                0.7,
                [0.0, 0.0],
            ),
            (
                Complex64::new(-1.2, 0.4),
                Complex64::new(0.5, -0.5),
                2.0,
                [3.0, -1.5],
            ),
            (
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                1.0,
                [-6.0, 7.0],
            ),
        ];
        for (x, a, g, lc) in cases {
            let got = bit_llr(x, a, g, lc);
            let want = direct_llr(x, a, g, lc);
            assert!((got[0] - want[0]).abs() < 1e-12 && (got[1] - want[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_observation_gives_zero_llr() {
        assert_eq!(
            bit_llr(
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                1.0,
                [0.0, 0.0]
            ),
            [0.0, 0.0]
        );
    }

    #[test]
    fn noiseless_symbol_saturates() {
        let x = qpsk_map(1, 0);
        let l = bit_llr(x, Complex64::new(1.0, 0.0), 1e-9, [0.0, 0.0]);
        assert_eq!(l, [30.0, -30.0]);
    }

    #[test]
    fn sign_follows_the_quadrant() {
        for (bits, x) in constellation() {
            let l = bit_llr(x * 0.8, Complex64::new(1.0, 0.0), 0.5, [0.0, 0.0]);
            assert_eq!(u8::from(l[0] > 0.0), bits[0]);
            assert_eq!(u8::from(l[1] > 0.0), bits[1]);
        }
    }

    #[test]
    fn max_star_is_log_sum_exp() {
        for &(a, b) in &[(0.0, 0.0), (1.0, -3.0), (-50.0, 10.0)] {
            let direct = (f64::exp(a) + f64::exp(b)).ln();
            assert!((max_star(a, b) - direct).abs() < 1e-12);
        }
    }
}
