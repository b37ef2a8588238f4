use nalgebra::DMatrix;
use num_complex::Complex64;

use super::lsfd::LsfdWeights;
use crate::apfrontend::{
    detect_local, frame_llrs, LinkState, LocalEstimate, SoftSymbols, GAMMA2_FLOOR,
};
use crate::codec::{
    constellation, soft_symbol, CodedFrame, DecodeOptions, DecoderWorkspace, LdpcCode,
};
use crate::selection::ServiceMap;

/// Combined soft estimate of one user at the CPU, `x̃ = α̃ x + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct Combined {
    pub x_tilde: Vec<Complex64>,
    pub alpha: Complex64,
    pub gamma2: f64,
}

/// Nearest constellation point of `z / alpha`.
fn slice(z: Complex64, alpha: Complex64) -> Complex64 {
    let pts = constellation();
    let mut best = pts[0].1;
    let mut best_d = f64::INFINITY;
    for (_, x) in pts {
        let d = (z - alpha * x).norm_sqr();
        if d < best_d {
            best_d = d;
            best = x;
        }
    }
    best
}

/// Effective noise variance of `x̃ = α̃ x + e` estimated over the frame.
///
/// Two estimates are formed: the second moment minus the signal power, which
/// is accurate when noise dominates, and the decision-directed residual, which
/// is accurate when the signal dominates. The larger one is kept.
fn frame_noise_variance(x_tilde: &[Complex64], alpha: Complex64) -> f64 {
    if x_tilde.is_empty() {
        return GAMMA2_FLOOR;
    }
    let t = x_tilde.len() as f64;
    let moment = x_tilde.iter().map(|z| z.norm_sqr()).sum::<f64>() / t - alpha.norm_sqr();
    let directed = x_tilde
        .iter()
        .map(|&z| (z - alpha * slice(z, alpha)).norm_sqr())
        .sum::<f64>()
        / t;
    moment.max(directed).max(GAMMA2_FLOOR)
}

/// `x̃_k = Σ_{l∈M_k} a*_kl x̂_kl` for every user; `local[l]` holds the
/// estimates produced at AP `l`. Users without any serving AP get a zero
/// stream.
pub fn combine(
    weights: &LsfdWeights,
    local: &[Vec<LocalEstimate>],
    symbols: usize,
) -> Vec<Combined> {
    (0..weights.a.len())
        .map(|k| {
            let mut x_tilde = vec![Complex64::new(0.0, 0.0); symbols];
            let mut alpha = Complex64::new(0.0, 0.0);
            for (m, &l) in weights.aps[k].iter().enumerate() {
                let Some(est) = local[l].iter().find(|e| e.user == k) else {
                    continue;
                };
                let a = weights.a[k][m].conj();
                alpha += a * est.alpha;
                for (acc, &x) in x_tilde.iter_mut().zip(&est.x_hat) {
                    *acc += a * x;
                }
            }
            let gamma2 = frame_noise_variance(&x_tilde, alpha);
            Combined {
                x_tilde,
                alpha,
                gamma2,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IddSettings {
    pub n_outer: usize,
    pub n_inner: usize,
    /// Cancel decoder-fed soft symbols at the APs from the second outer
    /// iteration on. Without it only the bit priors change between
    /// iterations.
    pub soft_ic: bool,
}

impl Default for IddSettings {
    fn default() -> Self {
        Self {
            n_outer: 3,
            n_inner: 20,
            soft_ic: true,
        }
    }
}

/// Decoder decisions after one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Hard-decision codeword per user.
    pub hard_bits: Vec<Vec<u8>>,
    pub converged: Vec<bool>,
    /// Mean |LLR| of the detector output per user.
    pub mean_abs_llr: Vec<f64>,
}

fn soft_feedback(frames: &[CodedFrame]) -> SoftSymbols {
    let mut mean = Vec::with_capacity(frames.len());
    let mut variance = Vec::with_capacity(frames.len());
    for f in frames {
        let (m, v): (Vec<Complex64>, Vec<f64>) = f
            .prior_llrs
            .chunks_exact(2)
            .map(|p| soft_symbol(p[0], p[1]))
            .unzip();
        variance.push(if v.is_empty() {
            1.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        });
        mean.push(m);
    }
    SoftSymbols { mean, variance }
}

/// Runs `n_outer` rounds of AP detection, CPU combining, demapping and LDPC
/// decoding. `y[l]` is the N×T observation at AP `l`. Each frame's prior
/// LLRs start at zero and are replaced by the decoder's extrinsic output
/// after every round.
pub fn run_idd(
    link: &LinkState,
    map: &ServiceMap,
    weights: &LsfdWeights,
    y: &[DMatrix<Complex64>],
    code: &LdpcCode,
    frames: &mut [CodedFrame],
    settings: IddSettings,
) -> Vec<IterationRecord> {
    let l_count = map.ap_count();
    let served: Vec<Vec<usize>> = (0..l_count).map(|l| map.users_of(l)).collect();
    let symbols = y.first().map_or(0, |m| m.ncols());
    let opts = DecodeOptions {
        max_iterations: settings.n_inner,
        min_iterations: 1,
    };
    let mut ws = DecoderWorkspace::default();
    let mut records = Vec::with_capacity(settings.n_outer);

    for f in frames.iter_mut() {
        f.prior_llrs.iter_mut().for_each(|p| *p = 0.0);
        f.iteration = 0;
    }
    let mut plain_local: Option<Vec<Vec<LocalEstimate>>> = None;

    for it in 1..=settings.n_outer {
        let local = if settings.soft_ic && it > 1 {
            let fb = soft_feedback(frames);
            (0..l_count)
                .map(|l| detect_local(link, l, &served[l], &y[l], Some(&fb)))
                .collect()
        } else {
            plain_local
                .get_or_insert_with(|| {
                    (0..l_count)
                        .map(|l| detect_local(link, l, &served[l], &y[l], None))
                        .collect()
                })
                .clone()
        };
        let combined = combine(weights, &local, symbols);

        let mut record = IterationRecord {
            hard_bits: Vec::with_capacity(frames.len()),
            converged: Vec::with_capacity(frames.len()),
            mean_abs_llr: Vec::with_capacity(frames.len()),
        };
        for (f, c) in frames.iter_mut().zip(&combined) {
            f.detector_llrs = frame_llrs(&c.x_tilde, c.alpha, c.gamma2, &f.prior_llrs);
            let n = f.detector_llrs.len().max(1) as f64;
            record
                .mean_abs_llr
                .push(f.detector_llrs.iter().map(|l| l.abs()).sum::<f64>() / n);
            let out = code.decode_with(&f.detector_llrs, opts, &mut ws);
            f.prior_llrs = out.extrinsic;
            f.iteration = it;
            record.hard_bits.push(out.hard_bits);
            record.converged.push(out.converged);
        }
        records.push(record);
    }
    records
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::qpsk_map;
    use crate::linalg::CVec;

    fn estimate(user: usize, x_hat: Vec<Complex64>, alpha: f64) -> LocalEstimate {
        LocalEstimate {
            user,
            x_hat,
            alpha: Complex64::new(alpha, 0.0),
            gamma2: 0.1,
            filter: CVec::zeros(1),
        }
    }

    fn weights(aps: Vec<usize>, a: Vec<Complex64>, ap_count: usize) -> LsfdWeights {
        LsfdWeights {
            aps: vec![aps],
            a: vec![CVec::from_vec(a)],
            ap_count,
            regularized: vec![],
        }
    }

    #[test]
    fn single_ap_unit_weight_passes_through() {
        let x = vec![Complex64::new(0.3, -0.2), Complex64::new(-1.0, 0.5)];
        let local = vec![vec![estimate(0, x.clone(), 0.9)]];
        let out = combine(
            &weights(vec![0], vec![Complex64::new(1.0, 0.0)], 1),
            &local,
            2,
        );
        assert_eq!(out[0].x_tilde, x);
        assert_eq!(out[0].alpha, Complex64::new(0.9, 0.0));
    }

    #[test]
    fn two_ap_sum() {
        let x1 = vec![Complex64::new(1.0, 2.0)];
        let x2 = vec![Complex64::new(-0.5, 0.25)];
        let a1 = Complex64::new(0.5, 0.5);
        let a2 = Complex64::new(-1.0, 0.2);
        let local = vec![
            vec![estimate(0, x1.clone(), 1.0)],
            vec![estimate(0, x2.clone(), 1.0)],
        ];
        let out = combine(&weights(vec![0, 1], vec![a1, a2], 2), &local, 1);
        let want = a1.conj() * x1[0] + a2.conj() * x2[0];
        assert!((out[0].x_tilde[0] - want).norm() < 1e-12);
    }

    #[test]
    fn zero_weight_gives_zero_stream() {
        let local = vec![vec![estimate(0, vec![Complex64::new(1.0, 1.0)], 1.0)]];
        let out = combine(
            &weights(vec![0], vec![Complex64::new(0.0, 0.0)], 1),
            &local,
            1,
        );
        assert_eq!(out[0].x_tilde[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn noiseless_frame_has_floor_variance() {
        let x: Vec<Complex64> = (0..8)
            .map(|i| qpsk_map((i & 1) as u8, (i >> 1 & 1) as u8) * 2.0)
            .collect();
        let v = frame_noise_variance(&x, Complex64::new(2.0, 0.0));
        assert!(v < 1e-10);
    }
}
