use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cellfree_core::linalg::{trace_re, CMat, CVec};
use cellfree_core::netmodel::{
    build_layout, large_scale_fading, link_distance, pathloss_db, spatial_correlation,
    ChannelStatistics, NetworkRealization, RealizationSnapshot, ScenarioConfig,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn shadowing_has_configured_moments() {
    let cfg = ScenarioConfig::with_size(16, 2, 8);
    let layout = build_layout(&cfg, 3);
    let mut r = rng(1);
    let mut samples = Vec::new();
    for _ in 0..400 {
        let beta = large_scale_fading(&cfg, &layout, &mut r);
        for k in 0..8 {
            for l in 0..16 {
                let d = link_distance(
                    layout.ap_positions[l],
                    layout.user_positions[k],
                    cfg.ap_user_height_delta,
                );
                samples.push(10.0 * beta[(k, l)].log10() - pathloss_db(d));
            }
        }
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let sd = (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n).sqrt();
    assert!(mean.abs() < 0.05, "mean {mean}");
    assert!((sd - 4.0).abs() < 0.05, "sd {sd}");
}

#[test]
fn correlation_trace_and_hermitian() {
    for (angle, asd) in [(0.3, 0.26), (-1.2, 0.1), (2.0, 0.0)] {
        let r = spatial_correlation(2.5, angle, asd, 4).unwrap();
        assert!((trace_re(&r) - 10.0).abs() < 1e-9);
        assert!((&r - r.adjoint()).norm() < 1e-12);
    }
}

#[test]
fn drawn_channels_match_correlation() {
    let r0 = spatial_correlation(1.0, 0.4, 0.3, 3).unwrap();
    let stats = ChannelStatistics::new(&[r0.clone()], &[0], 1, &[1.0], 1.0);
    let mut g = rng(2);
    let count = 20_000;
    let mut acc = CMat::zeros(3, 3);
    for _ in 0..count {
        let h = &stats.draw_channels(&mut g)[0];
        acc += h * h.adjoint();
    }
    acc /= Complex64::new(count as f64, 0.0);
    assert!((acc - &r0).norm() / r0.norm() < 0.03);
}

#[test]
fn scalar_estimator_matches_closed_form() {
    // N = 1: ĥ = √(pτ) β / (pτβ + σ²) · y and C = β σ² / (pτβ + σ²).
    let (beta, p, tau, sigma2) = (0.7, 2.0, 3usize, 0.4);
    let r = CMat::from_element(1, 1, Complex64::new(beta, 0.0));
    let stats = ChannelStatistics::new(&[r], &[0], tau, &[p], sigma2);
    let pt = p * tau as f64;
    assert!((stats.c[0][(0, 0)].re - beta * sigma2 / (pt * beta + sigma2)).abs() < 1e-12);
    let h = vec![CVec::from_element(1, Complex64::new(0.3, -0.2))];
    let noise = vec![CVec::from_element(1, Complex64::new(1.0, 0.5)); tau];
    let y = pt.sqrt() * h[0][0] + sigma2.sqrt() * noise[0][0];
    let expected = pt.sqrt() * beta / (pt * beta + sigma2) * y;
    assert!((stats.estimate(&h, &noise)[0][0] - expected).norm() < 1e-12);
}

#[test]
fn estimation_error_is_uncorrelated_with_estimate() {
    let r = vec![
        spatial_correlation(1.0, 0.2, 0.3, 2).unwrap(),
        spatial_correlation(0.3, -0.9, 0.3, 2).unwrap(),
    ];
    let stats = ChannelStatistics::new(&r, &[0, 0], 1, &[1.0, 0.5], 0.2);
    let mut g = rng(4);
    let count = 20_000;
    let mut cross = CMat::zeros(2, 2);
    let mut power = 0.0;
    for _ in 0..count {
        let (h, h_hat) = stats.draw(&mut g);
        let err = &h[0] - &h_hat[0];
        cross += &h_hat[0] * err.adjoint();
        power += h[0].norm_squared();
    }
    let scale = power / count as f64;
    assert!(cross.norm() / count as f64 / scale < 0.02);
}

#[test]
fn shared_pilot_estimates_are_parallel() {
    // Identical correlation on a shared pilot: the two estimates differ only
    // by the ratio of pilot amplitudes.
    let r0 = spatial_correlation(1.0, 0.5, 0.2, 3).unwrap();
    let stats = ChannelStatistics::new(&[r0.clone(), r0], &[0, 0], 1, &[1.0, 0.25], 0.1);
    let (_, h_hat) = stats.draw(&mut rng(5));
    let diff = &h_hat[1] - &h_hat[0] * Complex64::new(0.5, 0.0);
    assert!(diff.norm() < 1e-9 * h_hat[0].norm().max(1.0));
}

#[test]
fn snapshot_round_trip() {
    let cfg = ScenarioConfig::with_size(4, 2, 3);
    let layout = build_layout(&cfg, 9);
    let mut real = NetworkRealization::generate(&cfg, &layout, &mut rng(6)).unwrap();
    real.draw_channels(&mut rng(7));
    real.mmse_estimate(&mut rng(8));
    let json = real.snapshot().to_json().unwrap();
    let back = RealizationSnapshot::from_json(&json)
        .unwrap()
        .into_realization()
        .unwrap();
    assert_eq!(back.beta, real.beta);
    assert_eq!(back.h_hat, real.h_hat);
    assert_eq!(back.pilot_of, real.pilot_of);
}
