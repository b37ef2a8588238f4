use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cellfree_core::cpu::{estimate_lsfd_stats, lsfd_weights, prelog, spectral_efficiency};
use cellfree_core::harness::{experiment_code, prepare_trial, ExperimentConfig};
use cellfree_core::linalg::CVec;
use cellfree_core::rng::complex_normal;
use cellfree_core::Strategy;

#[test]
fn deselected_aps_carry_zero_weight() {
    let cfg = ExperimentConfig::default();
    let code = experiment_code(&cfg).unwrap();
    let setup = prepare_trial(&cfg, &code, 0).unwrap();
    let point = setup.at_snr(0, 0.0, code.rate());
    let samples = setup.statistics_samples(&cfg, &point);
    let map = setup.select(&cfg, &point, Strategy::Llsf).unwrap();
    let stats = estimate_lsfd_stats(&point.stats, &point.real.eta, &samples, &map);
    let weights = lsfd_weights(&stats, &map, &point.real.eta, point.real.sigma2);
    for k in 0..map.user_count() {
        let full = weights.full(k);
        let g = stats.g_full(k);
        for l in 0..map.ap_count() {
            if !map.serves(k, l) {
                assert_eq!(full[l].norm(), 0.0);
                assert_eq!(g[l].norm(), 0.0);
            }
        }
        assert_eq!(weights.a[k].len(), map.aps_of(k).len());
    }
}

#[test]
fn all_user_interference_weights_are_sinr_optimal_on_any_map() {
    // With every user in the inverted matrix the weights maximize the
    // all-user SINR exactly, whatever the serving sets.
    let cfg = ExperimentConfig::default();
    let code = experiment_code(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..4 {
        let setup = prepare_trial(&cfg, &code, trial).unwrap();
        let point = setup.at_snr(0, 5.0, code.rate());
        let samples = setup.statistics_samples(&cfg, &point);
        let (eta, sigma2) = (&point.real.eta, point.real.sigma2);
        for strategy in [Strategy::Llsf, Strategy::LlrLlsf] {
            let map = setup.select(&cfg, &point, strategy).unwrap();
            let stats = estimate_lsfd_stats(&point.stats, eta, &samples, &map);
            let everyone: Vec<usize> = (0..map.user_count()).collect();
            for k in 0..map.user_count() {
                let a = stats.optimal_weights(k, &everyone, eta, sigma2).value;
                let best = stats.sinr(k, &a, eta, sigma2);
                for _ in 0..50 {
                    let r = CVec::from_fn(a.len(), |_, _| complex_normal(&mut rng));
                    assert!(stats.sinr(k, &r, eta, sigma2) <= best * (1.0 + 1e-9));
                }
            }
        }
    }
}

#[test]
fn more_aps_do_not_lower_the_optimal_sinr_bound() {
    // Serving a user from every AP with all-user weights can only help.
    let cfg = ExperimentConfig::default();
    let code = experiment_code(&cfg).unwrap();
    let setup = prepare_trial(&cfg, &code, 1).unwrap();
    let point = setup.at_snr(0, 0.0, code.rate());
    let samples = setup.statistics_samples(&cfg, &point);
    let (eta, sigma2) = (&point.real.eta, point.real.sigma2);
    let everyone: Vec<usize> = (0..cfg.scenario.user_count).collect();
    let full = setup.select(&cfg, &point, Strategy::AllAps).unwrap();
    let stats_full = estimate_lsfd_stats(&point.stats, eta, &samples, &full);
    // Partial map with the same local filters: zero weights outside M_k.
    let partial = setup.select(&cfg, &point, Strategy::Llsf).unwrap();
    for k in 0..full.user_count() {
        let best = stats_full.sinr(
            k,
            &stats_full.optimal_weights(k, &everyone, eta, sigma2).value,
            eta,
            sigma2,
        );
        let mut restricted = stats_full.optimal_weights(k, &everyone, eta, sigma2).value;
        for l in 0..full.ap_count() {
            if !partial.serves(k, l) {
                restricted[l] = Default::default();
            }
        }
        assert!(stats_full.sinr(k, &restricted, eta, sigma2) <= best * (1.0 + 1e-9));
    }
}

#[test]
fn spectral_efficiency_is_monotone() {
    let pre = prelog(12, 140);
    let mut last = -1.0;
    for i in 0..200 {
        let sinr = i as f64 * 0.37;
        let se = spectral_efficiency(sinr, 12, 140);
        assert!(se >= last);
        last = se;
    }
    assert_eq!(spectral_efficiency(0.0, 12, 140), 0.0);
    assert!((spectral_efficiency(1.0, 12, 140) - pre).abs() < 1e-15);
    assert_eq!(spectral_efficiency(-3.0, 12, 140), 0.0);
}
