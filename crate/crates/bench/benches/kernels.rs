use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use cellfree_core::apfrontend::{bit_llr, detect_local, mmse_filters};
use cellfree_core::codec::{build_code, CodedFrame, DecodeOptions, DecoderWorkspace};
use cellfree_core::harness::{experiment_code, prepare_trial, ExperimentConfig};
use cellfree_core::rng::SimRng;
use cellfree_core::selection::{select, SelectionInput};
use cellfree_core::Strategy;

fn decoder(c: &mut Criterion) {
    let code = build_code(256, 2024).unwrap();
    let mut rng = SimRng::seed_from_u64(1);
    let frame = CodedFrame::random(&code, &mut rng).unwrap();
    let llrs: Vec<f64> = frame
        .codeword
        .iter()
        .map(|&b| {
            let s = if b == 1 { 1.0 } else { -1.0 };
            2.5 * (s + 0.8 * rng.random_range(-1.0..1.0))
        })
        .collect();
    let mut ws = DecoderWorkspace::default();
    c.bench_function("ldpc_decode_256_20it", |b| {
        b.iter(|| {
            code.decode_with(
                black_box(&llrs),
                DecodeOptions {
                    max_iterations: 20,
                    min_iterations: 20,
                },
                &mut ws,
            )
        })
    });
}

fn demapper(c: &mut Criterion) {
    let x = Complex64::new(0.4, -0.9);
    let alpha = Complex64::new(0.8, 0.1);
    c.bench_function("bit_llr", |b| {
        b.iter(|| bit_llr(black_box(x), black_box(alpha), 0.7, [1.5, -0.3]))
    });
}

fn ap_side(c: &mut Criterion) {
    let cfg = ExperimentConfig::default();
    let code = experiment_code(&cfg).unwrap();
    let setup = prepare_trial(&cfg, &code, 0).unwrap();
    let point = setup.at_snr(0, 5.0, code.rate());
    let link = point.link();
    let served: Vec<usize> = (0..cfg.scenario.user_count).collect();
    c.bench_function("mmse_filters_desk_ap", |b| {
        b.iter(|| mmse_filters(&link, 0, black_box(&served)))
    });
    c.bench_function("detect_local_desk_ap", |b| {
        b.iter(|| detect_local(&link, 0, black_box(&served), &point.y[0], None))
    });
    let input: SelectionInput = point.selection_input();
    let mut rng = SimRng::seed_from_u64(2);
    c.bench_function("select_llr_m_desk", |b| {
        b.iter(|| select(Strategy::LlrM, black_box(&input), &mut rng))
    });
}

criterion_group!(benches, decoder, demapper, ap_side);
criterion_main!(benches);
