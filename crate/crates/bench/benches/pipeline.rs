use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use rand::Rng;
use ris_stc::{
    demod_symbols, dft_harmonic, joint_code, power_pattern, slot_for_harmonic, space_coding,
    symbols_to_timecode, synthesize_rx, CodingMode, QamOrder, SlotCode,
};
use ris_stc_bench::reference_params;

fn bench_synthesis(c: &mut Criterion) {
    let params = reference_params(64);
    let mut rng = ris_stc::rng::stream_rng(1, &[]);
    let bits: Vec<u8> = (0..64 * 4).map(|_| rng.gen_range(0..2u8)).collect();
    let symbols = ris_stc::link::frame_symbols(&bits, QamOrder::Qam16).unwrap();
    let tc = symbols_to_timecode(&symbols, params.period(), params.control_clock).unwrap();
    let space = space_coding(&params.geom, &params.dir);
    let schedule = joint_code(&space, &tc);
    let samples = schedule.tick_count() as u64;

    let mut g = c.benchmark_group("synthesis");
    g.throughput(Throughput::Elements(samples));
    g.bench_function("frame_16x16_77sym", |b| {
        b.iter(|| synthesize_rx(&params.geom, &schedule, &params.dir, params.sample_rate).unwrap())
    });
    g.finish();
}

fn bench_pattern(c: &mut Criterion) {
    let params = reference_params(1);
    let space = space_coding(&params.geom, &params.dir);
    let grid = ris_stc::patterns::default_grid();
    let mut g = c.benchmark_group("pattern");
    g.throughput(Throughput::Elements(grid.len() as u64));
    g.bench_function("cut_1801_points", |b| {
        b.iter(|| power_pattern(&params.geom, &space, &grid, 0.0).unwrap())
    });
    g.finish();
}

fn bench_harmonics(c: &mut Criterion) {
    let mut g = c.benchmark_group("harmonics");
    g.bench_function("solve_and_forward", |b| {
        let table = QamOrder::Qam64.constellation();
        b.iter(|| {
            let mut acc = 0.0;
            for s in &table {
                let slot = slot_for_harmonic(s * ris_stc::MAX_FIRST_HARMONIC, 1e-5).unwrap();
                acc += slot.harmonic(1).norm_sqr();
            }
            acc
        })
    });
    g.bench_function("dft_oracle_10k", |b| {
        let slot = SlotCode::new(0.3, 0.2e-5, 1e-5).unwrap();
        b.iter(|| dft_harmonic(&slot, 1, 10_000))
    });
    g.finish();
}

fn bench_rx(c: &mut Criterion) {
    let params = reference_params(64);
    let mut rng = ris_stc::rng::stream_rng(2, &[]);
    let bits: Vec<u8> = (0..64 * 4).map(|_| rng.gen_range(0..2u8)).collect();
    let (wave, _tc) =
        ris_stc::link::transmit_frame(&params, QamOrder::Qam16, CodingMode::Joint, &bits).unwrap();
    let fmt = params.frame_format().unwrap();

    let mut g = c.benchmark_group("rx");
    g.throughput(Throughput::Elements(wave.len() as u64));
    g.bench_function("demod_frame", |b| {
        b.iter_batched(
            || wave.clone(),
            |w| demod_symbols(&w, 0, &fmt, params.switch_rate).unwrap(),
            BatchSize::LargeInput,
        )
    });
    g.finish();
}

criterion_group!(benches, bench_synthesis, bench_pattern, bench_harmonics, bench_rx);
criterion_main!(benches);
