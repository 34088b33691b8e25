use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use mfh_bench::{signal, stream};
use mfh_core::entropy::{decode, encode_stream, BlockLimit, Coder};
use mfh_core::quantizer::{dpcm_encode, QuantizerConfig};
use mfh_core::waveform::{generate_ofdm, OfdmConfig};

fn entropy_coders(c: &mut Criterion) {
    let sig = signal(10);
    let mut group = c.benchmark_group("entropy");
    for config in [QuantizerConfig::pcm(15), QuantizerConfig::dpcm(8)] {
        let s = stream(&sig, &config);
        group.throughput(Throughput::Elements(s.codewords.len() as u64));
        for coder in [Coder::Huffman, Coder::Arithmetic] {
            let label = format!("{}-{}", config.mode.name(), config.qb);
            group.bench_with_input(BenchmarkId::new(format!("encode/{coder}"), &label), &s, |b, s| {
                b.iter(|| encode_stream(s, coder, BlockLimit::default()).unwrap())
            });
            let coded = encode_stream(&s, coder, BlockLimit::default()).unwrap();
            group.bench_with_input(BenchmarkId::new(format!("decode/{coder}"), &label), &coded, |b, coded| {
                b.iter(|| decode(coded).unwrap())
            });
        }
    }
    group.finish();
}

fn signal_chain(c: &mut Criterion) {
    let mut group = c.benchmark_group("signal");
    let ofdm = OfdmConfig {
        num_symbols: 10,
        ..OfdmConfig::default()
    };
    group.throughput(Throughput::Elements(ofdm.sample_count() as u64));
    group.bench_function("generate_ofdm", |b| b.iter(|| generate_ofdm(&ofdm).unwrap()));
    let rail: Vec<f64> = generate_ofdm(&ofdm).unwrap().in_phase();
    group.bench_function("dpcm_encode/8", |b| b.iter(|| dpcm_encode(&rail, &QuantizerConfig::dpcm(8)).unwrap()));
    group.finish();
}

criterion_group!(benches, entropy_coders, signal_chain);
criterion_main!(benches);
