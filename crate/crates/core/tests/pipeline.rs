use mfh_core::entropy::{encode_stream, BlockLimit, Coder};
use mfh_core::pipeline::{export_histogram, histogram_summary, run_pipeline, run_sweep, RunConfig, SweepSpec};
use mfh_core::quantizer::{codeword_histogram, quantize_iq, QuantizerConfig};
use mfh_core::scheme::{ModeKind, Scheme};
use mfh_core::waveform::{generate_ofdm, OfdmConfig};
use mfh_core::{budget, Error};

fn config(qam_order: u32, num_symbols: usize) -> RunConfig {
    let mut c = RunConfig::default();
    c.ofdm.qam_order = qam_order;
    c.ofdm.num_symbols = num_symbols;
    c
}

#[test]
fn dpcm_ac_15_bits_carries_4096_qam() {
    let mut c = config(4096, 20);
    c.quantizer = QuantizerConfig::dpcm(15);
    c.coder = Some(Coder::Arithmetic);
    c.evm_thresholds.set(4096, 0.5).unwrap();
    let r = run_pipeline(&c).unwrap();
    assert!(r.metrics.passes_threshold, "EVM {}", r.metrics.evm_percent);
    assert!(r.metrics.effective_qb < 15.0);
}

#[test]
fn unset_threshold_is_a_config_error() {
    let err = run_pipeline(&config(4096, 2)).unwrap_err();
    assert!(matches!(err, Error::ThresholdUnset(4096)));
    assert!(err.is_config());
}

#[test]
fn sweep_rows_match_budget_and_coders_order() {
    let mut c = config(64, 30);
    c.sweep = Some(SweepSpec {
        qb_list: vec![6, 10, 15],
        qam_order_list: vec![64],
        scheme_list: vec![
            Scheme::new(ModeKind::Pcm, Some(Coder::Huffman)),
            Scheme::new(ModeKind::Pcm, Some(Coder::Arithmetic)),
            Scheme::new(ModeKind::Dpcm, Some(Coder::Huffman)),
            Scheme::new(ModeKind::Dpcm, Some(Coder::Arithmetic)),
        ],
    });
    let s = run_sweep(&c).unwrap();
    for row in &s.rows {
        let m = row.metrics.as_ref().unwrap();
        assert_eq!(m.channels, budget::channel_count(m.effective_qb, &c.budget).unwrap());
        assert_eq!(m.rate_tbps, budget::cpri_equivalent_rate(m.effective_qb, &c.budget).unwrap());
    }
    for mode in [ModeKind::Pcm, ModeKind::Dpcm] {
        for qb in [6, 10, 15] {
            let eff = |coder| {
                s.row(64, Scheme::new(mode, Some(coder)), qb)
                    .unwrap()
                    .metrics
                    .as_ref()
                    .unwrap()
                    .effective_qb
            };
            assert!(eff(Coder::Arithmetic) <= eff(Coder::Huffman) + 0.02);
        }
    }
    let hc_saving = 15.0 - s.row(64, Scheme::new(ModeKind::Pcm, Some(Coder::Huffman)), 15).unwrap().metrics.as_ref().unwrap().effective_qb;
    let ac_saving = 15.0 - s.row(64, Scheme::new(ModeKind::Pcm, Some(Coder::Arithmetic)), 15).unwrap().metrics.as_ref().unwrap().effective_qb;
    assert!((0.9..=1.8).contains(&hc_saving), "{hc_saving}");
    assert!(ac_saving >= hc_saving);
}

#[test]
fn sweep_outputs_are_byte_identical_across_reruns() {
    let mut c = config(16, 3);
    c.sweep = Some(SweepSpec {
        qb_list: vec![4, 8],
        qam_order_list: vec![4, 16],
        scheme_list: vec!["pcm+ac".parse().unwrap(), "dpcm".parse().unwrap()],
    });
    let read_all = |dir: &std::path::Path| {
        ["fig4a.csv", "table1.csv", "sweep.json"].map(|f| std::fs::read(dir.join(f)).unwrap())
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_sweep(&c).unwrap().write_outputs(a.path()).unwrap();
    run_sweep(&c).unwrap().write_outputs(b.path()).unwrap();
    assert_eq!(read_all(a.path()), read_all(b.path()));
    let fig = String::from_utf8(read_all(a.path())[0].clone()).unwrap();
    assert_eq!(fig.lines().count(), 1 + 2 * 2 * 2);
}

#[test]
fn dpcm_entropy_not_above_pcm_at_high_resolution() {
    let signal = generate_ofdm(&OfdmConfig::default()).unwrap();
    for qb in [10u8, 12, 15] {
        let pcm = quantize_iq(&signal.samples, &QuantizerConfig::pcm(qb)).unwrap();
        let dpcm = quantize_iq(&signal.samples, &QuantizerConfig::dpcm(qb)).unwrap();
        for (p, d) in [(&pcm.i, &dpcm.i), (&pcm.q, &dpcm.q)] {
            let hp = codeword_histogram(p).unwrap().entropy();
            let hd = codeword_histogram(d).unwrap().entropy();
            assert!(hd <= hp + 0.1, "qb {qb}: DPCM {hd} vs PCM {hp}");
        }
    }
}

#[test]
fn codeword_histograms_look_gaussian_and_dpcm_is_more_peaked() {
    let signal = generate_ofdm(&OfdmConfig::default()).unwrap();
    let pcm = quantize_iq(&signal.samples, &QuantizerConfig::pcm(15)).unwrap();
    let dpcm = quantize_iq(&signal.samples, &QuantizerConfig::dpcm(15)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = export_histogram(&pcm.i, &dir.path().join("fig3b.csv")).unwrap();
    let d = export_histogram(&dpcm.i, &dir.path().join("fig3c.csv")).unwrap();
    assert!(p.skewness.abs() < 0.1, "{p:?}");
    assert!(p.excess_kurtosis.abs() < 0.2, "{p:?}");
    assert!(d.excess_kurtosis > p.excess_kurtosis, "{d:?} vs {p:?}");
    assert_eq!(histogram_summary(&pcm.i).unwrap(), p);

    let csv = std::fs::read_to_string(dir.path().join("fig3b.csv")).unwrap();
    let total: f64 = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn coded_effective_qb_matches_pipeline() {
    let mut c = config(16, 5);
    c.quantizer = QuantizerConfig::pcm(9);
    c.coder = Some(Coder::Huffman);
    let r = run_pipeline(&c).unwrap();
    let signal = generate_ofdm(&c.seeded_ofdm(16, c.rng_seed)).unwrap();
    let iq = quantize_iq(&signal.samples, &c.quantizer).unwrap();
    let bits: u64 = [&iq.i, &iq.q]
        .iter()
        .map(|s| encode_stream(s, Coder::Huffman, BlockLimit::default()).unwrap().payload_bits)
        .sum();
    assert_eq!(r.metrics.effective_qb, bits as f64 / (2 * iq.i.codewords.len()) as f64);
    assert_eq!(r.samples_per_rail, iq.i.codewords.len());
}
