use mfh_core::bitio::{BitReader, BitWriter};
use mfh_core::budget::{channel_count, cpri_equivalent_rate, qb_for_channels, BudgetParams};
use mfh_core::entropy::{decode, encode_stream, huffman_build, BlockLimit, CodedBitstream, Coder, ProbabilityModel};
use mfh_core::quantizer::{
    codeword_histogram, dequantize, quantize_channel, stream_from_bytes, stream_to_bytes, Channel, CodewordStream,
    QuantMode, QuantizerConfig,
};
use proptest::prelude::*;

fn stream(codewords: Vec<u32>, qb: u8) -> CodewordStream {
    CodewordStream {
        codewords,
        qb,
        mode: QuantMode::Pcm,
        full_scale: 1.0,
        channel: Channel::Q,
    }
}

/// Streams over a `qb`-bit alphabet with a skewed symbol distribution.
fn skewed_stream() -> impl Strategy<Value = CodewordStream> {
    (1u8..=12).prop_flat_map(|qb| {
        let max = (1u32 << qb) - 1;
        prop::collection::vec((0u32..=max, 0u32..4), 1..600)
            .prop_map(move |v| stream(v.into_iter().map(|(c, s)| c >> s).collect(), qb))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn both_coders_are_lossless(s in skewed_stream(), max_symbols in 1u32..600, max_info_bits in 1u32..300) {
        let limit = BlockLimit { max_info_bits, max_symbols };
        for coder in [Coder::Huffman, Coder::Arithmetic] {
            let coded = encode_stream(&s, coder, limit).unwrap();
            let parsed = CodedBitstream::from_bytes(&coded.to_bytes()).unwrap();
            prop_assert_eq!(decode(&parsed).unwrap(), s.codewords.clone());
        }
    }

    #[test]
    fn huffman_code_is_complete_and_prefix_free(s in skewed_stream()) {
        let model = codeword_histogram(&s).unwrap();
        let tree = huffman_build(&model).unwrap();
        prop_assert!(tree.is_prefix_free());
        let h = model.entropy();
        if model.len() == 1 {
            // A lone symbol still costs one bit.
            prop_assert_eq!(tree.avg_code_length(), 1.0);
        } else {
            prop_assert!(tree.kraft_sum_is_one());
            prop_assert!(h <= tree.avg_code_length() + 1e-12);
            prop_assert!(tree.avg_code_length() < h + 1.0);
        }
    }

    #[test]
    fn arithmetic_within_block_overhead_of_entropy(s in skewed_stream()) {
        let model = codeword_histogram(&s).unwrap();
        let coded = encode_stream(&s, Coder::Arithmetic, BlockLimit::default()).unwrap();
        let ideal = model.entropy() * s.codewords.len() as f64;
        // At most two termination bits per block.
        prop_assert!(coded.payload_bits as f64 <= ideal + 2.0 * coded.blocks.len() as f64 + 1e-6);
    }

    #[test]
    fn histogram_is_a_distribution(s in skewed_stream()) {
        let model = codeword_histogram(&s).unwrap();
        let total: f64 = model.entries().iter().map(|e| e.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(model.entries().iter().all(|e| e.probability > 0.0 && e.codeword < 1 << s.qb));
        prop_assert_eq!(model.total_count(), s.codewords.len() as u64);
    }

    #[test]
    fn quantized_stream_file_roundtrip(x in prop::collection::vec(-3.0f64..3.0, 1..300), qb in 2u8..=16, dpcm in any::<bool>()) {
        let config = if dpcm { QuantizerConfig::dpcm(qb) } else { QuantizerConfig::pcm(qb) };
        let q = quantize_channel(&x, &config, 2.5, Channel::I).unwrap();
        let parsed = stream_from_bytes(&stream_to_bytes(&q.stream).unwrap()).unwrap();
        prop_assert_eq!(&parsed, &q.stream);
        prop_assert_eq!(dequantize(&parsed).unwrap(), q.reconstruction);
    }

    #[test]
    fn bit_writer_reader_roundtrip(fields in prop::collection::vec((any::<u64>(), 0u32..=64), 0..50)) {
        let mut w = BitWriter::new();
        for &(v, n) in &fields {
            w.push_bits(u128::from(v), n);
        }
        let mut r = BitReader::new(w.as_bytes(), w.len());
        for &(v, n) in &fields {
            let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            prop_assert_eq!(r.read_bits(n).unwrap(), v & mask);
        }
        prop_assert_eq!(r.remaining(), 0);
    }

    #[test]
    fn budget_inversion_roundtrips(channels in 1u64..5000, fec in 0.0f64..0.3) {
        let p = BudgetParams::default().with_fec(fec);
        let qb = qb_for_channels(channels as f64, &p).unwrap();
        prop_assert_eq!(channel_count(qb, &p).unwrap(), channels);
        let rate = cpri_equivalent_rate(qb, &p).unwrap();
        prop_assert!((rate * qb - 10.08 * (1.0 - fec)).abs() < 1e-9);
    }

    #[test]
    fn model_rejects_nothing_it_built(s in skewed_stream()) {
        let model = codeword_histogram(&s).unwrap();
        let rebuilt = ProbabilityModel::from_counts(s.qb, model.entries().iter().map(|e| (e.codeword, e.count))).unwrap();
        prop_assert_eq!(rebuilt, model);
    }
}
