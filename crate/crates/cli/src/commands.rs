use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use mfh_core::budget;
use mfh_core::entropy::{benchmark_coders, decode, encode_stream, CodedBitstream};
use mfh_core::pipeline::{export_histogram, run_pipeline, run_sweep, HistogramSummary, RunConfig, SweepSpec};
use mfh_core::quantizer::{codeword_histogram, quantize_iq, read_stream, write_stream, CodewordStream, IqStreams};
use mfh_core::scheme::ModeKind;
use mfh_core::waveform::io::{read_signal, write_signal};
use mfh_core::waveform::{compute_evm, demodulate, generate_ofdm};
use mfh_core::Error;
use serde::Serialize;

use crate::{output, Cli, Command, Format};

struct Ctx {
    config: RunConfig,
    format: Format,
}

impl Ctx {
    fn out_path(&self, name: impl AsRef<Path>) -> Result<PathBuf> {
        fs::create_dir_all(&self.config.output_dir)
            .with_context(|| format!("creating {}", self.config.output_dir.display()))?;
        Ok(self.config.output_dir.join(name))
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.global.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.global.seed {
        config.rng_seed = seed;
    }
    if let Some(dir) = &cli.global.out_dir {
        config.output_dir = dir.clone();
    }
    Ok(config)
}

pub fn dispatch(cli: Cli) -> Result<()> {
    let ctx = Ctx {
        config: load_config(&cli)?,
        format: cli.global.format,
    };
    match cli.command {
        Command::Generate {
            qam_order,
            num_symbols,
            output,
        } => generate(&ctx, qam_order, num_symbols, &output),
        Command::Quantize {
            input,
            qb,
            mode,
            clip_sigma,
        } => quantize(ctx, &input, qb, mode.map(Into::into), clip_sigma),
        Command::Encode { input, coder, output } => match coder.coder() {
            Some(coder) => encode(&ctx, &input, coder, output),
            None => Err(Error::Config("encode needs --coder hc or ac".into()).into()),
        },
        Command::Decode {
            input,
            template,
            verify,
            output,
        } => decode_cmd(&ctx, &input, &template, verify, output),
        Command::Evm {
            reference,
            received,
            streams,
        } => evm(&ctx, &reference, received.as_deref(), streams.as_deref()),
        Command::Budget { qb, fec, published } => budget_cmd(ctx, &qb, fec, published),
        Command::Run {
            qam_order,
            qb,
            mode,
            coder,
        } => run(ctx, qam_order, qb, mode.map(Into::into), coder.map(|c| c.coder())),
        Command::Sweep {
            qb_list,
            qam_orders,
            schemes,
            num_symbols,
        } => sweep(ctx, qb_list, qam_orders, schemes, num_symbols),
        Command::Histogram { input, output } => histogram(&ctx, input.as_deref(), output),
        Command::Bench { input, runs } => bench(&ctx, input.as_deref(), runs),
    }
}

#[derive(Serialize)]
struct GenerateReport {
    path: PathBuf,
    qam_order: u32,
    num_symbols: usize,
    samples: usize,
    seed: u64,
}

fn generate(ctx: &Ctx, qam_order: Option<u32>, num_symbols: Option<usize>, output: &Path) -> Result<()> {
    let mut ofdm = ctx.config.seeded_ofdm(qam_order.unwrap_or(ctx.config.ofdm.qam_order), ctx.config.rng_seed);
    if let Some(n) = num_symbols {
        ofdm.num_symbols = n;
    }
    let signal = generate_ofdm(&ofdm)?;
    let path = ctx.out_path(output)?;
    write_signal(&path, &signal.samples, &ofdm)?;
    output::record(
        ctx.format,
        &GenerateReport {
            path,
            qam_order: ofdm.qam_order,
            num_symbols: ofdm.num_symbols,
            samples: signal.samples.len(),
            seed: ofdm.rng_seed,
        },
    )
}

#[derive(Serialize)]
struct StreamReport {
    path: PathBuf,
    channel: String,
    mode: &'static str,
    qb: u8,
    samples: usize,
    full_scale: f64,
    entropy_bits: f64,
}

fn stream_report(path: PathBuf, s: &CodewordStream) -> Result<StreamReport> {
    Ok(StreamReport {
        path,
        channel: s.channel.to_string(),
        mode: s.mode.name(),
        qb: s.qb,
        samples: s.sample_count(),
        full_scale: s.full_scale,
        entropy_bits: codeword_histogram(s)?.entropy(),
    })
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "stream".into())
}

fn quantize(ctx: Ctx, input: &Path, qb: Option<u8>, mode: Option<ModeKind>, clip_sigma: Option<f64>) -> Result<()> {
    let (samples, ofdm) = read_signal(input).with_context(|| format!("reading {}", input.display()))?;
    let mut quantizer = ctx.config.quantizer_for(
        mode.unwrap_or(if ctx.config.quantizer.mode.is_dpcm() { ModeKind::Dpcm } else { ModeKind::Pcm }),
        qb.unwrap_or(ctx.config.quantizer.qb),
    );
    if let Some(c) = clip_sigma {
        quantizer.clip_sigma = c;
    }
    let streams = quantize_iq(&samples, &quantizer)?;
    let base = stem(input);
    let mut reports = Vec::new();
    for s in [&streams.i, &streams.q] {
        let path = ctx.out_path(format!("{base}.{}.mfhq", s.channel.to_string().to_lowercase()))?;
        write_stream(&path, s)?;
        reports.push(stream_report(path, s)?);
    }
    // Dequantized signal for `evm --received`.
    write_signal(&ctx.out_path(format!("{base}.rx.iq"))?, &streams.dequantize()?, &ofdm)?;
    output::records(ctx.format, &reports)
}

#[derive(Serialize)]
struct CodedReport {
    path: PathBuf,
    coder: String,
    original_qb: u8,
    symbols: u64,
    payload_bits: u64,
    blocks: usize,
    effective_qb: f64,
    effective_qb_with_header: f64,
    compression_ratio: f64,
}

fn coded_report(path: PathBuf, c: &CodedBitstream) -> CodedReport {
    CodedReport {
        path,
        coder: c.coder.to_string(),
        original_qb: c.original_qb,
        symbols: c.original_count,
        payload_bits: c.payload_bits,
        blocks: c.blocks.len(),
        effective_qb: c.effective_qbs(),
        effective_qb_with_header: c.effective_qbs_with_header(),
        compression_ratio: c.compression_ratio(),
    }
}

fn encode(ctx: &Ctx, input: &Path, coder: mfh_core::Coder, output: Option<PathBuf>) -> Result<()> {
    let stream = read_stream(input).with_context(|| format!("reading {}", input.display()))?;
    let coded = encode_stream(&stream, coder, ctx.config.block_limit)?;
    let path = match output {
        Some(p) => p,
        None => ctx.out_path(format!("{}.{coder}.mfhc", stem(input)))?,
    };
    coded.write(&path)?;
    output::record(ctx.format, &coded_report(path, &coded))
}

#[derive(Serialize)]
struct DecodeReport {
    path: PathBuf,
    symbols: usize,
    matches_template: bool,
}

fn decode_cmd(ctx: &Ctx, input: &Path, template: &Path, verify: bool, output: Option<PathBuf>) -> Result<()> {
    let coded = CodedBitstream::read(input).with_context(|| format!("reading {}", input.display()))?;
    let template = read_stream(template).with_context(|| format!("reading {}", template.display()))?;
    if coded.original_qb != template.qb {
        return Err(Error::Metadata(format!(
            "coded stream has {} QB, template has {}",
            coded.original_qb, template.qb
        ))
        .into());
    }
    let codewords = decode(&coded)?;
    let matches = codewords == template.codewords;
    if verify && !matches {
        return Err(Error::RoundtripMismatch(format!("{} does not decode to the template", input.display())).into());
    }
    let symbols = codewords.len();
    let stream = CodewordStream { codewords, ..template };
    let path = match output {
        Some(p) => p,
        None => ctx.out_path(format!("{}.decoded.mfhq", stem(input)))?,
    };
    write_stream(&path, &stream)?;
    output::record(
        ctx.format,
        &DecodeReport {
            path,
            symbols,
            matches_template: matches,
        },
    )
}

#[derive(Serialize)]
struct EvmRow {
    qam_order: u32,
    evm_percent: f64,
    threshold_percent: f64,
    passes_threshold: bool,
    worst_symbol_evm_percent: f64,
}

fn evm(ctx: &Ctx, reference: &Path, received: Option<&Path>, streams: Option<&[PathBuf]>) -> Result<()> {
    let (ref_samples, ofdm) = read_signal(reference).with_context(|| format!("reading {}", reference.display()))?;
    let rx = match (received, streams) {
        (Some(path), _) => read_signal(path).with_context(|| format!("reading {}", path.display()))?.0,
        (None, Some([i, q])) => IqStreams {
            i: read_stream(i)?,
            q: read_stream(q)?,
        }
        .dequantize()?,
        _ => return Err(Error::Config("give --received or --streams I Q".into()).into()),
    };
    let reference_grid = demodulate(&ref_samples, &ofdm)?;
    let grid = demodulate(&rx, &ofdm)?;
    let report = compute_evm(&grid, &reference_grid, ofdm.qam_order, &ctx.config.thresholds()?)?;
    let worst = report.per_symbol_evm.iter().copied().fold(0.0, f64::max);
    output::record(
        ctx.format,
        &EvmRow {
            qam_order: report.qam_order,
            evm_percent: report.evm_rms_percent,
            threshold_percent: report.threshold_percent,
            passes_threshold: report.passes_threshold,
            worst_symbol_evm_percent: worst,
        },
    )
}

#[derive(Serialize)]
struct PublishedRow {
    qam_order: u32,
    scheme: String,
    published_channels: u64,
    published_rate_tbps: f64,
    inferred_qb: f64,
    channels: u64,
    rate_tbps: f64,
}

fn budget_cmd(mut ctx: Ctx, qbs: &[f64], fec: Option<f64>, published: bool) -> Result<()> {
    if let Some(f) = fec {
        ctx.config.budget.fec_overhead = f;
    }
    let params = &ctx.config.budget;
    if published {
        let rows = budget::published_table()
            .into_iter()
            .map(|cell| {
                let qb = budget::qb_for_channels(cell.channels as f64, params)?;
                Ok(PublishedRow {
                    qam_order: cell.qam_order,
                    scheme: cell.scheme.to_string(),
                    published_channels: cell.channels,
                    published_rate_tbps: cell.rate_tbps,
                    inferred_qb: qb,
                    channels: budget::channel_count(qb, params)?,
                    rate_tbps: budget::cpri_equivalent_rate(qb, params)?,
                })
            })
            .collect::<mfh_core::Result<Vec<_>>>()?;
        return output::records(ctx.format, &rows);
    }
    if qbs.is_empty() {
        return Err(Error::Config("budget needs --qb or --published".into()).into());
    }
    #[derive(Serialize)]
    struct Row {
        qb: f64,
        channels: u64,
        rate_tbps: f64,
    }
    let rows = qbs
        .iter()
        .map(|&qb| {
            Ok(Row {
                qb,
                channels: budget::channel_count(qb, params)?,
                rate_tbps: budget::cpri_equivalent_rate(qb, params)?,
            })
        })
        .collect::<mfh_core::Result<Vec<_>>>()?;
    output::records(ctx.format, &rows)
}

#[derive(Serialize)]
struct RunRow {
    qam_order: u32,
    scheme: String,
    qb: u8,
    seed: u64,
    samples_per_rail: usize,
    effective_qb: f64,
    entropy_bits: f64,
    evm_percent: f64,
    threshold_percent: f64,
    passes_threshold: bool,
    channels: u64,
    rate_tbps: f64,
}

fn run(
    mut ctx: Ctx,
    qam_order: Option<u32>,
    qb: Option<u8>,
    mode: Option<ModeKind>,
    coder: Option<Option<mfh_core::Coder>>,
) -> Result<()> {
    let config = &mut ctx.config;
    if let Some(q) = qam_order {
        config.ofdm.qam_order = q;
    }
    let mode = mode.unwrap_or(if config.quantizer.mode.is_dpcm() { ModeKind::Dpcm } else { ModeKind::Pcm });
    config.quantizer = config.quantizer_for(mode, qb.unwrap_or(config.quantizer.qb));
    if let Some(c) = coder {
        config.coder = c;
    }
    let r = run_pipeline(config)?;
    let m = r.metrics;
    output::record(
        ctx.format,
        &RunRow {
            qam_order: r.qam_order,
            scheme: r.scheme.to_string(),
            qb: r.qb,
            seed: r.seed,
            samples_per_rail: r.samples_per_rail,
            effective_qb: m.effective_qb,
            entropy_bits: m.entropy_bits,
            evm_percent: m.evm_percent,
            threshold_percent: m.threshold_percent,
            passes_threshold: m.passes_threshold,
            channels: m.channels,
            rate_tbps: m.rate_tbps,
        },
    )
}

fn sweep(
    mut ctx: Ctx,
    qb_list: Vec<u8>,
    qam_orders: Vec<u32>,
    schemes: Vec<mfh_core::Scheme>,
    num_symbols: Option<usize>,
) -> Result<()> {
    let config = &mut ctx.config;
    let spec = config.sweep.get_or_insert_with(SweepSpec::default);
    if !qb_list.is_empty() {
        spec.qb_list = qb_list;
    }
    if !qam_orders.is_empty() {
        spec.qam_order_list = qam_orders;
    }
    if !schemes.is_empty() {
        spec.scheme_list = schemes;
    }
    if let Some(n) = num_symbols {
        config.ofdm.num_symbols = n;
    }
    let result = run_sweep(config)?;
    result.write_outputs(&config.output_dir)?;
    match ctx.format {
        Format::Csv => result.write_rows_csv(std::io::stdout().lock())?,
        Format::Json => output::record(ctx.format, &result)?,
    }
    match result.failed_rows() {
        0 => Ok(()),
        n => anyhow::bail!("{n} of {} sweep rows failed; see the error column", result.rows.len()),
    }
}

#[derive(Serialize)]
struct HistogramRow {
    path: PathBuf,
    mode: &'static str,
    qb: u8,
    #[serde(flatten)]
    summary: HistogramSummary,
}

fn histogram(ctx: &Ctx, input: Option<&Path>, output_path: Option<PathBuf>) -> Result<()> {
    let mut rows = Vec::new();
    let mut export = |s: &CodewordStream, path: PathBuf| -> Result<()> {
        let summary = export_histogram(s, &path).with_context(|| format!("writing {}", path.display()))?;
        rows.push(HistogramRow {
            path,
            mode: s.mode.name(),
            qb: s.qb,
            summary,
        });
        Ok(())
    };
    match input {
        Some(input) => {
            let s = read_stream(input).with_context(|| format!("reading {}", input.display()))?;
            let path = match output_path {
                Some(p) => p,
                None => ctx.out_path(format!("{}.hist.csv", stem(input)))?,
            };
            export(&s, path)?;
        }
        None => {
            let c = &ctx.config;
            let signal = generate_ofdm(&c.seeded_ofdm(c.ofdm.qam_order, c.rng_seed))?;
            for (mode, name) in [(ModeKind::Pcm, "fig3b.csv"), (ModeKind::Dpcm, "fig3c.csv")] {
                let streams = quantize_iq(&signal.samples, &c.quantizer_for(mode, c.quantizer.qb))?;
                export(&streams.i, ctx.out_path(name)?)?;
            }
        }
    }
    // Flattened structs cannot go through the CSV serializer.
    match ctx.format {
        Format::Json => output::records(ctx.format, &rows),
        Format::Csv => {
            println!("path,mode,qb,samples,distinct_codewords,entropy_bits,mean,sigma,skewness,excess_kurtosis");
            for r in &rows {
                let s = &r.summary;
                println!(
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.path.display(),
                    r.mode,
                    r.qb,
                    s.samples,
                    s.distinct_codewords,
                    s.entropy_bits,
                    s.mean,
                    s.sigma,
                    s.skewness,
                    s.excess_kurtosis
                );
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct BenchRow {
    coder: &'static str,
    symbols: usize,
    runs: usize,
    seconds_per_symbol: f64,
    symbols_per_second: f64,
    effective_qb: f64,
}

fn bench(ctx: &Ctx, input: Option<&Path>, runs: usize) -> Result<()> {
    let stream = match input {
        Some(p) => read_stream(p).with_context(|| format!("reading {}", p.display()))?,
        None => {
            let c = &ctx.config;
            let signal = generate_ofdm(&c.seeded_ofdm(c.ofdm.qam_order, c.rng_seed))?;
            quantize_iq(&signal.samples, &c.quantizer)?.i
        }
    };
    let model = codeword_histogram(&stream)?;
    let report = benchmark_coders(&stream.codewords, stream.qb, &model, runs)?;
    let row = |coder, t: &mfh_core::entropy::CoderTiming| BenchRow {
        coder,
        symbols: report.symbols,
        runs: report.runs,
        seconds_per_symbol: t.seconds_per_symbol,
        symbols_per_second: t.symbols_per_second,
        effective_qb: t.effective_qb,
    };
    output::records(ctx.format, &[row("hc", &report.huffman), row("ac", &report.arithmetic)])
}

