use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantizer::{codeword_histogram, CodewordStream};

/// Moment fit of the dequantized levels behind a histogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramSummary {
    pub samples: u64,
    pub distinct_codewords: usize,
    pub entropy_bits: f64,
    pub mean: f64,
    pub sigma: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

pub fn histogram_summary(stream: &CodewordStream) -> Result<HistogramSummary> {
    let model = codeword_histogram(stream)?;
    let quantizer = stream.quantizer()?;
    let n = model.total_count() as f64;
    let weighted = |f: &dyn Fn(f64) -> f64| -> f64 {
        model
            .entries()
            .iter()
            .map(|e| e.count as f64 * f(quantizer.level(e.codeword)))
            .sum::<f64>()
            / n
    };
    let mean = weighted(&|x| x);
    let m2 = weighted(&|x| (x - mean).powi(2));
    let m3 = weighted(&|x| (x - mean).powi(3));
    let m4 = weighted(&|x| (x - mean).powi(4));
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    Ok(HistogramSummary {
        samples: model.total_count(),
        distinct_codewords: model.len(),
        entropy_bits: model.entropy(),
        mean,
        sigma: m2.sqrt(),
        skewness,
        excess_kurtosis,
    })
}

/// Writes `codeword,count,probability` rows for every observed codeword.
pub fn export_histogram(stream: &CodewordStream, path: &Path) -> Result<HistogramSummary> {
    if stream.codewords.is_empty() {
        return Err(Error::EmptyInput);
    }
    let summary = histogram_summary(stream)?;
    let mut entries = codeword_histogram(stream)?.entries().to_vec();
    entries.sort_by_key(|e| e.codeword);
    let mut w = csv::Writer::from_writer(File::create(path)?);
    w.write_record(["codeword", "count", "probability"])?;
    for e in entries {
        w.write_record([e.codeword.to_string(), e.count.to_string(), e.probability.to_string()])?;
    }
    w.flush()?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantizer::{Channel, QuantMode};

    #[test]
    fn writes_sorted_rows() {
        let stream = CodewordStream {
            codewords: vec![3, 1, 1, 2, 1],
            qb: 2,
            mode: QuantMode::Pcm,
            full_scale: 1.0,
            channel: Channel::I,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        let s = export_histogram(&stream, &path).unwrap();
        assert_eq!(s.samples, 5);
        assert_eq!(s.distinct_codewords, 3);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "codeword,count,probability\n1,3,0.6\n2,1,0.2\n3,1,0.2\n");
        // Levels: 1 -> -0.25, 2 -> 0.25, 3 -> 0.75.
        assert!((s.mean - 0.05).abs() < 1e-12);
    }

    #[test]
    fn empty_path_is_io_error() {
        let stream = CodewordStream {
            codewords: vec![0, 1],
            qb: 2,
            mode: QuantMode::Pcm,
            full_scale: 1.0,
            channel: Channel::I,
        };
        assert!(matches!(export_histogram(&stream, Path::new("")), Err(Error::Io(_))));
        let empty = CodewordStream {
            codewords: vec![],
            ..stream
        };
        assert!(matches!(export_histogram(&empty, Path::new("x.csv")), Err(Error::EmptyInput)));
    }
}
