//! Channel files and result tables.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use wiretap_core::linalg::CMat;
use wiretap_core::{AntennaConfig, WiretapChannel};

use crate::error::{HarnessError, Result};
use crate::harness::TrialRecord;

/// On-disk channel: antenna counts plus real and imaginary parts of each matrix as row-major 2-D arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub na: usize,
    pub nb: usize,
    pub ne: usize,
    pub nj: usize,
    pub h1_re: Vec<Vec<f64>>,
    pub h1_im: Vec<Vec<f64>>,
    pub g1_re: Vec<Vec<f64>>,
    pub g1_im: Vec<Vec<f64>>,
    pub g2_re: Vec<Vec<f64>>,
    pub g2_im: Vec<Vec<f64>>,
    pub h2_re: Vec<Vec<f64>>,
    pub h2_im: Vec<Vec<f64>>,
}

fn split(m: &CMat) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let re = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect()).collect();
    let im = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect()).collect();
    (re, im)
}

fn join(name: &str, re: &[Vec<f64>], im: &[Vec<f64>], rows: usize, cols: usize) -> Result<CMat> {
    let shape_ok = |parts: &[Vec<f64>]| parts.len() == rows && parts.iter().all(|r| r.len() == cols);
    if !shape_ok(re) || !shape_ok(im) {
        return Err(HarnessError::InvalidConfig(format!("{name} must be {rows}x{cols}")));
    }
    let mut m = CMat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let z = Complex64::new(re[i][j], im[i][j]);
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(HarnessError::InvalidConfig(format!("{name}[{i}][{j}] is not finite")));
            }
            m[(i, j)] = z;
        }
    }
    Ok(m)
}

impl ChannelFile {
    pub fn from_channel(ch: &WiretapChannel) -> Self {
        let AntennaConfig { na, nb, ne, nj } = ch.config;
        let (h1_re, h1_im) = split(&ch.h1);
        let (g1_re, g1_im) = split(&ch.g1);
        let (g2_re, g2_im) = split(&ch.g2);
        let (h2_re, h2_im) = split(&ch.h2);
        ChannelFile { na, nb, ne, nj, h1_re, h1_im, g1_re, g1_im, g2_re, g2_im, h2_re, h2_im }
    }

    /// Check every shape against the antenna counts and build the channel.
    pub fn to_channel(&self) -> Result<WiretapChannel> {
        let cfg = AntennaConfig::new(self.na, self.nb, self.ne, self.nj)?;
        let h1 = join("h1", &self.h1_re, &self.h1_im, cfg.nb, cfg.na)?;
        let g1 = join("g1", &self.g1_re, &self.g1_im, cfg.ne, cfg.na)?;
        let g2 = join("g2", &self.g2_re, &self.g2_im, cfg.nb, cfg.nj)?;
        let h2 = join("h2", &self.h2_re, &self.h2_im, cfg.ne, cfg.nj)?;
        Ok(WiretapChannel::new(h1, g1, g2, h2)?)
    }
}

pub fn channel_from_json(text: &str) -> Result<WiretapChannel> {
    let file: ChannelFile =
        serde_json::from_str(text).map_err(|source| HarnessError::Json { path: "<channel>".into(), source })?;
    file.to_channel()
}

pub fn channel_to_json(ch: &WiretapChannel) -> String {
    serde_json::to_string_pretty(&ChannelFile::from_channel(ch)).expect("channel files always serialize")
}

pub fn load_channel(path: &Path) -> Result<WiretapChannel> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| HarnessError::Read { path: path.into(), source })?;
    let file: ChannelFile =
        serde_json::from_str(&text).map_err(|source| HarnessError::Json { path: path.into(), source })?;
    file.to_channel()
}

pub fn save_channel(ch: &WiretapChannel, path: &Path) -> Result<()> {
    std::fs::write(path, channel_to_json(ch) + "\n").map_err(|source| HarnessError::Write { path: path.into(), source })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    /// Format implied by a file extension, if any.
    pub fn from_extension(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(OutputFormat::Csv),
            "json" => Some(OutputFormat::Json),
            _ => None,
        }
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format {other:?}, expected csv or json")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

const CSV_HEADER: [&str; 7] = ["seed", "snr_db", "scheme", "cs_bits", "iterations", "wall_time_ms", "flags"];

/// Write records as CSV (header always present) to any sink.
pub fn write_csv<W: Write>(records: &[TrialRecord], sink: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(records: &[TrialRecord], mut sink: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut sink, records)?;
    sink.write_all(b"\n")
}

/// Records rendered as a CSV string.
pub fn to_csv_string(records: &[TrialRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn emit_results(records: &[TrialRecord], format: OutputFormat, path: &Path) -> Result<()> {
    let wrap = |source: std::io::Error| HarnessError::Write { path: path.into(), source };
    let file = BufWriter::new(File::create(path).map_err(wrap)?);
    match format {
        OutputFormat::Csv => write_csv(records, file).map_err(|e| wrap(std::io::Error::other(e))),
        OutputFormat::Json => write_json(records, file).map_err(wrap),
    }
}

pub fn read_csv<R: Read>(source: R) -> std::result::Result<Vec<TrialRecord>, csv::Error> {
    csv::Reader::from_reader(source).deserialize().collect()
}

/// Parse a result file written by [`emit_results`].
pub fn parse_results(path: &Path, format: OutputFormat) -> Result<Vec<TrialRecord>> {
    let file = File::open(path).map_err(|source| HarnessError::Read { path: path.into(), source })?;
    let reader = BufReader::new(file);
    match format {
        OutputFormat::Csv => read_csv(reader).map_err(|source| HarnessError::Csv { path: path.into(), source }),
        OutputFormat::Json => {
            serde_json::from_reader(reader).map_err(|source| HarnessError::Json { path: path.into(), source })
        }
    }
}
