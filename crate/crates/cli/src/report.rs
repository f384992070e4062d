//! Report documents and their JSON and CSV encodings.
//!
//! CSV headers are fixed:
//! - spectrum: `level,q,band_count,measure,measure_intersect_prev`
//! - lyapunov: `E,gamma_plus,gamma_minus`
//! - word: `word`
//!
//! The other reports are JSON only.

use serde::{Deserialize, Serialize};

use quasispec::circlemap::{Boundary, HullReport};
use quasispec::stability::{DerivedConstant, GordonCertificate, NondecayReport};
use quasispec::{Error, Result};

use crate::config::{ExperimentConfig, Format};

pub const SCHEMA_VERSION: u32 = 1;

/// Echo of the configuration that produced a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub schema_version: u32,
    pub quasispec_version: String,
    pub experiment: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl ConfigEcho {
    pub fn new(experiment: &ExperimentConfig) -> Self {
        ConfigEcho {
            schema_version: SCHEMA_VERSION,
            quasispec_version: env!("CARGO_PKG_VERSION").into(),
            experiment: experiment.clone(),
            wall_time_seconds: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordReport {
    pub config: ConfigEcho,
    pub word: String,
    /// `s_{-1}, s_0, ..., s_n`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tower: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub level: usize,
    pub q: u64,
    pub band_count: usize,
    pub measure: f64,
    /// Measure of `sigma_level ∩ sigma_{level-1}`; absent at level 0.
    pub measure_intersect_prev: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub config: ConfigEcho,
    pub rows: Vec<SpectrumRow>,
    /// Bands `[lo, hi]` per row.
    pub bands: Vec<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovRow {
    #[serde(rename = "E")]
    pub energy: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub config: ConfigEcho,
    pub rows: Vec<LyapunovRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCertificate {
    pub level: usize,
    pub membership: GordonCertificate,
    /// One report per sampled energy whose trace is within `C`.
    pub nondecay: Vec<NondecayReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GordonBundle {
    pub config: ConfigEcho,
    pub certificates: Vec<LevelCertificate>,
    pub derived_constant: DerivedConstant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullCheckReport {
    pub config: ConfigEcho,
    #[serde(flatten)]
    pub hull: HullReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaJumps {
    pub theta: String,
    pub indices: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryAgreement {
    pub boundary: Boundary,
    /// Indices in `[-range, range]` where the phase sits on a jump.
    pub jumps: Vec<i64>,
    pub compared: usize,
    pub disagreements_off_jumps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixReport {
    pub config: ConfigEcho,
    pub omega_zero_at_origin: f64,
    pub omega_one_minus_beta_at_origin: f64,
    pub discontinuities: Vec<ThetaJumps>,
    pub max_discontinuities: usize,
    pub boundary_agreement: Vec<BoundaryAgreement>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Word(WordReport),
    Spectrum(SpectrumReport),
    Lyapunov(LyapunovReport),
    Gordon(GordonBundle),
    HullCheck(HullCheckReport),
    Appendix(AppendixReport),
}

impl Report {
    pub fn config_mut(&mut self) -> &mut ConfigEcho {
        match self {
            Report::Word(r) => &mut r.config,
            Report::Spectrum(r) => &mut r.config,
            Report::Lyapunov(r) => &mut r.config,
            Report::Gordon(r) => &mut r.config,
            Report::HullCheck(r) => &mut r.config,
            Report::Appendix(r) => &mut r.config,
        }
    }
}

fn io_error(e: impl std::fmt::Display) -> Error {
    Error::InvalidParameter {
        module: "cli",
        name: "out",
        reason: e.to_string(),
    }
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(io_error)?;
    }
    w.into_inner().map_err(io_error)
}

#[derive(Serialize)]
struct WordRow<'a> {
    word: &'a str,
}

/// Serializes a report. Field order follows the struct definitions.
pub fn emit_report(report: &Report, format: Format) -> Result<Vec<u8>> {
    let json = |v: serde_json::Result<String>| v.map(|s| (s + "\n").into_bytes()).map_err(io_error);
    match (format, report) {
        (Format::Json, Report::Word(r)) => json(serde_json::to_string_pretty(r)),
        (Format::Json, Report::Spectrum(r)) => json(serde_json::to_string_pretty(r)),
        (Format::Json, Report::Lyapunov(r)) => json(serde_json::to_string_pretty(r)),
        (Format::Json, Report::Gordon(r)) => json(serde_json::to_string_pretty(r)),
        (Format::Json, Report::HullCheck(r)) => json(serde_json::to_string_pretty(r)),
        (Format::Json, Report::Appendix(r)) => json(serde_json::to_string_pretty(r)),
        (Format::Csv, Report::Word(r)) => csv_rows(&[WordRow { word: &r.word }]),
        (Format::Csv, Report::Spectrum(r)) => csv_rows(&r.rows),
        (Format::Csv, Report::Lyapunov(r)) => csv_rows(&r.rows),
        (Format::Csv, _) => Err(Error::InvalidParameter {
            module: "cli",
            name: "format",
            reason: "csv is available for word, spectrum and lyapunov reports".into(),
        }),
    }
}
