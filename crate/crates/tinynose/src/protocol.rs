//! Acquisition-protocol config files (TOML).
//!
//! ```toml
//! warmup_s = 600.0
//! capture_s = 300.0
//! purge_s = 300.0
//! sample_period_ms = 500
//!
//! [[compound]]
//! label = "lemon"
//! mean = [171.0, 75.86, 91.14, 92.29, 157.0]
//! stddev = [6.0, 3.0, 4.0, 2.0, 5.0]
//! rise_time_s = 0.15
//! ```
//!
//! Timing keys are optional and fall back to the stock session (10 min
//! warmup, 5 min capture, 5 min purge, 500 ms sampling); compounds are
//! required. Unknown keys are rejected so a typo can't silently become a
//! default.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;
use tinynose_core::data::CompoundLabel;
use tinynose_core::net::INPUTS;
use tinynose_core::sensing::{AcquisitionProtocol, CompoundProfile, SensingError};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("protocol config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("protocol config: `{label}` is not a compound (use lemon, banana or grape)")]
    BadLabel { label: String },
    #[error(transparent)]
    Invalid(#[from] SensingError),
}

fn default_warmup_s() -> f64 {
    600.0
}
fn default_capture_s() -> f64 {
    300.0
}
fn default_purge_s() -> f64 {
    300.0
}
fn default_sample_period_ms() -> u64 {
    500
}
fn default_rise_time_s() -> f64 {
    0.15
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProtocolDoc {
    #[serde(default = "default_warmup_s")]
    warmup_s: f64,
    #[serde(default = "default_capture_s")]
    capture_s: f64,
    #[serde(default = "default_purge_s")]
    purge_s: f64,
    #[serde(default = "default_sample_period_ms")]
    sample_period_ms: u64,
    compound: Vec<CompoundDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompoundDoc {
    label: String,
    mean: [f64; INPUTS],
    stddev: [f64; INPUTS],
    #[serde(default = "default_rise_time_s")]
    rise_time_s: f64,
}

/// Parse and validate a protocol config.
pub fn parse_protocol(text: &str) -> Result<AcquisitionProtocol, ProtocolError> {
    let doc: ProtocolDoc = toml::from_str(text)?;
    let mut compounds = Vec::with_capacity(doc.compound.len());
    for c in doc.compound {
        let label = CompoundLabel::parse_dataset_token(&c.label)
            .ok_or(ProtocolError::BadLabel { label: c.label })?;
        compounds.push(CompoundProfile {
            label,
            mean: c.mean,
            stddev: c.stddev,
            rise_time_s: c.rise_time_s,
        });
    }
    let protocol = AcquisitionProtocol {
        warmup_s: doc.warmup_s,
        capture_s: doc.capture_s,
        purge_s: doc.purge_s,
        sample_period_ms: doc.sample_period_ms,
        compounds,
    };
    protocol.validate()?;
    Ok(protocol)
}

pub fn load_protocol(path: &Path) -> Result<AcquisitionProtocol, ProtocolError> {
    parse_protocol(&fs::read_to_string(path)?)
}
