//! The labeled-capture CSV format.
//!
//! One header, one row per frame:
//!
//! ```text
//! timestamp_ms,mq2,mq135,tgs2610,tgs2611,mq3,label
//! 600500,141,66,70,91,112,lemon
//! ```
//!
//! Raw values are 10-bit ADC counts (0–1023); labels are the lowercase
//! compound tokens. The parser is strict about the header, the field count
//! and the value ranges — a capture file that doesn't match byte for byte
//! in structure is a broken capture, not a dialect.

use std::fs;
use std::path::Path;

use thiserror::Error;
use tinynose_core::data::{CompoundLabel, LabeledDataset, LabeledFrame, SensorFrame};
use tinynose_core::net::INPUTS;

pub const DATASET_HEADER: &str = "timestamp_ms,mq2,mq135,tgs2610,tgs2611,mq3,label";

/// Largest raw count a 10-bit ADC can produce.
const RAW_MAX: u16 = 1023;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line 1: expected header `{DATASET_HEADER}`")]
    BadHeader,
    #[error("line {line}: expected 7 comma-separated fields, found {found}")]
    WrongFieldCount { line: usize, found: usize },
    #[error("line {line}: `{token}` is not a valid timestamp")]
    BadTimestamp { line: usize, token: String },
    #[error("line {line}: `{token}` is not a raw count in 0..={RAW_MAX}")]
    BadRawCount { line: usize, token: String },
    #[error("line {line}: `{token}` is not a compound label")]
    BadLabel { line: usize, token: String },
}

/// Render a dataset as CSV, header first, trailing newline included.
pub fn render_dataset(data: &LabeledDataset) -> String {
    let mut out = String::with_capacity(32 * (data.len() + 1));
    out.push_str(DATASET_HEADER);
    out.push('\n');
    for labeled in &data.frames {
        let r = &labeled.frame.raw;
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            labeled.frame.timestamp_ms,
            r[0],
            r[1],
            r[2],
            r[3],
            r[4],
            labeled.label.dataset_token()
        ));
    }
    out
}

/// Parse the strict dataset CSV format. A header-only file is an empty
/// dataset; whether that is usable is the consumer's decision.
pub fn parse_dataset(text: &str) -> Result<LabeledDataset, DatasetError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == DATASET_HEADER => {}
        _ => return Err(DatasetError::BadHeader),
    }

    let mut frames = Vec::new();
    for (index, raw_line) in lines {
        let line = index + 1;
        if raw_line.trim().is_empty() {
            // Tolerate blank padding at the end of hand-edited files.
            continue;
        }
        let fields: Vec<&str> = raw_line.split(',').collect();
        if fields.len() != 7 {
            return Err(DatasetError::WrongFieldCount {
                line,
                found: fields.len(),
            });
        }
        let timestamp_ms: u64 = fields[0].parse().map_err(|_| DatasetError::BadTimestamp {
            line,
            token: fields[0].to_owned(),
        })?;
        let mut raw = [0u16; INPUTS];
        for (ch, slot) in raw.iter_mut().enumerate() {
            let token = fields[1 + ch];
            *slot = token
                .parse::<u16>()
                .ok()
                .filter(|v| *v <= RAW_MAX)
                .ok_or_else(|| DatasetError::BadRawCount {
                    line,
                    token: token.to_owned(),
                })?;
        }
        let label = CompoundLabel::parse_dataset_token(fields[6]).ok_or_else(|| {
            DatasetError::BadLabel {
                line,
                token: fields[6].to_owned(),
            }
        })?;
        frames.push(LabeledFrame {
            frame: SensorFrame { timestamp_ms, raw },
            label,
        });
    }
    Ok(LabeledDataset::new(frames))
}

pub fn load_dataset(path: &Path) -> Result<LabeledDataset, DatasetError> {
    parse_dataset(&fs::read_to_string(path)?)
}

pub fn write_dataset(path: &Path, data: &LabeledDataset) -> Result<(), DatasetError> {
    Ok(fs::write(path, render_dataset(data))?)
}
