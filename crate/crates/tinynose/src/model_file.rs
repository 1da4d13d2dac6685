//! The plain-text model format.
//!
//! A model file is 15 lines, ASCII, whitespace-separated:
//!
//! ```text
//! TINYNOSE 1
//! DIMS 5 5 3
//! NORM <5 channel mins> <5 channel maxes>
//! HLW
//! <5 rows of 5 hidden-layer weights>
//! HLB <5 hidden biases>
//! OLW
//! <3 rows of 5 output-layer weights>
//! OLB <3 output biases>
//! ```
//!
//! Values are written in shortest round-trip decimal form, so emit → parse
//! reproduces every `f64` bit-exactly. The parser is strict: anything it
//! would have to guess about is a distinct, line-numbered error.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;
use tinynose_core::net::{NetworkParams, HIDDEN, INPUTS, OUTPUTS};
use tinynose_core::sensing::{Normalizer, SensingError};

pub const MAGIC: &str = "TINYNOSE";
pub const VERSION: &str = "1";

/// Everything needed to classify raw frames: the network and the
/// normalization the network was trained behind.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelFile {
    pub params: NetworkParams,
    pub normalizer: Normalizer,
}

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: not a {MAGIC} model file")]
    BadMagic { line: usize },
    #[error("unsupported model version `{found}` (this build reads version {VERSION})")]
    UnsupportedVersion { found: String },
    #[error("line {line}: expected `DIMS {INPUTS} {HIDDEN} {OUTPUTS}` (topology is fixed)")]
    BadDims { line: usize },
    #[error("file ends early: expected {expected} on line {line}")]
    MissingLine { line: usize, expected: &'static str },
    #[error("line {line}: expected section `{expected}`")]
    BadSection { line: usize, expected: &'static str },
    #[error("line {line}: expected {expected} values, found {found}")]
    WrongValueCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: `{token}` is not a number")]
    BadNumber { line: usize, token: String },
    #[error("line {line}: non-finite value")]
    NonFinite { line: usize },
    #[error("line {line}: unexpected content after the model")]
    TrailingContent { line: usize },
    #[error(transparent)]
    Normalizer(#[from] SensingError),
}

/// Render a model in the format above, shortest round-trip decimals,
/// trailing newline included.
pub fn render_model(model: &ModelFile) -> String {
    let mut out = String::new();
    let join = |values: &[f64]| {
        let mut s = String::new();
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            write!(s, "{v}").expect("writing to a String cannot fail");
        }
        s
    };

    writeln!(out, "{MAGIC} {VERSION}").unwrap();
    writeln!(out, "DIMS {INPUTS} {HIDDEN} {OUTPUTS}").unwrap();
    let mut norm = model.normalizer.min.to_vec();
    norm.extend_from_slice(&model.normalizer.max);
    writeln!(out, "NORM {}", join(&norm)).unwrap();
    writeln!(out, "HLW").unwrap();
    for row in &model.params.hidden_weights {
        writeln!(out, "{}", join(row)).unwrap();
    }
    writeln!(out, "HLB {}", join(&model.params.hidden_biases)).unwrap();
    writeln!(out, "OLW").unwrap();
    for row in &model.params.output_weights {
        writeln!(out, "{}", join(row)).unwrap();
    }
    writeln!(out, "OLB {}", join(&model.params.output_biases)).unwrap();
    out
}

fn parse_reals(line_no: usize, tokens: &[&str], expected: usize) -> Result<Vec<f64>, ModelFileError> {
    if tokens.len() != expected {
        return Err(ModelFileError::WrongValueCount {
            line: line_no,
            expected,
            found: tokens.len(),
        });
    }
    let mut values = Vec::with_capacity(expected);
    for token in tokens {
        let v: f64 = token.parse().map_err(|_| ModelFileError::BadNumber {
            line: line_no,
            token: (*token).to_owned(),
        })?;
        if !v.is_finite() {
            return Err(ModelFileError::NonFinite { line: line_no });
        }
        values.push(v);
    }
    Ok(values)
}

/// Parse the strict 15-line model format.
pub fn parse_model(text: &str) -> Result<ModelFile, ModelFileError> {
    let lines: Vec<&str> = text.lines().collect();
    let line = |index: usize, expected: &'static str| -> Result<(usize, Vec<&str>), ModelFileError> {
        match lines.get(index) {
            Some(raw) => Ok((index + 1, raw.split_whitespace().collect())),
            None => Err(ModelFileError::MissingLine {
                line: index + 1,
                expected,
            }),
        }
    };

    // Line 1: magic + version.
    let (no, tokens) = line(0, "the `TINYNOSE 1` header")?;
    if tokens.first() != Some(&MAGIC) || tokens.len() != 2 {
        return Err(ModelFileError::BadMagic { line: no });
    }
    if tokens[1] != VERSION {
        return Err(ModelFileError::UnsupportedVersion {
            found: tokens[1].to_owned(),
        });
    }

    // Line 2: fixed topology.
    let (no, tokens) = line(1, "the `DIMS` line")?;
    if tokens != ["DIMS", "5", "5", "3"] {
        return Err(ModelFileError::BadDims { line: no });
    }

    // Line 3: normalizer bounds, mins then maxes.
    let (no, tokens) = line(2, "the `NORM` line")?;
    if tokens.first() != Some(&"NORM") {
        return Err(ModelFileError::BadSection {
            line: no,
            expected: "NORM",
        });
    }
    let norm = parse_reals(no, &tokens[1..], 2 * INPUTS)?;
    let mut normalizer = Normalizer {
        min: [0.0; INPUTS],
        max: [0.0; INPUTS],
    };
    normalizer.min.copy_from_slice(&norm[..INPUTS]);
    normalizer.max.copy_from_slice(&norm[INPUTS..]);

    let mut params = NetworkParams::zeroed();

    // Lines 4-9: hidden layer weights.
    let (no, tokens) = line(3, "the `HLW` section")?;
    if tokens != ["HLW"] {
        return Err(ModelFileError::BadSection {
            line: no,
            expected: "HLW",
        });
    }
    for j in 0..HIDDEN {
        let (no, tokens) = line(4 + j, "a hidden-layer weight row")?;
        params.hidden_weights[j].copy_from_slice(&parse_reals(no, &tokens, INPUTS)?);
    }

    // Line 10: hidden biases.
    let (no, tokens) = line(4 + HIDDEN, "the `HLB` line")?;
    if tokens.first() != Some(&"HLB") {
        return Err(ModelFileError::BadSection {
            line: no,
            expected: "HLB",
        });
    }
    params
        .hidden_biases
        .copy_from_slice(&parse_reals(no, &tokens[1..], HIDDEN)?);

    // Lines 11-14: output layer weights.
    let (no, tokens) = line(5 + HIDDEN, "the `OLW` section")?;
    if tokens != ["OLW"] {
        return Err(ModelFileError::BadSection {
            line: no,
            expected: "OLW",
        });
    }
    for i in 0..OUTPUTS {
        let (no, tokens) = line(6 + HIDDEN + i, "an output-layer weight row")?;
        params.output_weights[i].copy_from_slice(&parse_reals(no, &tokens, HIDDEN)?);
    }

    // Line 15: output biases.
    let (no, tokens) = line(6 + HIDDEN + OUTPUTS, "the `OLB` line")?;
    if tokens.first() != Some(&"OLB") {
        return Err(ModelFileError::BadSection {
            line: no,
            expected: "OLB",
        });
    }
    params
        .output_biases
        .copy_from_slice(&parse_reals(no, &tokens[1..], OUTPUTS)?);

    // Anything after line 15 but blanks is somebody else's data.
    for (index, raw) in lines.iter().enumerate().skip(7 + HIDDEN + OUTPUTS) {
        if !raw.trim().is_empty() {
            return Err(ModelFileError::TrailingContent { line: index + 1 });
        }
    }

    normalizer.validate()?;
    Ok(ModelFile { params, normalizer })
}

pub fn load_model(path: &Path) -> Result<ModelFile, ModelFileError> {
    parse_model(&fs::read_to_string(path)?)
}

pub fn write_model(path: &Path, model: &ModelFile) -> Result<(), ModelFileError> {
    Ok(fs::write(path, render_model(model))?)
}
