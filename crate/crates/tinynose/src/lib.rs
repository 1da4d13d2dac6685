//! File formats, firmware generation and protocol configs for the
//! `tinynose` electronic-nose toolkit.
//!
//! The math lives in [`tinynose_core`]; this crate adds everything that
//! needs an operating system: the text model format, the dataset CSV, the
//! TOML acquisition-protocol config, and the C source generator for the
//! microcontroller build.

pub mod dataset;
pub mod firmware;
pub mod model_file;
pub mod protocol;

pub use dataset::{load_dataset, parse_dataset, render_dataset, write_dataset, DatasetError};
pub use firmware::render_firmware;
pub use model_file::{load_model, parse_model, render_model, write_model, ModelFile, ModelFileError};
pub use protocol::{load_protocol, parse_protocol, ProtocolError};
