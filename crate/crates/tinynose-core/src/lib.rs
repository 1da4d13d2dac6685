//! Core math for a five-sensor electronic nose that tells lemon, banana and
//! grape apart.
//!
//! Everything in here is fixed-topology on purpose: the network is 5 inputs,
//! 5 log-sigmoid hidden units, 3 log-sigmoid outputs, and the types say so in
//! their array dimensions. That keeps the forward pass allocation-free and
//! lets the same arithmetic run unchanged on a microcontroller.
//!
//! The crate is `no_std`-compatible (with `alloc`); the default `std` feature
//! just switches float intrinsics and keeps tests convenient. File formats,
//! simulation CLIs and firmware generation live in the companion `tinynose`
//! crate.

#![cfg_attr(not(feature = "std"), no_std)]
// Index loops mirror the i/j/k subscripts of the layer equations; zipped
// iterators would hide which axis is which.
#![allow(clippy::needless_range_loop)]
// `!(x > 0.0)` and friends deliberately treat NaN as out of range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod data;
mod float;
pub mod net;
pub mod sensing;
pub mod stream;
#[cfg(test)]
mod testutil;
pub mod train;

pub use data::{CompoundLabel, LabeledDataset, LabeledFrame, SensorFrame};
pub use net::{Activations, InputVector, NetworkParams, HIDDEN, INPUTS, OUTPUTS};
pub use sensing::{AcquisitionProtocol, CompoundProfile, Normalizer};
pub use stream::{ConfusionMatrix, Decision};
pub use train::{StopReason, TrainConfig, TrainReport};
