//! Sample and label types shared by the trainer, the simulator and the
//! streaming classifier.
//!
//! A frame is one synchronized read of all five sensor channels, always in
//! the canonical order MQ-2, MQ-135, TGS2610, TGS2611, MQ-3.

use alloc::vec::Vec;
use core::fmt;

use crate::net::INPUTS;

/// The compound a frame was captured under, or `Unknown` when a classifier
/// declines to decide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CompoundLabel {
    Lemon,
    Banana,
    Grape,
    Unknown,
}

impl CompoundLabel {
    /// Output-neuron index for this compound; `Unknown` has none.
    pub fn class_index(self) -> Option<usize> {
        match self {
            CompoundLabel::Lemon => Some(0),
            CompoundLabel::Banana => Some(1),
            CompoundLabel::Grape => Some(2),
            CompoundLabel::Unknown => None,
        }
    }

    pub fn from_class_index(index: usize) -> Option<Self> {
        match index {
            0 => Some(CompoundLabel::Lemon),
            1 => Some(CompoundLabel::Banana),
            2 => Some(CompoundLabel::Grape),
            _ => None,
        }
    }

    /// Lowercase token used in dataset files and protocol configs.
    pub fn dataset_token(self) -> &'static str {
        match self {
            CompoundLabel::Lemon => "lemon",
            CompoundLabel::Banana => "banana",
            CompoundLabel::Grape => "grape",
            CompoundLabel::Unknown => "unknown",
        }
    }

    /// Parse a dataset-file token. Only real compounds are accepted;
    /// `Unknown` is a classifier verdict, not a ground-truth label.
    pub fn parse_dataset_token(token: &str) -> Option<Self> {
        match token {
            "lemon" => Some(CompoundLabel::Lemon),
            "banana" => Some(CompoundLabel::Banana),
            "grape" => Some(CompoundLabel::Grape),
            _ => None,
        }
    }
}

impl fmt::Display for CompoundLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CompoundLabel::Lemon => "Lemon",
            CompoundLabel::Banana => "Banana",
            CompoundLabel::Grape => "Grape",
            CompoundLabel::Unknown => "Unknown",
        };
        f.write_str(name)
    }
}

/// One synchronized read of all five channels, raw ADC counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SensorFrame {
    pub timestamp_ms: u64,
    pub raw: [u16; INPUTS],
}

/// A frame together with the compound it was captured under.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LabeledFrame {
    pub frame: SensorFrame,
    pub label: CompoundLabel,
}

/// An in-memory labeled capture, in acquisition order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabeledDataset {
    pub frames: Vec<LabeledFrame>,
}

impl LabeledDataset {
    pub fn new(frames: Vec<LabeledFrame>) -> Self {
        LabeledDataset { frames }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Frame count per class index (lemon, banana, grape). `Unknown` labels
    /// are not counted; see [`contains_unlabeled`](Self::contains_unlabeled).
    pub fn class_counts(&self) -> [usize; 3] {
        let mut counts = [0usize; 3];
        for labeled in &self.frames {
            if let Some(idx) = labeled.label.class_index() {
                counts[idx] += 1;
            }
        }
        counts
    }

    pub fn contains_unlabeled(&self) -> bool {
        self.frames
            .iter()
            .any(|l| l.label == CompoundLabel::Unknown)
    }
}
