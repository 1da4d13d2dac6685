//! Frame-by-frame classification and scoring.
//!
//! A stream is any ordered source of sensor frames — a live serial feed, a
//! replayed capture file, the simulator. Each frame is normalized, pushed
//! through the network, and turned into a [`Decision`]; a run over a whole
//! stream also enforces timestamp order and tallies what was seen.

use alloc::string::String;
use core::fmt::Write as _;

use thiserror::Error;

use crate::data::{CompoundLabel, SensorFrame};
use crate::float;
use crate::net::{forward, NetworkParams, OUTPUTS};
use crate::sensing::Normalizer;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum StreamError {
    #[error("frame {index} went back in time: {timestamp_ms} ms after {previous_ms} ms")]
    OutOfOrderFrame {
        index: usize,
        timestamp_ms: u64,
        previous_ms: u64,
    },
    #[error("got {decisions} decisions for {truths} ground-truth labels")]
    LengthMismatch { decisions: usize, truths: usize },
    #[error("ground-truth label {index} is Unknown")]
    UnknownTruthLabel { index: usize },
}

/// The classifier's verdict on one frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub timestamp_ms: u64,
    pub label: CompoundLabel,
    /// Raw output activations, in class order (lemon, banana, grape).
    pub scores: [f64; OUTPUTS],
}

impl Decision {
    /// Render as a stream line: `timestamp_ms,label,score0,score1,score2`
    /// with scores at nine significant digits.
    pub fn to_line(&self) -> String {
        let mut line = String::new();
        write!(line, "{},{}", self.timestamp_ms, self.label)
            .expect("writing to a String cannot fail");
        for score in &self.scores {
            line.push(',');
            line.push_str(&format_significant(*score, 9));
        }
        line
    }
}

/// Format with a fixed number of significant decimal digits (no exponent),
/// e.g. 9 digits: `0.500000000`, `0.000935732911`.
pub fn format_significant(x: f64, sig: usize) -> String {
    debug_assert!(sig >= 1);
    let magnitude = if x == 0.0 {
        0
    } else {
        float::floor(float::log10(float::abs(x))) as i32
    };
    let decimals = ((sig as i32 - 1) - magnitude).max(0) as usize;
    let mut s = String::new();
    write!(s, "{x:.decimals$}").expect("writing to a String cannot fail");
    s
}

/// Classify one frame: normalize, forward, pick the best-scoring class.
///
/// Ties go to the lowest class index; a winning score below `threshold`
/// turns the verdict into `Unknown` (threshold 0 never rejects).
pub fn classify_frame(
    params: &NetworkParams,
    normalizer: &Normalizer,
    frame: &SensorFrame,
    threshold: f64,
) -> Decision {
    let input = normalizer.normalize(frame);
    let scores = forward(params, &input).output;

    let mut winner = 0usize;
    for i in 1..OUTPUTS {
        if scores[i] > scores[winner] {
            winner = i;
        }
    }
    let label = if scores[winner] >= threshold {
        CompoundLabel::from_class_index(winner).expect("winner is a valid class")
    } else {
        CompoundLabel::Unknown
    };
    Decision {
        timestamp_ms: frame.timestamp_ms,
        label,
        scores,
    }
}

/// What a stream run saw: frame total and verdicts per label
/// (lemon, banana, grape, unknown).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StreamSummary {
    pub frames: u64,
    pub per_label: [u64; 4],
}

impl StreamSummary {
    fn count(&mut self, label: CompoundLabel) {
        let slot = label.class_index().unwrap_or(3);
        self.per_label[slot] += 1;
        self.frames += 1;
    }
}

/// Classify an ordered stream of frames, handing each [`Decision`] to
/// `sink` as it is made.
///
/// Timestamps must never decrease; a frame older than its predecessor
/// aborts the run with its index.
pub fn run_stream<I, S>(
    params: &NetworkParams,
    normalizer: &Normalizer,
    frames: I,
    threshold: f64,
    mut sink: S,
) -> Result<StreamSummary, StreamError>
where
    I: IntoIterator<Item = SensorFrame>,
    S: FnMut(&Decision),
{
    let mut summary = StreamSummary::default();
    let mut previous_ms: Option<u64> = None;
    for (index, frame) in frames.into_iter().enumerate() {
        if let Some(previous) = previous_ms {
            if frame.timestamp_ms < previous {
                return Err(StreamError::OutOfOrderFrame {
                    index,
                    timestamp_ms: frame.timestamp_ms,
                    previous_ms: previous,
                });
            }
        }
        previous_ms = Some(frame.timestamp_ms);

        let decision = classify_frame(params, normalizer, &frame, threshold);
        summary.count(decision.label);
        sink(&decision);
    }
    Ok(summary)
}

/// 3×3 confusion counts (`counts[truth][predicted]`) plus a per-truth tally
/// of `Unknown` verdicts, which belong to no predicted class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
    pub unknown: [u64; 3],
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        let classified: u64 = self.counts.iter().flatten().sum();
        classified + self.unknown.iter().sum::<u64>()
    }

    /// Fraction of frames whose verdict matched the truth. `Unknown`
    /// verdicts count as misses.
    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let hits: u64 = (0..3).map(|c| self.counts[c][c]).sum();
        hits as f64 / total as f64
    }

    /// Of the frames predicted as `class`, the fraction that truly were.
    /// `None` when the class was never predicted.
    pub fn precision(&self, class: usize) -> Option<f64> {
        let predicted: u64 = (0..3).map(|truth| self.counts[truth][class]).sum();
        if predicted == 0 {
            return None;
        }
        Some(self.counts[class][class] as f64 / predicted as f64)
    }

    /// Of the frames truly of `class`, the fraction found. `None` when the
    /// class never occurred. `Unknown` verdicts count against recall.
    pub fn recall(&self, class: usize) -> Option<f64> {
        let actual: u64 = self.counts[class].iter().sum::<u64>() + self.unknown[class];
        if actual == 0 {
            return None;
        }
        Some(self.counts[class][class] as f64 / actual as f64)
    }
}

/// Tally decisions against ground truth, frame by frame.
pub fn confusion_matrix(
    decisions: &[Decision],
    truths: &[CompoundLabel],
) -> Result<ConfusionMatrix, StreamError> {
    if decisions.len() != truths.len() {
        return Err(StreamError::LengthMismatch {
            decisions: decisions.len(),
            truths: truths.len(),
        });
    }
    let mut matrix = ConfusionMatrix::default();
    for (index, (decision, truth)) in decisions.iter().zip(truths.iter()).enumerate() {
        let truth_idx = truth
            .class_index()
            .ok_or(StreamError::UnknownTruthLabel { index })?;
        match decision.label.class_index() {
            Some(pred_idx) => matrix.counts[truth_idx][pred_idx] += 1,
            None => matrix.unknown[truth_idx] += 1,
        }
    }
    Ok(matrix)
}
