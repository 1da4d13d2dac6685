//! Stochastic-gradient trainer for the 5-5-3 network.
//!
//! The trainer is deliberately plain: per-sample steepest descent on the
//! squared-error performance index, with one twist — each sample's learning
//! rate is scaled by `sqrt(majority_count / class_count)` so minority
//! compounds pull as hard as the majority one. Everything is seeded and
//! draw-order-pinned, so a (dataset, config) pair always trains to the exact
//! same network.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::data::{CompoundLabel, LabeledDataset};
use crate::float;
use crate::net::{forward, logsig_derivative, InputVector, NetworkParams, HIDDEN, INPUTS, OUTPUTS};
use crate::sensing::{fit_normalizer, Normalizer, SensingError};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("invalid training config: {reason}")]
    InvalidConfig { reason: &'static str },
    #[error("cannot train on an empty dataset")]
    EmptyDataset,
    #[error("dataset contains frames labeled Unknown")]
    UnlabeledFrame,
    #[error("training split contains no {label} frames")]
    MissingClass { label: CompoundLabel },
    #[error(transparent)]
    Sensing(#[from] SensingError),
}

/// Knobs for [`train`]. The defaults train the stock synthetic session to
/// its target in a few hundred epochs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub base_learning_rate: f64,
    /// Epoch budget; a budget of 0 returns the untouched initialization.
    pub max_epochs: usize,
    /// Stop as soon as the epoch's mean training MSE is at or below this.
    pub target_mse: f64,
    /// Weights and biases start uniform in `[-init_range, +init_range]`.
    pub init_range: f64,
    /// Stop after this many consecutive epochs without a new best
    /// validation MSE. 0 disables the early stop, as does an empty
    /// validation split.
    pub validation_patience: usize,
    /// (train, validation, test) fractions; must sum to 1.
    pub split: (f64, f64, f64),
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            base_learning_rate: 0.1,
            max_epochs: 5000,
            target_mse: 1e-4,
            init_range: 0.5,
            validation_patience: 6,
            split: (0.70, 0.15, 0.15),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.base_learning_rate > 0.0) || !self.base_learning_rate.is_finite() {
            return Err(TrainError::InvalidConfig {
                reason: "base_learning_rate must be positive and finite",
            });
        }
        if !(self.target_mse >= 0.0) || !self.target_mse.is_finite() {
            return Err(TrainError::InvalidConfig {
                reason: "target_mse must be non-negative and finite",
            });
        }
        if !(self.init_range > 0.0) || !self.init_range.is_finite() {
            return Err(TrainError::InvalidConfig {
                reason: "init_range must be positive and finite",
            });
        }
        let (t, v, s) = self.split;
        if !(t > 0.0) || v < 0.0 || s < 0.0 {
            return Err(TrainError::InvalidConfig {
                reason: "split fractions must be non-negative with a positive train share",
            });
        }
        if float::abs(t + v + s - 1.0) > 1e-9 {
            return Err(TrainError::InvalidConfig {
                reason: "split fractions must sum to 1",
            });
        }
        Ok(())
    }
}

/// Why [`train`] returned when it did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    TargetReached,
    ValidationEarlyStop,
    MaxEpochs,
}

impl core::fmt::Display for StopReason {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let name = match self {
            StopReason::TargetReached => "target_reached",
            StopReason::ValidationEarlyStop => "validation_early_stop",
            StopReason::MaxEpochs => "max_epochs",
        };
        f.write_str(name)
    }
}

/// Everything a training run produces, including the per-epoch error
/// trajectories for reporting.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub params: NetworkParams,
    pub normalizer: Normalizer,
    pub stop_reason: StopReason,
    pub epochs_run: usize,
    /// Mean training MSE after each epoch (index 0 = after epoch 1).
    pub epoch_mse: Vec<f64>,
    /// Mean validation MSE after each epoch; empty when the validation
    /// split is empty.
    pub validation_mse: Vec<f64>,
    /// Class counts of the training split that set the balanced rates.
    pub train_class_counts: [usize; 3],
}

impl TrainReport {
    /// Mean training MSE after the last epoch, or `None` when the epoch
    /// budget was 0.
    pub fn final_training_mse(&self) -> Option<f64> {
        self.epoch_mse.last().copied()
    }
}

/// One-hot desired output for a compound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetVector(pub [f64; OUTPUTS]);

impl TargetVector {
    /// `Some` for real compounds, `None` for `Unknown`.
    pub fn one_hot(label: CompoundLabel) -> Option<Self> {
        label.class_index().map(|idx| {
            let mut t = [0.0; OUTPUTS];
            t[idx] = 1.0;
            TargetVector(t)
        })
    }
}

/// Per-layer error sensitivities for one sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sensitivities {
    pub output: [f64; OUTPUTS],
    pub hidden: [f64; HIDDEN],
}

/// Gradients of one sample's squared error with respect to every parameter;
/// same layout as [`NetworkParams`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamGradients {
    pub hidden_weights: [[f64; INPUTS]; HIDDEN],
    pub hidden_biases: [f64; HIDDEN],
    pub output_weights: [[f64; HIDDEN]; OUTPUTS],
    pub output_biases: [f64; OUTPUTS],
}

/// Squared-error performance index for one sample: `Σ (tᵢ − aᵢ)²`.
pub fn mse(target: &TargetVector, output: &[f64; OUTPUTS]) -> f64 {
    let mut sum = 0.0;
    for (t, a) in target.0.iter().zip(output.iter()) {
        let e = t - a;
        sum += e * e;
    }
    sum
}

/// Output-layer sensitivities `sᵢ = −2 · aᵢ(1−aᵢ) · (tᵢ − aᵢ)`.
pub fn output_sensitivity(target: &TargetVector, output: &[f64; OUTPUTS]) -> [f64; OUTPUTS] {
    let mut s = [0.0; OUTPUTS];
    for i in 0..OUTPUTS {
        s[i] = -2.0 * logsig_derivative(output[i]) * (target.0[i] - output[i]);
    }
    s
}

/// Hidden-layer sensitivities backpropagated through the output weights:
/// `sⱼ = aⱼ(1−aⱼ) · Σᵢ W²ᵢⱼ sᵢ`.
pub fn hidden_sensitivity(
    params: &NetworkParams,
    hidden: &[f64; HIDDEN],
    output_sens: &[f64; OUTPUTS],
) -> [f64; HIDDEN] {
    let mut s = [0.0; HIDDEN];
    for j in 0..HIDDEN {
        let mut back = 0.0;
        for i in 0..OUTPUTS {
            back += params.output_weights[i][j] * output_sens[i];
        }
        s[j] = logsig_derivative(hidden[j]) * back;
    }
    s
}

/// Analytic gradient of one sample's squared error, assembled from the layer
/// sensitivities.
pub fn analytic_gradient(
    params: &NetworkParams,
    input: &InputVector,
    target: &TargetVector,
) -> ParamGradients {
    let act = forward(params, input);
    let out_s = output_sensitivity(target, &act.output);
    let hid_s = hidden_sensitivity(params, &act.hidden, &out_s);

    let mut grads = ParamGradients {
        hidden_weights: [[0.0; INPUTS]; HIDDEN],
        hidden_biases: [0.0; HIDDEN],
        output_weights: [[0.0; HIDDEN]; OUTPUTS],
        output_biases: [0.0; OUTPUTS],
    };
    for i in 0..OUTPUTS {
        for j in 0..HIDDEN {
            grads.output_weights[i][j] = out_s[i] * act.hidden[j];
        }
        grads.output_biases[i] = out_s[i];
    }
    for j in 0..HIDDEN {
        for k in 0..INPUTS {
            grads.hidden_weights[j][k] = hid_s[j] * input.0[k];
        }
        grads.hidden_biases[j] = hid_s[j];
    }
    grads
}

/// Central-difference gradient of one sample's squared error; the slow,
/// definition-level check the analytic gradient is tested against.
pub fn finite_difference_gradient(
    params: &NetworkParams,
    input: &InputVector,
    target: &TargetVector,
    h: f64,
) -> ParamGradients {
    let probe = |setter: &mut dyn FnMut(&mut NetworkParams, f64)| {
        let mut plus = *params;
        setter(&mut plus, h);
        let mut minus = *params;
        setter(&mut minus, -h);
        let f_plus = mse(target, &forward(&plus, input).output);
        let f_minus = mse(target, &forward(&minus, input).output);
        (f_plus - f_minus) / (2.0 * h)
    };

    let mut grads = ParamGradients {
        hidden_weights: [[0.0; INPUTS]; HIDDEN],
        hidden_biases: [0.0; HIDDEN],
        output_weights: [[0.0; HIDDEN]; OUTPUTS],
        output_biases: [0.0; OUTPUTS],
    };
    for j in 0..HIDDEN {
        for k in 0..INPUTS {
            grads.hidden_weights[j][k] =
                probe(&mut |p: &mut NetworkParams, d: f64| p.hidden_weights[j][k] += d);
        }
        grads.hidden_biases[j] =
            probe(&mut |p: &mut NetworkParams, d: f64| p.hidden_biases[j] += d);
    }
    for i in 0..OUTPUTS {
        for j in 0..HIDDEN {
            grads.output_weights[i][j] =
                probe(&mut |p: &mut NetworkParams, d: f64| p.output_weights[i][j] += d);
        }
        grads.output_biases[i] =
            probe(&mut |p: &mut NetworkParams, d: f64| p.output_biases[i] += d);
    }
    grads
}

/// One stochastic descent step on a single sample. Returns the sample's
/// squared error as seen by the forward pass that fed the update.
pub fn sgd_step(
    params: &mut NetworkParams,
    input: &InputVector,
    target: &TargetVector,
    alpha: f64,
) -> f64 {
    let act = forward(params, input);
    let sample_mse = mse(target, &act.output);
    let out_s = output_sensitivity(target, &act.output);
    let hid_s = hidden_sensitivity(params, &act.hidden, &out_s);

    for i in 0..OUTPUTS {
        for j in 0..HIDDEN {
            params.output_weights[i][j] -= alpha * out_s[i] * act.hidden[j];
        }
        params.output_biases[i] -= alpha * out_s[i];
    }
    for j in 0..HIDDEN {
        for k in 0..INPUTS {
            params.hidden_weights[j][k] -= alpha * hid_s[j] * input.0[k];
        }
        params.hidden_biases[j] -= alpha * hid_s[j];
    }
    sample_mse
}

/// Learning-rate factor for a class: `sqrt(majority_count / class_count)`.
/// Exactly 1 for the (a) majority class, > 1 for the others.
pub fn balanced_alpha(class_counts: &[usize; 3], label: CompoundLabel) -> Result<f64, TrainError> {
    let idx = match label.class_index() {
        Some(idx) => idx,
        None => return Err(TrainError::UnlabeledFrame),
    };
    let max = *class_counts.iter().max().expect("three classes");
    if class_counts[idx] == 0 {
        return Err(TrainError::MissingClass { label });
    }
    if class_counts[idx] == max {
        return Ok(1.0);
    }
    Ok(float::sqrt(max as f64 / class_counts[idx] as f64))
}

/// Uniform random parameters in `[-range, +range]`, drawn in a pinned order
/// (hidden weights row-major, hidden biases, output weights row-major,
/// output biases) so a seed fully determines the starting network.
pub fn init_params<R: Rng>(rng: &mut R, range: f64) -> NetworkParams {
    let mut params = NetworkParams::zeroed();
    for row in &mut params.hidden_weights {
        for w in row {
            *w = rng.random_range(-range..=range);
        }
    }
    for b in &mut params.hidden_biases {
        *b = rng.random_range(-range..=range);
    }
    for row in &mut params.output_weights {
        for w in row {
            *w = rng.random_range(-range..=range);
        }
    }
    for b in &mut params.output_biases {
        *b = rng.random_range(-range..=range);
    }
    params
}

/// Shuffle and split a dataset into (train, validation, test).
///
/// The non-train buckets get `floor(n · fraction)` frames each; every
/// leftover frame goes to train.
pub fn split_dataset(
    data: &LabeledDataset,
    fractions: (f64, f64, f64),
    seed: u64,
) -> (LabeledDataset, LabeledDataset, LabeledDataset) {
    let n = data.len();
    let n_val = float::floor(n as f64 * fractions.1) as usize;
    let n_test = float::floor(n as f64 * fractions.2) as usize;
    let n_train = n - n_val - n_test;

    let mut shuffled = data.frames.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);

    let test = shuffled.split_off(n_train + n_val);
    let val = shuffled.split_off(n_train);
    (
        LabeledDataset::new(shuffled),
        LabeledDataset::new(val),
        LabeledDataset::new(test),
    )
}

/// Train a fresh network on a labeled dataset.
///
/// The dataset is shuffled and split by `config.split`, the normalizer is
/// fitted on the training split only, and per-sample updates run with the
/// class-balanced learning rate until the target MSE, the validation
/// patience, or the epoch budget calls the stop (checked in that order).
pub fn train(data: &LabeledDataset, config: &TrainConfig) -> Result<TrainReport, TrainError> {
    config.validate()?;
    if data.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    if data.contains_unlabeled() {
        return Err(TrainError::UnlabeledFrame);
    }

    let (train_split, val_split, _test_split) = split_dataset(data, config.split, config.seed);
    let train_class_counts = train_split.class_counts();
    for idx in 0..3 {
        if train_class_counts[idx] == 0 {
            return Err(TrainError::MissingClass {
                label: CompoundLabel::from_class_index(idx).expect("index in range"),
            });
        }
    }
    let normalizer = fit_normalizer(&train_split.frames)?;

    // Cache normalized inputs, targets and per-sample rates up front; the
    // epoch loop then touches nothing but f64 arrays.
    let mut alphas = [0.0; 3];
    for idx in 0..3 {
        let label = CompoundLabel::from_class_index(idx).expect("index in range");
        alphas[idx] = config.base_learning_rate * balanced_alpha(&train_class_counts, label)?;
    }
    let prepare = |split: &LabeledDataset| -> Vec<(InputVector, TargetVector, usize)> {
        split
            .frames
            .iter()
            .map(|labeled| {
                let input = normalizer.normalize(&labeled.frame);
                let idx = labeled.label.class_index().expect("validated above");
                let target = TargetVector::one_hot(labeled.label).expect("validated above");
                (input, target, idx)
            })
            .collect()
    };
    let train_samples = prepare(&train_split);
    let val_samples = prepare(&val_split);

    let mean_mse = |params: &NetworkParams,
                    samples: &[(InputVector, TargetVector, usize)]| -> f64 {
        let sum: f64 = samples
            .iter()
            .map(|(input, target, _)| mse(target, &forward(params, input).output))
            .sum();
        sum / samples.len() as f64
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = init_params(&mut rng, config.init_range);
    let mut order: Vec<usize> = (0..train_samples.len()).collect();

    let mut epoch_mse = Vec::new();
    let mut validation_mse = Vec::new();
    let mut best_val = f64::INFINITY;
    let mut stale_epochs = 0usize;
    let mut stop_reason = StopReason::MaxEpochs;

    for _epoch in 0..config.max_epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (input, target, class) = &train_samples[i];
            sgd_step(&mut params, input, target, alphas[*class]);
        }

        let train_err = mean_mse(&params, &train_samples);
        epoch_mse.push(train_err);
        if !val_samples.is_empty() {
            validation_mse.push(mean_mse(&params, &val_samples));
        }

        if train_err <= config.target_mse {
            stop_reason = StopReason::TargetReached;
            break;
        }
        if config.validation_patience > 0 {
            if let Some(&val_err) = validation_mse.last() {
                if val_err < best_val {
                    best_val = val_err;
                    stale_epochs = 0;
                } else {
                    stale_epochs += 1;
                    if stale_epochs >= config.validation_patience {
                        stop_reason = StopReason::ValidationEarlyStop;
                        break;
                    }
                }
            }
        }
    }

    Ok(TrainReport {
        params,
        normalizer,
        stop_reason,
        epochs_run: epoch_mse.len(),
        epoch_mse,
        validation_mse,
        train_class_counts,
    })
}
