//! The 5-5-3 log-sigmoid feedforward network.
//!
//! Topology is baked into the types: five sensor inputs, five hidden units,
//! three outputs (one per compound). A forward pass is a handful of dot
//! products over stack arrays — no allocation, no indirection — so the exact
//! same arithmetic can be transliterated into firmware.

use crate::float;

/// Number of sensor inputs (one per gas sensor channel).
pub const INPUTS: usize = 5;
/// Number of hidden-layer neurons.
pub const HIDDEN: usize = 5;
/// Number of output neurons (one per target compound).
pub const OUTPUTS: usize = 3;

/// A normalized five-channel input pattern, each component in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InputVector(pub [f64; INPUTS]);

impl InputVector {
    pub fn new(values: [f64; INPUTS]) -> Self {
        InputVector(values)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<[f64; INPUTS]> for InputVector {
    fn from(values: [f64; INPUTS]) -> Self {
        InputVector(values)
    }
}

/// All weights and biases of the network.
///
/// Rows index neurons, columns index that neuron's inputs, matching the
/// row-major layout used by the model file and the generated firmware.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetworkParams {
    pub hidden_weights: [[f64; INPUTS]; HIDDEN],
    pub hidden_biases: [f64; HIDDEN],
    pub output_weights: [[f64; HIDDEN]; OUTPUTS],
    pub output_biases: [f64; OUTPUTS],
}

impl NetworkParams {
    /// All-zero parameters; every unit outputs exactly 0.5.
    pub fn zeroed() -> Self {
        NetworkParams {
            hidden_weights: [[0.0; INPUTS]; HIDDEN],
            hidden_biases: [0.0; HIDDEN],
            output_weights: [[0.0; HIDDEN]; OUTPUTS],
            output_biases: [0.0; OUTPUTS],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.hidden_weights.iter().flatten().all(|w| w.is_finite())
            && self.hidden_biases.iter().all(|b| b.is_finite())
            && self.output_weights.iter().flatten().all(|w| w.is_finite())
            && self.output_biases.iter().all(|b| b.is_finite())
    }
}

/// Layer activations from one forward pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Activations {
    pub hidden: [f64; HIDDEN],
    pub output: [f64; OUTPUTS],
}

/// Log-sigmoid transfer function `1 / (1 + e^-n)`.
///
/// Evaluated in a sign-split form so neither branch ever exponentiates a
/// positive number: large `|n|` saturates cleanly to 1 or 0 instead of
/// overflowing to NaN.
pub fn logsig(n: f64) -> f64 {
    if n >= 0.0 {
        1.0 / (1.0 + float::exp(-n))
    } else {
        let e = float::exp(n);
        e / (1.0 + e)
    }
}

/// Derivative of the log-sigmoid expressed through its own output:
/// `a · (1 - a)` where `a = logsig(n)`.
pub fn logsig_derivative(activation: f64) -> f64 {
    activation * (1.0 - activation)
}

/// One neuron: `logsig(w · p + b)`.
pub fn unit_forward(weights: &[f64; INPUTS], bias: f64, input: &InputVector) -> f64 {
    let mut n = bias;
    for (w, p) in weights.iter().zip(input.0.iter()) {
        n += w * p;
    }
    logsig(n)
}

/// Full forward pass, returning both layers' activations (the hidden layer is
/// needed again by backpropagation).
pub fn forward(params: &NetworkParams, input: &InputVector) -> Activations {
    let mut hidden = [0.0; HIDDEN];
    for (j, h) in hidden.iter_mut().enumerate() {
        *h = unit_forward(&params.hidden_weights[j], params.hidden_biases[j], input);
    }

    let mut output = [0.0; OUTPUTS];
    for (i, o) in output.iter_mut().enumerate() {
        let mut n = params.output_biases[i];
        for (w, a) in params.output_weights[i].iter().zip(hidden.iter()) {
            n += w * a;
        }
        *o = logsig(n);
    }

    Activations { hidden, output }
}
