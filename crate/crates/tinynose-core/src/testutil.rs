//! Reference network shared by unit tests: the hand-tuned deployment
//! weights the firmware ships with, plus frozen forward outputs for the
//! all-zero input.

use crate::net::NetworkParams;

pub(crate) fn reference_params() -> NetworkParams {
    NetworkParams {
        hidden_weights: [
            [0.96053576, -0.49067116, -2.25964108, 2.50108093, 0.19458625],
            [0.46907827, 5.48986523, -4.78114212, -4.99721858, 2.80680594],
            [-1.57636870, -0.58488740, 2.68218068, -1.25514649, 4.43993330],
            [-0.57512130, 2.82730697, 1.04113772, 5.14422524, -1.64028299],
            [2.63760244, 2.83163383, 2.89952632, -0.36016259, -2.66582192],
        ],
        hidden_biases: [-1.02772180, -1.77963962, 2.64182372, -0.97785230, 1.63223721],
        output_weights: [
            [2.24302499, -3.92702259, -2.17715966, 2.91615488, -3.41820192],
            [-2.09640007, 7.71309853, -4.06959432, 0.4036855, 2.39010108],
            [1.86633665, -4.39788864, 6.46096038, -3.02420647, -1.04196844],
        ],
        output_biases: [-2.90288788, -1.10540564, 0.49794008],
    }
}

/// `forward(reference_params(), [0; 5])` outputs, frozen from a 50-digit
/// reference evaluation.
pub(crate) const REFERENCE_ZERO_INPUT_OUTPUT: [f64; 3] = [
    0.0009357329111424151,
    0.09674858312202658,
    0.9908800758426608,
];
