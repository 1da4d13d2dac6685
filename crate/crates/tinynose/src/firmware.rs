//! C source generation for the microcontroller build.
//!
//! The exported translation unit is self-contained C89 (plus `expf` from
//! `<math.h>`): the network constants, the normalizer bounds, the stable
//! log-sigmoid and a `nose_classify()` that goes straight from raw ADC
//! counts to the three class scores. A comment block carries verification
//! vectors computed with the f64 reference implementation so the firmware
//! can be smoke-tested on target.

use std::fmt::Write as _;

use tinynose_core::data::SensorFrame;
use tinynose_core::net::{HIDDEN, INPUTS, OUTPUTS};
use tinynose_core::sensing::CHANNEL_NAMES;
use tinynose_core::stream::{classify_frame, format_significant};

use crate::model_file::ModelFile;

/// The fixed part of the translation unit; everything model-specific is in
/// the generated tables above it.
const CLASSIFY_BODY: &str = r#"/* Log-sigmoid, split by sign so large |n| saturates instead of
 * overflowing expf. */
static float nose_logsig(float n)
{
    if (n >= 0.0f) {
        return 1.0f / (1.0f + expf(-n));
    } else {
        float e = expf(n);
        return e / (1.0f + e);
    }
}

void nose_classify(const unsigned short raw[NOSE_INPUTS],
                   float scores[NOSE_OUTPUTS])
{
    float input[NOSE_INPUTS];
    float hidden[NOSE_HIDDEN];
    int i;
    int j;

    for (i = 0; i < NOSE_INPUTS; i++) {
        float x = ((float)raw[i] - NOSE_NORM_MIN[i])
            / (NOSE_NORM_MAX[i] - NOSE_NORM_MIN[i]);
        if (x < 0.0f) {
            x = 0.0f;
        }
        if (x > 1.0f) {
            x = 1.0f;
        }
        input[i] = x;
    }
    for (j = 0; j < NOSE_HIDDEN; j++) {
        float n = NOSE_HLB[j];
        for (i = 0; i < NOSE_INPUTS; i++) {
            n += NOSE_HLW[j][i] * input[i];
        }
        hidden[j] = nose_logsig(n);
    }
    for (j = 0; j < NOSE_OUTPUTS; j++) {
        float n = NOSE_OLB[j];
        for (i = 0; i < NOSE_HIDDEN; i++) {
            n += NOSE_OLW[j][i] * hidden[i];
        }
        scores[j] = nose_logsig(n);
    }
}
"#;

/// Shortest-round-trip C `float` literal. Display gives plain decimals only
/// (never exponent form), so it just needs a decimal point forced onto whole
/// numbers — a bare `171f` is not C — and the `f` suffix.
fn c_float_literal(x: f64) -> String {
    debug_assert!(x.is_finite());
    let mut s = format!("{x}");
    if !s.contains('.') {
        s.push_str(".0");
    }
    s.push('f');
    s
}

fn literal_row(values: &[f64]) -> String {
    let row: Vec<String> = values.iter().map(|v| c_float_literal(*v)).collect();
    row.join(", ")
}

/// The three on-target smoke-test inputs: every channel at its normalizer
/// minimum, at its maximum, and at the rounded midpoint.
fn verification_inputs(model: &ModelFile) -> [[u16; INPUTS]; 3] {
    let clamp = |x: f64| x.round().clamp(0.0, 1023.0) as u16;
    let mut vectors = [[0u16; INPUTS]; 3];
    let bounds = model.normalizer.min.iter().zip(&model.normalizer.max);
    for (ch, (&min, &max)) in bounds.enumerate() {
        vectors[0][ch] = clamp(min);
        vectors[1][ch] = clamp(max);
        vectors[2][ch] = clamp((min + max) / 2.0);
    }
    vectors
}

/// Render the complete firmware translation unit.
pub fn render_firmware(model: &ModelFile) -> String {
    let mut out = String::new();
    let w = &mut out;

    writeln!(w, "/*").unwrap();
    writeln!(w, " * Five-sensor e-nose classifier (5-5-3 log-sigmoid network).").unwrap();
    writeln!(w, " * Generated by `tinynose export`; regenerate instead of editing.").unwrap();
    writeln!(w, " *").unwrap();
    writeln!(w, " * Channel order: {}.", CHANNEL_NAMES.join(", ")).unwrap();
    writeln!(w, " * nose_classify() takes one frame of raw 10-bit ADC counts and").unwrap();
    writeln!(w, " * fills scores for lemon, banana, grape in that order.").unwrap();
    writeln!(w, " *").unwrap();
    writeln!(w, " * Verification vectors, raw counts -> expected scores. Expected").unwrap();
    writeln!(w, " * values come from the double-precision reference; single-precision").unwrap();
    writeln!(w, " * math on target should land within about 1e-6 of each.").unwrap();
    for raw in verification_inputs(model) {
        let decision = classify_frame(
            &model.params,
            &model.normalizer,
            &SensorFrame {
                timestamp_ms: 0,
                raw,
            },
            0.0,
        );
        let inputs: Vec<String> = raw.iter().map(|r| r.to_string()).collect();
        let scores: Vec<String> = decision
            .scores
            .iter()
            .map(|s| format_significant(*s, 9))
            .collect();
        writeln!(w, " * VEC {} -> {}", inputs.join(" "), scores.join(" ")).unwrap();
    }
    writeln!(w, " */").unwrap();
    writeln!(w, "#include <math.h>").unwrap();
    writeln!(w).unwrap();
    writeln!(w, "#define NOSE_INPUTS {INPUTS}").unwrap();
    writeln!(w, "#define NOSE_HIDDEN {HIDDEN}").unwrap();
    writeln!(w, "#define NOSE_OUTPUTS {OUTPUTS}").unwrap();
    writeln!(w).unwrap();

    writeln!(
        w,
        "static const float NOSE_NORM_MIN[NOSE_INPUTS] = {{ {} }};",
        literal_row(&model.normalizer.min)
    )
    .unwrap();
    writeln!(
        w,
        "static const float NOSE_NORM_MAX[NOSE_INPUTS] = {{ {} }};",
        literal_row(&model.normalizer.max)
    )
    .unwrap();
    writeln!(w).unwrap();

    writeln!(w, "static const float NOSE_HLW[NOSE_HIDDEN][NOSE_INPUTS] = {{").unwrap();
    for row in &model.params.hidden_weights {
        writeln!(w, "    {{ {} }},", literal_row(row)).unwrap();
    }
    writeln!(w, "}};").unwrap();
    writeln!(
        w,
        "static const float NOSE_HLB[NOSE_HIDDEN] = {{ {} }};",
        literal_row(&model.params.hidden_biases)
    )
    .unwrap();
    writeln!(w).unwrap();

    writeln!(w, "static const float NOSE_OLW[NOSE_OUTPUTS][NOSE_HIDDEN] = {{").unwrap();
    for row in &model.params.output_weights {
        writeln!(w, "    {{ {} }},", literal_row(row)).unwrap();
    }
    writeln!(w, "}};").unwrap();
    writeln!(
        w,
        "static const float NOSE_OLB[NOSE_OUTPUTS] = {{ {} }};",
        literal_row(&model.params.output_biases)
    )
    .unwrap();
    writeln!(w).unwrap();

    out.push_str(CLASSIFY_BODY);
    out
}
