//! End-to-end runs of the `tinynose` binary: the full simulate → train →
//! eval → stream → export loop on real files, plus the error paths a user
//! actually hits.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tinynose::parse_model;
use tinynose_core::CompoundLabel;

fn tinynose(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tinynose"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

/// Simulate a deterministic capture into `dir` and return its path.
fn simulated_capture(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("capture.csv");
    let out = tinynose(
        dir,
        &["simulate", "--seed", "4", "--out", path.to_str().unwrap()],
    );
    assert!(out.status.success(), "simulate failed: {}", stderr(&out));
    path
}

#[test]
fn simulate_is_deterministic_and_labeled() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = tinynose(
        dir.path(),
        &["simulate", "--seed", "4", "--out", "a.csv", "--quiet"],
    );
    let out_b = tinynose(
        dir.path(),
        &["simulate", "--seed", "4", "--out", "b.csv", "--quiet"],
    );
    assert!(out_a.status.success() && out_b.status.success());
    assert!(stderr(&out_a).is_empty(), "--quiet must silence stderr");

    let a = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b, "same seed must reproduce the same capture");

    let mut lines = a.lines();
    assert_eq!(
        lines.next().unwrap(),
        "timestamp_ms,mq2,mq135,tgs2610,tgs2611,mq3,label"
    );
    assert_eq!(lines.count(), 1800);

    // A different seed must actually change the data, and the default
    // (non-quiet) run reports how many frames each compound produced.
    let out_c = tinynose(dir.path(), &["simulate", "--seed", "5", "--out", "c.csv"]);
    assert!(out_c.status.success());
    let summary = stderr(&out_c);
    assert!(
        summary.contains("lemon 600, banana 600, grape 600"),
        "stderr:\n{summary}"
    );
    let c = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn train_eval_stream_export_loop() {
    let dir = tempfile::tempdir().unwrap();
    let capture = simulated_capture(dir.path());
    let capture = capture.to_str().unwrap();

    // Train with stock settings; the stock session is separable enough that
    // the run must stop on the error target, not the epoch budget.
    let out = tinynose(
        dir.path(),
        &[
            "train", "--data", capture, "--out", "model.tnn", "--report", "report.csv",
        ],
    );
    assert!(out.status.success(), "train failed: {}", stderr(&out));
    let log = stdout(&out);
    assert!(
        log.contains("frames 1800 (train 1260, validation 270, test 270)"),
        "unexpected split line in:\n{log}"
    );
    assert!(log.contains("stop_reason target_reached"), "log:\n{log}");

    let epochs_run: usize = log
        .lines()
        .find_map(|l| l.strip_prefix("epochs_run "))
        .expect("epochs_run line")
        .parse()
        .unwrap();

    let model_text = fs::read_to_string(dir.path().join("model.tnn")).unwrap();
    parse_model(&model_text).expect("trained model file parses");

    let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let mut report_lines = report.lines();
    assert_eq!(report_lines.next().unwrap(), "epoch,train_mse,validation_mse");
    assert_eq!(report_lines.count(), epochs_run);

    // Rerunning with identical inputs and flags reproduces both artifacts
    // byte for byte.
    let out = tinynose(
        dir.path(),
        &[
            "train", "--data", capture, "--out", "model2.tnn", "--report", "report2.csv",
            "--quiet",
        ],
    );
    assert!(out.status.success(), "retrain failed: {}", stderr(&out));
    assert_eq!(
        fs::read(dir.path().join("model.tnn")).unwrap(),
        fs::read(dir.path().join("model2.tnn")).unwrap()
    );
    assert_eq!(
        fs::read(dir.path().join("report.csv")).unwrap(),
        fs::read(dir.path().join("report2.csv")).unwrap()
    );

    // Eval on the training capture: everything separable, nothing unknown.
    let out = tinynose(
        dir.path(),
        &[
            "eval", "--model", "model.tnn", "--data", capture, "--threshold", "0.5",
        ],
    );
    assert!(out.status.success(), "eval failed: {}", stderr(&out));
    let log = stdout(&out);
    assert!(log.contains("frames 1800"), "log:\n{log}");
    assert!(
        log.contains("confusion truth/prediction lemon banana grape unknown"),
        "log:\n{log}"
    );
    assert!(log.contains("confusion lemon 600 0 0 0"), "log:\n{log}");
    assert!(log.contains("confusion banana 0 600 0 0"), "log:\n{log}");
    assert!(log.contains("confusion grape 0 0 600 0"), "log:\n{log}");
    assert!(log.contains("accuracy 1.000000"), "log:\n{log}");
    assert!(log.contains("lemon precision 1.000000 recall 1.000000"));
    assert!(log.contains("unknown_decisions 0"));

    // Stream one decision line per frame, in timestamp order.
    let out = tinynose(
        dir.path(),
        &[
            "stream", "--model", "model.tnn", "--data", capture, "--threshold", "0.5",
        ],
    );
    assert!(out.status.success(), "stream failed: {}", stderr(&out));
    let decisions = stdout(&out);
    let mut previous = 0u64;
    let mut count = 0usize;
    for line in decisions.lines() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5, "bad decision line: {line}");
        let ts: u64 = fields[0].parse().unwrap();
        assert!(ts >= previous, "timestamps went backwards at {line}");
        previous = ts;
        assert!(CompoundLabel::parse_dataset_token(&fields[1].to_lowercase()).is_some());
        for score in &fields[2..] {
            let s: f64 = score.parse().unwrap();
            assert!((0.0..=1.0).contains(&s));
        }
        count += 1;
    }
    assert_eq!(count, 1800);
    assert!(decisions.starts_with("600500,"));

    // Export the trained model and spot-check the generated source.
    let out = tinynose(dir.path(), &["export", "--model", "model.tnn"]);
    assert!(out.status.success(), "export failed: {}", stderr(&out));
    let source = stdout(&out);
    assert_eq!(source.matches("VEC ").count(), 3);
    assert!(source.contains("nose_classify"));
    assert!(source.contains("NOSE_HLW"));
}

#[test]
fn an_epoch_budget_of_zero_ships_the_initialization() {
    let dir = tempfile::tempdir().unwrap();
    let capture = simulated_capture(dir.path());
    let out = tinynose(
        dir.path(),
        &[
            "train", "--data", capture.to_str().unwrap(), "--out", "init.tnn",
            "--report", "report.csv", "--max-epochs", "0", "--quiet",
        ],
    );
    assert!(out.status.success(), "train failed: {}", stderr(&out));
    let log = stdout(&out);
    assert!(log.contains("stop_reason max_epochs"), "log:\n{log}");
    assert!(log.contains("epochs_run 0"), "log:\n{log}");
    assert!(log.contains("final_train_mse n/a"), "log:\n{log}");
    assert!(log.contains("final_validation_mse n/a"), "log:\n{log}");

    // No epochs, no report rows — but the untouched initialization is
    // still a well-formed model.
    let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(report, "epoch,train_mse,validation_mse\n");
    let model_text = fs::read_to_string(dir.path().join("init.tnn")).unwrap();
    parse_model(&model_text).expect("initialization model parses");
}

#[test]
fn eval_shows_the_damage_of_a_mislabeled_capture() {
    let dir = tempfile::tempdir().unwrap();
    // All-zero readings score as grape; labeling them lemon forces every
    // frame into one off-diagonal cell of the matrix.
    let mut csv = String::from("timestamp_ms,mq2,mq135,tgs2610,tgs2611,mq3,label\n");
    for i in 1..=4u64 {
        csv.push_str(&format!("{},0,0,0,0,0,lemon\n", 500 * i));
    }
    fs::write(dir.path().join("wrong.csv"), csv).unwrap();
    let model = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/pretrained.tnn");

    let out = tinynose(dir.path(), &["eval", "--model", model, "--data", "wrong.csv"]);
    assert!(out.status.success(), "eval failed: {}", stderr(&out));
    let log = stdout(&out);
    assert!(log.contains("confusion lemon 0 0 4 0"), "log:\n{log}");
    assert!(log.contains("accuracy 0.000000"), "log:\n{log}");
    assert!(
        log.contains("lemon precision n/a recall 0.000000"),
        "log:\n{log}"
    );
    assert!(
        log.contains("grape precision 0.000000 recall n/a"),
        "log:\n{log}"
    );
}

#[test]
fn live_sim_streams_the_same_decisions_as_a_replayed_capture() {
    let dir = tempfile::tempdir().unwrap();
    let model = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/pretrained.tnn");

    let out = tinynose(
        dir.path(),
        &["stream", "--model", model, "--live-sim", "--seed", "4", "--quiet"],
    );
    assert!(out.status.success(), "live-sim failed: {}", stderr(&out));
    let live = stdout(&out);
    assert_eq!(live.lines().count(), 1800);
    assert!(live.starts_with("600500,"));

    // The same seed replayed from a capture file decides identically.
    let capture = simulated_capture(dir.path());
    let out = tinynose(
        dir.path(),
        &[
            "stream", "--model", model, "--data", capture.to_str().unwrap(), "--quiet",
        ],
    );
    assert!(out.status.success(), "replay failed: {}", stderr(&out));
    assert_eq!(stdout(&out), live);

    // The two sources are mutually exclusive.
    let out = tinynose(
        dir.path(),
        &[
            "stream", "--model", model, "--data", capture.to_str().unwrap(), "--live-sim",
        ],
    );
    assert!(!out.status.success());
}

#[test]
fn a_closed_pipe_is_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let capture = simulated_capture(dir.path());
    let model = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/pretrained.tnn");

    // `head` hangs up after two lines; tinynose must treat the resulting
    // EPIPE as a clean exit. Its own status goes to stderr past the pipe.
    let out = Command::new("sh")
        .current_dir(dir.path())
        .arg("-c")
        .arg(format!(
            "{{ {} stream --model {model} --data {} --quiet; echo status=$? >&2; }} | head -n 2",
            env!("CARGO_BIN_EXE_tinynose"),
            capture.display()
        ))
        .output()
        .expect("shell runs");
    assert!(out.status.success());
    assert_eq!(stderr(&out).trim(), "status=0");
    assert_eq!(stdout(&out).lines().count(), 2);
}

#[test]
fn stream_rejects_a_capture_that_goes_back_in_time() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.csv"),
        "timestamp_ms,mq2,mq135,tgs2610,tgs2611,mq3,label\n\
         1000,1,2,3,4,5,lemon\n\
         900,1,2,3,4,5,lemon\n",
    )
    .unwrap();
    let model = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/pretrained.tnn");

    let out = tinynose(
        dir.path(),
        &["stream", "--model", model, "--data", "bad.csv"],
    );
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.starts_with("error:"), "stderr:\n{err}");
    assert!(err.contains("went back in time"), "stderr:\n{err}");
}

#[test]
fn missing_and_malformed_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();

    let out = tinynose(
        dir.path(),
        &["train", "--data", "missing.csv", "--out", "m.tnn"],
    );
    assert!(!out.status.success());
    assert!(stderr(&out).contains("error: reading capture"));

    fs::write(dir.path().join("protocol.toml"), "[[compound]]\nlabel = \"durian\"\nmean = [1,1,1,1,1]\nstddev = [0,0,0,0,0]\n").unwrap();
    let out = tinynose(
        dir.path(),
        &["simulate", "--protocol", "protocol.toml", "--out", "x.csv"],
    );
    assert!(!out.status.success());
    assert!(stderr(&out).starts_with("error:"), "stderr: {}", stderr(&out));
}
