use std::fmt;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use tinynose::{
    load_dataset, load_model, load_protocol, render_firmware, render_dataset, write_dataset,
    write_model, ModelFile,
};
use tinynose_core::data::{CompoundLabel, LabeledDataset};
use tinynose_core::sensing::{default_protocol, simulate_acquisition};
use tinynose_core::stream::{classify_frame, confusion_matrix, run_stream, Decision};
use tinynose_core::train::{train, TrainConfig};

#[derive(Parser)]
#[command(name = "tinynose", version, about = "Five-sensor e-nose VOC classifier toolkit")]
struct Cli {
    /// Seed for simulation noise, dataset splitting and weight init.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Keep stderr free of progress chatter.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a timed acquisition session into a labeled capture CSV.
    Simulate {
        /// Protocol config (TOML); stock three-compound session if omitted.
        #[arg(long)]
        protocol: Option<PathBuf>,
        /// Output CSV path; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a network on a labeled capture CSV and write a model file.
    Train {
        /// Labeled capture CSV.
        #[arg(long)]
        data: PathBuf,
        /// Where the trained model goes.
        #[arg(long)]
        out: PathBuf,
        /// Optional per-epoch error CSV (epoch,train_mse,validation_mse).
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = TrainConfig::default().base_learning_rate)]
        base_learning_rate: f64,
        #[arg(long, default_value_t = TrainConfig::default().max_epochs)]
        max_epochs: usize,
        #[arg(long, default_value_t = TrainConfig::default().target_mse)]
        target_mse: f64,
        #[arg(long, default_value_t = TrainConfig::default().init_range)]
        init_range: f64,
        /// Consecutive non-improving validation epochs before stopping;
        /// 0 disables the early stop.
        #[arg(long, default_value_t = TrainConfig::default().validation_patience)]
        validation_patience: usize,
        /// Comma-separated train,validation,test fractions.
        #[arg(long, default_value_t = SplitArg::default())]
        split: SplitArg,
    },
    /// Score a labeled capture with a trained model.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Minimum winning score; anything below becomes Unknown.
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
    },
    /// Stream frames through a model, one decision line per frame.
    Stream {
        #[arg(long)]
        model: PathBuf,
        /// Labeled capture CSV to replay.
        #[arg(long, required_unless_present = "live_sim", conflicts_with = "live_sim")]
        data: Option<PathBuf>,
        /// Simulate a session in memory and stream it instead of replaying
        /// a capture file.
        #[arg(long)]
        live_sim: bool,
        /// Protocol config (TOML) for --live-sim; stock session if omitted.
        #[arg(long, requires = "live_sim")]
        protocol: Option<PathBuf>,
        /// Wall-clock delay before each decision, mimicking a device's
        /// sampling cadence; 0 streams flat out.
        #[arg(long, default_value_t = 0)]
        period_ms: u64,
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
    },
    /// Export a model as an embeddable C translation unit.
    Export {
        #[arg(long)]
        model: PathBuf,
        /// Output .c path; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug)]
struct SplitArg(f64, f64, f64);

impl Default for SplitArg {
    fn default() -> Self {
        let (t, v, s) = TrainConfig::default().split;
        SplitArg(t, v, s)
    }
}

impl fmt::Display for SplitArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.0, self.1, self.2)
    }
}

impl std::str::FromStr for SplitArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err("expected three comma-separated fractions, e.g. 0.7,0.15,0.15".to_owned());
        }
        let mut f = [0.0f64; 3];
        for (slot, part) in f.iter_mut().zip(&parts) {
            *slot = part
                .trim()
                .parse()
                .map_err(|_| format!("`{part}` is not a number"))?;
        }
        Ok(SplitArg(f[0], f[1], f[2]))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // The reader hung up (e.g. `tinynose stream ... | head`); that is
        // their call, not an error worth reporting.
        Err(err) if is_broken_pipe(&err) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain()
        .filter_map(|cause| cause.downcast_ref::<std::io::Error>())
        .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { protocol, out } => cmd_simulate(protocol, out, cli.seed, cli.quiet),
        Command::Train {
            data,
            out,
            report,
            base_learning_rate,
            max_epochs,
            target_mse,
            init_range,
            validation_patience,
            split,
        } => {
            let config = TrainConfig {
                base_learning_rate,
                max_epochs,
                target_mse,
                init_range,
                validation_patience,
                split: (split.0, split.1, split.2),
                seed: cli.seed,
            };
            cmd_train(&data, &out, report.as_deref(), &config, cli.quiet)
        }
        Command::Eval {
            model,
            data,
            threshold,
        } => cmd_eval(&model, &data, threshold),
        Command::Stream {
            model,
            data,
            live_sim: _,
            protocol,
            period_ms,
            threshold,
        } => cmd_stream(
            &model,
            data.as_deref(),
            protocol.as_deref(),
            threshold,
            period_ms,
            cli.seed,
            cli.quiet,
        ),
        Command::Export { model, out } => cmd_export(&model, out.as_deref()),
    }
}

fn load_capture(path: &Path) -> Result<LabeledDataset> {
    let data =
        load_dataset(path).with_context(|| format!("reading capture {}", path.display()))?;
    if data.is_empty() {
        bail!("capture {} has no frames", path.display());
    }
    Ok(data)
}

fn cmd_simulate(
    protocol_path: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: u64,
    quiet: bool,
) -> Result<()> {
    let protocol = match &protocol_path {
        Some(path) => {
            load_protocol(path).with_context(|| format!("reading protocol {}", path.display()))?
        }
        None => default_protocol(),
    };
    let data = simulate_acquisition(&protocol, seed)?;
    match &out {
        Some(path) => write_dataset(path, &data)
            .with_context(|| format!("writing capture {}", path.display()))?,
        None => {
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            w.write_all(render_dataset(&data).as_bytes())?;
            w.flush()?;
        }
    }
    if !quiet {
        let counts = data.class_counts();
        let per_compound: Vec<String> = protocol
            .compounds
            .iter()
            .map(|c| {
                let idx = c.label.class_index().expect("protocol labels are compounds");
                format!("{} {}", c.label.dataset_token(), counts[idx])
            })
            .collect();
        eprintln!(
            "simulated {} frames (seed {seed}): {}",
            data.len(),
            per_compound.join(", ")
        );
    }
    Ok(())
}

fn cmd_train(
    data_path: &Path,
    out: &Path,
    report_path: Option<&Path>,
    config: &TrainConfig,
    quiet: bool,
) -> Result<()> {
    let data = load_capture(data_path)?;
    if !quiet {
        eprintln!(
            "training on {} frames from {}",
            data.len(),
            data_path.display()
        );
    }
    let report = train(&data, config)?;

    let model = ModelFile {
        params: report.params,
        normalizer: report.normalizer,
    };
    write_model(out, &model).with_context(|| format!("writing model {}", out.display()))?;

    if let Some(path) = report_path {
        let mut csv = String::from("epoch,train_mse,validation_mse\n");
        for (i, err) in report.epoch_mse.iter().enumerate() {
            let val = report
                .validation_mse
                .get(i)
                .map(|v| v.to_string())
                .unwrap_or_default();
            csv.push_str(&format!("{},{},{}\n", i + 1, err, val));
        }
        std::fs::write(path, csv)
            .with_context(|| format!("writing training report {}", path.display()))?;
    }

    let counts = report.train_class_counts;
    let n = data.len();
    let n_val = (n as f64 * config.split.1).floor() as usize;
    let n_test = (n as f64 * config.split.2).floor() as usize;
    println!(
        "frames {n} (train {}, validation {n_val}, test {n_test})",
        n - n_val - n_test
    );
    println!(
        "train_class_counts lemon {} banana {} grape {}",
        counts[0], counts[1], counts[2]
    );
    println!("stop_reason {}", report.stop_reason);
    println!("epochs_run {}", report.epochs_run);
    match report.final_training_mse() {
        Some(mse) => println!("final_train_mse {mse}"),
        None => println!("final_train_mse n/a"),
    }
    match report.validation_mse.last() {
        Some(v) => println!("final_validation_mse {v}"),
        None => println!("final_validation_mse n/a"),
    }
    if !quiet {
        eprintln!("model written to {}", out.display());
    }
    Ok(())
}

fn cmd_eval(model_path: &Path, data_path: &Path, threshold: f64) -> Result<()> {
    let model =
        load_model(model_path).with_context(|| format!("reading model {}", model_path.display()))?;
    let data = load_capture(data_path)?;

    let decisions: Vec<Decision> = data
        .frames
        .iter()
        .map(|l| classify_frame(&model.params, &model.normalizer, &l.frame, threshold))
        .collect();
    let truths: Vec<CompoundLabel> = data.frames.iter().map(|l| l.label).collect();
    let matrix = confusion_matrix(&decisions, &truths)?;

    println!("frames {}", matrix.total());
    println!("confusion truth/prediction lemon banana grape unknown");
    for truth in 0..3 {
        let label = CompoundLabel::from_class_index(truth).expect("class in range");
        let row = matrix.counts[truth];
        println!(
            "confusion {} {} {} {} {}",
            label.dataset_token(),
            row[0],
            row[1],
            row[2],
            matrix.unknown[truth]
        );
    }
    println!("accuracy {:.6}", matrix.accuracy());
    for class in 0..3 {
        let label = CompoundLabel::from_class_index(class).expect("class in range");
        let fmt_opt = |v: Option<f64>| match v {
            Some(x) => format!("{x:.6}"),
            None => "n/a".to_owned(),
        };
        println!(
            "{} precision {} recall {}",
            label.dataset_token(),
            fmt_opt(matrix.precision(class)),
            fmt_opt(matrix.recall(class))
        );
    }
    println!("unknown_decisions {}", matrix.unknown.iter().sum::<u64>());
    Ok(())
}

fn cmd_stream(
    model_path: &Path,
    data_path: Option<&Path>,
    protocol_path: Option<&Path>,
    threshold: f64,
    period_ms: u64,
    seed: u64,
    quiet: bool,
) -> Result<()> {
    let model =
        load_model(model_path).with_context(|| format!("reading model {}", model_path.display()))?;
    let data = match data_path {
        Some(path) => load_capture(path)?,
        // --live-sim: generate the session in memory and stream it as a
        // device would produce it.
        None => {
            let protocol = match protocol_path {
                Some(path) => load_protocol(path)
                    .with_context(|| format!("reading protocol {}", path.display()))?,
                None => default_protocol(),
            };
            simulate_acquisition(&protocol, seed)?
        }
    };

    let stdout = std::io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    let mut io_error: Option<std::io::Error> = None;

    let summary = run_stream(
        &model.params,
        &model.normalizer,
        data.frames.iter().map(|l| l.frame),
        threshold,
        |decision| {
            if period_ms > 0 {
                thread::sleep(Duration::from_millis(period_ms));
            }
            if io_error.is_none() {
                let line = decision.to_line();
                let result = writeln!(w, "{line}").and_then(|()| {
                    // Paced mode mimics a live readout, so each decision
                    // should appear as it is made, not when the buffer fills.
                    if period_ms > 0 {
                        w.flush()
                    } else {
                        Ok(())
                    }
                });
                if let Err(e) = result {
                    io_error = Some(e);
                }
            }
        },
    )?;
    w.flush()?;
    if let Some(e) = io_error {
        return Err(e).context("writing decisions");
    }

    if !quiet {
        let [lemon, banana, grape, unknown] = summary.per_label;
        eprintln!(
            "{} frames: lemon {lemon}, banana {banana}, grape {grape}, unknown {unknown}",
            summary.frames
        );
    }
    Ok(())
}

fn cmd_export(model_path: &Path, out: Option<&Path>) -> Result<()> {
    let model =
        load_model(model_path).with_context(|| format!("reading model {}", model_path.display()))?;
    let source = render_firmware(&model);
    match out {
        Some(path) => std::fs::write(path, source)
            .with_context(|| format!("writing firmware {}", path.display()))?,
        None => print!("{source}"),
    }
    Ok(())
}
