use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tacdss::bench::{cmd_bench, cmd_generate_data, cmd_predict, cmd_train, BenchConfig};
use tacdss::data::GenerateOptions;
use tacdss::fuzzy::MfShape;
use tacdss::pipeline::{ModelKind, TrainConfig};
use tacdss::Error;

#[derive(Parser)]
#[command(name = "tacdss", version, about = "Tactical decision scoring with soft-computing models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Hybrid,
    Backprop,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded TACE dataset as CSV.
    GenerateData {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "on")]
        jitter: Switch,
        /// Evenly spaced latent values; with --n 11 and --jitter off this gives the anchor table.
        #[arg(long, alias = "anchors")]
        grid: bool,
    },
    /// Train one model; prints the report as JSON.
    Train {
        /// anfis, anfis-bp, mamdani-gd, mamdani-ga, mlp or cart.
        #[arg(long)]
        model: String,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// JSON training configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        shape: Option<String>,
        /// Epochs (generations for mamdani-ga).
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Train on this fraction and report test error on the rest.
        #[arg(long)]
        fraction: Option<f64>,
    },
    /// Score one situation: fuel,intercept_time,weapon,danger.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        input: String,
    },
    /// Run the comparison matrix.
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Replaces the configured seed list.
        #[arg(long, value_delimiter = ',')]
        seed: Vec<u64>,
    },
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::GenerateData {
            seed,
            n,
            out,
            jitter,
            grid,
        } => {
            let opts = GenerateOptions {
                jitter: matches!(jitter, Switch::On),
                grid,
            };
            let d = cmd_generate_data(seed, n, opts, &out)?;
            eprintln!("wrote {} samples to {}", d.len(), out.display());
        }
        Command::Train {
            model,
            data,
            out,
            config,
            shape,
            epochs,
            mode,
            seed,
            fraction,
        } => {
            let mut kind: ModelKind = model.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
            let mut tc = match config {
                Some(p) => {
                    let s = std::fs::read_to_string(&p).map_err(|e| Error::Io { path: p.clone(), source: e })?;
                    serde_json::from_str::<TrainConfig>(&s).map_err(Error::from)?
                }
                None => TrainConfig::default(),
            };
            if let Some(s) = shape {
                let s: MfShape = s.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
                tc.anfis.shape = s;
                tc.mamdani.shape = s;
            }
            if let Some(e) = epochs {
                tc.anfis.train.epochs = e;
                tc.mamdani.gd.epochs = e;
                tc.mamdani.ga.generations = e;
                tc.mlp.epochs = e;
            }
            kind = match (mode, kind) {
                (Some(Mode::Backprop), ModelKind::Anfis) => ModelKind::AnfisBp,
                (Some(Mode::Hybrid), ModelKind::AnfisBp) => ModelKind::Anfis,
                (Some(_), k) if !matches!(k, ModelKind::Anfis | ModelKind::AnfisBp) => {
                    return Err(Failure::Usage("--mode applies to anfis only".into()))
                }
                _ => kind,
            };
            let trained = cmd_train(kind, &data, &tc, fraction, seed, &out)?;
            println!("{}", serde_json::to_string_pretty(&trained.report).map_err(Error::from)?);
        }
        Command::Predict { model, input } => {
            let x = parse_input(&input).map_err(Failure::Usage)?;
            println!("{}", cmd_predict(&model, &x)?);
        }
        Command::Bench { config, out, seed } => {
            let mut cfg = match config {
                Some(p) => BenchConfig::load(p)?,
                None => BenchConfig::default(),
            };
            if !seed.is_empty() {
                cfg.seeds = seed;
            }
            let report = cmd_bench(&cfg, &out)?;
            for (ds, winner) in &report.best {
                eprintln!("dataset {ds}: lowest test RMSE {winner}");
            }
            eprintln!("results in {}", out.display());
        }
    }
    Ok(())
}

fn parse_input(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("'{p}' is not a number")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected 4 comma-separated values, got {}", v.len()))
}
