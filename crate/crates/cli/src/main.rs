//! `cccpde` command-line tool.
//!
//! Exit status: 0 on success, 2 for usage errors (bad flags, unknown keys
//! or values), 1 for runtime failures (I/O, malformed inputs, training
//! divergence).

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use settings::{describe, SettingKey, Settings, UsageError};

#[derive(Parser)]
#[command(name = "cccpde", version, about = "Class-conditional flow density estimation with credible-interval abstention")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines (`#` starts a comment)
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override a setting, repeatable
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate train/test CSVs from a mixture preset
    GenData {
        #[command(flatten)]
        common: Common,
        /// Mixture preset name
        #[arg(long)]
        preset: Option<String>,
        /// Root seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Training rows
        #[arg(long)]
        n_train: Option<usize>,
        /// Test rows
        #[arg(long)]
        n_test: Option<usize>,
    },
    /// Train an ffnn baseline or a cccpde model
    Train {
        #[command(flatten)]
        common: Common,
        /// Model kind: ffnn or cccpde
        #[arg(long)]
        model: Option<String>,
        /// Training CSV
        #[arg(long)]
        data: Option<PathBuf>,
        /// Model file to write
        #[arg(long)]
        out_model: Option<PathBuf>,
        /// Root seed
        #[arg(long)]
        seed: Option<u64>,
        /// Training epochs
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Score a test set, build uncertainty reports and filtered ROC curves
    Eval {
        #[command(flatten)]
        common: Common,
        /// Trained cccpde model file
        #[arg(long)]
        cccpde: Option<PathBuf>,
        /// Trained ffnn baseline model file
        #[arg(long)]
        ffnn: Option<PathBuf>,
        /// Test CSV
        #[arg(long)]
        data: Option<PathBuf>,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Abstention threshold on the credible-interval width
        #[arg(long)]
        threshold: Option<f64>,
        /// Worker threads
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Draw samples from one class head
    Sample {
        #[command(flatten)]
        common: Common,
        /// Trained cccpde model file
        #[arg(long)]
        model: Option<PathBuf>,
        /// Class head to sample from
        #[arg(long)]
        class: Option<usize>,
        /// Number of samples
        #[arg(short, long)]
        n: Option<usize>,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Root seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate class densities on a regular 2-D grid
    DensityGrid {
        #[command(flatten)]
        common: Common,
        /// Trained cccpde model file
        #[arg(long)]
        model: Option<PathBuf>,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Grid points per axis
        #[arg(long)]
        resolution: Option<usize>,
        /// Worker threads
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Fit the heteroscedastic 1-D regression demo
    GlmDemo {
        #[command(flatten)]
        common: Common,
        /// Root seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn path_str(p: Option<PathBuf>) -> Option<String> {
    p.map(|p| p.display().to_string())
}

fn layered(keys: &[SettingKey], prefix: Option<&'static str>, common: &Common) -> Result<Settings> {
    let mut s = Settings::new(keys, prefix);
    if let Some(path) = &common.config {
        s.merge_file(path)?;
    }
    s.merge_pairs(&common.set)?;
    Ok(s)
}

fn threads(s: &Settings) -> Result<usize> {
    let n: usize = s.get("threads")?;
    if n == 0 {
        return settings::usage("threads must be at least 1");
    }
    Ok(n)
}

fn run(command: Command) -> Result<String> {
    match command {
        Command::GenData { common, preset, seed, out, n_train, n_test } => {
            let mut s = layered(&commands::gen_data_keys(), Some(commands::COMPONENT_PREFIX), &common)?;
            s.flag("preset", preset);
            s.flag("seed", seed);
            s.flag("out", path_str(out));
            s.flag("n_train", n_train);
            s.flag("n_test", n_test);
            commands::gen_data(&s)
        }
        Command::Train { common, model, data, out_model, seed, epochs } => {
            let mut s = layered(&commands::train_keys(), None, &common)?;
            s.flag("model", model);
            s.flag("data", path_str(data));
            s.flag("out_model", path_str(out_model));
            s.flag("seed", seed);
            s.flag("epochs", epochs);
            commands::train_model(&s)
        }
        Command::Eval { common, cccpde, ffnn, data, out, threshold, threads: t } => {
            let mut s = layered(&commands::eval_keys(), None, &common)?;
            s.flag("cccpde", path_str(cccpde));
            s.flag("ffnn", path_str(ffnn));
            s.flag("data", path_str(data));
            s.flag("out", path_str(out));
            s.flag("threshold", threshold);
            s.flag("threads", t);
            commands::eval(&s, threads(&s)?)
        }
        Command::Sample { common, model, class, n, out, seed } => {
            let mut s = layered(&commands::sample_keys(), None, &common)?;
            s.flag("model", path_str(model));
            s.flag("class", class);
            s.flag("n", n);
            s.flag("out", path_str(out));
            s.flag("seed", seed);
            commands::sample(&s)
        }
        Command::DensityGrid { common, model, out, resolution, threads: t } => {
            let mut s = layered(&commands::density_grid_keys(), None, &common)?;
            s.flag("model", path_str(model));
            s.flag("out", path_str(out));
            s.flag("resolution", resolution);
            s.flag("threads", t);
            commands::density(&s, threads(&s)?)
        }
        Command::GlmDemo { common, seed, out } => {
            let mut s = layered(&commands::glm_demo_keys(), None, &common)?;
            s.flag("seed", seed);
            s.flag("out", path_str(out));
            commands::glm_demo(&s)
        }
    }
}

fn cli_command() -> clap::Command {
    let tables: [(&str, Vec<SettingKey>); 6] = [
        ("gen-data", commands::gen_data_keys()),
        ("train", commands::train_keys()),
        ("eval", commands::eval_keys()),
        ("sample", commands::sample_keys()),
        ("density-grid", commands::density_grid_keys()),
        ("glm-demo", commands::glm_demo_keys()),
    ];
    let mut cmd = Cli::command().after_help("Exit status: 0 success, 1 runtime error, 2 usage error.");
    for (name, keys) in tables {
        let mut help = describe(&keys);
        if name == "gen-data" {
            help.push_str("  component.<id>  custom mixture component `class std count center...`; replaces the preset\n");
        }
        cmd = cmd.mut_subcommand(name, |c| c.after_help(help));
    }
    cmd
}

/// The error chain joined with `: `, skipping causes already spelled out by
/// the message above them.
fn describe_chain(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn main() -> ExitCode {
    let matches = cli_command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli.command) {
        Ok(message) => {
            println!("{message}");
            ExitCode::SUCCESS
        }
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {}", describe_chain(&e));
            ExitCode::from(1)
        }
    }
}
