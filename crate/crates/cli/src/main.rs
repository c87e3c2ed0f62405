//! `gazegen`: corpus generation, heatmap rendering, training, inference and
//! evaluation from the command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use crate::config::{parse_assignment, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "gazegen", version, about = "Reconstruct viewed pages from eye-movement heatmaps")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Each can also come from a `GAZEGEN_*`
/// environment variable.
#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true, env = "GAZEGEN_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = "GAZEGEN_DATASET")]
    dataset: Option<PathBuf>,
    #[arg(long, global = true, env = "GAZEGEN_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true, env = "GAZEGEN_SEED")]
    seed: Option<u64>,
    /// Override any configuration field, e.g. `--set lambda_l1=0.05`.
    #[arg(long = "set", global = true, value_parser = parse_assignment, value_name = "KEY=VALUE")]
    set: Vec<(String, Value)>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a corpus with heatmaps into --out.
    GenCorpus {
        /// `newspaper` or `text`.
        #[arg(long, env = "GAZEGEN_KIND")]
        kind: Option<String>,
        #[arg(long, env = "GAZEGEN_N")]
        n: Option<usize>,
        /// Newspaper page side in pixels.
        #[arg(long)]
        side: Option<usize>,
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// (Re)render the heatmaps of a dataset.
    RenderGaze {
        #[arg(long)]
        sigma: Option<f64>,
        /// `fixations`, `heuristic` or `precomputed`.
        #[arg(long)]
        provider: Option<String>,
        /// Directory of `<id>.png` maps for the precomputed provider.
        #[arg(long)]
        precomputed_dir: Option<PathBuf>,
    },
    /// Train a regime on the training split of a dataset.
    Train {
        /// `phase1`, `phase2`, `end2end_stage2` or `text`.
        #[arg(long, env = "GAZEGEN_REGIME")]
        regime: Option<String>,
        #[arg(long, env = "GAZEGEN_EPOCHS")]
        epochs: Option<usize>,
        #[arg(long)]
        checkpoint_every: Option<usize>,
    },
    /// Generate pages from a checkpoint.
    Infer {
        #[arg(long)]
        checkpoint: PathBuf,
        /// First-stage checkpoint, needed for end-to-end second stages.
        #[arg(long)]
        stage1: Option<PathBuf>,
        /// Which items to generate.
        #[arg(long, value_enum, default_value_t = commands::Items::Test)]
        items: commands::Items,
    },
    /// Score generated pages against ground truth.
    Eval {
        /// Directory of generated `<id>.png` files.
        #[arg(long)]
        generated: PathBuf,
        /// Ground-truth directory; defaults to the matching dataset component.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Dataset component used as truth with --dataset: `seg`, `detail` or `text`.
        #[arg(long)]
        target: Option<String>,
        /// Run the text analysis (segments and glyphs) even without a text dataset.
        #[arg(long)]
        text: bool,
    },
}

fn overrides(cli: &Cli) -> Map<String, Value> {
    let mut m = Map::new();
    let c = &cli.common;
    let mut put = |k: &str, v: Value| {
        m.insert(k.to_string(), v);
    };
    if let Some(p) = &c.dataset {
        put("dataset", Value::from(p.display().to_string()));
    }
    if let Some(p) = &c.out {
        put("out", Value::from(p.display().to_string()));
    }
    if let Some(s) = c.seed {
        put("seed", Value::from(s));
    }
    match &cli.command {
        Command::GenCorpus { kind, n, side, sigma } => {
            if let Some(k) = kind {
                put("kind", Value::from(k.as_str()));
            }
            if let Some(n) = n {
                put("n", Value::from(*n));
            }
            if let Some(s) = side {
                put("side", Value::from(*s));
            }
            if let Some(s) = sigma {
                put("sigma", Value::from(*s));
            }
        }
        Command::RenderGaze {
            sigma,
            provider,
            precomputed_dir,
        } => {
            if let Some(s) = sigma {
                put("sigma", Value::from(*s));
            }
            if let Some(p) = provider {
                put("provider", Value::from(p.as_str()));
            }
            if let Some(p) = precomputed_dir {
                put("precomputed_dir", Value::from(p.display().to_string()));
            }
        }
        Command::Train {
            regime,
            epochs,
            checkpoint_every,
        } => {
            if let Some(r) = regime {
                put("regime", Value::from(r.as_str()));
            }
            if let Some(e) = epochs {
                put("epochs", Value::from(*e));
            }
            if let Some(e) = checkpoint_every {
                put("checkpoint_every", Value::from(*e));
            }
        }
        Command::Infer { .. } | Command::Eval { .. } => {}
    }
    // --set wins over everything else.
    for (k, v) in &c.set {
        m.insert(k.clone(), v.clone());
    }
    m
}

fn run(cli: Cli) -> anyhow::Result<commands::Outcome> {
    let cfg = RunConfig::resolve(cli.common.config.as_deref(), overrides(&cli))?;
    match cli.command {
        Command::GenCorpus { .. } => commands::gen_corpus(&cfg),
        Command::RenderGaze { .. } => commands::render_gaze(&cfg),
        Command::Train { .. } => commands::train(&cfg),
        Command::Infer {
            checkpoint,
            stage1,
            items,
        } => commands::infer(&cfg, &checkpoint, stage1.as_deref(), items),
        Command::Eval {
            generated,
            truth,
            target,
            text,
        } => commands::eval(&cfg, &generated, truth.as_deref(), target.as_deref(), text),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GAZEGEN_LOG", "info")).init();
    match run(Cli::parse()) {
        Ok(outcome) if outcome.failures.is_empty() => ExitCode::SUCCESS,
        Ok(outcome) => {
            for (id, why) in &outcome.failures {
                log::error!("item {id}: {why}");
            }
            log::error!("{} item(s) failed", outcome.failures.len());
            ExitCode::from(1)
        }
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::from(1)
        }
    }
}
