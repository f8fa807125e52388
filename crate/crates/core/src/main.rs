use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::Serialize;

use unmark_core::config::Config;
use unmark_core::decisioning::{build_root, grow_tree, select_passer};
use unmark_core::extractor::{build_dataset, read_csv, split_dataset, write_csv};
use unmark_core::harness::{bench, generate_states, BenchSetup, ScenarioConfig};
use unmark_core::positioning::{best_candidate, evaluate_candidates, CandidatePoint};
use unmark_core::predictor::{
    examples_from_samples, HeuristicPredictor, MlpModel, MlpPredictor, PassPredictor, PASS_DIMS,
};
use unmark_core::strategies::StrategyChain;
use unmark_core::world::{read_jsonl, validate, write_jsonl, GameState};
use unmark_core::Error;

/// Bad invocation: exits with status 1 rather than the data-error status 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser, Debug)]
#[command(name = "unmark", version, about = "Pass-prediction driven unmarking for simulated 2D soccer")]
struct Cli {
    /// key = value file overriding the defaults listed below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads, 0 = one per core. Outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate random valid game states as JSON lines.
    GenStates {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label states with the heuristic pass target and write the CSV dataset.
    GenData {
        #[arg(long)]
        states: PathBuf,
        /// Also emit the y-mirrored copy of every state.
        #[arg(long)]
        mirror: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the 180-350-250-11 pass predictor.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Fraction of samples used for training; the rest is the test set.
        #[arg(long, default_value_t = 0.8)]
        split: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to the `epochs` config value.
        #[arg(long)]
        epochs: Option<usize>,
        /// Defaults to the `learning_rate` config value.
        #[arg(long)]
        lr: Option<f64>,
        /// Defaults to the `batch_size` config value.
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Top-1 accuracy of a model on a dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Passer, target point and candidate table for one unmarker.
    Decide {
        /// Without a model the geometric heuristic predictor is used.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        unmarker: u8,
        #[arg(long)]
        dump_tree: Option<PathBuf>,
    },
    /// Paired comparison of strategy versions over seeded episodes.
    Bench {
        #[arg(long, default_value = "V1,V2,V3,V4,V5,V6")]
        versions: String,
        #[arg(long, default_value_t = 500)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Without a model the geometric heuristic predictor is used.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn defaults_help() -> String {
    let mut s = String::from("Config keys and defaults (override with --config FILE):\n");
    for (k, v) in Config::default().entries() {
        s.push_str(&format!("  {k} = {v}\n"));
    }
    s
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("cannot open {}", path.display()))?,
    ))
}

fn load_model(path: &Path) -> Result<MlpModel> {
    let model = MlpModel::load(open(path)?).with_context(|| format!("loading {}", path.display()))?;
    if model.dims() != PASS_DIMS {
        anyhow::bail!("model dims {:?} are not {:?}", model.dims(), PASS_DIMS);
    }
    Ok(model)
}

fn predictor(model: Option<&Path>, cfg: &Config) -> Result<Box<dyn PassPredictor>> {
    Ok(match model {
        Some(p) => Box::new(MlpPredictor {
            model: load_model(p)?,
            physics: cfg.physics,
        }),
        None => Box::new(HeuristicPredictor::new(cfg.physics)),
    })
}

#[derive(Serialize)]
struct DecideOutput {
    unmarker: u8,
    has_possession: bool,
    root_owner: Option<u8>,
    passer: Option<u8>,
    passer_in_tree: bool,
    point: Option<[f64; 2]>,
    candidates: Vec<CandidatePoint>,
}

fn decide(
    cfg: &Config,
    model: Option<&Path>,
    state_path: &Path,
    unmarker: u8,
    dump_tree: Option<&Path>,
) -> Result<()> {
    let text = fs::read_to_string(state_path)
        .with_context(|| format!("cannot read {}", state_path.display()))?;
    let state = GameState::from_json(text.trim(), cfg.physics.player_max_speed)?;
    let report = validate(&state, &cfg.physics);
    if !report.is_valid() {
        anyhow::bail!(Error::InvalidState(report.to_string()));
    }
    if state.teammate(unmarker).is_none() {
        anyhow::bail!(Error::UnknownUnum(unmarker));
    }
    let pred = predictor(model, cfg)?;
    let mut out = DecideOutput {
        unmarker,
        has_possession: false,
        root_owner: None,
        passer: None,
        passer_in_tree: false,
        point: None,
        candidates: Vec::new(),
    };
    match build_root(&state, &cfg.physics) {
        Ok(root) => {
            let (tree, _) = grow_tree(root, pred.as_ref(), &cfg.strategy.tree, &cfg.physics)?;
            if let Some(path) = dump_tree {
                let mut w = create(path)?;
                writeln!(w, "{}", tree.to_json())?;
                w.flush()?;
            }
            out.has_possession = true;
            out.root_owner = Some(tree.root().ball_owner);
            let decision = select_passer(&tree, unmarker)?;
            let cands = evaluate_candidates(
                &decision.root_state,
                decision.passer,
                unmarker,
                cfg.strategy.objective,
                &cfg.physics,
            )?;
            out.passer = Some(decision.passer);
            out.passer_in_tree = decision.found_in_tree;
            out.point = best_candidate(&cands).map(|c| [c.point.x, c.point.y]);
            out.candidates = cands;
        }
        Err(Error::NoPossession) => {}
        Err(e) => return Err(e.into()),
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = Config::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        cfg.apply_text(&text).map_err(|e| usage(e.to_string()))?;
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .context("starting thread pool")?;

    match cli.command {
        Command::GenStates { seed, count, out } => {
            let scenario = ScenarioConfig {
                seed,
                n_states: count,
                ..cfg.scenario
            };
            let states = generate_states(&scenario, &cfg.physics);
            let mut w = create(&out)?;
            write_jsonl(&mut w, &states)?;
            w.flush()?;
            println!("wrote {} states to {}", states.len(), out.display());
        }
        Command::GenData { states, mirror, out } => {
            let states = read_jsonl(open(&states)?, cfg.physics.player_max_speed)?;
            let ds = build_dataset(&states, mirror, &cfg.physics);
            let mut w = create(&out)?;
            write_csv(&mut w, &ds.samples)?;
            w.flush()?;
            println!(
                "wrote {} samples to {} ({} invalid states skipped)",
                ds.samples.len(),
                out.display(),
                ds.skipped
            );
        }
        Command::Train {
            data,
            split,
            seed,
            epochs,
            lr,
            batch,
            out,
        } => {
            if !(split > 0.0 && split < 1.0) {
                return Err(usage(format!("--split {split} must be in (0, 1)")));
            }
            let mut tc = cfg.train;
            tc.seed = seed;
            tc.epochs = epochs.unwrap_or(tc.epochs);
            tc.learning_rate = lr.unwrap_or(tc.learning_rate);
            tc.batch_size = batch.unwrap_or(tc.batch_size);
            tc.check().map_err(|e| usage(e.to_string()))?;
            let samples = read_csv(open(&data)?)?;
            let (train, test) = split_dataset(&samples, split, seed)?;
            let (train, test) = (examples_from_samples(&train), examples_from_samples(&test));
            println!("train {} samples, test {} samples", train.len(), test.len());
            let model = MlpModel::init(&PASS_DIMS, seed)?;
            let (model, _) = model.train(&train, &test, &tc, |s| {
                println!(
                    "epoch {:>3}  loss {:.6}  test_accuracy {:.4}",
                    s.epoch, s.train_loss, s.test_accuracy
                );
            })?;
            let mut w = create(&out)?;
            model.save(&mut w)?;
            w.flush()?;
            println!("saved model to {}", out.display());
        }
        Command::Eval { model, data } => {
            let model = load_model(&model)?;
            let samples = read_csv(open(&data)?)?;
            if samples.is_empty() {
                anyhow::bail!(Error::EmptyBatch);
            }
            let acc = model.accuracy(&examples_from_samples(&samples))?;
            println!("samples {}  top1_accuracy {:.6}", samples.len(), acc);
        }
        Command::Decide {
            model,
            state,
            unmarker,
            dump_tree,
        } => decide(&cfg, model.as_deref(), &state, unmarker, dump_tree.as_deref())?,
        Command::Bench {
            versions,
            episodes,
            seed,
            model,
            out,
        } => {
            let chains = versions
                .split(',')
                .map(|v| StrategyChain::version(v.trim()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| usage(e.to_string()))?;
            if episodes == 0 {
                return Err(usage("--episodes must be >= 1"));
            }
            let pred = predictor(model.as_deref(), &cfg)?;
            let setup = BenchSetup {
                scenario: cfg.scenario,
                strategy: &cfg.strategy,
                episode: &cfg.episode,
                physics: &cfg.physics,
            };
            let report = bench(&chains, episodes, seed, pred.as_ref(), &setup)?;
            fs::write(&out, report.to_csv())
                .with_context(|| format!("cannot write {}", out.display()))?;
            print!("{}", report.to_table());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cmd = Cli::command().after_help(defaults_help());
    let cli = match cmd.try_get_matches().and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
