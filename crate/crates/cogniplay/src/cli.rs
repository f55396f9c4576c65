//! The `cogniplay` command line.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use cogniplay_core::{
    aggregate_ratings, expert_iteration, move_match, probe_positions, rng, strength_match, Agent,
    GameState, TrainConfig,
};
use serde_json::{json, Value};

use crate::formats::{self, AgentFile};
use crate::service::{self, AppState, ServiceConfig};
use crate::store::{parse_player, SessionStore};

#[derive(Debug, Parser)]
#[command(
    name = "cogniplay",
    version,
    about = "Human-like game agent for m,n,k games"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expert-iteration training from zero weights.
    Train(TrainArgs),
    /// Play against the agent in the terminal.
    Play(PlayArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Evaluation reports, printed as JSON.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Agent self-play printing one JSON line per search.
    Bench(BenchArgs),
}

/// Where an agent comes from: a config file, a preset and weights.
#[derive(Debug, Args)]
pub struct AgentArgs {
    /// ttt, gomoku, renju or mnk-CxRxK.
    #[arg(long)]
    pub game: Option<String>,
    /// vanilla or human; ignored when --config sets one.
    #[arg(long)]
    pub preset: Option<String>,
    /// Agent config JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Weights checkpoint JSON.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Search iterations per decision.
    #[arg(long)]
    pub iterations: Option<u32>,
}

impl AgentArgs {
    pub fn resolve(&self) -> Result<AgentFile> {
        let mut file = match &self.config {
            Some(path) => AgentFile::load(path, self.game.as_deref())?,
            None => {
                let mut doc = json!({ "game": self.game.as_deref().unwrap_or("ttt") });
                if let Some(p) = &self.preset {
                    doc["preset"] = json!(p);
                }
                AgentFile::from_value(&doc, None, None)?
            }
        };
        if let Some(w) = &self.weights {
            file.weights = Some(w.clone());
        }
        if let Some(b) = self.iterations {
            file.config.search.iterations = b;
            file.config.validate()?;
        }
        Ok(file)
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, default_value = "ttt")]
    pub game: String,
    /// JSON with optional "agent" (agent config) and "train" sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for checkpoints and the report.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub iterations: Option<u32>,
    #[arg(long)]
    pub games: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Size of the fixed probe set for the certain fraction.
    #[arg(long, default_value_t = 200)]
    pub probe: usize,
}

#[derive(Debug, Args)]
pub struct PlayArgs {
    #[command(flatten)]
    pub agent: AgentArgs,
    #[arg(long, default_value = "P1")]
    pub human_side: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "COGNIPLAY_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "COGNIPLAY_HOST", default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, env = "COGNIPLAY_DATA_DIR", default_value = "data")]
    pub data_dir: PathBuf,
    /// Weights per game, as GAME=PATH; repeatable.
    #[arg(long = "weights", value_parser = parse_weights_arg)]
    pub weights: Vec<(String, PathBuf)>,
    /// Search iterations per agent move, overriding the presets.
    #[arg(long)]
    pub iterations: Option<u32>,
    /// Directory of static files served under /.
    #[arg(long, env = "COGNIPLAY_STATIC_DIR")]
    pub static_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_weights_arg(s: &str) -> Result<(String, PathBuf), String> {
    let (game, path) = s
        .split_once('=')
        .ok_or_else(|| format!("expected GAME=PATH, got '{s}'"))?;
    Ok((game.to_string(), PathBuf::from(path)))
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Move-matching accuracy on a JSONL dataset.
    Movematch(MoveMatchArgs),
    /// Head-to-head match between two agent configs.
    Strength(StrengthArgs),
    /// Aggregate blind-review ratings from a session store.
    Ratings(RatingsArgs),
}

#[derive(Debug, Args)]
pub struct MoveMatchArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub agent: AgentArgs,
    /// Comma-separated k values for top-k accuracy.
    #[arg(long, value_delimiter = ',', default_value = "1,3,5")]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct StrengthArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long)]
    pub game: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub games: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RatingsArgs {
    #[arg(long)]
    pub store: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub agent: AgentArgs,
    #[arg(long, default_value_t = 10)]
    pub games: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Train(a) => train(a, out),
        Command::Play(a) => play(a, &mut std::io::stdin().lock(), out),
        Command::Serve(a) => serve(a),
        Command::Eval(EvalCommand::Movematch(a)) => eval_movematch(a, out),
        Command::Eval(EvalCommand::Strength(a)) => eval_strength(a, out),
        Command::Eval(EvalCommand::Ratings(a)) => eval_ratings(a, out),
        Command::Bench(a) => bench(a, out),
    }
}

fn train(args: TrainArgs, out: &mut dyn Write) -> Result<()> {
    let doc: Value = match &args.config {
        Some(p) => serde_json::from_str(
            &fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )
        .with_context(|| format!("parsing {}", p.display()))?,
        None => json!({}),
    };
    let agent_doc = doc.get("agent").cloned().unwrap_or_else(|| json!({}));
    let agent = AgentFile::from_value(&agent_doc, Some(&args.game), None)?;
    let mut train_doc = serde_json::to_value(TrainConfig::default())?;
    if let Some(over) = doc.get("train").and_then(Value::as_object) {
        for (k, v) in over {
            if train_doc.get(k).is_none() {
                bail!("unknown train config key '{k}'");
            }
            train_doc[k] = v.clone();
        }
    }
    let mut cfg: TrainConfig = serde_json::from_value(train_doc).context("train config")?;
    if let Some(i) = args.iterations {
        cfg.iterations = i;
    }
    if let Some(g) = args.games {
        cfg.games_per_iter = g;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let probe = probe_positions(&agent.spec, args.probe, rng::derive(cfg.seed, 7));
    let mut saved = Ok(());
    let (_, report) = expert_iteration(&agent.spec, &agent.config, &cfg, &probe, |i, fs| {
        if saved.is_ok() {
            saved = formats::save_weights(&args.out.join(formats::checkpoint_name(i)), fs);
        }
    })?;
    saved?;

    let mut csv = csv::Writer::from_path(args.out.join("report.csv"))?;
    let mut jsonl = String::new();
    for row in &report.rows {
        csv.serialize(row)?;
        jsonl.push_str(&serde_json::to_string(row)?);
        jsonl.push('\n');
    }
    csv.flush()?;
    fs::write(args.out.join("report.jsonl"), jsonl)?;
    let last = report.rows.last().expect("at least one iteration");
    writeln!(
        out,
        "{}",
        json!({
            "iterations": report.rows.len(),
            "features": last.feature_count,
            "heldout_ce": last.heldout_ce,
            "heldout_baseline": last.heldout_baseline,
            "samples_from_certain": report.samples_from_certain,
            "checkpoint": args.out.join(formats::checkpoint_name(last.iteration)),
        })
    )?;
    Ok(())
}

/// Interactive game on `input`/`out`; moves are typed as `h8`.
pub fn play(args: PlayArgs, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<()> {
    let agent_file = args.agent.resolve()?;
    let fs = agent_file.features()?;
    let human = parse_player(&args.human_side)?;
    let mut agent = Agent::new(&fs, agent_file.config.clone());
    let mut state = GameState::new(agent_file.spec);
    let mut line = String::new();
    while !state.is_terminal() {
        if state.to_move() == human {
            write!(out, "{state}\nyour move ({:?}): ", human)?;
            out.flush()?;
            line.clear();
            if input.read_line(&mut line)? == 0 {
                bail!("input ended before the game finished");
            }
            let text = line.trim();
            if text == "quit" {
                bail!("game abandoned");
            }
            match text.parse().map_err(anyhow::Error::from).and_then(|a| {
                state.play(a)?;
                Ok(())
            }) {
                Ok(()) => {}
                Err(e) => writeln!(out, "{e}")?,
            }
        } else {
            let d = agent.decide(&state, rng::derive(args.seed, state.stone_count() as u64))?;
            let how = match &d.search {
                Some(s) => format!("searched {} iterations", s.stats.iterations),
                None => "certain".to_string(),
            };
            writeln!(out, "agent plays {} ({how})", d.action)?;
            state.play(d.action)?;
        }
    }
    let verdict = match state.outcome().winner() {
        None => "draw".to_string(),
        Some(p) if p == human => "you win".to_string(),
        Some(_) => "agent wins".to_string(),
    };
    writeln!(out, "{state}\n{verdict}")?;
    Ok(())
}

fn serve(args: ServeArgs) -> Result<()> {
    let store = SessionStore::open(&args.data_dir)?;
    let cfg = ServiceConfig {
        seed: args.seed,
        iterations: args.iterations,
        weights: args.weights.into_iter().collect::<BTreeMap<_, _>>(),
        static_dir: args.static_dir,
    };
    let state = AppState::new(store, cfg)?;
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|e| anyhow!("bad address {}:{}: {e}", args.host, args.port))?;
    tokio::runtime::Runtime::new()?.block_on(service::serve(addr, state))
}

fn eval_movematch(args: MoveMatchArgs, out: &mut dyn Write) -> Result<()> {
    let agent_file = args.agent.resolve()?;
    let fs = agent_file.features()?;
    let data = formats::read_dataset(&args.data, agent_file.spec)?;
    let mut agent = Agent::new(&fs, agent_file.config);
    let report = move_match(&data, &mut agent, &args.k, args.seed)?;
    let mut doc = serde_json::to_value(&report)?;
    doc["source"] = json!(data.source);
    doc["extensions"] = json!(["topk"]);
    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

fn eval_strength(args: StrengthArgs, out: &mut dyn Write) -> Result<()> {
    let a = AgentFile::load(&args.a, args.game.as_deref())?;
    let b = AgentFile::load(&args.b, args.game.as_deref())?;
    if a.spec != b.spec {
        bail!("the two configs are for different games");
    }
    let (fa, fb) = (a.features()?, b.features()?);
    let report = strength_match(
        &mut Agent::new(&fa, a.config),
        &mut Agent::new(&fb, b.config),
        &a.spec,
        args.games,
        args.seed,
    )?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

fn eval_ratings(args: RatingsArgs, out: &mut dyn Write) -> Result<()> {
    if !args.store.is_dir() {
        bail!("no store at {}", args.store.display());
    }
    let store = SessionStore::open(&args.store)?;
    let ratings: Vec<_> = store
        .load_all()?
        .into_iter()
        .flat_map(|r| r.ratings)
        .collect();
    let report = aggregate_ratings(&ratings, &store.truth())?;
    let mut doc = serde_json::to_value(&report)?;
    doc["extensions"] = json!(["discrimination_accuracy"]);
    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

fn bench(args: BenchArgs, out: &mut dyn Write) -> Result<()> {
    let agent_file = args.agent.resolve()?;
    let fs = agent_file.features()?;
    let mut agent = Agent::new(&fs, agent_file.config);
    for g in 0..args.games {
        let seed = rng::derive(args.seed, g as u64);
        let mut state = GameState::new(agent_file.spec);
        while !state.is_terminal() {
            let start = Instant::now();
            let d = agent.decide(&state, rng::derive(seed, state.stone_count() as u64))?;
            let elapsed = start.elapsed().as_secs_f64() * 1000.0;
            if let Some(s) = &d.search {
                writeln!(
                    out,
                    "{}",
                    json!({
                        "game": g,
                        "ply": state.stone_count(),
                        "iterations": s.stats.iterations,
                        "expanded": s.stats.expanded,
                        "recycled": s.stats.recycled,
                        "max_depth": s.stats.max_depth_reached,
                        "elapsed_ms": elapsed,
                    })
                )?;
            }
            state.play(d.action)?;
        }
    }
    Ok(())
}

/// Entry point used by the binary: parse, run, map errors to exit codes.
pub fn main_with_args() -> std::process::ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            std::process::ExitCode::from(1)
        }
    }
}

fn one_line(e: &anyhow::Error) -> String {
    format!("{e:#}").replace('\n', " ")
}
