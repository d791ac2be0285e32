//! The `zxrl` command line: corpus sampling, training, optimization,
//! evaluation, rule verification and policy analysis.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;
use zxrl_analysis::copy::{copy_probability, copy_replay};
use zxrl_analysis::evaluate::optimize;
use zxrl_analysis::locality::locality_profile;
use zxrl_analysis::verify::{identity_check, soundness_sweep, Identity, IdentityReport, SoundnessReport};
use zxrl_analysis::{evaluate, AnalysisError, Strategy};
use zxrl_baselines::AnnealConfig;
use zxrl_core::io::{read_diagrams, to_json, write_jsonl};
use zxrl_core::sampler::sample_corpus;
use zxrl_core::seeds::{indexed, substream};
use zxrl_core::{Diagram, EnvConfig, SamplerConfig};
use zxrl_nn::{Checkpoint, NnError, PolicyNet};
use zxrl_ppo::{ConfigError, PpoConfig, PpoError, Trainer};

pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const METRICS_FILE: &str = "metrics.jsonl";
pub const CONFIG_FILE: &str = "config.txt";

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed arguments, configuration or input files.
    #[error("{0}")]
    BadInput(String),
    /// A run violated an internal contract or failed verification.
    #[error("{0}")]
    Contract(String),
    #[error(transparent)]
    Clap(#[from] clap::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::BadInput(_) => 2,
            CliError::Contract(_) => 1,
            CliError::Clap(e) => e.exit_code(),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::Contract(e.to_string())
    }
}

impl From<PpoError> for CliError {
    fn from(e: PpoError) -> Self {
        match e {
            PpoError::Config(c) => config_error(c),
            other => CliError::Contract(other.to_string()),
        }
    }
}

/// Closest configuration key to `key`, if any is reasonably close.
pub fn suggest_key(key: &str) -> Option<&'static str> {
    PpoConfig::KEYS
        .iter()
        .map(|k| (strsim::jaro_winkler(key, k), *k))
        .filter(|(score, _)| *score > 0.75)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, k)| k)
}

fn config_error(e: ConfigError) -> CliError {
    match e {
        ConfigError::UnknownKey(k) => match suggest_key(&k) {
            Some(s) => CliError::BadInput(format!("unknown key `{k}` (did you mean `{s}`?)")),
            None => CliError::BadInput(format!("unknown key `{k}`")),
        },
        other => CliError::BadInput(other.to_string()),
    }
}

fn bad_input(what: impl std::fmt::Display) -> CliError {
    CliError::BadInput(what.to_string())
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{s}` is not a range like 10-15"));
    let (lo, hi) = match s.split_once('-') {
        Some((a, b)) => (parse(a)?, parse(b)?),
        None => (parse(s)?, parse(s)?),
    };
    if lo > hi {
        return Err(format!("empty range `{s}`"));
    }
    Ok(lo..=hi)
}

#[derive(Parser, Debug)]
#[command(name = "zxrl", version, about = "ZX-diagram optimization with reinforcement learning and baselines")]
pub struct Cli {
    /// Root seed; every random component derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Threads for per-diagram work [default: available cores].
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a corpus of random diagrams as JSON lines.
    Sample(SampleArgs),
    /// Train a policy with PPO. Every configuration key is also a flag, e.g. `--n_env 16`.
    Train(TrainArgs),
    /// Optimize the diagrams of a file and write one JSON record per diagram.
    Optimize(OptimizeArgs),
    /// Evaluate a strategy on a corpus and write a JSON report.
    Eval(EvalArgs),
    /// Check every rewrite rule against the semantics oracle.
    Verify(VerifyArgs),
    /// Probe a trained policy.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
}

#[derive(Args, Debug)]
pub struct CorpusArgs {
    /// Number of diagrams.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Initial spider count range.
    #[arg(long, value_parser = parse_range, default_value = "10-15")]
    pub spiders: RangeInclusive<usize>,
    /// Range for the number of inputs and of outputs.
    #[arg(long, value_parser = parse_range, default_value = "1-3")]
    pub io: RangeInclusive<usize>,
}

impl CorpusArgs {
    fn sampler(&self) -> Result<SamplerConfig, CliError> {
        let cfg = SamplerConfig { n_init: self.spiders.clone(), io: self.io.clone(), ..SamplerConfig::default() };
        cfg.validate().map_err(bad_input)?;
        Ok(cfg)
    }

    fn corpus(&self, seed: u64) -> Result<Vec<Diagram>, CliError> {
        Ok(sample_corpus(&self.sampler()?, self.n, &mut substream(seed, "sampler")))
    }
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run directory for the configuration, metrics and checkpoint.
    #[arg(long)]
    pub out: PathBuf,
    /// Continue from the checkpoint in the run directory.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyName {
    Greedy,
    Anneal,
    Policy,
    Random,
}

#[derive(Args, Debug)]
pub struct StrategyArgs {
    #[arg(long, value_enum)]
    pub strategy: StrategyName,
    /// Checkpoint holding the policy; required for `policy`.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Step budget of greedy and environment runs.
    #[arg(long, default_value_t = 200)]
    pub max_steps: usize,
    /// Annealing start temperature.
    #[arg(long, default_value_t = 0.5)]
    pub t_start: f64,
    /// Annealing temperature decay rate.
    #[arg(long, default_value_t = 1e-4)]
    pub c_ann: f64,
    /// Annealing step budget.
    #[arg(long, default_value_t = 20_000)]
    pub anneal_steps: usize,
}

impl StrategyArgs {
    fn load_policy(&self) -> Result<Option<PolicyNet>, CliError> {
        match (self.strategy, &self.checkpoint) {
            (StrategyName::Policy, None) => Err(bad_input("--strategy policy needs --checkpoint")),
            (StrategyName::Policy, Some(p)) => Ok(Some(load_policy(p)?)),
            _ => Ok(None),
        }
    }

    fn strategy<'a>(&self, policy: Option<&'a PolicyNet>) -> Result<Strategy<'a>, CliError> {
        Ok(match self.strategy {
            StrategyName::Greedy => Strategy::Greedy,
            StrategyName::Random => Strategy::Random,
            StrategyName::Policy => Strategy::Policy(policy.expect("policy loaded")),
            StrategyName::Anneal => {
                let cfg = AnnealConfig { t_start: self.t_start, c_ann: self.c_ann, max_steps: self.anneal_steps };
                cfg.validate().map_err(bad_input)?;
                Strategy::Anneal(cfg)
            }
        })
    }
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    /// Diagram file: one JSON document or JSON lines.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub strategy: StrategyArgs,
    /// Corpus file; a fresh corpus is sampled when absent.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[command(flatten)]
    pub sample: CorpusArgs,
    /// Seed of the sampled corpus [default: --seed].
    #[arg(long)]
    pub corpus_seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, value_parser = parse_range, default_value = "5-10")]
    pub spiders: RangeInclusive<usize>,
    #[arg(long, value_parser = parse_range, default_value = "1-3")]
    pub io: RangeInclusive<usize>,
    /// Random symbol assignments per rewrite.
    #[arg(long, default_value_t = 2)]
    pub trials: usize,
    /// Largest accepted deviation from proportionality.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Random instances per inverse-pair identity; 0 skips them.
    #[arg(long, default_value_t = 100)]
    pub identities: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum AnalyzeCommand {
    /// Change of action probabilities when the policy only sees a neighborhood.
    Locality(LocalityArgs),
    /// Copy decision scenario: replayed rewards and policy probabilities.
    Copy(CopyArgs),
}

#[derive(Args, Debug)]
pub struct LocalityArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Neighborhood radii to probe.
    #[arg(long, value_parser = parse_range, default_value = "1-8")]
    pub layers: RangeInclusive<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CopyArgs {
    /// Policy to probe; without it only rewards are replayed.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    pub max_out: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load_policy(path: &Path) -> Result<PolicyNet, CliError> {
    let ck = Checkpoint::load(path).map_err(|e| bad_input(format!("{}: {e}", path.display())))?;
    ck.policy().map_err(|e: NnError| bad_input(format!("{}: {e}", path.display())))
}

fn read_input(path: &Path) -> Result<Vec<Diagram>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| bad_input(format!("{}: {e}", path.display())))?;
    read_diagrams(&text).map_err(|e| bad_input(format!("{}: {e}", path.display())))
}

/// Output sink: a file when a path is given, otherwise `stdout`.
fn with_output<F>(out: &Option<PathBuf>, stdout: &mut dyn Write, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let io_err = |e: std::io::Error| CliError::Contract(format!("write failed: {e}"));
    match out {
        Some(p) => {
            let mut w = BufWriter::new(fs::File::create(p).map_err(|e| bad_input(format!("{}: {e}", p.display())))?);
            f(&mut w).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
        None => f(stdout).map_err(io_err),
    }
}

fn write_json<T: Serialize>(out: &Option<PathBuf>, stdout: &mut dyn Write, value: &T) -> Result<(), CliError> {
    with_output(out, stdout, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

/// Adds one `--key VALUE` flag per configuration key to `train`.
fn command() -> clap::Command {
    Cli::command().mut_subcommand("train", |mut c| {
        for key in PpoConfig::KEYS {
            c = c.arg(Arg::new(*key).long(*key).value_name("VALUE").help_heading("Configuration overrides"));
        }
        c
    })
}

/// Parses `args` (program name first) and runs the command, writing results
/// that have no output file to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = command().try_get_matches_from(args)?;
    let cli = Cli::from_arg_matches(&matches)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(bad_input("--workers must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Contract(e.to_string()))?;
    let mut buf = Vec::new();
    let result = pool.install(|| dispatch(&cli, &matches, &mut buf));
    stdout.write_all(&buf).map_err(|e| CliError::Contract(format!("write failed: {e}")))?;
    result
}

fn dispatch(cli: &Cli, matches: &ArgMatches, stdout: &mut dyn Write) -> Result<(), CliError> {
    let seed = cli.seed;
    match &cli.command {
        Command::Sample(a) => {
            let corpus = a.corpus.corpus(seed)?;
            with_output(&a.out, stdout, |w| write_jsonl(w, &corpus))
        }
        Command::Train(a) => train(a, matches.subcommand_matches("train").expect("train matches"), seed),
        Command::Optimize(a) => optimize_files(a, seed, stdout),
        Command::Eval(a) => {
            let corpus_seed = a.corpus_seed.unwrap_or(seed);
            let corpus = match &a.corpus {
                Some(p) => read_input(p)?,
                None => a.sample.corpus(corpus_seed)?,
            };
            let policy = a.strategy.load_policy()?;
            let strategy = a.strategy.strategy(policy.as_ref())?;
            let report = evaluate(&strategy, &corpus, corpus_seed, seed, a.strategy.max_steps)?;
            write_json(&a.out, stdout, &report)
        }
        Command::Verify(a) => verify(a, seed, stdout),
        Command::Analyze(AnalyzeCommand::Locality(a)) => {
            let policy = load_policy(&a.checkpoint)?;
            let corpus = a.corpus.corpus(seed)?;
            let layers: Vec<usize> = a.layers.clone().collect();
            let stats = locality_profile(&policy, &corpus, &layers, &EnvConfig::default(), seed)?;
            write_json(&a.out, stdout, &stats)
        }
        Command::Analyze(AnalyzeCommand::Copy(a)) => copy(a, stdout),
    }
}

fn train(a: &TrainArgs, m: &ArgMatches, seed: u64) -> Result<(), CliError> {
    let mut cfg = PpoConfig::default();
    if let Some(p) = &a.config {
        let text = fs::read_to_string(p).map_err(|e| bad_input(format!("{}: {e}", p.display())))?;
        cfg.apply_text(&text).map_err(config_error)?;
    }
    for key in PpoConfig::KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            cfg.set(key, v).map_err(config_error)?;
        }
    }
    cfg.validate().map_err(config_error)?;
    fs::create_dir_all(&a.out).map_err(|e| bad_input(format!("{}: {e}", a.out.display())))?;
    let ck_path = a.out.join(CHECKPOINT_FILE);
    let mut trainer = if a.resume {
        let ck = Checkpoint::load(&ck_path).map_err(|e| bad_input(format!("{}: {e}", ck_path.display())))?;
        Trainer::resume(cfg.clone(), &ck)?
    } else {
        Trainer::new(cfg.clone(), seed)?
    };
    let write_err = |e: std::io::Error| CliError::Contract(format!("cannot write run directory: {e}"));
    fs::write(a.out.join(CONFIG_FILE), format!("# seed = {}\n{cfg}", trainer.seed)).map_err(write_err)?;
    let metrics = fs::OpenOptions::new()
        .create(true)
        .append(a.resume)
        .write(true)
        .truncate(!a.resume)
        .open(a.out.join(METRICS_FILE))
        .map_err(write_err)?;
    trainer.run(&mut BufWriter::new(metrics), Some(&ck_path))?;
    Ok(())
}

#[derive(Serialize)]
struct OptimizeRecord {
    index: usize,
    strategy: &'static str,
    #[serde(flatten)]
    run: zxrl_baselines::RunSummary,
    final_diagram: serde_json::Value,
}

fn optimize_files(a: &OptimizeArgs, seed: u64, stdout: &mut dyn Write) -> Result<(), CliError> {
    use rayon::prelude::*;
    let diagrams = read_input(&a.input)?;
    let policy = a.strategy.load_policy()?;
    let strategy = a.strategy.strategy(policy.as_ref())?;
    let records = diagrams
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let mut rng = indexed(seed, strategy.name(), i as u64);
            let (run, final_diagram) = optimize(&strategy, d, a.strategy.max_steps, &mut rng)?;
            let final_diagram = serde_json::from_str(&to_json(&final_diagram)).expect("diagram JSON parses");
            Ok(OptimizeRecord { index: i, strategy: strategy.name(), run, final_diagram })
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    with_output(&a.out, stdout, |w| {
        for r in &records {
            serde_json::to_writer(&mut *w, r)?;
            writeln!(w)?;
        }
        Ok(())
    })
}

#[derive(Serialize)]
struct VerifyReport {
    soundness: SoundnessReport,
    identities: Vec<IdentityReport>,
}

fn verify(a: &VerifyArgs, seed: u64, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = SamplerConfig { n_init: a.spiders.clone(), io: a.io.clone(), ..SamplerConfig::default() };
    cfg.validate().map_err(bad_input)?;
    let soundness = soundness_sweep(&cfg, a.n, seed, a.trials, a.tol);
    let identities: Vec<IdentityReport> = if a.identities == 0 {
        Vec::new()
    } else {
        Identity::ALL.iter().map(|&id| identity_check(id, &cfg, a.identities, 200 * a.identities, seed)).collect()
    };
    let identity_failures: usize = identities.iter().map(|r| r.instances - r.passed).sum();
    eprintln!(
        "{} rewrites on {} diagrams: {} violations ({} degenerate); identity failures: {}",
        soundness.rewrites_checked,
        soundness.diagrams,
        soundness.violations.len(),
        soundness.degenerate,
        identity_failures
    );
    let failed = !soundness.violations.is_empty() || identity_failures > 0;
    write_json(&a.out, stdout, &VerifyReport { soundness, identities })?;
    if failed {
        return Err(CliError::Contract("verification failed".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct CopyRow {
    n_out: usize,
    n_extra: usize,
    copy_reward: i32,
    best_cumulative_reward: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_copy: Option<f64>,
}

fn copy(a: &CopyArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let policy = a.checkpoint.as_deref().map(load_policy).transpose()?;
    let mut rows = Vec::new();
    for n_out in 1..=a.max_out {
        for n_extra in 0..=n_out {
            let r = copy_replay(n_out, n_extra)?;
            let p_copy = match &policy {
                Some(p) => Some(copy_probability(p, n_out, n_extra, &EnvConfig::default())?),
                None => None,
            };
            rows.push(CopyRow {
                n_out,
                n_extra,
                copy_reward: r.copy_reward,
                best_cumulative_reward: r.best_cumulative_reward,
                p_copy,
            });
        }
    }
    write_json(&a.out, stdout, &rows)
}
