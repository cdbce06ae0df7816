use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use karel_core::blob::BlobWriter;
use karel_core::datagen::{self, read_manifest, GenConfig};
use karel_core::decoder::DecoderSpec;
use karel_core::golden::{self, GOLDEN};
use karel_core::recon::{identity_len, random_target, reconstruct, ReconConfig, ReconMethod};
use karel_core::rollout::{run_macro_episode, undiscounted_return, CyclingProvider, RewardMode, TrajectoryWriter};
use karel_core::tasks::{config_seed, run_policy, Policy};
use karel_core::{
    cem_search, evaluate_program, parse_listing, print_listing, vocab, CemConfig, ExecLimits, MetaEpisodeConfig,
    Program, RunManifest, TaskConfig, TaskId,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "karel", version, about = "Karel programs, tasks, datasets and latent search")]
struct Cli {
    /// Print results as one JSON document.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for independent configurations and records.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, env = "KAREL_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read programs on stdin and print their canonical form.
    Fmt,
    /// Return of a program (or listing) on sampled task configurations.
    Eval {
        #[arg(long)]
        task: TaskId,
        #[arg(long)]
        program: PathBuf,
        #[arg(long, default_value_t = 10)]
        configs: usize,
        /// key=value geometry overrides.
        #[arg(long)]
        task_config: Option<PathBuf>,
        #[arg(long, default_value_t = karel_core::interpreter::DEFAULT_MAX_ACTIONS)]
        max_actions: usize,
    },
    /// Generate a filtered program dataset with demonstrations.
    Datagen {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        out: PathBuf,
        /// JSON generator config; missing fields keep their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Construct statistics of a dataset directory or records file.
    Stats { path: PathBuf },
    /// Latent search for a program that maximizes a task's return.
    Cem {
        #[arg(long)]
        task: TaskId,
        /// `identity:<blocks>` or `cmd:<dim>:<program> [args]`.
        #[arg(long)]
        decoder: DecoderSpec,
        /// key=value search settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        task_config: Option<PathBuf>,
        /// Configurations averaged per objective evaluation.
        #[arg(long, default_value_t = 10)]
        configs: usize,
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        /// Per-iteration CSV history.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Replay the reference example programs on their tasks.
    Golden {
        #[arg(long, value_enum, default_value_t = Suite::Karel)]
        suite: Suite,
        #[arg(long, default_value_t = 10)]
        configs: usize,
    },
    /// Reconstruct a random straight-line program from its behavior.
    Recon {
        #[arg(long)]
        len: usize,
        #[arg(long, default_value = "single")]
        method: ReconMethod,
        #[arg(long)]
        decoder: Option<DecoderSpec>,
        /// key=value search settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        horizon: usize,
    },
    /// Write interface files.
    Export {
        #[command(subcommand)]
        what: Export,
    },
}

#[derive(Subcommand)]
enum Export {
    /// Token vocabulary.
    Vocab {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Example program corpus.
    Golden {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Macro-step trajectory log of a listing replayed on a task.
    Trajectory {
        #[arg(long)]
        task: TaskId,
        #[arg(long)]
        program: PathBuf,
        #[arg(long, default_value_t = 1)]
        episodes: u64,
        #[arg(long, default_value_t = 5)]
        horizon: usize,
        #[arg(long, value_enum, default_value_t = Mode::Dense)]
        reward_mode: Mode,
        /// Directory for trajectory.jsonl and trajectory.ktb.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Karel,
    Hard,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Dense,
    Episodic,
}

impl Suite {
    fn tasks(self) -> &'static [TaskId] {
        use TaskId::*;
        match self {
            Suite::Karel => &[StairClimber, FourCorner, TopOff, Maze, CleanHouse, Harvester],
            Suite::Hard => &[DoorKey, OneStroke, Seeder, Snake],
        }
    }
}

/// Key-value lines for humans, one JSON document with `--json`.
struct Report {
    json: bool,
    lines: Vec<String>,
    doc: serde_json::Map<String, Value>,
}

impl Report {
    fn new(json: bool) -> Self {
        Report { json, lines: Vec::new(), doc: serde_json::Map::new() }
    }

    fn line(&mut self, pairs: &[(&str, String)]) {
        let s: Vec<String> = pairs.iter().map(|(k, v)| format!("{k}={v}")).collect();
        self.lines.push(s.join(" "));
    }

    fn set(&mut self, key: &str, v: impl Serialize) -> Result<()> {
        self.doc.insert(key.to_string(), serde_json::to_value(v)?);
        Ok(())
    }

    fn finish(mut self, manifest: &RunManifest) -> Result<()> {
        let stdout = io::stdout();
        let mut out = stdout.lock();
        if self.json {
            self.doc.insert("manifest".into(), serde_json::to_value(manifest)?);
            writeln!(out, "{}", serde_json::to_string_pretty(&self.doc)?)?;
        } else {
            for l in &self.lines {
                writeln!(out, "{l}")?;
            }
            writeln!(out, "manifest={}", manifest.hash)?;
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read(path)?).with_context(|| format!("{} is not UTF-8", path.display()))
}

fn load_listing(path: &Path) -> Result<Vec<Program>> {
    let programs = parse_listing(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))?;
    if programs.is_empty() {
        bail!("{} holds no program", path.display());
    }
    Ok(programs)
}

fn task_config(task: TaskId, path: Option<&Path>) -> Result<(TaskConfig, Vec<u8>)> {
    let mut cfg = TaskConfig::for_task(task);
    let mut raw = Vec::new();
    if let Some(p) = path {
        raw = read(p)?;
        cfg.apply_overrides(std::str::from_utf8(&raw)?)?;
    }
    cfg.check(task)?;
    Ok((cfg, raw))
}

fn cem_config(base: CemConfig, path: Option<&Path>) -> Result<(CemConfig, Vec<u8>)> {
    let mut cfg = base;
    let mut raw = Vec::new();
    if let Some(p) = path {
        raw = read(p)?;
        cfg.apply_overrides(std::str::from_utf8(&raw)?)?;
    }
    cfg.validate()?;
    Ok((cfg, raw))
}

fn policy(programs: &[Program]) -> Policy<'_> {
    match programs {
        [one] => Policy::Single(one),
        many => Policy::Sequence(many),
    }
}

fn fmt_cmd() -> Result<()> {
    let mut text = String::new();
    io::stdin().read_to_string(&mut text)?;
    writeln!(io::stdout().lock(), "{}", print_listing(&parse_listing(&text)?))?;
    Ok(())
}

fn eval_cmd(
    cli: &Cli,
    task: TaskId,
    program: &Path,
    configs: usize,
    overrides: Option<&Path>,
    max_actions: usize,
) -> Result<()> {
    let programs = load_listing(program)?;
    let (cfg, raw_cfg) = task_config(task, overrides)?;
    let limits = ExecLimits::new(max_actions);
    let config = json!({"task": task, "configs": configs, "task_config": cfg, "max_actions": max_actions});
    let mut manifest = RunManifest::new("eval", config, cli.seed, &[&read(program)?, &raw_cfg]);
    let returns = manifest.time("eval", || {
        (0..configs)
            .into_par_iter()
            .map(|i| run_policy(task, &cfg, policy(&programs), config_seed(cli.seed, i), limits))
            .collect::<Result<Vec<f64>, _>>()
    })?;
    let mean = returns.iter().sum::<f64>() / configs.max(1) as f64;
    let mut r = Report::new(cli.json);
    for (i, v) in returns.iter().enumerate() {
        r.line(&[("config", i.to_string()), ("return", format!("{v:.6}"))]);
    }
    r.line(&[("task", task.to_string()), ("mean", format!("{mean:.6}"))]);
    r.set("task", task)?;
    r.set("returns", &returns)?;
    r.set("mean", mean)?;
    r.finish(&manifest)
}

fn datagen_cmd(cli: &Cli, n: u64, out: &Path, config: Option<&Path>) -> Result<()> {
    let (cfg, raw) = match config {
        Some(p) => {
            let raw = read(p)?;
            (serde_json::from_slice::<GenConfig>(&raw).context("generator config")?, raw)
        }
        None => (GenConfig::default(), Vec::new()),
    };
    let mut manifest = RunManifest::new("datagen", json!({"n": n, "generator": cfg}), cli.seed, &[&raw]);
    let ds = manifest.time("generate", || datagen::build_dataset(n, &cfg, cli.seed, out))?;
    fs::write(out.join("run.json"), serde_json::to_string_pretty(&manifest)?)?;
    let mut r = Report::new(cli.json);
    r.line(&[
        ("records", ds.n.to_string()),
        ("train", ds.train.to_string()),
        ("eval", ds.eval.to_string()),
        ("attempted", ds.report.attempted.to_string()),
        ("acceptance_rate", format!("{:.4}", ds.report.acceptance_rate())),
    ]);
    for (reason, count) in &ds.report.rejected {
        r.line(&[("rejected", format!("{reason:?}")), ("count", count.to_string())]);
    }
    r.line(&[("content_hash", ds.content_hash.clone())]);
    r.set("dataset", &ds)?;
    r.finish(&manifest)
}

fn stats_cmd(cli: &Cli, path: &Path) -> Result<()> {
    let stats = datagen::dataset_stats(path)?;
    let manifest = RunManifest::new("stats", json!({"path": path}), cli.seed, &[]);
    let mut r = Report::new(cli.json);
    r.line(&[("programs", stats.programs.to_string())]);
    for (name, v) in [
        ("IFELSE", stats.ifelse),
        ("IF", stats.r#if),
        ("WHILE", stats.r#while),
        ("REPEAT", stats.repeat),
    ] {
        r.line(&[("construct", name.into()), ("fraction", format!("{v:.4}"))]);
    }
    if path.is_dir() {
        if let Ok(m) = read_manifest(path) {
            r.line(&[("acceptance_rate", format!("{:.4}", m.report.acceptance_rate()))]);
            r.set("filter", &m.report)?;
        }
    }
    r.set("stats", stats)?;
    r.finish(&manifest)
}

#[derive(Serialize)]
struct HistoryRow {
    restart: usize,
    iteration: usize,
    mean_score: f64,
    best_score: f64,
    best_ever: f64,
    sigma: f64,
}

#[allow(clippy::too_many_arguments)]
fn cem_cmd(
    cli: &Cli,
    task: TaskId,
    decoder: &DecoderSpec,
    config: Option<&Path>,
    overrides: Option<&Path>,
    configs: usize,
    restarts: usize,
    history: Option<&Path>,
) -> Result<()> {
    if restarts == 0 {
        bail!("--restarts must be at least 1");
    }
    let (cfg, raw_cfg) = cem_config(CemConfig::default(), config)?;
    let (task_cfg, raw_task) = task_config(task, overrides)?;
    let dec = decoder.build()?;
    let limits = ExecLimits::default();
    let objective = |z: &[f64]| -> f64 {
        match dec.decode(z) {
            Ok(p) => evaluate_program(task, &task_cfg, Policy::Single(&p), configs, cli.seed, limits)
                .map(|(m, _)| m)
                .unwrap_or(0.0),
            Err(_) => 0.0,
        }
    };
    let config_doc = json!({
        "task": task,
        "decoder": format!("{decoder:?}"),
        "cem": cfg,
        "task_config": task_cfg,
        "configs": configs,
        "restarts": restarts,
    });
    let mut manifest = RunManifest::new("cem", config_doc, cli.seed, &[&raw_cfg, &raw_task]);
    let runs = manifest.time("search", || {
        (0..restarts)
            .map(|k| cem_search(objective, dec.dim(), &cfg, config_seed(cli.seed, k)))
            .collect::<Result<Vec<_>, _>>()
    })?;
    if let Some(path) = history {
        let mut w = csv::Writer::from_path(path)?;
        for (restart, run) in runs.iter().enumerate() {
            for h in &run.history {
                w.serialize(HistoryRow {
                    restart,
                    iteration: h.iteration,
                    mean_score: h.mean_score,
                    best_score: h.best_score,
                    best_ever: h.best_ever,
                    sigma: h.sigma,
                })?;
            }
        }
        w.flush()?;
    }
    let (best_k, best) = runs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.best_value.total_cmp(&b.1.best_value).then(b.0.cmp(&a.0)))
        .expect("at least one restart");
    let program = dec.decode(&best.best)?;
    let mut r = Report::new(cli.json);
    for (k, run) in runs.iter().enumerate() {
        r.line(&[
            ("restart", k.to_string()),
            ("best", format!("{:.6}", run.best_value)),
            ("iterations", run.history.len().to_string()),
            ("evaluations", run.evaluations.to_string()),
        ]);
    }
    r.line(&[("best_restart", best_k.to_string()), ("best", format!("{:.6}", best.best_value))]);
    r.line(&[("program", format!("\"{program}\""))]);
    r.set("task", task)?;
    r.set("best_value", best.best_value)?;
    r.set("program", program.to_string())?;
    r.set("latent", &best.best)?;
    r.set(
        "restarts",
        runs.iter().map(|x| json!({"best_value": x.best_value, "evaluations": x.evaluations})).collect::<Vec<_>>(),
    )?;
    r.finish(&manifest)
}

fn golden_cmd(cli: &Cli, suite: Suite, configs: usize) -> Result<()> {
    let listings: Vec<_> = suite.tasks().iter().flat_map(|&t| golden::listings_for(t)).collect();
    let cfg = MetaEpisodeConfig::default();
    let config = json!({"suite": format!("{:?}", suite.tasks()), "configs": configs, "macro": cfg});
    let mut manifest = RunManifest::new("golden", config, cli.seed, &[]);
    let results = manifest.time("evaluate", || {
        listings
            .par_iter()
            .map(|g| g.evaluate(configs, cli.seed, &cfg).map(|(m, _)| m))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut r = Report::new(cli.json);
    let mut rows = Vec::new();
    for (g, mean) in listings.iter().zip(&results) {
        r.line(&[
            ("task", g.task.to_string()),
            ("method", g.method.name().into()),
            ("mean", format!("{mean:.4}")),
            ("reference", format!("{:.2}", g.reference)),
        ]);
        rows.push(json!({"task": g.task, "method": g.method.name(), "mean": mean, "reference": g.reference}));
    }
    r.set("results", rows)?;
    r.finish(&manifest)
}

fn recon_cmd(
    cli: &Cli,
    len: usize,
    method: ReconMethod,
    decoder: Option<&DecoderSpec>,
    config: Option<&Path>,
    horizon: usize,
) -> Result<()> {
    if len == 0 {
        bail!("--len must be positive");
    }
    let spec = decoder.cloned().unwrap_or(DecoderSpec::Identity { max_len: identity_len(len) });
    let base = ReconConfig::default();
    let (cem, raw) = cem_config(base.cem.clone(), config)?;
    let cfg = ReconConfig { method, horizon, cem, ..base };
    let dec = spec.build()?;
    let config_doc = json!({"len": len, "decoder": format!("{spec:?}"), "recon": cfg});
    let mut manifest = RunManifest::new("recon", config_doc, cli.seed, &[&raw]);
    let target = random_target(len, cli.seed);
    let res = manifest.time("search", || reconstruct(&target, dec.as_ref(), &cfg, cli.seed))?;
    let mut r = Report::new(cli.json);
    for (i, (p, s)) in res.programs.iter().zip(&res.step_scores).enumerate() {
        r.line(&[("step", i.to_string()), ("score", format!("{s:.4}")), ("program", format!("\"{p}\""))]);
    }
    r.line(&[
        ("method", method.to_string()),
        ("len", len.to_string()),
        ("score", format!("{:.4}", res.score)),
        ("evaluations", res.evaluations.to_string()),
    ]);
    r.set("result", &res)?;
    r.finish(&manifest)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(writeln!(io::stdout().lock(), "{text}")?),
    }
}

fn export_cmd(cli: &Cli, what: &Export) -> Result<()> {
    match what {
        Export::Vocab { out } => write_or_print(out.as_deref(), &serde_json::to_string_pretty(&vocab::vocab_file())?),
        Export::Golden { out } => write_or_print(out.as_deref(), &serde_json::to_string_pretty(GOLDEN)?),
        Export::Trajectory { task, program, episodes, horizon, reward_mode, out } => {
            if *horizon == 0 {
                bail!("--horizon must be at least 1");
            }
            let programs = load_listing(program)?;
            let task_cfg = TaskConfig::for_task(*task);
            let cfg = MetaEpisodeConfig {
                horizon: *horizon,
                reward_mode: match reward_mode {
                    Mode::Dense => RewardMode::Dense,
                    Mode::Episodic => RewardMode::Episodic,
                },
                ..MetaEpisodeConfig::default()
            };
            fs::create_dir_all(out)?;
            let config = json!({"task": task, "episodes": episodes, "macro": cfg});
            let manifest = RunManifest::new("export", config, cli.seed, &[&read(program)?]);
            let lines = BufWriter::new(fs::File::create(out.join("trajectory.jsonl"))?);
            let mut w = TrajectoryWriter::new(lines, BlobWriter::create(&out.join("trajectory.ktb"))?);
            let mut r = Report::new(cli.json);
            let mut returns = Vec::new();
            for e in 0..*episodes {
                let ts = run_macro_episode(
                    *task,
                    &task_cfg,
                    &mut CyclingProvider::new(programs.clone()),
                    &cfg,
                    config_seed(cli.seed, e as usize),
                )?;
                w.write_episode(e, &ts)?;
                let ret = undiscounted_return(&ts);
                r.line(&[("episode", e.to_string()), ("steps", ts.len().to_string()), ("return", format!("{ret:.6}"))]);
                returns.push(ret);
            }
            w.finish()?;
            fs::write(out.join("run.json"), serde_json::to_string_pretty(&manifest)?)?;
            r.set("returns", returns)?;
            r.finish(&manifest)
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match &cli.command {
        Command::Fmt => fmt_cmd(),
        Command::Eval { task, program, configs, task_config, max_actions } => {
            eval_cmd(cli, *task, program, *configs, task_config.as_deref(), *max_actions)
        }
        Command::Datagen { n, out, config } => datagen_cmd(cli, *n, out, config.as_deref()),
        Command::Stats { path } => stats_cmd(cli, path),
        Command::Cem { task, decoder, config, task_config, configs, restarts, history } => cem_cmd(
            cli,
            *task,
            decoder,
            config.as_deref(),
            task_config.as_deref(),
            *configs,
            *restarts,
            history.as_deref(),
        ),
        Command::Golden { suite, configs } => golden_cmd(cli, *suite, *configs),
        Command::Recon { len, method, decoder, config, horizon } => {
            recon_cmd(cli, *len, *method, decoder.as_ref(), config.as_deref(), *horizon)
        }
        Command::Export { what } => export_cmd(cli, what),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed pipe downstream (`karel ... | head`) is not a failure.
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
