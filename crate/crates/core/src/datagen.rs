//! Random program generation, quality filters, demonstrations and the
//! on-disk dataset layout.
//!
//! A dataset directory holds
//!
//! ```text
//! train.jsonl    records assigned to training
//! eval.jsonl     records assigned to evaluation
//! demos.ktb      state-tensor sequences of every demo (see `blob`)
//! vocab.json     token vocabulary
//! manifest.json  seed, generator config, filter report, construct stats
//! ```

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::blob::{BlobError, BlobRef, BlobWriter};
use crate::dsl::{Action, Condition, DslError, Perception, Program, Stmt, Token};
use crate::interpreter::{exec, ExecLimits};
use crate::tasks::config_seed;
use crate::vocab;
use crate::world::{Facing, WorldError, WorldState, MAX_MARKERS};

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Blob(#[from] BlobError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("gave up after {0} attempts")]
    Exhausted(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub max_tokens: usize,
    /// Statement choice: primitive action vs. each control form.
    pub p_action: f64,
    pub p_if: f64,
    pub p_ifelse: f64,
    pub p_while: f64,
    pub p_repeat: f64,
    /// Probability of appending one more statement to a block.
    pub p_continue: f64,
    pub p_negate: f64,
    pub repeat_min: u32,
    pub repeat_max: u32,
    /// Control blocks nested deeper than this become primitive actions.
    pub max_depth: usize,
    pub demos: usize,
    pub demo_rows: usize,
    pub demo_cols: usize,
    pub wall_density: f64,
    pub marker_density: f64,
    pub max_actions: usize,
    /// Off reproduces an unfiltered generator.
    pub filters: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_tokens: 40,
            p_action: 0.6,
            p_if: 0.1,
            p_ifelse: 0.1,
            p_while: 0.1,
            p_repeat: 0.1,
            p_continue: 0.7,
            p_negate: 0.25,
            repeat_min: 2,
            repeat_max: 10,
            max_depth: 4,
            demos: 8,
            demo_rows: 8,
            demo_cols: 8,
            wall_density: 0.1,
            marker_density: 0.1,
            max_actions: 100,
            filters: true,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), DatagenError> {
        let bad = |m: &str| Err(DatagenError::InvalidConfig(m.to_string()));
        let probs = [self.p_action, self.p_if, self.p_ifelse, self.p_while, self.p_repeat];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("statement probabilities must lie in [0, 1]");
        }
        if (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("statement probabilities must sum to 1");
        }
        if self.p_action <= 0.0 {
            return bad("action probability must be positive");
        }
        for p in [self.p_continue, self.p_negate, self.wall_density, self.marker_density] {
            if !(0.0..1.0).contains(&p) {
                return bad("continuation, negation and densities must lie in [0, 1)");
            }
        }
        if self.max_tokens < 5 {
            return bad("max_tokens must allow at least one statement");
        }
        if self.repeat_min < 1 || self.repeat_min > self.repeat_max || self.repeat_max > crate::dsl::MAX_REPEAT {
            return bad("repeat range must satisfy 1 <= min <= max <= 19");
        }
        if self.demo_rows < 2 || self.demo_cols < 2 || self.max_actions == 0 {
            return bad("demo grid must be at least 2x2 and max_actions positive");
        }
        Ok(())
    }

    pub fn limits(&self) -> ExecLimits {
        ExecLimits::new(self.max_actions)
    }
}

struct Sampler<'a> {
    cfg: &'a GenConfig,
    rng: &'a mut ChaCha8Rng,
    /// Tokens emitted so far, counting `DEF run m( m)`.
    tokens: usize,
}

struct Overflow;

impl Sampler<'_> {
    fn spend(&mut self, n: usize) -> Result<(), Overflow> {
        self.tokens += n;
        if self.tokens > self.cfg.max_tokens {
            Err(Overflow)
        } else {
            Ok(())
        }
    }

    fn action(&mut self) -> Action {
        Action::ALL[self.rng.random_range(0..Action::ALL.len())]
    }

    fn condition(&mut self) -> Condition {
        let p = Perception::ALL[self.rng.random_range(0..Perception::ALL.len())];
        if self.rng.random_bool(self.cfg.p_negate) {
            Condition::not(p)
        } else {
            Condition::new(p)
        }
    }

    fn cond_len(c: Condition) -> usize {
        if c.negated {
            6
        } else {
            3
        }
    }

    fn block(&mut self, depth: usize) -> Result<Vec<Stmt>, Overflow> {
        let mut body = vec![self.stmt(depth)?];
        while self.rng.random_bool(self.cfg.p_continue) {
            body.push(self.stmt(depth)?);
        }
        Ok(body)
    }

    fn stmt(&mut self, depth: usize) -> Result<Stmt, Overflow> {
        let c = self.cfg;
        let u: f64 = if depth >= c.max_depth { 0.0 } else { self.rng.random() };
        let mut edge = c.p_action;
        if u < edge {
            self.spend(1)?;
            return Ok(Stmt::Action(self.action()));
        }
        edge += c.p_if;
        if u < edge {
            let cond = self.condition();
            self.spend(3 + Self::cond_len(cond))?;
            return Ok(Stmt::If {
                cond,
                body: self.block(depth + 1)?,
            });
        }
        edge += c.p_ifelse;
        if u < edge {
            let cond = self.condition();
            self.spend(6 + Self::cond_len(cond))?;
            let then_body = self.block(depth + 1)?;
            let else_body = self.block(depth + 1)?;
            return Ok(Stmt::IfElse {
                cond,
                then_body,
                else_body,
            });
        }
        edge += c.p_while;
        if u < edge {
            let cond = self.condition();
            self.spend(3 + Self::cond_len(cond))?;
            return Ok(Stmt::While {
                cond,
                body: self.block(depth + 1)?,
            });
        }
        let count = self.rng.random_range(c.repeat_min..=c.repeat_max);
        self.spend(4)?;
        Ok(Stmt::Repeat {
            count,
            body: self.block(depth + 1)?,
        })
    }
}

/// Draws a grammatical program of at most `cfg.max_tokens` tokens,
/// resampling whenever a draw grows past the limit.
pub fn sample_program(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Program {
    loop {
        let mut s = Sampler { cfg, rng, tokens: 4 };
        if let Ok(body) = s.block(0) {
            return Program::new(body);
        }
    }
}

/// Random demo world: no border ring, independent walls and single markers.
pub fn demo_world(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> WorldState {
    let (rows, cols) = (cfg.demo_rows, cfg.demo_cols);
    let ar = rng.random_range(0..rows);
    let ac = rng.random_range(0..cols);
    let facing = Facing::from_index(rng.random_range(0..4));
    let mut w = WorldState::new(rows, cols, ar, ac, facing);
    for r in 0..rows {
        for c in 0..cols {
            let wall = rng.random_bool(cfg.wall_density);
            let marker = rng.random_bool(cfg.marker_density);
            if (r, c) == (ar, ac) {
                continue;
            }
            if wall {
                w.set_wall(r, c, true);
            } else if marker {
                w.set_markers(r, c, 1);
            }
        }
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FilterReason {
    ContradictoryActions,
    NoOpProgram,
    RepetitiveSubsequence,
}

pub const REPEAT_THRESHOLD: usize = 9;

fn contradictory(a: Token, b: Token) -> bool {
    use Action::*;
    matches!(
        (a, b),
        (Token::Action(TurnLeft), Token::Action(TurnRight))
            | (Token::Action(TurnRight), Token::Action(TurnLeft))
            | (Token::Action(PickMarker), Token::Action(PutMarker))
            | (Token::Action(PutMarker), Token::Action(PickMarker))
    )
}

pub fn has_contradictory_actions(program: &Program) -> bool {
    program.tokens().windows(2).any(|w| contradictory(w[0], w[1]))
}

/// Length of the longest contiguous token run that occurs twice without
/// overlapping.
pub fn longest_repeat(tokens: &[Token]) -> usize {
    let n = tokens.len();
    // run[i][j]: common suffix length of tokens[..i] and tokens[..j], i < j.
    let mut run = vec![vec![0usize; n + 1]; n + 1];
    let mut best = 0;
    for i in 1..=n {
        for j in i + 1..=n {
            if tokens[i - 1] == tokens[j - 1] && run[i - 1][j - 1] < j - i {
                run[i][j] = run[i - 1][j - 1] + 1;
                best = best.max(run[i][j]);
            }
        }
    }
    best
}

/// Ends where it started on every demo world.
pub fn is_no_op(program: &Program, worlds: &[WorldState], limits: ExecLimits) -> bool {
    worlds
        .iter()
        .all(|w| exec(program, w, limits).final_state() == w)
}

/// First rule the program breaks, checked in the order (a), (c), (b).
pub fn filter_program(program: &Program, worlds: &[WorldState], limits: ExecLimits) -> Option<FilterReason> {
    if has_contradictory_actions(program) {
        return Some(FilterReason::ContradictoryActions);
    }
    if longest_repeat(&program.tokens()) > REPEAT_THRESHOLD {
        return Some(FilterReason::RepetitiveSubsequence);
    }
    if is_no_op(program, worlds, limits) {
        return Some(FilterReason::NoOpProgram);
    }
    None
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub attempted: u64,
    pub accepted: u64,
    pub rejected: BTreeMap<FilterReason, u64>,
}

impl FilterReport {
    pub fn rejected_total(&self) -> u64 {
        self.rejected.values().sum()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.accepted as f64 / self.attempted as f64
        }
    }
}

/// Lossless compact world: glyph grid without the agent plus its pose.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldSnapshot {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `#`, `.`, `1`-`9`, `X`.
    pub cells: String,
    pub agent: (usize, usize),
    pub facing: Facing,
}

impl WorldSnapshot {
    pub fn of(w: &WorldState) -> Result<Self, WorldError> {
        let mut cells = String::with_capacity(w.rows * w.cols);
        for r in 0..w.rows {
            for c in 0..w.cols {
                let m = w.markers_at(r, c);
                if w.is_wall(r, c) {
                    if m > 0 {
                        return Err(WorldError::Invalid(format!("markers on wall ({r},{c})")));
                    }
                    cells.push('#');
                } else {
                    cells.push(match m {
                        0 => '.',
                        MAX_MARKERS => 'X',
                        m => (b'0' + m) as char,
                    });
                }
            }
        }
        Ok(WorldSnapshot {
            rows: w.rows,
            cols: w.cols,
            cells,
            agent: w.agent(),
            facing: w.facing,
        })
    }

    pub fn to_world(&self) -> Result<WorldState, WorldError> {
        let chars: Vec<char> = self.cells.chars().collect();
        if self.rows == 0 || self.cols == 0 || chars.len() != self.rows * self.cols {
            return Err(WorldError::Invalid("snapshot size".into()));
        }
        if self.agent.0 >= self.rows || self.agent.1 >= self.cols {
            return Err(WorldError::Invalid("agent outside grid".into()));
        }
        let mut w = WorldState::new(self.rows, self.cols, self.agent.0, self.agent.1, self.facing);
        for (i, ch) in chars.into_iter().enumerate() {
            let (r, c) = (i / self.cols, i % self.cols);
            match ch {
                '#' => w.set_wall(r, c, true),
                '.' => {}
                '1'..='9' => w.set_markers(r, c, ch as u8 - b'0'),
                'X' => w.set_markers(r, c, MAX_MARKERS),
                other => return Err(WorldError::Invalid(format!("glyph {other:?}"))),
            }
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demo {
    pub init: WorldSnapshot,
    pub actions: Vec<Action>,
    /// States `s_0..s_T` in the blob file.
    pub tensors: BlobRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub index: u64,
    pub program: String,
    pub length: usize,
    pub demos: Vec<Demo>,
}

/// Fraction of programs containing at least one of each control construct.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstructStats {
    pub programs: u64,
    pub ifelse: f64,
    pub r#if: f64,
    pub r#while: f64,
    pub repeat: f64,
}

impl ConstructStats {
    pub fn from_programs<'a>(programs: impl IntoIterator<Item = &'a Program>) -> Self {
        let mut counts = [0u64; 4];
        let mut n = 0u64;
        for p in programs {
            n += 1;
            let toks = p.tokens();
            for (k, t) in [Token::IfElse, Token::If, Token::While, Token::Repeat].iter().enumerate() {
                if toks.contains(t) {
                    counts[k] += 1;
                }
            }
        }
        let frac = |c: u64| if n == 0 { 0.0 } else { c as f64 / n as f64 };
        ConstructStats {
            programs: n,
            ifelse: frac(counts[0]),
            r#if: frac(counts[1]),
            r#while: frac(counts[2]),
            repeat: frac(counts[3]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub n: u64,
    pub config: GenConfig,
    pub report: FilterReport,
    pub stats: ConstructStats,
    pub train: u64,
    pub eval: u64,
    pub vocab_version: u32,
    pub vocab_size: usize,
    /// sha256 over train.jsonl, eval.jsonl and demos.ktb, in that order.
    pub content_hash: String,
}

pub const TRAIN_FRACTION: f64 = 0.85;

/// Stream seed of generation attempt `attempt`.
pub fn attempt_seed(seed: u64, attempt: u64) -> u64 {
    config_seed(seed ^ 0x6461_7461_6765_6e00, attempt as usize)
}

struct Candidate {
    program: Program,
    worlds: Vec<WorldState>,
    verdict: Option<FilterReason>,
}

fn attempt(seed: u64, k: u64, cfg: &GenConfig) -> Candidate {
    let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed(seed, k));
    let program = sample_program(&mut rng, cfg);
    let worlds: Vec<WorldState> = (0..cfg.demos).map(|_| demo_world(&mut rng, cfg)).collect();
    let verdict = if cfg.filters {
        filter_program(&program, &worlds, cfg.limits())
    } else {
        None
    };
    Candidate { program, worlds, verdict }
}

/// An accepted program and the demo worlds it was checked on.
pub type Accepted = (Program, Vec<WorldState>);

/// Generates `n` accepted programs with their demo worlds. Attempts run in
/// parallel batches but are consumed in attempt order, so the output does
/// not depend on the thread count.
pub fn generate(n: u64, cfg: &GenConfig, seed: u64) -> Result<(Vec<Accepted>, FilterReport), DatagenError> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(n as usize);
    let mut report = FilterReport::default();
    let max_attempts = n.saturating_mul(1000).max(10_000);
    let mut next = 0u64;
    while (out.len() as u64) < n {
        if next >= max_attempts {
            return Err(DatagenError::Exhausted(next));
        }
        let batch = ((n - out.len() as u64) * 2).clamp(64, 4096);
        let cands: Vec<Candidate> = (next..next + batch)
            .into_par_iter()
            .map(|k| attempt(seed, k, cfg))
            .collect();
        next += batch;
        for c in cands {
            if out.len() as u64 == n {
                break;
            }
            report.attempted += 1;
            match c.verdict {
                Some(r) => *report.rejected.entry(r).or_default() += 1,
                None => {
                    report.accepted += 1;
                    out.push((c.program, c.worlds));
                }
            }
        }
    }
    Ok((out, report))
}

fn split_key(seed: u64, index: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(index.to_le_bytes());
    h.finalize().into()
}

/// `true` at position `i` when record `i` goes to training.
pub fn split(seed: u64, n: u64) -> Vec<bool> {
    let mut order: Vec<u64> = (0..n).collect();
    order.sort_by_key(|&i| split_key(seed, i));
    let n_train = (n as f64 * TRAIN_FRACTION).round() as usize;
    let mut train = vec![false; n as usize];
    for &i in &order[..n_train] {
        train[i as usize] = true;
    }
    train
}

pub const TRAIN_FILE: &str = "train.jsonl";
pub const EVAL_FILE: &str = "eval.jsonl";
pub const DEMO_FILE: &str = "demos.ktb";
pub const VOCAB_FILE: &str = "vocab.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes a full dataset directory.
pub fn build_dataset(n: u64, cfg: &GenConfig, seed: u64, out_dir: &Path) -> Result<DatasetManifest, DatagenError> {
    let (programs, report) = generate(n, cfg, seed)?;
    fs::create_dir_all(out_dir)?;
    let in_train = split(seed, n);
    let mut blob = BlobWriter::create(&out_dir.join(DEMO_FILE))?;
    let mut train = BufWriter::new(File::create(out_dir.join(TRAIN_FILE))?);
    let mut eval = BufWriter::new(File::create(out_dir.join(EVAL_FILE))?);
    let limits = cfg.limits();
    let traces: Vec<Vec<_>> = programs
        .par_iter()
        .map(|(p, worlds)| worlds.iter().map(|w| exec(p, w, limits)).collect())
        .collect();
    for (i, ((program, worlds), traces)) in programs.iter().zip(traces).enumerate() {
        let mut demos = Vec::with_capacity(worlds.len());
        for (w, t) in worlds.iter().zip(traces) {
            let tensors: Vec<_> = t.states.iter().map(WorldState::encode_tensor).collect();
            demos.push(Demo {
                init: WorldSnapshot::of(w)?,
                actions: t.actions,
                tensors: blob.append(&tensors)?,
            });
        }
        let rec = DatasetRecord {
            index: i as u64,
            program: program.to_string(),
            length: program.token_length(),
            demos,
        };
        let sink: &mut dyn Write = if in_train[i] { &mut train } else { &mut eval };
        serde_json::to_writer(&mut *sink, &rec)?;
        sink.write_all(b"\n")?;
    }
    blob.finish()?;
    train.flush()?;
    eval.flush()?;
    drop((train, eval));
    fs::write(
        out_dir.join(VOCAB_FILE),
        serde_json::to_string_pretty(&vocab::vocab_file())?,
    )?;
    let n_train = in_train.iter().filter(|&&t| t).count() as u64;
    let manifest = DatasetManifest {
        seed,
        n,
        config: cfg.clone(),
        report,
        stats: ConstructStats::from_programs(programs.iter().map(|(p, _)| p)),
        train: n_train,
        eval: n - n_train,
        vocab_version: vocab::VOCAB_VERSION,
        vocab_size: vocab::size(),
        content_hash: content_hash(out_dir)?,
    };
    fs::write(out_dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

fn content_hash(dir: &Path) -> Result<String, DatagenError> {
    let mut h = Sha256::new();
    for f in [TRAIN_FILE, EVAL_FILE, DEMO_FILE] {
        h.update(fs::read(dir.join(f))?);
    }
    Ok(hex::encode(h.finalize()))
}

pub fn read_records(path: &Path) -> Result<Vec<DatasetRecord>, DatagenError> {
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

fn record_files(path: &Path) -> Vec<PathBuf> {
    if path.is_dir() {
        vec![path.join(TRAIN_FILE), path.join(EVAL_FILE)]
    } else {
        vec![path.to_path_buf()]
    }
}

/// Construct fractions of a dataset directory or a single records file.
pub fn dataset_stats(path: &Path) -> Result<ConstructStats, DatagenError> {
    let mut programs = Vec::new();
    for f in record_files(path) {
        for r in read_records(&f)? {
            programs.push(r.program.parse::<Program>()?);
        }
    }
    Ok(ConstructStats::from_programs(&programs))
}

pub fn read_manifest(dir: &Path) -> Result<DatasetManifest, DatagenError> {
    Ok(serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Program {
        s.parse().unwrap()
    }

    fn worlds(n: usize) -> Vec<WorldState> {
        let cfg = GenConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        (0..n).map(|_| demo_world(&mut rng, &cfg)).collect()
    }

    #[test]
    fn default_config_is_valid() {
        GenConfig::default().validate().unwrap();
        let bad = GenConfig {
            p_if: 0.2,
            ..GenConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn samples_fit_the_budget_and_reparse() {
        let cfg = GenConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let prog = sample_program(&mut rng, &cfg);
            assert!(prog.token_length() <= 40);
            assert_eq!(prog.to_string().parse::<Program>().unwrap(), prog);
            assert!(prog.depth() <= cfg.max_depth);
        }
    }

    #[test]
    fn contradictory_pairs() {
        let w = worlds(8);
        let l = ExecLimits::default();
        for body in ["turnLeft turnRight move", "move turnRight turnLeft", "putMarker pickMarker", "pickMarker putMarker move"] {
            let prog = p(&format!("DEF run m( {body} m)"));
            assert_eq!(filter_program(&prog, &w, l), Some(FilterReason::ContradictoryActions), "{body}");
        }
        // Only adjacency in the token stream counts.
        let prog = p("DEF run m( turnLeft move turnRight m)");
        assert!(!has_contradictory_actions(&prog));
    }

    #[test]
    fn four_left_turns_is_a_no_op() {
        let prog = p("DEF run m( turnLeft turnLeft turnLeft turnLeft m)");
        assert_eq!(filter_program(&prog, &worlds(8), ExecLimits::default()), Some(FilterReason::NoOpProgram));
    }

    #[test]
    fn single_move_on_open_grid_is_accepted() {
        let open = vec![WorldState::new(8, 8, 3, 3, Facing::East)];
        assert_eq!(filter_program(&p("DEF run m( move m)"), &open, ExecLimits::default()), None);
    }

    #[test]
    fn longest_repeat_oracle() {
        let t = |s: &str| p(s).tokens();
        // "move turnLeft" occurs twice back to back.
        assert_eq!(longest_repeat(&t("DEF run m( move turnLeft move turnLeft m)")), 2);
        // Overlapping occurrences do not count: a run of 5 moves repeats 2 without overlap.
        assert_eq!(longest_repeat(&t("DEF run m( move move move move move m)")), 2);
        assert_eq!(longest_repeat(&t("DEF run m( move m)")), 0);
    }

    #[test]
    fn snapshot_round_trip() {
        for w in worlds(20) {
            let s = WorldSnapshot::of(&w).unwrap();
            assert_eq!(s.to_world().unwrap(), w);
        }
    }

    #[test]
    fn split_sizes() {
        let s = split(1, 1000);
        assert_eq!(s.iter().filter(|&&t| t).count(), 850);
        assert_eq!(s, split(1, 1000));
        assert_ne!(s, split(2, 1000));
    }

    #[test]
    fn generation_is_thread_count_independent() {
        let cfg = GenConfig::default();
        let a = generate(40, &cfg, 11).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| generate(40, &cfg, 11).unwrap());
        assert_eq!(a.1, b.1);
        assert_eq!(
            a.0.iter().map(|x| &x.0).collect::<Vec<_>>(),
            b.0.iter().map(|x| &x.0).collect::<Vec<_>>()
        );
        assert_eq!(a.1.accepted + a.1.rejected_total(), a.1.attempted);
    }

    #[test]
    fn stats_of_single_straight_line_program() {
        let s = ConstructStats::from_programs(&[p("DEF run m( move m)")]);
        assert_eq!((s.ifelse, s.r#if, s.r#while, s.repeat), (0.0, 0.0, 0.0, 0.0));
    }
}
