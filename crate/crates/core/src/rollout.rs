//! Macro-step engine: a provider hands out one sub-program per macro step,
//! each is executed against the live episode, and rewards are attributed
//! densely (per sub-program) or episodically (all at the end).
//!
//! Also hosts the behavior-match metric used for program reconstruction.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blob::{BlobError, BlobRef, BlobWriter};
use crate::dsl::{DslError, Program};
use crate::interpreter::{exec_in_task, run, ExecLimits, ExecTrace, Termination};
use crate::tasks::{Episode, TaskConfig, TaskError, TaskId};
use crate::world::{state_eq, StateTensor, WorldError, WorldState};

pub type LatentVector = Vec<f64>;

#[derive(Debug, Error)]
pub enum RolloutError {
    #[error("provider failed at macro step {index}: {message}")]
    ProviderFailure { index: usize, message: String },
    #[error(transparent)]
    Task(#[from] TaskError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardMode {
    Dense,
    Episodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetaEpisodeConfig {
    pub horizon: usize,
    pub limits: ExecLimits,
    pub reward_mode: RewardMode,
    pub gamma: f64,
}

impl Default for MetaEpisodeConfig {
    fn default() -> Self {
        MetaEpisodeConfig {
            horizon: 5,
            limits: ExecLimits::default(),
            reward_mode: RewardMode::Dense,
            gamma: 0.99,
        }
    }
}

/// One macro step `(s_i, z_i, program_i, r_next, s_next)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroTransition {
    pub state: StateTensor,
    pub latent: LatentVector,
    pub program: Program,
    pub reward: f64,
    pub next_state: StateTensor,
    pub done: bool,
    /// Primitive actions issued by the sub-program.
    pub actions: usize,
    pub terminated_by: Termination,
}

/// Maps the current macro observation to the next sub-program.
pub trait ProgramProvider {
    fn provide(&mut self, obs: &StateTensor, index: usize) -> Result<(LatentVector, Program), String>;
}

impl<F> ProgramProvider for F
where
    F: FnMut(&StateTensor, usize) -> Result<(LatentVector, Program), String>,
{
    fn provide(&mut self, obs: &StateTensor, index: usize) -> Result<(LatentVector, Program), String> {
        self(obs, index)
    }
}

/// Replays a fixed listing, wrapping around when the horizon is longer.
pub struct CyclingProvider {
    programs: Vec<Program>,
}

impl CyclingProvider {
    pub fn new(programs: Vec<Program>) -> Self {
        assert!(!programs.is_empty(), "listing must hold a program");
        CyclingProvider { programs }
    }
}

impl ProgramProvider for CyclingProvider {
    fn provide(&mut self, _obs: &StateTensor, index: usize) -> Result<(LatentVector, Program), String> {
        Ok((Vec::new(), self.programs[index % self.programs.len()].clone()))
    }
}

/// Runs up to `cfg.horizon` macro steps on a fresh episode of `task`.
pub fn run_macro_episode(
    task: TaskId,
    task_cfg: &TaskConfig,
    provider: &mut dyn ProgramProvider,
    cfg: &MetaEpisodeConfig,
    seed: u64,
) -> Result<Vec<MacroTransition>, RolloutError> {
    let mut episode = Episode::with_config(task, task_cfg, seed)?;
    run_macro_on(&mut episode, provider, cfg)
}

/// Macro steps against an existing episode.
pub fn run_macro_on(
    episode: &mut Episode,
    provider: &mut dyn ProgramProvider,
    cfg: &MetaEpisodeConfig,
) -> Result<Vec<MacroTransition>, RolloutError> {
    assert!(cfg.horizon >= 1, "horizon must be at least 1");
    let mut out: Vec<MacroTransition> = Vec::with_capacity(cfg.horizon);
    for index in 0..cfg.horizon {
        if episode.done {
            break;
        }
        let obs = episode.world.encode_tensor();
        let (latent, program) = provider
            .provide(&obs, index)
            .map_err(|message| RolloutError::ProviderFailure { index, message })?;
        let res = exec_in_task(&program, episode, cfg.limits)?;
        out.push(MacroTransition {
            state: obs,
            latent,
            program,
            reward: res.total_reward(),
            next_state: episode.world.encode_tensor(),
            done: res.done,
            actions: res.trace.len(),
            terminated_by: res.trace.terminated_by,
        });
    }
    if cfg.reward_mode == RewardMode::Episodic {
        let total: f64 = out.iter().map(|t| t.reward).sum();
        let last = out.len().saturating_sub(1);
        for (i, t) in out.iter_mut().enumerate() {
            t.reward = if i == last { total } else { 0.0 };
        }
    }
    Ok(out)
}

/// `sum_i gamma^i * r_i` over the macro rewards.
pub fn discounted_return(transitions: &[MacroTransition], gamma: f64) -> f64 {
    let mut g = 0.0;
    for t in transitions.iter().rev() {
        g = t.reward + gamma * g;
    }
    g
}

pub fn undiscounted_return(transitions: &[MacroTransition]) -> f64 {
    transitions.iter().map(|t| t.reward).sum()
}

/// Executes sub-programs one after another from `state`, each with its own
/// budget, and concatenates their traces.
pub fn exec_sequence(programs: &[Program], state: &WorldState, limits: ExecLimits) -> ExecTrace {
    let mut world = state.clone();
    let mut trace = ExecTrace {
        states: vec![state.clone()],
        actions: Vec::new(),
        events: Vec::new(),
        terminated_by: Termination::ProgramEnd,
    };
    for p in programs {
        let t = run(p, &mut world, limits);
        trace.states.extend(t.states.into_iter().skip(1));
        trace.actions.extend(t.actions);
        trace.events.extend(t.events);
        trace.terminated_by = t.terminated_by;
    }
    trace
}

/// Edit distance with unit costs under a fallible equality.
pub fn levenshtein<T, E>(a: &[T], b: &[T], mut eq: impl FnMut(&T, &T) -> Result<bool, E>) -> Result<usize, E> {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(!eq(x, y)?);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[b.len()])
}

/// `1 - lev(a, b) / max(|a|, |b|)` over state sequences.
pub fn behavior_score(target: &[WorldState], states: &[WorldState]) -> Result<f64, WorldError> {
    let n = target.len().max(states.len());
    if n == 0 {
        return Ok(1.0);
    }
    let d = levenshtein(target, states, state_eq)?;
    Ok(1.0 - d as f64 / n as f64)
}

/// Target state sequence produced by a reference program.
#[derive(Debug, Clone)]
pub struct BehaviorTarget {
    pub states: Vec<WorldState>,
}

impl BehaviorTarget {
    pub fn from_program(program: &Program, init: &WorldState, limits: ExecLimits) -> Self {
        BehaviorTarget {
            states: crate::interpreter::exec(program, init, limits).states,
        }
    }

    pub fn init(&self) -> &WorldState {
        &self.states[0]
    }

    /// Score of a trace against the target.
    pub fn score(&self, trace: &ExecTrace) -> Result<f64, WorldError> {
        behavior_score(&self.states, &trace.states)
    }

    /// Per-step reconstruction rewards: after step `n` the composed prefix
    /// `programs[..=n]` is executed from the target's initial state and
    /// scored.
    pub fn prefix_scores(&self, programs: &[Program], limits: ExecLimits) -> Result<Vec<f64>, WorldError> {
        (1..=programs.len())
            .map(|n| self.score(&exec_sequence(&programs[..n], self.init(), limits)))
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Blob(#[from] BlobError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Parse(#[from] DslError),
}

/// One line of the trajectory log. Tensors live in the companion blob file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub episode: u64,
    pub index: usize,
    pub program: String,
    pub latent: LatentVector,
    pub reward: f64,
    pub done: bool,
    pub actions: usize,
    pub terminated_by: Termination,
    /// Two-step segment: `[state, next_state]`.
    pub tensors: BlobRef,
}

/// Writes macro transitions as JSON lines plus a sidecar blob.
pub struct TrajectoryWriter<W: Write> {
    lines: W,
    blob: BlobWriter,
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(lines: W, blob: BlobWriter) -> Self {
        TrajectoryWriter { lines, blob }
    }

    pub fn write_episode(&mut self, episode: u64, transitions: &[MacroTransition]) -> Result<(), LogError> {
        for (index, t) in transitions.iter().enumerate() {
            let tensors = self.blob.append(&[t.state.clone(), t.next_state.clone()])?;
            let rec = TrajectoryRecord {
                episode,
                index,
                program: t.program.to_string(),
                latent: t.latent.clone(),
                reward: t.reward,
                done: t.done,
                actions: t.actions,
                terminated_by: t.terminated_by,
                tensors,
            };
            serde_json::to_writer(&mut self.lines, &rec)?;
            self.lines.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), LogError> {
        self.lines.flush()?;
        self.blob.finish()?;
        Ok(())
    }
}

pub fn read_trajectory(input: impl BufRead) -> Result<Vec<TrajectoryRecord>, LogError> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}
