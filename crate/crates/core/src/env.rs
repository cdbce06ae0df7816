//! Program-level environment handle: one macro step per call.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{DslError, Program};
use crate::interpreter::{exec_in_task, ExecLimits, Termination};
use crate::tasks::{Episode, TaskConfig, TaskError, TaskId};
use crate::world::{Event, StateTensor};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("environment handle is closed")]
    ClosedHandle,
    #[error("reset must be called before stepping")]
    NotReset,
    #[error("parse error at token {pos}: {0}", pos = .0.position())]
    Parse(#[from] DslError),
    #[error(transparent)]
    Task(#[from] TaskError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub actions: usize,
    pub events: Vec<Event>,
    pub terminated_by: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub state: StateTensor,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Owns one episode of one task. Not shareable: create a handle per actor.
#[derive(Debug)]
pub struct EnvHandle {
    task: TaskId,
    cfg: TaskConfig,
    limits: ExecLimits,
    episode: Option<Episode>,
    closed: bool,
}

impl EnvHandle {
    pub fn new(task: TaskId, cfg: TaskConfig, limits: ExecLimits) -> Result<Self, EnvError> {
        cfg.check(task)?;
        Ok(EnvHandle {
            task,
            cfg,
            limits,
            episode: None,
            closed: false,
        })
    }

    pub fn for_task(task: TaskId) -> Self {
        EnvHandle::new(task, TaskConfig::for_task(task), ExecLimits::default())
            .expect("default task config is valid")
    }

    pub fn task(&self) -> TaskId {
        self.task
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn close(&mut self) {
        self.closed = true;
        self.episode = None;
    }

    /// Starts a fresh episode and returns its initial observation.
    pub fn reset(&mut self, seed: u64) -> Result<StateTensor, EnvError> {
        if self.closed {
            return Err(EnvError::ClosedHandle);
        }
        let ep = Episode::with_config(self.task, &self.cfg, seed)?;
        let t = ep.world.encode_tensor();
        self.episode = Some(ep);
        Ok(t)
    }

    /// Parses and executes one program against the live episode.
    pub fn step_program(&mut self, text: &str) -> Result<StepResult, EnvError> {
        if self.closed {
            return Err(EnvError::ClosedHandle);
        }
        let program: Program = text.parse()?;
        self.step(&program)
    }

    pub fn step(&mut self, program: &Program) -> Result<StepResult, EnvError> {
        if self.closed {
            return Err(EnvError::ClosedHandle);
        }
        let ep = self.episode.as_mut().ok_or(EnvError::NotReset)?;
        let out = exec_in_task(program, ep, self.limits)?;
        Ok(StepResult {
            state: ep.world.encode_tensor(),
            reward: out.total_reward(),
            done: out.done,
            info: StepInfo {
                actions: out.trace.actions.len(),
                events: out.trace.events,
                terminated_by: out.trace.terminated_by,
            },
        })
    }

    pub fn episode(&self) -> Option<&Episode> {
        self.episode.as_ref()
    }
}

/// Contiguous export: rows, cols, channels as u32 LE, then the row-major
/// 0/1 bytes.
pub fn export_tensor(t: &StateTensor) -> Vec<u8> {
    let [r, c, ch] = t.shape();
    let mut out = Vec::with_capacity(12 + t.data.len());
    for d in [r, c, ch] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&t.data);
    out
}

pub fn import_tensor(bytes: &[u8]) -> Option<StateTensor> {
    let dim = |i: usize| bytes.get(i..i + 4).map(|b| u32::from_le_bytes(b.try_into().unwrap()) as usize);
    let (rows, cols, ch) = (dim(0)?, dim(4)?, dim(8)?);
    if ch != crate::world::CHANNELS || bytes.len() != 12 + rows * cols * ch {
        return None;
    }
    Some(StateTensor {
        rows,
        cols,
        data: bytes[12..].to_vec(),
    })
}
