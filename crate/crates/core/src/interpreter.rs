//! Program execution under an action budget.
//!
//! Only the five primitive actions count against the budget; perception
//! checks are free. A `WHILE` whose body pass issues no action cannot make
//! progress (execution is deterministic in the state), so it is cut off and
//! reported as [`Termination::Stalled`].

use serde::{Deserialize, Serialize};

use crate::dsl::{Action, Condition, Program, Stmt};
use crate::tasks::{Episode, TaskError};
use crate::world::{Event, WorldState};

pub const DEFAULT_MAX_ACTIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecLimits {
    pub max_actions: usize,
}

impl ExecLimits {
    pub fn new(max_actions: usize) -> Self {
        assert!(max_actions >= 1, "max_actions must be at least 1");
        ExecLimits { max_actions }
    }
}

impl Default for ExecLimits {
    fn default() -> Self {
        ExecLimits {
            max_actions: DEFAULT_MAX_ACTIONS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Termination {
    ProgramEnd,
    ActionBudget,
    TaskDone,
    /// A loop body stopped issuing actions while its condition held.
    Stalled,
}

/// States `s_0..s_T` (initial state included), actions `a_1..a_T` and the
/// per-action events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecTrace {
    pub states: Vec<WorldState>,
    pub actions: Vec<Action>,
    pub events: Vec<Event>,
    pub terminated_by: Termination,
}

impl ExecTrace {
    pub fn final_state(&self) -> &WorldState {
        self.states.last().expect("trace always holds the initial state")
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Something a program can drive: answers perceptions and consumes actions.
pub trait Machine {
    fn world(&self) -> &WorldState;

    fn perceive(&self, cond: Condition) -> bool {
        self.world().eval_perception(cond)
    }

    /// Applies one action; returns the event and whether execution must stop.
    fn act(&mut self, action: Action) -> (Event, bool);
}

impl Machine for WorldState {
    fn world(&self) -> &WorldState {
        self
    }

    fn act(&mut self, action: Action) -> (Event, bool) {
        (self.step(action), false)
    }
}

enum Flow {
    Continue,
    Halt(Termination),
}

struct Runner<'m, M: Machine> {
    machine: &'m mut M,
    max_actions: usize,
    trace: ExecTrace,
}

impl<M: Machine> Runner<'_, M> {
    fn block(&mut self, body: &[Stmt]) -> Flow {
        for stmt in body {
            if let Flow::Halt(t) = self.stmt(stmt) {
                return Flow::Halt(t);
            }
        }
        Flow::Continue
    }

    fn stmt(&mut self, stmt: &Stmt) -> Flow {
        match stmt {
            Stmt::Action(a) => self.action(*a),
            Stmt::While { cond, body } => {
                while self.machine.perceive(*cond) {
                    let before = self.trace.actions.len();
                    if let Flow::Halt(t) = self.block(body) {
                        return Flow::Halt(t);
                    }
                    if self.trace.actions.len() == before {
                        return Flow::Halt(Termination::Stalled);
                    }
                }
                Flow::Continue
            }
            Stmt::Repeat { count, body } => {
                for _ in 0..*count {
                    if let Flow::Halt(t) = self.block(body) {
                        return Flow::Halt(t);
                    }
                }
                Flow::Continue
            }
            Stmt::If { cond, body } => {
                if self.machine.perceive(*cond) {
                    self.block(body)
                } else {
                    Flow::Continue
                }
            }
            Stmt::IfElse {
                cond,
                then_body,
                else_body,
            } => {
                if self.machine.perceive(*cond) {
                    self.block(then_body)
                } else {
                    self.block(else_body)
                }
            }
        }
    }

    fn action(&mut self, action: Action) -> Flow {
        let (event, stop) = self.machine.act(action);
        self.trace.actions.push(action);
        self.trace.events.push(event);
        self.trace.states.push(self.machine.world().clone());
        if stop {
            Flow::Halt(Termination::TaskDone)
        } else if self.trace.actions.len() >= self.max_actions {
            Flow::Halt(Termination::ActionBudget)
        } else {
            Flow::Continue
        }
    }
}

/// Runs `program` against any [`Machine`], mutating it in place.
pub fn run<M: Machine>(program: &Program, machine: &mut M, limits: ExecLimits) -> ExecTrace {
    let initial = machine.world().clone();
    let mut runner = Runner {
        machine,
        max_actions: limits.max_actions,
        trace: ExecTrace {
            states: vec![initial],
            actions: Vec::new(),
            events: Vec::new(),
            terminated_by: Termination::ProgramEnd,
        },
    };
    if let Flow::Halt(t) = runner.block(&program.body) {
        runner.trace.terminated_by = t;
    }
    runner.trace
}

/// Executes `program` from `state` on a bare world.
pub fn exec(program: &Program, state: &WorldState, limits: ExecLimits) -> ExecTrace {
    let mut world = state.clone();
    run(program, &mut world, limits)
}

/// Output of executing a program inside a task episode.
#[derive(Debug, Clone)]
pub struct TaskExec {
    pub trace: ExecTrace,
    pub rewards: Vec<f64>,
    pub done: bool,
}

impl TaskExec {
    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }
}

struct EpisodeMachine<'e> {
    episode: &'e mut Episode,
    rewards: Vec<f64>,
}

impl Machine for EpisodeMachine<'_> {
    fn world(&self) -> &WorldState {
        &self.episode.world
    }

    fn act(&mut self, action: Action) -> (Event, bool) {
        let out = self
            .episode
            .step(action)
            .expect("episode checked live before every action");
        self.rewards.push(out.reward);
        (out.event, out.done)
    }
}

/// Executes `program` against a live episode, routing every action through
/// the task's transition hook.
pub fn exec_in_task(
    program: &Program,
    episode: &mut Episode,
    limits: ExecLimits,
) -> Result<TaskExec, TaskError> {
    if episode.done {
        return Err(TaskError::EpisodeAlreadyDone);
    }
    let mut m = EpisodeMachine {
        episode,
        rewards: Vec::new(),
    };
    let trace = run(program, &mut m, limits);
    let rewards = m.rewards;
    Ok(TaskExec {
        trace,
        rewards,
        done: episode.done,
    })
}
