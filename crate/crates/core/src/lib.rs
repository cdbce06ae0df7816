//! Karel program-synthesis workbench: DSL, simulator, benchmark tasks,
//! dataset generation, latent search and the macro-step composition engine.

pub mod blob;
pub mod cem;
pub mod datagen;
pub mod decoder;
pub mod dsl;
pub mod env;
pub mod golden;
pub mod interpreter;
pub mod manifest;
pub mod recon;
pub mod rollout;
pub mod tasks;
pub mod vocab;
pub mod world;

pub use cem::{best_sampled, cem_search, CemConfig, InitDist, SearchResult};
pub use datagen::{build_dataset, filter_program, sample_program, FilterReason, FilterReport, GenConfig};
pub use decoder::{Decoder, PrimitiveDecoder};
pub use dsl::{compose, parse_listing, print_listing, Action, Condition, DslError, Perception, Program, Stmt, Token};
pub use interpreter::{exec, exec_in_task, ExecLimits, ExecTrace, Termination};
pub use rollout::{
    behavior_score, run_macro_episode, BehaviorTarget, MacroTransition, MetaEpisodeConfig,
    RewardMode,
};
pub use env::{EnvHandle, StepResult};
pub use manifest::RunManifest;
pub use tasks::{evaluate_program, Episode, TaskConfig, TaskError, TaskId};
pub use world::{state_eq, Event, Facing, StateTensor, WorldError, WorldState};
