//! Program reconstruction: search for programs whose execution matches the
//! state sequence of a straight-line target program.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cem::{cem_search, CemConfig, CemError, InitDist};
use crate::datagen::{demo_world, GenConfig};
use crate::decoder::{DecodeError, Decoder};
use crate::dsl::{Action, Program};
use crate::interpreter::ExecLimits;
use crate::rollout::{exec_sequence, BehaviorTarget};
use crate::world::WorldError;

#[derive(Debug, Error)]
pub enum ReconError {
    #[error(transparent)]
    Cem(#[from] CemError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("unknown method {0}")]
    Method(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReconMethod {
    /// One program fitted to the whole target.
    Single,
    /// Up to `horizon` programs chosen greedily, one search per macro step.
    Compose,
}

impl fmt::Display for ReconMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReconMethod::Single => "single",
            ReconMethod::Compose => "compose",
        })
    }
}

impl FromStr for ReconMethod {
    type Err = ReconError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(ReconMethod::Single),
            "compose" => Ok(ReconMethod::Compose),
            _ => Err(ReconError::Method(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconConfig {
    pub method: ReconMethod,
    pub horizon: usize,
    pub cem: CemConfig,
    pub limits: ExecLimits,
}

impl Default for ReconConfig {
    fn default() -> Self {
        ReconConfig {
            method: ReconMethod::Single,
            horizon: 5,
            // Fixed-sigma search drifts the mean by about sigma * sqrt(t / elites)
            // in coordinates that do not yet affect the score, which freezes
            // them. A large elite set keeps that drift below sigma.
            cem: CemConfig {
                population: 2000,
                sigma: 0.7,
                elite_frac: 0.1,
                exp_decay: false,
                init: InitDist::Narrow,
                iterations: 300,
                stop_at: Some(1.0),
                ..CemConfig::default()
            },
            limits: ExecLimits::default(),
        }
    }
}

/// Block count of the identity decoder used for a target of `len` actions.
/// The slack lets the search park skip blocks anywhere.
pub fn identity_len(len: usize) -> usize {
    len + len / 2
}

/// Uniformly random straight-line program and the world it starts from.
pub fn random_target(len: usize, seed: u64) -> BehaviorTarget {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let world = demo_world(&mut rng, &GenConfig::default());
    let actions: Vec<Action> = (0..len)
        .map(|_| Action::ALL[rng.random_range(0..Action::ALL.len())])
        .collect();
    let limits = ExecLimits::new(len.max(1));
    BehaviorTarget::from_program(&Program::from_actions(actions), &world, limits)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconResult {
    pub method: ReconMethod,
    pub target_len: usize,
    pub score: f64,
    pub programs: Vec<String>,
    /// Score of the composed prefix after each macro step.
    pub step_scores: Vec<f64>,
    pub evaluations: usize,
    pub seconds: f64,
}

fn prefix_score(target: &BehaviorTarget, prefix: &[Program], limits: ExecLimits) -> Result<f64, WorldError> {
    target.score(&exec_sequence(prefix, target.init(), limits))
}

/// Fits programs to `target` by searching the decoder's latent space.
pub fn reconstruct(
    target: &BehaviorTarget,
    decoder: &dyn Decoder,
    cfg: &ReconConfig,
    seed: u64,
) -> Result<ReconResult, ReconError> {
    let start = Instant::now();
    let steps = match cfg.method {
        ReconMethod::Single => 1,
        ReconMethod::Compose => cfg.horizon.max(1),
    };
    let mut chosen: Vec<Program> = Vec::new();
    let mut step_scores = Vec::new();
    let mut evaluations = 0;
    for step in 0..steps {
        let objective = |z: &[f64]| -> f64 {
            let Ok(p) = decoder.decode(z) else {
                return 0.0;
            };
            let mut prefix = chosen.clone();
            prefix.push(p);
            prefix_score(target, &prefix, cfg.limits).unwrap_or(0.0)
        };
        let step_seed = seed.wrapping_add(step as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let found = cem_search(objective, decoder.dim(), &cfg.cem, step_seed)?;
        evaluations += found.evaluations;
        chosen.push(decoder.decode(&found.best)?);
        let s = prefix_score(target, &chosen, cfg.limits)?;
        step_scores.push(s);
        if s >= 1.0 {
            break;
        }
    }
    Ok(ReconResult {
        method: cfg.method,
        target_len: target.states.len() - 1,
        score: *step_scores.last().unwrap_or(&0.0),
        programs: chosen.iter().map(|p| p.to_string()).collect(),
        step_scores,
        evaluations,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::PrimitiveDecoder;

    #[test]
    fn target_has_requested_length() {
        let t = random_target(25, 3);
        assert_eq!(t.states.len(), 26);
        assert_eq!(t.states, random_target(25, 3).states);
    }

    #[test]
    fn empty_prefix_scores_one_over_length() {
        let t = random_target(10, 1);
        let s = prefix_score(&t, &[Program::default()], ExecLimits::default()).unwrap();
        assert!((s - 1.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn short_target_is_recovered_exactly() {
        let t = random_target(4, 9);
        let mut cfg = ReconConfig::default();
        cfg.cem.population = 200;
        let r = reconstruct(&t, &PrimitiveDecoder::new(8), &cfg, 0).unwrap();
        assert_eq!(r.score, 1.0);
    }

    #[test]
    fn method_names() {
        assert_eq!("compose".parse::<ReconMethod>().unwrap(), ReconMethod::Compose);
        assert!("both".parse::<ReconMethod>().is_err());
    }
}
