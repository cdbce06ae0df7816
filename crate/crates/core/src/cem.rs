//! Cross-entropy-method search over real vectors, and the best-of-n random
//! sampling baseline.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CemError {
    #[error("invalid search config: {0}")]
    InvalidConfig(String),
}

/// Distribution of the initial mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitDist {
    /// `N(0, 0.1 I)`
    Narrow,
    /// `N(0, I)`
    Standard,
    /// `N(1, 0)`: the all-ones vector.
    Ones,
}

impl InitDist {
    fn std_and_mean(self) -> (f64, f64) {
        match self {
            InitDist::Narrow => (0.1, 0.0),
            InitDist::Standard => (1.0, 0.0),
            InitDist::Ones => (0.0, 1.0),
        }
    }
}

impl fmt::Display for InitDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitDist::Narrow => "N(0,0.1I)",
            InitDist::Standard => "N(0,I)",
            InitDist::Ones => "N(1,0)",
        })
    }
}

impl FromStr for InitDist {
    type Err = CemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let k: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match k.as_str() {
            "N(0,0.1I)" | "N(0,0.1I_d)" | "narrow" => Ok(InitDist::Narrow),
            "N(0,I)" | "N(0,I_d)" | "standard" => Ok(InitDist::Standard),
            "N(1,0)" | "ones" => Ok(InitDist::Ones),
            _ => Err(CemError::InvalidConfig(format!("unknown init distribution {s}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CemConfig {
    pub population: usize,
    pub sigma: f64,
    pub elite_frac: f64,
    pub exp_decay: bool,
    pub init: InitDist,
    pub iterations: usize,
    pub decay_rate: f64,
    pub sigma_floor: f64,
    /// Stop as soon as the best value reaches this score.
    pub stop_at: Option<f64>,
}

impl Default for CemConfig {
    fn default() -> Self {
        CemConfig {
            population: 32,
            sigma: 0.5,
            elite_frac: 0.1,
            exp_decay: false,
            init: InitDist::Standard,
            iterations: 1000,
            decay_rate: 0.998,
            sigma_floor: 0.05,
            stop_at: None,
        }
    }
}

impl CemConfig {
    pub fn validate(&self) -> Result<(), CemError> {
        let bad = |m: &str| Err(CemError::InvalidConfig(m.to_string()));
        if self.population < 2 {
            return bad("population must be at least 2");
        }
        if !(self.elite_frac > 0.0 && self.elite_frac <= 1.0) {
            return bad("elite fraction must be in (0, 1]");
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return bad("sigma must be finite and non-negative");
        }
        if !(self.decay_rate > 0.0 && self.decay_rate <= 1.0) {
            return bad("decay rate must be in (0, 1]");
        }
        Ok(())
    }

    pub fn elite_count(&self) -> usize {
        ((self.population as f64 * self.elite_frac).round() as usize).clamp(1, self.population)
    }

    /// Applies `key=value` lines, one setting per line.
    pub fn apply_overrides(&mut self, text: &str) -> Result<(), CemError> {
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CemError::InvalidConfig(format!("expected key=value: {line}")))?;
            let (k, v) = (k.trim(), v.trim());
            let num = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| CemError::InvalidConfig(format!("bad number for {k}: {v}")))
            };
            match k {
                "population" | "population_size" => self.population = num(v)? as usize,
                "sigma" | "std" => self.sigma = num(v)?,
                "elite_frac" | "elites" => self.elite_frac = num(v)?,
                "exp_decay" => {
                    self.exp_decay = v
                        .to_ascii_lowercase()
                        .parse()
                        .map_err(|_| CemError::InvalidConfig(format!("bad bool: {v}")))?
                }
                "init" | "init_dist" => self.init = v.parse()?,
                "iterations" => self.iterations = num(v)? as usize,
                "decay_rate" => self.decay_rate = num(v)?,
                "sigma_floor" => self.sigma_floor = num(v)?,
                "stop_at" => self.stop_at = Some(num(v)?),
                _ => return Err(CemError::InvalidConfig(format!("unknown key {k}"))),
            }
        }
        self.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterStats {
    pub iteration: usize,
    pub mean_score: f64,
    pub best_score: f64,
    pub best_ever: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: Vec<f64>,
    pub best_value: f64,
    /// Search mean after the last update.
    pub mean: Vec<f64>,
    pub history: Vec<IterStats>,
    pub evaluations: usize,
}

fn gaussian(rng: &mut ChaCha8Rng, center: &[f64], sigma: f64) -> Vec<f64> {
    center
        .iter()
        .map(|&m| {
            let e: f64 = StandardNormal.sample(rng);
            m + sigma * e
        })
        .collect()
}

fn score_all<F>(objective: &F, pop: &[Vec<f64>]) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pop.par_iter().map(|z| objective(z)).collect()
}

/// Maximizes `objective` over `R^dim`.
pub fn cem_search<F>(objective: F, dim: usize, cfg: &CemConfig, seed: u64) -> Result<SearchResult, CemError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    if dim == 0 {
        return Err(CemError::InvalidConfig("dim must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (init_std, init_mean) = cfg.init.std_and_mean();
    let mut mean = gaussian(&mut rng, &vec![init_mean; dim], init_std);
    let mut sigma = cfg.sigma;
    let n_elite = cfg.elite_count();
    let mut best = mean.clone();
    let mut best_value = f64::NEG_INFINITY;
    let mut history = Vec::with_capacity(cfg.iterations);
    let mut evaluations = 0;
    for iteration in 0..cfg.iterations {
        let pop: Vec<Vec<f64>> = (0..cfg.population)
            .map(|_| gaussian(&mut rng, &mean, sigma))
            .collect();
        let scores = score_all(&objective, &pop);
        evaluations += pop.len();
        let mut order: Vec<usize> = (0..pop.len()).collect();
        // Stable sort keeps ties in sampling order so rescaled objectives
        // pick the same elites.
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        if scores[order[0]] > best_value {
            best_value = scores[order[0]];
            best = pop[order[0]].clone();
        }
        mean = vec![0.0; dim];
        for &i in &order[..n_elite] {
            for (m, x) in mean.iter_mut().zip(&pop[i]) {
                *m += x / n_elite as f64;
            }
        }
        history.push(IterStats {
            iteration,
            mean_score: scores.iter().sum::<f64>() / scores.len() as f64,
            best_score: scores[order[0]],
            best_ever: best_value,
            sigma,
        });
        if cfg.exp_decay {
            sigma = (sigma * cfg.decay_rate).max(cfg.sigma_floor);
        }
        if cfg.stop_at.is_some_and(|t| best_value >= t) {
            break;
        }
    }
    Ok(SearchResult {
        best,
        best_value,
        mean,
        history,
        evaluations,
    })
}

/// Best of `n` independent draws from `N(0, I)`.
pub fn best_sampled<F>(objective: F, dim: usize, n: usize, seed: u64) -> Result<SearchResult, CemError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if dim == 0 || n == 0 {
        return Err(CemError::InvalidConfig("dim and n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = vec![0.0; dim];
    let pop: Vec<Vec<f64>> = (0..n).map(|_| gaussian(&mut rng, &zero, 1.0)).collect();
    let scores = score_all(&objective, &pop);
    let mut arg = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[arg] {
            arg = i;
        }
    }
    Ok(SearchResult {
        best: pop[arg].clone(),
        best_value: scores[arg],
        mean: zero,
        history: vec![IterStats {
            iteration: 0,
            mean_score: scores.iter().sum::<f64>() / n as f64,
            best_score: scores[arg],
            best_ever: scores[arg],
            sigma: 1.0,
        }],
        evaluations: n,
    })
}
