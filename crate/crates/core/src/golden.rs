//! Reference example programs for every benchmark task, kept as executable
//! oracles for the environment semantics.
//!
//! Multi-program listings hold one `DEF run` per line and are replayed in order,
//! cycling through the listing up to the macro horizon.

use serde::Serialize;

use crate::dsl::{parse_listing, DslError, Program};
use crate::rollout::{run_macro_episode, undiscounted_return, CyclingProvider, MetaEpisodeConfig, RolloutError};
use crate::tasks::{config_seed, TaskConfig, TaskId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    Leaps,
    LeapsOurs,
    Hprl,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Leaps => "LEAPS",
            Method::LeapsOurs => "LEAPS-ours",
            Method::Hprl => "HPRL-PPO",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GoldenListing {
    pub task: TaskId,
    pub method: Method,
    pub text: &'static str,
    /// Reference mean return of the method on the task.
    pub reference: f64,
}

impl GoldenListing {
    pub fn programs(&self) -> Result<Vec<Program>, DslError> {
        parse_listing(self.text)
    }

    /// Replays the listing through the macro engine on `n_configs` sampled
    /// configurations. Returns the mean and per-configuration returns.
    pub fn evaluate(
        &self,
        n_configs: usize,
        seed: u64,
        cfg: &MetaEpisodeConfig,
    ) -> Result<(f64, Vec<f64>), GoldenError> {
        let programs = self.programs()?;
        let task_cfg = TaskConfig::for_task(self.task);
        let returns = (0..n_configs)
            .map(|i| {
                let mut provider = CyclingProvider::new(programs.clone());
                run_macro_episode(self.task, &task_cfg, &mut provider, cfg, config_seed(seed, i))
                    .map(|ts| undiscounted_return(&ts))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mean = returns.iter().sum::<f64>() / n_configs.max(1) as f64;
        Ok((mean, returns))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GoldenError {
    #[error(transparent)]
    Parse(#[from] DslError),
    #[error(transparent)]
    Rollout(#[from] RolloutError),
}

/// The Seeder HPRL-PPO listing exactly as printed, with its fourth program
/// missing the closing `m)`. [`GOLDEN`] stores the repaired form.
pub const SEEDER_HPRL_AS_PRINTED: &str = r"DEF run m( putMarker move putMarker move putMarker move putMarker move putMarker move turnRight move m) DEF run m( putMarker move putMarker move putMarker move putMarker move putMarker move turnRight move putMarker move m) DEF run m( putMarker move putMarker move putMarker move putMarker move turnRight move putMarker move turnRight move m) DEF run m( putMarker move putMarker move putMarker move putMarker move turnRight move putMarker move turnRight move DEF run m( putMarker move putMarker move putMarker move putMarker move turnRight move putMarker move turnRight move m)";

pub const GOLDEN: &[GoldenListing] = &[
    GoldenListing {
        task: TaskId::StairClimber,
        method: Method::Leaps,
        text: r"DEF run m( WHILE c( noMarkersPresent c) w( turnRight move w) WHILE c( rightIsClear c) w( turnLeft w) m)",
        reference: 1.00,
    },
    GoldenListing {
        task: TaskId::StairClimber,
        method: Method::LeapsOurs,
        text: r"DEF run m( turnRight turnRight WHILE c( noMarkersPresent c) w( turnRight move w) m)",
        reference: 1.00,
    },
    GoldenListing {
        task: TaskId::StairClimber,
        method: Method::Hprl,
        text: r"DEF run m( WHILE c( noMarkersPresent c) w( turnRight move turnRight move w) m)",
        reference: 1.00,
    },
    GoldenListing {
        task: TaskId::TopOff,
        method: Method::Leaps,
        text: r"DEF run m( WHILE c( noMarkersPresent c) w( move w) putMarker move WHILE c( not c( markersPresent c) c) w( move w) putMarker move WHILE c( not c( markersPresent c) c) w( move w) putMarker move turnRight turnRight turnRight turnRight turnRight turnRight turnRight turnRight m)",
        reference: 0.81,
    },
    GoldenListing {
        task: TaskId::TopOff,
        method: Method::LeapsOurs,
        text: r"DEF run m( WHILE c( not c( rightIsClear c) c) w( WHILE c( not c( markersPresent c) c) w( move w) putMarker move w) WHILE c( not c( rightIsClear c) c) w( pickMarker w) m)",
        reference: 0.82,
    },
    GoldenListing {
        task: TaskId::TopOff,
        method: Method::Hprl,
        text: r"DEF run m( REPEAT R=5 r( move WHILE c( noMarkersPresent c) w( move w) putMarker r) m)",
        reference: 1.00,
    },
    GoldenListing {
        task: TaskId::CleanHouse,
        method: Method::Leaps,
        text: r"DEF run m( WHILE c( noMarkersPresent c) w( turnRight move move turnLeft turnRight pickMarker w) turnLeft turnRight m)",
        reference: 0.18,
    },
    GoldenListing {
        task: TaskId::CleanHouse,
        method: Method::LeapsOurs,
        text: r"DEF run m( move WHILE c( noMarkersPresent c) w( turnRight move WHILE c( frontIsClear c) w( move pickMarker w) w) m)",
        reference: 0.28,
    },
    GoldenListing {
        task: TaskId::CleanHouse,
        method: Method::Hprl,
        text: r"DEF run m( WHILE c( noMarkersPresent c) w( turnRight move pickMarker pickMarker w) m)
DEF run m( WHILE c( noMarkersPresent c) w( turnRight move pickMarker pickMarker w) m)
DEF run m( WHILE c( noMarkersPresent c) w( turnRight move pickMarker pickMarker w) m)
DEF run m( WHILE c( noMarkersPresent c) w( turnRight move pickMarker pickMarker w) m)",
        reference: 1.00,
    },
    GoldenListing {
        task: TaskId::FourCorner,
        method: Method::Leaps,
        text: r"DEF run m( turnRight move turnRight turnRight turnRight WHILE c( frontIsClear c) w( move w) turnRight putMarker WHILE c( frontIsClear c) w( move w) turnRight putMarker WHILE c( frontIsClear c) w( move w) turnRight putMarker WHILE c( frontIsClear c) w( move w) turnRight putMarker m)",
        reference: 0.45,
    },
    GoldenListing {
        task: TaskId::FourCorner,
        method: Method::LeapsOurs,
        text: r"DEF run m( REPEAT R=5 r( WHILE c( frontIsClear c) w( move w) IFELSE c( not c( rightIsClear c) c) i( turnLeft putMarker i) ELSE e( putMarker e) r) m)",
        reference: 0.50,
    },
    GoldenListing {
        task: TaskId::FourCorner,
        method: Method::Hprl,
        text: r"DEF run m( move WHILE c( frontIsClear c) w( move w) putMarker turnLeft m)
DEF run m( move WHILE c( frontIsClear c) w( move w) putMarker turnLeft m)
DEF run m( move WHILE c( frontIsClear c) w( move w) putMarker turnLeft m)
DEF run m( move WHILE c( frontIsClear c) w( move w) putMarker turnLeft m)",
        reference: 1.00,
    },
    GoldenListing {
        task: TaskId::Maze,
        method: Method::Leaps,
        text: r"DEF run m( IF c( frontIsClear c) i( turnLeft i) WHILE c( noMarkersPresent c) w( turnRight move w) m)",
        reference: 1.00,
    },
    GoldenListing {
        task: TaskId::Maze,
        method: Method::LeapsOurs,
        text: r"DEF run m( WHILE c( noMarkersPresent c) w( turnRight move w) turnRight turnRight turnRight m)",
        reference: 1.00,
    },
    GoldenListing {
        task: TaskId::Maze,
        method: Method::Hprl,
        text: r"DEF run m( WHILE c( noMarkersPresent c) w( turnRight move w) WHILE c( noMarkersPresent c) w( turnRight move w) m)",
        reference: 1.00,
    },
    GoldenListing {
        task: TaskId::Harvester,
        method: Method::Leaps,
        text: r"DEF run m( turnLeft turnLeft pickMarker move pickMarker pickMarker move pickMarker move pickMarker move pickMarker move turnLeft pickMarker move pickMarker move pickMarker move pickMarker move turnLeft pickMarker move pickMarker move pickMarker move pickMarker move turnLeft pickMarker move pickMarker move pickMarker move m)",
        reference: 0.45,
    },
    GoldenListing {
        task: TaskId::Harvester,
        method: Method::LeapsOurs,
        text: r"DEF run m( WHILE c( leftIsClear c) w( REPEAT R=4 r( pickMarker move r) turnLeft pickMarker move turnLeft pickMarker move w) turnLeft pickMarker turnLeft m)",
        reference: 0.82,
    },
    GoldenListing {
        task: TaskId::Harvester,
        method: Method::Hprl,
        text: r"DEF run m( REPEAT R=4 r( REPEAT R=4 r( pickMarker turnRight move pickMarker turnRight move pickMarker move pickMarker move r) turnRight pickMarker move pickMarker move pickMarker move r) m)",
        reference: 1.00,
    },
    GoldenListing {
        task: TaskId::DoorKey,
        method: Method::Leaps,
        text: r"DEF run m( move turnRight putMarker pickMarker move WHILE c( leftIsClear c) w( pickMarker move w) m)",
        reference: 0.50,
    },
    GoldenListing {
        task: TaskId::DoorKey,
        method: Method::LeapsOurs,
        text: r"DEF run m( WHILE c( rightIsClear c) w( turnRight pickMarker turnLeft pickMarker pickMarker pickMarker pickMarker move turnLeft move w) m)",
        reference: 0.50,
    },
    GoldenListing {
        task: TaskId::DoorKey,
        method: Method::Hprl,
        text: r"DEF run m( REPEAT R=4 r( REPEAT R=4 r( turnRight move pickMarker move pickMarker move r) pickMarker move r) m)
DEF run m( REPEAT R=5 r( turnRight move REPEAT R=5 r( move r) move pickMarker move r) m)
DEF run m( REPEAT R=4 r( REPEAT R=4 r( turnRight move REPEAT R=3 r( move pickMarker move pickMarker r) r) r) m)
DEF run m( REPEAT R=4 r( REPEAT R=4 r( turnRight move pickMarker move pickMarker REPEAT R=2 r( pickMarker move pickMarker pickMarker r) r) r) m)
DEF run m( REPEAT R=4 r( turnRight REPEAT R=4 r( turnRight move move pickMarker move r) move pickMarker move r) move pickMarker m)",
        reference: 0.50,
    },
    GoldenListing {
        task: TaskId::OneStroke,
        method: Method::Leaps,
        text: r"DEF run m( REPEAT R=9 r( turnRight turnRight WHILE c( frontIsClear c) w( move w) turnRight WHILE c( frontIsClear c) w( move w) r) turnRight m)",
        reference: 0.65,
    },
    GoldenListing {
        task: TaskId::OneStroke,
        method: Method::LeapsOurs,
        text: r"DEF run m( turnRight WHILE c( frontIsClear c) w( WHILE c( frontIsClear c) w( WHILE c( frontIsClear c) w( WHILE c( frontIsClear c) w( move w) turnRight w) turnRight w) turnRight w) turnRight m)",
        reference: 0.72,
    },
    GoldenListing {
        task: TaskId::OneStroke,
        method: Method::Hprl,
        text: r"DEF run m( WHILE c( frontIsClear c) w( move w) turnRight WHILE c( frontIsClear c) w( move w) turnRight WHILE c( frontIsClear c) w( move w) turnRight m)
DEF run m( WHILE c( frontIsClear c) w( move w) turnRight WHILE c( frontIsClear c) w( move w) turnRight WHILE c( frontIsClear c) w( move w) turnRight m)
DEF run m( WHILE c( frontIsClear c) w( move w) turnRight WHILE c( frontIsClear c) w( move w) turnRight WHILE c( frontIsClear c) w( move w) turnRight WHILE c( frontIsClear c) w( move w) turnRight m)
DEF run m( WHILE c( frontIsClear c) w( move w) turnRight WHILE c( frontIsClear c) w( move w) turnRight WHILE c( frontIsClear c) w( move w) turnRight m)",
        reference: 0.80,
    },
    GoldenListing {
        task: TaskId::Seeder,
        method: Method::Leaps,
        text: r"DEF run m( WHILE c( noMarkersPresent c) w( turnRight putMarker move move w) turnRight turnRight turnRight turnRight turnRight turnRight turnRight turnRight m)",
        reference: 0.51,
    },
    GoldenListing {
        task: TaskId::Seeder,
        method: Method::LeapsOurs,
        text: r"DEF run m( WHILE c( noMarkersPresent c) w( putMarker move turnRight move w) turnRight turnRight turnRight turnRight turnRight turnRight turnRight turnRight m)",
        reference: 0.57,
    },
    GoldenListing {
        task: TaskId::Seeder,
        method: Method::Hprl,
        text: r"DEF run m( putMarker move putMarker move putMarker move putMarker move putMarker move turnRight move m)
DEF run m( putMarker move putMarker move putMarker move putMarker move putMarker move turnRight move putMarker move m)
DEF run m( putMarker move putMarker move putMarker move putMarker move turnRight move putMarker move turnRight move m)
DEF run m( putMarker move putMarker move putMarker move putMarker move turnRight move putMarker move turnRight move m)
DEF run m( putMarker move putMarker move putMarker move putMarker move turnRight move putMarker move turnRight move m)",
        reference: 0.58,
    },
    GoldenListing {
        task: TaskId::Snake,
        method: Method::Leaps,
        text: r"DEF run m( turnRight turnLeft pickMarker move move move WHILE c( rightIsClear c) w( turnLeft move move w) turnLeft turnLeft turnLeft turnLeft m)",
        reference: 0.21,
    },
    GoldenListing {
        task: TaskId::Snake,
        method: Method::LeapsOurs,
        text: r"DEF run m( move turnRight pickMarker pickMarker WHILE c( rightIsClear c) w( turnLeft move move w) turnRight move move move m)",
        reference: 0.25,
    },
    GoldenListing {
        task: TaskId::Snake,
        method: Method::Hprl,
        text: r"DEF run m( move WHILE c( noMarkersPresent c) w( move move turnLeft w) move turnLeft m)
DEF run m( move WHILE c( noMarkersPresent c) w( move move turnLeft w) m)
DEF run m( move WHILE c( noMarkersPresent c) w( move move turnLeft w) move turnLeft m)",
        reference: 0.28,
    },
];

pub fn listings_for(task: TaskId) -> impl Iterator<Item = &'static GoldenListing> {
    GOLDEN.iter().filter(move |g| g.task == task)
}

pub fn find(task: TaskId, method: Method) -> Option<&'static GoldenListing> {
    GOLDEN.iter().find(|g| g.task == task && g.method == method)
}
