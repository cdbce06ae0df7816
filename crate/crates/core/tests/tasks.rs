use karel_core::datagen::{sample_program, GenConfig};
use karel_core::tasks::{evaluate_program, Bookkeeping, Policy};
use karel_core::{exec_in_task, Action, Episode, ExecLimits, Facing, Program, TaskConfig, TaskError, TaskId};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn p(s: &str) -> Program {
    s.parse().unwrap()
}

fn step_all(ep: &mut Episode, actions: &[Action]) -> f64 {
    actions.iter().map(|&a| ep.step(a).unwrap().reward).sum()
}

#[test]
fn snake_after_five_meals() {
    let mut ep = Episode::new(TaskId::Snake, 4);
    let mut total = 0.0;
    for _ in 0..5 {
        // Put the only food directly ahead, turning until the way is clear.
        while !ep.world.front_is_clear() {
            total += ep.step(Action::TurnLeft).unwrap().reward;
        }
        ep.world.markers.iter_mut().for_each(|m| *m = 0);
        let (r, c) = ep.world.open_neighbor(ep.world.facing).unwrap();
        ep.world.set_markers(r, c, 1);
        total += ep.step(Action::Move).unwrap().reward;
    }
    let Bookkeeping::Snake { eaten, body, .. } = &ep.book else { unreachable!() };
    assert_eq!(*eaten, 5);
    assert_eq!(body.len(), 2 + 5);
    assert!((total - 0.25).abs() < 1e-12);
    assert!((ep.episode_return() - 0.25).abs() < 1e-12);
}

#[test]
fn door_key_pick_only() {
    let mut ep = Episode::new(TaskId::DoorKey, 2);
    let Bookkeeping::DoorKey { key, door, .. } = ep.book.clone() else { unreachable!() };
    assert!(ep.world.is_wall(door.0, door.1));
    ep.world.agent_row = key.0;
    ep.world.agent_col = key.1;
    let out = ep.step(Action::PickMarker).unwrap();
    assert_eq!(out.reward, 0.5);
    assert!(!out.done);
    assert!(!ep.world.is_wall(door.0, door.1));
    assert_eq!(ep.episode_return(), 0.5);
}

#[test]
fn one_stroke_twelve_cells_then_collision() {
    let mut ep = Episode::new(TaskId::OneStroke, 0);
    ep.world.agent_row = 1;
    ep.world.agent_col = 1;
    ep.world.facing = Facing::East;
    use Action::*;
    let path = [
        Move, Move, Move, Move, Move, // (1,6): 6 cells
        TurnRight, Move, Move, Move, Move, Move, // (6,6): 11 cells
        TurnRight, Move, // (6,5): 12 cells
        TurnLeft, Move, // border wall below
    ];
    let mut total = 0.0;
    for (i, a) in path.iter().enumerate() {
        let out = ep.step(*a).unwrap();
        total += out.reward;
        assert_eq!(out.done, i == path.len() - 1);
    }
    assert!((total - 12.0 / 36.0).abs() < 1e-12);
    assert!((ep.episode_return() - 12.0 / 36.0).abs() < 1e-12);
}

#[test]
fn four_corner_one_corner() {
    let prog = p("DEF run m( WHILE c( frontIsClear c) w( move w) putMarker m)");
    let cfg = TaskConfig::for_task(TaskId::FourCorner);
    let (mean, per) = evaluate_program(TaskId::FourCorner, &cfg, Policy::Single(&prog), 10, 3, ExecLimits::default()).unwrap();
    assert_eq!(mean, 0.25);
    assert!(per.iter().all(|&r| r == 0.25));
}

#[test]
fn empty_program_on_harvester() {
    let cfg = TaskConfig::for_task(TaskId::Harvester);
    let (mean, _) = evaluate_program(TaskId::Harvester, &cfg, Policy::Single(&Program::default()), 10, 0, ExecLimits::default()).unwrap();
    assert_eq!(mean, 0.0);
}

#[test]
fn done_is_absorbing() {
    let mut ep = Episode::new(TaskId::Maze, 1);
    let Bookkeeping::Maze { goal } = ep.book.clone() else { unreachable!() };
    ep.world.agent_row = goal.0;
    ep.world.agent_col = goal.1;
    ep.world.facing = Facing::North;
    ep.progress = 0.0;
    let out = ep.step(Action::TurnLeft).unwrap();
    assert!(out.done);
    assert_eq!(out.reward, 1.0);
    let before = ep.world.clone();
    assert_eq!(ep.step(Action::Move).unwrap_err(), TaskError::EpisodeAlreadyDone);
    assert_eq!(ep.world, before);
    assert!(matches!(
        exec_in_task(&p("DEF run m( move m)"), &mut ep, ExecLimits::default()),
        Err(TaskError::EpisodeAlreadyDone)
    ));
}

#[test]
fn same_seed_same_configuration() {
    for task in TaskId::ALL {
        for seed in 0..20 {
            let a = Episode::new(task, seed);
            let b = Episode::new(task, seed);
            assert_eq!(a.world, b.world, "{task} {seed}");
            assert_eq!(a.book, b.book);
        }
    }
}

#[test]
fn initial_progress_is_zero() {
    for task in TaskId::ALL {
        for seed in 0..20 {
            assert_eq!(Episode::new(task, seed).episode_return(), 0.0, "{task} {seed}");
        }
    }
}

#[test]
fn stair_climber_fall_is_terminal_with_zero_return() {
    // Walking two cells West from a tread at column >= 3 leaves the staircase.
    let mut ep = (0..100)
        .map(|s| Episode::new(TaskId::StairClimber, s))
        .find(|e| e.world.agent_col >= 3)
        .expect("some configuration starts high enough");
    step_all(&mut ep, &[Action::TurnLeft, Action::TurnLeft, Action::Move]);
    assert!(!ep.done);
    let out = ep.step(Action::Move).unwrap();
    assert!(out.done);
    assert_eq!(out.reward, 0.0);
    assert_eq!(ep.episode_return(), 0.0);
    let Bookkeeping::StairClimber { fell, .. } = ep.book else { unreachable!() };
    assert!(fell);
}

#[test]
fn geometry_override_changes_grid() {
    let mut cfg = TaskConfig::for_task(TaskId::Harvester);
    cfg.apply_overrides("rows = 6\ncols = 7").unwrap();
    let ep = Episode::with_config(TaskId::Harvester, &cfg, 0).unwrap();
    assert_eq!((ep.world.rows, ep.world.cols), (6, 7));
    assert_eq!(ep.world.total_markers(), 4 * 5);
    assert!(cfg.apply_overrides("depth = 3").is_err());
}

fn random_program(seed: u64) -> Program {
    sample_program(&mut ChaCha8Rng::seed_from_u64(seed), &GenConfig::default())
}

/// Independent count of what the task rewards, from the start and end states.
fn achieved_fraction(start: &Episode, end: &Episode) -> f64 {
    let (a, b) = (&start.world, &end.world);
    let cells = 0..a.rows * a.cols;
    match end.task {
        TaskId::Harvester | TaskId::CleanHouse => {
            let had = cells.clone().filter(|&i| a.markers[i] > 0).count();
            let cleared = cells.filter(|&i| a.markers[i] > 0 && b.markers[i] == 0).count();
            cleared as f64 / had as f64
        }
        TaskId::Seeder => {
            let empty = cells.clone().filter(|&i| !a.walls[i] && a.markers[i] == 0).count();
            let seeded = cells.filter(|&i| !a.walls[i] && a.markers[i] == 0 && b.markers[i] > 0).count();
            seeded as f64 / empty as f64
        }
        TaskId::OneStroke => {
            let empty = cells.clone().filter(|&i| !a.walls[i]).count();
            let new_walls = cells.filter(|&i| !a.walls[i] && b.walls[i]).count();
            (new_walls + 1) as f64 / empty as f64
        }
        _ => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn returns_stay_in_unit_interval(task_i in 0usize..10, seed in 0u64..1000, prog_seed in any::<u64>()) {
        let task = TaskId::ALL[task_i];
        let mut ep = Episode::new(task, seed);
        let mut total = 0.0;
        for k in 0..3 {
            if ep.done {
                break;
            }
            let out = exec_in_task(&random_program(prog_seed ^ k), &mut ep, ExecLimits::default()).unwrap();
            total += out.total_reward();
        }
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&total));
        prop_assert!((total - ep.episode_return()).abs() < 1e-9);
    }

    #[test]
    fn counting_tasks_match_terminal_state(task_i in 0usize..4, seed in 0u64..1000, prog_seed in any::<u64>()) {
        let task = [TaskId::Harvester, TaskId::CleanHouse, TaskId::Seeder, TaskId::OneStroke][task_i];
        let start = Episode::new(task, seed);
        let mut ep = start.clone();
        for k in 0..3 {
            if ep.done {
                break;
            }
            exec_in_task(&random_program(prog_seed.wrapping_add(k)), &mut ep, ExecLimits::default()).unwrap();
        }
        prop_assert!((ep.episode_return() - achieved_fraction(&start, &ep)).abs() < 1e-12);
    }
}
