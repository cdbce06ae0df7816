use karel_core::datagen::sample_program;
use karel_core::env::{export_tensor, import_tensor, EnvError};
use karel_core::{exec_in_task, EnvHandle, Episode, ExecLimits, GenConfig, Program, TaskId};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn four_corner_one_corner_reward() {
    let mut h = EnvHandle::for_task(TaskId::FourCorner);
    h.reset(0).unwrap();
    let r = h.step_program("DEF run m( WHILE c( frontIsClear c) w( move w) putMarker m)").unwrap();
    assert_eq!(r.reward, 0.25);
    assert!(!r.done);
    assert_eq!(r.state.channel_count(karel_core::world::MARKER_CHANNEL0 + 1), 1);
}

#[test]
fn empty_program_changes_nothing() {
    for task in TaskId::ALL {
        let mut h = EnvHandle::for_task(task);
        let s0 = h.reset(1).unwrap();
        let r = h.step_program("DEF run m( m)").unwrap();
        assert_eq!(r.reward, 0.0, "{task}");
        assert_eq!(r.state, s0);
        assert_eq!(r.info.actions, 0);
    }
}

#[test]
fn stepping_after_done_is_an_error() {
    let mut h = EnvHandle::for_task(TaskId::StairClimber);
    h.reset(0).unwrap();
    let prog = karel_core::golden::find(TaskId::StairClimber, karel_core::golden::Method::Hprl)
        .unwrap()
        .programs()
        .unwrap();
    let mut done = false;
    for p in prog.iter().cycle().take(5) {
        done = h.step(p).unwrap().done;
        if done {
            break;
        }
    }
    assert!(done);
    assert!(matches!(h.step(&prog[0]), Err(EnvError::Task(_))));
    // A reset starts over.
    h.reset(0).unwrap();
    assert!(h.step(&prog[0]).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn handle_matches_direct_execution(task_i in 0usize..10, seed in 0u64..1000, ps in any::<u64>()) {
        let task = TaskId::ALL[task_i];
        let mut h = EnvHandle::for_task(task);
        let s0 = h.reset(seed).unwrap();
        let mut ep = Episode::new(task, seed);
        prop_assert_eq!(&s0, &ep.world.encode_tensor());
        for k in 0..3u64 {
            if ep.done {
                break;
            }
            let p: Program = sample_program(&mut ChaCha8Rng::seed_from_u64(ps.wrapping_add(k)), &GenConfig::default());
            let via_handle = h.step_program(&p.to_string()).unwrap();
            let direct = exec_in_task(&p, &mut ep, ExecLimits::default()).unwrap();
            prop_assert_eq!(via_handle.reward, direct.total_reward());
            prop_assert_eq!(via_handle.done, direct.done);
            prop_assert_eq!(&via_handle.state, &ep.world.encode_tensor());
            prop_assert_eq!(import_tensor(&export_tensor(&via_handle.state)).unwrap(), via_handle.state);
        }
    }
}
