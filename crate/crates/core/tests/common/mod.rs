#![allow(dead_code)]

use karel_core::datagen::{demo_world, GenConfig};
use karel_core::{exec, Action, ExecLimits, FilterReason, Program, Token, WorldState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn demo_worlds(seed: u64, n: usize) -> Vec<WorldState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| demo_world(&mut rng, &GenConfig::default())).collect()
}

fn opposite(a: Action, b: Action) -> bool {
    let pair = [a.name(), b.name()];
    pair == ["turnLeft", "turnRight"]
        || pair == ["turnRight", "turnLeft"]
        || pair == ["pickMarker", "putMarker"]
        || pair == ["putMarker", "pickMarker"]
}

/// Brute-force search for two disjoint equal slices longer than 9 tokens.
fn repeats_long_run(tokens: &[Token]) -> bool {
    let n = tokens.len();
    (10..=n / 2).any(|len| {
        (0..=n - 2 * len).any(|i| (i + len..=n - len).any(|j| tokens[i..i + len] == tokens[j..j + len]))
    })
}

/// Reference verdict, rules checked in the order the generator applies them.
pub fn filter_oracle(program: &Program, worlds: &[WorldState], limits: ExecLimits) -> Option<FilterReason> {
    let tokens = program.tokens();
    let contradictory = tokens.windows(2).any(|w| match (w[0], w[1]) {
        (Token::Action(a), Token::Action(b)) => opposite(a, b),
        _ => false,
    });
    if contradictory {
        return Some(FilterReason::ContradictoryActions);
    }
    if repeats_long_run(&tokens) {
        return Some(FilterReason::RepetitiveSubsequence);
    }
    let unchanged = worlds.iter().all(|w| {
        let end = exec(program, w, limits).states.last().unwrap().clone();
        end.agent() == w.agent() && end.facing == w.facing && end.markers == w.markers && end.walls == w.walls
    });
    unchanged.then_some(FilterReason::NoOpProgram)
}

pub const KNOWN_BAD: [(&str, FilterReason); 20] = {
    use FilterReason::*;
    [
        ("DEF run m( turnLeft turnRight m)", ContradictoryActions),
        ("DEF run m( move turnRight turnLeft move m)", ContradictoryActions),
        ("DEF run m( putMarker pickMarker m)", ContradictoryActions),
        ("DEF run m( pickMarker putMarker move m)", ContradictoryActions),
        ("DEF run m( WHILE c( frontIsClear c) w( move turnLeft turnRight w) m)", ContradictoryActions),
        ("DEF run m( REPEAT R=3 r( putMarker pickMarker r) m)", ContradictoryActions),
        ("DEF run m( IF c( markersPresent c) i( pickMarker putMarker i) m)", ContradictoryActions),
        (
            "DEF run m( move move move move move move move move move move move move move move move move move move move move move m)",
            RepetitiveSubsequence,
        ),
        (
            "DEF run m( IF c( not c( frontIsClear c) c) i( turnLeft move i) IF c( not c( frontIsClear c) c) i( turnLeft move i) m)",
            RepetitiveSubsequence,
        ),
        (
            "DEF run m( WHILE c( frontIsClear c) w( move move putMarker move w) turnLeft WHILE c( frontIsClear c) w( move move putMarker move w) m)",
            RepetitiveSubsequence,
        ),
        (
            "DEF run m( move turnLeft move putMarker move turnRight move move pickMarker move move turnLeft move putMarker move turnRight move move pickMarker move m)",
            RepetitiveSubsequence,
        ),
        (
            "DEF run m( turnLeft move turnLeft move turnLeft move turnLeft move turnLeft move turnLeft move turnLeft move turnLeft move turnLeft move turnLeft move m)",
            RepetitiveSubsequence,
        ),
        (
            "DEF run m( IFELSE c( markersPresent c) i( pickMarker i) ELSE e( move e) IFELSE c( markersPresent c) i( pickMarker i) ELSE e( move e) m)",
            RepetitiveSubsequence,
        ),
        ("DEF run m( m)", NoOpProgram),
        ("DEF run m( turnLeft turnLeft turnLeft turnLeft m)", NoOpProgram),
        ("DEF run m( turnRight turnRight turnRight turnRight m)", NoOpProgram),
        ("DEF run m( REPEAT R=4 r( turnLeft r) m)", NoOpProgram),
        ("DEF run m( REPEAT R=8 r( turnRight r) m)", NoOpProgram),
        (
            "DEF run m( IFELSE c( markersPresent c) i( turnLeft turnLeft turnLeft turnLeft i) ELSE e( turnRight turnRight turnRight turnRight e) m)",
            NoOpProgram,
        ),
        ("DEF run m( putMarker turnLeft pickMarker turnRight m)", NoOpProgram),
    ]
};
