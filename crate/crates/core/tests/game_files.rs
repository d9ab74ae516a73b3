use std::path::Path;

use proptest::prelude::*;
use weightlab::game::{GameError, Violation};
use weightlab::random::random_game;
use weightlab::*;

#[test]
fn fixture_matches_builtin() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/counterexample.json");
    let loaded = StochasticGame::load(&path).unwrap();
    assert_eq!(loaded.to_spec(), Builtin::Counterexample.game().to_spec());
}

#[test]
fn builtins_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for b in Builtin::ALL {
        let g = b.game();
        assert!(g.validate().is_empty());
        let path = dir.path().join(format!("{b}.json"));
        g.save(&path).unwrap();
        assert_eq!(StochasticGame::load(&path).unwrap().to_spec(), g.to_spec());
    }
}

#[test]
fn block_games_share_absorbing_states() {
    let a = Builtin::Counterexample.game().absorbing_states();
    assert_eq!(a, Builtin::VigeralPrime.game().absorbing_states());
    assert_eq!(a.into_iter().collect::<Vec<_>>(), vec![2, 3]);
    assert!(Builtin::BigMatch.game().is_absorbing_game());
    assert!(!Builtin::Counterexample.game().is_absorbing_game());
}

#[test]
fn invalid_files_report_every_violation() {
    let mut spec = Builtin::BigMatch.game().to_spec();
    spec.payoff[0][0][1] = 1.5;
    spec.transition[0][1][1] = vec![0.5, 0.0, 0.0];
    let err = StochasticGame::try_from(spec).unwrap_err();
    let GameError::Invalid(violations) = err else { panic!("expected violations") };
    assert_eq!(violations.len(), 2);
    assert!(violations.iter().any(|v| matches!(v, Violation::PayoffOutOfRange { .. })));
    assert!(violations.iter().any(|v| matches!(v, Violation::RowSum { .. })));
}

#[test]
fn malformed_json_names_the_location() {
    let err = StochasticGame::from_json("{\"states\": [\"a\"],\n \"actions1\": 3", "bad.json").unwrap_err();
    assert!(matches!(err, GameError::Parse { line: 2, .. }), "{err}");
    let text = Builtin::Oscillator.game().to_json().replace("\"1.0\"", "\"one\"");
    assert!(StochasticGame::from_json(&text, "bad.json").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn random_games_are_valid_and_round_trip(states in 1usize..6, actions in 1usize..5, seed in any::<u64>()) {
        let g = random_game(states, actions, seed);
        prop_assert!(g.validate().is_empty());
        let back = StochasticGame::from_json(&g.to_json(), "memory").unwrap();
        prop_assert_eq!(back.to_spec(), g.to_spec());
        prop_assert_eq!(random_game(states, actions, seed).to_json(), g.to_json());
    }
}
