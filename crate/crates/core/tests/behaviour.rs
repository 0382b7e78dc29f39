use std::collections::BTreeSet;

use sdsgames_core::behaviour::{
    accessible, accessible_from_counter, enumerate_counter_strategies, enumerate_strategies, play, validate_behaviour,
    validate_counter_strategy, validate_strategy, Behaviour, BehaviourError, BehaviourKind,
};
use sdsgames_core::catalog::catalog;
use sdsgames_core::position::{project_source, project_target, restrict};
use sdsgames_core::syntax::parse_position;
use sdsgames_core::{CounterStrategy, Game, Position, Sds, Strategy, Winner};

fn sds(name: &str) -> Sds {
    catalog().sds(name).unwrap().clone()
}

fn set(game: &dyn Game, words: &[&str]) -> BTreeSet<Position> {
    words.iter().map(|w| parse_position(game, w).unwrap()).collect()
}

fn games() -> Vec<Sds> {
    let (b, b2) = (sds("Bool"), sds("Bool2"));
    vec![
        b.clone(),
        sds("o"),
        b2.clone(),
        sds("BoolE"),
        Sds::arrow(b.clone(), b.clone()),
        Sds::arrow(b2.clone(), b.clone()),
        Sds::bang(b2),
        sds("O3"),
    ]
}

#[test]
fn classification() {
    let b = sds("Bool");
    assert!(parse_position(&b, "?").unwrap().is_query());
    assert!(parse_position(&b, "? tt").unwrap().is_response());
    assert!(parse_position(&b, "tt").is_err());
}

#[test]
fn validation_examples() {
    let (b, b2) = (sds("Bool"), sds("Bool2"));
    assert!(validate_strategy(&b2, set(&b2, &["?.1 tt.1", "?.2 ff.2"])).is_ok());
    assert!(matches!(
        validate_strategy(&b2, set(&b2, &["?.1 tt.1", "?.1 ff.1"])),
        Err(BehaviourError::GlbNotMember { .. })
    ));
    assert!(matches!(
        validate_behaviour(&b, BehaviourKind::CounterStrategy, set(&b, &["?"])),
        Ok(Behaviour::Counter(_))
    ));
    assert!(matches!(validate_counter_strategy(&b, BTreeSet::new()), Err(BehaviourError::EmptyCounterStrategy)));
    assert!(matches!(validate_strategy(&b, set(&b, &["?"])), Err(BehaviourError::WrongEnding(..))));
    let arrow = Sds::arrow(b.clone(), b.clone());
    assert!(matches!(
        validate_strategy(&arrow, set(&arrow, &["req ? valof ? is tt out ff"])),
        Err(BehaviourError::MissingPrefix { .. })
    ));
    let d = enumerate_strategies(&b, 100).unwrap();
    let expected: BTreeSet<BTreeSet<Position>> =
        [BTreeSet::new(), set(&b, &["? tt"]), set(&b, &["? ff"])].into_iter().collect();
    assert_eq!(d.iter().map(|x| x.responses().clone()).collect::<BTreeSet<_>>(), expected);
    let o = sds("o");
    assert_eq!(enumerate_strategies(&o, 100).unwrap(), vec![Strategy::empty()]);
}

#[test]
fn enumeration_is_exact_and_idempotent() {
    for g in games() {
        let d = enumerate_strategies(&g, 1_000_000).unwrap();
        assert!(d.contains(&Strategy::empty()));
        assert!(d.iter().all(|x| Strategy::empty().is_subset(x)));
        let distinct: BTreeSet<&Strategy> = d.iter().collect();
        assert_eq!(distinct.len(), d.len());
        for x in &d {
            assert_eq!(&validate_strategy(&g, x.responses().clone()).unwrap(), x);
        }
        for a in enumerate_counter_strategies(&g, 1_000_000).unwrap() {
            assert_eq!(validate_counter_strategy(&g, a.queries().clone()).unwrap(), a);
        }
    }
    let mut sorted = enumerate_strategies(&sds("Bool2"), 100).unwrap();
    let original = sorted.clone();
    sorted.sort();
    assert_eq!(sorted, original);
}

#[test]
fn accessibility() {
    let b = sds("Bool");
    assert_eq!(accessible(&b, &Strategy::empty()), set(&b, &["?"]));
    let tt = Strategy::from_set_unchecked(set(&b, &["? tt"]));
    assert!(accessible(&b, &tt).is_empty());
    let arrow = Sds::arrow(b.clone(), b.clone());
    let x = Strategy::from_set_unchecked(set(&arrow, &["req ? valof ?"]));
    assert_eq!(accessible(&arrow, &x), set(&arrow, &["req ? valof ? is tt", "req ? valof ? is ff"]));

    for g in games() {
        for x in enumerate_strategies(&g, 1_000_000).unwrap() {
            for q in accessible(&g, &x) {
                assert!(q.is_query() && g.is_position(&q));
                let parent = q.parent();
                assert!(parent.is_empty() || x.contains(&parent));
                assert!(x.answer(&q).is_none());
            }
        }
        for a in enumerate_counter_strategies(&g, 1_000_000).unwrap() {
            for r in accessible_from_counter(&g, &a) {
                assert!(r.is_response() && a.contains(&r.parent()));
                assert!(a.next_cell(&r).is_none());
            }
        }
    }
}

/// The maximal position with response prefixes in `x` and query prefixes in
/// `alpha`, by scanning every position.
fn play_oracle(g: &Sds, x: &Strategy, alpha: &CounterStrategy) -> Position {
    let fits: Vec<Position> = g
        .positions(1_000_000)
        .unwrap()
        .into_iter()
        .filter(|p| p.response_prefixes().all(|r| x.contains(&r)) && p.query_prefixes().all(|q| alpha.contains(&q)))
        .collect();
    let maximal: Vec<&Position> =
        fits.iter().filter(|p| !fits.iter().any(|o| o.len() > p.len() && p.is_prefix_of(o))).collect();
    assert_eq!(maximal.len(), 1, "play is totally ordered");
    maximal[0].clone()
}

#[test]
fn play_matches_its_characterisation() {
    let b = sds("Bool");
    let x = Strategy::from_set_unchecked(set(&b, &["? tt"]));
    let top = CounterStrategy::from_set_unchecked(set(&b, &["?"]));
    let p = play(&x, &top);
    assert_eq!((p.maximal.to_string(), p.winner), ("? tt".to_string(), Winner::Player));
    let p = play(&Strategy::empty(), &top);
    assert_eq!((p.maximal.to_string(), p.winner), ("?".to_string(), Winner::Opponent));
    let b2 = sds("Bool2");
    let x = Strategy::from_set_unchecked(set(&b2, &["?.1 tt.1", "?.2 ff.2"]));
    let a = CounterStrategy::from_set_unchecked(set(&b2, &["?.2"]));
    let p = play(&x, &a);
    assert_eq!(p.maximal.to_string(), "?.2 ff.2");
    assert!(p.player_wins());

    for g in games() {
        let points = enumerate_strategies(&g, 1_000_000).unwrap();
        let counters = enumerate_counter_strategies(&g, 1_000_000).unwrap();
        for x in &points {
            for a in &counters {
                let p = play(x, a);
                assert_eq!(p.maximal, play_oracle(&g, x, a));
                if p.maximal.is_response() {
                    assert_eq!(p.winner, Winner::Player);
                    assert!(x.contains(&p.maximal) && accessible_from_counter(&g, a).contains(&p.maximal));
                } else {
                    assert_eq!(p.winner, Winner::Opponent);
                    assert!(a.contains(&p.maximal) && accessible(&g, x).contains(&p.maximal));
                }
            }
        }
    }
}

#[test]
fn restriction() {
    let (b, b2) = (sds("Bool"), sds("Bool2"));
    let arrow = Sds::arrow(b2.clone(), b.clone());
    let w = parse_position(&arrow, "req ? valof ?.1 is ff.1").unwrap();
    let mut word = w.clone();
    word.push(sdsgames_core::Move::valof(sdsgames_core::Move::comp(2, sdsgames_core::Move::cell("?"))));
    assert_eq!(project_target(&word).to_string(), "?");
    assert_eq!(project_source(&word).to_string(), "?.1 ff.1 ?.2");
    assert!(!b2.is_position(&project_source(&word)));
    assert!(restrict(&[], |_| true).is_empty());
    assert_eq!(restrict(&word, |_| false), Position::empty());
}
