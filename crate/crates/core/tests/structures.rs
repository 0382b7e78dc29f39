use std::collections::BTreeSet;

use sdsgames_core::behaviour::{enumerate_counter_strategies, enumerate_strategies};
use sdsgames_core::catalog::catalog;
use sdsgames_core::constructors::{laurent_arrow, shift_down, strategy_of_response, with_error, Structure};
use sdsgames_core::position::{glb, project_source, project_target};
use sdsgames_core::sds::{validate_sds, SdsError};
use sdsgames_core::syntax::parse_position;
use sdsgames_core::{Game, Move, Position, Sds};

fn bool_() -> Sds {
    catalog().sds("Bool").unwrap().clone()
}

fn o() -> Sds {
    catalog().sds("o").unwrap().clone()
}

fn pos(game: &dyn Game, text: &str) -> Position {
    parse_position(game, text).unwrap()
}

fn texts(ps: &[Position]) -> BTreeSet<String> {
    ps.iter().map(|p| p.to_string()).collect()
}

/// Every word over `alphabet` of length at most `max`.
fn words(alphabet: &[Move], max: usize) -> Vec<Position> {
    let mut out = vec![Position::empty()];
    let mut frontier = vec![Position::empty()];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &frontier {
            for m in alphabet {
                next.push(w.with(m.clone()));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out.remove(0);
    out
}

fn labels(s: &Sds) -> (Vec<Move>, Vec<Move>) {
    let mut cells = BTreeSet::new();
    let mut values = BTreeSet::new();
    for p in s.positions(10_000).unwrap() {
        for m in p.iter() {
            if m.is_cell() {
                cells.insert(m.clone());
            } else {
                values.insert(m.clone());
            }
        }
    }
    (cells.into_iter().collect(), values.into_iter().collect())
}

/// Filters all tagged words by the defining clauses of the affine arrow.
fn arrow_oracle(s: &Sds, t: &Sds) -> BTreeSet<Position> {
    let ps: BTreeSet<Position> = s.positions(10_000).unwrap().into_iter().collect();
    let pt: BTreeSet<Position> = t.positions(10_000).unwrap().into_iter().collect();
    let depth = |set: &BTreeSet<Position>| set.iter().map(|p| p.len()).max().unwrap_or(0);
    let (sc, sv) = labels(s);
    let (tc, tv) = labels(t);
    let mut alphabet = Vec::new();
    alphabet.extend(tc.into_iter().map(Move::request));
    alphabet.extend(tv.into_iter().map(Move::output));
    alphabet.extend(sc.into_iter().map(Move::valof));
    alphabet.extend(sv.into_iter().map(Move::is));
    words(&alphabet, depth(&ps) + depth(&pt))
        .into_iter()
        .filter(|w| matches!(w[0], Move::Request(_)))
        .filter(|w| w.is_alternating())
        .filter(|w| pt.contains(&project_target(w)))
        .filter(|w| {
            let src = project_source(w);
            src.is_empty() || ps.contains(&src)
        })
        .filter(|w| !w.windows(2).any(|p| matches!(p[0], Move::Valof(_)) && matches!(p[1], Move::Request(_))))
        .collect()
}

/// Direct filter of all subsets by the strategy clauses.
fn strategy_oracle(game: &Sds) -> usize {
    let responses: Vec<Position> = game.positions(10_000).unwrap().into_iter().filter(|p| p.is_response()).collect();
    assert!(responses.len() <= 20, "too many responses for the subset oracle");
    (0u32..1 << responses.len())
        .filter(|mask| {
            let x: BTreeSet<&Position> =
                responses.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, r)| r).collect();
            x.iter().all(|r| r.response_prefixes().all(|p| x.contains(&p)))
                && x.iter().all(|a| {
                    x.iter().all(|b| {
                        let g = glb(a, b);
                        g.is_empty() || x.contains(&g)
                    })
                })
        })
        .count()
}

fn counter_oracle(game: &Sds) -> usize {
    let queries: Vec<Position> = game.positions(10_000).unwrap().into_iter().filter(|p| p.is_query()).collect();
    assert!(queries.len() <= 20);
    (1u32..1 << queries.len())
        .filter(|mask| {
            let a: BTreeSet<&Position> =
                queries.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, q)| q).collect();
            a.iter().all(|q| q.query_prefixes().all(|p| a.contains(&p)))
                && a.iter().all(|x| a.iter().all(|y| a.contains(&glb(x, y))))
        })
        .count()
}

/// Strategy count by recursion on the forest, without building any set.
fn count_strategies(game: &dyn Game, at: &Position) -> u128 {
    let mut total: u128 = 1;
    for c in game.successors(at) {
        let q = at.with(c);
        let mut here: u128 = 1;
        for v in game.successors(&q) {
            let r = q.with(v);
            here += count_strategies(game, &r);
        }
        total *= here;
    }
    total
}

#[test]
fn bool_validates_and_rejects() {
    let q = Move::cell("?");
    let ok = vec![
        Position::from(vec![q.clone()]),
        Position::from(vec![q.clone(), Move::value("tt")]),
        Position::from(vec![q.clone(), Move::value("ff")]),
    ];
    assert_eq!(validate_sds("Bool", &ok).unwrap().positions(10).unwrap().len(), 3);
    let starts_with_value = vec![Position::from(vec![Move::value("tt")])];
    assert!(matches!(validate_sds("X", &starts_with_value), Err(SdsError::StartsWithValue(_))));
    let missing = vec![Position::from(vec![q, Move::value("tt")])];
    assert!(matches!(validate_sds("X", &missing), Err(SdsError::MissingPrefix { .. })));
}

#[test]
fn product_of_bools() {
    let b2 = catalog().sds("Bool2").unwrap().clone();
    let ps = b2.positions(100).unwrap();
    assert_eq!(
        texts(&ps),
        ["?.1", "?.1 tt.1", "?.1 ff.1", "?.2", "?.2 tt.2", "?.2 ff.2"].iter().map(|s| s.to_string()).collect()
    );
    let (cells, values) = labels(&b2);
    assert_eq!(cells.len(), 2);
    assert_eq!(values.len(), 4);
    assert!(parse_position(&b2, "?.1 ff.1 ?.2 tt.2").is_err());

    // pairing oracle: D(Bool × Bool) ≅ D(Bool) × D(Bool)
    let d = enumerate_strategies(&bool_(), 1000).unwrap();
    let d2 = enumerate_strategies(&b2, 1000).unwrap();
    assert_eq!(d2.len(), d.len() * d.len());
    let tag = |i: u8, x: &sdsgames_core::Strategy| -> BTreeSet<Position> {
        x.iter().map(|r| r.iter().map(|m| Move::comp(i, m.clone())).collect()).collect()
    };
    let mut paired = BTreeSet::new();
    for a in &d {
        for b in &d {
            let mut s = tag(1, a);
            s.extend(tag(2, b));
            paired.insert(s);
        }
    }
    let got: BTreeSet<BTreeSet<Position>> = d2.iter().map(|x| x.responses().clone()).collect();
    assert_eq!(got, paired);
    // inclusion is componentwise
    for x in &d2 {
        for y in &d2 {
            let split = |s: &sdsgames_core::Strategy, i: u8| -> BTreeSet<Position> {
                s.iter().filter(|r| matches!(&r[0], Move::Comp(j, _) if *j == i)).cloned().collect()
            };
            let componentwise = split(x, 1).is_subset(&split(y, 1)) && split(x, 2).is_subset(&split(y, 2));
            assert_eq!(x.is_subset(y), componentwise);
        }
    }
}

#[test]
fn arrows_match_the_word_filter() {
    let b = bool_();
    let b2 = catalog().sds("Bool2").unwrap().clone();
    for (s, t) in [(b.clone(), b.clone()), (b2.clone(), b.clone()), (b.clone(), b2.clone()), (o(), b.clone())] {
        let arrow = Sds::arrow(s.clone(), t.clone());
        let got: BTreeSet<Position> = arrow.positions(100_000).unwrap().into_iter().collect();
        assert_eq!(got, arrow_oracle(&s, &t), "{arrow}");
    }
    let bb = Sds::arrow(b.clone(), b.clone());
    assert_eq!(bb.positions(100).unwrap().len(), 10);
    assert!(bb.is_position(&pos(&bb, "req ? valof ? is tt out ff")));
    let lor_word = "req ? valof ?.1 is ff.1 valof ?.2 is tt.2 out tt";
    assert!(parse_position(&Sds::arrow(b2, b), lor_word).is_err());
}

#[test]
fn adjacency_ban_applies_with_legal_projections() {
    let b = bool_();
    let b2 = catalog().sds("Bool2").unwrap().clone();
    let arrow = Sds::arrow(b, b2);
    let p = pos(&arrow, "req ?.1 valof ?");
    let next = arrow.successors(&p);
    assert!(next.iter().all(|m| matches!(m, Move::Is(_))));
}

#[test]
fn strategy_counts_agree_with_oracles() {
    let b = bool_();
    let b2 = catalog().sds("Bool2").unwrap().clone();
    let games = [
        b.clone(),
        o(),
        b2.clone(),
        Sds::arrow(b.clone(), b.clone()),
        Sds::arrow(b2.clone(), b.clone()),
        Sds::bang(b2.clone()),
        Sds::bang(b.clone()),
    ];
    for g in &games {
        let d = enumerate_strategies(g, 1_000_000).unwrap();
        assert_eq!(d.len(), strategy_oracle(g), "{g}");
        assert_eq!(d.len() as u128, count_strategies(g, &Position::empty()), "{g}");
        let dc = enumerate_counter_strategies(g, 1_000_000).unwrap();
        assert_eq!(dc.len(), counter_oracle(g), "{g}");
    }
    let bb = Sds::arrow(b.clone(), b.clone());
    assert_eq!(enumerate_strategies(&bb, 1000).unwrap().len(), 12);
    assert_eq!(enumerate_counter_strategies(&bb, 1000).unwrap().len(), 3);
    let seq = Sds::arrow(Sds::bang(b2.clone()), b.clone());
    let d = enumerate_strategies(&seq, 1_000_000).unwrap();
    assert_eq!(d.len() as u128, count_strategies(&seq, &Position::empty()));
}

/// Bang positions generated straight from the two defining clauses.
fn bang_oracle(s: &Sds) -> BTreeSet<Position> {
    let ps = s.positions(10_000).unwrap();
    let queries: Vec<&Position> = ps.iter().filter(|p| p.is_query()).collect();
    let responses: Vec<&Position> = ps.iter().filter(|p| p.is_response()).collect();
    let mut out = BTreeSet::new();
    let mut frontier = vec![(Position::empty(), BTreeSet::<Position>::new())];
    while let Some((rho, x)) = frontier.pop() {
        for q in &queries {
            let parent = q.parent();
            let reachable = parent.is_empty() || x.contains(&parent);
            let answered = responses.iter().any(|r| r.parent() == **q && x.contains(*r));
            if !reachable || answered {
                continue;
            }
            let with_q = rho.with(Move::bang((*q).clone()));
            out.insert(with_q.clone());
            for r in responses.iter().filter(|r| r.parent() == **q) {
                let full = with_q.with(Move::bang((*r).clone()));
                let mut x2 = x.clone();
                x2.insert((*r).clone());
                out.insert(full.clone());
                frontier.push((full, x2));
            }
        }
    }
    out
}

#[test]
fn bang_matches_its_definition() {
    let b = bool_();
    let b2 = catalog().sds("Bool2").unwrap().clone();
    for s in [b.clone(), b2.clone(), Sds::arrow(b.clone(), b.clone())] {
        let bang = Sds::bang(s.clone());
        let got: BTreeSet<Position> = bang.positions(100_000).unwrap().into_iter().collect();
        assert_eq!(got, bang_oracle(&s), "{bang}");
        for rho in got.iter().filter(|p| p.is_response()) {
            let x = strategy_of_response(rho).unwrap();
            sdsgames_core::behaviour::validate_strategy(&s, x.into_set()).unwrap();
        }
    }
    // !Bool is Bool with relabelled moves
    let bang_bool = Sds::bang(b.clone());
    let relabel = |p: &Position| -> Position {
        p.iter()
            .map(|m| match m {
                Move::Bang(inner) => inner.last().unwrap().clone(),
                other => other.clone(),
            })
            .collect()
    };
    let mapped: BTreeSet<Position> = bang_bool.positions(100).unwrap().iter().map(relabel).collect();
    let plain: BTreeSet<Position> = b.positions(100).unwrap().into_iter().collect();
    assert_eq!(mapped, plain);

    let bang2 = Sds::bang(b2);
    let rho = pos(&bang2, "<?.1> <?.1 ff.1> <?.2>");
    assert!(bang2.is_position(&rho));
    let twice = pos(&bang2, "<?.1> <?.1 tt.1>").with(Move::bang(pos(&b, "?")));
    assert!(!bang2.is_position(&twice));
    let full = pos(&bang2, "<?.1> <?.1 ff.1> <?.2> <?.2 tt.2>");
    assert_eq!(strategy_of_response(&full).unwrap().to_string(), "{?.1 ff.1, ?.2 tt.2}");
    assert_eq!(strategy_of_response(&full.prefix(2)).unwrap().to_string(), "{?.1 ff.1}");
    assert!(strategy_of_response(&Position::empty()).unwrap().is_empty());
}

#[test]
fn bang_positions_with_equal_events_give_equal_strategies() {
    let b2 = catalog().sds("Bool2").unwrap().clone();
    let bang2 = Sds::bang(b2);
    let a = pos(&bang2, "<?.1> <?.1 ff.1> <?.2> <?.2 tt.2>");
    let b = pos(&bang2, "<?.2> <?.2 tt.2> <?.1> <?.1 ff.1>");
    assert_ne!(a, b);
    assert_eq!(strategy_of_response(&a).unwrap(), strategy_of_response(&b).unwrap());
}

#[test]
fn shift_and_laurent() {
    let b = bool_();
    let shifted = shift_down(&Structure::Sds(b.clone()), 100).unwrap();
    let ps = shifted.positions(100).unwrap();
    assert_eq!(ps.len(), 1 + b.positions(100).unwrap().len());
    let maximal: BTreeSet<String> =
        ps.iter().filter(|p| shifted.successors(p).is_empty()).map(|p| p.to_string()).collect();
    assert_eq!(maximal, ["* ~? ~ff", "* ~? ~tt"].iter().map(|s| s.to_string()).collect());
    let so = shift_down(&Structure::Sds(o()), 100).unwrap();
    assert_eq!(texts(&so.positions(100).unwrap()), ["*", "* ~?"].iter().map(|s| s.to_string()).collect());
    assert!(shift_down(&Structure::Polarized(shifted), 100).is_err());

    let b2 = catalog().sds("Bool2").unwrap().clone();
    for (s, t) in [(b.clone(), b.clone()), (b2.clone(), b.clone()), (b.clone(), b2)] {
        let (par, tr) = laurent_arrow(&s, &t, 10_000).unwrap();
        let arrow = Sds::arrow(s, t);
        let lp = par.positions(10_000).unwrap();
        let ap: BTreeSet<Position> = arrow.positions(10_000).unwrap().into_iter().collect();
        let image: BTreeSet<Position> = lp.iter().map(|p| tr.to_arrow(p).unwrap()).collect();
        assert_eq!(lp.len(), ap.len());
        assert_eq!(image, ap);
        for p in &lp {
            assert_eq!(tr.from_arrow(&tr.to_arrow(p).unwrap()).as_ref(), Some(p));
            for q in &lp {
                assert_eq!(p.is_prefix_of(q), tr.to_arrow(p).unwrap().is_prefix_of(&tr.to_arrow(q).unwrap()));
            }
        }
    }
    let (par, tr) = laurent_arrow(&b, &b, 100).unwrap();
    let first = par.successors(&[]);
    assert_eq!(first.len(), 1);
    assert_eq!(tr.to_arrow_move(&first[0]).unwrap().to_string(), "req ?");
}

#[test]
fn error_extension() {
    let e = with_error(&bool_(), 100).unwrap();
    assert_eq!(
        texts(&e.positions(100).unwrap()),
        ["?", "? tt", "? ff", "? err"].iter().map(|s| s.to_string()).collect()
    );
    let eo = with_error(&o(), 100).unwrap();
    assert_eq!(enumerate_strategies(&o(), 100).unwrap().len(), 1);
    assert_eq!(enumerate_strategies(&eo, 100).unwrap().len(), 2);
    assert!(matches!(with_error(&e, 100), Err(SdsError::LabelNotFresh(_))));
}

#[test]
fn glb_is_longest_common_prefix() {
    let b = bool_();
    let b2 = catalog().sds("Bool2").unwrap().clone();
    assert_eq!(glb(&pos(&b, "? tt"), &pos(&b, "? ff")).to_string(), "?");
    let p = pos(&b, "? tt");
    assert_eq!(glb(&p, &p), p);
    assert!(glb(&pos(&b2, "?.1 tt.1"), &pos(&b2, "?.2 ff.2")).is_empty());
}
