//! Strategies, counter-strategies and plays.
//!
//! A strategy is a set of responses, closed under response prefixes, that
//! branches only at values: every query has at most one answer. A
//! counter-strategy is a non-empty set of queries with a single root,
//! closed under query prefixes, that branches only at cells.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::moves::Move;
use crate::position::{glb, Position};
use crate::sds::{accessible_queries, Game, SdsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BehaviourError {
    #[error("{0} is not a position")]
    NotAPosition(Position),
    #[error("{0} is not a {1}")]
    WrongEnding(Position, &'static str),
    #[error("{member} is present but its prefix {prefix} is not")]
    MissingPrefix { member: Position, prefix: Position },
    #[error("glb of {a} and {b} is {glb}, which is not a member")]
    GlbNotMember { a: Position, b: Position, glb: Position },
    #[error("a counter-strategy must be non-empty")]
    EmptyCounterStrategy,
}

/// A set of responses satisfying the strategy conditions.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Strategy(BTreeSet<Position>);

/// A set of queries satisfying the counter-strategy conditions.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CounterStrategy(BTreeSet<Position>);

fn extension_by_one(set: &BTreeSet<Position>, p: &Position) -> Option<Move> {
    let e = set.range(p.clone()..).next()?;
    if e.len() > p.len() && p.is_prefix_of(e) {
        let candidate = e.prefix(p.len() + 1);
        if set.contains(&candidate) {
            return candidate.last().cloned();
        }
    }
    None
}

impl Strategy {
    pub fn empty() -> Strategy {
        Strategy(BTreeSet::new())
    }

    /// Wraps a set without checking; callers must only pass valid strategies.
    pub fn from_set_unchecked(set: BTreeSet<Position>) -> Strategy {
        Strategy(set)
    }

    /// The smallest strategy containing the response `r`.
    pub fn from_response(r: &Position) -> Strategy {
        Strategy(r.response_prefixes().collect())
    }

    pub fn responses(&self) -> &BTreeSet<Position> {
        &self.0
    }

    pub fn into_set(self) -> BTreeSet<Position> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, r: &Position) -> bool {
        self.0.contains(r)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Position> {
        self.0.iter()
    }

    /// The value the strategy plays at query `q`, if any.
    pub fn answer(&self, q: &Position) -> Option<Move> {
        extension_by_one(&self.0, q)
    }

    pub fn is_subset(&self, other: &Strategy) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &Strategy) -> BTreeSet<Position> {
        self.0.union(&other.0).cloned().collect()
    }
}

impl CounterStrategy {
    pub fn from_set_unchecked(set: BTreeSet<Position>) -> CounterStrategy {
        CounterStrategy(set)
    }

    /// The smallest counter-strategy containing the query `q`.
    pub fn from_query(q: &Position) -> CounterStrategy {
        CounterStrategy(q.query_prefixes().collect())
    }

    pub fn queries(&self) -> &BTreeSet<Position> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, q: &Position) -> bool {
        self.0.contains(q)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Position> {
        self.0.iter()
    }

    pub fn root(&self) -> Option<&Position> {
        self.0.iter().find(|q| q.len() == 1)
    }

    /// The cell the counter-strategy plays after response `r`, if any.
    pub fn next_cell(&self, r: &Position) -> Option<Move> {
        extension_by_one(&self.0, r)
    }

    pub fn is_subset(&self, other: &CounterStrategy) -> bool {
        self.0.is_subset(&other.0)
    }
}

fn fmt_set(f: &mut fmt::Formatter<'_>, set: &BTreeSet<Position>) -> fmt::Result {
    f.write_str("{")?;
    for (i, p) in set.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{p}")?;
    }
    f.write_str("}")
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_set(f, &self.0)
    }
}

impl fmt::Debug for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_set(f, &self.0)
    }
}

impl fmt::Display for CounterStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_set(f, &self.0)
    }
}

impl fmt::Debug for CounterStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_set(f, &self.0)
    }
}

impl serde::Serialize for Strategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

impl serde::Serialize for CounterStrategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

/// Checks positions, ending kind and prefix closure; shared by both kinds.
fn check_members(game: &dyn Game, set: &BTreeSet<Position>, want_response: bool) -> Result<(), BehaviourError> {
    let what = if want_response { "response" } else { "query" };
    for p in set {
        if !game.is_position(p) {
            return Err(BehaviourError::NotAPosition(p.clone()));
        }
        if p.is_response() != want_response {
            return Err(BehaviourError::WrongEnding(p.clone(), what));
        }
        let prefixes: Vec<Position> =
            if want_response { p.response_prefixes().collect() } else { p.query_prefixes().collect() };
        for prefix in prefixes {
            if !set.contains(&prefix) {
                return Err(BehaviourError::MissingPrefix { member: p.clone(), prefix });
            }
        }
    }
    Ok(())
}

/// Two members whose glb is a non-empty non-member, if any.
///
/// With prefix closure in place this happens exactly when two members
/// share a parent, so the scan groups members by parent.
fn glb_violation(set: &BTreeSet<Position>, allow_empty_glb: bool) -> Option<(Position, Position)> {
    let mut prev: Option<&Position> = None;
    let mut by_parent: std::collections::BTreeMap<Position, &Position> = Default::default();
    for p in set {
        if let Some(other) = by_parent.insert(p.parent(), p) {
            return Some((other.clone(), p.clone()));
        }
        if !allow_empty_glb && p.len() == 1 {
            if let Some(first) = prev {
                return Some((first.clone(), p.clone()));
            }
            prev = Some(p);
        }
    }
    None
}

pub fn validate_strategy(game: &dyn Game, set: BTreeSet<Position>) -> Result<Strategy, BehaviourError> {
    check_members(game, &set, true)?;
    if let Some((a, b)) = glb_violation(&set, true) {
        let g = glb(&a, &b);
        if !g.is_empty() {
            return Err(BehaviourError::GlbNotMember { a, b, glb: g });
        }
    }
    Ok(Strategy(set))
}

pub fn validate_counter_strategy(game: &dyn Game, set: BTreeSet<Position>) -> Result<CounterStrategy, BehaviourError> {
    if set.is_empty() {
        return Err(BehaviourError::EmptyCounterStrategy);
    }
    check_members(game, &set, false)?;
    if let Some((a, b)) = glb_violation(&set, false) {
        let g = glb(&a, &b);
        return Err(BehaviourError::GlbNotMember { a, b, glb: g });
    }
    Ok(CounterStrategy(set))
}

/// Either kind of behaviour, for callers that pick at runtime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Behaviour {
    Strategy(Strategy),
    Counter(CounterStrategy),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BehaviourKind {
    Strategy,
    CounterStrategy,
}

pub fn validate_behaviour(
    game: &dyn Game,
    kind: BehaviourKind,
    set: BTreeSet<Position>,
) -> Result<Behaviour, BehaviourError> {
    match kind {
        BehaviourKind::Strategy => validate_strategy(game, set).map(Behaviour::Strategy),
        BehaviourKind::CounterStrategy => validate_counter_strategy(game, set).map(Behaviour::Counter),
    }
}

/// Queries accessible from `x`: `r·c` with `r ∈ x ∪ {ε}` and `c` unanswered.
pub fn accessible(game: &dyn Game, x: &Strategy) -> BTreeSet<Position> {
    accessible_queries(game, &x.0).into_iter().collect()
}

/// Responses accessible from `alpha`: `q·v` with `q ∈ alpha` and no follow-up cell.
pub fn accessible_from_counter(game: &dyn Game, alpha: &CounterStrategy) -> BTreeSet<Position> {
    let mut out = BTreeSet::new();
    for q in &alpha.0 {
        for v in game.successors(q) {
            let r = q.with(v);
            if alpha.next_cell(&r).is_none() {
                out.insert(r);
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    Player,
    Opponent,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct PlayResult {
    pub maximal: Position,
    pub winner: Winner,
}

impl PlayResult {
    pub fn player_wins(&self) -> bool {
        self.winner == Winner::Player
    }
}

/// The maximal position whose response prefixes lie in `x` and whose query
/// prefixes lie in `alpha`.
pub fn play(x: &Strategy, alpha: &CounterStrategy) -> PlayResult {
    let root = alpha.root().expect("counter-strategies are non-empty").clone();
    let mut p = root;
    loop {
        let Some(v) = x.answer(&p) else {
            return PlayResult { maximal: p, winner: Winner::Opponent };
        };
        p.push(v);
        let Some(c) = alpha.next_cell(&p) else {
            return PlayResult { maximal: p, winner: Winner::Player };
        };
        p.push(c);
    }
}

struct Counter {
    left: usize,
    budget: usize,
}

impl Counter {
    fn charge(&mut self, n: usize) -> Result<(), SdsError> {
        if n > self.left {
            return Err(SdsError::Budget(self.budget));
        }
        self.left -= n;
        Ok(())
    }
}

type Sets = Vec<BTreeSet<Position>>;

fn cartesian(acc: Sets, opts: &Sets, ctr: &mut Counter) -> Result<Sets, SdsError> {
    ctr.charge(acc.len() * opts.len())?;
    let mut out = Vec::with_capacity(acc.len() * opts.len());
    for a in &acc {
        for o in opts {
            let mut s = a.clone();
            s.extend(o.iter().cloned());
            out.push(s);
        }
    }
    Ok(out)
}

fn strategies_at_cell(game: &dyn Game, q: &Position, ctr: &mut Counter) -> Result<Sets, SdsError> {
    let mut res: Sets = vec![BTreeSet::new()];
    for v in game.successors(q) {
        let r = q.with(v);
        let mut below: Sets = vec![BTreeSet::new()];
        for c in game.successors(&r) {
            let opts = strategies_at_cell(game, &r.with(c), ctr)?;
            below = cartesian(below, &opts, ctr)?;
        }
        for mut s in below {
            s.insert(r.clone());
            res.push(s);
        }
    }
    ctr.charge(res.len())?;
    Ok(res)
}

fn counters_at_cell(game: &dyn Game, q: &Position, ctr: &mut Counter) -> Result<Sets, SdsError> {
    let mut acc: Sets = vec![[q.clone()].into_iter().collect()];
    for v in game.successors(q) {
        let r = q.with(v);
        let mut opts: Sets = vec![BTreeSet::new()];
        for c in game.successors(&r) {
            opts.extend(counters_at_cell(game, &r.with(c), ctr)?);
        }
        acc = cartesian(acc, &opts, ctr)?;
    }
    Ok(acc)
}

/// All finite strategies, sorted. Fails once `budget` intermediate sets
/// have been built.
pub fn enumerate_strategies(game: &dyn Game, budget: usize) -> Result<Vec<Strategy>, SdsError> {
    let mut ctr = Counter { left: budget, budget };
    let mut all: Sets = vec![BTreeSet::new()];
    for c in game.successors(&[]) {
        let opts = strategies_at_cell(game, &Position::from(vec![c]), &mut ctr)?;
        all = cartesian(all, &opts, &mut ctr)?;
    }
    let mut out: Vec<Strategy> = all.into_iter().map(Strategy).collect();
    out.sort();
    Ok(out)
}

/// All finite counter-strategies, sorted.
pub fn enumerate_counter_strategies(game: &dyn Game, budget: usize) -> Result<Vec<CounterStrategy>, SdsError> {
    let mut ctr = Counter { left: budget, budget };
    let mut out = Vec::new();
    for c in game.successors(&[]) {
        out.extend(counters_at_cell(game, &Position::from(vec![c]), &mut ctr)?);
    }
    let mut out: Vec<CounterStrategy> = out.into_iter().map(CounterStrategy).collect();
    out.sort();
    Ok(out)
}
