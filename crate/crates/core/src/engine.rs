//! Affine algorithms and their composition.
//!
//! Composition runs on a small abstract machine over triples `(s, s', s'')`
//! of positions of `S -o S'`, `S' -o S''` and `S -o S''`. Two rules belong to
//! the observer of the composite; the other four are deterministic and are
//! iterated until the composite answers, asks its input, or gets stuck.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::behaviour::{validate_strategy, BehaviourError, Strategy};
use crate::moves::Move;
use crate::position::{project_source, project_target, Position};
use crate::sds::{strategy_of_bang_position, Game, Sds, SdsError};

/// Default number of deterministic rule applications allowed per query.
pub const DEFAULT_STEP_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AffineError {
    #[error("{position}: the {side} projection is not a position")]
    Projection { position: Position, side: &'static str },
    #[error("{0}: a source query is followed directly by a target request")]
    Adjacency(Position),
    #[error("{0}: moves do not alternate between the arrow's cells and values")]
    Shape(Position),
    #[error(transparent)]
    Closure(#[from] BehaviourError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("cannot compose {left} with {right}: the middle types differ")]
    TypeMismatch { left: String, right: String },
    #[error("{0} is not an arrow type")]
    NotAnArrow(String),
    #[error("observer move {mv} is not legal after {at}")]
    IllegalObserverMove { mv: Move, at: Position },
    #[error("the observer cannot move while the machine is {0}")]
    ObserverNotExpected(Phase),
    #[error("step cap of {cap} exceeded after {} steps", trace.len())]
    StepCap { cap: usize, trace: Vec<TraceEntry> },
    #[error("the middle algorithm answered {got} where the replay expected {expected}")]
    Inconsistent { expected: Move, got: Move },
    #[error(transparent)]
    Affine(#[from] AffineError),
    #[error(transparent)]
    Sds(#[from] SdsError),
}

/// A strategy of `source -o target`.
#[derive(Clone, PartialEq, Eq)]
pub struct Algorithm {
    source: Sds,
    target: Sds,
    strategy: Strategy,
}

impl Algorithm {
    /// Wraps a strategy that is already known to be valid over the arrow.
    pub fn new_unchecked(source: Sds, target: Sds, strategy: Strategy) -> Algorithm {
        Algorithm { source, target, strategy }
    }

    pub fn source(&self) -> &Sds {
        &self.source
    }

    pub fn target(&self) -> &Sds {
        &self.target
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    pub fn arrow(&self) -> Sds {
        Sds::arrow(self.source.clone(), self.target.clone())
    }

    pub fn answer(&self, at: &Position) -> Option<Move> {
        self.strategy.answer(at)
    }
}

impl fmt::Debug for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Algorithm({} -o {}: {})", self.source, self.target, self.strategy)
    }
}

fn diagnose(source: &Sds, target: &Sds, p: &Position) -> AffineError {
    let arrow = Sds::arrow(source.clone(), target.clone());
    for k in 0..p.len() {
        if arrow.successors(&p[..k]).contains(&p[k]) {
            continue;
        }
        let upto = p.prefix(k + 1);
        let m = &p[k];
        if k > 0 && matches!(p[k - 1], Move::Valof(_)) && matches!(m, Move::Request(_)) {
            return AffineError::Adjacency(upto);
        }
        if m.is_source_tag() && !source.is_position(&project_source(&upto)) {
            return AffineError::Projection { position: upto, side: "source" };
        }
        if m.is_target_tag() && !target.is_position(&project_target(&upto)) {
            return AffineError::Projection { position: upto, side: "target" };
        }
        return AffineError::Shape(upto);
    }
    AffineError::Shape(p.clone())
}

/// Checks that `set` is a strategy of `source -o target`.
pub fn validate_affine(set: BTreeSet<Position>, source: &Sds, target: &Sds) -> Result<Algorithm, AffineError> {
    let arrow = Sds::arrow(source.clone(), target.clone());
    for p in &set {
        if !arrow.is_position(p) {
            return Err(diagnose(source, target, p));
        }
    }
    let strategy = validate_strategy(&arrow, set)?;
    Ok(Algorithm::new_unchecked(source.clone(), target.clone(), strategy))
}

/// The word in which the player repeats every move on the other side.
pub fn copycat(p: &Position) -> Position {
    let mut out = Position::empty();
    for m in p.iter() {
        if m.is_cell() {
            out.push(Move::request(m.clone()));
            out.push(Move::valof(m.clone()));
        } else {
            out.push(Move::is(m.clone()));
            out.push(Move::output(m.clone()));
        }
    }
    out
}

/// The identity of `s -o s`.
pub fn copycat_id(s: &Sds, budget: usize) -> Result<Algorithm, SdsError> {
    let set = s.positions(budget)?.iter().map(copycat).collect();
    Ok(Algorithm::new_unchecked(s.clone(), s.clone(), Strategy::from_set_unchecked(set)))
}

/// The function part: target responses reachable from the input `x`.
pub fn apply(phi: &Algorithm, x: &Strategy) -> Strategy {
    let mut out = BTreeSet::new();
    for s in phi.strategy.iter() {
        if !matches!(s.last(), Some(Move::Output(_))) {
            continue;
        }
        let src = project_source(s);
        if src.is_empty() || x.contains(&src) {
            out.insert(project_target(s));
        }
    }
    Strategy::from_set_unchecked(out)
}

/// Wraps an affine algorithm `S -o S'` as `!S -o S'` by asking every source
/// query through the bang.
pub fn lift(phi: &Algorithm) -> Algorithm {
    let mut set = BTreeSet::new();
    for s in phi.strategy.iter() {
        let mut out = Position::empty();
        let mut src = Position::empty();
        for m in s.iter() {
            out.push(match m {
                Move::Valof(c) | Move::Is(c) => {
                    src.push((**c).clone());
                    let b = Move::bang(src.clone());
                    if m.is_value() {
                        Move::valof(b)
                    } else {
                        Move::is(b)
                    }
                }
                other => other.clone(),
            });
        }
        set.insert(out);
    }
    Algorithm::new_unchecked(Sds::bang(phi.source.clone()), phi.target.clone(), Strategy::from_set_unchecked(set))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    AwaitingObserver,
    Running,
    /// The composite has answered the observer's last request.
    FinalResponse,
    /// The composite asked a cell of its input and waits for its value.
    StuckOnInput,
    /// Neither algorithm provides the next move.
    Stuck,
}

impl Phase {
    pub fn observer_may_move(self) -> bool {
        matches!(self, Phase::AwaitingObserver | Phase::FinalResponse | Phase::StuckOnInput)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::AwaitingObserver => "awaiting-observer",
            Phase::Running => "running",
            Phase::FinalResponse => "final-response",
            Phase::StuckOnInput => "stuck-on-input",
            Phase::Stuck => "stuck",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MachineState {
    pub s: Position,
    #[serde(rename = "s'")]
    pub s1: Position,
    #[serde(rename = "s''")]
    pub s2: Position,
    pub phase: Phase,
}

impl MachineState {
    pub fn initial() -> MachineState {
        MachineState {
            s: Position::empty(),
            s1: Position::empty(),
            s2: Position::empty(),
            phase: Phase::AwaitingObserver,
        }
    }
}

impl Default for MachineState {
    fn default() -> Self {
        MachineState::initial()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    ObserverRequest,
    ObserverAnswer,
    SecondOutputs,
    SecondAsks,
    FirstOutputs,
    FirstAsks,
}

impl Rule {
    /// Position of the rule in the machine's table, from 1.
    pub fn number(self) -> u8 {
        self as u8 + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub rule: Rule,
    pub s: Position,
    #[serde(rename = "s'")]
    pub s1: Position,
    #[serde(rename = "s''")]
    pub s2: Position,
}

fn composite(phi: &Algorithm, psi: &Algorithm) -> Result<Sds, EngineError> {
    if phi.target != psi.source {
        return Err(EngineError::TypeMismatch { left: phi.arrow().to_string(), right: psi.arrow().to_string() });
    }
    Ok(Sds::arrow(phi.source.clone(), psi.target.clone()))
}

/// Observer moves legal in `st`: cells extending `s''` in the composite.
pub fn legal_observer_moves(phi: &Algorithm, psi: &Algorithm, st: &MachineState) -> Vec<Move> {
    if !st.phase.observer_may_move() {
        return Vec::new();
    }
    let Ok(arrow) = composite(phi, psi) else { return Vec::new() };
    let mut out: Vec<Move> = arrow.successors(&st.s2).into_iter().filter(Move::is_cell).collect();
    out.sort();
    out
}

/// Applies one rule. `observer` must be given exactly when the observer is to move.
pub fn machine_step(
    st: &MachineState,
    phi: &Algorithm,
    psi: &Algorithm,
    observer: Option<&Move>,
) -> Result<(MachineState, Option<Rule>), EngineError> {
    let arrow = composite(phi, psi)?;
    let mut next = st.clone();
    if let Some(m) = observer {
        if !st.phase.observer_may_move() {
            return Err(EngineError::ObserverNotExpected(st.phase));
        }
        if !m.is_cell() || !arrow.successors(&st.s2).contains(m) {
            return Err(EngineError::IllegalObserverMove { mv: m.clone(), at: st.s2.clone() });
        }
        let rule = match m {
            Move::Request(_) => {
                next.s1.push(m.clone());
                Rule::ObserverRequest
            }
            _ => {
                next.s.push(m.clone());
                Rule::ObserverAnswer
            }
        };
        next.s2.push(m.clone());
        next.phase = Phase::Running;
        return Ok((next, Some(rule)));
    }
    if st.phase != Phase::Running {
        return Ok((next, None));
    }
    let rule = if st.s1.is_query() {
        match psi.answer(&st.s1) {
            Some(Move::Output(v)) => {
                let m = Move::output((*v).clone());
                next.s1.push(m.clone());
                next.s2.push(m);
                next.phase = Phase::FinalResponse;
                Some(Rule::SecondOutputs)
            }
            Some(Move::Valof(c)) => {
                next.s1.push(Move::valof((*c).clone()));
                next.s.push(Move::request((*c).clone()));
                Some(Rule::SecondAsks)
            }
            _ => None,
        }
    } else if st.s.is_query() {
        match phi.answer(&st.s) {
            Some(Move::Output(v)) => {
                next.s.push(Move::output((*v).clone()));
                next.s1.push(Move::is((*v).clone()));
                Some(Rule::FirstOutputs)
            }
            Some(Move::Valof(c)) => {
                let m = Move::valof((*c).clone());
                next.s.push(m.clone());
                next.s2.push(m);
                next.phase = Phase::StuckOnInput;
                Some(Rule::FirstAsks)
            }
            _ => None,
        }
    } else {
        None
    };
    if rule.is_none() {
        next.phase = Phase::Stuck;
    }
    Ok((next, rule))
}

fn entry(rule: Rule, st: &MachineState) -> TraceEntry {
    TraceEntry { rule, s: st.s.clone(), s1: st.s1.clone(), s2: st.s2.clone() }
}

/// Applies an observer move and runs the deterministic rules to quiescence.
pub fn machine_run_query(
    phi: &Algorithm,
    psi: &Algorithm,
    prior: &MachineState,
    observer: &Move,
    cap: usize,
) -> Result<(MachineState, Vec<TraceEntry>), EngineError> {
    let (mut st, rule) = machine_step(prior, phi, psi, Some(observer))?;
    let mut trace = vec![entry(rule.expect("observer rule"), &st)];
    while st.phase == Phase::Running {
        if trace.len() > cap {
            return Err(EngineError::StepCap { cap, trace });
        }
        let (next, rule) = machine_step(&st, phi, psi, None)?;
        st = next;
        if let Some(rule) = rule {
            trace.push(entry(rule, &st));
        }
    }
    Ok((st, trace))
}

/// Drives the machine over every observer move, breadth first, and collects
/// the composite's responses.
pub fn machine_compose(phi: &Algorithm, psi: &Algorithm, cap: usize) -> Result<Algorithm, EngineError> {
    composite(phi, psi)?;
    let mut responses = BTreeSet::new();
    let mut queue = VecDeque::from([MachineState::initial()]);
    while let Some(st) = queue.pop_front() {
        for m in legal_observer_moves(phi, psi, &st) {
            let (next, _) = machine_run_query(phi, psi, &st, &m, cap)?;
            if next.s2.is_response() {
                responses.insert(next.s2.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(Algorithm::new_unchecked(phi.source.clone(), psi.target.clone(), Strategy::from_set_unchecked(responses)))
}

enum Replay {
    Answer(Move),
    NeedSource(Position),
    Stuck,
}

/// Replays `phi : !S -o S'` along the single thread `q` of `S'`, answering
/// its source questions from `known`.
fn replay_first(phi: &Algorithm, q: &Position, known: &Strategy, cap: usize) -> Result<Replay, EngineError> {
    let mut w = Position::from(vec![Move::request(q[0].clone())]);
    let mut i = 0;
    for _ in 0..cap {
        match phi.answer(&w) {
            Some(Move::Valof(b)) => {
                let Move::Bang(sq) = &*b else { return Ok(Replay::Stuck) };
                let Some(v) = known.answer(sq) else {
                    return Ok(Replay::NeedSource((**sq).clone()));
                };
                w.push(Move::valof((*b).clone()));
                w.push(Move::is(Move::bang(sq.with(v))));
            }
            Some(Move::Output(v)) => {
                if i + 1 == q.len() {
                    return Ok(Replay::Answer((*v).clone()));
                }
                if *v != q[i + 1] {
                    return Err(EngineError::Inconsistent { expected: q[i + 1].clone(), got: (*v).clone() });
                }
                w.push(Move::output((*v).clone()));
                w.push(Move::request(q[i + 2].clone()));
                i += 2;
            }
            _ => return Ok(Replay::Stuck),
        }
    }
    Err(EngineError::StepCap { cap, trace: Vec::new() })
}

/// The composite's next move after the query `at` of `!S -o S''`.
fn kleisli_next(phi: &Algorithm, psi: &Algorithm, at: &Position, cap: usize) -> Result<Option<Move>, EngineError> {
    let known = Strategy::from_set_unchecked(strategy_of_bang_position(&project_source(at)));
    let targets: Vec<&Move> = at.iter().filter(|m| m.is_target_tag()).collect();
    let mut next_target = 0;
    let mut w = Position::empty();
    for _ in 0..cap {
        if !w.is_query() {
            let Some(m) = targets.get(next_target) else { return Ok(None) };
            next_target += 1;
            w.push((*m).clone());
            continue;
        }
        match psi.answer(&w) {
            Some(Move::Output(v)) => {
                let m = Move::output((*v).clone());
                match targets.get(next_target) {
                    None => return Ok(Some(m)),
                    Some(&t) if *t == m => next_target += 1,
                    Some(&t) => return Err(EngineError::Inconsistent { expected: t.clone(), got: m }),
                }
                w.push(m);
            }
            Some(Move::Valof(b)) => {
                let Move::Bang(mid) = &*b else { return Ok(None) };
                match replay_first(phi, mid, &known, cap)? {
                    Replay::Answer(v) => {
                        w.push(Move::valof((*b).clone()));
                        w.push(Move::is(Move::bang(mid.with(v))));
                    }
                    Replay::NeedSource(q) => return Ok(Some(Move::valof(Move::bang(q)))),
                    Replay::Stuck => return Ok(None),
                }
            }
            _ => return Ok(None),
        }
    }
    Err(EngineError::StepCap { cap, trace: Vec::new() })
}

fn bang_arrow_parts(a: &Algorithm) -> Result<&Sds, EngineError> {
    a.source.bang_inner().ok_or_else(|| EngineError::NotAnArrow(format!("{} (source is not a bang)", a.arrow())))
}

/// Composition of sequential algorithms `!S -o S'` and `!S' -o S''`.
///
/// The composite is explored position by position; at each of its queries
/// the second algorithm is replayed, and each of its questions to the middle
/// is answered by replaying the first along that single thread.
pub fn kleisli_compose(phi: &Algorithm, psi: &Algorithm, cap: usize) -> Result<Algorithm, EngineError> {
    bang_arrow_parts(phi)?;
    let mid = bang_arrow_parts(psi)?;
    if *mid != phi.target {
        return Err(EngineError::TypeMismatch { left: phi.arrow().to_string(), right: psi.arrow().to_string() });
    }
    let arrow = Sds::arrow(phi.source.clone(), psi.target.clone());
    let mut responses = BTreeSet::new();
    let mut queue: VecDeque<Position> = VecDeque::from([Position::empty()]);
    let mut steps = 0;
    while let Some(r) = queue.pop_front() {
        let mut cells = arrow.successors(&r);
        cells.sort();
        for c in cells {
            steps += 1;
            if steps > cap {
                return Err(EngineError::StepCap { cap, trace: Vec::new() });
            }
            let q = r.with(c);
            if let Some(m) = kleisli_next(phi, psi, &q, cap)? {
                let next = q.with(m);
                responses.insert(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(Algorithm::new_unchecked(phi.source.clone(), psi.target.clone(), Strategy::from_set_unchecked(responses)))
}
