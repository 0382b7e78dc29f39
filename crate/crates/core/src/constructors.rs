//! Compound structures.
//!
//! Products are juxtapositions: a position of `A * B` lives entirely in one
//! factor. Interleaving the factors would make the source projections of
//! the two-argument disjunction transcripts positions, and they are not.
//!
//! Polarized structures (duals, the shift `↓`, and the par used by the
//! Laurent decomposition) are not sds's and live in [`Polarized`], which
//! sds operations do not accept.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::behaviour::Strategy;
use crate::moves::{Kind, Move};
use crate::position::Position;
use crate::sds::{strategy_of_bang_position, validate_sds, Forest, Game, Sds, SdsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("{0} is neither ε nor a response of the bang")]
    NotABangResponse(Position),
    #[error("polarity shift applied to a polarized structure ({0})")]
    AlreadyPolarized(String),
    #[error(transparent)]
    Sds(#[from] SdsError),
}

pub fn product(parts: Vec<Sds>) -> Sds {
    Sds::product(parts)
}

pub fn affine_arrow(source: Sds, target: Sds) -> Sds {
    Sds::arrow(source, target)
}

pub fn bang(s: Sds) -> Sds {
    Sds::bang(s)
}

/// The strategy accumulated by a response (or ε) of a bang.
pub fn strategy_of_response(rho: &Position) -> Result<Strategy, ConstructError> {
    let ok = rho.is_empty() || (rho.iter().all(|m| matches!(m, Move::Bang(_))) && rho.is_response());
    if !ok {
        return Err(ConstructError::NotABangResponse(rho.clone()));
    }
    Ok(Strategy::from_set_unchecked(strategy_of_bang_position(rho)))
}

/// Adds a fresh value `err` under every cell. `err` ends its branch.
pub fn with_error(s: &Sds, budget: usize) -> Result<Sds, SdsError> {
    let positions = s.positions(budget)?;
    let err = Move::value("err");
    for p in &positions {
        if let Some(m) = p.iter().find(|m| m.to_string() == "err") {
            return Err(SdsError::LabelNotFresh(m.to_string()));
        }
    }
    let mut words = positions.clone();
    words.extend(positions.iter().filter(|p| p.is_query()).map(|q| q.with(err.clone())));
    let name = format!("err({s})");
    Ok(Sds::base(validate_sds(&name, &words)?))
}

/// A structure whose positions alternate but which is not an sds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polarized {
    forest: Forest,
}

impl Polarized {
    pub fn forest(&self) -> &Forest {
        &self.forest
    }
}

impl Game for Polarized {
    fn successors(&self, p: &[Move]) -> Vec<Move> {
        self.forest.successors(p)
    }
}

/// Either an sds or a polarized structure.
#[derive(Clone, Debug)]
pub enum Structure {
    Sds(Sds),
    Polarized(Polarized),
}

/// Prefixes a fresh opponent move `*` to every position of the dual of `s`.
pub fn shift_down(s: &Structure, budget: usize) -> Result<Polarized, ConstructError> {
    let s = match s {
        Structure::Sds(s) => s,
        Structure::Polarized(p) => return Err(ConstructError::AlreadyPolarized(p.forest.name().to_string())),
    };
    let mut words = vec![Position::from(vec![Move::Star])];
    for p in s.positions(budget)? {
        let mut w = Position::from(vec![Move::Star]);
        for m in p.iter() {
            w.push(Move::dual(m.clone()));
        }
        words.push(w);
    }
    let forest = validate_sds(&format!("shift({s})"), &words)?;
    Ok(Polarized { forest })
}

/// `(↓S)^⊥ ⅋ S'`, explored lazily: component 1 is the shifted source,
/// component 2 the target. The opening move pairs `*` with a target cell;
/// afterwards the player may move in either component and the opponent
/// answers in the component the player just used.
struct Par<'a> {
    left: &'a Polarized,
    right: &'a Sds,
}

impl Par<'_> {
    fn split(p: &[Move]) -> (Position, Position) {
        let Some(Move::Pair(a, b)) = p.first() else {
            return (Position::empty(), Position::empty());
        };
        let mut l = Position::from(vec![(**a).clone()]);
        let mut r = Position::from(vec![(**b).clone()]);
        for m in &p[1..] {
            match m {
                Move::Comp(1, m) => l.push((**m).clone()),
                Move::Comp(2, m) => r.push((**m).clone()),
                _ => {}
            }
        }
        (l, r)
    }
}

impl Game for Par<'_> {
    fn successors(&self, p: &[Move]) -> Vec<Move> {
        if p.is_empty() {
            let stars: Vec<Move> = self.left.successors(&[]);
            let mut out = Vec::new();
            for a in &stars {
                for b in self.right.successors(&[]) {
                    out.push(Move::pair(a.clone(), b));
                }
            }
            return out;
        }
        let (l, r) = Par::split(p);
        let tag = |i: u8| move |m: Move| Move::comp(i, m);
        match p.last() {
            Some(last) if last.kind() == Kind::Cell => {
                let mut out: Vec<Move> =
                    self.left.successors(&l).into_iter().filter(Move::is_value).map(tag(1)).collect();
                out.extend(self.right.successors(&r).into_iter().filter(Move::is_value).map(tag(2)));
                out
            }
            Some(Move::Comp(1, _)) => self.left.successors(&l).into_iter().filter(Move::is_cell).map(tag(1)).collect(),
            Some(Move::Comp(2, _)) => self.right.successors(&r).into_iter().filter(Move::is_cell).map(tag(2)).collect(),
            _ => Vec::new(),
        }
    }
}

/// Move-level translation between the Laurent form and the affine arrow.
#[derive(Clone, Copy, Debug, Default)]
pub struct LaurentTranslation;

impl LaurentTranslation {
    pub fn to_arrow_move(&self, m: &Move) -> Option<Move> {
        Some(match m {
            Move::Pair(_, c) => Move::request((**c).clone()),
            Move::Comp(1, d) => match &**d {
                Move::Dual(inner) if inner.is_cell() => Move::valof((**inner).clone()),
                Move::Dual(inner) => Move::is((**inner).clone()),
                _ => return None,
            },
            Move::Comp(2, inner) if inner.is_value() => Move::output((**inner).clone()),
            Move::Comp(2, inner) => Move::request((**inner).clone()),
            _ => return None,
        })
    }

    pub fn to_arrow(&self, p: &Position) -> Option<Position> {
        p.iter().map(|m| self.to_arrow_move(m)).collect::<Option<Vec<_>>>().map(Position::from)
    }

    pub fn from_arrow(&self, p: &Position) -> Option<Position> {
        let mut out = Position::empty();
        for (i, m) in p.iter().enumerate() {
            let t = match m {
                Move::Request(c) if i == 0 => Move::pair(Move::Star, (**c).clone()),
                Move::Request(c) => Move::comp(2, (**c).clone()),
                Move::Output(v) => Move::comp(2, (**v).clone()),
                Move::Valof(c) => Move::comp(1, Move::dual((**c).clone())),
                Move::Is(v) => Move::comp(1, Move::dual((**v).clone())),
                _ => return None,
            };
            out.push(t);
        }
        Some(out)
    }
}

/// Builds `(↓S)^⊥ ⅋ S'` together with its translation onto `S -o S'`.
pub fn laurent_arrow(
    source: &Sds,
    target: &Sds,
    budget: usize,
) -> Result<(Polarized, LaurentTranslation), ConstructError> {
    let left = shift_down(&Structure::Sds(source.clone()), budget)?;
    let par = Par { left: &left, right: target };
    let forest = Forest::materialize(&format!("shift({source})^ par {target}"), &par, budget)?;
    Ok((Polarized { forest }, LaurentTranslation))
}

/// Every response of the bang of `s` whose accumulated strategy lies in `x`.
///
/// This is the canonical embedding of a point of `s` into `!s`; it works
/// from `x` alone, so it never builds the bang.
pub fn promote_point(x: &Strategy) -> Strategy {
    let mut out = BTreeSet::new();
    let mut stack: Vec<(Position, BTreeSet<Position>)> = vec![(Position::empty(), BTreeSet::new())];
    while let Some((rho, acc)) = stack.pop() {
        for r in x.iter() {
            if acc.contains(r) {
                continue;
            }
            let q = r.parent();
            let base = q.parent();
            if !(base.is_empty() || acc.contains(&base)) {
                continue;
            }
            let next = rho.with(Move::bang(q)).with(Move::bang(r.clone()));
            let mut acc2 = acc.clone();
            acc2.insert(r.clone());
            out.insert(next.clone());
            stack.push((next, acc2));
        }
    }
    let mut closed = BTreeSet::new();
    for p in out {
        closed.extend(p.response_prefixes());
    }
    Strategy::from_set_unchecked(closed)
}
