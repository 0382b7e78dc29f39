//! Sequential data structures.
//!
//! An sds is a prefix-closed set of alternating cell/value words that start
//! with a cell. Base structures are stored eagerly as labelled forests
//! ([`Forest`]); compound ones ([`Sds::Product`], [`Sds::Arrow`],
//! [`Sds::Bang`]) compute their positions on demand from their components,
//! which keeps nested bangs tractable when only a few branches are visited.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::moves::{Kind, Move};
use crate::position::{project_source, project_target, Class, Position};

/// Default cap on the number of positions or objects an enumeration may visit.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// Anything whose positions can be explored move by move.
pub trait Game {
    /// Moves `m` such that `p·m` is a position. `p` may be ε.
    fn successors(&self, p: &[Move]) -> Vec<Move>;

    /// Non-empty words reachable through [`Game::successors`].
    fn is_position(&self, p: &[Move]) -> bool {
        if p.is_empty() {
            return false;
        }
        (0..p.len()).all(|i| self.successors(&p[..i]).contains(&p[i]))
    }

    fn classify(&self, p: &[Move]) -> Result<Class, SdsError> {
        if !self.is_position(p) {
            return Err(SdsError::NotAPosition(Position::from(p.to_vec())));
        }
        Ok(Position::from(p.to_vec()).class().expect("non-empty"))
    }

    /// Every position, in depth-first lexicographic order.
    fn positions(&self, budget: usize) -> Result<Vec<Position>, SdsError> {
        let mut out = Vec::new();
        let mut stack = vec![Position::empty()];
        while let Some(p) = stack.pop() {
            let mut next = self.successors(&p);
            next.sort();
            for m in next.into_iter().rev() {
                stack.push(p.with(m));
            }
            if !p.is_empty() {
                out.push(p);
                if out.len() > budget {
                    return Err(SdsError::Budget(budget));
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SdsError {
    #[error("word {0} is empty")]
    EmptyWord(Position),
    #[error("word {0} does not start with a cell")]
    StartsWithValue(Position),
    #[error("word {0} does not alternate cells and values")]
    NotAlternating(Position),
    #[error("word {word} is present but its prefix {prefix} is not")]
    MissingPrefix { word: Position, prefix: Position },
    #[error("label `{0}` is used both as a cell and as a value")]
    KindClash(String),
    #[error("{0} is not a position")]
    NotAPosition(Position),
    #[error("label `{0}` already occurs in the structure")]
    LabelNotFresh(String),
    #[error("enumeration budget of {0} exceeded")]
    Budget(usize),
}

/// A finite labelled forest; the canonical form of a base sds.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Forest {
    name: String,
    roots: Node,
}

#[derive(Clone, Default, PartialEq, Eq)]
struct Node {
    children: BTreeMap<Move, Node>,
}

impl Forest {
    pub fn name(&self) -> &str {
        &self.name
    }

    fn node(&self, p: &[Move]) -> Option<&Node> {
        let mut n = &self.roots;
        for m in p {
            n = n.children.get(m)?;
        }
        Some(n)
    }

    fn insert(&mut self, p: &[Move]) {
        let mut n = &mut self.roots;
        for m in p {
            n = n.children.entry(m.clone()).or_default();
        }
    }

    /// Builds the forest of any finite game.
    pub fn materialize(name: &str, game: &dyn Game, budget: usize) -> Result<Forest, SdsError> {
        let mut f = Forest { name: name.to_string(), roots: Node::default() };
        for p in game.positions(budget)? {
            f.insert(&p);
        }
        Ok(f)
    }

    /// All labels used, split by kind.
    pub fn labels(&self) -> (BTreeSet<Move>, BTreeSet<Move>) {
        let mut cells = BTreeSet::new();
        let mut values = BTreeSet::new();
        let mut stack = vec![&self.roots];
        while let Some(n) = stack.pop() {
            for (m, c) in &n.children {
                match m.kind() {
                    Kind::Cell => cells.insert(m.clone()),
                    Kind::Value => values.insert(m.clone()),
                };
                stack.push(c);
            }
        }
        (cells, values)
    }

    pub fn renamed(mut self, name: &str) -> Forest {
        self.name = name.to_string();
        self
    }
}

impl Game for Forest {
    fn successors(&self, p: &[Move]) -> Vec<Move> {
        self.node(p).map(|n| n.children.keys().cloned().collect()).unwrap_or_default()
    }
}

impl fmt::Debug for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Forest({})", self.name)
    }
}

/// Checks a raw set of words against the sds axioms and builds the forest.
///
/// Reports the first offending word (in sorted order) and the violated rule.
pub fn validate_sds(name: &str, words: &[Position]) -> Result<Forest, SdsError> {
    let set: BTreeSet<&Position> = words.iter().collect();
    let mut kinds: BTreeMap<String, Kind> = BTreeMap::new();
    for w in &set {
        if w.is_empty() {
            return Err(SdsError::EmptyWord((*w).clone()));
        }
        if w[0].kind() != Kind::Cell {
            return Err(SdsError::StartsWithValue((*w).clone()));
        }
        if !w.is_alternating() {
            return Err(SdsError::NotAlternating((*w).clone()));
        }
        for m in w.iter() {
            let label = m.to_string();
            match kinds.get(&label) {
                Some(k) if *k != m.kind() => return Err(SdsError::KindClash(label)),
                _ => {
                    kinds.insert(label, m.kind());
                }
            }
        }
    }
    for w in &set {
        for n in 1..w.len() {
            let prefix = w.prefix(n);
            if !set.contains(&prefix) {
                return Err(SdsError::MissingPrefix { word: (*w).clone(), prefix });
            }
        }
    }
    let mut f = Forest { name: name.to_string(), roots: Node::default() };
    for w in set {
        f.insert(w);
    }
    Ok(f)
}

/// An sds, possibly built from others.
#[derive(Clone, PartialEq, Eq)]
pub enum Sds {
    Base(Arc<Forest>),
    /// Juxtaposition: positions of factor `i` tagged `.i`, never interleaved.
    Product(Vec<Sds>),
    /// The affine arrow `source -o target`.
    Arrow(Box<Sds>, Box<Sds>),
    /// The exponential `!S`.
    Bang(Box<Sds>),
}

impl Sds {
    pub fn base(forest: Forest) -> Sds {
        Sds::Base(Arc::new(forest))
    }

    pub fn product(parts: Vec<Sds>) -> Sds {
        Sds::Product(parts)
    }

    pub fn arrow(source: Sds, target: Sds) -> Sds {
        Sds::Arrow(Box::new(source), Box::new(target))
    }

    pub fn bang(s: Sds) -> Sds {
        Sds::Bang(Box::new(s))
    }

    pub fn arrow_parts(&self) -> Option<(&Sds, &Sds)> {
        match self {
            Sds::Arrow(s, t) => Some((s, t)),
            _ => None,
        }
    }

    pub fn bang_inner(&self) -> Option<&Sds> {
        match self {
            Sds::Bang(s) => Some(s),
            _ => None,
        }
    }

    /// A base sds with the same positions.
    pub fn materialize(&self, budget: usize) -> Result<Forest, SdsError> {
        Forest::materialize(&self.to_string(), self, budget)
    }
}

/// The strategy accumulated along a position of a bang: the set of
/// underlying responses carried by its value moves.
pub fn strategy_of_bang_position(rho: &[Move]) -> BTreeSet<Position> {
    rho.iter()
        .filter_map(|m| match m {
            Move::Bang(p) if p.is_response() => Some((**p).clone()),
            _ => None,
        })
        .collect()
}

/// Queries `r·c` with `r` in `x ∪ {ε}` that `x` leaves unanswered.
pub(crate) fn accessible_queries(game: &dyn Game, x: &BTreeSet<Position>) -> Vec<Position> {
    let answered: BTreeSet<Position> = x.iter().map(Position::parent).collect();
    let mut out = Vec::new();
    let empty = Position::empty();
    for r in std::iter::once(&empty).chain(x.iter()) {
        for c in game.successors(r) {
            if c.is_cell() {
                let q = r.with(c);
                if !answered.contains(&q) {
                    out.push(q);
                }
            }
        }
    }
    out
}

impl Game for Sds {
    fn successors(&self, p: &[Move]) -> Vec<Move> {
        match self {
            Sds::Base(f) => f.successors(p),
            Sds::Product(parts) => {
                if p.is_empty() {
                    let mut out = Vec::new();
                    for (i, part) in parts.iter().enumerate() {
                        let tag = (i + 1) as u8;
                        out.extend(part.successors(&[]).into_iter().map(|m| Move::comp(tag, m)));
                    }
                    return out;
                }
                let Move::Comp(tag, _) = &p[0] else { return Vec::new() };
                let Some(part) = parts.get(*tag as usize - 1) else { return Vec::new() };
                let mut inner = Vec::with_capacity(p.len());
                for m in p {
                    match m {
                        Move::Comp(t, m) if t == tag => inner.push((**m).clone()),
                        _ => return Vec::new(),
                    }
                }
                part.successors(&inner).into_iter().map(|m| Move::comp(*tag, m)).collect()
            }
            Sds::Arrow(source, target) => arrow_successors(source, target, p),
            Sds::Bang(inner) => {
                if p.iter().any(|m| !matches!(m, Move::Bang(_))) {
                    return Vec::new();
                }
                let strategy = strategy_of_bang_position(p);
                match p.last() {
                    Some(Move::Bang(q)) if q.is_query() => inner
                        .successors(q)
                        .into_iter()
                        .filter(Move::is_value)
                        .map(|v| q.with(v))
                        .filter(|r| !strategy.contains(r))
                        .map(Move::bang)
                        .collect(),
                    _ => accessible_queries(&**inner, &strategy).into_iter().map(Move::bang).collect(),
                }
            }
        }
    }
}

fn arrow_successors(source: &Sds, target: &Sds, p: &[Move]) -> Vec<Move> {
    let Some(last) = p.last() else {
        return target.successors(&[]).into_iter().filter(Move::is_cell).map(Move::request).collect();
    };
    let sp = project_source(p);
    let tp = project_target(p);
    match last {
        Move::Request(_) | Move::Is(_) => {
            let mut out: Vec<Move> =
                target.successors(&tp).into_iter().filter(Move::is_value).map(Move::output).collect();
            out.extend(source.successors(&sp).into_iter().filter(Move::is_cell).map(Move::valof));
            out
        }
        Move::Valof(_) => source.successors(&sp).into_iter().filter(Move::is_value).map(Move::is).collect(),
        Move::Output(_) => target.successors(&tp).into_iter().filter(Move::is_cell).map(Move::request).collect(),
        _ => Vec::new(),
    }
}

impl fmt::Display for Sds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn atomic(s: &Sds) -> bool {
            matches!(s, Sds::Base(_) | Sds::Bang(_))
        }
        match self {
            Sds::Base(b) => f.write_str(&b.name),
            Sds::Product(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" * ")?;
                    }
                    if atomic(p) {
                        write!(f, "{p}")?;
                    } else {
                        write!(f, "({p})")?;
                    }
                }
                Ok(())
            }
            Sds::Arrow(s, t) => {
                if matches!(**s, Sds::Arrow(..)) {
                    write!(f, "({s}) -o {t}")
                } else {
                    write!(f, "{s} -o {t}")
                }
            }
            Sds::Bang(s) => {
                if atomic(s) {
                    write!(f, "!{s}")
                } else {
                    write!(f, "!({s})")
                }
            }
        }
    }
}

impl fmt::Debug for Sds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sds({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(cells: &[&str], text: &[&str]) -> Vec<Position> {
        text.iter()
            .map(|w| {
                w.split_whitespace().map(|t| if cells.contains(&t) { Move::cell(t) } else { Move::value(t) }).collect()
            })
            .collect()
    }

    #[test]
    fn bool_validates() {
        let f = validate_sds("Bool", &words(&["?"], &["?", "? tt", "? ff"])).unwrap();
        assert_eq!(f.positions(100).unwrap().len(), 3);
    }

    #[test]
    fn rejects_value_start() {
        let err = validate_sds("X", &words(&["?"], &["tt"])).unwrap_err();
        assert!(matches!(err, SdsError::StartsWithValue(_)));
    }

    #[test]
    fn rejects_missing_prefix() {
        let err = validate_sds("X", &words(&["?"], &["? tt"])).unwrap_err();
        assert!(matches!(err, SdsError::MissingPrefix { .. }));
    }

    #[test]
    fn rejects_kind_clash() {
        let ws = vec![Position::from(vec![Move::cell("a")]), Position::from(vec![Move::cell("a"), Move::value("a")])];
        assert_eq!(validate_sds("X", &ws).unwrap_err(), SdsError::KindClash("a".into()));
    }

    #[test]
    fn classify_rejects_non_positions() {
        let f = validate_sds("Bool", &words(&["?"], &["?", "? tt", "? ff"])).unwrap();
        assert_eq!(f.classify(&[Move::cell("?")]).unwrap(), Class::Query);
        assert_eq!(f.classify(&[Move::cell("?"), Move::value("tt")]).unwrap(), Class::Response);
        assert!(f.classify(&[Move::value("tt")]).is_err());
    }
}
