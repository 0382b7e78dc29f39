//! Words of moves.

use std::fmt;
use std::ops::Deref;

use crate::moves::{Kind, Move};

/// A finite word of moves. The empty word is a valid value and prints as `ε`.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position(Vec<Move>);

/// Query or response.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Query,
    Response,
}

impl Position {
    pub fn empty() -> Position {
        Position(Vec::new())
    }

    pub fn moves(&self) -> &[Move] {
        &self.0
    }

    pub fn into_moves(self) -> Vec<Move> {
        self.0
    }

    pub fn push(&mut self, m: Move) {
        self.0.push(m);
    }

    pub fn pop(&mut self) -> Option<Move> {
        self.0.pop()
    }

    /// A copy extended by one move.
    pub fn with(&self, m: Move) -> Position {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(m);
        Position(v)
    }

    pub fn prefix(&self, len: usize) -> Position {
        Position(self.0[..len].to_vec())
    }

    /// The word without its last move (ε stays ε).
    pub fn parent(&self) -> Position {
        self.prefix(self.0.len().saturating_sub(1))
    }

    /// Query/response classification by last move. `None` for ε.
    pub fn class(&self) -> Option<Class> {
        self.0.last().map(|m| match m.kind() {
            Kind::Cell => Class::Query,
            Kind::Value => Class::Response,
        })
    }

    pub fn is_query(&self) -> bool {
        self.class() == Some(Class::Query)
    }

    pub fn is_response(&self) -> bool {
        self.class() == Some(Class::Response)
    }

    /// True when the moves alternate cell/value starting with a cell.
    pub fn is_alternating(&self) -> bool {
        self.0.iter().enumerate().all(|(i, m)| {
            let want = if i % 2 == 0 { Kind::Cell } else { Kind::Value };
            m.kind() == want
        })
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Non-empty prefixes ending in a value, shortest first (including self).
    pub fn response_prefixes(&self) -> impl Iterator<Item = Position> + '_ {
        (1..=self.0.len()).filter(|&n| self.0[n - 1].is_value()).map(|n| self.prefix(n))
    }

    /// Non-empty prefixes ending in a cell, shortest first (including self).
    pub fn query_prefixes(&self) -> impl Iterator<Item = Position> + '_ {
        (1..=self.0.len()).filter(|&n| self.0[n - 1].is_cell()).map(|n| self.prefix(n))
    }
}

/// Greatest lower bound in the prefix order: the longest common prefix.
pub fn glb(a: &Position, b: &Position) -> Position {
    let n = a.0.iter().zip(&b.0).take_while(|(x, y)| x == y).count();
    a.prefix(n)
}

/// Keeps the moves selected by `keep`, in order.
pub fn restrict(w: &[Move], keep: impl Fn(&Move) -> bool) -> Position {
    Position(w.iter().filter(|m| keep(m)).cloned().collect())
}

/// The source projection of an arrow word, with tags removed.
pub fn project_source(w: &[Move]) -> Position {
    Position(w.iter().filter(|m| m.is_source_tag()).filter_map(|m| m.untag().cloned()).collect())
}

/// The target projection of an arrow word, with tags removed.
pub fn project_target(w: &[Move]) -> Position {
    Position(w.iter().filter(|m| m.is_target_tag()).filter_map(|m| m.untag().cloned()).collect())
}

impl Deref for Position {
    type Target = [Move];

    fn deref(&self) -> &[Move] {
        &self.0
    }
}

impl From<Vec<Move>> for Position {
    fn from(v: Vec<Move>) -> Position {
        Position(v)
    }
}

impl FromIterator<Move> for Position {
    fn from_iter<I: IntoIterator<Item = Move>>(iter: I) -> Position {
        Position(iter.into_iter().collect())
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl serde::Serialize for Position {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
