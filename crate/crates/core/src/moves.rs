//! Moves of sequential data structures.
//!
//! A move is either a cell (an opponent move) or a value (a player move).
//! Compound structures build their moves out of the moves of their
//! components, so a move label carries its full provenance: `?.1` is the
//! cell `?` of the first factor of a product, `valof <?.1>` is a source
//! query of an arrow whose source is a bang, and so on.

use std::fmt;
use std::sync::Arc;

use crate::position::Position;

/// Which half of an event a move is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Cell,
    Value,
}

impl Kind {
    pub fn flip(self) -> Kind {
        match self {
            Kind::Cell => Kind::Value,
            Kind::Value => Kind::Cell,
        }
    }
}

/// A move label with its provenance.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    /// A base cell such as `?`.
    Cell(Arc<str>),
    /// A base value such as `tt`.
    Value(Arc<str>),
    /// Component `i` (1-based) of a product.
    Comp(u8, Arc<Move>),
    /// Arrow cell: the observer asks a target cell.
    Request(Arc<Move>),
    /// Arrow value: the algorithm asks a source cell.
    Valof(Arc<Move>),
    /// Arrow cell: the source answers with a value.
    Is(Arc<Move>),
    /// Arrow value: the algorithm answers a target cell.
    Output(Arc<Move>),
    /// A move of a bang: a query (cell) or a response (value) of the
    /// underlying structure.
    Bang(Arc<Position>),
    /// The fresh initial opponent move of a polarity shift.
    Star,
    /// A move of a dual structure; its kind is flipped.
    Dual(Arc<Move>),
    /// The paired initial move of a par.
    Pair(Arc<Move>, Arc<Move>),
}

impl Move {
    pub fn cell(name: &str) -> Move {
        Move::Cell(name.into())
    }

    pub fn value(name: &str) -> Move {
        Move::Value(name.into())
    }

    pub fn comp(i: u8, m: Move) -> Move {
        Move::Comp(i, Arc::new(m))
    }

    pub fn request(m: Move) -> Move {
        Move::Request(Arc::new(m))
    }

    pub fn valof(m: Move) -> Move {
        Move::Valof(Arc::new(m))
    }

    pub fn is(m: Move) -> Move {
        Move::Is(Arc::new(m))
    }

    pub fn output(m: Move) -> Move {
        Move::Output(Arc::new(m))
    }

    pub fn bang(p: Position) -> Move {
        Move::Bang(Arc::new(p))
    }

    pub fn dual(m: Move) -> Move {
        Move::Dual(Arc::new(m))
    }

    pub fn pair(a: Move, b: Move) -> Move {
        Move::Pair(Arc::new(a), Arc::new(b))
    }

    pub fn kind(&self) -> Kind {
        match self {
            Move::Cell(_) | Move::Request(_) | Move::Is(_) | Move::Star | Move::Pair(..) => Kind::Cell,
            Move::Value(_) | Move::Valof(_) | Move::Output(_) => Kind::Value,
            Move::Comp(_, m) => m.kind(),
            Move::Dual(m) => m.kind().flip(),
            // a bang move is a cell iff it is a query of the underlying sds
            Move::Bang(p) => p.last().map(Move::kind).unwrap_or(Kind::Cell),
        }
    }

    pub fn is_cell(&self) -> bool {
        self.kind() == Kind::Cell
    }

    pub fn is_value(&self) -> bool {
        self.kind() == Kind::Value
    }

    /// The move beneath an arrow tag, if any.
    pub fn untag(&self) -> Option<&Move> {
        match self {
            Move::Request(m) | Move::Valof(m) | Move::Is(m) | Move::Output(m) => Some(m),
            _ => None,
        }
    }

    /// True for moves that project onto the source of an arrow.
    pub fn is_source_tag(&self) -> bool {
        matches!(self, Move::Valof(_) | Move::Is(_))
    }

    /// True for moves that project onto the target of an arrow.
    pub fn is_target_tag(&self) -> bool {
        matches!(self, Move::Request(_) | Move::Output(_))
    }

    /// Base atom name, for `Cell` and `Value`.
    pub fn atom(&self) -> Option<&str> {
        match self {
            Move::Cell(n) | Move::Value(n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Cell(n) | Move::Value(n) => f.write_str(n),
            Move::Comp(i, m) => match &**m {
                Move::Cell(_) | Move::Value(_) | Move::Comp(..) | Move::Bang(_) | Move::Star => {
                    write!(f, "{m}.{i}")
                }
                _ => write!(f, "({m}).{i}"),
            },
            Move::Request(m) => write!(f, "req {m}"),
            Move::Valof(m) => write!(f, "valof {m}"),
            Move::Is(m) => write!(f, "is {m}"),
            Move::Output(m) => write!(f, "out {m}"),
            Move::Bang(p) => {
                f.write_str("<")?;
                for (i, m) in p.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{m}")?;
                }
                f.write_str(">")
            }
            Move::Star => f.write_str("*"),
            Move::Dual(m) => write!(f, "~{m}"),
            Move::Pair(a, b) => write!(f, "({a} | {b})"),
        }
    }
}

impl fmt::Debug for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl serde::Serialize for Move {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
