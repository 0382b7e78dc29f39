use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::reduce::{head_normalize, Hnf};
use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    M,
    N,
}

impl Side {
    fn other(self) -> Side {
        match self {
            Side::M => Side::N,
            Side::N => Side::M,
        }
    }
}

/// A token move: a head variable (player) or a bunch of abstractions (opponent).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum TokenMove {
    Variable(String),
    Abstraction(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GameMove {
    pub side: Side,
    pub token: TokenMove,
}

impl fmt::Display for GameMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:", self.side)?;
        match &self.token {
            TokenMove::Variable(x) => f.write_str(x),
            TokenMove::Abstraction(xs) => write!(f, "λ{}.", xs.join(" ")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Ending {
    /// The last variable is free in `M[z := N]`: a head normal form is reached.
    FreeHead { head: String },
    /// The last variable asks for an argument its caller does not supply.
    CannotMove { side: Side, variable: String, wanted: usize, supplied: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GameTrace {
    pub moves: Vec<GameMove>,
    pub ending: Ending,
}

impl fmt::Display for GameTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let moves: Vec<String> = self.moves.iter().map(GameMove::to_string).collect();
        f.write_str(&moves.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("{side:?}: head variable {variable} is bound by an outer abstraction; this needs pointers")]
    Unsupported { side: Side, variable: String },
    #[error("{side:?}: {supplied} arguments reach a node with {binders} binders; the surplus needs pointers")]
    Surplus { side: Side, supplied: usize, binders: usize },
    #[error("{side:?}: a node has no head normal form within the fuel")]
    Divergent { side: Side },
    #[error("no verdict after {0} moves")]
    FuelExhausted(usize),
}

struct Visit {
    side: Side,
    node: Hnf,
    /// Binders of the enclosing nodes of the same tree.
    outer: Vec<String>,
    /// Arguments supplied by the node of the other tree that led here.
    caller: Vec<Term>,
    caller_outer: Vec<String>,
}

fn hnf(side: Side, t: &Term, fuel: usize) -> Result<Hnf, GameError> {
    head_normalize(t, fuel).map(|n| n.hnf).map_err(|_| GameError::Divergent { side })
}

/// Moves two tokens through `m` and `n`, computing the head of `m[z := n]`
/// without substituting. Only heads bound by the nearest abstraction bunch or
/// free are supported, and a node may not receive more arguments than it has
/// binders.
pub fn token_game_trace(m: &Term, z: &str, n: &Term, fuel: usize) -> Result<GameTrace, GameError> {
    let mut moves = Vec::new();
    let mut visit = Visit {
        side: Side::M,
        node: hnf(Side::M, m, fuel)?,
        outer: Vec::new(),
        caller: Vec::new(),
        caller_outer: Vec::new(),
    };
    let mut first = true;
    for _ in 0..fuel {
        if visit.caller.len() > visit.node.binders.len() {
            let (supplied, binders) = (visit.caller.len(), visit.node.binders.len());
            return Err(GameError::Surplus { side: visit.side, supplied, binders });
        }
        if !first {
            moves.push(GameMove { side: visit.side, token: TokenMove::Abstraction(visit.node.binders.clone()) });
        }
        first = false;
        let head = visit.node.head.clone();
        moves.push(GameMove { side: visit.side, token: TokenMove::Variable(head.clone()) });
        let mut inner = visit.outer.clone();
        inner.extend(visit.node.binders.iter().cloned());
        let next = if let Some(i) = visit.node.binders.iter().rposition(|b| *b == head) {
            let Some(arg) = visit.caller.get(i) else {
                let ending = Ending::CannotMove {
                    side: visit.side,
                    variable: head,
                    wanted: i + 1,
                    supplied: visit.caller.len(),
                };
                return Ok(GameTrace { moves, ending });
            };
            let side = visit.side.other();
            Visit {
                side,
                node: hnf(side, arg, fuel)?,
                outer: visit.caller_outer.clone(),
                caller: visit.node.args.clone(),
                caller_outer: inner,
            }
        } else if visit.outer.contains(&head) {
            return Err(GameError::Unsupported { side: visit.side, variable: head });
        } else if visit.side == Side::M && head == z {
            Visit {
                side: Side::N,
                node: hnf(Side::N, n, fuel)?,
                outer: Vec::new(),
                caller: visit.node.args.clone(),
                caller_outer: inner,
            }
        } else {
            return Ok(GameTrace { moves, ending: Ending::FreeHead { head } });
        };
        visit = next;
    }
    Err(GameError::FuelExhausted(fuel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    #[test]
    fn outer_binders_are_rejected() {
        // the argument λb. f heads on f, bound one bunch further out
        let n = parse_term("λf. f (λb. f)").unwrap();
        let m = parse_term("z (λa. a x)").unwrap();
        assert!(matches!(token_game_trace(&m, "z", &n, 100), Err(GameError::Unsupported { .. })));
    }
}
