//! Head reduction, lazy Böhm trees and the two-token interaction game.

pub mod corpus;
pub mod game;
pub mod reduce;
pub mod term;
pub mod tree;

pub use game::{token_game_trace, Ending, GameError, GameMove, GameTrace, Side, TokenMove};
pub use reduce::{classify, head_normalize, head_step, Hnf, ReduceError, Shape, DEFAULT_FUEL};
pub use term::{parse_term, Term, TermParseError};
pub use tree::{bohm_expand, BohmNode, ExpandError, Explorer};

/// A worked pair for the token game: `EXAMPLE_N` goes in place of `z` in
/// `EXAMPLE_M`. The head normal form of the result is `t n1 m6`.
pub const EXAMPLE_M: &str = "z m1 m2 (λz1 z2. z1 (λu. t u m6) m4)";
pub const EXAMPLE_N: &str = "λx1 x2 x3. x3 (λy1 y2. y1 n1) n2";
