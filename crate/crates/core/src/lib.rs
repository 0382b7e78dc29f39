//! Sequential data structures, sequential algorithms and their composition.

pub mod behaviour;
pub mod catalog;
pub mod constructors;
pub mod engine;
pub mod equality;
pub mod moves;
pub mod position;
pub mod sds;
pub mod symmetric;
pub mod syntax;
pub mod table;

pub use behaviour::{CounterStrategy, PlayResult, Strategy, Winner};
pub use moves::{Kind, Move};
pub use position::{Class, Position};
pub use sds::{Game, Sds, SdsError, DEFAULT_BUDGET};
