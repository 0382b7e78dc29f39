//! Deciding equality of algorithms between finite structures.

use serde::Serialize;

use crate::behaviour::{enumerate_strategies, Strategy};
use crate::constructors::promote_point;
use crate::engine::{apply, Algorithm, EngineError};

/// An input on which two algorithms give different outputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub input: Strategy,
    pub left: Strategy,
    pub right: Strategy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Comparison {
    /// Equal as elements of the model, i.e. as strategies.
    pub equal: bool,
    /// Number of input points tried.
    pub points: usize,
    /// First point where the functions differ, if any.
    pub disagreement: Option<Disagreement>,
}

impl Comparison {
    /// Same function on every point, whether or not the strategies agree.
    pub fn same_function(&self) -> bool {
        self.disagreement.is_none()
    }
}

/// Compares two algorithms of the same type, both as strategies and
/// pointwise. Sources of the form `!S` are fed the promoted points of `S`.
pub fn compare(left: &Algorithm, right: &Algorithm, budget: usize) -> Result<Comparison, EngineError> {
    if left.arrow() != right.arrow() {
        return Err(EngineError::TypeMismatch { left: left.arrow().to_string(), right: right.arrow().to_string() });
    }
    let inputs: Vec<Strategy> = match left.source().bang_inner() {
        Some(inner) => enumerate_strategies(inner, budget)?.iter().map(promote_point).collect(),
        None => enumerate_strategies(left.source(), budget)?,
    };
    let mut disagreement = None;
    for x in &inputs {
        let (l, r) = (apply(left, x), apply(right, x));
        if l != r {
            disagreement = Some(Disagreement { input: x.clone(), left: l, right: r });
            break;
        }
    }
    Ok(Comparison { equal: left.strategy() == right.strategy(), points: inputs.len(), disagreement })
}
