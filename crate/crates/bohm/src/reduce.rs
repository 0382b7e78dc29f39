use serde::Serialize;
use thiserror::Error;

use crate::term::Term;

/// Default number of head steps before a term is declared divergent.
pub const DEFAULT_FUEL: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("no head normal form within {0} head steps")]
    FuelExhausted(usize),
}

/// `λx₁…xₙ. x M₁ … Mₚ`
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Hnf {
    pub binders: Vec<String>,
    pub head: String,
    pub args: Vec<Term>,
}

impl Hnf {
    pub fn to_term(&self) -> Term {
        Term::lams(&self.binders, Term::apps(Term::var(&self.head), self.args.iter().cloned()))
    }
}

/// The two shapes every term has exactly one of.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Hnf(Hnf),
    /// `λx₁…xₙ. (λx.M) M₁ … Mₚ` with `p >= 1`.
    HeadRedex {
        binders: Vec<String>,
        binder: String,
        body: Term,
        args: Vec<Term>,
    },
}

fn strip_binders(t: &Term) -> (Vec<String>, &Term) {
    let mut binders = Vec::new();
    let mut t = t;
    while let Term::Lam { binder, body } = t {
        binders.push(binder.clone());
        t = body;
    }
    (binders, t)
}

fn spine(t: &Term) -> (&Term, Vec<Term>) {
    let mut args = Vec::new();
    let mut t = t;
    while let Term::App { fun, arg } = t {
        args.push((**arg).clone());
        t = fun;
    }
    args.reverse();
    (t, args)
}

pub fn classify(t: &Term) -> Shape {
    let (binders, body) = strip_binders(t);
    let (head, args) = spine(body);
    match head {
        Term::Var { name } => Shape::Hnf(Hnf { binders, head: name.clone(), args }),
        Term::Lam { binder, body } => {
            Shape::HeadRedex { binders, binder: binder.clone(), body: (**body).clone(), args }
        }
        Term::App { .. } => unreachable!("spine stops at a non-application"),
    }
}

/// Contracts the head redex, if there is one.
pub fn head_step(t: &Term) -> Option<Term> {
    match classify(t) {
        Shape::Hnf(_) => None,
        Shape::HeadRedex { binders, binder, body, args } => {
            let mut rest = args.into_iter();
            let first = rest.next().expect("a head redex has an argument");
            Some(Term::lams(&binders, Term::apps(body.subst(&binder, &first), rest)))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HeadNormal {
    pub hnf: Hnf,
    pub steps: usize,
}

/// Iterates head steps until a head normal form appears.
pub fn head_normalize(t: &Term, fuel: usize) -> Result<HeadNormal, ReduceError> {
    let mut cur = t.clone();
    for steps in 0..=fuel {
        match classify(&cur) {
            Shape::Hnf(hnf) => return Ok(HeadNormal { hnf, steps }),
            Shape::HeadRedex { .. } => cur = head_step(&cur).expect("redex"),
        }
    }
    Err(ReduceError::FuelExhausted(fuel))
}

/// The terms met on the way to head normal form, first and last included.
pub fn head_trace(t: &Term, fuel: usize) -> Result<Vec<Term>, ReduceError> {
    let mut out = vec![t.clone()];
    for _ in 0..fuel {
        match head_step(out.last().unwrap()) {
            Some(next) => out.push(next),
            None => return Ok(out),
        }
    }
    match head_step(out.last().unwrap()) {
        None => Ok(out),
        Some(_) => Err(ReduceError::FuelExhausted(fuel)),
    }
}

/// One leftmost-outermost β-step anywhere in the term.
pub fn normal_step(t: &Term) -> Option<Term> {
    match t {
        Term::Var { .. } => None,
        Term::Lam { binder, body } => normal_step(body).map(|b| Term::lam(binder, b)),
        Term::App { fun, arg } => {
            if let Term::Lam { binder, body } = &**fun {
                return Some(body.subst(binder, arg));
            }
            if let Some(f) = normal_step(fun) {
                return Some(Term::app(f, (**arg).clone()));
            }
            normal_step(arg).map(|a| Term::app((**fun).clone(), a))
        }
    }
}
