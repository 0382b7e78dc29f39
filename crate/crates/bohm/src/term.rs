use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// An untyped λ-term with named variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Term {
    Var { name: String },
    App { fun: Box<Term>, arg: Box<Term> },
    Lam { binder: String, body: Box<Term> },
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var { name: name.to_string() }
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App { fun: Box::new(fun), arg: Box::new(arg) }
    }

    pub fn lam(binder: &str, body: Term) -> Term {
        Term::Lam { binder: binder.to_string(), body: Box::new(body) }
    }

    /// `λx₁…xₙ.body`
    pub fn lams(binders: &[String], body: Term) -> Term {
        binders.iter().rev().fold(body, |b, x| Term::lam(x, b))
    }

    /// `head a₁ … aₚ`
    pub fn apps(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var { .. } => 1,
            Term::App { fun, arg } => 1 + fun.size() + arg.size(),
            Term::Lam { body, .. } => 1 + body.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Term::Var { name } => {
                if !bound.contains(name) {
                    out.insert(name.clone());
                }
            }
            Term::App { fun, arg } => {
                fun.collect_free(bound, out);
                arg.collect_free(bound, out);
            }
            Term::Lam { binder, body } => {
                bound.push(binder.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    fn all_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var { name } => {
                out.insert(name.clone());
            }
            Term::App { fun, arg } => {
                fun.all_names(out);
                arg.all_names(out);
            }
            Term::Lam { binder, body } => {
                out.insert(binder.clone());
                body.all_names(out);
            }
        }
    }

    /// `self[x := s]`, renaming binders that would capture free variables of `s`.
    pub fn subst(&self, x: &str, s: &Term) -> Term {
        let fv = s.free_vars();
        self.subst_with(x, s, &fv)
    }

    fn subst_with(&self, x: &str, s: &Term, fv: &BTreeSet<String>) -> Term {
        match self {
            Term::Var { name } if name == x => s.clone(),
            Term::Var { .. } => self.clone(),
            Term::App { fun, arg } => Term::app(fun.subst_with(x, s, fv), arg.subst_with(x, s, fv)),
            Term::Lam { binder, .. } if binder == x => self.clone(),
            Term::Lam { binder, body } => {
                if !body.free_vars().contains(x) {
                    return self.clone();
                }
                if fv.contains(binder) {
                    let mut avoid = fv.clone();
                    body.all_names(&mut avoid);
                    avoid.insert(x.to_string());
                    let fresh = fresh_name(binder, &avoid);
                    let renamed = body.subst(binder, &Term::var(&fresh));
                    Term::lam(&fresh, renamed.subst_with(x, s, fv))
                } else {
                    Term::lam(binder, body.subst_with(x, s, fv))
                }
            }
        }
    }
}

/// `base` with a numeric suffix, avoiding every name in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    (1..).map(|i| format!("{stem}{i}")).find(|n| !avoid.contains(n)).expect("unbounded")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var { name } => f.write_str(name),
            Term::Lam { .. } => {
                let mut t = self;
                f.write_str("λ")?;
                let mut first = true;
                while let Term::Lam { binder, body } = t {
                    if !first {
                        f.write_str(" ")?;
                    }
                    f.write_str(binder)?;
                    first = false;
                    t = body;
                }
                write!(f, ". {t}")
            }
            Term::App { fun, arg } => {
                match **fun {
                    Term::Lam { .. } => write!(f, "({fun})")?,
                    _ => write!(f, "{fun}")?,
                }
                match **arg {
                    Term::Var { .. } => write!(f, " {arg}"),
                    _ => write!(f, " ({arg})"),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {col}: {msg}")]
pub struct TermParseError {
    pub col: usize,
    pub msg: String,
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() && c != 'λ' || c == '_'
}

fn is_ident(c: char) -> bool {
    is_ident_start(c) || c.is_ascii_digit() || c == '\''
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn col(&self) -> usize {
        self.chars.get(self.pos).map(|&(i, _)| i + 1).unwrap_or(self.chars.len() + 1)
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, TermParseError> {
        Err(TermParseError { col: self.col(), msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        if !self.peek().is_some_and(is_ident_start) {
            return None;
        }
        let mut s = String::new();
        while let Some(c) = self.peek().filter(|&c| is_ident(c)) {
            s.push(c);
            self.pos += 1;
        }
        Some(s)
    }

    fn term(&mut self) -> Result<Term, TermParseError> {
        self.skip_ws();
        if matches!(self.peek(), Some('λ' | '\\')) {
            self.pos += 1;
            let mut binders = Vec::new();
            while let Some(x) = self.ident() {
                binders.push(x);
            }
            if binders.is_empty() {
                return self.error("expected a binder after λ");
            }
            self.skip_ws();
            if self.peek() != Some('.') {
                return self.error("expected `.` after binders");
            }
            self.pos += 1;
            let body = self.term()?;
            return Ok(Term::lams(&binders, body));
        }
        let mut t = self.atom()?;
        loop {
            self.skip_ws();
            match self.peek() {
                None | Some(')') => return Ok(t),
                Some('λ' | '\\') => {
                    let arg = self.term()?;
                    return Ok(Term::app(t, arg));
                }
                _ => t = Term::app(t, self.atom()?),
            }
        }
    }

    fn atom(&mut self) -> Result<Term, TermParseError> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let t = self.term()?;
                self.skip_ws();
                if self.peek() != Some(')') {
                    return self.error("expected `)`");
                }
                self.pos += 1;
                Ok(t)
            }
            _ => match self.ident() {
                Some(x) => Ok(Term::var(&x)),
                None => self.error("expected a term"),
            },
        }
    }
}

/// Parses `λx y. x (y z)`; `\` may stand for `λ`.
pub fn parse_term(text: &str) -> Result<Term, TermParseError> {
    let mut p = Parser { chars: text.chars().enumerate().collect(), pos: 0 };
    let t = p.term()?;
    p.skip_ws();
    if p.peek().is_some() {
        return p.error("unexpected trailing input");
    }
    Ok(t)
}
