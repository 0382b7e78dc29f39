//! Text syntax for structures, algorithms and function tables.
//!
//! ```text
//! # comments run to the end of the line
//! sds Bool { cell ? { value tt value ff } }
//! sds O3 = !(o * o) -o o
//! algorithm neg : Bool -o Bool { req ? valof ? { is tt out ff ; is ff out tt } }
//! counter ask : Bool { ? }
//! table lor (2) : Bool { (tt, _) -> tt ; (_, tt) -> tt ; (ff, ff) -> ff }
//! ```
//!
//! Moves are written as they print. A run of moves is resolved left to right
//! against the legal successors of the position reached so far, so the text
//! `req ? valof ?.1` needs no separators beyond spaces.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::behaviour::{validate_counter_strategy, validate_strategy, CounterStrategy, Strategy};
use crate::constructors::with_error;
use crate::engine::{validate_affine, Algorithm};
use crate::moves::Move;
use crate::position::Position;
use crate::sds::{validate_sds, Game, Sds, DEFAULT_BUDGET};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// A type expression, kept for printing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeExpr {
    Name(String),
    Bang(Box<TypeExpr>),
    Product(Vec<TypeExpr>),
    Arrow(Box<TypeExpr>, Box<TypeExpr>),
    Err(Box<TypeExpr>),
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn atom(t: &TypeExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                TypeExpr::Name(_) | TypeExpr::Bang(_) | TypeExpr::Err(_) => write!(f, "{t}"),
                _ => write!(f, "({t})"),
            }
        }
        match self {
            TypeExpr::Name(n) => f.write_str(n),
            TypeExpr::Bang(t) => {
                f.write_str("!")?;
                atom(t, f)
            }
            TypeExpr::Err(t) => write!(f, "err({t})"),
            TypeExpr::Product(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" * ")?;
                    }
                    atom(t, f)?;
                }
                Ok(())
            }
            TypeExpr::Arrow(s, t) => {
                match **s {
                    TypeExpr::Arrow(..) => write!(f, "({s})")?,
                    _ => write!(f, "{s}")?,
                }
                write!(f, " -o {t}")
            }
        }
    }
}

/// One entry of a function table: a flat value, `_` for undefined, or a variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pattern {
    Bottom,
    Value(String),
    Var(String),
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Bottom => f.write_str("_"),
            Pattern::Value(v) | Pattern::Var(v) => f.write_str(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableDecl {
    pub name: String,
    pub arity: usize,
    pub flat: String,
    pub rows: Vec<(Vec<Pattern>, Pattern)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SdsDef {
    Forest(Sds),
    Alias(TypeExpr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Sds { name: String, def: SdsDef, sds: Sds },
    Algorithm { name: String, ty: TypeExpr, algorithm: Algorithm },
    Strategy { name: String, ty: TypeExpr, sds: Sds, strategy: Strategy },
    Counter { name: String, ty: TypeExpr, sds: Sds, counter: CounterStrategy },
    Table(TableDecl),
}

impl Item {
    pub fn name(&self) -> &str {
        match self {
            Item::Sds { name, .. }
            | Item::Algorithm { name, .. }
            | Item::Strategy { name, .. }
            | Item::Counter { name, .. } => name,
            Item::Table(t) => &t.name,
        }
    }
}

/// A parsed file: items in source order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    pub items: Vec<Item>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Document, ParseError> {
        Document::parse_with(text, &Document::default())
    }

    /// Parses `text` with the items of `prelude` in scope. Only the new
    /// items are returned.
    pub fn parse_with(text: &str, prelude: &Document) -> Result<Document, ParseError> {
        let mut p = Parser::new(text);
        for item in &prelude.items {
            p.declare(item.clone());
        }
        let mut doc = Document::default();
        loop {
            p.skip_ws();
            if p.at_end() {
                return Ok(doc);
            }
            let item = p.item()?;
            p.declare(item.clone());
            doc.items.push(item);
        }
    }

    pub fn get(&self, name: &str) -> Option<&Item> {
        self.items.iter().find(|i| i.name() == name)
    }

    pub fn sds(&self, name: &str) -> Option<&Sds> {
        match self.get(name)? {
            Item::Sds { sds, .. } => Some(sds),
            _ => None,
        }
    }

    pub fn algorithm(&self, name: &str) -> Option<&Algorithm> {
        match self.get(name)? {
            Item::Algorithm { algorithm, .. } => Some(algorithm),
            _ => None,
        }
    }

    pub fn table(&self, name: &str) -> Option<&TableDecl> {
        match self.get(name)? {
            Item::Table(t) => Some(t),
            _ => None,
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(Item::name)
    }

    /// Evaluates a type expression against the structures declared here.
    pub fn eval_type(&self, text: &str) -> Result<Sds, ParseError> {
        let mut p = Parser::new(text);
        for item in &self.items {
            p.declare(item.clone());
        }
        let (_, sds) = p.type_expr()?;
        p.skip_ws();
        if !p.at_end() {
            return Err(p.error("trailing text after type"));
        }
        Ok(sds)
    }
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            print_item(f, item)?;
        }
        Ok(())
    }
}

fn print_item(f: &mut fmt::Formatter<'_>, item: &Item) -> fmt::Result {
    match item {
        Item::Sds { name, def: SdsDef::Alias(t), .. } => writeln!(f, "sds {name} = {t}"),
        Item::Sds { name, def: SdsDef::Forest(s), .. } => {
            write!(f, "sds {name} {{")?;
            print_forest(f, s, &Position::empty())?;
            writeln!(f, " }}")
        }
        Item::Algorithm { name, ty, algorithm } => {
            writeln!(f, "algorithm {name} : {ty} {{ {} }}", chains(algorithm.strategy().responses()))
        }
        Item::Strategy { name, ty, strategy, .. } => {
            writeln!(f, "strategy {name} : {ty} {{ {} }}", chains(strategy.responses()))
        }
        Item::Counter { name, ty, counter, .. } => {
            writeln!(f, "counter {name} : {ty} {{ {} }}", chains(counter.queries()))
        }
        Item::Table(t) => {
            writeln!(f, "table {} ({}) : {} {{", t.name, t.arity, t.flat)?;
            for (args, res) in &t.rows {
                let args: Vec<String> = args.iter().map(Pattern::to_string).collect();
                writeln!(f, "  ({}) -> {res};", args.join(", "))?;
            }
            writeln!(f, "}}")
        }
    }
}

fn print_forest(f: &mut fmt::Formatter<'_>, s: &Sds, at: &Position) -> fmt::Result {
    let mut next = s.successors(at);
    next.sort();
    for m in next {
        let kw = if m.is_cell() { "cell" } else { "value" };
        write!(f, " {kw} {m}")?;
        let below = at.with(m);
        if !s.successors(&below).is_empty() {
            f.write_str(" {")?;
            print_forest(f, s, &below)?;
            f.write_str(" }")?;
        }
    }
    Ok(())
}

/// Prints a prefix-closed family as chains with `{ a ; b }` at branch points.
pub fn chains(members: &BTreeSet<Position>) -> String {
    fn go(out: &mut String, members: &BTreeSet<Position>, at: &Position) {
        let mut kids: Vec<Move> = Vec::new();
        for p in members.range(at.clone()..) {
            if !at.is_prefix_of(p) {
                break;
            }
            if p.len() > at.len() {
                let m = p[at.len()].clone();
                if kids.last() != Some(&m) && !kids.contains(&m) {
                    kids.push(m);
                }
            }
        }
        match kids.len() {
            0 => {}
            1 => {
                let m = kids.pop().unwrap();
                if !at.is_empty() {
                    out.push(' ');
                }
                let _ = write!(out, "{m}");
                go(out, members, &at.with(m));
            }
            _ => {
                out.push_str(if at.is_empty() { "" } else { " { " });
                for (i, m) in kids.into_iter().enumerate() {
                    if i > 0 {
                        out.push_str(" ; ");
                    }
                    let _ = write!(out, "{m}");
                    go(out, members, &at.with(m));
                }
                if !at.is_empty() {
                    out.push_str(" }");
                }
            }
        }
    }
    let mut out = String::new();
    go(&mut out, members, &Position::empty());
    out
}

/// Splits move text into comparable tokens.
fn move_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_whitespace() || "<>()|~*".contains(ch) {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if !ch.is_whitespace() {
                out.push(ch.to_string());
            }
        } else {
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Resolves a run of moves written as text, starting after `at`.
pub fn resolve_moves(game: &dyn Game, at: &Position, text: &str) -> Result<Position, String> {
    let tokens = move_tokens(text);
    let mut p = at.clone();
    let mut i = 0;
    if tokens.len() == 1 && tokens[0] == "ε" {
        return Ok(p);
    }
    while i < tokens.len() {
        let mut best: Option<(usize, Move)> = None;
        for m in game.successors(&p) {
            let mt = move_tokens(&m.to_string());
            if tokens[i..].starts_with(&mt) && best.as_ref().is_none_or(|(n, _)| mt.len() > *n) {
                best = Some((mt.len(), m));
            }
        }
        let Some((n, m)) = best else {
            let mut legal: Vec<String> = game.successors(&p).iter().map(Move::to_string).collect();
            legal.sort();
            return Err(format!(
                "no legal move matches `{}` after {p} (legal: {})",
                tokens[i..].join(" "),
                if legal.is_empty() { "none".to_string() } else { legal.join(", ") }
            ));
        };
        p.push(m);
        i += n;
    }
    Ok(p)
}

/// Parses a whole position of `game`; `ε` is the empty position.
pub fn parse_position(game: &dyn Game, text: &str) -> Result<Position, String> {
    resolve_moves(game, &Position::empty(), text)
}

/// Parses a single move legal after `at`.
pub fn parse_move(game: &dyn Game, at: &Position, text: &str) -> Result<Move, String> {
    let p = resolve_moves(game, at, text)?;
    if p.len() != at.len() + 1 {
        return Err(format!("`{text}` is not a single move"));
    }
    Ok(p.last().cloned().expect("one move"))
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    env: BTreeMap<String, Item>,
}

const SPECIAL: &str = "{}();:=,!*<>|~#";

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Parser<'a> {
        Parser { src, pos: 0, env: BTreeMap::new() }
    }

    fn declare(&mut self, item: Item) {
        self.env.insert(item.name().to_string(), item);
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        self.error_at(self.pos, msg)
    }

    fn error_at(&self, at: usize, msg: impl Into<String>) -> ParseError {
        let before = &self.src[..at];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map(|l| l.chars().count()).unwrap_or(0) + 1;
        ParseError { line, col, msg: msg.into() }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn skip_ws(&mut self) {
        loop {
            let r = self.rest();
            let t = r.trim_start();
            self.pos += r.len() - t.len();
            if t.starts_with('#') {
                self.pos += t.find('\n').unwrap_or(t.len());
            } else {
                return;
            }
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`")))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let r = self.rest();
        let n = r
            .char_indices()
            .find(|(i, c)| c.is_whitespace() || SPECIAL.contains(*c) || (*c == '-' && r[*i..].starts_with("->")))
            .map(|(i, _)| i)
            .unwrap_or(r.len());
        if n == 0 {
            return Err(self.error("expected a name"));
        }
        self.pos += n;
        Ok(r[..n].to_string())
    }

    fn keyword(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        let w = self.ident()?;
        if !["sds", "algorithm", "strategy", "counter", "table"].contains(&w.as_str()) {
            return Err(self.error_at(start, format!("unknown declaration `{w}`")));
        }
        Ok(w)
    }

    fn fresh_name(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        let name = self.ident()?;
        if self.env.contains_key(&name) {
            return Err(self.error_at(start, format!("`{name}` is already defined")));
        }
        Ok(name)
    }

    fn item(&mut self) -> Result<Item, ParseError> {
        match self.keyword()?.as_str() {
            "sds" => {
                let name = self.fresh_name()?;
                if self.eat("=") {
                    let (ty, sds) = self.type_expr()?;
                    return Ok(Item::Sds { name, def: SdsDef::Alias(ty), sds });
                }
                let start = self.pos;
                self.expect("{")?;
                let mut words = Vec::new();
                self.forest(&Position::empty(), true, &mut words)?;
                self.expect("}")?;
                let forest = validate_sds(&name, &words).map_err(|e| self.error_at(start, e.to_string()))?;
                let sds = Sds::base(forest);
                Ok(Item::Sds { name, def: SdsDef::Forest(sds.clone()), sds })
            }
            "algorithm" => {
                let name = self.fresh_name()?;
                self.expect(":")?;
                let start = self.pos;
                let (ty, sds) = self.type_expr()?;
                let Some((s, t)) = sds.arrow_parts() else {
                    return Err(self.error_at(start, format!("`{ty}` is not an arrow type")));
                };
                let (s, t) = (s.clone(), t.clone());
                let start = self.pos;
                let words = self.body(&sds, true)?;
                let algorithm = validate_affine(words, &s, &t).map_err(|e| self.error_at(start, e.to_string()))?;
                Ok(Item::Algorithm { name, ty, algorithm })
            }
            "strategy" => {
                let name = self.fresh_name()?;
                self.expect(":")?;
                let (ty, sds) = self.type_expr()?;
                let start = self.pos;
                let words = self.body(&sds, true)?;
                let strategy = validate_strategy(&sds, words).map_err(|e| self.error_at(start, e.to_string()))?;
                Ok(Item::Strategy { name, ty, sds, strategy })
            }
            "counter" => {
                let name = self.fresh_name()?;
                self.expect(":")?;
                let (ty, sds) = self.type_expr()?;
                let start = self.pos;
                let words = self.body(&sds, false)?;
                let counter =
                    validate_counter_strategy(&sds, words).map_err(|e| self.error_at(start, e.to_string()))?;
                Ok(Item::Counter { name, ty, sds, counter })
            }
            _ => self.table().map(Item::Table),
        }
    }

    fn forest(&mut self, at: &Position, cells: bool, words: &mut Vec<Position>) -> Result<(), ParseError> {
        let kw = if cells { "cell" } else { "value" };
        loop {
            self.skip_ws();
            if self.rest().starts_with('}') {
                return Ok(());
            }
            let start = self.pos;
            let w = self.ident()?;
            if w != kw {
                return Err(self.error_at(start, format!("expected `{kw}`")));
            }
            let label = self.ident()?;
            let m = if cells { Move::cell(&label) } else { Move::value(&label) };
            let p = at.with(m);
            words.push(p.clone());
            if self.eat("{") {
                self.forest(&p, !cells, words)?;
                self.expect("}")?;
            }
        }
    }

    /// `{ chain ; chain ... }`, collecting response (or query) prefixes.
    fn body(&mut self, game: &dyn Game, responses: bool) -> Result<BTreeSet<Position>, ParseError> {
        self.expect("{")?;
        let mut leaves = Vec::new();
        self.chains(game, &Position::empty(), &mut leaves)?;
        self.expect("}")?;
        let mut out = BTreeSet::new();
        for (at, leaf) in leaves {
            if !leaf.is_empty() && leaf.is_response() != responses {
                let what = if responses { "query" } else { "response" };
                return Err(self.error_at(at, format!("branch {leaf} ends in a {what}")));
            }
            if responses {
                out.extend(leaf.response_prefixes());
            } else {
                out.extend(leaf.query_prefixes());
            }
        }
        Ok(out)
    }

    fn chains(
        &mut self,
        game: &dyn Game,
        at: &Position,
        leaves: &mut Vec<(usize, Position)>,
    ) -> Result<(), ParseError> {
        loop {
            self.skip_ws();
            let start = self.pos;
            let r = self.rest();
            let n = r.find(['{', '}', ';', '#']).unwrap_or(r.len());
            let text = r[..n].trim_end();
            self.pos += n;
            let p = resolve_moves(game, at, text).map_err(|e| self.error_at(start, e))?;
            if self.eat("{") {
                self.chains(game, &p, leaves)?;
                self.expect("}")?;
            } else {
                leaves.push((start, p));
            }
            if !self.eat(";") {
                return Ok(());
            }
        }
    }

    fn type_expr(&mut self) -> Result<(TypeExpr, Sds), ParseError> {
        let (lt, ls) = self.type_product()?;
        self.skip_ws();
        if self.eat("-o") {
            let (rt, rs) = self.type_expr()?;
            return Ok((TypeExpr::Arrow(Box::new(lt), Box::new(rt)), Sds::arrow(ls, rs)));
        }
        Ok((lt, ls))
    }

    fn type_product(&mut self) -> Result<(TypeExpr, Sds), ParseError> {
        let first = self.type_atom()?;
        let mut parts = vec![first];
        while self.eat("*") {
            parts.push(self.type_atom()?);
        }
        if parts.len() == 1 {
            return Ok(parts.pop().unwrap());
        }
        let (ts, ss): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
        Ok((TypeExpr::Product(ts), Sds::product(ss)))
    }

    fn type_atom(&mut self) -> Result<(TypeExpr, Sds), ParseError> {
        if self.eat("!") {
            let (t, s) = self.type_atom()?;
            return Ok((TypeExpr::Bang(Box::new(t)), Sds::bang(s)));
        }
        if self.eat("(") {
            let r = self.type_expr()?;
            self.expect(")")?;
            return Ok(r);
        }
        let start = self.pos;
        let name = self.ident()?;
        if name == "err" && self.eat("(") {
            let (t, s) = self.type_expr()?;
            self.expect(")")?;
            let e = with_error(&s, DEFAULT_BUDGET).map_err(|e| self.error_at(start, e.to_string()))?;
            return Ok((TypeExpr::Err(Box::new(t)), e));
        }
        match self.env.get(&name) {
            Some(Item::Sds { sds, .. }) => Ok((TypeExpr::Name(name), sds.clone())),
            Some(_) => Err(self.error_at(start, format!("`{name}` is not a structure"))),
            None => Err(self.error_at(start, format!("unknown structure `{name}`"))),
        }
    }

    fn pattern(&mut self) -> Result<Pattern, ParseError> {
        let w = self.ident()?;
        Ok(if w == "_" {
            Pattern::Bottom
        } else if w.chars().next().is_some_and(char::is_uppercase) {
            Pattern::Var(w)
        } else {
            Pattern::Value(w)
        })
    }

    fn table(&mut self) -> Result<TableDecl, ParseError> {
        let name = self.fresh_name()?;
        self.expect("(")?;
        let start = self.pos;
        let arity: usize = self.ident()?.parse().map_err(|_| self.error_at(start, "expected an arity"))?;
        self.expect(")")?;
        let flat = if self.eat(":") { self.ident()? } else { "Bool".to_string() };
        self.expect("{")?;
        let mut rows = Vec::new();
        while !self.eat("}") {
            let start = self.pos;
            self.expect("(")?;
            let mut args = Vec::new();
            if !self.eat(")") {
                loop {
                    args.push(self.pattern()?);
                    if self.eat(")") {
                        break;
                    }
                    self.expect(",")?;
                }
            }
            if args.len() != arity {
                return Err(self.error_at(start, format!("row has {} arguments, expected {arity}", args.len())));
            }
            self.expect("->")?;
            let res = self.pattern()?;
            if let Pattern::Var(v) = &res {
                if !args.contains(&res) {
                    return Err(self.error_at(start, format!("result variable {v} is unbound")));
                }
            }
            rows.push((args, res));
            if !self.eat(";") {
                self.expect("}")?;
                break;
            }
        }
        Ok(TableDecl { name, arity, flat, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOOL: &str = "sds Bool { cell ? { value tt value ff } }\n";

    #[test]
    fn parses_negation() {
        let d = Document::parse(&format!(
            "{BOOL}algorithm neg : Bool -o Bool {{ req ? valof ? {{ is tt out ff ; is ff out tt }} }}"
        ))
        .unwrap();
        let neg = d.algorithm("neg").unwrap();
        assert_eq!(neg.strategy().len(), 3);
        let text = d.to_string();
        assert_eq!(Document::parse(&text).unwrap(), d);
    }

    #[test]
    fn reports_bad_moves_with_location() {
        let err = Document::parse(&format!("{BOOL}algorithm k : Bool -o Bool {{ req ? out maybe }}")).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.msg.contains("no legal move"), "{err}");
    }

    #[test]
    fn types_and_tables() {
        let d = Document::parse(&format!(
            "{BOOL}sds F = !(Bool * Bool) -o Bool\ntable lor (2) {{ (tt, _) -> tt; (_, tt) -> tt; (ff, ff) -> ff }}"
        ))
        .unwrap();
        assert_eq!(d.sds("F").unwrap().to_string(), "!(Bool * Bool) -o Bool");
        let t = d.table("lor").unwrap();
        assert_eq!(t.rows.len(), 3);
        assert_eq!(Document::parse(&d.to_string()).unwrap(), d);
    }

    #[test]
    fn position_text_resolves() {
        let d = Document::parse(BOOL).unwrap();
        let arrow = Sds::arrow(d.sds("Bool").unwrap().clone(), d.sds("Bool").unwrap().clone());
        let p = parse_position(&arrow, "req ? valof ? is tt out ff").unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.to_string(), "req ? valof ? is tt out ff");
        assert!(parse_position(&arrow, "valof ?").is_err());
        assert_eq!(parse_position(&arrow, "ε").unwrap(), Position::empty());
    }
}
