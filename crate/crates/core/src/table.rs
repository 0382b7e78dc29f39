//! Function tables over flat structures.
//!
//! A flat structure has one cell whose values end their branches (`Bool`,
//! `o`, `err(Bool)`). A function of several flat arguments is given by its
//! value on every tuple, `None` standing for ⊥.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::behaviour::Strategy;
use crate::constructors::promote_point;
use crate::engine::{apply, Algorithm};
use crate::moves::Move;
use crate::position::Position;
use crate::sds::{Game, Sds};
use crate::syntax::{Document, Pattern, TableDecl};

pub type Point = Vec<Option<String>>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("{0} is not a flat structure")]
    NotFlat(String),
    #[error("{0} is not a function of flat arguments into a flat structure")]
    UnsupportedType(String),
    #[error("`{value}` is not a value of {flat}")]
    UnknownValue { value: String, flat: String },
    #[error("rows give both {a} and {b} at {point}")]
    Inconsistent { point: String, a: String, b: String },
    #[error("{point} is required to be ⊥ but monotone completion gives {value}")]
    BottomConflict { point: String, value: String },
    #[error("unknown structure `{0}`")]
    UnknownStructure(String),
    #[error("search budget of {0} nodes exceeded")]
    Budget(usize),
}

/// A flat structure: one cell, values with nothing below.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flat {
    pub cell: Move,
    pub values: Vec<Move>,
}

pub fn flat_of(s: &Sds) -> Option<Flat> {
    let roots = s.successors(&[]);
    let [cell] = roots.as_slice() else { return None };
    let mut values = s.successors(std::slice::from_ref(cell));
    values.sort();
    let leafy = values.iter().all(|v| s.successors(&[cell.clone(), v.clone()]).is_empty());
    leafy.then(|| Flat { cell: cell.clone(), values })
}

fn show(v: &Option<String>) -> String {
    v.clone().unwrap_or_else(|| "⊥".to_string())
}

fn show_point(p: &[Option<String>]) -> String {
    let parts: Vec<String> = p.iter().map(show).collect();
    format!("({})", parts.join(", "))
}

fn below(a: &[Option<String>], b: &[Option<String>]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.is_none() || x == y)
}

fn all_points(domain: &[Vec<String>]) -> Vec<Point> {
    let mut out: Vec<Point> = vec![Vec::new()];
    for vals in domain {
        let mut next = Vec::new();
        for p in &out {
            for v in std::iter::once(None).chain(vals.iter().cloned().map(Some)) {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// A total table over the flat product, monotone by construction.
#[derive(Clone, PartialEq, Eq)]
pub struct FunctionTable {
    domain: Vec<Vec<String>>,
    map: BTreeMap<Point, Option<String>>,
}

impl FunctionTable {
    /// Tabulates `f` over every tuple of `domain`.
    pub fn tabulate(domain: Vec<Vec<String>>, f: impl Fn(&Point) -> Option<String>) -> FunctionTable {
        let map = all_points(&domain).into_iter().map(|p| {
            let v = f(&p);
            (p, v)
        });
        FunctionTable { map: map.collect(), domain }
    }

    /// Completes the rows of a declaration by monotonicity. Rows whose
    /// result is `_` require ⊥ at exactly the points they describe.
    pub fn from_decl(decl: &TableDecl, doc: &Document) -> Result<FunctionTable, TableError> {
        let sds = doc.sds(&decl.flat).ok_or_else(|| TableError::UnknownStructure(decl.flat.clone()))?;
        let flat = flat_of(sds).ok_or_else(|| TableError::NotFlat(decl.flat.clone()))?;
        let values: Vec<String> = flat.values.iter().map(|v| v.to_string()).collect();
        let check = |v: &str| {
            if values.iter().any(|w| w == v) {
                Ok(())
            } else {
                Err(TableError::UnknownValue { value: v.to_string(), flat: decl.flat.clone() })
            }
        };
        let mut lower = Vec::new();
        let mut bottoms = Vec::new();
        for (args, res) in &decl.rows {
            for p in args.iter().chain([res]) {
                if let Pattern::Value(v) = p {
                    check(v)?;
                }
            }
            for (point, value) in expand(args, res, &values) {
                match value {
                    Some(v) => lower.push((point, v)),
                    None => bottoms.push(point),
                }
            }
        }
        let domain = vec![values.clone(); decl.arity];
        let mut map = BTreeMap::new();
        for p in all_points(&domain) {
            let mut value: Option<&String> = None;
            for (args, v) in &lower {
                if !below(args, &p) {
                    continue;
                }
                match value {
                    Some(w) if w != v => {
                        return Err(TableError::Inconsistent { point: show_point(&p), a: w.clone(), b: v.clone() })
                    }
                    _ => value = Some(v),
                }
            }
            map.insert(p, value.cloned());
        }
        for p in bottoms {
            if let Some(Some(v)) = map.get(&p) {
                return Err(TableError::BottomConflict { point: show_point(&p), value: v.clone() });
            }
        }
        Ok(FunctionTable { domain, map })
    }

    pub fn arity(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[Vec<String>] {
        &self.domain
    }

    pub fn get(&self, p: &[Option<String>]) -> Option<&str> {
        self.map.get(p).and_then(|v| v.as_deref())
    }

    pub fn rows(&self) -> impl Iterator<Item = (&Point, &Option<String>)> {
        self.map.iter()
    }

    pub fn is_monotone(&self) -> bool {
        self.map.iter().all(|(p, v)| v.is_none() || self.map.iter().all(|(q, w)| !below(p, q) || w == v))
    }

    /// True when every point above `at` maps to `want`; with `only_unset`,
    /// only points leaving that argument at ⊥ are considered.
    fn agrees_above(&self, at: &[Option<String>], want: Option<&str>, only_unset: Option<usize>) -> bool {
        self.map.iter().all(|(p, v)| {
            if !below(at, p) {
                return true;
            }
            if let Some(i) = only_unset {
                if p[i].is_some() {
                    return true;
                }
            }
            v.as_deref() == want
        })
    }
}

impl fmt::Display for FunctionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, v) in &self.map {
            writeln!(f, "{} = {}", show_point(p), show(v))?;
        }
        Ok(())
    }
}

impl fmt::Debug for FunctionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn expand(args: &[Pattern], res: &Pattern, values: &[String]) -> Vec<(Point, Option<String>)> {
    let mut vars: Vec<&str> = Vec::new();
    for p in args {
        if let Pattern::Var(v) = p {
            if !vars.contains(&v.as_str()) {
                vars.push(v);
            }
        }
    }
    let choices: Vec<Option<String>> = std::iter::once(None).chain(values.iter().cloned().map(Some)).collect();
    let mut envs: Vec<BTreeMap<&str, Option<String>>> = vec![BTreeMap::new()];
    for v in &vars {
        envs = envs
            .into_iter()
            .flat_map(|e| {
                choices.iter().map(move |c| {
                    let mut e = e.clone();
                    e.insert(*v, c.clone());
                    e
                })
            })
            .collect();
    }
    let inst = |p: &Pattern, env: &BTreeMap<&str, Option<String>>| match p {
        Pattern::Bottom => None,
        Pattern::Value(v) => Some(v.clone()),
        Pattern::Var(v) => env[v.as_str()].clone(),
    };
    envs.iter().map(|env| (args.iter().map(|a| inst(a, env)).collect(), inst(res, env))).collect()
}

/// How the source of a function type is laid out.
struct Shape {
    bang: bool,
    product: bool,
    flats: Vec<Flat>,
}

fn source_shape(source: &Sds) -> Option<Shape> {
    let (bang, inner) = match source.bang_inner() {
        Some(s) => (true, s),
        None => (false, source),
    };
    let (product, flats) = match inner {
        Sds::Product(parts) => (true, parts.iter().map(flat_of).collect::<Option<Vec<_>>>()?),
        other => (false, vec![flat_of(other)?]),
    };
    Some(Shape { bang, product, flats })
}

fn shape(source: &Sds, target: &Sds) -> Option<Shape> {
    flat_of(target)?;
    source_shape(source)
}

impl Shape {
    fn domain(&self) -> Vec<Vec<String>> {
        self.flats.iter().map(|f| f.values.iter().map(Move::to_string).collect()).collect()
    }

    fn tag(&self, i: usize, m: &Move) -> Move {
        if self.product {
            Move::comp(i as u8 + 1, m.clone())
        } else {
            m.clone()
        }
    }

    fn point(&self, p: &[Option<String>]) -> Strategy {
        let mut set = BTreeSet::new();
        for (i, (v, flat)) in p.iter().zip(&self.flats).enumerate() {
            if let Some(v) = v {
                let value = flat.values.iter().find(|w| w.to_string() == *v).expect("value of flat");
                set.insert(Position::from(vec![self.tag(i, &flat.cell), self.tag(i, value)]));
            }
        }
        let x = Strategy::from_set_unchecked(set);
        if self.bang {
            promote_point(&x)
        } else {
            x
        }
    }

    fn read(&self, y: &Strategy) -> Option<String> {
        y.iter().find(|r| r.len() == 2).map(|r| r[1].to_string())
    }

    /// The component asked by a source cell of the arrow, and the
    /// component value carried by a source value.
    fn component(&self, m: &Move) -> Option<(usize, Option<String>)> {
        let inner = match m {
            Move::Bang(p) => p.last()?.clone(),
            other => other.clone(),
        };
        let (i, base) = match &inner {
            Move::Comp(i, b) if self.product => (*i as usize - 1, (**b).clone()),
            b => (0, b.clone()),
        };
        Some((i, base.is_value().then(|| base.to_string())))
    }
}

/// The extensional collapse of an algorithm between flat types.
pub fn function_table(alg: &Algorithm) -> Result<FunctionTable, TableError> {
    let sh = shape(alg.source(), alg.target()).ok_or_else(|| TableError::UnsupportedType(alg.arrow().to_string()))?;
    Ok(FunctionTable::tabulate(sh.domain(), |p| sh.read(&apply(alg, &sh.point(p)))))
}

/// The table seen as a function on the strategies of the flat product.
pub fn point_function(t: &FunctionTable, source: &Sds) -> Result<BTreeMap<Strategy, Strategy>, TableError> {
    let sh = source_shape(source).ok_or_else(|| TableError::UnsupportedType(source.to_string()))?;
    let mut out = BTreeMap::new();
    for (p, v) in t.rows() {
        let y = match v {
            Some(v) => Strategy::from_response(&Position::from(vec![Move::cell("?"), Move::value(v)])),
            None => Strategy::empty(),
        };
        out.insert(sh.point(p), y);
    }
    Ok(out)
}

struct Search<'a> {
    table: &'a FunctionTable,
    arrow: Sds,
    shape: Shape,
    left: usize,
    budget: usize,
}

impl Search<'_> {
    fn solve(&mut self, at: &Position, info: &Point) -> Result<Vec<BTreeSet<Position>>, TableError> {
        if self.left == 0 {
            return Err(TableError::Budget(self.budget));
        }
        self.left -= 1;
        let mut out = Vec::new();
        if self.table.agrees_above(info, None, None) {
            out.push(BTreeSet::new());
        }
        let mut moves = self.arrow.successors(at);
        moves.sort();
        for m in moves {
            match &m {
                Move::Output(v) => {
                    if self.table.agrees_above(info, Some(&v.to_string()), None) {
                        out.push([at.with(m.clone())].into_iter().collect());
                    }
                }
                Move::Valof(c) => {
                    let Some((i, _)) = self.shape.component(c) else { continue };
                    if info[i].is_some() || !self.table.agrees_above(info, None, Some(i)) {
                        continue;
                    }
                    let asked = at.with(m.clone());
                    let mut combos: Vec<BTreeSet<Position>> = vec![[asked.clone()].into_iter().collect()];
                    let mut answers = self.arrow.successors(&asked);
                    answers.sort();
                    for a in answers {
                        let Move::Is(w) = &a else { continue };
                        let Some((j, Some(value))) = self.shape.component(w) else { continue };
                        let mut next = info.clone();
                        next[j] = Some(value);
                        let subs = self.solve(&asked.with(a.clone()), &next)?;
                        let mut merged = Vec::new();
                        for c in &combos {
                            for s in &subs {
                                merged.push(c.union(s).cloned().collect());
                            }
                        }
                        combos = merged;
                        if combos.is_empty() {
                            break;
                        }
                    }
                    out.extend(combos);
                }
                _ => {}
            }
        }
        Ok(out)
    }
}

/// Every algorithm of type `source -o target` whose table is `t`.
pub fn search_by_table(
    t: &FunctionTable,
    source: &Sds,
    target: &Sds,
    budget: usize,
) -> Result<Vec<Algorithm>, TableError> {
    let arrow = Sds::arrow(source.clone(), target.clone());
    let sh = shape(source, target).ok_or_else(|| TableError::UnsupportedType(arrow.to_string()))?;
    if sh.domain() != t.domain {
        return Err(TableError::UnsupportedType(arrow.to_string()));
    }
    let mut search = Search { table: t, arrow: arrow.clone(), shape: sh, left: budget, budget };
    let mut roots = arrow.successors(&[]);
    roots.sort();
    let mut combos: Vec<BTreeSet<Position>> = vec![BTreeSet::new()];
    let info: Point = vec![None; t.arity()];
    for r in roots {
        let subs = search.solve(&Position::from(vec![r]), &info)?;
        combos = combos.iter().flat_map(|c| subs.iter().map(move |s| c.union(s).cloned().collect())).collect();
    }
    let mut out: Vec<Algorithm> = combos
        .into_iter()
        .map(|set: BTreeSet<Position>| {
            let closed = set.iter().flat_map(|p| p.response_prefixes().collect::<Vec<_>>()).collect();
            Algorithm::new_unchecked(source.clone(), target.clone(), Strategy::from_set_unchecked(closed))
        })
        .collect();
    out.sort_by(|a, b| a.strategy().cmp(b.strategy()));
    Ok(out)
}
