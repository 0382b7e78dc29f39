//! Affine algorithms seen as function pairs.
//!
//! An affine algorithm `phi : S -o S'` determines a function `f` from the
//! strategies of `S` to those of `S'`, and a partial function `g` from the
//! counter-strategies of `S'` to those of `S`. Both are tabulated here over
//! every finite (counter-)strategy, which is exact for finite structures.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::behaviour::{enumerate_counter_strategies, enumerate_strategies, play, CounterStrategy, Strategy};
use crate::engine::{apply, Algorithm};
use crate::moves::Move;
use crate::position::{project_source, project_target, Position};
use crate::sds::{Game, Sds, SdsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymmetricError {
    #[error("{what} is not tabulated")]
    Missing { what: String },
    #[error("at {at} the pair asks for both an output and a source query")]
    Inconsistent { at: Position },
    #[error("two incomparable minimal witnesses: {a} and {b}")]
    StabilityFailure { a: Strategy, b: Strategy },
    #[error("cannot compose {left} with {right}")]
    TypeMismatch { left: String, right: String },
    #[error(transparent)]
    Sds(#[from] SdsError),
}

/// A tabulated function pair between two finite structures.
#[derive(Clone)]
pub struct SymmetricAlgorithm {
    source: Sds,
    target: Sds,
    f: BTreeMap<Strategy, Strategy>,
    g: BTreeMap<CounterStrategy, Option<CounterStrategy>>,
    source_counters: Vec<CounterStrategy>,
    target_points: Vec<Strategy>,
}

impl PartialEq for SymmetricAlgorithm {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.target == other.target && self.f == other.f && self.g == other.g
    }
}

impl fmt::Debug for SymmetricAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SymmetricAlgorithm({} -o {})", self.source, self.target)?;
        for (x, y) in &self.f {
            writeln!(f, "  f {x} = {y}")?;
        }
        for (a, b) in &self.g {
            match b {
                Some(b) => writeln!(f, "  g {a} = {b}")?,
                None => writeln!(f, "  g {a} undefined")?,
            }
        }
        Ok(())
    }
}

/// The counter-strategy part: source queries asked while the target query
/// lies in `alpha`. Empty means undefined.
pub fn apply_counter(phi: &Algorithm, alpha: &CounterStrategy) -> Option<CounterStrategy> {
    let mut out = BTreeSet::new();
    for s in phi.strategy().iter() {
        if matches!(s.last(), Some(Move::Valof(_))) && alpha.contains(&project_target(s)) {
            out.insert(project_source(s));
        }
    }
    (!out.is_empty()).then(|| CounterStrategy::from_set_unchecked(out))
}

impl SymmetricAlgorithm {
    /// Builds a pair from explicit tables; `f` must cover every finite
    /// strategy of `source` and `g` every finite counter-strategy of `target`.
    pub fn new(
        source: Sds,
        target: Sds,
        f: BTreeMap<Strategy, Strategy>,
        g: BTreeMap<CounterStrategy, Option<CounterStrategy>>,
        budget: usize,
    ) -> Result<SymmetricAlgorithm, SymmetricError> {
        let source_counters = enumerate_counter_strategies(&source, budget)?;
        let target_points = enumerate_strategies(&target, budget)?;
        Ok(SymmetricAlgorithm { source, target, f, g, source_counters, target_points })
    }

    pub fn source(&self) -> &Sds {
        &self.source
    }

    pub fn target(&self) -> &Sds {
        &self.target
    }

    pub fn f(&self, x: &Strategy) -> Option<&Strategy> {
        self.f.get(x)
    }

    /// `None` outside the table; `Some(None)` where `g` is undefined.
    pub fn g(&self, alpha: &CounterStrategy) -> Option<Option<&CounterStrategy>> {
        self.g.get(alpha).map(Option::as_ref)
    }

    pub fn points(&self) -> impl Iterator<Item = &Strategy> {
        self.f.keys()
    }

    pub fn counters(&self) -> impl Iterator<Item = &CounterStrategy> {
        self.g.keys()
    }

    pub fn f_table(&self) -> &BTreeMap<Strategy, Strategy> {
        &self.f
    }

    pub fn g_table(&self) -> &BTreeMap<CounterStrategy, Option<CounterStrategy>> {
        &self.g
    }

    fn f_at(&self, x: &Strategy) -> Result<&Strategy, SymmetricError> {
        self.f.get(x).ok_or_else(|| SymmetricError::Missing { what: format!("f at {x}") })
    }

    fn g_at(&self, a: &CounterStrategy) -> Result<Option<&CounterStrategy>, SymmetricError> {
        self.g.get(a).map(Option::as_ref).ok_or_else(|| SymmetricError::Missing { what: format!("g at {a}") })
    }
}

/// Tabulates `(f, g)` over every finite (counter-)strategy.
pub fn to_symmetric(phi: &Algorithm, budget: usize) -> Result<SymmetricAlgorithm, SymmetricError> {
    let points = enumerate_strategies(phi.source(), budget)?;
    let counters = enumerate_counter_strategies(phi.target(), budget)?;
    let f = points.into_iter().map(|x| (x.clone(), apply(phi, &x))).collect();
    let g = counters.into_iter().map(|a| (a.clone(), apply_counter(phi, &a))).collect();
    SymmetricAlgorithm::new(phi.source().clone(), phi.target().clone(), f, g, budget)
}

fn strategy_below(r: &Position) -> Strategy {
    if r.is_empty() {
        Strategy::empty()
    } else {
        Strategy::from_response(r)
    }
}

/// Rebuilds the affine algorithm of a pair, position by position.
pub fn from_symmetric(fg: &SymmetricAlgorithm) -> Result<Algorithm, SymmetricError> {
    let arrow = Sds::arrow(fg.source.clone(), fg.target.clone());
    let mut out = BTreeSet::new();
    let mut stack: Vec<Position> = arrow.successors(&[]).into_iter().map(|c| Position::from(vec![c])).collect();
    while let Some(s) = stack.pop() {
        let src = project_source(&s);
        let tgt = project_target(&s);
        let fx = fg.f_at(&strategy_below(&src))?;
        let output = fx.answer(&tgt);
        let asked = match fg.g_at(&CounterStrategy::from_query(&tgt))? {
            Some(a) => a.next_cell(&src),
            None => None,
        };
        let next = match (output, asked) {
            (Some(_), Some(_)) => return Err(SymmetricError::Inconsistent { at: s }),
            (Some(v), None) => s.with(Move::output(v)),
            (None, Some(c)) => s.with(Move::valof(c)),
            (None, None) => continue,
        };
        for c in arrow.successors(&next) {
            stack.push(next.with(c));
        }
        out.insert(next);
    }
    Ok(Algorithm::new_unchecked(fg.source.clone(), fg.target.clone(), Strategy::from_set_unchecked(out)))
}

fn wins(x: &Strategy, alpha: &CounterStrategy) -> bool {
    play(x, alpha).player_wins()
}

/// `x` wins against `g(alpha)`, counting an undefined `g` as a win.
fn wins_opt(x: &Strategy, alpha: Option<&CounterStrategy>) -> bool {
    alpha.is_none_or(|a| wins(x, a))
}

fn minimal_unique<T: Clone + Ord>(candidates: Vec<&T>, below: impl Fn(&T, &T) -> bool) -> Result<Option<T>, (T, T)> {
    let minimal: Vec<&T> =
        candidates.iter().copied().filter(|c| !candidates.iter().any(|d| d != c && below(d, c))).collect();
    match minimal.as_slice() {
        [] => Ok(None),
        [m] => Ok(Some((*m).clone())),
        [a, b, ..] => Err(((*a).clone(), (*b).clone())),
    }
}

/// The least `y <= x` such that `f(y)` still wins against `alpha`.
pub fn stability_witness(
    fg: &SymmetricAlgorithm,
    x: &Strategy,
    alpha: &CounterStrategy,
) -> Result<Option<Strategy>, SymmetricError> {
    if !wins(fg.f_at(x)?, alpha) {
        return Ok(None);
    }
    let candidates: Vec<&Strategy> =
        fg.f.iter().filter(|(y, fy)| y.is_subset(x) && wins(fy, alpha)).map(|(y, _)| y).collect();
    minimal_unique(candidates, |a, b| a.is_subset(b)).map_err(|(a, b)| SymmetricError::StabilityFailure { a, b })
}

/// The least `beta <= alpha` such that `g(beta)` still wins against `x`.
pub fn counter_stability_witness(
    fg: &SymmetricAlgorithm,
    alpha: &CounterStrategy,
    x: &Strategy,
) -> Result<Option<CounterStrategy>, SymmetricError> {
    match fg.g_at(alpha)? {
        Some(ga) if !wins(x, ga) => {}
        _ => return Ok(None),
    }
    let candidates: Vec<&CounterStrategy> =
        fg.g.iter()
            .filter(|(b, gb)| b.is_subset(alpha) && gb.as_ref().is_some_and(|gb| !wins(x, gb)))
            .map(|(b, _)| b)
            .collect();
    minimal_unique(candidates, |a, b| a.is_subset(b)).map_err(|(a, b)| SymmetricError::StabilityFailure {
        a: Strategy::from_set_unchecked(a.queries().clone()),
        b: Strategy::from_set_unchecked(b.queries().clone()),
    })
}

fn is_index(fg: &SymmetricAlgorithm, x: &Strategy, alpha: &CounterStrategy, index: &CounterStrategy) -> bool {
    !wins(x, index) && fg.f.iter().all(|(y, fy)| !(x.is_subset(y) && wins(fy, alpha)) || wins(y, index))
}

fn is_counter_index(fg: &SymmetricAlgorithm, alpha: &CounterStrategy, x: &Strategy, index: &Strategy) -> bool {
    wins(index, alpha)
        && fg.g.iter().all(|(b, gb)| {
            let g_wins = gb.as_ref().is_some_and(|gb| !wins(x, gb));
            !(alpha.is_subset(b) && g_wins) || !wins(index, b)
        })
}

/// A smallest counter-strategy that every improvement of `x` must answer.
pub fn sequentiality_index(
    fg: &SymmetricAlgorithm,
    x: &Strategy,
    alpha: &CounterStrategy,
) -> Result<Option<CounterStrategy>, SymmetricError> {
    if wins(fg.f_at(x)?, alpha) {
        return Ok(None);
    }
    if !fg.f.iter().any(|(z, fz)| x.is_subset(z) && wins(fz, alpha)) {
        return Ok(None);
    }
    let mut found: Vec<&CounterStrategy> = fg.source_counters.iter().filter(|a| is_index(fg, x, alpha, a)).collect();
    found.sort_by_key(|a| a.len());
    Ok(found.first().map(|a| (*a).clone()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Axiom {
    L,
    R,
    LS,
    RS,
    Affine,
    Monotone,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::L => "L",
            Axiom::R => "R",
            Axiom::LS => "LS",
            Axiom::RS => "RS",
            Axiom::Affine => "affine",
            Axiom::Monotone => "monotone",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomEntry {
    pub axiom: Axiom,
    pub checked: usize,
    pub violations: Vec<String>,
}

impl AxiomEntry {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub entries: Vec<AxiomEntry>,
}

impl AxiomReport {
    pub fn holds(&self) -> bool {
        self.entries.iter().all(AxiomEntry::holds)
    }

    pub fn violations(&self) -> usize {
        self.entries.iter().map(|e| e.violations.len()).sum()
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let verdict = if e.holds() { "holds" } else { "FAILS" };
            writeln!(f, "({}) {verdict} on {} cases", e.axiom, e.checked)?;
            for v in &e.violations {
                writeln!(f, "    {v}")?;
            }
        }
        Ok(())
    }
}

fn g_or_empty(g: Option<&CounterStrategy>) -> BTreeSet<Position> {
    g.map(|a| a.queries().clone()).unwrap_or_default()
}

/// Checks every axiom exhaustively over the tabulated (counter-)strategies.
pub fn check_axioms(fg: &SymmetricAlgorithm) -> AxiomReport {
    let mut entries = Vec::new();
    let mut entry =
        |axiom: Axiom, checked: usize, violations: Vec<String>| entries.push(AxiomEntry { axiom, checked, violations });

    // (L)
    let (mut n, mut bad) = (0, Vec::new());
    for (x, fx) in &fg.f {
        for (alpha, ga) in &fg.g {
            if !wins(fx, alpha) {
                continue;
            }
            n += 1;
            let ga = ga.as_ref();
            if !wins_opt(x, ga) {
                bad.push(format!("f({x}) wins against {alpha} but {x} loses against g"));
                continue;
            }
            let expected = match ga {
                Some(a) => strategy_below(&play(x, a).maximal),
                None => Strategy::empty(),
            };
            match stability_witness(fg, x, alpha) {
                Ok(Some(m)) if m == expected => {}
                Ok(m) => bad.push(format!("x = {x}, α' = {alpha}: least witness {m:?}, play gives {expected}")),
                Err(e) => bad.push(format!("x = {x}, α' = {alpha}: {e}")),
            }
        }
    }
    entry(Axiom::L, n, bad);

    // (R)
    let (mut n, mut bad) = (0, Vec::new());
    for (alpha, ga) in &fg.g {
        let Some(ga) = ga else { continue };
        for (x, fx) in &fg.f {
            if wins(x, ga) {
                continue;
            }
            n += 1;
            if wins(fx, alpha) {
                bad.push(format!("g({alpha}) wins against {x} but f({x}) wins against {alpha}"));
                continue;
            }
            let expected = CounterStrategy::from_query(&play(fx, alpha).maximal);
            match counter_stability_witness(fg, alpha, x) {
                Ok(Some(m)) if m == expected => {}
                Ok(m) => bad.push(format!("α' = {alpha}, x = {x}: least witness {m:?}, play gives {expected}")),
                Err(e) => bad.push(format!("α' = {alpha}, x = {x}: {e}")),
            }
        }
    }
    entry(Axiom::R, n, bad);

    // (LS)
    let (mut n, mut bad) = (0, Vec::new());
    for (x, fx) in &fg.f {
        for (alpha, ga) in &fg.g {
            if wins(fx, alpha) {
                continue;
            }
            let improvable = fg.f.iter().any(|(y, fy)| y != x && x.is_subset(y) && wins(fy, alpha));
            if !improvable {
                continue;
            }
            n += 1;
            let Some(ga) = ga else {
                bad.push(format!("x = {x}, α' = {alpha}: g undefined though f can improve"));
                continue;
            };
            if wins(x, ga) {
                bad.push(format!("x = {x}, α' = {alpha}: x wins against g(α')"));
                continue;
            }
            let index = CounterStrategy::from_query(&play(x, ga).maximal);
            if !is_index(fg, x, alpha, &index) {
                bad.push(format!("x = {x}, α' = {alpha}: {index} is not a sequentiality index"));
            }
        }
    }
    entry(Axiom::LS, n, bad);

    // (RS)
    let (mut n, mut bad) = (0, Vec::new());
    for (alpha, ga) in &fg.g {
        for (x, fx) in &fg.f {
            if !wins_opt(x, ga.as_ref()) {
                continue;
            }
            let improvable =
                fg.g.iter()
                    .any(|(b, gb)| b != alpha && alpha.is_subset(b) && gb.as_ref().is_some_and(|gb| !wins(x, gb)));
            if !improvable {
                continue;
            }
            n += 1;
            if !wins(fx, alpha) {
                bad.push(format!("α' = {alpha}, x = {x}: f(x) loses against α'"));
                continue;
            }
            let index = strategy_below(&play(fx, alpha).maximal);
            if !is_counter_index(fg, alpha, x, &index) {
                bad.push(format!("α' = {alpha}, x = {x}: {index} is not a sequentiality index of g"));
            }
        }
    }
    entry(Axiom::RS, n, bad);

    // lubs of bounded pairs
    let (mut n, mut bad) = (0, Vec::new());
    for (x, fx) in &fg.f {
        for (y, fy) in fg.f.range(x.clone()..) {
            let join = Strategy::from_set_unchecked(x.union(y));
            let Some(fj) = fg.f.get(&join) else { continue };
            n += 1;
            let expected = Strategy::from_set_unchecked(fx.union(fy));
            if *fj != expected {
                bad.push(format!("f({x} ∪ {y}) = {fj}, expected {expected}"));
            }
        }
    }
    for (a, ga) in &fg.g {
        for (b, gb) in fg.g.range(a.clone()..) {
            let join = CounterStrategy::from_set_unchecked(a.queries().union(b.queries()).cloned().collect());
            let Some(gj) = fg.g.get(&join) else { continue };
            n += 1;
            let mut want = g_or_empty(ga.as_ref());
            want.extend(g_or_empty(gb.as_ref()));
            if g_or_empty(gj.as_ref()) != want {
                bad.push(format!("g({a} ∪ {b}) is not the union of the images"));
            }
        }
    }
    entry(Axiom::Affine, n, bad);

    // monotonicity
    let (mut n, mut bad) = (0, Vec::new());
    for (x, fx) in &fg.f {
        for (y, fy) in &fg.f {
            if x != y && x.is_subset(y) {
                n += 1;
                if !fx.is_subset(fy) {
                    bad.push(format!("{x} ⊆ {y} but f({x}) ⊄ f({y})"));
                }
            }
        }
    }
    for (a, ga) in &fg.g {
        let Some(ga) = ga else { continue };
        for (b, gb) in &fg.g {
            if a != b && a.is_subset(b) {
                n += 1;
                if !gb.as_ref().is_some_and(|gb| ga.is_subset(gb)) {
                    bad.push(format!("{a} ⊆ {b} but g({a}) ⊄ g({b})"));
                }
            }
        }
    }
    entry(Axiom::Monotone, n, bad);

    AxiomReport { entries }
}

/// `f'' = f' ∘ f` and `g'' = g ∘ g'`, with undefined values propagating.
pub fn denotational_compose(
    first: &SymmetricAlgorithm,
    second: &SymmetricAlgorithm,
) -> Result<SymmetricAlgorithm, SymmetricError> {
    if first.target != second.source {
        return Err(SymmetricError::TypeMismatch {
            left: format!("{} -o {}", first.source, first.target),
            right: format!("{} -o {}", second.source, second.target),
        });
    }
    let mut f = BTreeMap::new();
    for (x, fx) in &first.f {
        f.insert(x.clone(), second.f_at(fx)?.clone());
    }
    let mut g = BTreeMap::new();
    for (a, ga) in &second.g {
        let v = match ga {
            Some(mid) => first.g_at(mid)?.cloned(),
            None => None,
        };
        g.insert(a.clone(), v);
    }
    Ok(SymmetricAlgorithm {
        source: first.source.clone(),
        target: second.target.clone(),
        f,
        g,
        source_counters: first.source_counters.clone(),
        target_points: second.target_points.clone(),
    })
}

impl SymmetricAlgorithm {
    /// Strategies of the target, as enumerated when the pair was built.
    pub fn target_points(&self) -> &[Strategy] {
        &self.target_points
    }

    /// Counter-strategies of the source, as enumerated when the pair was built.
    pub fn source_counters(&self) -> &[CounterStrategy] {
        &self.source_counters
    }
}
