//! The acceptance checks, runnable from the CLI and from the test suite.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use sdsgames_bohm::corpus::simple_case_corpus;
use sdsgames_bohm::{
    head_normalize, parse_term, token_game_trace, BohmNode, Ending, Explorer, DEFAULT_FUEL, EXAMPLE_M, EXAMPLE_N,
};
use sdsgames_core::behaviour::{enumerate_strategies, validate_strategy};
use sdsgames_core::catalog::catalog;
use sdsgames_core::constructors::promote_point;
use sdsgames_core::engine::{apply, copycat_id, machine_compose, validate_affine, Algorithm, DEFAULT_STEP_CAP};
use sdsgames_core::equality::compare;
use sdsgames_core::symmetric::{check_axioms, denotational_compose, from_symmetric, to_symmetric};
use sdsgames_core::syntax::parse_position;
use sdsgames_core::table::{function_table, search_by_table, FunctionTable};
use sdsgames_core::{Game, Sds, Strategy};

pub struct Check {
    pub name: &'static str,
    pub limit: Duration,
    pub run: fn() -> Result<String, String>,
}

pub struct Outcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {} ({:.2}s): {}", self.name, self.elapsed.as_secs_f64(), self.detail)
    }
}

impl Check {
    /// Runs the check. Overrunning the time limit counts as a failure.
    pub fn run(&self) -> Outcome {
        let start = Instant::now();
        let result = (self.run)();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(d) if elapsed <= self.limit => (true, d),
            Ok(d) => (false, format!("{d}; over the {}s limit", self.limit.as_secs())),
            Err(e) => (false, e),
        };
        Outcome { name: self.name, passed, detail, elapsed }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sds(name: &str) -> Result<Sds, String> {
    catalog().sds(name).cloned().map_err(|e| e.to_string())
}

fn alg(name: &str) -> Result<Algorithm, String> {
    catalog().algorithm(name).cloned().map_err(|e| e.to_string())
}

fn point(game: &dyn Game, words: &[&str]) -> Result<Strategy, String> {
    let set = words.iter().map(|w| parse_position(game, w)).collect::<Result<BTreeSet<_>, _>>()?;
    validate_strategy(game, set).map_err(|e| e.to_string())
}

fn table(alg_name: &str) -> Result<FunctionTable, String> {
    function_table(&alg(alg_name)?).map_err(|e| e.to_string())
}

fn cell<'a>(t: &'a FunctionTable, args: &[&str]) -> Option<&'a str> {
    let point: Vec<Option<String>> = args.iter().map(|a| (*a != "_").then(|| a.to_string())).collect();
    t.get(&point)
}

fn show(v: Option<&str>) -> &str {
    v.unwrap_or("⊥")
}

fn bool_and_o3() -> Result<String, String> {
    let b = sds("Bool")?;
    let db: BTreeSet<Strategy> = enumerate_strategies(&b, 100).map_err(|e| e.to_string())?.into_iter().collect();
    let expected: BTreeSet<Strategy> = [Strategy::empty(), point(&b, &["? tt"])?, point(&b, &["? ff"])?].into();
    ensure(db == expected, || format!("D(Bool) has {} elements", db.len()))?;
    let o3 = sds("O3")?;
    let d3 = enumerate_strategies(&o3, 100).map_err(|e| e.to_string())?;
    ensure(d3.len() == 3, || format!("o -> o -> o has {} strategies", d3.len()))?;
    // inclusion order: one bottom below two incomparable maximal elements
    let below = |xs: &[Strategy]| {
        let mut shape: Vec<usize> = xs.iter().map(|x| xs.iter().filter(|y| x.is_subset(y)).count()).collect();
        shape.sort();
        shape
    };
    let db: Vec<Strategy> = db.into_iter().collect();
    ensure(below(&db) == below(&d3), || "the two orders differ".into())?;
    Ok("3 strategies each, one bottom below two maximal ones".into())
}

fn full_abstraction() -> Result<String, String> {
    let b = sds("Bool")?;
    let all: Vec<Algorithm> = enumerate_strategies(&Sds::arrow(b.clone(), b.clone()), 1000)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|s| Algorithm::new_unchecked(b.clone(), b.clone(), s))
        .collect();
    ensure(all.len() == 12, || format!("{} algorithms of Bool -o Bool", all.len()))?;
    let mut pairs = 0;
    for phi in &all {
        let fg_phi = to_symmetric(phi, 1000).map_err(|e| e.to_string())?;
        let back = from_symmetric(&fg_phi).map_err(|e| e.to_string())?;
        ensure(back == *phi, || format!("roundtrip changes {phi:?}"))?;
        for psi in &all {
            let c = machine_compose(phi, psi, DEFAULT_STEP_CAP).map_err(|e| e.to_string())?;
            let fg_psi = to_symmetric(psi, 1000).map_err(|e| e.to_string())?;
            let den = denotational_compose(&fg_phi, &fg_psi).map_err(|e| e.to_string())?;
            let op = to_symmetric(&c, 1000).map_err(|e| e.to_string())?;
            ensure(op == den, || format!("{phi:?} then {psi:?}: the two compositions differ"))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} pairs agree, 12 roundtrips"))
}

fn negation_twice() -> Result<String, String> {
    let neg = alg("negation")?;
    let c = machine_compose(&neg, &neg, DEFAULT_STEP_CAP).map_err(|e| e.to_string())?;
    let id = copycat_id(&sds("Bool")?, 100).map_err(|e| e.to_string())?;
    ensure(c.strategy() == id.strategy(), || format!("got {}", c.strategy()))?;
    Ok(format!("{} responses, equal to copycat", c.strategy().len()))
}

fn or_tables() -> Result<String, String> {
    let lor = table("lor")?;
    let ror = table("ror")?;
    ensure(lor == *catalog().table("lor_spec").map_err(|e| e.to_string())?, || "lor table".into())?;
    ensure(ror == *catalog().table("ror_spec").map_err(|e| e.to_string())?, || "ror table".into())?;
    let rows: [(&FunctionTable, [&str; 2], Option<&str>); 8] = [
        (&lor, ["tt", "_"], Some("tt")),
        (&lor, ["ff", "_"], None),
        (&lor, ["ff", "tt"], Some("tt")),
        (&lor, ["ff", "ff"], Some("ff")),
        (&ror, ["_", "tt"], Some("tt")),
        (&ror, ["tt", "_"], None),
        (&ror, ["tt", "ff"], Some("tt")),
        (&ror, ["ff", "ff"], Some("ff")),
    ];
    for (t, args, want) in rows {
        let got = cell(t, &args);
        ensure(got == want, || format!("at {args:?}: {} instead of {}", show(got), show(want)))?;
    }
    let (lsor, rsor) = (alg("lsor")?, alg("rsor")?);
    ensure(lsor.strategy() != rsor.strategy(), || "lsor and rsor coincide".into())?;
    let sor = catalog().table("sor").map_err(|e| e.to_string())?;
    ensure(table("lsor")? == *sor && table("rsor")? == *sor, || "strict ors do not compute sor".into())?;
    Ok("lor/ror match their specifications; lsor != rsor, both compute sor".into())
}

fn por_search() -> Result<String, String> {
    let (b2, b) = (sds("Bool2")?, sds("Bool")?);
    let por = catalog().table("por").map_err(|e| e.to_string())?;
    let found = search_by_table(por, &Sds::bang(b2), &b, 1_000_000).map_err(|e| e.to_string())?;
    ensure(found.is_empty(), || format!("{} sequential algorithms compute por", found.len()))?;
    Ok("no sequential algorithm of !(Bool x Bool) -o Bool computes por".into())
}

fn separator() -> Result<String, String> {
    let (sep, b) = (alg("separator")?, sds("Bool")?);
    let l = apply(&sep, &promote_point(alg("lsor")?.strategy()));
    let r = apply(&sep, &promote_point(alg("rsor")?.strategy()));
    ensure(l == point(&b, &["? tt"])?, || format!("lsor gives {l}"))?;
    ensure(r == point(&b, &["? ff"])?, || format!("rsor gives {r}"))?;
    Ok(format!("lsor -> {l}, rsor -> {r}"))
}

fn bool_iso() -> Result<String, String> {
    let (ite, catch) = (alg("if_then_else")?, alg("catch")?);
    let (b, o3) = (sds("Bool")?, sds("O3")?);
    let one = machine_compose(&ite, &catch, DEFAULT_STEP_CAP).map_err(|e| e.to_string())?;
    let two = machine_compose(&catch, &ite, DEFAULT_STEP_CAP).map_err(|e| e.to_string())?;
    ensure(one == copycat_id(&b, 100).map_err(|e| e.to_string())?, || "catch after if-then-else".into())?;
    ensure(two == copycat_id(&o3, 100).map_err(|e| e.to_string())?, || "if-then-else after catch".into())?;
    Ok("both composites are copycat".into())
}

fn callcc() -> Result<String, String> {
    let cc = alg("callcc")?;
    let ty = cc.arrow().to_string();
    validate_affine(cc.strategy().responses().clone(), cc.source(), cc.target()).map_err(|e| e.to_string())?;
    let b = sds("Bool")?;
    let arg_type = cc.source().bang_inner().ok_or("callcc does not read a bang")?.clone();
    for v in ["tt", "ff"] {
        let returns = point(&arg_type, &[&format!("req ? out {v}")])?;
        let throws = point(
            &arg_type,
            &[
                "req ? valof <req ?>",
                &format!("req ? valof <req ?> is <req ? valof <?>> valof <req ? valof <?> is <? {v}>>"),
            ],
        )?;
        let want = point(&b, &[&format!("? {v}")])?;
        for (how, x) in [("returning", &returns), ("throwing", &throws)] {
            let got = apply(&cc, &promote_point(x));
            ensure(got == want, || format!("{how} {v}: got {got}"))?;
        }
    }
    Ok(format!("validates at {ty}; returning and throwing yield the fed boolean"))
}

fn err_tables() -> Result<String, String> {
    let (l, r) = (table("lsor_err")?, table("rsor_err")?);
    let (lv, rv) = (cell(&l, &["err", "_"]), cell(&r, &["err", "_"]));
    ensure(lv == Some("err"), || format!("lsor_err(err, ⊥) = {}", show(lv)))?;
    ensure(rv.is_none(), || format!("rsor_err(err, ⊥) = {}", show(rv)))?;
    Ok("lsor_err(err, ⊥) = err, rsor_err(err, ⊥) = ⊥".into())
}

fn token_game() -> Result<String, String> {
    let (m, n) = (parse_term(EXAMPLE_M).map_err(|e| e.to_string())?, parse_term(EXAMPLE_N).map_err(|e| e.to_string())?);
    let trace = token_game_trace(&m, "z", &n, DEFAULT_FUEL).map_err(|e| e.to_string())?;
    let want = "M:z N:λx1 x2 x3. N:x3 M:λz1 z2. M:z1 N:λy1 y2. N:y1 M:λu. M:t";
    ensure(trace.to_string() == want, || format!("trace {trace}"))?;
    ensure(trace.ending == Ending::FreeHead { head: "t".into() }, || format!("{:?}", trace.ending))?;
    let mut ex = Explorer::new(m.subst("z", &n), DEFAULT_FUEL);
    let root = ex.expand(&[]).map_err(|e| e.to_string())?;
    ensure(matches!(&root, BohmNode::Node { head, children: 2, .. } if head == "t"), || format!("root {root:?}"))?;
    let corpus = simple_case_corpus(1, 200);
    for p in &corpus {
        let t = token_game_trace(&p.m, "z", &p.n, DEFAULT_FUEL).map_err(|e| format!("{} / {}: {e}", p.m, p.n))?;
        let hnf = head_normalize(&p.m.subst("z", &p.n), DEFAULT_FUEL).map_err(|e| e.to_string())?.hnf;
        let agrees = match &t.ending {
            Ending::FreeHead { head } => *head == hnf.head && !hnf.binders.contains(head),
            Ending::CannotMove { .. } => hnf.binders.contains(&hnf.head),
        };
        ensure(agrees, || format!("{} / {}: game {:?}, reduction head {}", p.m, p.n, t.ending, hnf.head))?;
    }
    Ok(format!("example trace exact; {} corpus pairs agree with reduction", corpus.len()))
}

fn axiom_suite() -> Result<String, String> {
    let (mut checked, mut skipped) = (Vec::new(), Vec::new());
    for (name, a) in catalog().algorithms() {
        match to_symmetric(a, 100_000) {
            Ok(fg) => {
                let report = check_axioms(&fg);
                ensure(report.holds(), || format!("{name}:\n{report}"))?;
                checked.push(name);
            }
            Err(_) => skipped.push(name),
        }
    }
    let id = copycat_id(&sds("Bool")?, 100).map_err(|e| e.to_string())?;
    let fg = to_symmetric(&id, 100).map_err(|e| e.to_string())?;
    ensure(check_axioms(&fg).holds(), || "copycat of Bool".into())?;
    ensure(checked.len() >= 9, || format!("only {} algorithms tabulated", checked.len()))?;
    Ok(format!(
        "{} algorithms with zero violations; beyond the tabulation budget: {}",
        checked.len(),
        if skipped.is_empty() { "none".to_string() } else { skipped.join(", ") }
    ))
}

fn decidability() -> Result<String, String> {
    let (sep, rev, k) = (alg("separator")?, alg("separator_rev")?, alg("probe_const")?);
    let mut verdicts = Vec::new();
    for (a, b, x, y) in [
        ("separator", "separator", &sep, &sep),
        ("separator", "separator_rev", &sep, &rev),
        ("separator", "probe_const", &sep, &k),
    ] {
        let c = compare(x, y, 1_000_000).map_err(|e| e.to_string())?;
        let expect_equal = a == b;
        ensure(c.equal == expect_equal, || format!("{a} vs {b}: equal = {}", c.equal))?;
        ensure(c.same_function() == expect_equal, || format!("{a} vs {b}: pointwise verdict"))?;
        verdicts.push(format!("{a}{}{b}", if c.equal { " = " } else { " != " }));
    }
    Ok(format!(
        "{} over {} points",
        verdicts.join(", "),
        enumerate_strategies(sep.source().bang_inner().ok_or("no bang")?, 1_000_000).map_err(|e| e.to_string())?.len()
    ))
}

pub fn checks() -> Vec<Check> {
    let secs = Duration::from_secs;
    vec![
        Check {
            name: "Bool has three strategies, as has o -> o -> o, in the same order",
            limit: secs(1),
            run: bool_and_o3,
        },
        Check {
            name: "machine and function composition agree on 144 pairs; roundtrip",
            limit: secs(10),
            run: full_abstraction,
        },
        Check { name: "negation composed with negation is copycat", limit: secs(1), run: negation_twice },
        Check { name: "or tables: lor, ror, lsor/rsor", limit: secs(5), run: or_tables },
        Check { name: "parallel or is not sequential", limit: secs(300), run: por_search },
        Check { name: "separator maps lsor to tt and rsor to ff", limit: secs(1), run: separator },
        Check { name: "catch and if-then-else are inverse", limit: secs(1), run: bool_iso },
        Check { name: "call-cc validates and follows its branches", limit: secs(5), run: callcc },
        Check { name: "err separates lsor and rsor", limit: secs(1), run: err_tables },
        Check { name: "token game on the example and on 200 generated pairs", limit: secs(30), run: token_game },
        Check { name: "axioms hold for the catalog algorithms", limit: secs(60), run: axiom_suite },
        Check { name: "equality at (Bool x Bool -> Bool) -> Bool is decided", limit: secs(60), run: decidability },
    ]
}
