use std::io::{BufRead, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use sdsgames::config::configured_catalog;
use sdsgames::server::serve;
use sdsgames::session::{Request, Store};
use sdsgames::verify::checks;
use sdsgames_bohm::{parse_term, BohmNode, Explorer, DEFAULT_FUEL, EXAMPLE_M, EXAMPLE_N};
use sdsgames_core::behaviour::{enumerate_strategies, play};
use sdsgames_core::catalog::Catalog;
use sdsgames_core::engine::{
    legal_observer_moves, machine_compose, machine_run_query, validate_affine, MachineState, DEFAULT_STEP_CAP,
};
use sdsgames_core::syntax::{chains, parse_move, Item};
use sdsgames_core::table::{function_table, search_by_table};
use sdsgames_core::{Sds, DEFAULT_BUDGET};

#[derive(Parser)]
#[command(name = "sdsgames", version, about = "Sequential data structures, sequential algorithms and Böhm trees")]
struct Cli {
    /// Extra definitions file loaded on top of the catalog; repeatable
    #[arg(long = "defs", global = true)]
    defs: Vec<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a definitions file
    Check { file: PathBuf },
    /// List the strategies of a structure or type expression
    Enum {
        name: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Play a strategy against a counter-strategy
    Play { strategy: String, counter: String },
    /// Compose two algorithms on the abstract machine
    Compose {
        first: String,
        second: String,
        /// Observer move, in order; repeat for several
        #[arg(long = "query")]
        queries: Vec<String>,
        /// Print the whole composite
        #[arg(long)]
        exhaustive: bool,
    },
    /// Print the function table of an algorithm or a declared table
    Table { name: String },
    /// Find every algorithm of a type with a given table
    Search {
        table: String,
        #[arg(value_name = "TYPE")]
        ty: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Expand one node of the Böhm tree of a term (`example` for the two-token example)
    Bohm {
        term: String,
        /// Child numbers from 1, dot separated
        #[arg(long)]
        path: Option<String>,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
    /// Interactive session on standard input
    Explore,
    /// Serve the session protocol over TCP on localhost
    Serve {
        #[arg(long)]
        port: u16,
    },
    /// Run the acceptance checks
    Verify,
}

fn violation(msg: impl std::fmt::Display) -> Result<ExitCode> {
    eprintln!("{msg}");
    Ok(ExitCode::from(1))
}

fn check(cat: &Catalog, file: &PathBuf) -> Result<ExitCode> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let before = cat.document().items.len();
    let next = match cat.extend(&text) {
        Ok(c) => c,
        Err(e) => return violation(format!("{}: {e}", file.display())),
    };
    for item in &next.document().items[before..] {
        if let Item::Algorithm { name, algorithm, .. } = item {
            let resp = algorithm.strategy().responses().clone();
            if let Err(e) = validate_affine(resp, algorithm.source(), algorithm.target()) {
                return violation(format!("{name}: {e}"));
            }
        }
        let e = next.get(item.name())?;
        println!("{} {}: {}", e.kind, e.name, e.summary);
    }
    println!("ok");
    Ok(ExitCode::SUCCESS)
}

fn enumerate(cat: &Catalog, name: &str, budget: usize) -> Result<ExitCode> {
    let sds = cat.document().eval_type(name).map_err(|e| anyhow!("{name}: {e}"))?;
    let all = match enumerate_strategies(&sds, budget) {
        Ok(a) => a,
        Err(e) => return violation(e),
    };
    println!("{} strategies of {sds}", all.len());
    for x in &all {
        println!("{x}");
    }
    Ok(ExitCode::SUCCESS)
}

fn play_cmd(cat: &Catalog, strategy: &str, counter: &str) -> Result<ExitCode> {
    let doc = cat.document();
    let Some(Item::Strategy { strategy: x, sds: sx, .. }) = doc.get(strategy) else {
        bail!("no strategy named `{strategy}`");
    };
    let Some(Item::Counter { counter: alpha, sds: sa, .. }) = doc.get(counter) else {
        bail!("no counter-strategy named `{counter}`");
    };
    if sx != sa {
        bail!("`{strategy}` plays on {sx} but `{counter}` on {sa}");
    }
    let r = play(x, alpha);
    println!("play: {}", r.maximal);
    println!("winner: {:?}", r.winner);
    Ok(ExitCode::SUCCESS)
}

fn compose(cat: &Catalog, first: &str, second: &str, queries: &[String], exhaustive: bool) -> Result<ExitCode> {
    let phi = cat.algorithm(first)?;
    let psi = cat.algorithm(second)?;
    if phi.target() != psi.source() {
        bail!("{first} : {} does not compose with {second} : {}", phi.arrow(), psi.arrow());
    }
    let arrow = Sds::arrow(phi.source().clone(), psi.target().clone());
    let mut st = MachineState::initial();
    for q in queries {
        let m = match parse_move(&arrow, &st.s2, q) {
            Ok(m) => m,
            Err(e) => return violation(e),
        };
        let trace = match machine_run_query(phi, psi, &st, &m, DEFAULT_STEP_CAP) {
            Ok((next, trace)) => {
                st = next;
                trace
            }
            Err(e) => return violation(e),
        };
        println!("> {m}");
        for e in trace {
            println!(
                "  ({}) {:<18} s = {} | s' = {} | s'' = {}",
                e.rule.number(),
                format!("{:?}", e.rule),
                e.s,
                e.s1,
                e.s2
            );
        }
        let legal: Vec<String> = legal_observer_moves(phi, psi, &st).iter().map(ToString::to_string).collect();
        println!("  phase {}; legal: {}", st.phase, if legal.is_empty() { "none".into() } else { legal.join(", ") });
    }
    if exhaustive || queries.is_empty() {
        match machine_compose(phi, psi, DEFAULT_STEP_CAP) {
            Ok(c) => {
                println!("{first} ; {second} : {}", c.arrow());
                println!("{}", chains(c.strategy().responses()));
            }
            Err(e) => return violation(e),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn table(cat: &Catalog, name: &str) -> Result<ExitCode> {
    if let Ok(t) = cat.table(name) {
        print!("{t}");
        return Ok(ExitCode::SUCCESS);
    }
    let a = cat.algorithm(name)?;
    match function_table(a) {
        Ok(t) => print!("{t}"),
        Err(e) => return violation(e),
    }
    Ok(ExitCode::SUCCESS)
}

fn search(cat: &Catalog, name: &str, ty: &str, budget: usize) -> Result<ExitCode> {
    let t = cat.table(name)?;
    let sds = cat.document().eval_type(ty).map_err(|e| anyhow!("{ty}: {e}"))?;
    let (src, tgt) = sds.arrow_parts().ok_or_else(|| anyhow!("{ty} is not an arrow type"))?;
    let found = match search_by_table(t, src, tgt, budget) {
        Ok(f) => f,
        Err(e) => return violation(e),
    };
    println!("{} algorithms of {sds} compute {name}", found.len());
    for a in &found {
        println!("--");
        println!("{}", chains(a.strategy().responses()));
    }
    Ok(ExitCode::SUCCESS)
}

fn show_node(node: &BohmNode) -> String {
    match node {
        BohmNode::Node { binders, head, children } => {
            let lam = if binders.is_empty() { String::new() } else { format!("λ{}. ", binders.join(" ")) };
            format!("{lam}{head} [{children} children]")
        }
        BohmNode::Divergent { fuel } => format!("divergent (no head normal form in {fuel} steps)"),
    }
}

fn bohm(term: &str, path: Option<&str>, fuel: usize) -> Result<ExitCode> {
    let t = if term == "example" {
        parse_term(EXAMPLE_M)?.subst("z", &parse_term(EXAMPLE_N)?)
    } else {
        parse_term(term).map_err(|e| anyhow!("{term}: {e}"))?
    };
    let path: Vec<usize> = match path {
        None | Some("") => Vec::new(),
        Some(p) => p.split('.').map(|i| i.parse().with_context(|| format!("bad path {p}"))).collect::<Result<_>>()?,
    };
    let mut ex = Explorer::new(t, fuel);
    for depth in 0..=path.len() {
        match ex.expand(&path[..depth]) {
            Ok(node) => println!("{:<8} {}", format!("[{}]", join_path(&path[..depth])), show_node(&node)),
            Err(e) => return violation(e),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn join_path(p: &[usize]) -> String {
    p.iter().map(ToString::to_string).collect::<Vec<_>>().join(".")
}

/// Turns a REPL line into a protocol request: raw JSON passes through.
fn repl_request(line: &str) -> Result<Request> {
    if line.starts_with('{') {
        return Ok(serde_json::from_str(line)?);
    }
    let (word, rest) = line.split_once(' ').map(|(a, b)| (a, b.trim())).unwrap_or((line, ""));
    let (verb, payload) = match word {
        "list" | "state" => (word, json!({})),
        "load" => ("load", json!({ "text": std::fs::read_to_string(rest).with_context(|| format!("reading {rest}"))? })),
        "compose" => {
            let (a, b) = rest.split_once(' ').ok_or_else(|| anyhow!("compose FIRST SECOND"))?;
            ("start-compose", json!({ "first": a, "second": b.trim() }))
        }
        "move" => ("observer-move", json!({ "move": rest })),
        "bohm" if rest == "example" => ("start-bohm", json!({ "m": EXAMPLE_M, "z": "z", "n": EXAMPLE_N })),
        "bohm" => ("start-bohm", json!({ "term": rest })),
        "expand" => {
            let path: Vec<usize> = if rest.is_empty() {
                Vec::new()
            } else {
                rest.split('.').map(str::parse).collect::<Result<_, _>>().context("path like 1.2")?
            };
            ("bohm-query", json!({ "path": path }))
        }
        _ => bail!("commands: list, state, load FILE, compose A B, move MOVE, bohm TERM|example, expand PATH, or a JSON request"),
    };
    Ok(Request { session: "repl".into(), verb: verb.into(), payload })
}

fn explore(store: &Store) -> Result<ExitCode> {
    let stdin = std::io::stdin();
    let mut out = std::io::stdout();
    write!(out, "> ")?;
    out.flush()?;
    for line in stdin.lock().lines() {
        let line = line?;
        let line = line.trim();
        if line == "quit" {
            break;
        }
        if !line.is_empty() {
            match repl_request(line) {
                Ok(req) => {
                    let reply = store.handle(&req);
                    let v: Value = serde_json::to_value(&reply)?;
                    writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
                }
                Err(e) => writeln!(out, "{e}")?,
            }
        }
        write!(out, "> ")?;
        out.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}

fn verify() -> ExitCode {
    let mut failed = 0;
    for c in checks() {
        let o = c.run();
        println!("{o}");
        failed += usize::from(!o.passed);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Command::Verify = cli.command {
        return Ok(verify());
    }
    if let Command::Bohm { term, path, fuel } = &cli.command {
        return bohm(term, path.as_deref(), *fuel);
    }
    let mut cat = configured_catalog()?;
    for f in &cli.defs {
        let text = std::fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
        cat = cat.extend(&text).with_context(|| format!("loading {}", f.display()))?;
    }
    match cli.command {
        Command::Check { file } => check(&cat, &file),
        Command::Enum { name, budget } => enumerate(&cat, &name, budget),
        Command::Play { strategy, counter } => play_cmd(&cat, &strategy, &counter),
        Command::Compose { first, second, queries, exhaustive } => compose(&cat, &first, &second, &queries, exhaustive),
        Command::Table { name } => table(&cat, &name),
        Command::Search { table, ty, budget } => search(&cat, &table, &ty, budget),
        Command::Explore => explore(&Store::new(cat)),
        Command::Serve { port } => {
            let listener = TcpListener::bind(("127.0.0.1", port)).with_context(|| format!("binding port {port}"))?;
            eprintln!("listening on {}", listener.local_addr()?);
            serve(listener, Arc::new(Store::new(cat)))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify | Command::Bohm { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
