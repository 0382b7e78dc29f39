use std::collections::{BTreeSet, VecDeque};
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::Arc;
use std::thread;

use serde_json::{json, Value};

use sdsgames::server::serve;
use sdsgames::session::{Reply, Request, Store, VERBS};
use sdsgames_bohm::{EXAMPLE_M, EXAMPLE_N};
use sdsgames_core::catalog::catalog;
use sdsgames_core::engine::{legal_observer_moves, machine_run_query, machine_step, MachineState, DEFAULT_STEP_CAP};
use sdsgames_core::{Game, Move, Sds};

fn store() -> Store {
    Store::new(catalog().clone())
}

fn req(session: &str, verb: &str, payload: Value) -> Request {
    Request { session: session.into(), verb: verb.into(), payload }
}

fn compose_script(session: &str) -> Vec<Request> {
    vec![
        req(session, "start-compose", json!({ "first": "negation", "second": "negation" })),
        req(session, "observer-move", json!({ "move": "out zz" })),
        req(session, "observer-move", json!({ "move": "req ?" })),
        req(session, "observer-move", json!({ "move": "out zz" })),
        req(session, "observer-move", json!({ "move": "is tt" })),
        req(session, "state", json!({})),
    ]
}

fn bohm_script(session: &str) -> Vec<Request> {
    vec![
        req(session, "start-bohm", json!({ "m": EXAMPLE_M, "z": "z", "n": EXAMPLE_N })),
        req(session, "bohm-query", json!({ "path": [1] })),
        req(session, "bohm-query", json!({ "path": [3] })),
        req(session, "state", json!({})),
    ]
}

fn run(store: &Store, script: &[Request]) -> Vec<Reply> {
    script.iter().map(|r| store.handle(r)).collect()
}

fn strings(v: &Value) -> Vec<&str> {
    v.as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect()
}

#[test]
fn negation_twice_session() {
    let replies = run(&store(), &compose_script("a"));
    assert_eq!(strings(&replies[0].payload["legal"]), ["req ?"]);
    assert_eq!(replies[0].payload["phase"], "awaiting-observer");

    assert_eq!(replies[1].error_kind(), Some("illegal-move"));
    assert_eq!(strings(&replies[1].payload["legal"]), ["req ?"]);

    let q = &replies[2].payload;
    assert_eq!(q["phase"], "stuck-on-input");
    assert_eq!(strings(&q["legal"]), ["is ff", "is tt"]);
    let rules: Vec<u64> = q["trace"].as_array().unwrap().iter().map(|e| e["number"].as_u64().unwrap()).collect();
    assert_eq!(rules, [1, 4, 6]);

    assert_eq!(replies[3].error_kind(), Some("illegal-move"));
    assert_eq!(strings(&replies[3].payload["legal"]), ["is ff", "is tt"]);

    let a = &replies[4].payload;
    assert_eq!(a["phase"], "final-response");
    assert_eq!(a["state"]["s''"], "req ? valof ? is tt out tt");
    assert!(a["state"]["s''"].as_str().unwrap().ends_with("out tt"));
    assert!(strings(&a["legal"]).is_empty());

    let s = &replies[5].payload;
    assert_eq!(strings(&s["moves"]), ["req ?", "is tt"]);
    assert_eq!(s["trace"].as_array().unwrap().len(), 6);
    let revisions: Vec<u64> = replies.iter().map(|r| r.revision).collect();
    assert_eq!(revisions, [1, 2, 3, 4, 5, 6]);
}

#[test]
fn bohm_session() {
    let replies = run(&store(), &bohm_script("b"));
    let root = &replies[0].payload;
    assert_eq!(root["node"], json!({ "kind": "node", "binders": [], "head": "t", "children": 2 }));
    assert_eq!(root["game"]["ending"], json!({ "kind": "free-head", "head": "t" }));
    assert_eq!(replies[1].payload["node"]["head"], "n1");
    assert_eq!(replies[2].error_kind(), Some("bad-path"));
    let nodes = replies[3].payload["nodes"].as_array().unwrap();
    assert_eq!(nodes.len(), 2);
    assert_eq!(nodes[1]["path"], json!([1]));
}

#[test]
fn errors_are_replies() {
    let s = store();
    let r = s.handle(&req("c", "observer-move", json!({ "move": "req ?" })));
    assert_eq!(r.error_kind(), Some("illegal-verb"));
    assert_eq!(s.handle(&req("c", "bohm-query", json!({ "path": [] }))).error_kind(), Some("illegal-verb"));
    assert_eq!(s.handle(&req("c", "frobnicate", json!({}))).error_kind(), Some("illegal-verb"));
    let r = s.handle(&req("c", "start-compose", json!({ "first": "negation", "second": "nope" })));
    assert_eq!(r.error_kind(), Some("unknown-name"));
    let r = s.handle(&req("c", "start-compose", json!({ "first": "negation", "second": "lor" })));
    assert_eq!(r.error_kind(), Some("type-mismatch"));
    let r = s.handle(&req("c", "start-compose", json!({ "first": "negation" })));
    assert_eq!(r.error_kind(), Some("bad-request"));
    assert_eq!(s.handle(&req("c", "start-bohm", json!({ "term": "λ." }))).error_kind(), Some("parse-error"));
    assert_eq!(r.revision, 6);

    let line = s.handle_line("{not json");
    let r: Reply = serde_json::from_str(&line).unwrap();
    assert_eq!((r.error_kind(), r.revision), (Some("bad-request"), 0));
    let r: Reply = serde_json::from_str(&s.handle_line(r#"{"session":"c"}"#)).unwrap();
    assert_eq!((r.session.as_str(), r.error_kind()), ("c", Some("bad-request")));
}

#[test]
fn load_extends_only_its_session() {
    let s = store();
    let text = "algorithm twice_neg : Bool -o Bool { req ? valof ? { is tt out tt ; is ff out ff } }";
    let r = s.handle(&req("a", "load", json!({ "text": text })));
    assert_eq!(r.payload["added"], json!(["twice_neg"]));
    let r = s.handle(&req("a", "start-compose", json!({ "first": "twice_neg", "second": "negation" })));
    assert!(!r.is_error(), "{r:?}");
    let r = s.handle(&req("b", "start-compose", json!({ "first": "twice_neg", "second": "negation" })));
    assert_eq!(r.error_kind(), Some("unknown-name"));
    let r = s.handle(&req("a", "load", json!({ "text": text })));
    assert_eq!(r.error_kind(), Some("parse-error"));
    let r = s.handle(&req("a", "load", json!({ "text": "sds { }" })));
    assert!(r.payload["message"].as_str().unwrap().contains("1:5"), "{r:?}");
    let names: Vec<String> = s.handle(&req("a", "list", json!({}))).payload["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap().to_string())
        .collect();
    assert!(names.contains(&"twice_neg".to_string()) && names.contains(&"lor".to_string()));
}

/// Every move the arrow allows after `s''`, cells and values alike.
fn probes(arrow: &Sds, st: &MachineState) -> Vec<Move> {
    let mut out = arrow.successors(&st.s2);
    out.extend(arrow.successors(&[]));
    out.sort();
    out.dedup();
    out
}

#[test]
fn legal_sets_are_exactly_the_accepted_moves() {
    let mut pairs = 0;
    for (a, phi) in catalog().algorithms() {
        for (b, psi) in catalog().algorithms() {
            if phi.target() != psi.source() || phi.arrow().to_string().len() > 40 {
                continue;
            }
            pairs += 1;
            let arrow = Sds::arrow(phi.source().clone(), psi.target().clone());
            let s = store();
            let sid = format!("{a};{b}");
            s.handle(&req(&sid, "start-compose", json!({ "first": a, "second": b })));
            let mut queue = VecDeque::from([(MachineState::initial(), Vec::<Move>::new())]);
            let mut seen = BTreeSet::new();
            while let Some((st, path)) = queue.pop_front() {
                if !seen.insert(st.s2.clone()) {
                    continue;
                }
                let legal: BTreeSet<Move> = legal_observer_moves(phi, psi, &st).into_iter().collect();
                let accepted: BTreeSet<Move> =
                    probes(&arrow, &st).into_iter().filter(|m| machine_step(&st, phi, psi, Some(m)).is_ok()).collect();
                assert_eq!(legal, accepted, "{a} ; {b} at {}", st.s2);

                // the session reports the same set after replaying the path
                s.handle(&req(&sid, "start-compose", json!({ "first": a, "second": b })));
                let mut last = None;
                for m in &path {
                    last = Some(s.handle(&req(&sid, "observer-move", json!({ "move": m.to_string() }))));
                }
                let reported: BTreeSet<String> = match last {
                    Some(r) => strings(&r.payload["legal"]).into_iter().map(str::to_string).collect(),
                    None => legal.iter().map(Move::to_string).collect(),
                };
                assert_eq!(reported, legal.iter().map(Move::to_string).collect::<BTreeSet<_>>());

                for m in legal {
                    if let Ok((next, _)) = machine_run_query(phi, psi, &st, &m, DEFAULT_STEP_CAP) {
                        let mut p = path.clone();
                        p.push(m);
                        queue.push_back((next, p));
                    }
                }
            }
        }
    }
    assert!(pairs >= 20, "{pairs}");
}

/// Every interleaving of two scripts, as sequences of 0s and 1s.
fn interleavings(a: usize, b: usize) -> Vec<Vec<u8>> {
    if a == 0 || b == 0 {
        return vec![[vec![0; a], vec![1; b]].concat()];
    }
    let mut out = Vec::new();
    for mut rest in interleavings(a - 1, b) {
        rest.insert(0, 0);
        out.push(rest);
    }
    for mut rest in interleavings(a, b - 1) {
        rest.insert(0, 1);
        out.push(rest);
    }
    out
}

#[test]
fn sessions_are_independent() {
    let (x, y) = (compose_script("x"), bohm_script("y"));
    let (serial_x, serial_y) = (run(&store(), &x), run(&store(), &y));
    let orders = interleavings(x.len(), y.len());
    assert_eq!(orders.len(), 210);
    for order in orders {
        let s = store();
        let (mut i, mut j) = (0, 0);
        let (mut got_x, mut got_y) = (Vec::new(), Vec::new());
        for side in order {
            if side == 0 {
                got_x.push(s.handle(&x[i]));
                i += 1;
            } else {
                got_y.push(s.handle(&y[j]));
                j += 1;
            }
        }
        assert_eq!(got_x, serial_x);
        assert_eq!(got_y, serial_y);
    }
}

#[test]
fn server_speaks_json_lines() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || serve(listener, Arc::new(store())));
    let clients: Vec<_> = [compose_script("p"), bohm_script("q")]
        .into_iter()
        .map(|script| {
            thread::spawn(move || {
                let mut conn = TcpStream::connect(addr).unwrap();
                let mut lines = BufReader::new(conn.try_clone().unwrap()).lines();
                let mut replies = Vec::new();
                for r in &script {
                    writeln!(conn, "{}", serde_json::to_string(r).unwrap()).unwrap();
                    let line = lines.next().unwrap().unwrap();
                    replies.push(serde_json::from_str::<Reply>(&line).unwrap());
                }
                (script, replies)
            })
        })
        .collect();
    for c in clients {
        let (script, replies) = c.join().unwrap();
        assert_eq!(replies, run(&store(), &script));
    }
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Replays `script` and compares with the recorded transcript, one
/// `{"request", "reply"}` object per line. `UPDATE_GOLDEN=1` rewrites it.
fn check_transcript(name: &str, script: &[Request]) -> Vec<Value> {
    let replies = run(&store(), script);
    let lines: Vec<Value> = script.iter().zip(&replies).map(|(q, r)| json!({ "request": q, "reply": r })).collect();
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        let text: String = lines.iter().map(|l| format!("{}\n", serde_json::to_string(l).unwrap())).collect();
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, text).unwrap();
    }
    let recorded: Vec<Value> = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(recorded, lines, "{name} drifted from its recording");
    lines
}

/// Checks `v` against the keywords the schema file uses: `$ref` into
/// `$defs`, `type`, `enum`, `const`, `required`, `properties`,
/// `additionalProperties: false`, `items`, `minimum`, `maximum`, `allOf`,
/// `oneOf` and `if`/`then`.
struct Schema {
    root: Value,
}

impl Schema {
    fn load() -> Schema {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schema/session.schema.json");
        let root: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        let verbs: Vec<&str> = strings(&root["$defs"]["request"]["properties"]["verb"]["enum"]);
        assert_eq!(verbs, VERBS);
        Schema { root }
    }

    fn is_valid(&self, v: &Value) -> bool {
        self.errors(&self.root, v, "$").is_empty()
    }

    fn errors(&self, s: &Value, v: &Value, at: &str) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(r) = s.get("$ref").and_then(Value::as_str) {
            let name = r.strip_prefix("#/$defs/").expect("local refs only");
            return self.errors(&self.root["$defs"][name], v, at);
        }
        if let Some(t) = s.get("type").and_then(Value::as_str) {
            let ok = match t {
                "object" => v.is_object(),
                "array" => v.is_array(),
                "string" => v.is_string(),
                "integer" => v.is_u64() || v.is_i64(),
                other => panic!("type {other} not used"),
            };
            if !ok {
                out.push(format!("{at}: not {t}"));
                return out;
            }
        }
        if let Some(e) = s.get("enum").and_then(Value::as_array) {
            if !e.contains(v) {
                out.push(format!("{at}: {v} not in {e:?}"));
            }
        }
        if let Some(c) = s.get("const") {
            if c != v {
                out.push(format!("{at}: {v} is not {c}"));
            }
        }
        if let Some(n) = s.get("minimum").and_then(Value::as_i64) {
            if v.as_i64().is_some_and(|x| x < n) {
                out.push(format!("{at}: below {n}"));
            }
        }
        if let Some(n) = s.get("maximum").and_then(Value::as_i64) {
            if v.as_i64().is_some_and(|x| x > n) {
                out.push(format!("{at}: above {n}"));
            }
        }
        if let Some(obj) = v.as_object() {
            for r in s.get("required").and_then(Value::as_array).into_iter().flatten() {
                if !obj.contains_key(r.as_str().unwrap()) {
                    out.push(format!("{at}: missing {r}"));
                }
            }
            let props = s.get("properties").and_then(Value::as_object);
            for (k, x) in obj {
                match props.and_then(|p| p.get(k)) {
                    Some(ps) => out.extend(self.errors(ps, x, &format!("{at}.{k}"))),
                    None if s.get("additionalProperties") == Some(&Value::Bool(false)) => {
                        out.push(format!("{at}: unexpected {k}"))
                    }
                    None => {}
                }
            }
        }
        if let (Some(items), Some(xs)) = (s.get("items"), v.as_array()) {
            for (i, x) in xs.iter().enumerate() {
                out.extend(self.errors(items, x, &format!("{at}[{i}]")));
            }
        }
        for sub in s.get("allOf").and_then(Value::as_array).into_iter().flatten() {
            out.extend(self.errors(sub, v, at));
        }
        if let Some(alts) = s.get("oneOf").and_then(Value::as_array) {
            let n = alts.iter().filter(|a| self.errors(a, v, at).is_empty()).count();
            if n != 1 {
                out.push(format!("{at}: matches {n} alternatives of oneOf"));
            }
        }
        if let (Some(cond), Some(then)) = (s.get("if"), s.get("then")) {
            if self.errors(cond, v, at).is_empty() {
                out.extend(self.errors(then, v, at));
            }
        }
        out
    }
}

#[test]
fn golden_transcripts_replay_and_match_the_schema() {
    let v = Schema::load();
    let mut lines = check_transcript("compose_negation.jsonl", &compose_script("ui"));
    lines.extend(check_transcript("bohm_example.jsonl", &bohm_script("ui")));
    for l in &lines {
        for part in ["request", "reply"] {
            let errs = v.errors(&v.root, &l[part], "$");
            assert!(errs.is_empty(), "{part} {}: {errs:?}", l[part]);
        }
    }
    let bad = json!({ "session": "x", "verb": "observer-move", "payload": {} });
    assert!(!v.is_valid(&bad));
    let s = store();
    let replies = [
        s.handle(&req("z", "list", json!({}))),
        s.handle(&req("z", "state", json!({}))),
        s.handle(&req("z", "load", json!({ "text": "sds Unit { cell u }" }))),
    ];
    for r in replies {
        assert!(v.is_valid(&serde_json::to_value(&r).unwrap()), "{r:?}");
    }
}
