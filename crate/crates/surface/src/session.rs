//! The observer protocol: one JSON request per line, one JSON reply per request.
//!
//! Every reply carries the session id and a revision that grows by one with
//! each reply of that session. Failures are replies with verb `error`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use sdsgames_bohm::{parse_term, token_game_trace, BohmNode, Explorer, Term, DEFAULT_FUEL};
use sdsgames_core::catalog::Catalog;
use sdsgames_core::engine::{
    legal_observer_moves, machine_run_query, Algorithm, EngineError, MachineState, TraceEntry, DEFAULT_STEP_CAP,
};
use sdsgames_core::syntax::parse_move;
use sdsgames_core::Sds;

pub const VERBS: [&str; 7] = ["load", "list", "start-compose", "observer-move", "state", "start-bohm", "bohm-query"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub session: String,
    pub verb: String,
    #[serde(default)]
    pub payload: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reply {
    pub session: String,
    pub verb: String,
    pub revision: u64,
    pub payload: Value,
}

impl Reply {
    pub fn is_error(&self) -> bool {
        self.verb == "error"
    }

    /// The error kind, for error replies.
    pub fn error_kind(&self) -> Option<&str> {
        if !self.is_error() {
            return None;
        }
        self.payload.get("kind").and_then(Value::as_str)
    }
}

#[derive(Debug)]
struct Failure {
    kind: &'static str,
    message: String,
    legal: Option<Vec<String>>,
}

fn fail(kind: &'static str, message: impl Into<String>) -> Failure {
    Failure { kind, message: message.into(), legal: None }
}

struct Compose {
    first: String,
    second: String,
    phi: Algorithm,
    psi: Algorithm,
    arrow: Sds,
    state: MachineState,
    moves: Vec<String>,
    trace: Vec<TraceEntry>,
}

impl Compose {
    fn legal(&self) -> Vec<String> {
        legal_observer_moves(&self.phi, &self.psi, &self.state).iter().map(ToString::to_string).collect()
    }

    fn view(&self) -> Value {
        json!({
            "mode": "compose",
            "first": self.first,
            "second": self.second,
            "moves": self.moves,
            "state": state_json(&self.state),
            "phase": self.state.phase.to_string(),
            "legal": self.legal(),
            "trace": trace_json(&self.trace),
        })
    }
}

struct Bohm {
    term: Term,
    explorer: Explorer,
    disclosed: Vec<(Vec<usize>, BohmNode)>,
}

impl Bohm {
    fn view(&self) -> Value {
        let nodes: Vec<Value> = self.disclosed.iter().map(|(p, n)| json!({ "path": p, "node": n })).collect();
        json!({ "mode": "bohm", "term": self.term.to_string(), "nodes": nodes })
    }
}

enum Mode {
    Idle,
    Compose(Box<Compose>),
    Bohm(Box<Bohm>),
}

pub struct Session {
    catalog: Arc<Catalog>,
    mode: Mode,
    revision: u64,
}

fn state_json(st: &MachineState) -> Value {
    json!({ "s": st.s.to_string(), "s'": st.s1.to_string(), "s''": st.s2.to_string() })
}

fn trace_json(trace: &[TraceEntry]) -> Value {
    trace
        .iter()
        .map(|e| {
            json!({
                "rule": e.rule,
                "number": e.rule.number(),
                "s": e.s.to_string(),
                "s'": e.s1.to_string(),
                "s''": e.s2.to_string(),
            })
        })
        .collect()
}

fn field<'a>(payload: &'a Value, name: &str) -> Result<&'a str, Failure> {
    payload
        .get(name)
        .and_then(Value::as_str)
        .ok_or_else(|| fail("bad-request", format!("payload needs a string field `{name}`")))
}

impl Session {
    pub fn new(catalog: Arc<Catalog>) -> Session {
        Session { catalog, mode: Mode::Idle, revision: 0 }
    }

    pub fn handle(&mut self, req: &Request) -> Reply {
        let result = match req.verb.as_str() {
            "load" => self.load(&req.payload),
            "list" => Ok(self.list()),
            "start-compose" => self.start_compose(&req.payload),
            "observer-move" => self.observer_move(&req.payload),
            "state" => Ok(self.state()),
            "start-bohm" => self.start_bohm(&req.payload),
            "bohm-query" => self.bohm_query(&req.payload),
            other => Err(fail("illegal-verb", format!("unknown verb `{other}`"))),
        };
        self.revision += 1;
        let (verb, payload) = match result {
            Ok(v) => (req.verb.clone(), v),
            Err(f) => {
                let mut p = json!({ "kind": f.kind, "message": f.message, "request": req.verb });
                if let Some(legal) = f.legal {
                    p["legal"] = json!(legal);
                }
                ("error".to_string(), p)
            }
        };
        Reply { session: req.session.clone(), verb, revision: self.revision, payload }
    }

    fn load(&mut self, payload: &Value) -> Result<Value, Failure> {
        let text = field(payload, "text")?;
        let before = self.catalog.document().items.len();
        let next = self.catalog.extend(text).map_err(|e| fail("parse-error", e.to_string()))?;
        let added: Vec<&str> = next.document().items[before..].iter().map(|i| i.name()).collect();
        let reply = json!({ "added": added });
        self.catalog = Arc::new(next);
        Ok(reply)
    }

    fn list(&self) -> Value {
        json!({ "entries": self.catalog.entries() })
    }

    fn algorithm(&self, name: &str) -> Result<Algorithm, Failure> {
        self.catalog.algorithm(name).cloned().map_err(|e| fail("unknown-name", e.to_string()))
    }

    fn start_compose(&mut self, payload: &Value) -> Result<Value, Failure> {
        let (first, second) = (field(payload, "first")?, field(payload, "second")?);
        let (phi, psi) = (self.algorithm(first)?, self.algorithm(second)?);
        if phi.target() != psi.source() {
            let e = EngineError::TypeMismatch { left: phi.arrow().to_string(), right: psi.arrow().to_string() };
            return Err(fail("type-mismatch", e.to_string()));
        }
        let arrow = Sds::arrow(phi.source().clone(), psi.target().clone());
        let c = Compose {
            first: first.to_string(),
            second: second.to_string(),
            phi,
            psi,
            arrow,
            state: MachineState::initial(),
            moves: Vec::new(),
            trace: Vec::new(),
        };
        let view = c.view();
        self.mode = Mode::Compose(Box::new(c));
        Ok(view)
    }

    fn observer_move(&mut self, payload: &Value) -> Result<Value, Failure> {
        let Mode::Compose(c) = &mut self.mode else {
            return Err(fail("illegal-verb", "observer-move needs a compose session"));
        };
        let text = field(payload, "move")?;
        let illegal = |message: String| Failure { kind: "illegal-move", message, legal: Some(c.legal()) };
        let m = parse_move(&c.arrow, &c.state.s2, text).map_err(illegal)?;
        let (state, trace) = match machine_run_query(&c.phi, &c.psi, &c.state, &m, DEFAULT_STEP_CAP) {
            Ok(r) => r,
            Err(e @ (EngineError::IllegalObserverMove { .. } | EngineError::ObserverNotExpected(_))) => {
                return Err(illegal(e.to_string()))
            }
            Err(e) => return Err(fail("engine-error", e.to_string())),
        };
        c.state = state;
        c.moves.push(m.to_string());
        c.trace.extend(trace.iter().cloned());
        Ok(json!({
            "move": m.to_string(),
            "trace": trace_json(&trace),
            "state": state_json(&c.state),
            "phase": c.state.phase.to_string(),
            "legal": c.legal(),
        }))
    }

    fn state(&self) -> Value {
        match &self.mode {
            Mode::Idle => json!({ "mode": "idle" }),
            Mode::Compose(c) => c.view(),
            Mode::Bohm(b) => b.view(),
        }
    }

    fn start_bohm(&mut self, payload: &Value) -> Result<Value, Failure> {
        let parse = |name: &str| -> Result<Term, Failure> {
            parse_term(field(payload, name)?).map_err(|e| fail("parse-error", format!("{name}: {e}")))
        };
        let fuel = match payload.get("fuel") {
            None => DEFAULT_FUEL,
            Some(v) => {
                v.as_u64().filter(|&n| n > 0).ok_or_else(|| fail("bad-request", "fuel must be a positive integer"))?
                    as usize
            }
        };
        let mut reply = json!({});
        let term = if payload.get("term").is_some() {
            parse("term")?
        } else {
            let (m, n) = (parse("m")?, parse("n")?);
            let z = payload.get("z").and_then(Value::as_str).unwrap_or("z");
            match token_game_trace(&m, z, &n, fuel) {
                Ok(t) => {
                    reply["game"] = json!({ "moves": t.to_string(), "ending": t.ending });
                }
                Err(e) => reply["game"] = json!({ "unsupported": e.to_string() }),
            }
            m.subst(z, &n)
        };
        let mut explorer = Explorer::new(term.clone(), fuel);
        let root = explorer.expand(&[]).expect("the root always exists");
        reply["term"] = json!(term.to_string());
        reply["path"] = json!([]);
        reply["node"] = json!(root);
        self.mode = Mode::Bohm(Box::new(Bohm { term, explorer, disclosed: vec![(Vec::new(), root)] }));
        Ok(reply)
    }

    fn bohm_query(&mut self, payload: &Value) -> Result<Value, Failure> {
        let Mode::Bohm(b) = &mut self.mode else {
            return Err(fail("illegal-verb", "bohm-query needs a Böhm session"));
        };
        let path: Vec<usize> = payload
            .get("path")
            .cloned()
            .and_then(|p| serde_json::from_value(p).ok())
            .ok_or_else(|| fail("bad-request", "payload needs `path`, a list of child numbers from 1"))?;
        let node = b.explorer.expand(&path).map_err(|e| fail("bad-path", e.to_string()))?;
        if !b.disclosed.iter().any(|(p, _)| *p == path) {
            b.disclosed.push((path.clone(), node.clone()));
        }
        Ok(json!({ "path": path, "node": node }))
    }
}

/// All sessions of a server. Each session has its own lock.
pub struct Store {
    base: Arc<Catalog>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

impl Store {
    pub fn new(base: Catalog) -> Store {
        Store { base: Arc::new(base), sessions: Mutex::new(HashMap::new()) }
    }

    fn session(&self, id: &str) -> Arc<Mutex<Session>> {
        let mut all = self.sessions.lock().expect("session table poisoned");
        all.entry(id.to_string()).or_insert_with(|| Arc::new(Mutex::new(Session::new(self.base.clone())))).clone()
    }

    pub fn handle(&self, req: &Request) -> Reply {
        let s = self.session(&req.session);
        let mut s = s.lock().expect("session poisoned");
        s.handle(req)
    }

    /// Handles one line of the wire format.
    pub fn handle_line(&self, line: &str) -> String {
        let reply = match serde_json::from_str::<Request>(line) {
            Ok(req) => self.handle(&req),
            Err(e) => Reply {
                session: serde_json::from_str::<Value>(line)
                    .ok()
                    .and_then(|v| v.get("session").and_then(Value::as_str).map(str::to_string))
                    .unwrap_or_default(),
                verb: "error".into(),
                revision: 0,
                payload: json!({ "kind": "bad-request", "message": e.to_string() }),
            },
        };
        serde_json::to_string(&reply).expect("replies serialize")
    }
}
