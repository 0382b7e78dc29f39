use std::io::Write;
use std::process::{Command, Output, Stdio};

fn sdsgames(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdsgames")).args(args).env_remove("SDSGAMES_CATALOG").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn exit_codes() {
    assert_eq!(sdsgames(&["enum", "Bool"]).status.code(), Some(0));
    assert_eq!(sdsgames(&["compose", "negation", "negation", "--query", "out zz"]).status.code(), Some(1));
    assert_eq!(sdsgames(&["bohm", "λx. x", "--path", "1"]).status.code(), Some(1));
    assert_eq!(sdsgames(&["table", "nope"]).status.code(), Some(2));
    assert_eq!(sdsgames(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(sdsgames(&["check", "/no/such/file.sds"]).status.code(), Some(2));
}

#[test]
fn enumerate_and_tables() {
    let o = sdsgames(&["enum", "Bool"]);
    assert_eq!(stdout(&o), "3 strategies of Bool\n{}\n{? ff}\n{? tt}\n");
    let o = stdout(&sdsgames(&["table", "lor"]));
    assert!(o.contains("(tt, ⊥) = tt\n") && o.contains("(ff, ⊥) = ⊥\n"), "{o}");
    let o = stdout(&sdsgames(&["search", "por", "!(Bool2) -o Bool"]));
    assert!(o.starts_with("0 algorithms"), "{o}");
    let o = stdout(&sdsgames(&["search", "sor", "!(Bool2) -o Bool"]));
    assert!(o.starts_with("2 algorithms"), "{o}");
}

#[test]
fn compose_queries() {
    let o = sdsgames(&["compose", "negation", "negation", "--query", "req ?", "--query", "is tt"]);
    let text = stdout(&o);
    assert!(text.contains("phase stuck-on-input; legal: is ff, is tt"), "{text}");
    assert!(text.contains("s'' = req ? valof ? is tt out tt"), "{text}");
    let o = sdsgames(&["compose", "negation", "negation", "--exhaustive"]);
    assert!(stdout(&o).contains("negation ; negation : Bool -o Bool"));
    let e = sdsgames(&["compose", "negation", "lor"]);
    assert_eq!(e.status.code(), Some(2));
}

#[test]
fn definitions_files() {
    let file = data("plays.sds");
    let o = sdsgames(&["check", &file]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("ok\n"));
    let bad = data("broken.sds");
    let o = sdsgames(&["check", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("4:"), "{}", String::from_utf8_lossy(&o.stderr));

    let o = stdout(&sdsgames(&["play", "left_true", "ask_left", "--defs", &file]));
    assert_eq!(o, "play: ?.1 tt.1\nwinner: Player\n");
    let o = stdout(&sdsgames(&["play", "left_true", "ask_right", "--defs", &file]));
    assert_eq!(o, "play: ?.2\nwinner: Opponent\n");
}

#[test]
fn catalog_directory_from_the_environment() {
    let dir = format!("{}/tests/data/catalog", env!("CARGO_MANIFEST_DIR"));
    let o = Command::new(env!("CARGO_BIN_EXE_sdsgames"))
        .args(["compose", "flip", "flip", "--exhaustive"])
        .env("SDSGAMES_CATALOG", &dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(sdsgames(&["compose", "flip", "flip"]).status.code(), Some(2), "the built-in catalog has no flip");
}

#[test]
fn bohm_paths() {
    let o = stdout(&sdsgames(&["bohm", "example", "--path", "1"]));
    assert_eq!(o, "[]       t [2 children]\n[1]      n1 [0 children]\n");
    let o = stdout(&sdsgames(&["bohm", "(λx. x x) (λx. x x)", "--fuel", "50"]));
    assert!(o.contains("divergent"));
}

#[test]
fn explore_speaks_the_protocol() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_sdsgames"))
        .arg("explore")
        .env_remove("SDSGAMES_CATALOG")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"compose negation negation\nmove req ?\nmove is tt\nbohm example\nexpand 1\nquit\n")
        .unwrap();
    let out = String::from_utf8(child.wait_with_output().unwrap().stdout).unwrap();
    assert!(out.contains("\"s''\": \"req ? valof ? is tt out tt\""), "{out}");
    assert!(out.contains("\"head\": \"n1\""), "{out}");
    assert!(out.contains("\"revision\": 5"), "{out}");
}

#[test]
fn verify_passes() {
    let o = sdsgames(&["verify"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 12);
}
