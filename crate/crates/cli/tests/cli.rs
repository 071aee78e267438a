use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const STATEMENTS: &str = "\
# statements
I know you: lenka know agent
where is she: she be ?
my best friend is he: lenka best-friend-is he
I have three white cats: lenka have three-white-cats
I think Selene doesn't like cheese: selene like cheese
I think Selene hates cheese: selene hate cheese
selene might come today: selene might-come today
I don't think selene likes cheese: selene like cheese
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_convtriple"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn core_fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn records(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn extract_cfg_writes_one_record_per_turn() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("statements.txt");
    fs::write(&input, STATEMENTS).unwrap();
    let out = run(&["extract", "--model", "cfg", "--input", s(&input)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = records(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(recs.len(), 8);
    assert_eq!(recs[0]["id"], "statements.txt:2");
    assert_eq!(recs[3]["subject"], "lenka");
    assert_eq!(recs[3]["predicate"], "have");
}

#[test]
fn extract_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    for (out, workers) in [(&a, "1"), (&b, "8")] {
        let o = run(&[
            "extract",
            "--model",
            "conv",
            "--format",
            "dialogues",
            "--input",
            s(&core_fixture("dialogue_suite.txt")),
            "--output",
            s(out),
            "--workers",
            workers,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(records(&text).len(), 4);
}

#[test]
fn conv_model_rejects_turn_input() {
    let out = run(&["extract", "--model", "conv", "--format", "turns", "--input", "unused.txt"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["extract", "--model", "cfg", "--format", "dialogues", "--input", "unused.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn missing_input_is_a_runtime_error() {
    let out = run(&["extract", "--model", "cfg", "--input", "/nonexistent/turns.txt"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn pattern_model_on_a_simple_statement() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("one.txt");
    fs::write(&input, "John likes cats: john like cats\n").unwrap();
    let out = run(&["extract", "--model", "pattern", "--input", s(&input)]);
    assert!(out.status.success());
    let recs = records(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["subject"].as_str().map(str::to_lowercase).as_deref(), Some("john"));
    assert_eq!(recs[0]["object"], "cats");
}

#[test]
fn gold_scored_against_itself_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let gold = data("sample_gold.txt");
    let preds = dir.path().join("self.jsonl");
    let mut lines = String::new();
    for (n, line) in fs::read_to_string(&gold).unwrap().lines().enumerate() {
        if line.starts_with('#') {
            continue;
        }
        let t: Vec<&str> = line.rsplit(": ").next().unwrap().split(' ').collect();
        let rec = serde_json::json!({"id": format!("sample_gold.txt:{}", n + 1), "subject": t[0], "predicate": t[1], "object": t[2]});
        lines.push_str(&format!("{rec}\n"));
    }
    fs::write(&preds, lines).unwrap();
    let report = dir.path().join("r.json");
    let out = run(&["evaluate", "--gold", s(&gold), "--predictions", s(&preds), "--report-json", s(&report)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(r[0]["report"]["precision_triples"], 100.0);
    assert_eq!(r[0]["report"]["no_triples"], 0);
}

/// Totals rows of the worksheet table, keyed by policy name.
fn worksheet_totals() -> Vec<(String, Vec<f64>)> {
    fs::read_to_string(data("sample_worksheet.md"))
        .unwrap()
        .lines()
        .filter(|l| l.starts_with("| default") || l.starts_with("| exact"))
        .map(|l| {
            let cells: Vec<&str> = l.split('|').map(str::trim).filter(|c| !c.is_empty()).collect();
            (cells[0].to_string(), cells[1..].iter().map(|c| c.parse().unwrap()).collect())
        })
        .collect()
}

#[test]
fn sample_predictions_match_the_hand_scored_worksheet() {
    let totals = worksheet_totals();
    assert_eq!(totals.len(), 2);
    let dir = tempfile::tempdir().unwrap();
    for (policy, expected) in totals {
        let report = dir.path().join(format!("{policy}.json"));
        let gold = data("sample_gold.txt");
        let preds = data("sample_predictions.jsonl");
        let mut args = vec!["evaluate", "--gold", s(&gold), "--predictions", s(&preds), "--report-json", s(&report)];
        if policy == "exact" {
            args.extend(["--no-case-fold", "--no-separator-fold", "--no-lemma-fold"]);
        }
        let out = run(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let r: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
        let r = &r[0]["report"];
        assert_eq!(r["items"], 10);
        let got = [
            r["no_triples"].as_f64().unwrap(),
            r["precision_triples"].as_f64().unwrap(),
            r["precision_elements"].as_f64().unwrap(),
            r["precision_subjects"].as_f64().unwrap(),
            r["precision_objects"].as_f64().unwrap(),
            r["precision_predicates"].as_f64().unwrap(),
        ];
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 0.005, "{policy}: got {got:?}, worksheet {expected:?}");
        }
    }
}

#[test]
fn per_category_adds_rows() {
    let out = run(&[
        "evaluate",
        "--gold",
        s(&data("sample_gold.txt")),
        "--predictions",
        s(&data("sample_predictions.jsonl")),
        "--per-category",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("sample ")));
    assert!(text.lines().any(|l| l.starts_with("all ")));
}

#[test]
fn empty_predictions_fail_alignment() {
    let dir = tempfile::tempdir().unwrap();
    let preds = dir.path().join("empty.jsonl");
    fs::write(&preds, "").unwrap();
    let out = run(&["evaluate", "--gold", s(&data("sample_gold.txt")), "--predictions", s(&preds)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn identical_annotators_agree_fully() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("ann_a.txt"), dir.path().join("ann_b.txt"));
    fs::copy(core_fixture("dialogue_suite.txt"), &a).unwrap();
    fs::copy(core_fixture("dialogue_suite.txt"), &b).unwrap();
    let out = run(&["iaa", s(&a), s(&b)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    for level in ["Subjects", "Predicates", "Objects", "Triples"] {
        let line = text.lines().find(|l| l.starts_with(level)).unwrap();
        let nums: Vec<&str> = line.split_whitespace().skip(1).collect();
        assert_eq!(nums, ["1.0000", "1.0000"], "{line}");
    }
}

#[test]
fn iaa_needs_two_files() {
    let out = run(&["iaa", s(&core_fixture("dialogue_suite.txt"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stats_and_grammar_dump() {
    let out = run(&["stats", "--input", s(&core_fixture("dialogue_suite.txt"))]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("dialogues              4"));
    let a = run(&["dump-grammar", "--samples", "5", "--seed", "7"]);
    let b = run(&["dump-grammar", "--samples", "5", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

/// Answers every request with the same completion and counts requests.
fn completion_server(content: &str) -> (String, std::sync::Arc<std::sync::atomic::AtomicUsize>) {
    use std::io::{BufRead, BufReader, Read, Write};
    use std::sync::atomic::Ordering;
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let hits = std::sync::Arc::new(std::sync::atomic::AtomicUsize::new(0));
    let count = std::sync::Arc::clone(&hits);
    let body = serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap_or(0);
                }
            }
            let _ = reader.read_exact(&mut vec![0; len]);
            count.fetch_add(1, Ordering::SeqCst);
            let reply = format!(
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            let _ = stream.write_all(reply.as_bytes());
        }
    });
    (url, hits)
}

#[test]
fn llm_extraction_uses_the_cache_on_rerun() {
    let answer = r#"{"dialogue": [{"sender": "human", "text": "I am from Amsterdam.", "triples": [{"subject": "I", "predicate": "be from", "object": "Amsterdam", "sentiment": 0, "polarity": 1, "certainty": 1}]}]}"#;
    let (url, hits) = completion_server(answer);
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("turns.txt");
    fs::write(&input, "I am from Amsterdam: lenka be-from amsterdam\nI like cats: lenka like cats\n").unwrap();
    let output = dir.path().join("llm.jsonl");
    let go = || {
        bin()
            .args(["extract", "--model", "llm", "--input", s(&input), "--output", s(&output)])
            .env("LLM_ENDPOINT", &url)
            .env("LLM_MODEL", "mock")
            .output()
            .unwrap()
    };
    let first = go();
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(hits.load(std::sync::atomic::Ordering::SeqCst), 2);
    let text = fs::read_to_string(&output).unwrap();
    let recs = records(&text);
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0]["subject"], "lenka");
    assert_eq!(recs[0]["predicate"], "be-from");
    assert!(go().status.success());
    assert_eq!(hits.load(std::sync::atomic::Ordering::SeqCst), 2);
    assert_eq!(fs::read_to_string(&output).unwrap(), text);
}
