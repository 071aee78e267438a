//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit when any
//! criterion fails. Built with `harness = false` so the lines are always
//! printed.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{completion, laws, oracle, MockServer, VALID_ANSWER};
use convtriple::conv::ConvExtractor;
use convtriple::corpus::{DialogueSuite, TurnSuite};
use convtriple::eval::{aggregate, iaa_jaccard, iaa_pairwise_f, IaaLevel, ItemVerdict, MatchPolicy};
use convtriple::grammar::{generate, parse, Grammar};
use convtriple::llm::{build_messages, call, prompt_checksum, to_extractions, LlmConfig, LlmError, PROMPT_SHA256};
use convtriple::mapper::score_perspective;
use convtriple::pipeline::{prepare, CfgExtractor, UtteranceExtractor};
use convtriple::{Lexicon, SpeakerContext, Tag};
use proptest::strategy::Strategy;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::rngs::StdRng;
use rand::SeedableRng;

const TURN_SUITE: &str = include_str!("../fixtures/turn_suite.txt");
const DIALOGUE_SUITE: &str = include_str!("../fixtures/dialogue_suite.txt");

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn format_fidelity() -> Outcome {
    let t = Instant::now();
    let turns: TurnSuite = TURN_SUITE.parse().map_err(|e| format!("{e}"))?;
    ensure(turns.serialize() == TURN_SUITE, || "turn suite differs after round trip".into())?;
    let dialogues: DialogueSuite = DIALOGUE_SUITE.parse().map_err(|e| format!("{e}"))?;
    ensure(dialogues.serialize() == DIALOGUE_SUITE, || "dialogue suite differs after round trip".into())?;
    within(t.elapsed(), Duration::from_secs(1))?;
    Ok(format!("{} turn items, {} dialogues byte-identical", turns.items.len(), dialogues.dialogues.len()))
}

fn metric_oracle() -> Outcome {
    // 88 items: 45 fully correct; subjects correct on 68, objects on 60 and
    // predicates on 49, arranged so no other item has all three slots right.
    let vs: Vec<ItemVerdict> = (0..88)
        .map(|i| ItemVerdict {
            subject: i < 68,
            object: i < 60,
            predicate: i < 45 || (60..64).contains(&i),
            no_triple: i >= 86,
            ..ItemVerdict::default()
        })
        .collect();
    let triples = vs.iter().filter(|v| v.triple()).count();
    let r = aggregate(&vs).map_err(|e| e.to_string())?;
    let oracle_triples = round2(100.0 * 45.0 / 88.0);
    ensure(triples == 45 && round2(r.precision_triples) == oracle_triples && oracle_triples == 51.14, || {
        format!("triples {triples}, precision {}", r.precision_triples)
    })?;
    let slots = [r.precision_subjects, r.precision_objects, r.precision_predicates].map(round2);
    ensure(slots == [77.27, 68.18, 55.68], || format!("slot precisions {slots:?}"))?;
    let oracle_elements: f64 = (77.27 + 68.18 + 55.68) / 3.0;
    ensure((r.precision_elements - 67.04).abs() <= 0.01 && (oracle_elements - 67.04).abs() <= 0.01, || {
        format!("elements {}", r.precision_elements)
    })?;
    Ok(format!("triples {:.2}, elements {:.2}", r.precision_triples, r.precision_elements))
}

fn cfg_turn_suite() -> Outcome {
    let t = Instant::now();
    let suite: TurnSuite = TURN_SUITE.parse().map_err(|e| format!("{e}"))?;
    let x = CfgExtractor::new(SpeakerContext::default());
    let case_only = MatchPolicy {
        case_fold: true,
        separator_fold: false,
        lemma_fold: false,
    };
    let exact = |u: &str, g: &convtriple::Triple| {
        x.extract("t", u).is_ok_and(|e| {
            case_only.matches(&e.triple.subject, &g.subject, false)
                && case_only.matches(&e.triple.predicate, &g.predicate, true)
                && case_only.matches(&e.triple.object, &g.object, false)
        })
    };
    let misses: Vec<&str> = suite
        .items
        .iter()
        .filter(|i| !exact(&i.utterance, &i.gold.triple))
        .map(|i| i.utterance.as_str())
        .collect();
    let hits = suite.items.len() - misses.len();
    ensure(hits * 5 >= suite.items.len() * 4, || format!("{hits}/{} exact, misses {misses:?}", suite.items.len()))?;
    let core = [
        "I have three white cats",
        "can I make a cake",
        "who is from Mexico",
        "what do you enjoy",
        "do you like amsterdam",
        "will you go to Paris",
        "john doesn't hate fashion",
        "selene might come today",
    ];
    for u in core {
        ensure(!misses.contains(&u), || format!("core item `{u}` missed"))?;
    }
    within(t.elapsed(), Duration::from_secs(5))?;
    Ok(format!("{hits}/{} exact ({:.1}%), core set {}/{}, misses {misses:?}", suite.items.len(), 100.0 * hits as f64 / suite.items.len() as f64, core.len(), core.len()))
}

fn perspective_fidelity() -> Outcome {
    let suite: TurnSuite = TURN_SUITE.parse().map_err(|e| format!("{e}"))?;
    let lex = Lexicon::builtin();
    let mut n = 0;
    for item in suite.items.iter().filter(|i| i.gold.perspective.is_some()) {
        let gold = item.gold.perspective.unwrap();
        let got = score_perspective(lex, &prepare(lex, &item.utterance).1);
        ensure(got == gold, || format!("`{}`: got {got:?}, gold {gold:?}", item.utterance))?;
        n += 1;
    }
    ensure(n == 10, || format!("expected 10 perspective items, found {n}"))?;
    Ok(format!("{n}/10 perspective triples exact"))
}

fn conversational_gold() -> Outcome {
    let suite: DialogueSuite = DIALOGUE_SUITE.parse().map_err(|e| format!("{e}"))?;
    let x = ConvExtractor::new(1);
    let policy = MatchPolicy::default();
    for d in &suite.dialogues {
        let out = x.extract(d).map_err(|e| e.to_string())?;
        let e = out.first().ok_or_else(|| format!("{}: no triple", d.id))?;
        let g = &d.gold[0];
        let ok = policy.matches(&e.triple.subject, &g.triple.subject, false)
            && policy.matches(&e.triple.predicate, &g.triple.predicate, true)
            && policy.matches(&e.triple.object, &g.triple.object, false)
            && e.perspective.polarity == -1
            && e.labels.contains(&"negative".to_string());
        ensure(ok, || format!("{}: got {:?} {:?}, gold {:?}", d.id, e.triple, e.labels, g))?;
    }
    Ok(format!("{}/{} dialogues match gold with negative label", suite.dialogues.len(), suite.dialogues.len()))
}

fn grammar_soundness() -> Outcome {
    let t = Instant::now();
    let g = Grammar::builtin();
    let mut rng = StdRng::seed_from_u64(2024);
    for k in 0..1000 {
        let sample = generate(g, 8, &mut rng).map_err(|e| e.to_string())?;
        let tags: Vec<Tag> = sample
            .terminal_names(g)
            .iter()
            .map(|n| n.parse().map_err(|e| format!("{e}")))
            .collect::<Result<_, _>>()?;
        let recognized = parse(g, &tags).is_ok_and(|f| f.recognize());
        ensure(recognized && sample.tree.depth() <= 8, || format!("sample {k} {tags:?} not recognized"))?;
    }
    let (checked, bad) = oracle::short_sequence_mismatches(g);
    ensure(bad.is_empty(), || format!("{} mismatches, first {:?}", bad.len(), bad.first()))?;
    within(t.elapsed(), Duration::from_secs(60))?;
    Ok(format!("1000/1000 samples recognized; {checked} sequences agree with oracle ({:.1?})", t.elapsed()))
}

fn iaa_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut pairs = 0;
    for k in 0..200 {
        let anns = oracle::random_annotations(&mut rng);
        for level in IaaLevel::ALL {
            let j = iaa_jaccard(&anns, level).map_err(|e| e.to_string())?;
            let f = iaa_pairwise_f(&anns, level).map_err(|e| e.to_string())?;
            let (oj, of, per_pair) = oracle::brute_force_iaa(&anns, level);
            ensure((j - oj).abs() <= 1e-12 && (f - of).abs() <= 1e-12, || {
                format!("fixture {k} {level:?}: J {j} vs {oj}, F {f} vs {of}")
            })?;
            for (pj, pf) in per_pair {
                ensure((pj - pf / (2.0 - pf)).abs() <= 1e-12, || format!("fixture {k}: J {pj} F {pf}"))?;
                pairs += 1;
            }
        }
    }
    Ok(format!("200 fixtures x 4 levels match oracle to 1e-12; J = F/(2-F) on {pairs} pairs"))
}

fn llm_client() -> Outcome {
    ensure(prompt_checksum() == PROMPT_SHA256, || format!("checksum {}", prompt_checksum()))?;
    let server = MockServer::start(vec![
        (200, completion(VALID_ANSWER)),
        (200, completion(&format!("Sure, here it is: {VALID_ANSWER}"))),
        (200, completion("The triples are subject, predicate and object.")),
    ]);
    let config = LlmConfig {
        endpoint: server.url.clone(),
        max_retries: 0,
        backoff_ms: 1,
        timeout_secs: 5,
        ..LlmConfig::default()
    };
    let messages = build_messages("I am from Amsterdam.").map_err(|e| e.to_string())?;
    let ctx = SpeakerContext::default();
    let valid = call(&config, &messages).map_err(|e| e.to_string())?;
    let out = to_extractions(&valid, &ctx);
    ensure(!out.extractions.is_empty() && valid.warnings.is_empty(), || "valid answer not converted".into())?;
    let prose = call(&config, &messages).map_err(|e| e.to_string())?;
    let out = to_extractions(&prose, &ctx);
    ensure(!out.extractions.is_empty() && !prose.warnings.is_empty(), || "prose answer lacks warning".into())?;
    match call(&config, &messages) {
        Err(LlmError::Malformed { .. }) => {}
        other => return Err(format!("malformed answer gave {other:?}")),
    }
    Ok("checksum ok; valid -> extractions, prose -> extractions + warning, malformed -> error".into())
}

fn run_law<S: Strategy>(name: &str, strategy: S, check: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: laws::CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, check).map_err(|e| format!("{name}: {e}"))
}

fn property_suite() -> Outcome {
    run_law("placeholder law", (laws::wh_question(), laws::statement()), laws::check_placeholders)?;
    run_law("negation parity", laws::negation_case(), laws::check_negation_parity)?;
    run_law("speaker swap", laws::swap_case(), laws::check_speaker_swap)?;
    run_law("expand_contractions idempotence", laws::contraction_text(), laws::check_contractions_idempotent)?;
    run_law("lemmatize idempotence", laws::lemma_case(), laws::check_lemmatize_idempotent)?;
    run_law("aggregate permutation invariance", laws::shuffled_verdicts(), laws::check_aggregate_permutation)?;
    Ok(format!("6 laws x {} cases", laws::CASES))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("format fidelity", format_fidelity),
        ("metric oracle", metric_oracle),
        ("cfg turn suite", cfg_turn_suite),
        ("perspective fidelity", perspective_fidelity),
        ("conversational gold", conversational_gold),
        ("grammar soundness", grammar_soundness),
        ("agreement oracle", iaa_oracle),
        ("llm client", llm_client),
        ("property suite", property_suite),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let ms = t.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("criterion {}: {name}: PASS ({detail}) [{ms} ms]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: {name}: FAIL ({why}) [{ms} ms]", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
