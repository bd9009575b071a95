//! The command-line front end, driven in process.

use std::fs;
use std::path::Path;

use lemkit::cli::run;
use lemkit::dataset::{load_predictions, write_predictions, Prediction};

fn lemkit(args: &[&str]) -> (i32, String, String) {
    let mut out = vec![];
    let mut err = vec![];
    let argv = std::iter::once("lemkit").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn execute_prints_the_goal_state() {
    let cases = [
        ("alchemy", "1:rr|2:gg|3:g|4:ooo|5:_|6:_|7:_", "Pour ( Beaker ( 1 ) , Beaker ( 2 , g ) )", "1:_|2:gg|3:grr|4:ooo|5:_|6:_|7:_"),
        ("tangrams", "1:A|2:B|3:C|4:D|5:E", "Remove ( 2 ) ; Insert ( 4 , B )", "1:A|2:C|3:D|4:B|5:E"),
        ("recipes", "ent:beef|pepper loc:-|-", "Create ( beef , oven )", "ent:beef|pepper loc:oven|-"),
    ];
    for (domain, state, program, want) in cases {
        let (code, out, _) = lemkit(&["execute", "--domain", domain, "--state", state, "--program", program]);
        assert_eq!((code, out.trim()), (0, want));
    }
    let (code, out, _) = lemkit(&[
        "execute", "--domain", "tangrams", "--state", "1:A|2:B|3:C|4:D|5:E", "--program", "Remove ( 2 ) ; Insert ( 4 , B )", "--trace",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().collect::<Vec<_>>(), ["1:A|2:B|3:C|4:D|5:E", "1:A|2:C|3:D|4:E|5:_", "1:A|2:C|3:D|4:B|5:E"]);
}

#[test]
fn failures_map_to_exit_codes() {
    let (code, _, err) = lemkit(&["execute", "--domain", "tangrams", "--state", "1:A|2:B|3:C|4:D|5:E", "--program", "Insert ( 1 , A )"]);
    assert_eq!(code, 1);
    assert!(err.contains("step 0"), "{err}");
    let (code, _, _) = lemkit(&["execute", "--domain", "tangrams", "--state", "1:A", "--program", "Remove ( 1 )"]);
    assert_eq!(code, 2);
    let (code, _, _) = lemkit(&["no-such-command"]);
    assert_eq!(code, 2);
    let (code, out, _) = lemkit(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("gen-corpus"));
}

#[test]
fn sampling_repeats_for_a_seed() {
    let a = lemkit(&["sample-state", "--domain", "scene", "--seed", "4", "--count", "5"]);
    let b = lemkit(&["sample-state", "--domain", "scene", "--seed", "4", "--count", "5"]);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
    assert_eq!(a.1.lines().count(), 5);

    let (code, out, _) = lemkit(&["sample-program", "--domain", "alchemy", "--seed", "1", "--state", "1:rr|2:_|3:_|4:_|5:_|6:_|7:_", "--count", "3"]);
    assert_eq!(code, 0);
    for program in out.lines() {
        let (c, _, _) = lemkit(&["execute", "--domain", "alchemy", "--state", "1:rr|2:_|3:_|4:_|5:_|6:_|7:_", "--program", program]);
        assert_eq!(c, 0, "{program}");
    }

    let (code, out, _) = lemkit(&["sample-program", "--domain", "propara", "--seed", "1", "--count", "2"]);
    assert_eq!(code, 0);
    for line in out.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["domain"], "propara");
    }
}

#[test]
fn corpus_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.jsonl");
    let many = dir.path().join("many.jsonl");
    let gen = |path: &Path, workers: &str| {
        lemkit(&["gen-corpus", "--domain", "tangrams", "--seed", "7", "--n", "3000", "--out", p(path), "--workers", workers])
    };
    let (code, a, _) = gen(&one, "1");
    assert_eq!(code, 0);
    let (_, b, _) = gen(&many, "3");
    let digest = |s: &str| s.lines().find(|l| l.starts_with("sha256")).unwrap().to_string();
    assert_eq!(digest(&a), digest(&b));

    let (code, out, _) = lemkit(&["validate-corpus", p(&one)]);
    assert_eq!(code, 0, "{out}");

    let pool = dir.path().join("pool.jsonl");
    lemkit(&["gen-corpus", "--domain", "tangrams", "--seed", "8", "--n", "1000", "--out", p(&pool), "--workers", "1"]);
    let mixed = dir.path().join("mixed.jsonl");
    let (code, out, _) = lemkit(&["inject-overlap", "--corpus", p(&one), "--pool", p(&pool), "--ratio", "0.5", "--seed", "1", "--out", p(&mixed)]);
    assert_eq!(code, 0);
    assert!(out.contains("injected 500 of 1000"), "{out}");

    let (code, out, _) = lemkit(&["stats", "--corpus", p(&mixed), "--json"]);
    assert_eq!(code, 0);
    let stats: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(stats["examples"], 3000);
    assert_eq!(stats["injected"], 500);

    // Holding out the pool's states flags every non-injected line that uses one.
    let (code, out, _) = lemkit(&["validate-corpus", p(&one), "--holdout", p(&pool), "--json"]);
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    let violations = report["holdout_violations"].as_u64().unwrap();
    assert_eq!(code, if violations > 0 { 1 } else { 0 });

    let gated = dir.path().join("gated.jsonl");
    let (code, _, err) = lemkit(&["gen-corpus", "--domain", "tangrams", "--seed", "7", "--n", "500", "--out", p(&gated), "--holdout", p(&pool)]);
    assert_eq!(code, 0, "{err}");
    let (code, _, _) = lemkit(&["validate-corpus", p(&gated), "--holdout", p(&pool)]);
    assert_eq!(code, 0);

    fs::write(&gated, "{broken\n").unwrap();
    let (code, _, _) = lemkit(&["validate-corpus", p(&gated)]);
    assert_eq!(code, 1);
}

const EPISODES: &str = r#"{"id":"p1","domain":"propara","init":"ent:water|sugar loc:soil|-","instructions":["Roots absorb water.","Water reaches the leaf.","Sugar is made."],"gold":["ent:water|sugar loc:root|-","ent:water|sugar loc:leaf|-","ent:water|sugar loc:-|leaf"]}
{"id":7,"domain":"propara","init":"ent:rock loc:ground","instructions":["Rain falls.","The rock breaks."],"gold":["ent:rock loc:ground","ent:rock loc:-"]}
"#;

#[test]
fn episodes_pairs_and_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let episodes = dir.path().join("episodes.jsonl");
    fs::write(&episodes, EPISODES).unwrap();

    let pairs = dir.path().join("pairs.jsonl");
    let (code, _, err) = lemkit(&["make-pairs", "--episodes", p(&episodes), "--out", p(&pairs)]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<serde_json::Value> = fs::read_to_string(&pairs).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[1]["source"], "ent:water|sugar loc:soil|- [SEP] Roots absorb water. Water reaches the leaf.");
    assert_eq!(lines[1]["target"], "ent:water|sugar loc:leaf|-");

    // Gold targets written through the predictions interface score 100.
    let preds: Vec<Prediction> = lines
        .iter()
        .map(|l| Prediction {
            id: l["id"].as_str().unwrap().to_string(),
            step: l["step"].as_u64().unwrap() as usize,
            state: l["target"].as_str().unwrap().to_string(),
        })
        .collect();
    let pred_path = dir.path().join("preds.jsonl");
    write_predictions(&pred_path, &preds).unwrap();
    assert_eq!(load_predictions(&pred_path).unwrap(), preds);
    let (code, out, err) = lemkit(&["evaluate", "--domain", "propara", "--episodes", p(&episodes), "--preds", p(&pred_path), "--json"]);
    assert_eq!(code, 0, "{err}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["metrics"]["sentence"]["cat1"], 100.0);
    assert_eq!(report["metrics"]["document"]["overall"]["f1"], 100.0);

    fs::write(&pred_path, "{\"id\":\"p1\",\"step\":1,\"state\":\"ent:water|sugar loc:root|-\"}\n").unwrap();
    let (code, _, err) = lemkit(&["evaluate", "--domain", "propara", "--episodes", p(&episodes), "--preds", p(&pred_path)]);
    assert_ne!(code, 0);
    assert!(err.contains("p1") || err.contains('7'), "{err}");
}

#[test]
fn grammar_export() {
    let (code, out, _) = lemkit(&["grammar", "--domain", "scene"]);
    assert_eq!(code, 0);
    for f in ["Person", "RmPerson", "Hat", "RmHat"] {
        assert!(out.contains(f), "{f}");
    }
    let (code, out, _) = lemkit(&["grammar", "--domain", "alchemy", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v.is_object());
}
