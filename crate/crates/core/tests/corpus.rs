//! Corpus generation, overlap injection and validation on real files.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use lemkit::corpus::{
    file_digest, generate_corpus, inject_overlap, validate_corpus, CorpusError, CorpusManifest, FindingKind,
    GenerateOptions, PretrainExample,
};
use lemkit::sampler::SamplerConfig;
use lemkit::state::Domain;
use serde_json::Value;

fn generate(dir: &Path, name: &str, domain: Domain, seed: u64, n: u64) -> PathBuf {
    let out = dir.join(name);
    let cfg = SamplerConfig::for_domain(domain).with_seed(seed);
    generate_corpus(domain, &cfg, n, &out, &GenerateOptions { workers: 2, ..Default::default() }).unwrap();
    out
}

fn read_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(String::from).collect()
}

fn write_lines(path: &Path, lines: &[String]) {
    fs::write(path, lines.iter().map(|l| format!("{l}\n")).collect::<String>()).unwrap();
}

/// Rewrites the JSON object on line `i` through `f`.
fn edit(lines: &mut [String], i: usize, f: impl FnOnce(&mut serde_json::Map<String, Value>)) {
    let mut v: Value = serde_json::from_str(&lines[i]).unwrap();
    f(v.as_object_mut().unwrap());
    lines[i] = v.to_string();
}

#[test]
fn generated_corpora_validate_clean_and_repeat() {
    let dir = tempfile::tempdir().unwrap();
    for domain in Domain::ALL {
        let a = generate(dir.path(), &format!("{domain}-a.jsonl"), domain, 3, 2000);
        let b = generate(dir.path(), &format!("{domain}-b.jsonl"), domain, 3, 2000);
        assert_eq!(file_digest(&a).unwrap(), file_digest(&b).unwrap());
        let manifest = CorpusManifest::read(&a).unwrap();
        assert_eq!((manifest.domain, manifest.n, manifest.seed), (domain, 2000, 3));
        assert_eq!(manifest.digest, file_digest(&a).unwrap());
        let report = validate_corpus(&a, None).unwrap();
        assert!(report.is_clean(), "{domain}: {report}");
        assert_eq!(report.lines, 2000);

        let lines = read_lines(&a);
        for (i, line) in lines.iter().enumerate() {
            let ex: PretrainExample = serde_json::from_str(line).unwrap();
            assert_eq!(ex.id, i as u64);
            assert_eq!(ex.source, format!("{} [SEP] {}", ex.init, ex.program));
            assert_eq!(ex.target, ex.goal);
        }
        let c = generate(dir.path(), &format!("{domain}-c.jsonl"), domain, 4, 2000);
        assert_ne!(file_digest(&a).unwrap(), file_digest(&c).unwrap());
    }
}

#[test]
fn every_injected_fault_is_reported_once() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "base.jsonl", Domain::Alchemy, 1, 500);
    let clean = read_lines(&path);

    let check = |name: &str, lines: Vec<String>, holdout: Option<&HashSet<String>>, kind: FindingKind, line: usize| {
        let p = dir.path().join(name);
        write_lines(&p, &lines);
        let report = validate_corpus(&p, holdout).unwrap();
        assert_eq!(report.findings.len(), 1, "{name}: {report}");
        assert_eq!(report.findings[0].kind, kind, "{name}");
        assert_eq!(report.findings[0].line, line, "{name}");
    };

    let mut goal = clean.clone();
    edit(&mut goal, 10, |o| {
        let g = o["goal"].as_str().unwrap();
        let (head, last) = g.rsplit_once("|7:").unwrap();
        let bumped = format!("{head}|7:{}", if last == "_" { "r" } else { "_" });
        o["goal"] = bumped.clone().into();
        o["target"] = bumped.into();
    });
    check("goal.jsonl", goal, None, FindingKind::GoalMismatch, 11);

    let mut drain = clean.clone();
    edit(&mut drain, 20, |o| {
        let program = "Drain ( Beaker ( 1 ) , 4 )";
        let init = "1:r|2:_|3:_|4:_|5:_|6:_|7:_";
        o["init"] = init.into();
        o["program"] = program.into();
        o["source"] = format!("{init} [SEP] {program}").into();
    });
    check("drain.jsonl", drain, None, FindingKind::ExecFailure, 21);

    let mut dup = clean.clone();
    dup.push(clean[5].replacen("\"id\":5,", "\"id\":999,", 1));
    check("dup.jsonl", dup, None, FindingKind::Duplicate, 501);

    let mut garbled = clean.clone();
    edit(&mut garbled, 30, |o| {
        o["program"] = "Stir ( Beaker ( 1 ) )".into();
    });
    check("garbled.jsonl", garbled, None, FindingKind::ParseFailure, 31);

    let mut not_json = clean.clone();
    not_json[40] = "{not json".into();
    check("notjson.jsonl", not_json, None, FindingKind::ParseFailure, 41);

    let mut bad_source = clean.clone();
    edit(&mut bad_source, 50, |o| {
        o["source"] = "something else".into();
    });
    check("source.jsonl", bad_source, None, FindingKind::ParseFailure, 51);

    let held: HashSet<String> = {
        let v: Value = serde_json::from_str(&clean[60]).unwrap();
        let init = v["init"].as_str().unwrap().to_string();
        let others = clean.iter().filter(|l| l.contains(&format!("\"init\":\"{init}\""))).count();
        assert_eq!(others, 1, "pick a state that appears once");
        [init].into()
    };
    check("holdout.jsonl", clean.clone(), Some(&held), FindingKind::HoldoutViolation, 61);
}

#[test]
fn overlap_injection() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = generate(dir.path(), "corpus.jsonl", Domain::Scene, 1, 1000);
    let pool = generate(dir.path(), "pool.jsonl", Domain::Scene, 2, 400);

    let same = dir.path().join("zero.jsonl");
    inject_overlap(&corpus, &pool, 0.0, 9, &same).unwrap();
    assert_eq!(fs::read(&same).unwrap(), fs::read(&corpus).unwrap());

    let out = dir.path().join("mixed.jsonl");
    let manifest = inject_overlap(&corpus, &pool, 0.4, 9, &out).unwrap();
    assert_eq!(manifest.overlap_ratio, 0.4);
    assert_eq!(manifest.digest, file_digest(&out).unwrap());
    let (before, after, pool_lines) = (read_lines(&corpus), read_lines(&out), read_lines(&pool));
    assert_eq!(before.len(), after.len());
    let pool_pairs: HashSet<(String, String)> = pool_lines
        .iter()
        .map(|l| {
            let v: Value = serde_json::from_str(l).unwrap();
            (v["init"].as_str().unwrap().to_string(), v["program"].as_str().unwrap().to_string())
        })
        .collect();
    let mut marked = 0;
    for (i, (b, a)) in before.iter().zip(&after).enumerate() {
        let ex: PretrainExample = serde_json::from_str(a).unwrap();
        assert_eq!(ex.id, i as u64);
        if ex.injected == Some(true) {
            marked += 1;
            assert!(pool_pairs.contains(&(ex.init.clone(), ex.program.clone())));
        } else {
            assert_eq!(a, b, "line {i} changed without a marker");
        }
    }
    assert_eq!(marked, 160);
    let report = validate_corpus(&out, None).unwrap();
    assert_eq!(report.injected, 160);

    let again = dir.path().join("again.jsonl");
    inject_overlap(&corpus, &pool, 0.4, 9, &again).unwrap();
    assert_eq!(fs::read(&again).unwrap(), fs::read(&out).unwrap());

    // A pool as large as the corpus at ratio 1 replaces every line.
    let small = generate(dir.path(), "small.jsonl", Domain::Scene, 5, 400);
    let full = dir.path().join("full.jsonl");
    inject_overlap(&small, &pool, 1.0, 3, &full).unwrap();
    assert!(read_lines(&full).iter().all(|l| l.contains("\"injected\":true")));

    // Injected lines are exempt from the holdout check.
    let holdout: HashSet<String> = pool_lines
        .iter()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["init"].as_str().unwrap().to_string())
        .collect();
    let report = validate_corpus(&full, Some(&holdout)).unwrap();
    assert_eq!(report.holdout_violations, 0);
}

#[test]
fn injection_size_errors() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = generate(dir.path(), "corpus.jsonl", Domain::Tangrams, 1, 50);
    let pool = generate(dir.path(), "pool.jsonl", Domain::Tangrams, 2, 200);
    let out = dir.path().join("out.jsonl");
    assert!(matches!(inject_overlap(&corpus, &pool, 0.5, 0, &out), Err(CorpusError::Size(_))));
    assert!(matches!(inject_overlap(&corpus, &pool, 1.5, 0, &out), Err(CorpusError::Size(_))));
    assert!(matches!(inject_overlap(&corpus, &pool, -0.1, 0, &out), Err(CorpusError::Size(_))));
    assert!(inject_overlap(&corpus, &pool, 0.25, 0, &out).is_ok());

    let other = generate(dir.path(), "other.jsonl", Domain::Alchemy, 2, 50);
    assert!(matches!(inject_overlap(&corpus, &other, 0.5, 0, &out), Err(CorpusError::Malformed { .. })));

    let cfg = SamplerConfig::for_domain(Domain::Tangrams);
    let err = generate_corpus(Domain::Tangrams, &cfg, 0, &out, &GenerateOptions::default());
    assert!(matches!(err, Err(CorpusError::Size(_))));
}
