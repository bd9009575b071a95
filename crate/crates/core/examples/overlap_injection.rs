//! Builds a validation pool and a corpus whose initial states avoid it, then
//! splices 40% of the pool back in.

use std::collections::HashSet;

use lemkit::corpus::{generate_corpus, inject_overlap, validate_corpus, GenerateOptions};
use lemkit::sampler::SamplerConfig;
use lemkit::state::Domain;

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let domain = Domain::Tangrams;

    let pool = dir.path().join("pool.jsonl");
    let pool_cfg = SamplerConfig::for_domain(domain).with_seed(99);
    generate_corpus(domain, &pool_cfg, 200, &pool, &GenerateOptions::default()).expect("pool");
    let held: HashSet<String> = std::fs::read_to_string(&pool)
        .expect("pool text")
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).expect("json")["init"].as_str().unwrap().to_string())
        .collect();

    let corpus = dir.path().join("corpus.jsonl");
    let mut cfg = SamplerConfig::for_domain(domain).with_seed(1);
    cfg.holdout_states = held.clone();
    generate_corpus(domain, &cfg, 2000, &corpus, &GenerateOptions::default()).expect("corpus");

    let mixed = dir.path().join("mixed.jsonl");
    let m = inject_overlap(&corpus, &pool, 0.4, 5, &mixed).expect("inject");
    let report = validate_corpus(&mixed, Some(&held)).expect("validate");
    println!("overlap ratio {} -> {} injected lines, clean = {}", m.overlap_ratio, report.injected, report.is_clean());
}
