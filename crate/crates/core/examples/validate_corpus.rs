//! Generates a small corpus, damages two lines, and lets the validator find them.

use lemkit::corpus::{generate_corpus, validate_corpus, GenerateOptions};
use lemkit::sampler::SamplerConfig;
use lemkit::state::Domain;

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("tangrams.jsonl");
    let cfg = SamplerConfig::for_domain(Domain::Tangrams).with_seed(3);
    generate_corpus(Domain::Tangrams, &cfg, 200, &path, &GenerateOptions::default()).expect("corpus");
    println!("clean: {}", validate_corpus(&path, None).expect("readable"));

    let mut lines: Vec<String> = std::fs::read_to_string(&path).unwrap().lines().map(String::from).collect();
    let mut v: serde_json::Value = serde_json::from_str(&lines[4]).unwrap();
    v["goal"] = "1:A|2:_|3:_|4:_|5:_".into();
    v["target"] = v["goal"].clone();
    lines[4] = v.to_string();
    lines.push(lines[9].replacen("\"id\":9,", "\"id\":200,", 1));
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();

    print!("damaged: {}", validate_corpus(&path, None).expect("readable"));
}
