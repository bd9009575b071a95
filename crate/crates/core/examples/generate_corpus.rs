//! Writes a small Scene corpus with two workers, then validates it.
//!
//! `cargo run --example generate_corpus -- [n] [out]`

use std::path::PathBuf;

use lemkit::corpus::{generate_corpus, validate_corpus, GenerateOptions};
use lemkit::sampler::SamplerConfig;
use lemkit::state::Domain;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: u64 = args.next().map_or(1000, |a| a.parse().expect("n must be an integer"));
    let out = args.next().map_or_else(|| std::env::temp_dir().join("scene-corpus.jsonl"), PathBuf::from);

    let cfg = SamplerConfig::for_domain(Domain::Scene).with_seed(7);
    let opts = GenerateOptions {
        workers: 2,
        ..Default::default()
    };
    let manifest = generate_corpus(Domain::Scene, &cfg, n, &out, &opts).expect("generation");
    println!("{} examples in {} (sha256 {})", manifest.n, out.display(), manifest.digest);

    let report = validate_corpus(&out, None).expect("readable corpus");
    print!("{report}");
}
