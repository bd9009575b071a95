//! Draws a few (state, program, goal) triples per domain from fixed seeds.

use lemkit::sampler::{stream_rng, Sampler, SamplerConfig};
use lemkit::state::Domain;

fn main() {
    for domain in Domain::ALL {
        let cfg = SamplerConfig::for_domain(domain).with_seed(2024);
        let sampler = Sampler::new(domain, &cfg).expect("default config is valid");
        println!("== {domain}");
        for i in 0..3 {
            let ex = sampler.sample_example(&mut stream_rng(cfg.seed, i)).expect("sample");
            println!("{}\n  {}\n  => {}", ex.init, ex.program, ex.goal);
        }
    }
}
