//! Turns one Scene episode into its five cumulative-history training pairs.

use lemkit::dataset::{emit_finetune_pairs, parse_episodes};
use lemkit::state::Domain;

const EMPTY: &str = "1:__|2:__|3:__|4:__|5:__|6:__|7:__|8:__|9:__|10:__";

fn main() {
    let g1 = EMPTY.replace("1:__", "1:g_");
    let g2 = g1.replace("1:g_", "1:gr");
    let line = serde_json::json!({
        "id": "s1",
        "domain": "scene",
        "init": EMPTY,
        "instructions": [
            "a man in green appears on the left",
            "he puts on a red hat",
            "he takes it off",
            "he puts it back on",
            "he leaves"
        ],
        "gold": [g1, g2, g1, g2, EMPTY],
    });
    let episodes = parse_episodes(&line.to_string(), Domain::Scene).expect("episode");
    for pair in emit_finetune_pairs(&episodes) {
        println!("{} | {}\n    -> {}", pair.step, pair.source, pair.target);
    }
}
