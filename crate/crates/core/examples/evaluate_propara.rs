//! Sentence- and document-level scores for a ProPara process where the
//! prediction moves water one step late.

use lemkit::dataset::{gold_predictions, parse_episodes};
use lemkit::eval::{derive_action_tags, evaluate, PredictionSet};
use lemkit::state::Domain;

const EPISODE: &str = r#"{"id":"p","domain":"propara","init":"ent:water|sugar|light loc:soil|-|sun","instructions":["Roots absorb water.","Water goes up the stem.","Light hits the leaf.","Sugar is made."],"gold":["ent:water|sugar|light loc:root|-|sun","ent:water|sugar|light loc:stem|-|sun","ent:water|sugar|light loc:leaf|-|leaf","ent:water|sugar|light loc:-|leaf|-"]}"#;

fn main() {
    let episodes = parse_episodes(EPISODE, Domain::ProPara).expect("episode");
    let states: Vec<_> = episodes[0].states().map(|s| s.entity().unwrap().clone()).collect();
    let grid = derive_action_tags(&states).expect("same entities throughout");
    for (e, name) in grid.entities.iter().enumerate() {
        let tags: Vec<String> = grid.tags[e].iter().map(|t| t.to_string()).collect();
        println!("{name:>6}: {}", tags.join("  "));
    }

    let mut preds = PredictionSet::new(gold_predictions(&episodes)).expect("unique");
    preds.set("p", 1, "ent:water|sugar|light loc:soil|-|sun");
    print!("{}", evaluate(Domain::ProPara, &episodes, &preds).expect("scored"));
}
