//! Scores hand-made Alchemy predictions: two episodes, one wrong final state.

use lemkit::dataset::{gold_predictions, parse_episodes};
use lemkit::eval::{evaluate, PredictionSet};
use lemkit::state::Domain;

const EPISODES: &str = r#"{"id":"a","domain":"alchemy","init":"1:gg|2:_|3:_|4:_|5:_|6:_|7:_","instructions":["pour","mix","drain","pour","drain"],"gold":["1:_|2:gg|3:_|4:_|5:_|6:_|7:_","1:_|2:gg|3:_|4:_|5:_|6:_|7:_","1:_|2:g|3:_|4:_|5:_|6:_|7:_","1:g|2:_|3:_|4:_|5:_|6:_|7:_","1:_|2:_|3:_|4:_|5:_|6:_|7:_"]}
{"id":"b","domain":"alchemy","init":"1:r|2:_|3:_|4:_|5:_|6:_|7:_","instructions":["a","b","c","d","e"],"gold":["1:r|2:_|3:_|4:_|5:_|6:_|7:_","1:r|2:_|3:_|4:_|5:_|6:_|7:_","1:r|2:_|3:_|4:_|5:_|6:_|7:_","1:r|2:_|3:_|4:_|5:_|6:_|7:_","1:_|2:_|3:_|4:_|5:_|6:_|7:_"]}"#;

fn main() {
    let episodes = parse_episodes(EPISODES, Domain::Alchemy).expect("episodes");
    let mut preds = PredictionSet::new(gold_predictions(&episodes)).expect("unique");
    preds.set("b", 5, "1:r|2:_|3:_|4:_|5:_|6:_|7:_");
    let report = evaluate(Domain::Alchemy, &episodes, &preds).expect("scored");
    print!("{report}");
}
