//! Converts an upstream tab-separated Alchemy interaction into an episode record.

use lemkit::dataset::{convert, Episode, SourceFormat};
use lemkit::state::Domain;

const TSV: &str = "train-A1\t1:g 2:_ 3:_ 4:o 5:rr 6:_ 7:_\tpour the green into beaker two\t1:_ 2:g 3:_ 4:o 5:rr 6:_ 7:_\tmix it\t1:_ 2:b 3:_ 4:o 5:rr 6:_ 7:_\tdrain the red\t1:_ 2:b 3:_ 4:o 5:_ 6:_ 7:_\tpour orange into the second\t1:_ 2:bo 3:_ 4:_ 5:_ 6:_ 7:_\tdrain one from it\t1:_ 2:b 3:_ 4:_ 5:_ 6:_ 7:_";

fn main() {
    let records = convert(TSV, SourceFormat::SconeTsv, Domain::Alchemy).expect("well-formed row");
    let episode = Episode::from_record(records[0].clone(), Domain::Alchemy, 1).expect("valid states");
    println!("{}", serde_json::to_string(&records[0]).unwrap());
    for (t, state) in episode.states().enumerate() {
        println!("S{t} {state}");
    }
}
