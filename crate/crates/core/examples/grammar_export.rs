//! Prints every domain's grammar as text and the Alchemy grammar as JSON.

use lemkit::program::enumerate_grammar;
use lemkit::state::Domain;

fn main() {
    for domain in Domain::ALL {
        println!("# {domain}\n{}", enumerate_grammar(domain));
    }
    let json = serde_json::to_string_pretty(&enumerate_grammar(Domain::Alchemy)).expect("serializes");
    println!("{json}");
}
