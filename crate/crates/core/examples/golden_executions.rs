//! Runs one hand-written program per domain and prints every intermediate state.

use lemkit::exec::execute_with_trace;
use lemkit::program::parse_program;
use lemkit::state::{parse_state, Domain};

const CASES: &[(Domain, &str, &str)] = &[
    (
        Domain::Alchemy,
        "1:rr|2:gg|3:g|4:ooo|5:_|6:_|7:_",
        "Pour ( Beaker ( 1 ) , Beaker ( 2 ) ) ; Mix ( Beaker ( 2 ) ) ; Drain ( Beaker ( -1 , o ) , 1/3 )",
    ),
    (Domain::Scene, "1:__|2:__|3:__|4:__|5:__|6:__|7:__|8:__|9:__|10:__", "Person ( 3 , g ) ; Hat ( 3 , r )"),
    (Domain::Tangrams, "1:A|2:B|3:C|4:_|5:_", "Remove ( 1 ) ; Insert ( 3 , E )"),
    (
        Domain::ProPara,
        "ent:water|sugar loc:soil|-",
        "Move ( water , soil , root ) ; Create ( sugar , leaf )",
    ),
    (Domain::Recipes, "ent:beef|pepper loc:-|bowl", "Create ( beef , oven ) ; Destroy ( pepper )"),
];

fn main() {
    for (domain, state, program) in CASES {
        let state = parse_state(*domain, state).expect("valid state");
        let program = parse_program(*domain, program).expect("valid program");
        println!("{domain}: {program}");
        for (t, s) in execute_with_trace(&state, &program).expect("program runs").iter().enumerate() {
            println!("  S{t} {s}");
        }
    }
}
