//! Symbolic environments for language-based environment manipulation.
//!
//! Five domains share one pipeline: [`state`] encodes environment snapshots
//! as text, [`program`] parses and renders action programs, [`exec`] runs
//! them, [`sampler`] draws random valid programs, [`corpus`] writes and
//! checks synthetic pre-training corpora, [`dataset`] reads episode and
//! prediction files, and [`eval`] scores predicted state sequences.
//!
//! ```
//! use lemkit::exec::execute_program;
//! use lemkit::program::parse_program;
//! use lemkit::state::{parse_state, Domain};
//!
//! let s = parse_state(Domain::Tangrams, "1:A|2:B|3:C|4:D|5:E").unwrap();
//! let p = parse_program(Domain::Tangrams, "Remove ( 2 ) ; Insert ( 4 , B )").unwrap();
//! assert_eq!(execute_program(&s, &p).unwrap().render(), "1:A|2:C|3:D|4:B|5:E");
//! ```

pub mod cli;
pub mod corpus;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod exec;
pub mod program;
pub mod sampler;
pub mod state;
