//! Experiment sweeps: configuration, runners, verification and output.

pub mod emit;
pub mod run;
pub mod spec;
pub mod verify;

pub use emit::{emit, render, ResultTable};
pub use run::{run_keyrate_sweep, run_overlap_sweep, walk_dump};
pub use spec::{parse_index_list, parse_spec, parse_spec_with_overrides, Format, SweepKind, SweepSpec};
pub use verify::{verify, Verdict, VerifyGrid};
