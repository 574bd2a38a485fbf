//! Instances, trace files, replay verification, benchmarks and rendering for
//! the nest-building robot simulated by [`nest_core`].

pub mod bench;
pub mod instance;
pub mod render;
pub mod run;
pub mod trace_file;
pub mod verify;

pub use instance::{
    fixture, gen_random_connected, gen_rough_rectangle, parse_instance, serialize_instance,
    InstanceSpec,
};
pub use run::{run, run_with_sink, RunSummary};
pub use verify::{verify, VerifyReport};
