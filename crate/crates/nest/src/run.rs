//! Running the algorithm on an instance.

use nest_core::geometry::{is_nest, rough_disc_cells};
use nest_core::procedures::{build_nest, NestError, RunOptions};
use nest_core::{HashSink, TraceSink, World};
use serde::Serialize;

use crate::instance::InstanceSpec;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunSummary {
    pub label: String,
    pub z: u64,
    /// Span of the initial field.
    pub s: u64,
    pub steps: u64,
    pub sensing_steps: u64,
    pub iterations: u64,
    pub structured_heads: u64,
    pub nest_ok: bool,
    pub invariant_violations: u64,
    pub violations: Vec<String>,
    pub trace_hash: String,
}

impl RunSummary {
    pub fn ok(&self) -> bool {
        self.nest_ok && self.invariant_violations == 0
    }
}

/// A controller error together with the hash of the trace up to it.
#[derive(Debug)]
pub struct RunFailure {
    pub error: NestError,
    pub trace_hash: String,
}

/// Runs the algorithm, feeding every event to `sink` as well as the hash.
pub fn run_with_sink<S: TraceSink>(
    spec: &InstanceSpec,
    options: RunOptions,
    sink: S,
) -> (Result<RunSummary, RunFailure>, S) {
    let mut world = World::with_sink(spec.field.clone(), spec.start, (HashSink::new(), sink));
    let result = build_nest(&mut world, options);
    let (field, _, (hash, sink)) = world.into_parts();
    let trace_hash = hash.hex_digest();
    let result = match result {
        Ok(summary) => {
            let matches_disc = summary.center.is_none_or(|c| {
                rough_disc_cells(c, summary.z).is_ok_and(|d| &d.cells == field.cells())
            });
            let nest_ok = is_nest(&field) && matches_disc && field.len() as u64 == summary.z;
            Ok(RunSummary {
                label: spec.label.clone(),
                z: summary.z,
                s: summary.span,
                steps: summary.steps,
                sensing_steps: summary.sensing_steps,
                iterations: summary.iterations,
                structured_heads: summary.structured_heads,
                nest_ok,
                invariant_violations: summary.violations.len() as u64,
                violations: summary.violations,
                trace_hash,
            })
        }
        Err(error) => Err(RunFailure { error, trace_hash }),
    };
    (result, sink)
}

pub fn run(spec: &InstanceSpec, options: RunOptions) -> Result<RunSummary, RunFailure> {
    run_with_sink(spec, options, nest_core::NullSink).0
}
