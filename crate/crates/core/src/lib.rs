//! Simulator and verifier for a single brick-carrying robot that rearranges
//! any connected field of bricks on the oriented grid into a nest: a field of
//! minimum span for its size.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod engine;
pub mod geometry;
pub mod procedures;
pub mod trace;
pub mod walks;

pub use engine::{Action, EngineError, Pose, World};
pub use geometry::{Cell, Direction, DiscLayout, Field};
pub use trace::{CellState, HashSink, NullSink, Side, TraceEvent, TraceSink, Weight};
