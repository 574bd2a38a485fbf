//! Replays a trace against its instance without the engine.
//!
//! Every move is checked against the robot's output table, the reported
//! position must match the replayed one, the brick count (field plus carried
//! brick) must stay constant, and the marker and disc notes must refer to
//! sensible cells. At the end the field must be the recorded rough disc and a
//! nest, with the robot empty-handed.

use std::collections::BTreeSet;

use nest_core::geometry::{is_nest, DiscLayout};
use nest_core::trace::{parse_cell, tags, EventKind};
use nest_core::{Cell, CellState, Direction, Field, Side, TraceEvent, TraceSink, Weight};
use serde::Serialize;

use crate::instance::InstanceSpec;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Index of the offending event, or the event count for end-of-trace
    /// findings.
    pub index: u64,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub events: u64,
    pub moves: u64,
    pub final_bricks: u64,
    pub nest_ok: bool,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.nest_ok
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

/// The replayed world, exposed for the renderer.
#[derive(Clone, Debug)]
pub struct Replay {
    pub field: Field,
    pub position: Cell,
    pub facing: Direction,
    pub heavy: bool,
    pub marker: Option<Cell>,
    pub disc: BTreeSet<Cell>,
    pub disc_center: Option<Cell>,
}

impl Replay {
    pub fn new(spec: &InstanceSpec) -> Self {
        Self {
            field: spec.field.clone(),
            position: spec.start,
            facing: Direction::North,
            heavy: false,
            marker: None,
            disc: BTreeSet::new(),
            disc_center: None,
        }
    }

    pub fn bricks(&self) -> u64 {
        self.field.len() as u64 + u64::from(self.heavy)
    }

    /// Applies one event, returning what was wrong with it. The state is
    /// updated as the event says even when it is illegal, so later events are
    /// judged against the recorded history.
    pub fn apply(&mut self, event: &TraceEvent) -> Vec<String> {
        let mut problems = Vec::new();
        if event.position != self.position {
            problems.push(format!(
                "robot is at {}, event says {}",
                self.position, event.position
            ));
            self.position = event.position;
        }
        match &event.kind {
            EventKind::Move { dir, leave, arrive } => {
                let full = self.field.is_full(self.position);
                let leave_full = *leave == CellState::Full;
                let arrive_heavy = *arrive == Weight::Heavy;
                // Rows: keep the cell and weight, pick from a full cell while
                // light, or drop on an empty cell while heavy.
                let legal = (leave_full == full && arrive_heavy == self.heavy)
                    || (full && !self.heavy && !leave_full && arrive_heavy)
                    || (!full && self.heavy && leave_full && !arrive_heavy);
                if !legal {
                    problems.push(format!(
                        "illegal output: cell {}, robot {}, leaves {}, arrives {}",
                        if full { "full" } else { "empty" },
                        if self.heavy { "heavy" } else { "light" },
                        if leave_full { "full" } else { "empty" },
                        if arrive_heavy { "heavy" } else { "light" },
                    ));
                }
                let before = self.bricks();
                if leave_full {
                    self.field.insert(self.position);
                } else {
                    self.field.remove(self.position);
                }
                self.heavy = arrive_heavy;
                if self.bricks() != before {
                    problems.push(format!(
                        "brick count changed from {before} to {}",
                        self.bricks()
                    ));
                }
                self.position = self.position.step(*dir);
                self.facing = *dir;
            }
            EventKind::Turn(side) => {
                self.facing = match side {
                    Side::Left => self.facing.left(),
                    Side::Right => self.facing.right(),
                };
            }
            EventKind::Note { tag, payload } => match tag.as_str() {
                tags::SET_MARKER => match parse_cell(payload) {
                    Some(c) if self.field.is_full(c) => self.marker = Some(c),
                    Some(c) => {
                        problems.push(format!("marker set on empty cell {c}"));
                        self.marker = Some(c);
                    }
                    None => problems.push(format!("bad marker payload {payload:?}")),
                },
                tags::CLEAR_MARKER => self.marker = None,
                tags::SET_DISC => match parse_cell(payload) {
                    Some(c) => {
                        self.disc = BTreeSet::from([c]);
                        self.disc_center = Some(c);
                    }
                    None => problems.push(format!("bad disc payload {payload:?}")),
                },
                tags::GROW_DISC => match (parse_cell(payload), self.disc_center) {
                    (Some(c), Some(center)) => {
                        let expected =
                            DiscLayout::new(center, self.disc.len() as u64).map(|d| d.next_cell());
                        if expected.ok() != Some(c) {
                            problems.push(format!("disc grows by {c}, which is not its next cell"));
                        }
                        self.disc.insert(c);
                    }
                    (Some(_), None) => problems.push("disc grows before it exists".into()),
                    (None, _) => problems.push(format!("bad disc payload {payload:?}")),
                },
                _ => {}
            },
        }
        problems
    }
}

/// Streaming replay; feed it events as a sink and call [`Verifier::finish`].
pub struct Verifier {
    replay: Replay,
    z: u64,
    next: u64,
    moves: u64,
    violations: Vec<Violation>,
}

impl Verifier {
    pub fn new(spec: &InstanceSpec) -> Self {
        let replay = Replay::new(spec);
        let z = replay.bricks();
        Self {
            replay,
            z,
            next: 0,
            moves: 0,
            violations: Vec::new(),
        }
    }

    pub fn push(&mut self, event: &TraceEvent) {
        let i = self.next;
        self.next += 1;
        if event.index != i {
            self.violations.push(Violation {
                index: i,
                message: format!("event numbered {}, expected {i}", event.index),
            });
        }
        if matches!(event.kind, EventKind::Move { .. }) {
            self.moves += 1;
        }
        for message in self.replay.apply(event) {
            self.violations.push(Violation { index: i, message });
        }
    }

    pub fn finish(self) -> VerifyReport {
        let Verifier {
            replay,
            z,
            next: end,
            moves,
            mut violations,
        } = self;
        if replay.bricks() != z {
            violations.push(Violation {
                index: end,
                message: format!("{} bricks at the end, {z} at the start", replay.bricks()),
            });
        }
        if replay.heavy {
            violations.push(Violation {
                index: end,
                message: "robot still carries a brick".into(),
            });
        }
        if !replay.disc.is_empty() && replay.field.cells() != &replay.disc {
            violations.push(Violation {
                index: end,
                message: "final field differs from the recorded rough disc".into(),
            });
        }
        if replay.marker.is_some() {
            violations.push(Violation {
                index: end,
                message: "marker still set at the end".into(),
            });
        }
        let nest_ok = !replay.heavy
            && is_nest(&replay.field)
            && (replay.disc.is_empty() || replay.field.cells() == &replay.disc);
        VerifyReport {
            events: end,
            moves,
            final_bricks: replay.bricks(),
            nest_ok,
            violations,
        }
    }
}

impl TraceSink for Verifier {
    fn record(&mut self, event: &TraceEvent) {
        self.push(event);
    }
}

pub fn verify(spec: &InstanceSpec, events: &[TraceEvent]) -> VerifyReport {
    let mut v = Verifier::new(spec);
    for e in events {
        v.push(e);
    }
    v.finish()
}
