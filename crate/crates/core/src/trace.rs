//! Trace events, their line format, and sinks that consume them.
//!
//! One event per line, fields separated by single spaces:
//!
//! ```text
//! <index> move <x>,<y> <N|E|S|W> <e|f> <l|h>
//! <index> turn <x>,<y> <L|R>
//! <index> note <x>,<y> <tag>[ <payload>]
//! ```
//!
//! `<x>,<y>` is the robot position before the event. For moves, the second
//! letter says whether the cell being left stays empty or full and the third
//! gives the robot weight on arrival.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write as _};
use core::str::FromStr;

use sha2::{Digest, Sha256};

use crate::geometry::{Cell, Direction};

/// Content of a cell as seen by the robot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellState {
    Empty,
    Full,
}

impl CellState {
    pub fn letter(self) -> char {
        match self {
            CellState::Empty => 'e',
            CellState::Full => 'f',
        }
    }

    pub fn of(full: bool) -> Self {
        if full {
            CellState::Full
        } else {
            CellState::Empty
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Weight {
    Light,
    Heavy,
}

impl Weight {
    pub fn letter(self) -> char {
        match self {
            Weight::Light => 'l',
            Weight::Heavy => 'h',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// The absolute direction of this side for a robot facing `facing`.
    pub fn of(self, facing: Direction) -> Direction {
        match self {
            Side::Left => facing.left(),
            Side::Right => facing.right(),
        }
    }
}

/// Whether `(current, weight) -> (leave, arrive)` is one of the four legal
/// output rows of the robot automaton.
pub fn is_legal(current: CellState, weight: Weight, leave: CellState, arrive: Weight) -> bool {
    use CellState::*;
    use Weight::*;
    matches!(
        (current, weight, leave, arrive),
        (Empty, Light, Empty, Light)
            | (Empty, Heavy, Empty, Heavy)
            | (Empty, Heavy, Full, Light)
            | (Full, Light, Full, Light)
            | (Full, Light, Empty, Heavy)
            | (Full, Heavy, Full, Heavy)
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventKind {
    Move {
        dir: Direction,
        leave: CellState,
        arrive: Weight,
    },
    Turn(Side),
    Note {
        tag: String,
        payload: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub index: u64,
    pub position: Cell,
    pub kind: EventKind,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            EventKind::Move { dir, leave, arrive } => write!(
                f,
                "{} move {} {} {} {}",
                self.index,
                self.position,
                dir.letter(),
                leave.letter(),
                arrive.letter()
            ),
            EventKind::Turn(side) => write!(
                f,
                "{} turn {} {}",
                self.index,
                self.position,
                match side {
                    Side::Left => 'L',
                    Side::Right => 'R',
                }
            ),
            EventKind::Note { tag, payload } if payload.is_empty() => {
                write!(f, "{} note {} {}", self.index, self.position, tag)
            }
            EventKind::Note { tag, payload } => {
                write!(
                    f,
                    "{} note {} {} {}",
                    self.index, self.position, tag, payload
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseEventError(pub String);

impl fmt::Display for ParseEventError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "malformed trace record: {}", self.0)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParseEventError {}

pub fn parse_cell(s: &str) -> Option<Cell> {
    let (x, y) = s.split_once(',')?;
    Some(Cell::new(x.parse().ok()?, y.parse().ok()?))
}

fn single_char(s: &str) -> Option<char> {
    let mut chars = s.chars();
    let c = chars.next()?;
    chars.next().is_none().then_some(c)
}

impl FromStr for TraceEvent {
    type Err = ParseEventError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let err = || ParseEventError(line.to_string());
        let mut parts = line.splitn(4, ' ');
        let index = parts.next().and_then(|s| s.parse().ok()).ok_or_else(err)?;
        let kind = parts.next().ok_or_else(err)?;
        let position = parts.next().and_then(parse_cell).ok_or_else(err)?;
        let rest = parts.next().unwrap_or("");
        let kind = match kind {
            "move" => {
                let fields: Vec<&str> = rest.split(' ').collect();
                let [d, l, a] = fields[..] else {
                    return Err(err());
                };
                let dir = single_char(d)
                    .and_then(Direction::from_letter)
                    .ok_or_else(err)?;
                let leave = match l {
                    "e" => CellState::Empty,
                    "f" => CellState::Full,
                    _ => return Err(err()),
                };
                let arrive = match a {
                    "l" => Weight::Light,
                    "h" => Weight::Heavy,
                    _ => return Err(err()),
                };
                EventKind::Move { dir, leave, arrive }
            }
            "turn" => match rest {
                "L" => EventKind::Turn(Side::Left),
                "R" => EventKind::Turn(Side::Right),
                _ => return Err(err()),
            },
            "note" => {
                let (tag, payload) = rest.split_once(' ').unwrap_or((rest, ""));
                if tag.is_empty() {
                    return Err(err());
                }
                EventKind::Note {
                    tag: tag.to_string(),
                    payload: payload.to_string(),
                }
            }
            _ => return Err(err()),
        };
        Ok(TraceEvent {
            index,
            position,
            kind,
        })
    }
}

/// Note tags that change the world ledger; replayers must apply them.
pub mod tags {
    /// Payload `<x>,<y>`: the marker is now that cell.
    pub const SET_MARKER: &str = "set-marker";
    /// The marker ledger is cleared.
    pub const CLEAR_MARKER: &str = "clear-marker";
    /// Payload `<x>,<y>`: a one-cell rough disc is created there.
    pub const SET_DISC: &str = "set-disc";
    /// Payload `<x>,<y>`: the rough disc grows by that cell.
    pub const GROW_DISC: &str = "grow-disc";
}

/// Consumer of trace events.
pub trait TraceSink {
    fn record(&mut self, event: &TraceEvent);
}

/// Discards events.
#[derive(Clone, Copy, Debug, Default)]
pub struct NullSink;

impl TraceSink for NullSink {
    fn record(&mut self, _: &TraceEvent) {}
}

impl TraceSink for Vec<TraceEvent> {
    fn record(&mut self, event: &TraceEvent) {
        self.push(event.clone());
    }
}

impl<S: TraceSink + ?Sized> TraceSink for &mut S {
    fn record(&mut self, event: &TraceEvent) {
        (**self).record(event)
    }
}

impl<A: TraceSink, B: TraceSink> TraceSink for (A, B) {
    fn record(&mut self, event: &TraceEvent) {
        self.0.record(event);
        self.1.record(event);
    }
}

/// SHA-256 over the newline-terminated line encoding of every event.
#[derive(Clone, Default)]
pub struct HashSink {
    hasher: Sha256,
    line: String,
    count: u64,
}

impl HashSink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Lowercase hex digest of everything recorded so far.
    pub fn hex_digest(&self) -> String {
        let digest = self.hasher.clone().finalize();
        let mut out = String::with_capacity(64);
        for b in digest.iter() {
            let _ = write!(out, "{b:02x}");
        }
        out
    }
}

impl TraceSink for HashSink {
    fn record(&mut self, event: &TraceEvent) {
        self.line.clear();
        let _ = writeln!(self.line, "{event}");
        self.hasher.update(self.line.as_bytes());
        self.count += 1;
    }
}
