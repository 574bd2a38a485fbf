//! The mutable world: field, robot pose, ledgers, step accounting and trace
//! emission. Every field change goes through [`World::act_move`], which
//! enforces the four legal output rows of the robot automaton.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{manhattan, Cell, Direction, DiscLayout, Field};
use crate::trace::{
    is_legal, tags, CellState, EventKind, NullSink, Side, TraceEvent, TraceSink, Weight,
};

/// Radius of the window the robot perceives around itself.
pub const SENSING_RADIUS: u64 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Pose {
    pub position: Cell,
    pub facing: Direction,
    pub weight: Weight,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EngineError {
    IllegalAction {
        at: Cell,
        current: CellState,
        weight: Weight,
        leave: CellState,
        arrive: Weight,
    },
    HeavyRobot,
    LightRobot,
    EmptySource(Cell),
    OccupiedTarget(Cell),
    OutOfSensingRange {
        robot: Cell,
        cell: Cell,
    },
    NoDisc,
    NoAwayDirection(Cell),
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::IllegalAction {
                at,
                current,
                weight,
                leave,
                arrive,
            } => write!(
                f,
                "illegal action at {at}: ({}, {}) -> ({}, {})",
                current.letter(),
                weight.letter(),
                leave.letter(),
                arrive.letter()
            ),
            EngineError::HeavyRobot => f.write_str("robot already carries a brick"),
            EngineError::LightRobot => f.write_str("robot carries no brick"),
            EngineError::EmptySource(c) => write!(f, "no brick at {c}"),
            EngineError::OccupiedTarget(c) => write!(f, "cell {c} is already full"),
            EngineError::OutOfSensingRange { robot, cell } => {
                write!(f, "cell {cell} is outside the sensing window of {robot}")
            }
            EngineError::NoDisc => f.write_str("no rough disc in the ledger"),
            EngineError::NoAwayDirection(c) => write!(f, "no direction away from the disc at {c}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EngineError {}

/// What the cell the robot leaves should hold after a move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    Keep,
    Pick,
    Drop,
}

/// Snapshot of the sensing window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub center: Cell,
    /// Offsets of full cells relative to `center`, row-major.
    pub full: Vec<(i64, i64)>,
    /// Offset of the marker if it lies inside the window.
    pub marker: Option<(i64, i64)>,
    /// Whether some cell of the rough disc lies inside the window.
    pub disc_visible: bool,
}

/// Single-owner simulation state.
pub struct World<S: TraceSink = NullSink> {
    field: Field,
    pose: Pose,
    marker: Option<Cell>,
    disc: Option<DiscLayout>,
    steps: u64,
    sensing_steps: u64,
    sensing_cost: u64,
    next_index: u64,
    sink: S,
}

impl World<NullSink> {
    pub fn new(field: Field, start: Cell) -> Self {
        World::with_sink(field, start, NullSink)
    }
}

impl<S: TraceSink> World<S> {
    /// The robot starts light, facing North.
    pub fn with_sink(field: Field, start: Cell, sink: S) -> Self {
        World {
            field,
            pose: Pose {
                position: start,
                facing: Direction::North,
                weight: Weight::Light,
            },
            marker: None,
            disc: None,
            steps: 0,
            sensing_steps: 0,
            sensing_cost: 0,
            next_index: 0,
            sink,
        }
    }

    pub fn set_sensing_cost(&mut self, cost: u64) {
        self.sensing_cost = cost;
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn pose(&self) -> Pose {
        self.pose
    }

    pub fn position(&self) -> Cell {
        self.pose.position
    }

    pub fn facing(&self) -> Direction {
        self.pose.facing
    }

    pub fn weight(&self) -> Weight {
        self.pose.weight
    }

    pub fn is_heavy(&self) -> bool {
        self.pose.weight == Weight::Heavy
    }

    pub fn marker(&self) -> Option<Cell> {
        self.marker
    }

    pub fn disc(&self) -> Option<&DiscLayout> {
        self.disc.as_ref()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn sensing_steps(&self) -> u64 {
        self.sensing_steps
    }

    pub fn events(&self) -> u64 {
        self.next_index
    }

    /// Bricks on the field plus the one carried.
    pub fn brick_count(&self) -> usize {
        self.field.len() + usize::from(self.is_heavy())
    }

    pub fn sink(&self) -> &S {
        &self.sink
    }

    pub fn sink_mut(&mut self) -> &mut S {
        &mut self.sink
    }

    pub fn into_parts(self) -> (Field, Pose, S) {
        (self.field, self.pose, self.sink)
    }

    fn emit(&mut self, kind: EventKind) {
        let event = TraceEvent {
            index: self.next_index,
            position: self.pose.position,
            kind,
        };
        self.next_index += 1;
        self.sink.record(&event);
    }

    pub fn note(&mut self, tag: &str, payload: String) {
        self.emit(EventKind::Note {
            tag: tag.into(),
            payload,
        });
    }

    pub fn set_marker(&mut self, marker: Option<Cell>) {
        self.marker = marker;
        match marker {
            Some(m) => self.note(tags::SET_MARKER, format!("{m}")),
            None => self.note(tags::CLEAR_MARKER, String::new()),
        }
    }

    pub fn set_disc(&mut self, center: Cell) {
        self.disc = Some(DiscLayout::new(center, 1).expect("size 1 is valid"));
        self.note(tags::SET_DISC, format!("{center}"));
    }

    pub fn grow_disc(&mut self) -> Result<Cell, EngineError> {
        let disc = self.disc.as_mut().ok_or(EngineError::NoDisc)?;
        let cell = disc.grow();
        self.note(tags::GROW_DISC, format!("{cell}"));
        Ok(cell)
    }

    /// Full/empty status of a cell within the sensing window.
    pub fn sense(&self, c: Cell) -> Result<bool, EngineError> {
        if manhattan(c, self.pose.position) > SENSING_RADIUS {
            return Err(EngineError::OutOfSensingRange {
                robot: self.pose.position,
                cell: c,
            });
        }
        Ok(self.field.is_full(c))
    }

    /// Status of the cell on `side` of the robot, or in front for `None`.
    pub fn sense_rel(&self, side: Option<Side>) -> bool {
        let dir = side.map_or(self.pose.facing, |s| s.of(self.pose.facing));
        self.field.is_full(self.pose.position.step(dir))
    }

    /// Account for one look at the sensing window without building it.
    pub fn charge_sensing(&mut self) {
        self.sensing_steps += self.sensing_cost;
    }

    pub fn observe(&mut self) -> Observation {
        self.charge_sensing();
        let center = self.pose.position;
        let r = SENSING_RADIUS as i64;
        let mut full = Vec::new();
        let mut disc_visible = false;
        for dy in -r..=r {
            let w = r - dy.abs();
            for dx in -w..=w {
                let c = center.offset(dx, dy);
                if self.field.is_full(c) {
                    full.push((dx, dy));
                }
                if self.disc.as_ref().is_some_and(|d| d.contains(c)) {
                    disc_visible = true;
                }
            }
        }
        let marker = self
            .marker
            .filter(|m| manhattan(*m, center) <= SENSING_RADIUS)
            .map(|m| (m.x - center.x, m.y - center.y));
        Observation {
            center,
            full,
            marker,
            disc_visible,
        }
    }

    /// One automaton output: leave the current cell as `leave`, move to the
    /// neighbor in `dir`, arrive with weight `arrive`.
    pub fn act_move(
        &mut self,
        dir: Direction,
        leave: CellState,
        arrive: Weight,
    ) -> Result<(), EngineError> {
        let here = self.pose.position;
        let current = CellState::of(self.field.is_full(here));
        if !is_legal(current, self.pose.weight, leave, arrive) {
            return Err(EngineError::IllegalAction {
                at: here,
                current,
                weight: self.pose.weight,
                leave,
                arrive,
            });
        }
        self.emit(EventKind::Move { dir, leave, arrive });
        match leave {
            CellState::Full => self.field.insert(here),
            CellState::Empty => self.field.remove(here),
        };
        self.pose.position = here.step(dir);
        self.pose.facing = dir;
        self.pose.weight = arrive;
        self.steps += 1;
        Ok(())
    }

    pub fn step(&mut self, dir: Direction, action: Action) -> Result<(), EngineError> {
        let current = CellState::of(self.field.is_full(self.pose.position));
        let (leave, arrive) = match action {
            Action::Keep => (current, self.pose.weight),
            Action::Pick => (CellState::Empty, Weight::Heavy),
            Action::Drop => (CellState::Full, Weight::Light),
        };
        self.act_move(dir, leave, arrive)
    }

    /// Zero-cost rotation in place.
    pub fn turn(&mut self, side: Side) {
        self.emit(EventKind::Turn(side));
        self.pose.facing = side.of(self.pose.facing);
    }

    pub fn turn_back(&mut self) {
        self.turn(Side::Left);
        self.turn(Side::Left);
    }

    /// Rotate to face `dir` with the fewest turns.
    pub fn face(&mut self, dir: Direction) {
        let f = self.pose.facing;
        if f == dir {
        } else if f.left() == dir {
            self.turn(Side::Left);
        } else if f.right() == dir {
            self.turn(Side::Right);
        } else {
            self.turn_back();
        }
    }

    /// The shortest route used everywhere: vertical leg first, then horizontal.
    pub fn route(from: Cell, to: Cell) -> Vec<Direction> {
        let mut dirs = Vec::with_capacity(manhattan(from, to) as usize);
        let v = if to.y > from.y {
            Direction::North
        } else {
            Direction::South
        };
        let h = if to.x > from.x {
            Direction::East
        } else {
            Direction::West
        };
        dirs.extend(core::iter::repeat_n(v, from.y.abs_diff(to.y) as usize));
        dirs.extend(core::iter::repeat_n(h, from.x.abs_diff(to.x) as usize));
        dirs
    }

    /// Walk to `to` without touching any brick.
    pub fn go_to(&mut self, to: Cell) -> Result<(), EngineError> {
        for d in Self::route(self.pose.position, to) {
            self.step(d, Action::Keep)?;
        }
        Ok(())
    }

    /// Walk to `to` performing `first` on the cell being left by the first move.
    fn go_to_with(&mut self, to: Cell, first: Action) -> Result<(), EngineError> {
        for (i, d) in Self::route(self.pose.position, to).into_iter().enumerate() {
            self.step(d, if i == 0 { first } else { Action::Keep })?;
        }
        Ok(())
    }

    fn check_window(&self, c: Cell) -> Result<(), EngineError> {
        self.sense(c).map(|_| ())
    }

    /// Fetch the brick at a nearby cell and come back with it.
    pub fn bring(&mut self, from: Cell) -> Result<(), EngineError> {
        if self.is_heavy() {
            return Err(EngineError::HeavyRobot);
        }
        self.check_window(from)?;
        if !self.field.is_full(from) {
            return Err(EngineError::EmptySource(from));
        }
        let (home, facing) = (self.pose.position, self.pose.facing);
        if from == home {
            return self.pick_here();
        }
        self.go_to(from)?;
        self.go_to_with(home, Action::Pick)?;
        self.face(facing);
        Ok(())
    }

    /// Carry the brick to a nearby empty cell, drop it and come back.
    pub fn place(&mut self, to: Cell) -> Result<(), EngineError> {
        if !self.is_heavy() {
            return Err(EngineError::LightRobot);
        }
        self.check_window(to)?;
        if self.field.is_full(to) {
            return Err(EngineError::OccupiedTarget(to));
        }
        let (home, facing) = (self.pose.position, self.pose.facing);
        if to == home {
            return self.drop_here();
        }
        self.go_to(to)?;
        self.go_to_with(home, Action::Drop)?;
        self.face(facing);
        Ok(())
    }

    /// Pick the brick under the robot: step back while picking, return.
    pub fn pick_here(&mut self) -> Result<(), EngineError> {
        self.excursion(Action::Pick)
    }

    /// Drop the carried brick under the robot: step back while dropping, return.
    pub fn drop_here(&mut self) -> Result<(), EngineError> {
        self.excursion(Action::Drop)
    }

    fn excursion(&mut self, action: Action) -> Result<(), EngineError> {
        let facing = self.pose.facing;
        self.step(facing.opposite(), action)?;
        self.step(facing, Action::Keep)?;
        Ok(())
    }

    /// The direction that strictly increases the distance to the rough disc,
    /// preferring North, East, South, West.
    pub fn direction_away(&self) -> Result<Direction, EngineError> {
        let disc = self.disc.as_ref().ok_or(EngineError::NoDisc)?;
        let here = self.pose.position;
        let d0 = disc.distance_to(here);
        Direction::ALL
            .into_iter()
            .find(|d| disc.distance_to(here.step(*d)) > d0)
            .ok_or(EngineError::NoAwayDirection(here))
    }
}
