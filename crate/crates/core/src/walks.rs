//! Search walks: segment traversal, switches, shifting and the return
//! traversal that undoes the switches on the way back.
//!
//! Conditions are evaluated when the robot arrives at a cell. Because the
//! robot always arrives from a full walk cell, "special with the free side
//! full" reduces to "free side full", and an internal cell with a full
//! non-free side is automatically special.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::engine::{Action, EngineError, World};
use crate::geometry::{manhattan, Cell};
use crate::trace::{Side, TraceSink};

pub mod tags {
    /// Payload `<first> <last> <L|R|B> <t|c|m>`.
    pub const SEGMENT: &str = "segment";
    /// Payload `<at> <from> <to>`.
    pub const SWITCH: &str = "switch";
    /// Payload `<picked>`.
    pub const SHIFT: &str = "shift";
}

/// Distance to the marker at which the return traversal stops.
pub const RETURN_RADIUS: u64 = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WalkError {
    Engine(EngineError),
    /// The robot would leave the component in the middle of a segment.
    WalkEscaped(Cell),
    NotABreakPoint(Cell),
    NotOnBrick(Cell),
    /// The shifting precondition (non-free side full) does not hold.
    NotShiftable(Cell),
}

impl From<EngineError> for WalkError {
    fn from(e: EngineError) -> Self {
        WalkError::Engine(e)
    }
}

impl fmt::Display for WalkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WalkError::Engine(e) => write!(f, "{e}"),
            WalkError::WalkEscaped(c) => write!(f, "walk left the component at {c}"),
            WalkError::NotABreakPoint(c) => write!(f, "{c} is not a break point"),
            WalkError::NotOnBrick(c) => write!(f, "robot at {c} is not on a brick"),
            WalkError::NotShiftable(c) => write!(f, "cannot start shifting at {c}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for WalkError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopRule {
    /// Front empty and free side empty.
    Terminal,
    /// Within [`RETURN_RADIUS`] of the marker.
    Marker(Cell),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentEnd {
    Terminal,
    /// Ended at a special cell whose free side (the given side) is full.
    Corner(Side),
    Marker,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    /// In traversal order; the first cell is shared with the previous segment.
    pub cells: Vec<Cell>,
    /// `None` for the first segment of a walk, which is both left- and right-free.
    pub free: Option<Side>,
    pub end: SegmentEnd,
}

impl Segment {
    pub fn first(&self) -> Cell {
        self.cells[0]
    }

    pub fn last(&self) -> Cell {
        *self.cells.last().expect("segments are never empty")
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn is_terminal(&self) -> bool {
        self.end == SegmentEnd::Terminal
    }

    pub fn reversed(&self) -> Segment {
        let mut cells = self.cells.clone();
        cells.reverse();
        Segment {
            cells,
            free: self.free,
            end: self.end,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Left,
    Right,
    /// A single segment ending at a leaf.
    Straight,
    /// A one-cell component.
    Trivial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SwitchRecord {
    pub at: Cell,
    pub from: Cell,
    pub to: Cell,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchWalk {
    pub segments: Vec<Segment>,
    pub orientation: Orientation,
    pub break_points: Vec<SwitchRecord>,
}

impl SearchWalk {
    pub fn trivial(at: Cell) -> Self {
        SearchWalk {
            segments: Vec::new(),
            orientation: Orientation::Trivial,
            break_points: Vec::new(),
        }
        .with_start(at)
    }

    fn with_start(mut self, at: Cell) -> Self {
        if self.segments.is_empty() {
            self.segments.push(Segment {
                cells: alloc::vec![at],
                free: None,
                end: SegmentEnd::Terminal,
            });
        }
        self
    }

    /// Walk cells in order, junctions listed once.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out: Vec<Cell> = Vec::new();
        for s in &self.segments {
            for c in &s.cells {
                if out.last() != Some(c) {
                    out.push(*c);
                }
            }
        }
        out
    }

    pub fn last_segment(&self) -> &Segment {
        self.segments
            .last()
            .expect("walks have at least one segment")
    }
}

/// The bounded memory the controller keeps about a walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WalkMemory {
    /// Free-side label of the last segment; `None` if it is the first one.
    pub last_free: Option<Side>,
    /// Whether the penultimate segment has exactly two cells.
    pub penultimate_short: bool,
    /// Whether the last segment has exactly two cells.
    pub last_short: bool,
    /// Whether the walk has more than two segments.
    pub long: bool,
    pub trivial: bool,
    pub at_leaf: bool,
    /// Whether the switch at the second cell of the last segment moved the
    /// brick that the previous segment's last switch had placed.
    pub second_reused: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftRecord {
    /// Cells emptied, in order.
    pub picked: Vec<Cell>,
    /// Cells filled, in order.
    pub filled: Vec<Cell>,
    /// Where the robot stops, carrying the brick picked last.
    pub end: Cell,
}

fn side_letter(free: Option<Side>) -> char {
    match free {
        None => 'B',
        Some(Side::Left) => 'L',
        Some(Side::Right) => 'R',
    }
}

enum Verdict {
    End(SegmentEnd),
    Switch,
    Continue,
}

fn evaluate<S: TraceSink>(world: &World<S>, free: Option<Side>, rule: StopRule) -> Verdict {
    let front = world.sense_rel(None);
    if let StopRule::Marker(m) = rule {
        if manhattan(world.position(), m) <= RETURN_RADIUS {
            return Verdict::End(SegmentEnd::Marker);
        }
    }
    match free {
        None => {
            if world.sense_rel(Some(Side::Left)) {
                Verdict::End(SegmentEnd::Corner(Side::Left))
            } else if world.sense_rel(Some(Side::Right)) {
                Verdict::End(SegmentEnd::Corner(Side::Right))
            } else if !front && rule == StopRule::Terminal {
                Verdict::End(SegmentEnd::Terminal)
            } else {
                Verdict::Continue
            }
        }
        Some(x) => {
            let free_full = world.sense_rel(Some(x));
            if rule == StopRule::Terminal && !front && !free_full {
                Verdict::End(SegmentEnd::Terminal)
            } else if free_full {
                Verdict::End(SegmentEnd::Corner(x))
            } else if world.sense_rel(Some(x.opposite())) {
                Verdict::Switch
            } else {
                Verdict::Continue
            }
        }
    }
}

/// Move straight until the segment ends. With `evaluate_start` the current
/// cell is checked as if the robot had just arrived at it.
pub fn traverse_segment<S: TraceSink>(
    world: &mut World<S>,
    free: Option<Side>,
    rule: StopRule,
    switching: bool,
    evaluate_start: bool,
    switches: &mut Vec<SwitchRecord>,
) -> Result<Segment, WalkError> {
    let here = world.position();
    if !world.field().is_full(here) {
        return Err(WalkError::NotOnBrick(here));
    }
    let mut cells = alloc::vec![here];
    // The marker rule is also checked at an unevaluated start cell.
    let near_marker = matches!(rule, StopRule::Marker(m) if manhattan(here, m) <= RETURN_RADIUS);
    let mut arrived = evaluate_start || near_marker;
    loop {
        if arrived {
            world.charge_sensing();
            match evaluate(world, free, rule) {
                Verdict::End(end) => {
                    let seg = Segment { cells, free, end };
                    world.note(
                        tags::SEGMENT,
                        format!(
                            "{} {} {} {}",
                            seg.first(),
                            seg.last(),
                            side_letter(free),
                            match end {
                                SegmentEnd::Terminal => 't',
                                SegmentEnd::Corner(_) => 'c',
                                SegmentEnd::Marker => 'm',
                            }
                        ),
                    );
                    return Ok(seg);
                }
                Verdict::Switch if switching => {
                    let x = free.expect("both-free segments never switch");
                    // A start cell evaluated on request may have its back
                    // cell vacated by shifting; the caller vouches for it.
                    let rec = if cells.len() == 1 {
                        perform_switch(world, x)?
                    } else {
                        do_switch(world, x)?
                    };
                    switches.push(rec);
                }
                _ => {}
            }
        }
        if !world.sense_rel(None) {
            return Err(WalkError::WalkEscaped(world.position()));
        }
        world.step(world.facing(), Action::Keep)?;
        cells.push(world.position());
        arrived = true;
    }
}

/// Move the brick on the non-free side to the free side, keeping the
/// robot's weight.
pub fn do_switch<S: TraceSink>(
    world: &mut World<S>,
    free: Side,
) -> Result<SwitchRecord, WalkError> {
    let at = world.position();
    let facing = world.facing();
    let field = world.field();
    if !field.is_full(at.step(facing)) || !field.is_full(at.step(facing.opposite())) {
        return Err(WalkError::NotABreakPoint(at));
    }
    perform_switch(world, free)
}

fn perform_switch<S: TraceSink>(
    world: &mut World<S>,
    free: Side,
) -> Result<SwitchRecord, WalkError> {
    let at = world.position();
    let facing = world.facing();
    let f = at.step(free.opposite().of(facing));
    let e = at.step(free.of(facing));
    if !world.field().is_full(f) || world.field().is_full(e) {
        return Err(WalkError::NotABreakPoint(at));
    }
    if world.is_heavy() {
        world.place(e)?;
        world.bring(f)?;
    } else {
        world.bring(f)?;
        world.place(e)?;
    }
    world.note(tags::SWITCH, format!("{at} {f} {e}"));
    Ok(SwitchRecord { at, from: f, to: e })
}

/// Build and traverse the search walk from the robot's cell, switching at
/// every break point. The robot ends at the last cell of the walk.
pub fn switch_traversal<S: TraceSink>(
    world: &mut World<S>,
) -> Result<(SearchWalk, WalkMemory), WalkError> {
    let start = world.position();
    if !world.field().is_full(start) {
        return Err(WalkError::NotOnBrick(start));
    }
    if world.field().full_neighbors(start) == 0 {
        let memory = WalkMemory {
            last_free: None,
            penultimate_short: false,
            last_short: false,
            long: false,
            trivial: true,
            at_leaf: true,
            second_reused: false,
        };
        return Ok((SearchWalk::trivial(start), memory));
    }
    if !world.sense_rel(None) {
        return Err(WalkError::WalkEscaped(start));
    }
    let mut switches = Vec::new();
    let mut segments = Vec::new();
    let first = traverse_segment(world, None, StopRule::Terminal, true, false, &mut switches)?;
    let mut orientation = Orientation::Straight;
    let mut end = first.end;
    // Rolling memory: lengths of the last two segments, capped at 3.
    let mut prev_len = 0usize;
    let mut last_len = first.len().min(3);
    let mut count = 1usize;
    let mut last_free = None;
    // Whether the previous segment switched at its penultimate cell, and
    // whether the current one switched at its second cell.
    let mut penult_switched = false;
    let mut second_reused = false;
    segments.push(first);
    while let SegmentEnd::Corner(side) = end {
        if orientation == Orientation::Straight {
            orientation = match side {
                Side::Left => Orientation::Left,
                Side::Right => Orientation::Right,
            };
        }
        world.turn(side);
        let free = side.opposite();
        let before = switches.len();
        let seg = traverse_segment(
            world,
            Some(free),
            StopRule::Terminal,
            true,
            false,
            &mut switches,
        )?;
        let fresh = &switches[before..];
        second_reused = penult_switched
            && fresh
                .first()
                .is_some_and(|r| seg.len() > 2 && r.at == seg.cells[1]);
        penult_switched = fresh
            .last()
            .is_some_and(|r| seg.len() > 2 && r.at == seg.cells[seg.len() - 2]);
        end = seg.end;
        prev_len = last_len;
        last_len = seg.len().min(3);
        count = (count + 1).min(3);
        last_free = Some(free);
        segments.push(seg);
    }
    let at_leaf = world.field().full_neighbors(world.position()) == 1;
    let memory = WalkMemory {
        last_free,
        penultimate_short: prev_len == 2,
        last_short: last_len == 2,
        long: count > 2,
        trivial: false,
        at_leaf,
        second_reused,
    };
    let walk = SearchWalk {
        segments,
        orientation,
        break_points: switches,
    };
    Ok((walk, memory))
}

/// Relay bricks backwards along the last segment until a cell that is
/// special in the walk is reached. The robot ends there carrying a brick.
pub fn shifting<S: TraceSink>(
    world: &mut World<S>,
    memory: &WalkMemory,
) -> Result<ShiftRecord, WalkError> {
    let here = world.position();
    let x = memory.last_free.ok_or(WalkError::NotShiftable(here))?;
    if world.is_heavy() || memory.at_leaf || !world.sense_rel(Some(x.opposite())) {
        return Err(WalkError::NotShiftable(here));
    }
    world.turn_back();
    let mut picked = Vec::new();
    let mut filled = Vec::new();
    loop {
        picked.push(world.position());
        world.step(world.facing(), Action::Pick)?;
        world.charge_sensing();
        let special = world.sense_rel(Some(Side::Left))
            || world.sense_rel(Some(Side::Right))
            || !world.sense_rel(None);
        if special {
            break;
        }
        let target = world.position().step(x.of(world.facing()));
        world.place(target)?;
        filled.push(target);
    }
    let end = world.position();
    world.note(tags::SHIFT, format!("{} {end}", picked.len()));
    Ok(ShiftRecord {
        picked,
        filled,
        end,
    })
}

/// The walk backwards: segments in reverse order, each reversed, with the
/// free-side labels kept.
pub fn reversal(walk: &SearchWalk) -> SearchWalk {
    let segments: Vec<Segment> = walk.segments.iter().rev().map(Segment::reversed).collect();
    let orientation = match walk.orientation {
        Orientation::Trivial | Orientation::Straight => walk.orientation,
        _ => match walk.last_segment().free {
            Some(Side::Left) => Orientation::Left,
            Some(Side::Right) => Orientation::Right,
            None => Orientation::Straight,
        },
    };
    SearchWalk {
        segments,
        orientation,
        break_points: walk.break_points.iter().rev().copied().collect(),
    }
}

/// Backtrack with switches until a cell within distance 4 of `marker`.
/// `free` is the label of the segment the robot is on.
pub fn return_switch_traversal<S: TraceSink>(
    world: &mut World<S>,
    free: Option<Side>,
    marker: Cell,
    evaluate_start: bool,
) -> Result<(Vec<Segment>, Vec<SwitchRecord>), WalkError> {
    let mut switches = Vec::new();
    let mut segments = Vec::new();
    let mut free = free;
    let mut evaluate_start = evaluate_start;
    loop {
        let seg = traverse_segment(
            world,
            free,
            StopRule::Marker(marker),
            true,
            evaluate_start,
            &mut switches,
        )?;
        let end = seg.end;
        segments.push(seg);
        match end {
            SegmentEnd::Corner(side) => {
                world.turn(side);
                free = Some(side.opposite());
                evaluate_start = false;
            }
            _ => return Ok((segments, switches)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Field;
    use crate::trace::TraceEvent;

    fn c(x: i64, y: i64) -> Cell {
        Cell::new(x, y)
    }

    fn fig2_walk() -> Vec<Cell> {
        let mut w = alloc::vec![c(0, 0), c(0, 1), c(0, 2)];
        w.extend((1..=5).map(|i| c(-i, 2)));
        w.extend([c(-5, 3), c(-5, 4), c(-6, 4), c(-6, 5)]);
        w.extend((7..=14).map(|i| c(-i, 5)));
        w
    }

    fn fig2_field() -> Field {
        let mut cells = fig2_walk();
        cells.extend([c(-3, 1), c(-4, 1), c(-7, 4), c(-9, 4), c(-10, 4), c(-14, 4)]);
        cells.into_iter().collect()
    }

    fn world(field: Field, start: Cell) -> World<Vec<TraceEvent>> {
        World::with_sink(field, start, Vec::new())
    }

    #[test]
    fn fig2_switch_traversal() {
        let w = fig2_walk();
        assert_eq!(w.len(), 20);
        let mut world = world(fig2_field(), c(0, 0));
        let (walk, mem) = switch_traversal(&mut world).unwrap();
        assert_eq!(walk.orientation, Orientation::Left);
        assert_eq!(walk.cells(), w);
        let bounds: Vec<(usize, usize)> = walk
            .segments
            .iter()
            .map(|s| {
                let i = w.iter().position(|x| *x == s.first()).unwrap();
                (i + 1, i + s.len())
            })
            .collect();
        assert_eq!(
            bounds,
            [(1, 3), (3, 8), (8, 10), (10, 11), (11, 12), (12, 20)]
        );
        let frees: Vec<Option<Side>> = walk.segments.iter().map(|s| s.free).collect();
        use Side::*;
        assert_eq!(
            frees,
            [
                None,
                Some(Right),
                Some(Left),
                Some(Right),
                Some(Left),
                Some(Right)
            ]
        );
        assert!(walk.last_segment().is_terminal());
        let bps: Vec<Cell> = walk.break_points.iter().map(|r| r.at).collect();
        assert_eq!(bps, [w[5], w[6], w[8], w[12], w[14], w[15]]);
        assert_eq!(walk.break_points[1].to, c(-4, 3));
        assert_eq!(walk.break_points[2].from, c(-4, 3));
        assert_eq!(walk.break_points[2].to, c(-6, 3));
        assert_eq!(world.position(), w[19]);
        assert_eq!(mem.last_free, Some(Right));
        assert!(!mem.at_leaf && mem.penultimate_short && mem.long);
        assert_eq!(world.brick_count(), 26);
    }

    #[test]
    fn fig2_shifting_ends_at_w16_and_return_restores() {
        let w = fig2_walk();
        let original = fig2_field();
        let mut world = world(original.clone(), c(0, 0));
        let (walk, mem) = switch_traversal(&mut world).unwrap();
        let shift = shifting(&mut world, &mem).unwrap();
        assert_eq!(shift.end, w[15]);
        assert!(world.is_heavy());
        assert_eq!(shift.filled, [c(-13, 4), c(-12, 4), c(-11, 4)]);
        assert_eq!(shift.picked, [w[19], w[18], w[17], w[16]]);
        let x = mem.last_free.unwrap();
        assert!(!world.sense_rel(Some(x)), "c' is empty here");
        let (segs, switches) =
            return_switch_traversal(&mut world, Some(x), c(0, -4), true).unwrap();
        assert_eq!(world.position(), c(0, 0));
        assert_eq!(switches.len(), 6);
        assert_eq!(segs.len(), 6);
        let rev = reversal(&walk);
        assert_eq!(rev.orientation, Orientation::Right);
        for (a, b) in segs.iter().zip(&rev.segments).skip(1) {
            assert_eq!(a.cells, b.cells);
        }
        // Every switched brick is back; only the shifted bricks moved.
        let mut expected = original.clone();
        for p in &shift.picked {
            expected.remove(*p);
        }
        for f in &shift.filled {
            expected.insert(*f);
        }
        assert_eq!(world.field(), &expected);
        assert!(world.field().is_connected());
    }

    #[test]
    fn line_gives_single_terminal_segment() {
        let field: Field = (0..5).map(|y| c(0, y)).collect();
        let mut world = world(field, c(0, 0));
        let (walk, mem) = switch_traversal(&mut world).unwrap();
        assert_eq!(walk.segments.len(), 1);
        assert_eq!(walk.orientation, Orientation::Straight);
        assert_eq!(world.position(), c(0, 4));
        assert!(mem.at_leaf);
        assert_eq!(world.steps(), 4);
    }

    #[test]
    fn singleton_is_trivial() {
        let field: Field = [c(3, 3)].into_iter().collect();
        let mut world = world(field, c(3, 3));
        let (walk, mem) = switch_traversal(&mut world).unwrap();
        assert!(mem.trivial);
        assert_eq!(walk.orientation, Orientation::Trivial);
        assert_eq!(walk.cells(), [c(3, 3)]);
        assert_eq!(world.steps(), 0);
    }

    #[test]
    fn first_segment_stops_near_marker_rule() {
        let field: Field = (0..6).map(|y| c(0, y)).collect();
        let mut world = world(field, c(0, 5));
        world.turn_back();
        let mut sw = Vec::new();
        let seg = traverse_segment(
            &mut world,
            None,
            StopRule::Marker(c(0, -4)),
            true,
            false,
            &mut sw,
        )
        .unwrap();
        assert_eq!(seg.end, SegmentEnd::Marker);
        assert_eq!(world.position(), c(0, 0));
    }

    #[test]
    fn switch_requires_internal_cell() {
        let field: Field = [c(0, 0), c(0, 1), c(1, 0)].into_iter().collect();
        let mut world = world(field, c(0, 0));
        assert_eq!(
            do_switch(&mut world, Side::Left),
            Err(WalkError::NotABreakPoint(c(0, 0)))
        );
    }

    #[test]
    fn light_switch_moves_brick_across() {
        let field: Field = [c(0, -1), c(0, 0), c(0, 1), c(1, 0)].into_iter().collect();
        let mut world = world(field, c(0, 0));
        let rec = do_switch(&mut world, Side::Left).unwrap();
        assert_eq!(
            rec,
            SwitchRecord {
                at: c(0, 0),
                from: c(1, 0),
                to: c(-1, 0)
            }
        );
        assert!(!world.is_heavy());
        assert!(world.field().is_full(c(-1, 0)) && !world.field().is_full(c(1, 0)));
        assert_eq!(world.steps(), 4);
    }

    #[test]
    fn reversal_is_an_involution_on_cells() {
        let mut world = world(fig2_field(), c(0, 0));
        let (walk, _) = switch_traversal(&mut world).unwrap();
        let rr = reversal(&reversal(&walk));
        assert_eq!(rr.cells(), walk.cells());
        let mut rc = reversal(&walk).cells();
        rc.reverse();
        assert_eq!(rc, walk.cells());
    }

    // Shifting where the relay reaches the first cell of the last segment:
    // the cell beside the robot is then full and belongs to the walk.
    #[test]
    fn shifting_to_first_cell_of_last_segment() {
        // S1 north (0,0)..(0,2), corner left at (0,2); S2 west to (-4,2), terminal.
        let mut cells: Vec<Cell> = (0..3).map(|y| c(0, y)).collect();
        cells.extend((1..=4).map(|i| c(-i, 2)));
        cells.push(c(-4, 1));
        let field: Field = cells.into_iter().collect();
        let mut world = world(field, c(0, 0));
        let (walk, mem) = switch_traversal(&mut world).unwrap();
        assert_eq!(walk.segments.len(), 2);
        assert!(walk.break_points.is_empty());
        assert_eq!(world.position(), c(-4, 2));
        let shift = shifting(&mut world, &mem).unwrap();
        assert_eq!(shift.end, c(0, 2));
        assert_eq!(shift.filled, [c(-3, 1), c(-2, 1), c(-1, 1)]);
        let x = mem.last_free.unwrap();
        assert!(world.sense_rel(Some(x)), "c' is full at the first cell");
        assert!(world.field().is_connected());
    }
}
