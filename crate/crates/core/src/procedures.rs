//! The nest-building algorithm and its invariant monitors.
//!
//! The simulator answers a few global questions on the robot's behalf
//! (whether a free component exists, where the nearest one is, which cells
//! belong to the rough disc); every move and brick change still goes through
//! the engine.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::engine::{Action, EngineError, World};
use crate::geometry::{components_of, manhattan, Cell, Direction, DiscLayout, Field};
use crate::trace::TraceSink;
use crate::walks::{self, SearchWalk, ShiftRecord, WalkError, WalkMemory};

/// Free cells must be at least this far from the rough disc after a sweep.
pub const CLEARANCE: u64 = 7;
/// Distance from the disc at which the marker is kept.
pub const MARKER_DISC_DISTANCE: u64 = 3;
/// Distance from the marker to its free component.
pub const MARKER_COMPONENT_DISTANCE: u64 = 4;

pub mod tags {
    /// Payload `<checkpoint> <ok|fail>`.
    pub const MONITOR: &str = "monitor";
    /// Payload `<iteration>`.
    pub const ITERATION: &str = "iteration";
    /// Payload `<from> <to>`.
    pub const SWEEP_WALK: &str = "sweep-walk";
    /// Payload `<at> <filled> <emptied> <restored>`.
    pub const REPAIR: &str = "repair";
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NestError {
    DisconnectedInput,
    EmptyInput,
    NotOnBrick(Cell),
    NoDiscSeed,
    NoMarker,
    NoFreeComponent,
    NoMarkerSite,
    Engine(EngineError),
    Walk(WalkError),
}

impl From<EngineError> for NestError {
    fn from(e: EngineError) -> Self {
        NestError::Engine(e)
    }
}

impl From<WalkError> for NestError {
    fn from(e: WalkError) -> Self {
        NestError::Walk(e)
    }
}

impl fmt::Display for NestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NestError::DisconnectedInput => f.write_str("input field is not connected"),
            NestError::EmptyInput => f.write_str("input field is empty"),
            NestError::NotOnBrick(c) => write!(f, "robot starts at {c}, which is empty"),
            NestError::NoDiscSeed => f.write_str("no full cell at distance 2 from the start"),
            NestError::NoMarker => f.write_str("no marker in the ledger"),
            NestError::NoFreeComponent => f.write_str("no free component"),
            NestError::NoMarkerSite => f.write_str("no cell qualifies as the new marker"),
            NestError::Engine(e) => write!(f, "{e}"),
            NestError::Walk(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for NestError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub monitors: bool,
    pub sensing_cost: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            monitors: true,
            sensing_cost: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunSummary {
    pub z: u64,
    pub span: u64,
    pub steps: u64,
    pub sensing_steps: u64,
    pub events: u64,
    pub iterations: u64,
    pub center: Option<Cell>,
    pub is_nest: bool,
    /// Loop heads at which the field was strongly structured.
    pub structured_heads: u64,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantReport {
    pub checkpoint: String,
    /// False when there is no disc or marker to check against.
    pub applicable: bool,
    pub marker_ok: bool,
    pub structured: bool,
    pub strongly_structured: bool,
    pub free_components: usize,
    pub lost_components: usize,
    /// Smallest distance from a free cell to the disc.
    pub clearance: Option<u64>,
    pub violations: Vec<String>,
}

fn free_cells(field: &Field, disc: &DiscLayout, marker: Option<Cell>) -> BTreeSet<Cell> {
    field
        .iter()
        .filter(|c| Some(*c) != marker && !disc.contains(*c))
        .collect()
}

/// Evaluate the structural conditions on the current world.
pub fn check_invariants<S: TraceSink>(world: &World<S>, checkpoint: &str) -> InvariantReport {
    let mut report = InvariantReport {
        checkpoint: checkpoint.into(),
        applicable: false,
        marker_ok: false,
        structured: false,
        strongly_structured: false,
        free_components: 0,
        lost_components: 0,
        clearance: None,
        violations: Vec::new(),
    };
    let (Some(disc), Some(marker)) = (world.disc(), world.marker()) else {
        return report;
    };
    report.applicable = true;
    let field = world.field();
    if !disc.cells.iter().all(|c| field.is_full(*c)) {
        report
            .violations
            .push(format!("{checkpoint}: rough disc has an empty cell"));
    }
    if !field.is_full(marker) {
        report
            .violations
            .push(format!("{checkpoint}: marker {marker} is empty"));
    }
    let free = free_cells(field, disc, Some(marker));
    let comps = components_of(&free);
    report.free_components = comps.len();
    report.clearance = free.iter().map(|c| disc.distance_to(*c)).min();
    let comp_dist: Vec<u64> = comps
        .iter()
        .map(|comp| comp.iter().map(|c| disc.distance_to(*c)).min().unwrap_or(0))
        .collect();
    report.lost_components = comp_dist.iter().filter(|d| **d > CLEARANCE).count();
    report.marker_ok = disc.distance_to(marker) == MARKER_DISC_DISTANCE
        && comps.iter().any(|comp| {
            comp.iter().map(|c| manhattan(*c, marker)).min() == Some(MARKER_COMPONENT_DISTANCE)
        });
    let gap_ok = report.clearance.is_none_or(|d| d >= CLEARANCE);
    report.structured = report.marker_ok && gap_ok;
    report.strongly_structured =
        report.structured && report.lost_components == 0 && world.position() == marker;
    report
}

fn record<S: TraceSink>(
    world: &mut World<S>,
    options: &RunOptions,
    violations: &mut Vec<String>,
    checkpoint: &str,
    problems: Vec<String>,
) {
    if !options.monitors {
        return;
    }
    let ok = problems.is_empty();
    world.note(
        tags::MONITOR,
        format!("{checkpoint} {}", if ok { "ok" } else { "fail" }),
    );
    violations.extend(problems);
}

fn nearest_in<'a>(from: Cell, cells: impl Iterator<Item = &'a Cell>) -> Option<Cell> {
    cells.min_by_key(|c| (manhattan(from, **c), **c)).copied()
}

/// Cells at distance at most `r` from `c`, in ≺ order.
fn diamond(c: Cell, r: i64) -> impl Iterator<Item = Cell> {
    (-r..=r).flat_map(move |dy| {
        let w = r - dy.abs();
        (-w..=w).map(move |dx| c.offset(dx, dy))
    })
}

/// Choose where the marker should go: a cell at distance 3 from the disc and
/// 4 from the component with the ≺-smallest cell.
fn marker_site(
    field: &Field,
    disc: &DiscLayout,
    marker: Cell,
    free: &BTreeSet<Cell>,
) -> Option<Cell> {
    let comps = components_of(free);
    let comp = comps.first()?;
    let mut ring = BTreeSet::new();
    for b in disc.border_tour() {
        for p in diamond(b, MARKER_DISC_DISTANCE as i64) {
            if disc.distance_to(p) == MARKER_DISC_DISTANCE {
                ring.insert(p);
            }
        }
    }
    let dist_to_comp = |p: Cell| -> Option<u64> {
        diamond(p, MARKER_COMPONENT_DISTANCE as i64)
            .filter(|q| comp.contains(q))
            .map(|q| manhattan(p, q))
            .min()
    };
    let isolated = |p: Cell| {
        p.neighbors()
            .iter()
            .all(|n| *n == marker || !field.is_full(*n))
    };
    let usable = |p: Cell| (p == marker || !field.is_full(p)) && isolated(p);
    ring.iter()
        .copied()
        .find(|p| usable(*p) && dist_to_comp(*p) == Some(MARKER_COMPONENT_DISTANCE))
        .or_else(|| {
            ring.iter()
                .copied()
                .find(|p| usable(*p) && dist_to_comp(*p).is_some())
        })
}

/// Clear the neighbourhood of the rough disc and put the marker next to a
/// free component. Starts and ends at the marker.
pub fn sweep<S: TraceSink>(world: &mut World<S>) -> Result<(), NestError> {
    let marker = world.marker().ok_or(NestError::NoMarker)?;
    let disc = world.disc().ok_or(EngineError::NoDisc)?.clone();
    let start = nearest_in(world.position(), disc.cells.iter()).expect("discs are never empty");
    world.go_to(start)?;
    let mut tour = disc.border_tour();
    if let Some(i) = tour.iter().position(|c| *c == start) {
        tour.rotate_left(i);
    }
    tour.push(start);
    for (i, stop) in tour.iter().enumerate() {
        if i > 0 {
            world.go_to(*stop)?;
        }
        world.charge_sensing();
        loop {
            let here = world.position();
            let target = diamond(here, CLEARANCE as i64)
                .filter(|c| *c != marker && world.field().is_full(*c) && !disc.contains(*c))
                .find(|c| disc.distance_to(*c) < CLEARANCE);
            let Some(c) = target else { break };
            world.go_to(c)?;
            let mut first = true;
            while first
                || world.field().is_full(world.position())
                || disc.distance_to(world.position()) < CLEARANCE
            {
                let d = world.direction_away()?;
                world.step(d, if first { Action::Pick } else { Action::Keep })?;
                first = false;
            }
            let drop = world.position();
            world.note(tags::SWEEP_WALK, format!("{c} {drop}"));
            let route = World::<S>::route(drop, here);
            for (k, d) in route.into_iter().enumerate() {
                world.step(d, if k == 0 { Action::Drop } else { Action::Keep })?;
            }
        }
    }
    let free = free_cells(world.field(), &disc, Some(marker));
    if !free.is_empty() {
        let site =
            marker_site(world.field(), &disc, marker, &free).ok_or(NestError::NoMarkerSite)?;
        if site != marker {
            world.go_to(marker)?;
            let route = World::<S>::route(marker, site);
            for (k, d) in route.into_iter().enumerate() {
                world.step(d, if k == 0 { Action::Pick } else { Action::Keep })?;
            }
            world.drop_here()?;
            world.set_marker(Some(site));
        }
    }
    let marker = world.marker().expect("marker was set above");
    world.go_to(marker)?;
    Ok(())
}

/// What the return procedure needs to know about the last search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FindRecord {
    pub walk: SearchWalk,
    pub memory: WalkMemory,
    pub shift: Option<ShiftRecord>,
}

/// Walk to the nearest free component, traverse its search walk and come
/// away with a brick.
pub fn find_next_brick<S: TraceSink>(world: &mut World<S>) -> Result<FindRecord, NestError> {
    let marker = world.marker().ok_or(NestError::NoMarker)?;
    let disc = world.disc().ok_or(EngineError::NoDisc)?;
    let here = world.position();
    let target = diamond(here, 8)
        .filter(|c| *c != marker && world.field().is_full(*c) && !disc.contains(*c))
        .min_by_key(|c| (manhattan(here, *c), *c))
        .or_else(|| {
            let free = free_cells(world.field(), disc, Some(marker));
            nearest_in(here, free.iter())
        })
        .ok_or(NestError::NoFreeComponent)?;
    world.go_to(target)?;
    if let Some(n) = target
        .neighbors()
        .into_iter()
        .filter(|n| world.field().is_full(*n))
        .min()
    {
        world.face(Direction::between(target, n).expect("neighbors"));
    }
    let (walk, memory) = walks::switch_traversal(world)?;
    let shift = if memory.trivial {
        world.pick_here()?;
        None
    } else if memory.at_leaf {
        world.turn_back();
        world.step(world.facing(), Action::Pick)?;
        None
    } else {
        let shift = walks::shifting(world, &memory)?;
        repair_reused_switch(world, &memory)?;
        Some(shift)
    };
    Ok(FindRecord {
        walk,
        memory,
        shift,
    })
}

/// Shifting that stops at the second cell of the last segment, where the
/// switch reused the brick of the previous segment's last switch, would leave
/// the shift-component hanging on a cell the return empties again. Fill that
/// cell with the carried brick, put the reused brick back where it came from,
/// and take the second cell's own brick instead; the return then skips the
/// stale switch through its first-cell branch.
fn repair_reused_switch<S: TraceSink>(
    world: &mut World<S>,
    memory: &WalkMemory,
) -> Result<(), NestError> {
    let Some(x) = memory.last_free else {
        return Ok(());
    };
    let here = world.position();
    let facing = world.facing();
    let side = x.of(facing);
    let c_prime = here.step(side);
    let corner = here.step(facing);
    let penultimate = corner.step(side);
    let field = world.field();
    if !memory.second_reused
        || field.is_full(c_prime)
        || !field.is_full(corner)
        || !field.is_full(penultimate)
    {
        return Ok(());
    }
    let e = here.step(x.opposite().of(facing));
    let source = penultimate.step(facing);
    if !field.is_full(e) || field.is_full(source) {
        return Ok(());
    }
    world.note(tags::REPAIR, format!("{here} {c_prime} {e} {source}"));
    world.place(c_prime)?;
    world.bring(e)?;
    world.place(source)?;
    world.step(facing, Action::Pick)?;
    Ok(())
}

/// Backtrack along the last search walk, undoing its switches, and stop at
/// the marker.
pub fn return_to_marker<S: TraceSink>(
    world: &mut World<S>,
    memory: &WalkMemory,
) -> Result<(), NestError> {
    let marker = world.marker().ok_or(NestError::NoMarker)?;
    if !memory.trivial {
        let x = memory.last_free;
        let at_first_cell = memory.shift_done() && x.is_some_and(|x| world.sense_rel(Some(x)));
        if at_first_cell {
            let x = x.expect("checked above");
            world.turn(x);
            // With a two-cell last segment nothing was placed next to the
            // penultimate cell, so its switch is genuine and gets evaluated.
            let skip = !memory.penultimate_short && !memory.last_short;
            let k = if skip { 2 } else { 1 };
            for _ in 0..k {
                if !world.sense_rel(None) {
                    return Err(WalkError::WalkEscaped(world.position()).into());
                }
                world.step(world.facing(), Action::Keep)?;
            }
            // Labels alternate, and the first segment is both-free.
            let (free, evaluate) = match (memory.penultimate_short, memory.long) {
                (true, true) => {
                    world.turn(x.opposite());
                    (Some(x), false)
                }
                (_, false) => (None, true),
                (false, true) => (Some(x.opposite()), true),
            };
            let evaluate = evaluate || !skip && !memory.penultimate_short;
            walks::return_switch_traversal(world, free, marker, evaluate)?;
        } else {
            walks::return_switch_traversal(world, x, marker, true)?;
        }
    }
    world.go_to(marker)?;
    Ok(())
}

impl WalkMemory {
    /// Whether the search ended with shifting rather than a leaf pick.
    pub fn shift_done(&self) -> bool {
        !self.trivial && !self.at_leaf
    }
}

/// Add the carried brick to the rough disc, then sweep.
pub fn extend_rough_disc<S: TraceSink>(world: &mut World<S>) -> Result<(), NestError> {
    let marker = world.marker().ok_or(NestError::NoMarker)?;
    let e = world.disc().ok_or(EngineError::NoDisc)?.next_cell();
    place_at_disc(world, e, marker)?;
    world.grow_disc()?;
    world.go_to(marker)?;
    sweep(world)
}

/// Carry the brick to `e` and drop it there on the first move towards `back`.
fn place_at_disc<S: TraceSink>(world: &mut World<S>, e: Cell, back: Cell) -> Result<(), NestError> {
    world.go_to(e)?;
    if e == back {
        world.drop_here()?;
        return Ok(());
    }
    let route = World::<S>::route(e, back);
    world.step(route[0], Action::Drop)?;
    Ok(())
}

/// Run the whole algorithm from the world's initial state.
pub fn build_nest<S: TraceSink>(
    world: &mut World<S>,
    options: RunOptions,
) -> Result<RunSummary, NestError> {
    world.set_sensing_cost(options.sensing_cost);
    let z = world.field().len() as u64;
    if z == 0 {
        return Err(NestError::EmptyInput);
    }
    if !world.field().is_connected() {
        return Err(NestError::DisconnectedInput);
    }
    let start = world.position();
    if !world.field().is_full(start) {
        return Err(NestError::NotOnBrick(start));
    }
    let span = world.field().span();
    let mut summary = RunSummary {
        z,
        span,
        steps: 0,
        sensing_steps: 0,
        events: 0,
        iterations: 0,
        center: None,
        is_nest: false,
        structured_heads: 0,
        violations: Vec::new(),
    };
    if span <= 2 {
        summary.is_nest = crate::geometry::is_nest(world.field());
        return Ok(summary);
    }
    world.set_marker(Some(start));
    let seed = diamond(start, 2)
        .find(|c| manhattan(*c, start) == 2 && world.field().is_full(*c))
        .ok_or(NestError::NoDiscSeed)?;
    world.set_disc(seed);
    summary.center = Some(seed);
    sweep(world)?;
    let mut violations = Vec::new();
    loop {
        let disc_len = world.disc().map_or(0, |d| d.size) as usize;
        if world.field().len() <= disc_len + 1 {
            break;
        }
        summary.iterations += 1;
        world.note(tags::ITERATION, format!("{}", summary.iterations));
        let before = if options.monitors {
            let report = check_invariants(world, "loop-head");
            let mut problems = report.violations.clone();
            if !report.strongly_structured {
                problems.push(format!(
                    "iteration {}: not strongly structured (marker_ok={}, clearance={:?}, lost={}, at_marker={})",
                    summary.iterations,
                    report.marker_ok,
                    report.clearance,
                    report.lost_components,
                    world.position() == world.marker().unwrap_or(start)
                ));
            } else {
                summary.structured_heads += 1;
            }
            record(world, &options, &mut violations, "loop-head", problems);
            report.free_components
        } else {
            0
        };
        if world.is_heavy() {
            violations.push(format!(
                "iteration {}: heavy at search start",
                summary.iterations
            ));
        }
        let found = find_next_brick(world)?;
        if options.monitors {
            let report = check_invariants(world, "after-find");
            let mut problems = Vec::new();
            if !world.is_heavy() {
                problems.push(format!(
                    "iteration {}: no brick after search",
                    summary.iterations
                ));
            }
            if let Some(c) = report.clearance {
                if !(CLEARANCE - 2..=CLEARANCE).contains(&c) {
                    problems.push(format!(
                        "iteration {}: clearance {c} after search",
                        summary.iterations
                    ));
                }
            }
            record(world, &options, &mut violations, "after-find", problems);
        }
        return_to_marker(world, &found.memory)?;
        if options.monitors {
            let report = check_invariants(world, "after-return");
            let mut problems = Vec::new();
            if report.lost_components > 0 {
                problems.push(format!(
                    "iteration {}: {} lost components after return",
                    summary.iterations, report.lost_components
                ));
            }
            if report.free_components > before {
                problems.push(format!(
                    "iteration {}: free components grew from {before} to {} over search and return",
                    summary.iterations, report.free_components
                ));
            }
            if Some(world.position()) != world.marker() || !world.is_heavy() {
                problems.push(format!(
                    "iteration {}: not at marker with a brick",
                    summary.iterations
                ));
            }
            record(world, &options, &mut violations, "after-return", problems);
        }
        extend_rough_disc(world)?;
    }
    // The marker brick completes the disc.
    let marker = world.marker().ok_or(NestError::NoMarker)?;
    let e = world.disc().ok_or(EngineError::NoDisc)?.next_cell();
    world.go_to(marker)?;
    let route = World::<S>::route(marker, e);
    for (k, d) in route.iter().enumerate() {
        world.step(*d, if k == 0 { Action::Pick } else { Action::Keep })?;
    }
    world.step(world.facing(), Action::Drop)?;
    world.set_marker(None);
    world.grow_disc()?;
    let disc = world.disc().expect("disc exists");
    if world.field().cells() != &disc.cells {
        violations.push(String::from("final field differs from the rough disc"));
    }
    summary.is_nest = crate::geometry::is_nest(world.field());
    summary.steps = world.steps();
    summary.sensing_steps = world.sensing_steps();
    summary.events = world.events();
    summary.violations = violations;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::minimal_span;
    use crate::trace::NullSink;

    fn c(x: i64, y: i64) -> Cell {
        Cell::new(x, y)
    }

    fn run(cells: &[Cell], start: Cell) -> (RunSummary, Field) {
        let field: Field = cells.iter().copied().collect();
        let mut world = World::with_sink(field, start, NullSink);
        let summary = build_nest(&mut world, RunOptions::default()).unwrap();
        (summary, world.field().clone())
    }

    #[test]
    fn small_span_exits_immediately() {
        let plus = [c(0, 0), c(1, 0), c(-1, 0), c(0, 1), c(0, -1)];
        let (s, _) = run(&plus, c(0, 0));
        assert_eq!(s.steps, 0);
        assert_eq!(s.iterations, 0);
        assert!(s.is_nest);
    }

    #[test]
    fn line_of_four_becomes_a_disc() {
        let line: Vec<Cell> = (0..4).map(|x| c(x, 0)).collect();
        let (s, field) = run(&line, c(0, 0));
        assert!(s.violations.is_empty(), "{:?}", s.violations);
        assert_eq!(s.iterations, 2);
        assert!(s.is_nest);
        assert_eq!(field.len(), 4);
        assert_eq!(field.span(), minimal_span(4).unwrap());
    }

    #[test]
    fn lines_and_blocks() {
        for n in 4..30 {
            let line: Vec<Cell> = (0..n).map(|y| c(0, y)).collect();
            let (s, field) = run(&line, c(0, n / 2));
            assert!(s.violations.is_empty(), "n = {n}: {:?}", s.violations);
            assert_eq!(s.iterations, n as u64 - 2);
            assert!(s.is_nest);
            assert_eq!(field.len() as i64, n);
        }
        for (w, h) in [(3, 3), (4, 6), (7, 5), (10, 10)] {
            let block: Vec<Cell> = (0..w).flat_map(|x| (0..h).map(move |y| c(x, y))).collect();
            let (s, _) = run(&block, c(0, 0));
            assert!(s.violations.is_empty(), "{w}x{h}: {:?}", s.violations);
            assert!(s.is_nest);
        }
    }

    #[test]
    fn sweep_moves_stray_brick_outward() {
        let field: Field = [c(0, 0), c(3, 0), c(0, 5)].into_iter().collect();
        let mut world = World::new(field, c(3, 0));
        world.set_disc(c(0, 0));
        world.set_marker(Some(c(3, 0)));
        sweep(&mut world).unwrap();
        let disc = world.disc().unwrap().clone();
        let marker = world.marker().unwrap();
        let moved: Vec<Cell> = world
            .field()
            .iter()
            .filter(|p| !disc.contains(*p) && *p != marker)
            .collect();
        assert_eq!(moved.len(), 1);
        assert_eq!(disc.distance_to(moved[0]), CLEARANCE);
        let report = check_invariants(&world, "test");
        assert!(report.strongly_structured, "{report:?}");
    }

    #[test]
    fn report_without_ledger_is_not_applicable() {
        let world = World::new(Field::new(), Cell::ORIGIN);
        assert!(!check_invariants(&world, "x").applicable);
    }
}
