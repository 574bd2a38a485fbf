//! Cells, fields and the combinatorics of Manhattan discs.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

/// A grid cell. North is `+y`, East is `+x`.
///
/// `Ord` is the row-major order used for every tie-break: a cell precedes
/// another when it lies in a lower row, or in the same row further West.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub x: i64,
    pub y: i64,
}

impl Cell {
    pub const ORIGIN: Cell = Cell { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Cell { x, y }
    }

    pub fn step(self, dir: Direction) -> Cell {
        let (dx, dy) = dir.offset();
        Cell::new(self.x + dx, self.y + dy)
    }

    pub fn offset(self, dx: i64, dy: i64) -> Cell {
        Cell::new(self.x + dx, self.y + dy)
    }

    pub fn neighbors(self) -> [Cell; 4] {
        Direction::ALL.map(|d| self.step(d))
    }

    /// Norm of the cell relative to the origin.
    pub fn norm(self) -> u64 {
        self.x.unsigned_abs() + self.y.unsigned_abs()
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.y.cmp(&other.y).then(self.x.cmp(&other.x))
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

/// Absolute compass direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    /// Also the tie-break priority for moving away from the disc.
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    pub fn offset(self) -> (i64, i64) {
        match self {
            Direction::North => (0, 1),
            Direction::East => (1, 0),
            Direction::South => (0, -1),
            Direction::West => (-1, 0),
        }
    }

    pub fn left(self) -> Direction {
        match self {
            Direction::North => Direction::West,
            Direction::West => Direction::South,
            Direction::South => Direction::East,
            Direction::East => Direction::North,
        }
    }

    pub fn right(self) -> Direction {
        self.left().opposite()
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::North => Direction::South,
            Direction::East => Direction::West,
            Direction::South => Direction::North,
            Direction::West => Direction::East,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Direction::North => 'N',
            Direction::East => 'E',
            Direction::South => 'S',
            Direction::West => 'W',
        }
    }

    pub fn from_letter(c: char) -> Option<Direction> {
        Some(match c {
            'N' => Direction::North,
            'E' => Direction::East,
            'S' => Direction::South,
            'W' => Direction::West,
            _ => return None,
        })
    }

    /// The direction from `from` to an adjacent cell `to`.
    pub fn between(from: Cell, to: Cell) -> Option<Direction> {
        Direction::ALL.into_iter().find(|d| from.step(*d) == to)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeometryError {
    NegativeArgument,
    ZeroSize,
    EmptySet,
    EmptyCell(Cell),
    DiscNotInField,
    MarkerNotFull(Cell),
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::NegativeArgument => f.write_str("argument must be non-negative"),
            GeometryError::ZeroSize => f.write_str("size must be at least 1"),
            GeometryError::EmptySet => f.write_str("cell set must be non-empty"),
            GeometryError::EmptyCell(c) => write!(f, "cell {c} is empty"),
            GeometryError::DiscNotInField => f.write_str("disc cells are not all full"),
            GeometryError::MarkerNotFull(c) => write!(f, "marker {c} is not full"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GeometryError {}

pub fn manhattan(a: Cell, b: Cell) -> u64 {
    a.x.abs_diff(b.x) + a.y.abs_diff(b.y)
}

/// Non-strict row-major comparison: `a` precedes or equals `b`.
pub fn cell_less(a: Cell, b: Cell) -> bool {
    a <= b
}

/// Minimum distance between two non-empty cell sets.
pub fn set_distance<'a, A, B>(a: A, b: B) -> Result<u64, GeometryError>
where
    A: IntoIterator<Item = &'a Cell>,
    B: IntoIterator<Item = &'a Cell> + Clone,
{
    let mut best: Option<u64> = None;
    for &p in a {
        for &q in b.clone() {
            let d = manhattan(p, q);
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    best.ok_or(GeometryError::EmptySet)
}

/// Local classification of a full cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellClass {
    pub border: bool,
    pub leaf: bool,
    pub special: bool,
}

/// The set of full cells.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Field {
    full: BTreeSet<Cell>,
}

impl Field {
    pub fn new() -> Self {
        Field::default()
    }

    pub fn len(&self) -> usize {
        self.full.len()
    }

    pub fn is_empty(&self) -> bool {
        self.full.is_empty()
    }

    pub fn is_full(&self, c: Cell) -> bool {
        self.full.contains(&c)
    }

    /// Returns false if the cell was already full.
    pub fn insert(&mut self, c: Cell) -> bool {
        self.full.insert(c)
    }

    /// Returns false if the cell was already empty.
    pub fn remove(&mut self, c: Cell) -> bool {
        self.full.remove(&c)
    }

    /// Full cells in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = Cell> + '_ {
        self.full.iter().copied()
    }

    pub fn cells(&self) -> &BTreeSet<Cell> {
        &self.full
    }

    pub fn full_neighbors(&self, c: Cell) -> usize {
        c.neighbors().iter().filter(|n| self.is_full(**n)).count()
    }

    pub fn span(&self) -> u64 {
        span_of(self.full.iter().copied())
    }

    pub fn components(&self) -> Vec<BTreeSet<Cell>> {
        components_of(&self.full)
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// The component containing `c`, empty if `c` is empty.
    pub fn component_of(&self, c: Cell) -> BTreeSet<Cell> {
        let mut seen = BTreeSet::new();
        if !self.is_full(c) {
            return seen;
        }
        let mut queue = VecDeque::from([c]);
        seen.insert(c);
        while let Some(p) = queue.pop_front() {
            for n in p.neighbors() {
                if self.is_full(n) && seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    pub fn classify(&self, c: Cell) -> Result<CellClass, GeometryError> {
        if !self.is_full(c) {
            return Err(GeometryError::EmptyCell(c));
        }
        let full = Direction::ALL.map(|d| self.is_full(c.step(d)));
        let count = full.iter().filter(|f| **f).count();
        let leaf = count == 1;
        // N,E,S,W: perpendicular pairs are cyclically adjacent entries
        let corner = (0..4).any(|i| full[i] && full[(i + 1) % 4]);
        Ok(CellClass {
            border: count < 4,
            leaf,
            special: leaf || corner,
        })
    }
}

impl FromIterator<Cell> for Field {
    fn from_iter<T: IntoIterator<Item = Cell>>(iter: T) -> Self {
        Field {
            full: iter.into_iter().collect(),
        }
    }
}

/// Span from the extremes of `x + y` and `x - y`.
pub fn span_of(cells: impl IntoIterator<Item = Cell>) -> u64 {
    let mut it = cells.into_iter();
    let Some(first) = it.next() else {
        return 0;
    };
    let (mut smin, mut smax) = (first.x + first.y, first.x + first.y);
    let (mut dmin, mut dmax) = (first.x - first.y, first.x - first.y);
    for c in it {
        smin = smin.min(c.x + c.y);
        smax = smax.max(c.x + c.y);
        dmin = dmin.min(c.x - c.y);
        dmax = dmax.max(c.x - c.y);
    }
    smax.abs_diff(smin).max(dmax.abs_diff(dmin))
}

/// 4-connected components, each keyed and sorted by its smallest cell.
pub fn components_of(cells: &BTreeSet<Cell>) -> Vec<BTreeSet<Cell>> {
    let mut seen: BTreeSet<Cell> = BTreeSet::new();
    let mut out = Vec::new();
    // iteration is row-major, so components come out sorted by their minimum
    for &start in cells {
        if seen.contains(&start) {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        comp.insert(start);
        while let Some(p) = queue.pop_front() {
            for n in p.neighbors() {
                if cells.contains(&n) && seen.insert(n) {
                    comp.insert(n);
                    queue.push_back(n);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Number of cells in a disc of radius `r`: `2r² + 2r + 1`.
pub fn disc_size(r: i64) -> Result<u64, GeometryError> {
    if r < 0 {
        return Err(GeometryError::NegativeArgument);
    }
    Ok(disc_size_u(r as u64))
}

fn disc_size_u(r: u64) -> u64 {
    2 * r * r + 2 * r + 1
}

/// Largest radius `r` with `disc_size(r) <= z`, for `z >= 1`.
pub fn disc_radius(z: u64) -> u64 {
    debug_assert!(z >= 1);
    // integer sqrt seed, then correct
    let mut r = isqrt(z / 2);
    while disc_size_u(r + 1) <= z {
        r += 1;
    }
    while r > 0 && disc_size_u(r) > z {
        r -= 1;
    }
    r
}

fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = n;
    let mut y = x.div_ceil(2);
    while y < x {
        x = y;
        y = (x + n / x) / 2;
    }
    x
}

/// Maximum size of a field of span `s`.
pub fn max_size_for_span(s: i64) -> Result<u64, GeometryError> {
    if s < 0 {
        return Err(GeometryError::NegativeArgument);
    }
    let s = s as u64;
    Ok(if s.is_multiple_of(2) {
        disc_size_u(s / 2)
    } else {
        disc_size_u((s - 1) / 2) + s
    })
}

/// The span shared by every nest of size `z`.
pub fn minimal_span(z: u64) -> Result<u64, GeometryError> {
    if z == 0 {
        return Err(GeometryError::ZeroSize);
    }
    // h is increasing; start near 2*sqrt(z/2) and walk
    let mut s = 2 * disc_radius(z);
    while s > 0 && max_size_for_span(s as i64 - 1)? >= z {
        s -= 1;
    }
    while max_size_for_span(s as i64)? < z {
        s += 1;
    }
    Ok(s)
}

pub fn is_nest(field: &Field) -> bool {
    match field.len() {
        0 => true,
        z => minimal_span(z as u64).is_ok_and(|s| s == field.span()),
    }
}

/// Rotate a relative offset 90° clockwise.
fn rot_cw((x, y): (i64, i64)) -> (i64, i64) {
    (y, -x)
}

/// Quadrant index (0 = NE .. 3 = SE, counterclockwise) of a non-zero offset,
/// and the offset rotated into the NE quadrant (`x > 0, y >= 0`).
fn quadrant(p: (i64, i64)) -> (u64, (i64, i64)) {
    let mut q = p;
    for k in 0..4 {
        if q.0 > 0 && q.1 >= 0 {
            return (k, q);
        }
        q = rot_cw(q);
    }
    unreachable!("origin has no quadrant")
}

/// Counterclockwise position of offset `p` on the ring of radius `rho`,
/// counted from `(rho - 1, 1)`.
fn ring_index(p: (i64, i64), rho: u64) -> u64 {
    let (k, (x, _)) = quadrant(p);
    // in the NE frame the ring runs (rho-1,1) .. (0,rho) with index rho-1-a,
    // the x-axis cell (rho, 0) closes the ring
    let local = if x as u64 == rho {
        4 * rho - 1
    } else {
        rho - 1 - x as u64
    };
    (local + k * rho) % (4 * rho)
}

/// Offset of the ring cell with counterclockwise index `i` on radius `rho`.
fn ring_offset(i: u64, rho: u64) -> (i64, i64) {
    let (q, j) = (i / rho, (i % rho) as i64);
    let rho = rho as i64;
    match q {
        0 => (rho - 1 - j, 1 + j),
        1 => (-1 - j, rho - 1 - j),
        2 => (-rho + 1 + j, -1 - j),
        _ => (1 + j, -rho + 1 + j),
    }
}

/// A rough disc: a full disc plus a counterclockwise prefix of the next ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscLayout {
    pub center: Cell,
    pub size: u64,
    pub cells: BTreeSet<Cell>,
}

impl DiscLayout {
    pub fn new(center: Cell, size: u64) -> Result<Self, GeometryError> {
        if size == 0 {
            return Err(GeometryError::ZeroSize);
        }
        let mut layout = DiscLayout {
            center,
            size: 1,
            cells: BTreeSet::from([center]),
        };
        while layout.size < size {
            layout.grow();
        }
        Ok(layout)
    }

    /// Radius of the largest full disc contained in the layout.
    pub fn radius(&self) -> u64 {
        disc_radius(self.size)
    }

    /// The unique cell whose addition yields the rough disc of size `size + 1`.
    pub fn next_cell(&self) -> Cell {
        let r = self.radius();
        let k = self.size - disc_size_u(r);
        let (dx, dy) = ring_offset(k, r + 1);
        self.center.offset(dx, dy)
    }

    pub fn grow(&mut self) -> Cell {
        let c = self.next_cell();
        self.cells.insert(c);
        self.size += 1;
        c
    }

    pub fn contains(&self, c: Cell) -> bool {
        let p = (c.x - self.center.x, c.y - self.center.y);
        let n = p.0.unsigned_abs() + p.1.unsigned_abs();
        let r = self.radius();
        if n <= r {
            return true;
        }
        n == r + 1 && ring_index(p, r + 1) < self.size - disc_size_u(r)
    }

    /// Distance from `c` to the nearest cell of the layout, in O(1).
    pub fn distance_to(&self, c: Cell) -> u64 {
        let p = (c.x - self.center.x, c.y - self.center.y);
        let n = p.0.unsigned_abs() + p.1.unsigned_abs();
        let r = self.radius();
        if n <= r {
            return 0;
        }
        let t = n - r;
        let added = self.size - disc_size_u(r);
        if added == 0 {
            return t;
        }
        // Ring cells are at distance >= t-1 from c; exactly t-1 for ring cells
        // lying componentwise between the center and c. Those form one arc.
        let rho = r + 1;
        let (k, (px, py)) = quadrant(p);
        let lo = (rho as i64 - py).max(0);
        let hi = px.min(rho as i64);
        if lo > hi {
            return t;
        }
        let len = (hi - lo + 1) as u64;
        let local_first = if hi as u64 == rho {
            4 * rho - 1
        } else {
            rho - 1 - hi as u64
        };
        let first = (local_first + k * rho) % (4 * rho);
        let min_index = if first + len > 4 * rho { 0 } else { first };
        if min_index < added {
            t - 1
        } else {
            t
        }
    }

    /// Cells of the layout with a 4-neighbor outside it, counterclockwise by
    /// angle around the center.
    pub fn border_tour(&self) -> Vec<Cell> {
        let mut border: Vec<Cell> = self
            .cells
            .iter()
            .copied()
            .filter(|c| c.neighbors().iter().any(|n| !self.contains(*n)))
            .collect();
        let center = self.center;
        border.sort_by(|a, b| {
            angle_cmp(
                (a.x - center.x, a.y - center.y),
                (b.x - center.x, b.y - center.y),
            )
            .then(a.cmp(b))
        });
        border
    }
}

/// Counterclockwise angular order starting from the positive x-axis;
/// the origin sorts first.
fn angle_cmp(a: (i64, i64), b: (i64, i64)) -> Ordering {
    match (a == (0, 0), b == (0, 0)) {
        (true, true) => return Ordering::Equal,
        (true, false) => return Ordering::Less,
        (false, true) => return Ordering::Greater,
        _ => {}
    }
    let (qa, (ax, ay)) = quadrant(a);
    let (qb, (bx, by)) = quadrant(b);
    // within a quadrant compare y/(x+y)
    qa.cmp(&qb)
        .then_with(|| (ay as i128 * (bx + by) as i128).cmp(&(by as i128 * (ax + ay) as i128)))
}

/// Rough disc of size `z` around `center`.
pub fn rough_disc_cells(center: Cell, z: u64) -> Result<DiscLayout, GeometryError> {
    DiscLayout::new(center, z)
}

/// Result of a gap query: `None` when no full cell lies outside the disc and
/// marker.
pub type GapWidth = Option<u64>;

/// Largest `k` such that every full cell outside `disc ∪ {marker}` is at
/// distance at least `k + 1` from the disc.
pub fn gap_width(
    field: &Field,
    disc: &DiscLayout,
    marker: Cell,
) -> Result<GapWidth, GeometryError> {
    if !disc.cells.iter().all(|c| field.is_full(*c)) {
        return Err(GeometryError::DiscNotInField);
    }
    if !field.is_full(marker) {
        return Err(GeometryError::MarkerNotFull(marker));
    }
    Ok(field
        .iter()
        .filter(|c| *c != marker && !disc.contains(*c))
        .map(|c| disc.distance_to(c))
        .min()
        .map(|d| d - 1))
}
