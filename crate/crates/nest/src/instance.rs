//! Initial configurations: the text format, seeded generators and fixtures.
//!
//! The text format is a block of rows, North at the top and West at the left:
//! `#` full, `.` empty, `S` full and the robot's start, `s` an empty start
//! (always rejected, kept so such files get a precise error). Optional header
//! lines precede the rows:
//!
//! ```text
//! @label plus
//! @family fixture
//! @seed 7
//! @origin -1 1
//! .#.
//! #S#
//! .#.
//! ```
//!
//! `@origin x y` gives the coordinates of the top-left character.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use nest_core::{Cell, Field};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceSpec {
    pub field: Field,
    pub start: Cell,
    pub label: String,
    pub seed: Option<u64>,
    pub family: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("the field is not connected")]
    NotConnected,
    #[error("the start cell {0} is empty")]
    StartNotFull(Cell),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> InstanceError {
    InstanceError::Syntax {
        line,
        col,
        msg: msg.into(),
    }
}

impl InstanceSpec {
    /// Checks connectivity and the start cell.
    pub fn new(
        field: Field,
        start: Cell,
        label: impl Into<String>,
        family: impl Into<String>,
        seed: Option<u64>,
    ) -> Result<Self, InstanceError> {
        if !field.is_full(start) {
            return Err(InstanceError::StartNotFull(start));
        }
        if !field.is_connected() {
            return Err(InstanceError::NotConnected);
        }
        Ok(Self {
            field,
            start,
            label: label.into(),
            seed,
            family: family.into(),
        })
    }

    pub fn z(&self) -> u64 {
        self.field.len() as u64
    }
}

fn min_cell(field: &Field) -> Option<Cell> {
    field.iter().next()
}

pub fn parse_instance(text: &str) -> Result<InstanceSpec, InstanceError> {
    let mut label = String::new();
    let mut family = String::new();
    let mut seed = None;
    let mut origin = None;
    let mut rows: Vec<(usize, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end();
        if let Some(header) = line.strip_prefix('@') {
            if !rows.is_empty() {
                return Err(syntax(line_no, 1, "header after the first row"));
            }
            let (key, value) = header.split_once(' ').unwrap_or((header, ""));
            let value = value.trim();
            match key {
                "label" => label = value.to_string(),
                "family" => family = value.to_string(),
                "seed" => seed = Some(value.parse().map_err(|_| syntax(line_no, 7, "bad seed"))?),
                "origin" => {
                    let mut it = value.split_whitespace().map(str::parse::<i64>);
                    match (it.next(), it.next(), it.next()) {
                        (Some(Ok(x)), Some(Ok(y)), None) => origin = Some((x, y)),
                        _ => return Err(syntax(line_no, 9, "origin needs two integers")),
                    }
                }
                _ => return Err(syntax(line_no, 2, format!("unknown header {key:?}"))),
            }
            continue;
        }
        if line.is_empty() {
            if rows.is_empty() {
                continue;
            }
            return Err(syntax(line_no, 1, "blank line inside the grid"));
        }
        rows.push((line_no, line));
    }
    if rows.is_empty() {
        return Err(syntax(1, 1, "no grid rows"));
    }
    let (ox, oy) = origin.unwrap_or((0, rows.len() as i64 - 1));
    let mut field = Field::new();
    let mut start = None;
    for (r, (line_no, line)) in rows.iter().enumerate() {
        for (col, ch) in line.chars().enumerate() {
            let cell = Cell::new(ox + col as i64, oy - r as i64);
            let is_start = matches!(ch, 'S' | 's');
            match ch {
                '#' | 'S' => {
                    field.insert(cell);
                }
                '.' | 's' => {}
                _ => {
                    return Err(syntax(
                        *line_no,
                        col + 1,
                        format!("unexpected character {ch:?}"),
                    ))
                }
            }
            if is_start {
                if start.is_some() {
                    return Err(syntax(*line_no, col + 1, "second start cell"));
                }
                start = Some(cell);
            }
        }
    }
    let start = start.ok_or_else(|| syntax(rows[0].0, 1, "no start cell"))?;
    InstanceSpec::new(field, start, label, family, seed)
}

pub fn serialize_instance(spec: &InstanceSpec) -> String {
    let mut out = String::new();
    if !spec.label.is_empty() {
        let _ = writeln!(out, "@label {}", spec.label);
    }
    if !spec.family.is_empty() {
        let _ = writeln!(out, "@family {}", spec.family);
    }
    if let Some(seed) = spec.seed {
        let _ = writeln!(out, "@seed {seed}");
    }
    let cells = spec.field.cells();
    let (x0, x1) = cells.iter().fold((i64::MAX, i64::MIN), |(lo, hi), c| {
        (lo.min(c.x), hi.max(c.x))
    });
    let (y0, y1) = cells.iter().fold((i64::MAX, i64::MIN), |(lo, hi), c| {
        (lo.min(c.y), hi.max(c.y))
    });
    let _ = writeln!(out, "@origin {x0} {y1}");
    for y in (y0..=y1).rev() {
        for x in x0..=x1 {
            let c = Cell::new(x, y);
            out.push(if c == spec.start {
                'S'
            } else if spec.field.is_full(c) {
                '#'
            } else {
                '.'
            });
        }
        out.push('\n');
    }
    out
}

/// Seeded frontier growth: every step fills a uniformly chosen empty cell
/// adjacent to the field.
pub fn gen_random_connected(z: u64, seed: u64) -> Result<InstanceSpec, InstanceError> {
    if z == 0 {
        return Err(InstanceError::Infeasible("z must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = Field::new();
    let mut frontier: Vec<Cell> = Vec::new();
    let mut seen: BTreeSet<Cell> = BTreeSet::new();
    let mut add = |c: Cell, field: &mut Field, frontier: &mut Vec<Cell>| {
        field.insert(c);
        seen.insert(c);
        for n in c.neighbors() {
            if seen.insert(n) {
                frontier.push(n);
            }
        }
    };
    add(Cell::ORIGIN, &mut field, &mut frontier);
    while (field.len() as u64) < z {
        let i = rng.gen_range(0..frontier.len());
        let c = frontier.swap_remove(i);
        add(c, &mut field, &mut frontier);
    }
    let start = min_cell(&field).expect("non-empty");
    InstanceSpec::new(
        field,
        start,
        format!("random-{z}-{seed}"),
        "random",
        Some(seed),
    )
}

/// Sides `(a, b)` of the rough rectangle used for the lower bound.
pub fn rough_rectangle_sides(z: u64, s_prime: u64) -> (u64, u64) {
    let threshold = 10.0 * (z as f64).sqrt();
    let b = if s_prime as f64 >= threshold {
        s_prime
    } else {
        threshold.ceil() as u64
    };
    (z / b, b)
}

/// An `a x b` block, `a` rows and `b` columns, with the remaining `z - ab`
/// cells on top of the West-most columns. When `b > z` the block is empty and
/// the shape is a single row.
pub fn gen_rough_rectangle(z: u64, s_prime: u64) -> Result<InstanceSpec, InstanceError> {
    if s_prime == 0 || s_prime >= z {
        return Err(InstanceError::Infeasible(format!(
            "need 0 < s' < z, got s'={s_prime}, z={z}"
        )));
    }
    let (a, b) = rough_rectangle_sides(z, s_prime);
    let mut field = Field::new();
    for y in 0..a as i64 {
        for x in 0..b as i64 {
            field.insert(Cell::new(x, y));
        }
    }
    for x in 0..(z - a * b) as i64 {
        field.insert(Cell::new(x, a as i64));
    }
    let start = min_cell(&field).expect("non-empty");
    InstanceSpec::new(
        field,
        start,
        format!("rect-{z}-{s_prime}"),
        "rough-rectangle",
        None,
    )
}

pub const FIXTURES: &[&str] = &[
    "fig2-staircase",
    "line-k",
    "plus",
    "L-shape",
    "spiral",
    "comb",
];

/// The search walk of the staircase figure, `w1` first.
pub fn fig2_walk() -> Vec<Cell> {
    let c = Cell::new;
    let mut w = vec![c(0, 0), c(0, 1), c(0, 2)];
    w.extend((1..=5).map(|i| c(-i, 2)));
    w.extend([c(-5, 3), c(-5, 4), c(-6, 4), c(-6, 5)]);
    w.extend((7..=14).map(|i| c(-i, 5)));
    w
}

/// Cells hanging off the walk, each making one walk cell a break point.
pub fn fig2_pendants() -> Vec<Cell> {
    let c = Cell::new;
    vec![c(-3, 1), c(-4, 1), c(-7, 4), c(-9, 4), c(-10, 4), c(-14, 4)]
}

fn from_cells(
    cells: impl IntoIterator<Item = Cell>,
    start: Cell,
    label: &str,
) -> Result<InstanceSpec, InstanceError> {
    InstanceSpec::new(cells.into_iter().collect(), start, label, "fixture", None)
}

/// `line-k` takes any `k >= 1`, e.g. `line-5`.
pub fn fixture(name: &str) -> Result<InstanceSpec, InstanceError> {
    let c = Cell::new;
    if let Some(k) = name.strip_prefix("line-") {
        let k: i64 = k
            .parse()
            .ok()
            .filter(|&k| k >= 1)
            .ok_or_else(|| InstanceError::UnknownFixture(name.into()))?;
        return from_cells((0..k).map(|x| c(x, 0)), c(0, 0), name);
    }
    match name {
        "fig2-staircase" => {
            let mut cells = fig2_walk();
            cells.extend(fig2_pendants());
            from_cells(cells, c(0, 0), name)
        }
        "plus" => from_cells(
            [c(0, 0), c(1, 0), c(-1, 0), c(0, 1), c(0, -1)],
            c(0, 0),
            name,
        ),
        "L-shape" => {
            let cells = (0..8).map(|y| c(0, y)).chain((1..8).map(|x| c(x, 0)));
            from_cells(cells, c(0, 7), name)
        }
        "spiral" => from_cells(spiral(6), c(0, 0), name),
        "comb" => {
            let spine = (0..11).map(|x| c(x, 0));
            let teeth = (0..11)
                .step_by(2)
                .flat_map(|x| (1..5).map(move |y| c(x, y)));
            from_cells(spine.chain(teeth), c(10, 4), name)
        }
        _ => Err(InstanceError::UnknownFixture(name.into())),
    }
}

/// A square spiral path of `turns` arms around the origin, with a gap of one
/// empty row between successive rounds.
fn spiral(turns: i64) -> Vec<Cell> {
    let dirs = [(1, 0), (0, 1), (-1, 0), (0, -1)];
    let mut cells = vec![Cell::ORIGIN];
    let mut cur = Cell::ORIGIN;
    for i in 0..turns * 2 {
        let (dx, dy) = dirs[(i % 4) as usize];
        let len = 2 * (i / 2 + 1);
        for _ in 0..len {
            cur = cur.offset(dx, dy);
            cells.push(cur);
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_on_empty_is_rejected() {
        assert_eq!(
            parse_instance("###\n.s.").unwrap_err(),
            InstanceError::StartNotFull(Cell::new(1, 0))
        );
    }

    #[test]
    fn line_of_three() {
        let spec = parse_instance("S##").unwrap();
        assert_eq!(spec.z(), 3);
        assert_eq!(spec.start, Cell::new(0, 0));
        assert!(spec.field.is_full(Cell::new(2, 0)));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert_eq!(
            parse_instance("S#\n#x").unwrap_err(),
            InstanceError::Syntax {
                line: 2,
                col: 2,
                msg: "unexpected character 'x'".into()
            }
        );
        assert!(matches!(
            parse_instance("S.#"),
            Err(InstanceError::NotConnected)
        ));
        assert!(matches!(
            parse_instance("##"),
            Err(InstanceError::Syntax { .. })
        ));
        assert!(matches!(
            parse_instance("SS"),
            Err(InstanceError::Syntax { .. })
        ));
    }

    #[test]
    fn origin_header_places_rows() {
        let spec = parse_instance("@origin -1 1\n.#.\n#S#\n.#.\n").unwrap();
        assert_eq!(spec.start, Cell::ORIGIN);
        assert_eq!(spec.field, fixture("plus").unwrap().field);
    }

    #[test]
    fn fixtures_are_valid() {
        for name in FIXTURES {
            let name = if *name == "line-k" { "line-5" } else { name };
            let spec = fixture(name).unwrap();
            assert!(spec.field.is_connected(), "{name}");
        }
        assert_eq!(fixture("plus").unwrap().z(), 5);
        assert_eq!(fixture("line-5").unwrap().field.span(), 4);
        assert_eq!(fixture("fig2-staircase").unwrap().z(), 26);
        assert!(fixture("line-0").is_err());
        assert!(fixture("star").is_err());
    }

    #[test]
    fn spiral_has_no_shortcuts() {
        let cells = spiral(6);
        let field: Field = cells.iter().copied().collect();
        assert_eq!(field.len(), cells.len());
        let ends = field
            .iter()
            .filter(|&c| field.full_neighbors(c) == 1)
            .count();
        assert_eq!(ends, 2);
    }

    #[test]
    fn rough_rectangle_shapes() {
        assert_eq!(rough_rectangle_sides(10, 4), (0, 32));
        let r = gen_rough_rectangle(10, 4).unwrap();
        assert_eq!(r.field.span(), 9);
        let spec = gen_rough_rectangle(200, 142).unwrap();
        assert_eq!(rough_rectangle_sides(200, 142), (1, 142));
        assert_eq!(spec.z(), 200);
        assert!(spec.field.is_full(Cell::new(57, 1)) && !spec.field.is_full(Cell::new(58, 1)));
        let exact = gen_rough_rectangle(1200, 400).unwrap();
        assert_eq!(rough_rectangle_sides(1200, 400), (3, 400));
        assert_eq!(exact.field.span(), 2 + 399);
        assert!(gen_rough_rectangle(10, 10).is_err());
    }

    #[test]
    fn random_is_deterministic() {
        assert_eq!(
            gen_random_connected(50, 7).unwrap(),
            gen_random_connected(50, 7).unwrap()
        );
        assert_ne!(
            gen_random_connected(50, 7).unwrap().field,
            gen_random_connected(50, 8).unwrap().field
        );
        assert_eq!(gen_random_connected(1, 3).unwrap().z(), 1);
    }
}
