//! Static frames of a run, replayed from its trace.
//!
//! ASCII legend: `#` brick, `D` brick of the rough disc, `M` marker, `.`
//! empty, `@` light robot, `&` heavy robot.

use std::fmt::Write as _;

use nest_core::{Cell, TraceEvent};

use crate::instance::InstanceSpec;
use crate::verify::Replay;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Ascii,
    Svg,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Ascii => "txt",
            Format::Svg => "svg",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    /// Number of events applied before this frame.
    pub after: u64,
    pub body: String,
}

#[derive(Clone, Copy)]
struct Bounds {
    x0: i64,
    x1: i64,
    y0: i64,
    y1: i64,
}

impl Bounds {
    fn of(c: Cell) -> Self {
        Bounds {
            x0: c.x,
            x1: c.x,
            y0: c.y,
            y1: c.y,
        }
    }

    fn add(&mut self, c: Cell) {
        self.x0 = self.x0.min(c.x);
        self.x1 = self.x1.max(c.x);
        self.y0 = self.y0.min(c.y);
        self.y1 = self.y1.max(c.y);
    }
}

fn glyph(r: &Replay, c: Cell) -> char {
    if c == r.position {
        return if r.heavy { '&' } else { '@' };
    }
    if !r.field.is_full(c) {
        return '.';
    }
    if r.marker == Some(c) {
        'M'
    } else if r.disc.contains(&c) {
        'D'
    } else {
        '#'
    }
}

fn ascii(r: &Replay, b: Bounds) -> String {
    let mut out = String::new();
    for y in (b.y0..=b.y1).rev() {
        for x in b.x0..=b.x1 {
            out.push(glyph(r, Cell::new(x, y)));
        }
        out.push('\n');
    }
    out
}

const UNIT: i64 = 12;

fn svg(r: &Replay, b: Bounds, after: u64) -> String {
    let w = (b.x1 - b.x0 + 1) * UNIT;
    let h = (b.y1 - b.y0 + 1) * UNIT;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, "<title>after {after} events</title>");
    let _ = writeln!(out, r##"<rect width="{w}" height="{h}" fill="#ffffff"/>"##);
    for y in (b.y0..=b.y1).rev() {
        for x in b.x0..=b.x1 {
            let c = Cell::new(x, y);
            let fill = match glyph(r, c) {
                '#' => "#8a5a2b",
                'D' => "#2b6a8a",
                'M' => "#c0392b",
                _ => continue,
            };
            let _ = writeln!(
                out,
                r##"<rect x="{}" y="{}" width="{UNIT}" height="{UNIT}" fill="{fill}" stroke="#333333" stroke-width="0.5"/>"##,
                (x - b.x0) * UNIT,
                (b.y1 - y) * UNIT
            );
        }
    }
    let p = r.position;
    let half = UNIT / 2;
    let _ = writeln!(
        out,
        r##"<circle cx="{}" cy="{}" r="{}" fill="{}" stroke="#000000"/>"##,
        (p.x - b.x0) * UNIT + half,
        (b.y1 - p.y) * UNIT + half,
        half - 2,
        if r.heavy { "#f1c40f" } else { "#ecf0f1" }
    );
    out.push_str("</svg>\n");
    out
}

/// A frame before the first event, after every `every` events, and after the
/// last one. A trace without events gives a single frame.
pub fn render(
    spec: &InstanceSpec,
    events: &[TraceEvent],
    every: u64,
    format: Format,
) -> Vec<Frame> {
    let every = every.max(1);
    let mut replay = Replay::new(spec);
    let mut bounds = Bounds::of(spec.start);
    for c in spec.field.iter() {
        bounds.add(c);
    }
    // Bricks only ever land on cells the robot stood on.
    for e in events {
        replay.apply(e);
        bounds.add(replay.position);
    }
    let draw = |r: &Replay, after: u64| Frame {
        after,
        body: match format {
            Format::Ascii => ascii(r, bounds),
            Format::Svg => svg(r, bounds, after),
        },
    };
    let mut replay = Replay::new(spec);
    let mut frames = vec![draw(&replay, 0)];
    for (i, e) in events.iter().enumerate() {
        replay.apply(e);
        let n = i as u64 + 1;
        if n.is_multiple_of(every) || n == events.len() as u64 {
            frames.push(draw(&replay, n));
        }
    }
    frames
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{fixture, parse_instance};

    #[test]
    fn empty_trace_is_one_frame_of_the_input() {
        let spec = fixture("plus").unwrap();
        let frames = render(&spec, &[], 10, Format::Ascii);
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].body, ".#.\n#@#\n.#.\n");
    }

    #[test]
    fn svg_marks_robot_and_bricks() {
        let spec = parse_instance("S#").unwrap();
        let frames = render(&spec, &[], 1, Format::Svg);
        let body = &frames[0].body;
        assert!(body.starts_with("<svg"));
        assert_eq!(body.matches("<rect").count(), 2);
        assert_eq!(body.matches("<circle").count(), 1);
    }
}
