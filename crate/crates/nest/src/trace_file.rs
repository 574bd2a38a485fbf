//! Line-delimited trace files.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nest_core::{TraceEvent, TraceSink};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceFileError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Writes every event as one line. The first IO error is kept and later
/// events are dropped; call [`FileSink::finish`] to see it.
pub struct FileSink<W: Write = BufWriter<File>> {
    out: W,
    error: Option<io::Error>,
}

impl FileSink {
    pub fn create(path: &Path) -> io::Result<Self> {
        Ok(Self::new(BufWriter::new(File::create(path)?)))
    }
}

impl<W: Write> FileSink<W> {
    pub fn new(out: W) -> Self {
        Self { out, error: None }
    }

    pub fn finish(mut self) -> io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> TraceSink for FileSink<W> {
    fn record(&mut self, event: &TraceEvent) {
        if self.error.is_none() {
            if let Err(e) = writeln!(self.out, "{event}") {
                self.error = Some(e);
            }
        }
    }
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceEvent>, TraceFileError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.parse().map_err(
                |e: nest_core::trace::ParseEventError| TraceFileError::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                },
            )
        })
        .collect()
}

/// Calls `f` on every event of the file, in order, without keeping them.
pub fn for_each_event(path: &Path, mut f: impl FnMut(TraceEvent)) -> Result<(), TraceFileError> {
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event =
            line.parse().map_err(
                |e: nest_core::trace::ParseEventError| TraceFileError::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                },
            )?;
        f(event);
    }
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceEvent>, TraceFileError> {
    let mut events = Vec::new();
    for_each_event(path, |e| events.push(e))?;
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nest_core::trace::EventKind;
    use nest_core::{Cell, Side};

    #[test]
    fn sink_writes_lines_that_parse_back() {
        let mut sink = FileSink::new(Vec::new());
        let e = TraceEvent {
            index: 0,
            position: Cell::new(1, -1),
            kind: EventKind::Turn(Side::Right),
        };
        sink.record(&e);
        let bytes = sink.finish().unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text, "0 turn 1,-1 R\n");
        assert_eq!(parse_trace(&text).unwrap(), vec![e]);
    }

    #[test]
    fn parse_error_names_the_line() {
        let err = parse_trace("0 turn 0,0 L\n\n1 jump 0,0\n").unwrap_err();
        assert!(
            matches!(err, TraceFileError::Parse { line: 3, .. }),
            "{err}"
        );
    }
}
