//! Plain-text flow state snapshots.
//!
//! ```text
//! flow-state 1
//! nx 72
//! ny 14
//! t 2.0
//! u 1022
//! <values, one per line>
//! v 1008
//! ...
//! p 1008
//! ...
//! ```
//!
//! Values are written in the shortest form that parses back to the same
//! bits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ns2d::{FlowState, Grid};
use thiserror::Error;

const MAGIC: &str = "flow-state 1";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed checkpoint: {0}")]
    Header(String),
    #[error("checkpoint ends inside or before block `{block}`: expected {expected} values, found {found}")]
    Truncated {
        block: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("bad value on line {line}: `{text}`")]
    Value { line: usize, text: String },
    #[error("checkpoint is {found}, active grid is {expected}")]
    Dimension { expected: String, found: String },
}

pub fn checkpoint_text(state: &FlowState) -> String {
    let mut s = String::with_capacity(24 * (state.u.len() + state.v.len() + state.p.len()));
    let _ = writeln!(s, "{MAGIC}\nnx {}\nny {}\nt {:?}", state.nx, state.ny, state.t);
    for (name, values) in [("u", &state.u), ("v", &state.v), ("p", &state.p)] {
        let _ = writeln!(s, "{name} {}", values.len());
        for x in values.iter() {
            let _ = writeln!(s, "{x:?}");
        }
    }
    s
}

pub fn save_checkpoint(state: &FlowState, path: &Path) -> Result<(), CheckpointError> {
    std::fs::write(path, checkpoint_text(state)).map_err(|source| CheckpointError::Io {
        path: path.to_path_buf(),
        source,
    })
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        self.inner.next().map(|(n, l)| (n + 1, l.trim()))
    }

    fn field(&mut self, name: &str) -> Result<&'a str, CheckpointError> {
        match self.next() {
            Some((_, l)) => match l.split_once(' ') {
                Some((k, v)) if k == name => Ok(v.trim()),
                _ => Err(CheckpointError::Header(format!("expected `{name} ...`, got `{l}`"))),
            },
            None => Err(CheckpointError::Header(format!("missing `{name}` line"))),
        }
    }

    fn count(&mut self, name: &str) -> Result<usize, CheckpointError> {
        let v = self.field(name)?;
        v.parse()
            .map_err(|_| CheckpointError::Header(format!("bad `{name}` value `{v}`")))
    }

    fn block(&mut self, name: &'static str) -> Result<Vec<f64>, CheckpointError> {
        let expected = match self.next() {
            None => {
                return Err(CheckpointError::Truncated {
                    block: name,
                    expected: 0,
                    found: 0,
                })
            }
            Some((_, l)) => match l.split_once(' ') {
                Some((k, v)) if k == name => v
                    .trim()
                    .parse()
                    .map_err(|_| CheckpointError::Header(format!("bad length `{v}` for block `{name}`")))?,
                _ => return Err(CheckpointError::Header(format!("expected block `{name}`, got `{l}`"))),
            },
        };
        let mut values = Vec::with_capacity(expected);
        while values.len() < expected {
            let Some((line, text)) = self.next() else {
                return Err(CheckpointError::Truncated {
                    block: name,
                    expected,
                    found: values.len(),
                });
            };
            values.push(text.parse().map_err(|_| CheckpointError::Value {
                line,
                text: text.to_string(),
            })?);
        }
        Ok(values)
    }
}

/// Parses checkpoint text and checks it against the active grid.
pub fn parse_checkpoint(text: &str, grid: &Grid) -> Result<FlowState, CheckpointError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        Some((_, l)) => return Err(CheckpointError::Header(format!("expected `{MAGIC}`, got `{l}`"))),
        None => return Err(CheckpointError::Header("empty file".into())),
    }
    let nx = lines.count("nx")?;
    let ny = lines.count("ny")?;
    if (nx, ny) != (grid.nx, grid.ny) {
        return Err(CheckpointError::Dimension {
            expected: format!("{}x{}", grid.nx, grid.ny),
            found: format!("{nx}x{ny}"),
        });
    }
    let t_text = lines.field("t")?;
    let t = t_text
        .parse()
        .map_err(|_| CheckpointError::Header(format!("bad time `{t_text}`")))?;
    let u = lines.block("u")?;
    let v = lines.block("v")?;
    let p = lines.block("p")?;
    if let Some((line, l)) = lines.next().filter(|(_, l)| !l.is_empty()) {
        return Err(CheckpointError::Header(format!("unexpected content on line {line}: `{l}`")));
    }
    let state = FlowState { nx, ny, t, u, v, p };
    state.check(grid).map_err(|e| CheckpointError::Dimension {
        expected: format!("{}x{} grid", grid.nx, grid.ny),
        found: e.to_string(),
    })?;
    Ok(state)
}

pub fn load_checkpoint(path: &Path, grid: &Grid) -> Result<FlowState, CheckpointError> {
    let text = std::fs::read_to_string(path).map_err(|source| CheckpointError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_checkpoint(&text, grid)
}
