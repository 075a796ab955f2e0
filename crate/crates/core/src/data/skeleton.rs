use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One recorded gesture: `t` frames of `3·n` coordinates plus timestamps.
#[derive(Clone, Debug, PartialEq)]
pub struct SkeletonSequence {
    pub name: String,
    pub joint_count: usize,
    pub frames: Vec<Vec<f64>>,
    pub timestamps: Vec<f64>,
}

impl SkeletonSequence {
    /// Checks frame widths, finiteness and strictly increasing timestamps.
    pub fn new(
        name: impl Into<String>,
        joint_count: usize,
        frames: Vec<Vec<f64>>,
        timestamps: Vec<f64>,
    ) -> Result<Self> {
        if joint_count == 0 {
            return Err(Error::Format("joint count must be positive".into()));
        }
        if frames.len() != timestamps.len() {
            return Err(Error::Format(format!(
                "{} frames but {} timestamps",
                frames.len(),
                timestamps.len()
            )));
        }
        for (f, frame) in frames.iter().enumerate() {
            if frame.len() != 3 * joint_count {
                return Err(Error::Format(format!(
                    "frame {f} has {} values, expected {}",
                    frame.len(),
                    3 * joint_count
                )));
            }
            if frame.iter().any(|v| !v.is_finite()) {
                return Err(Error::Format(format!(
                    "frame {f} has a non-finite coordinate"
                )));
            }
        }
        check_timestamps(&timestamps)?;
        Ok(Self {
            name: name.into(),
            joint_count,
            frames,
            timestamps,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// `(x, y, z)` of joint `j` at frame `f`.
    pub fn joint(&self, f: usize, j: usize) -> [f64; 3] {
        let v = &self.frames[f][3 * j..3 * j + 3];
        [v[0], v[1], v[2]]
    }
}

fn check_timestamps(ts: &[f64]) -> Result<()> {
    if let Some(bad) = ts.iter().position(|t| !t.is_finite()) {
        return Err(Error::Format(format!(
            "timestamp at frame {bad} is not finite"
        )));
    }
    if let Some(w) = ts.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Format(format!(
            "timestamps not strictly increasing at frame {}: {} then {}",
            w + 1,
            ts[w],
            ts[w + 1]
        )));
    }
    Ok(())
}

/// Reads a mocap CSV: column 0 is time in seconds, then `x,y,z` per joint.
/// A single header row is skipped when its first cell is not a number.
pub fn parse_skeleton_csv(name: &str, reader: impl Read) -> Result<SkeletonSequence> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut width: Option<usize> = None;
    let mut frames = Vec::new();
    let mut timestamps = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            col: 0,
            message: e.to_string(),
        })?;
        match width {
            None => {
                let cols = record.len();
                if cols < 4 || cols % 3 != 1 {
                    return Err(Error::Format(format!(
                        "{cols} columns: expected 1 time column plus a multiple of 3 coordinates"
                    )));
                }
                width = Some(cols);
                if record.get(0).is_none_or(|c| c.parse::<f64>().is_err()) {
                    continue;
                }
            }
            Some(w) if w != record.len() => {
                return Err(Error::Format(format!(
                    "row {row} has {} columns, expected {w}",
                    record.len()
                )));
            }
            Some(_) => {}
        }
        let mut values = record.iter().enumerate().map(|(c, cell)| {
            cell.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row,
                    col: c + 1,
                    message: format!("`{cell}` is not a finite number"),
                })
        });
        timestamps.push(values.next().expect("width checked")?);
        frames.push(values.collect::<Result<Vec<f64>>>()?);
    }
    let width = width.ok_or_else(|| Error::Format("empty file".into()))?;
    SkeletonSequence::new(name, (width - 1) / 3, frames, timestamps)
}

/// Writes the format read by [`parse_skeleton_csv`], with a header row.
pub fn write_skeleton_csv(seq: &SkeletonSequence, mut out: impl Write) -> std::io::Result<()> {
    let mut line = String::from("time");
    for j in 0..seq.joint_count {
        line.push_str(&format!(",j{j}_x,j{j}_y,j{j}_z"));
    }
    writeln!(out, "{line}")?;
    for (t, frame) in seq.timestamps.iter().zip(&seq.frames) {
        line.clear();
        line.push_str(&t.to_string());
        for v in frame {
            line.push(',');
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Mono = one-handed sign (0), Bi = two-handed sign (1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GestureLabel {
    Mono,
    Bi,
}

impl GestureLabel {
    pub const ALL: [GestureLabel; 2] = [GestureLabel::Mono, GestureLabel::Bi];

    pub fn index(self) -> usize {
        match self {
            GestureLabel::Mono => 0,
            GestureLabel::Bi => 1,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            0 => Ok(GestureLabel::Mono),
            1 => Ok(GestureLabel::Bi),
            _ => Err(Error::Index { index: i, len: 2 }),
        }
    }
}

impl fmt::Display for GestureLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            GestureLabel::Mono => "Mono",
            GestureLabel::Bi => "Bi",
        })
    }
}

impl FromStr for GestureLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mono" | "0" => Ok(GestureLabel::Mono),
            "bi" | "1" => Ok(GestureLabel::Bi),
            other => Err(Error::Format(format!("unknown label `{other}`"))),
        }
    }
}
