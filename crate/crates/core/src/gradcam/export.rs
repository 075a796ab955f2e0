//! Heatmap CSV (`t_max` rows × `3n` columns, no header) and a highlight
//! file with one line per frame:
//!
//! ```text
//! 0: 61 60 65 ...
//! 57: 12 3 ... # padded
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::numcore::Tensor;

use super::GradCamResult;

const PADDED_TAG: &str = "# padded";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Highlight {
    pub frame: usize,
    pub joints: Vec<usize>,
    pub padded: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExportPaths {
    pub heatmap: PathBuf,
    pub highlights: PathBuf,
}

/// Writes `<stem>_heatmap.csv` and `<stem>_highlights.txt` into `dir`.
pub fn export_result(result: &GradCamResult, dir: &Path, stem: &str) -> Result<ExportPaths> {
    if result.top_joints.is_empty() {
        return Err(Error::Contract("Grad-CAM result has no frames".into()));
    }
    let (rows, cols) = match result.input_heatmap.shape() {
        &[r, c] => (r, c),
        s => return Err(Error::Shape(format!("heatmap must be 2-D, got {s:?}"))),
    };
    if rows != result.top_joints.len() || rows != result.padded.len() {
        return Err(Error::Shape(format!(
            "heatmap has {rows} rows but {} highlight frames",
            result.top_joints.len()
        )));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = ExportPaths {
        heatmap: dir.join(format!("{stem}_heatmap.csv")),
        highlights: dir.join(format!("{stem}_highlights.txt")),
    };

    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in result.input_heatmap.values().chunks(cols) {
        writer
            .write_record(row.iter().map(f64::to_string))
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Format(e.to_string()))?;
    fs::write(&paths.heatmap, bytes).map_err(|e| Error::io(&paths.heatmap, e))?;

    let mut text = String::new();
    for (f, (joints, &padded)) in result.top_joints.iter().zip(&result.padded).enumerate() {
        let list: Vec<String> = joints.iter().map(usize::to_string).collect();
        text.push_str(&format!("{f}: {}", list.join(" ")));
        if padded {
            text.push(' ');
            text.push_str(PADDED_TAG);
        }
        text.push('\n');
    }
    fs::write(&paths.highlights, text).map_err(|e| Error::io(&paths.highlights, e))?;
    Ok(paths)
}

pub fn read_heatmap_csv(path: &Path) -> Result<Tensor> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let mut values = Vec::new();
    let (mut rows, mut cols) = (0, None);
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if *cols.get_or_insert(record.len()) != record.len() {
            return Err(Error::Format(format!(
                "{}: ragged row {}",
                path.display(),
                r + 1
            )));
        }
        for (c, cell) in record.iter().enumerate() {
            values.push(cell.trim().parse::<f64>().map_err(|e| Error::Parse {
                row: r + 1,
                col: c + 1,
                message: e.to_string(),
            })?);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::Format(format!("{}: empty heatmap", path.display())))?;
    Tensor::from_vec(&[rows, cols], values)
}

pub fn read_highlights(path: &Path) -> Result<Vec<Highlight>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let bad = |m: &str| Error::Parse {
                row: i + 1,
                col: 1,
                message: m.to_string(),
            };
            let (body, padded) = match line.split_once(PADDED_TAG) {
                Some((b, _)) => (b, true),
                None => (line, false),
            };
            let (frame, joints) = body.split_once(':').ok_or_else(|| bad("missing `:`"))?;
            let frame = frame.trim().parse().map_err(|_| bad("bad frame index"))?;
            let joints = joints
                .split_whitespace()
                .map(|j| j.parse().map_err(|_| bad("bad joint index")))
                .collect::<Result<Vec<usize>>>()?;
            Ok(Highlight {
                frame,
                joints,
                padded,
            })
        })
        .collect()
}
