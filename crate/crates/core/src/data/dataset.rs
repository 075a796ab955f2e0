use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::skeleton::{parse_skeleton_csv, GestureLabel, SkeletonSequence};
use crate::error::{Error, Result};

/// A sequence zero-padded to `t_max` frames, timestamps dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct PaddedSample {
    pub name: String,
    pub joint_count: usize,
    pub t_max: usize,
    /// Row-major `t_max × 3n`.
    pub grid: Vec<f64>,
    pub original_length: usize,
    pub label: Option<GestureLabel>,
}

impl PaddedSample {
    pub fn width(&self) -> usize {
        3 * self.joint_count
    }

    pub fn row(&self, f: usize) -> &[f64] {
        let w = self.width();
        &self.grid[f * w..(f + 1) * w]
    }

    pub fn with_label(mut self, label: Option<GestureLabel>) -> Self {
        self.label = label;
        self
    }
}

pub fn pad_sequence(seq: &SkeletonSequence, t_max: usize) -> Result<PaddedSample> {
    if t_max == 0 {
        return Err(Error::Contract("t_max must be positive".into()));
    }
    if seq.len() > t_max {
        return Err(Error::Length {
            len: seq.len(),
            t_max,
        });
    }
    let width = 3 * seq.joint_count;
    let mut grid = vec![0.0; t_max * width];
    for (row, frame) in grid.chunks_mut(width).zip(&seq.frames) {
        row.copy_from_slice(frame);
    }
    Ok(PaddedSample {
        name: seq.name.clone(),
        joint_count: seq.joint_count,
        t_max,
        grid,
        original_length: seq.len(),
        label: None,
    })
}

/// Row-major concatenation of the padded grid: frame 0's `3n` values first.
pub fn flatten(sample: &PaddedSample) -> Vec<f64> {
    sample.grid.clone()
}

/// Reads a `name,label` file; a leading header row is tolerated.
pub fn read_labels(path: &Path) -> Result<HashMap<String, GestureLabel>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut labels = HashMap::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            row: r + 1,
            col: 0,
            message: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(Error::Format(format!(
                "label file row {} has {} columns, expected `name,label`",
                r + 1,
                record.len()
            )));
        }
        match record[1].parse::<GestureLabel>() {
            Ok(label) => {
                labels.insert(record[0].to_string(), label);
            }
            Err(_) if r == 0 => {}
            Err(e) => return Err(e),
        }
    }
    Ok(labels)
}

pub fn write_labels<'a>(
    path: &Path,
    labels: impl IntoIterator<Item = (&'a str, GestureLabel)>,
) -> Result<()> {
    let mut text = String::from("name,label\n");
    for (name, label) in labels {
        text.push_str(&format!("{name},{label}\n"));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Skeleton CSV files in `dir`, sorted by file name, excluding `exclude`.
fn skeleton_files(dir: &Path, exclude: Option<&Path>) -> Result<Vec<PathBuf>> {
    let exclude = exclude.and_then(|p| fs::canonicalize(p).ok());
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_csv = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        if !is_csv || !path.is_file() {
            continue;
        }
        if exclude.is_some() && fs::canonicalize(&path).ok() == exclude {
            continue;
        }
        files.push(path);
    }
    files.sort();
    Ok(files)
}

pub fn read_sequence(path: &Path) -> Result<SkeletonSequence> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_skeleton_csv(&name, std::io::BufReader::new(file))
}

/// Parses every CSV in `dir`, pads to the longest sequence (or `t_max`
/// when given) and attaches labels. Output is sorted by sample name.
pub fn load_dataset(dir: &Path, labels: &Path, t_max: Option<usize>) -> Result<Vec<PaddedSample>> {
    let label_map = read_labels(labels)?;
    let mut sequences = Vec::new();
    for path in skeleton_files(dir, Some(labels))? {
        sequences.push(read_sequence(&path)?);
    }
    if let Some(first) = sequences.first() {
        if let Some(odd) = sequences
            .iter()
            .find(|s| s.joint_count != first.joint_count)
        {
            return Err(Error::Format(format!(
                "`{}` has {} joints but `{}` has {}",
                odd.name, odd.joint_count, first.name, first.joint_count
            )));
        }
    }
    let t_max = match t_max {
        Some(t) => t,
        None => sequences.iter().map(|s| s.len()).max().unwrap_or(0).max(1),
    };
    sequences
        .iter()
        .map(|seq| {
            let label = *label_map
                .get(&seq.name)
                .ok_or_else(|| Error::MissingLabel(seq.name.clone()))?;
            Ok(pad_sequence(seq, t_max)?.with_label(Some(label)))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitScheme {
    /// Fully supervised: 60% train, 10% validation, remainder test.
    Sl,
    /// Low-label: 5 train, 5 validation, remainder unlabelled (reused as test).
    Ssl,
}

pub const SSL_LABELLED_PER_SPLIT: usize = 5;
pub const SSL_MIN_SAMPLES: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSplits {
    pub scheme: SplitScheme,
    pub seed: u64,
    pub train: Vec<PaddedSample>,
    pub validation: Vec<PaddedSample>,
    pub test: Vec<PaddedSample>,
    /// Empty under the SL scheme; identical to `test` under SSL.
    pub unsupervised: Vec<PaddedSample>,
}

fn has_both_classes(samples: &[&PaddedSample]) -> bool {
    GestureLabel::ALL
        .iter()
        .all(|c| samples.iter().any(|s| s.label == Some(*c)))
}

pub fn split_dataset(
    samples: &[PaddedSample],
    scheme: SplitScheme,
    seed: u64,
) -> Result<DatasetSplits> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let take = |idx: &[usize]| idx.iter().map(|&i| samples[i].clone()).collect::<Vec<_>>();
    match scheme {
        SplitScheme::Sl => {
            let n = samples.len();
            let n_train = n * 6 / 10;
            let n_val = n / 10;
            if n_train == 0 || n_train + n_val == n {
                return Err(Error::Insufficient(format!(
                    "{n} samples cannot form a train/validation/test split"
                )));
            }
            order.shuffle(&mut rng);
            Ok(DatasetSplits {
                scheme,
                seed,
                train: take(&order[..n_train]),
                validation: take(&order[n_train..n_train + n_val]),
                test: take(&order[n_train + n_val..]),
                unsupervised: Vec::new(),
            })
        }
        SplitScheme::Ssl => {
            if samples.len() < SSL_MIN_SAMPLES {
                return Err(Error::Insufficient(format!(
                    "SSL split needs at least {SSL_MIN_SAMPLES} samples, got {}",
                    samples.len()
                )));
            }
            if let Some(s) = samples.iter().find(|s| s.label.is_none()) {
                return Err(Error::Contract(format!("sample `{}` has no label", s.name)));
            }
            for c in GestureLabel::ALL {
                if samples.iter().filter(|s| s.label == Some(c)).count() < 2 {
                    return Err(Error::Insufficient(format!(
                        "SSL split needs at least 2 `{c}` samples"
                    )));
                }
            }
            let k = SSL_LABELLED_PER_SPLIT;
            loop {
                order.shuffle(&mut rng);
                let train: Vec<_> = order[..k].iter().map(|&i| &samples[i]).collect();
                let val: Vec<_> = order[k..2 * k].iter().map(|&i| &samples[i]).collect();
                if has_both_classes(&train) && has_both_classes(&val) {
                    break;
                }
            }
            let rest = take(&order[2 * k..]);
            Ok(DatasetSplits {
                scheme,
                seed,
                train: take(&order[..k]),
                validation: take(&order[k..2 * k]),
                test: rest.clone(),
                unsupervised: rest,
            })
        }
    }
}
