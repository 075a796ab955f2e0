//! Mocap CSV parsing, zero-padding and dataset splits.

mod dataset;
mod skeleton;

pub use dataset::{
    flatten, load_dataset, pad_sequence, read_labels, read_sequence, split_dataset, write_labels,
    DatasetSplits, PaddedSample, SplitScheme, SSL_LABELLED_PER_SPLIT, SSL_MIN_SAMPLES,
};
pub use skeleton::{parse_skeleton_csv, write_skeleton_csv, GestureLabel, SkeletonSequence};
