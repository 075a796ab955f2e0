//! Hand-gesture recognition on 3D skeleton sequences.
//!
//! The pipeline: parse skeleton CSVs and pad them to a common length
//! ([`data`]), classify one- versus two-handed signs with FC, CNN or LSTM
//! models ([`models`], [`training`]), pretrain the CNN encoder as an
//! autoencoder on unlabelled data, and explain CNN decisions per joint with
//! Grad-CAM ([`gradcam`]). All gradients are hand-written on top of
//! [`numcore`]; [`synth`] generates a labelled corpus to run it all on.

pub mod cli;
pub mod data;
pub mod error;
pub mod gradcam;
pub mod models;
pub mod numcore;
pub mod synth;
pub mod training;

pub use error::{Error, Result};
