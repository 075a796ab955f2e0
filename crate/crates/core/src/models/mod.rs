//! FC, CNN and LSTM classifiers and the convolutional autoencoder.
//!
//! All four share the same input: a zero-padded `t_max × 3n` grid. The FC
//! model sees it flattened, the LSTM one row per step, and the CNN and
//! autoencoder as a single-channel image.

mod checkpoint;
mod layers;
mod network;
mod spec;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use layers::{Conv, Dense};
pub use network::{extract_encoder, AutoencoderPass, CnnOutput, Model};
pub use spec::{Architecture, ModelKind, ModelSpec, NUM_CLASSES};
