use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Fc,
    Cnn,
    Lstm,
    Autoencoder,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            ModelKind::Fc => "fc",
            ModelKind::Cnn => "cnn",
            ModelKind::Lstm => "lstm",
            ModelKind::Autoencoder => "autoencoder",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fc" => Ok(ModelKind::Fc),
            "cnn" => Ok(ModelKind::Cnn),
            "lstm" => Ok(ModelKind::Lstm),
            "autoencoder" | "ae" => Ok(ModelKind::Autoencoder),
            other => Err(Error::Spec(format!("unknown model kind `{other}`"))),
        }
    }
}

/// Layer sizes. The defaults are the reference configuration; tests shrink
/// them for toy geometries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    /// Hidden widths of the fully connected model (input → … → 2).
    pub fc_hidden: Vec<usize>,
    /// Output channels of each conv stage (conv → ReLU → max-pool).
    pub conv_channels: Vec<usize>,
    /// Square, odd kernel size; padding keeps spatial size.
    pub kernel_size: usize,
    /// Square max-pool window after each conv stage.
    pub pool: usize,
    /// Hidden width of the CNN's dense head.
    pub cnn_head_hidden: usize,
    pub lstm_hidden: usize,
    /// Initial value of the LSTM forget-gate bias. A large value keeps the
    /// cell state alive across the zero-padded tail of short sequences.
    pub lstm_forget_bias: f64,
}

impl Default for Architecture {
    fn default() -> Self {
        Self {
            fc_hidden: vec![256, 64],
            conv_channels: vec![8, 16, 32],
            kernel_size: 3,
            pool: 2,
            cnn_head_hidden: 64,
            lstm_hidden: 128,
            lstm_forget_bias: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub t_max: usize,
    pub joints: usize,
    pub arch: Architecture,
    pub seed: u64,
}

pub const NUM_CLASSES: usize = 2;

impl ModelSpec {
    pub fn new(kind: ModelKind, t_max: usize, joints: usize, seed: u64) -> Self {
        Self {
            kind,
            t_max,
            joints,
            arch: Architecture::default(),
            seed,
        }
    }

    pub fn with_arch(mut self, arch: Architecture) -> Self {
        self.arch = arch;
        self
    }

    /// Width of one frame: `3·n`.
    pub fn frame_width(&self) -> usize {
        3 * self.joints
    }

    pub fn flat_len(&self) -> usize {
        self.t_max * self.frame_width()
    }

    /// Spatial size at the input of each conv stage, plus the final pooled
    /// size as the last entry.
    pub fn conv_sizes(&self) -> Vec<(usize, usize)> {
        let mut sizes = vec![(self.t_max, self.frame_width())];
        for _ in &self.arch.conv_channels {
            let (h, w) = *sizes.last().expect("non-empty");
            sizes.push((h / self.arch.pool, w / self.arch.pool));
        }
        sizes
    }

    /// Length of the flattened last pooled feature map.
    pub fn latent_len(&self) -> usize {
        let (h, w) = *self.conv_sizes().last().expect("non-empty");
        h * w * self.arch.conv_channels.last().copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let a = &self.arch;
        if self.t_max == 0 || self.joints == 0 {
            return Err(Error::Spec(format!(
                "geometry must be positive, got t_max={} joints={}",
                self.t_max, self.joints
            )));
        }
        match self.kind {
            ModelKind::Fc => {
                if a.fc_hidden.contains(&0) {
                    return Err(Error::Spec("fc hidden widths must be positive".into()));
                }
            }
            ModelKind::Lstm => {
                if a.lstm_hidden == 0 {
                    return Err(Error::Spec("lstm hidden size must be positive".into()));
                }
                if !a.lstm_forget_bias.is_finite() {
                    return Err(Error::Spec("lstm forget bias must be finite".into()));
                }
            }
            ModelKind::Cnn | ModelKind::Autoencoder => {
                if a.conv_channels.is_empty() || a.conv_channels.contains(&0) {
                    return Err(Error::Spec(
                        "conv channels must be non-empty and positive".into(),
                    ));
                }
                if a.kernel_size == 0 || a.kernel_size.is_multiple_of(2) {
                    return Err(Error::Spec(format!(
                        "kernel size must be odd, got {}",
                        a.kernel_size
                    )));
                }
                if a.pool == 0 {
                    return Err(Error::Spec("pool window must be positive".into()));
                }
                if self.kind == ModelKind::Cnn && a.cnn_head_hidden == 0 {
                    return Err(Error::Spec("cnn head width must be positive".into()));
                }
                let sizes = self.conv_sizes();
                if let Some(&(h, w)) = sizes.iter().find(|&&(h, w)| h == 0 || w == 0) {
                    return Err(Error::Spec(format!(
                        "input {}×{} is too small for {} conv stages with pool {} (reaches {h}×{w})",
                        self.t_max,
                        self.frame_width(),
                        a.conv_channels.len(),
                        a.pool
                    )));
                }
            }
        }
        Ok(())
    }
}
