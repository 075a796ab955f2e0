//! Training loops, evaluation, the contrastive loss and the SSL pipeline.

mod contrastive;
mod optim;
mod report;
mod ssl;
mod supervised;

pub use contrastive::{contrastive_loss, Contrastive};
pub use optim::{Optimizer, OptimizerKind};
pub use report::{Evaluation, TrainReport};
pub use ssl::{run_ssl_comparison, run_ssl_pipeline, SslComparison};
pub use supervised::{evaluate, predict, train_reconstruction, train_supervised};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ModelKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    /// Contrastive temperature τ.
    pub temperature: f64,
    /// Contrastive weight λ; 0 disables the term.
    pub contrastive_weight: f64,
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 8,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::adam(),
            temperature: 0.5,
            contrastive_weight: 0.0,
            seed: 0,
        }
    }
}

impl HyperParams {
    /// Defaults with a per-model learning rate. The FC model's first layer
    /// sums 3·n·t_max inputs, so it needs a 10× smaller step.
    pub fn recommended(kind: ModelKind) -> Self {
        let learning_rate = match kind {
            ModelKind::Fc => 1e-4,
            _ => 1e-3,
        };
        Self {
            learning_rate,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Contract(format!("invalid hyperparameter: {what}")));
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and nonnegative");
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return bad("temperature must be positive");
        }
        if !(self.contrastive_weight >= 0.0 && self.contrastive_weight.is_finite()) {
            return bad("contrastive_weight must be nonnegative");
        }
        if let OptimizerKind::Adam { beta1, beta2, eps } = self.optimizer {
            if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || eps <= 0.0 {
                return bad("Adam needs 0 ≤ β < 1 and ε > 0");
            }
        }
        Ok(())
    }
}
