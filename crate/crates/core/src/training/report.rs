use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accuracy, 2×2 confusion counts (`confusion[actual][predicted]`) and the
/// names of misclassified samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub loss: f64,
    pub confusion: [[usize; 2]; 2],
    pub misclassified: Vec<String>,
}

impl Evaluation {
    pub fn total(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        self.confusion[0][0] + self.confusion[1][1]
    }
}

/// Curves and final metrics of one training run.
///
/// The serialised form omits `wall_clock_seconds`, so two runs with the same
/// seed, data and hyperparameters produce byte-identical report files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub model: String,
    pub seed: u64,
    pub epochs: usize,
    pub train_size: usize,
    pub validation_size: usize,
    pub test_size: usize,
    pub train_loss: Vec<f64>,
    pub train_accuracy: Vec<f64>,
    pub validation_loss: Vec<f64>,
    pub validation_accuracy: Vec<f64>,
    /// Correct predictions over test ∪ validation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_validation_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<Evaluation>,
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

impl TrainReport {
    pub fn test_accuracy(&self) -> Option<f64> {
        self.test.as_ref().map(|t| t.accuracy)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(format!("cannot encode report: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("cannot decode report: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let report = TrainReport {
            model: "cnn".into(),
            seed: 7,
            epochs: 2,
            train_size: 66,
            validation_size: 11,
            test_size: 34,
            train_loss: vec![0.7, 0.1 + 0.2],
            train_accuracy: vec![0.5, 1.0],
            validation_loss: vec![0.69, 0.2],
            validation_accuracy: vec![0.5, 0.9],
            test_validation_accuracy: Some(44.0 / 45.0),
            test: Some(Evaluation {
                accuracy: 33.0 / 34.0,
                loss: 0.123,
                confusion: [[17, 1], [0, 16]],
                misclassified: vec!["Venir".into()],
            }),
            wall_clock_seconds: 1.5,
        };
        let text = report.to_toml().unwrap();
        assert!(text.contains("seed = 7"));
        assert!(!text.contains("wall_clock"));
        let back = TrainReport::from_toml(&text).unwrap();
        assert_eq!(
            back,
            TrainReport {
                wall_clock_seconds: 0.0,
                ..report
            }
        );
    }
}
