//! Modulation classification from correntropy features with a small 1-D CNN.

mod correntropy;
mod dataset;
mod model;

pub use correntropy::{complex_correntropy, kernel_peak, normalize_by_max, CorrentropyFeature};
pub use dataset::{
    build_dataset, synthesize_message, AmcDataset, AmcDatasetSpec, AmcExample, AmcNoise,
};
pub use model::{
    amc_architecture, confusion, train, AmcHyperParams, AmcModel, AmcOptimizer, ConfusionMatrix,
    FeatureScaler, TrainingCurve,
};
