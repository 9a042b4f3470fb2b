//! Compressed spectrum sensing with a learned sensing matrix and a
//! convolutional reconstruction network.

mod codec;
mod dataset;
mod metrics;

pub use codec::{
    compress, mean_mse, reconstruction_architecture, train_end_to_end, Codec, IubrHyperParams,
    LossCurve, Measurement, SensingMatrix,
};
pub use dataset::{
    generate_dataset, generate_sample, IubrDataset, IubrDatasetConfig, Spectrum, SpectrumSignal,
};
pub use metrics::{
    calibrate_threshold, cosine_similarity, detect, evaluate, metrics, ssim_1d, ReconMetrics,
    SSIM_WINDOW,
};
