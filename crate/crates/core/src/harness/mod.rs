mod config;
mod e2e;
mod run;

pub use config::{
    AblationSection, Algorithm, AmcSection, DecoderKind, DirmSection, E2eSection, ExperimentConfig,
    IubrSection, LdpcSection, SEED_ENV,
};
pub use e2e::{
    e2e_receive, estimate_noise_variance, reconstruct_stream, synthesize_stream, ReceiveOutput,
    ReceiverModels, StageReport, NOISE_VARIANCE_FLOOR,
};
pub use run::{run, version_string, RunInputs, RunRecord, Verb};
