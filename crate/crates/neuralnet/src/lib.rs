//! Dense rectifier networks trained with Adam, plus a portable model file.

pub mod model_file;
pub mod network;
pub mod optim;
pub mod scaler;
pub mod train;

pub use model_file::{ModelFile, ModelFileError, Predictions, TrainingMeta};
pub use network::{ArchSpec, Gradients, Layer, NetError, Network, OutputKind, CLASS_VALUES};
pub use optim::Adam;
pub use scaler::Scaler;
pub use train::{train, EpochStats, Targets, TrainConfig, TrainOutcome};
