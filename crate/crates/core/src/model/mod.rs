//! The three trainable architectures, their joint objective, the training
//! loop, and the binary model file format.

mod cccpde;
mod classifier;
mod config;
mod ffnn;
mod glm;
mod io;
mod train;

pub use cccpde::{CccpDeModel, CccpDeOutput, JointLoss, DEFAULT_VOLUME_SCALE, DISC_BLOCKS};
pub use classifier::{ClassifierCache, SigmoidClassifier};
pub use config::{LossWeights, TrainConfig};
pub use ffnn::{FfnnModel, FFNN_BLOCKS};
pub use glm::{GlmPrediction, GlmRegressor};
pub use io::{decode_model, encode_model, load_model, save_model, SavedModel, FORMAT_VERSION, MAGIC};
pub use train::{fit_glm, glm_config, glm_fit_and_predict, train, TrainReport, Trainable};
