//! Datasets: synthetic Gaussian mixtures, CSV interchange, standardization
//! and splitting.

mod csv_io;
mod dataset;
mod mixture;
mod regression;
mod standardize;

pub use csv_io::{load_csv, read_csv, save_csv, write_csv};
pub use dataset::{split, Dataset};
pub use mixture::{gen_mixture, Covariance, MixtureComponent, Preset, PresetData};
pub use regression::{
    constant_targets, heteroscedastic_sine, homoscedastic_sine, noise_std, RegressionData, SINE_DOMAIN,
};
pub use standardize::Standardizer;
