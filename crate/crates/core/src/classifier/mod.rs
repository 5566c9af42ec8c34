//! 1D-CNN opponent classifier over windows of utility-projected opponent offers.

mod dataset;
mod model;
mod window;

pub use dataset::{build_dataset, offer_streams, Dataset, DatasetSpec, Sample, DEFAULT_WINDOW, MAX_CLASSES};
pub use model::{
    classifier_network, train_classifier, ClassifierConfig, ClassifierModel, EpochStats, CLASSIFIER_FORMAT,
    CLASSIFIER_VERSION, DENSE_WIDTH, FILTERS, KERNEL,
};
pub use window::{windows_of, WindowBuilder};
