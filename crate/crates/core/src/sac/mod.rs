//! Soft actor-critic with twin critics, soft-updated targets and a
//! trainable entropy temperature.

mod agent;
mod bundle;
mod config;
mod replay;
mod train;

pub use agent::{log_one_minus_tanh_sq, squashed_log_prob, SacAgent, UpdateStats, LOG_STD_MAX, LOG_STD_MIN};
pub use bundle::{bundle_factory, StrategyBundle, BUNDLE_FORMAT, BUNDLE_VERSION};
pub use config::SacConfig;
pub use replay::ReplayBuffer;
pub use train::{train, write_curve_csv, CurveRow, TrainingOutput, TrainingRequest};
