//! Base negotiators and acceptance conditions.

mod acceptance;
mod boulware;
mod history;
mod random;
mod tit_for_tat;

use std::sync::Arc;

pub use acceptance::{accept_decision, AcceptancePolicy, Window, DEFAULT_ACCEPT_TIME};
pub use boulware::{boulware_target, TimeDependent, TimeDependentParams};
pub use history::OfferHistory;
pub use random::{random_action, RandomNegotiator};
pub use tit_for_tat::{tit_for_tat_target, TitForTat};

use crate::error::{Error, Result};
use crate::protocol::{FnFactory, Negotiator, SharedFactory};

pub const BOULWARE: &str = "boulware";
pub const TIT_FOR_TAT: &str = "tit_for_tat";
pub const RANDOM: &str = "random";

/// Registry order; classifier class indices follow it.
pub const BASELINE_IDS: [&str; 3] = [BOULWARE, TIT_FOR_TAT, RANDOM];

pub fn baseline_factory(id: &str) -> Result<SharedFactory> {
    let make: fn() -> Box<dyn Negotiator> = match id {
        BOULWARE => || Box::new(TimeDependent::boulware()),
        TIT_FOR_TAT => || Box::new(TitForTat::default()),
        RANDOM => || Box::new(RandomNegotiator::new()),
        other => return Err(Error::UnknownNegotiator(other.to_string())),
    };
    Ok(Arc::new(FnFactory::new(id, move || Ok(make()))))
}

pub fn is_baseline(id: &str) -> bool {
    BASELINE_IDS.contains(&id)
}
