//! Outcome spaces, linear-additive preference profiles, scenarios and the
//! inverse utility map.

mod generate;
mod party;
mod scenario;
mod space;
mod utility;

pub use generate::{generate_scenario, random_profile, OPPOSITION_TOLERANCE};
pub use party::{inverse_utility, Floor, Party};
pub use scenario::{ProfileFile, Scenario, ScenarioFile, Side};
pub use space::{Issue, Outcome, OutcomeSpace};
pub use utility::{PreferenceProfile, RawUtility, UtilityFunction};

/// Utility of `outcome` under `party`'s profile.
pub fn utility(party: &Party, outcome: &Outcome) -> crate::Result<f64> {
    party.utility(outcome)
}

/// Opposition of a scenario; see [`Scenario::opposition`].
pub fn opposition(scenario: &Scenario) -> f64 {
    scenario.opposition()
}
