use std::sync::Arc;

use serde::Serialize;

use crate::domain::{random_profile, OutcomeSpace, PreferenceProfile, Scenario, Side};
use crate::error::Result;
use crate::protocol::{run_session_with, NegotiatorFactory, SessionConfig, SessionOutcome};
use crate::seed;

use super::NO_AGREEMENT_REWARD;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EvalSummary {
    pub sessions: usize,
    pub mean_utility: f64,
    pub mean_reward: f64,
    pub agreement_rate: f64,
}

/// Sessions of `agent` (side A, first mover, fixed profile) against
/// `opponent` holding a freshly drawn random profile each session, the
/// setting the training environment uses.
pub fn versus_random_profiles(
    agent: &dyn NegotiatorFactory,
    opponent: &dyn NegotiatorFactory,
    space: &Arc<OutcomeSpace>,
    own_profile: &PreferenceProfile,
    sessions: usize,
    deadline_rounds: usize,
    seed_value: u64,
) -> Result<Vec<SessionOutcome>> {
    (0..sessions as u64)
        .map(|i| {
            let opp = random_profile(seed::derive(seed_value, &[i, 1]), space)?;
            let scenario = Scenario::new((**space).clone(), own_profile.clone(), opp)?;
            let config = SessionConfig::new(deadline_rounds, seed::derive(seed_value, &[i, 2]))?;
            let mut a = agent.create()?;
            let mut b = opponent.create()?;
            Ok(run_session_with(a.as_mut(), b.as_mut(), &scenario, &config, Side::A)?.0)
        })
        .collect()
}

pub fn summarize(outcomes: &[SessionOutcome]) -> EvalSummary {
    let n = outcomes.len().max(1) as f64;
    let agreed = outcomes.iter().filter(|o| o.agreement.is_some()).count();
    EvalSummary {
        sessions: outcomes.len(),
        mean_utility: outcomes.iter().map(|o| o.utility_a).sum::<f64>() / n,
        mean_reward: outcomes
            .iter()
            .map(|o| if o.agreement.is_some() { o.utility_a } else { NO_AGREEMENT_REWARD })
            .sum::<f64>()
            / n,
        agreement_rate: agreed as f64 / n,
    }
}
