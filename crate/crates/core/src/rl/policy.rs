use std::sync::Arc;

use super::state::{rl_state, squash_action, RlState};
use crate::domain::{Floor, Outcome, Party};
use crate::error::Result;
use crate::negotiators::{accept_decision, AcceptancePolicy, OfferHistory};
use crate::protocol::{Action, Negotiator, SessionContext};

/// Maps a state to a raw action in `[−1, 1]`.
pub trait BiddingPolicy: Send + Sync {
    fn raw_action(&self, state: &RlState) -> f64;
}

/// Runs a bidding policy with a fixed acceptance condition inside the protocol.
pub struct PolicyNegotiator {
    policy: Arc<dyn BiddingPolicy>,
    acceptance: AcceptancePolicy,
    party: Option<Party>,
    deadline: usize,
    history: OfferHistory,
}

impl PolicyNegotiator {
    pub fn new(policy: Arc<dyn BiddingPolicy>, acceptance: AcceptancePolicy) -> Self {
        Self {
            policy,
            acceptance,
            party: None,
            deadline: 1,
            history: OfferHistory::default(),
        }
    }
}

/// Target utility the policy proposes in the current state.
pub fn proposed_utility(policy: &dyn BiddingPolicy, t_r: f64, history: &OfferHistory, reservation: f64) -> f64 {
    squash_action(policy.raw_action(&rl_state(t_r, history)), reservation)
}

impl Negotiator for PolicyNegotiator {
    fn on_session_start(&mut self, party: &Party, ctx: &SessionContext) -> Result<()> {
        self.acceptance.validate()?;
        self.party = Some(party.clone());
        self.deadline = ctx.deadline_rounds;
        self.history.clear();
        Ok(())
    }

    fn act(&mut self, t_r: f64, standing: Option<&Outcome>, _own_last: Option<&Outcome>) -> Action {
        let Some(party) = &self.party else {
            return Action::EndNegotiation;
        };
        let observed = self.history.observe(party, standing);
        // Same ordering as the training environment: the state already
        // contains the standing offer.
        let u_next = proposed_utility(self.policy.as_ref(), t_r, &self.history, party.reservation());
        if let Some(u_in) = observed {
            if accept_decision(&self.acceptance, t_r, u_in, u_next, self.history.earlier_opponent()) {
                return Action::Accept;
            }
        }
        match party.nearest_index(u_next, Floor::Above(party.reservation())) {
            Ok(idx) => {
                self.history.own.push(party.utility_at(idx));
                Action::Offer(party.outcome(idx))
            }
            Err(_) => Action::EndNegotiation,
        }
    }
}
