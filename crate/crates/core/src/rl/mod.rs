//! Negotiation against a fixed opponent as an episodic reinforcement
//! learning environment.

mod env;
mod evaluate;
mod policy;
mod state;

pub use env::{EpisodeRow, NegotiationEnv, Transition, NO_AGREEMENT_REWARD};
pub use evaluate::{summarize, versus_random_profiles, EvalSummary};
pub use policy::{proposed_utility, BiddingPolicy, PolicyNegotiator};
pub use state::{rl_state, squash_action, RlState, HISTORY_LEN, STATE_DIM};
